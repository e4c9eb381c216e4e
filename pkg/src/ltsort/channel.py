"""Memoryless binary erasure channel with a piecewise-constant erasure rate.

Segment boundaries are expressed on the sender-side transmission-index
clock; at each boundary the sender can be notified so it adapts its queue
before transmission continues.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .scheduler import Schedule


@dataclass
class ErasureProcess:
    """Ordered (start_transmission_index, epsilon) segments; the first must
    start at index 0 and every epsilon lies in [0, 1)."""

    segments: list
    seed: int = None

    def __post_init__(self):
        if not self.segments:
            raise ParameterError("erasure process needs at least one segment")
        starts = [s for s, _ in self.segments]
        if starts[0] != 0:
            raise ParameterError("first segment must start at index 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ParameterError("segment start indices must be strictly increasing")
        if any(not 0.0 <= eps < 1.0 for _, eps in self.segments):
            raise ParameterError("each epsilon must be in [0,1)")

    @classmethod
    def constant(cls, epsilon: float, seed=None) -> "ErasureProcess":
        return cls(segments=[(0, epsilon)], seed=seed)

    def epsilon_at(self, tx_index: int) -> float:
        eps = self.segments[0][1]
        for start, seg_eps in self.segments:
            if tx_index >= start:
                eps = seg_eps
            else:
                break
        return eps

    def boundary_at(self, tx_index: int):
        """epsilon of the segment starting exactly at tx_index, excluding the
        initial segment; None otherwise."""
        for start, eps in self.segments[1:]:
            if start == tx_index:
                return eps
        return None


def transmit(order, symbols, process: ErasureProcess, rng=None,
             on_rate_change=None, on_transmit=None):
    """Push symbols through the channel in schedule order.

    Each transmission is erased independently with the segment-active
    epsilon; the returned list of (transmission_index, symbol) holds only
    the delivered ones, in order.

    At each segment boundary `on_rate_change(epsilon_new, remaining)` is
    invoked before the transmission at that index; it may return a
    replacement queue (e.g. re-sorted, grown, or thinned) or None to keep
    the current one.  `on_transmit(symbol)` fires for every transmission,
    erased or not, so the sender can track its belief state.
    """
    if isinstance(order, Schedule):
        by_id = {s.id: s for s in symbols}
        queue = deque(by_id[i] for i in order.order)
    else:
        queue = deque(order)
    if rng is None:
        rng = np.random.default_rng(process.seed)

    delivered = []
    tx_index = 0
    while queue:
        eps_new = process.boundary_at(tx_index)
        if eps_new is not None:
            if on_rate_change is not None:
                replacement = on_rate_change(eps_new, list(queue))
                if replacement is not None:
                    queue = deque(replacement)
            if not queue:
                break
        symbol = queue.popleft()
        if on_transmit is not None:
            on_transmit(symbol)
        if rng.random() >= process.epsilon_at(tx_index):
            delivered.append((tx_index, symbol))
        tx_index += 1
    return delivered
