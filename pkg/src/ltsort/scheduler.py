"""Greedy transmission sorting for LT encoded symbols.

The sender keeps a belief vector rho, where rho[j] is the probability that
source symbol j is still unrecovered at the destination.  Each candidate
encoded symbol is scored by the probability that it recovers exactly one
new source symbol on delivery:

    p_dec(i) = (1 - eps) * sum_{l in N(i)} rho(l) * prod_{v in N(i), v != l} (1 - rho(v))

The greedy loop picks the argmax (ties: lower degree, then random or lowest
id), appends it to the order, and updates rho for the picked symbol's
neighbors using the pre-update values:

    rho(j) <- rho(j) * (1 - (1 - eps) * prod_{v in N(i), v != j} (1 - rho(v)))

At eps = 1 every score is zero and the order degenerates to plain
degree-ascending; at eps = 0 the sender tracks the receiver exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._fast import HAVE_NUMBA, build_csr, greedy_order
from .errors import ParameterError
from .lt_codec import Encoder, EncodedSymbol, SourceBlock, generate_symbols

# p_dec values closer than this are considered tied; long double products
# make exact equality fragile.
TIE_TOL = 1e-12

TIE_MODES = ("seeded_random", "lowest_index")
BASELINE_MODES = ("random", "degree_ascending")


@dataclass
class BeliefState:
    """Sender-side per-source-symbol non-recovery probabilities."""

    rho: np.ndarray
    epsilon: float

    @classmethod
    def fresh(cls, k: int, epsilon: float) -> "BeliefState":
        if not 0.0 <= epsilon <= 1.0:
            raise ParameterError(f"epsilon must be in [0,1], got {epsilon}")
        return cls(rho=np.ones(k), epsilon=epsilon)

    @property
    def k(self) -> int:
        return self.rho.size


@dataclass
class Schedule:
    order: list
    mode: str = "sorted"

    def __len__(self):
        return len(self.order)


def _products(neighbors, rho):
    # prefix/suffix products of (1 - rho) so each leave-one-out product is O(1)
    d = len(neighbors)
    pre = [1.0] * (d + 1)
    for t, j in enumerate(neighbors):
        pre[t + 1] = pre[t] * (1.0 - rho[j - 1])
    suf = [1.0] * (d + 1)
    for t in range(d - 1, -1, -1):
        suf[t] = suf[t + 1] * (1.0 - rho[neighbors[t] - 1])
    return pre, suf


def decode_probability(symbol: EncodedSymbol, belief: BeliefState) -> float:
    """Probability that transmitting `symbol` recovers a source symbol."""
    pre, suf = _products(symbol.neighbors, belief.rho)
    acc = 0.0
    for t, j in enumerate(symbol.neighbors):
        acc += belief.rho[j - 1] * pre[t] * suf[t + 1]
    return (1.0 - belief.epsilon) * acc


def update_belief(belief: BeliefState, symbol: EncodedSymbol) -> None:
    """Apply the post-transmission belief update for one symbol in place.

    All leave-one-out products use the pre-update rho values.
    """
    pre, suf = _products(symbol.neighbors, belief.rho)
    one_minus_eps = 1.0 - belief.epsilon
    new_vals = []
    for t, j in enumerate(symbol.neighbors):
        new_vals.append(belief.rho[j - 1] * (1.0 - one_minus_eps * pre[t] * suf[t + 1]))
    for j, v in zip(symbol.neighbors, new_vals):
        belief.rho[j - 1] = v


def select_next(candidates, belief: BeliefState, tie_mode="seeded_random", rng=None) -> int:
    """Pick the candidate with maximal p_dec; ties (within TIE_TOL) go to
    the lowest degree, remaining ties to a uniform random candidate (or the
    lowest id in deterministic mode).

    Ties are resolved in a single scan with a running best, so the result
    matches the fast engine comparison-for-comparison."""
    if tie_mode not in TIE_MODES:
        raise ParameterError(f"unknown tie mode: {tie_mode!r}")
    if rng is None and tie_mode == "seeded_random":
        rng = np.random.default_rng()
    best = None
    best_score = 0.0
    n_tied = 1
    for cand in candidates:
        score = decode_probability(cand, belief)
        if best is None:
            best, best_score = cand, score
            continue
        if score > best_score + TIE_TOL:
            best, best_score, n_tied = cand, score, 1
        elif score >= best_score - TIE_TOL:
            if cand.degree < best.degree:
                best, best_score, n_tied = cand, score, 1
            elif cand.degree == best.degree:
                if tie_mode == "lowest_index":
                    if cand.id < best.id:
                        best, best_score = cand, score
                else:
                    # reservoir draw: uniform among the current tie class
                    n_tied += 1
                    if rng.random() < 1.0 / n_tied:
                        best, best_score = cand, score
    if best is None:
        raise ParameterError("empty candidate set")
    return best.id


def build_schedule(
    symbols,
    epsilon: float,
    tie_mode="seeded_random",
    rng=None,
    engine="auto",
    initial_rho=None,
) -> Schedule:
    """Run the full greedy sort over `symbols` and return the transmission order.

    `initial_rho` seeds the belief vector for mid-stream rebuilds (it is
    copied, the caller's array is left untouched); by default rho starts
    all-ones.  `engine` is "naive" (pure-Python full rescore), "fast"
    (incremental numba kernel, identical order), or "auto".
    """
    symbols = list(symbols)
    if not symbols:
        raise ParameterError("no symbols to schedule")
    ids = [s.id for s in symbols]
    if len(set(ids)) != len(ids):
        raise ParameterError("symbol ids must be unique within a scheduled set")
    if not 0.0 <= epsilon <= 1.0:
        raise ParameterError(f"epsilon must be in [0,1], got {epsilon}")
    k = max(j for s in symbols for j in s.neighbors)
    if initial_rho is not None:
        k = max(k, len(initial_rho))

    if engine == "auto":
        engine = "fast" if HAVE_NUMBA else "naive"

    if engine == "fast":
        rho = np.ones(k) if initial_rho is None else np.asarray(initial_rho, float).copy()
        if tie_mode == "lowest_index":
            prio = np.empty(len(symbols))
            prio[np.argsort(np.asarray(ids, dtype=np.int64), kind="stable")] = np.arange(
                len(symbols)
            )
        else:
            if rng is None:
                rng = np.random.default_rng()
            prio = rng.random(len(symbols))
        indptr, indices, src_indptr, src_indices = build_csr(
            [s.neighbors for s in symbols], k
        )
        positions = greedy_order(
            indptr, indices, src_indptr, src_indices, rho, float(epsilon), prio, TIE_TOL
        )
        return Schedule(order=[ids[p] for p in positions], mode="sorted")

    if engine != "naive":
        raise ParameterError(f"unknown engine: {engine!r}")

    rho = np.ones(k) if initial_rho is None else np.asarray(initial_rho, float).copy()
    belief = BeliefState(rho=rho, epsilon=float(epsilon))
    by_id = {s.id: s for s in symbols}
    remaining = dict(by_id)
    order = []
    while remaining:
        sid = select_next(remaining.values(), belief, tie_mode, rng)
        order.append(sid)
        update_belief(belief, remaining.pop(sid))
    return Schedule(order=order, mode="sorted")


def baseline_schedule(symbols, mode: str, rng=None) -> Schedule:
    """Conventional orders: uniform shuffle, or ascending degree with random
    tie order."""
    symbols = list(symbols)
    if mode not in BASELINE_MODES:
        raise ParameterError(f"unknown baseline mode: {mode!r}")
    if rng is None:
        rng = np.random.default_rng()
    if mode == "random":
        perm = rng.permutation(len(symbols))
    else:
        degrees = np.fromiter((s.degree for s in symbols), np.int64, len(symbols))
        perm = np.lexsort((rng.random(len(symbols)), degrees))
    return Schedule(order=[symbols[int(p)].id for p in perm], mode=mode)


def injection_count(epsilon_old, epsilon_new, k, gamma_succ, gamma_c) -> int:
    """How many fresh symbols compensate an erasure-rate increase."""
    t = (1.0 / (1.0 - epsilon_new) - 1.0 / (1.0 - epsilon_old)) * k * (gamma_succ - gamma_c)
    return max(math.ceil(t), 0)


def adapt_rate_increase(
    remaining_queue,
    belief: BeliefState,
    epsilon_new: float,
    k: int,
    gamma_succ: float,
    gamma_c: float,
    encoder: Encoder,
    tie_mode="seeded_random",
    rng=None,
    engine="auto",
):
    """Handle an erasure-rate increase: inject fresh symbols so the receiver
    still collects k * gamma_succ, then re-sort the whole queue from the
    current belief.  Returns (queue in new order, Schedule)."""
    if not epsilon_new > belief.epsilon:
        raise ParameterError("adapt_rate_increase requires epsilon_new > current epsilon")
    count = injection_count(belief.epsilon, epsilon_new, k, gamma_succ, gamma_c)
    queue = list(remaining_queue) + (encoder.generate(count) if count else [])
    belief.epsilon = float(epsilon_new)
    schedule = build_schedule(
        queue, belief.epsilon, tie_mode, rng, engine, initial_rho=belief.rho
    )
    by_id = {s.id: s for s in queue}
    return [by_id[i] for i in schedule.order], schedule


def adapt_rate_decrease(
    remaining_queue,
    belief: BeliefState,
    epsilon_new: float,
    rng,
    tie_mode="seeded_random",
    engine="auto",
    exact_count=False,
):
    """Handle an erasure-rate decrease: thin the remaining queue so the
    receiver does not overshoot k * gamma_succ, then re-sort the survivors.

    Thinning keeps each symbol independently with probability
    (1 - eps_old) / (1 - eps_new); exact_count removes exactly the expected
    number instead."""
    if not epsilon_new < belief.epsilon:
        raise ParameterError("adapt_rate_decrease requires epsilon_new < current epsilon")
    queue = list(remaining_queue)
    keep_p = (1.0 - belief.epsilon) / (1.0 - epsilon_new)
    if exact_count:
        n_keep = round(keep_p * len(queue))
        kept_idx = sorted(rng.choice(len(queue), size=n_keep, replace=False))
        queue = [queue[i] for i in kept_idx]
    else:
        mask = rng.random(len(queue)) < keep_p
        queue = [s for s, keep in zip(queue, mask) if keep]
    belief.epsilon = float(epsilon_new)
    if not queue:
        return [], Schedule(order=[], mode="sorted")
    schedule = build_schedule(
        queue, belief.epsilon, tie_mode, rng, engine, initial_rho=belief.rho
    )
    by_id = {s.id: s for s in queue}
    return [by_id[i] for i in schedule.order], schedule


def precompute_offline_schedule(
    k: int,
    symbol_len: int,
    dist,
    m: int,
    epsilon: float,
    rng,
    tie_mode="seeded_random",
    engine="auto",
):
    """Build the order on a dummy all-zero block; the order depends only on
    the neighbor sets and epsilon, so it can be reused with real data and
    each symbol transmitted upon generation.  Returns ({id: neighbors}, Schedule)."""
    dummy = SourceBlock.zeros(k, symbol_len)
    symbols = generate_symbols(dummy, dist, m, rng)
    schedule = build_schedule(symbols, epsilon, tie_mode, rng, engine)
    return {s.id: s.neighbors for s in symbols}, schedule


def save_schedule(schedule: Schedule, path, k, m=None, epsilon=None, seed=None) -> None:
    m = len(schedule.order) if m is None else m
    with open(path, "w") as fh:
        fh.write(
            f"# k={k} m={m} epsilon={epsilon} mode={schedule.mode} seed={seed}\n"
        )
        for sid in schedule.order:
            fh.write(f"{sid}\n")


def load_schedule(path):
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ParameterError(f"missing schedule header in {path}")
        meta = {}
        for token in header[1:].split():
            key, _, val = token.partition("=")
            meta[key] = None if val == "None" else val
        order = [int(line) for line in fh if line.strip()]
    mode = meta.get("mode", "sorted")
    for key in ("k", "m", "seed"):
        if meta.get(key) is not None:
            meta[key] = int(meta[key])
    if meta.get("epsilon") is not None:
        meta["epsilon"] = float(meta["epsilon"])
    return Schedule(order=order, mode=mode), meta
