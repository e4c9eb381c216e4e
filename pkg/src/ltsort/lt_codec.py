"""LT encoding and the iterative peeling decoder.

Encoded symbols are XORs of uniformly chosen distinct source symbols; the
decoder peels degree-one symbols and propagates recoveries through a buffer
of partially reduced symbols (the ripple), recording the recovered fraction
after every delivery.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .degree_distributions import DegreeDistribution, sample_degree
from .errors import MalformedSymbolError, ParameterError


def xor_bytes(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


@dataclass
class SourceBlock:
    """k source payloads of identical byte length."""

    k: int
    symbol_len: int
    data: list

    def __post_init__(self):
        if self.k < 1 or self.symbol_len < 1:
            raise ParameterError("k and symbol_len must be positive")
        if len(self.data) != self.k:
            raise ParameterError(f"expected {self.k} payloads, got {len(self.data)}")
        if any(len(p) != self.symbol_len for p in self.data):
            raise ParameterError("all payloads must have length symbol_len")

    @classmethod
    def random(cls, k, symbol_len, rng: np.random.Generator):
        raw = rng.integers(0, 256, size=k * symbol_len, dtype=np.uint8).tobytes()
        data = [raw[i * symbol_len : (i + 1) * symbol_len] for i in range(k)]
        return cls(k, symbol_len, data)

    @classmethod
    def zeros(cls, k, symbol_len):
        return cls(k, symbol_len, [bytes(symbol_len)] * k)


@dataclass(frozen=True)
class EncodedSymbol:
    """One encoded symbol: sorted distinct neighbor indices (1-based) plus
    the XOR of the referenced source payloads."""

    id: int
    neighbors: tuple
    payload: bytes

    @property
    def degree(self) -> int:
        return len(self.neighbors)


def make_symbol(sym_id: int, neighbors, block: SourceBlock) -> EncodedSymbol:
    """XOR the referenced source payloads into a fresh symbol."""
    idx = tuple(sorted(set(neighbors)))
    acc = 0
    for j in idx:
        acc ^= int.from_bytes(block.data[j - 1], "big")
    return EncodedSymbol(sym_id, idx, acc.to_bytes(block.symbol_len, "big"))


def _sample_neighbors(k: int, d: int, rng: np.random.Generator) -> tuple:
    # rejection sampling; d << k in practice so collisions are rare
    chosen = set()
    while len(chosen) < d:
        chosen.add(int(rng.integers(1, k + 1)))
    return tuple(sorted(chosen))


def generate_symbols(
    block: SourceBlock,
    dist: DegreeDistribution,
    m: int,
    rng: np.random.Generator,
    first_id: int = 1,
):
    """Generate m encoded symbols: sample a degree, choose that many distinct
    source indices uniformly, XOR their payloads."""
    if m < 1:
        raise ParameterError(f"m must be positive, got {m}")
    if dist.k != block.k:
        raise ParameterError("distribution block size does not match source block")
    out = []
    for i in range(m):
        d = sample_degree(dist, rng)
        neighbors = _sample_neighbors(block.k, d, rng)
        out.append(make_symbol(first_id + i, neighbors, block))
    return out


@dataclass
class Encoder:
    """Keeps the generation state so later injections continue the id sequence."""

    block: SourceBlock
    dist: DegreeDistribution
    rng: np.random.Generator
    next_id: int = 1

    def generate(self, n: int):
        syms = generate_symbols(self.block, self.dist, n, self.rng, first_id=self.next_id)
        self.next_id += n
        return syms


@dataclass
class RecoveryTrace:
    """Per-delivery (gamma, z) record; gamma counts received symbols / k.

    tx_indices optionally records the sender-side transmission index of each
    delivery so both clocks are available.
    """

    gammas: list = field(default_factory=list)
    zs: list = field(default_factory=list)
    tx_indices: list = field(default_factory=list)

    def append(self, gamma, z, tx_index=None):
        self.gammas.append(gamma)
        self.zs.append(z)
        self.tx_indices.append(tx_index)

    def __len__(self):
        return len(self.gammas)


class DecoderState:
    """Peeling decoder with an inverted index from source index to the
    buffered symbols containing it, so each ripple step only touches
    affected symbols."""

    def __init__(self, k: int, symbol_len: int):
        self.k = k
        self.symbol_len = symbol_len
        self.recovered = {}  # source index -> payload
        self.buffer = {}  # key -> [set of remaining neighbors, payload int]
        self._index = {}  # source index -> set of buffer keys
        self._next_key = 0
        self.delivered_count = 0
        self.trace = RecoveryTrace()

    def recovered_fraction(self) -> float:
        return len(self.recovered) / self.k

    def ingest(self, symbol: EncodedSymbol, tx_index=None) -> int:
        """Deliver one symbol; returns how many source symbols it recovered."""
        if not symbol.neighbors or any(not 1 <= j <= self.k for j in symbol.neighbors):
            raise MalformedSymbolError(f"neighbors out of range: {symbol.neighbors}")
        payload = int.from_bytes(symbol.payload, "big")
        remaining = set()
        for j in symbol.neighbors:
            got = self.recovered.get(j)
            if got is not None:
                payload ^= int.from_bytes(got, "big")
            else:
                remaining.add(j)

        newly = 0
        if len(remaining) == 1:
            newly = self._ripple(remaining.pop(), payload)
        elif len(remaining) >= 2:
            key = self._next_key
            self._next_key += 1
            self.buffer[key] = [remaining, payload]
            for j in remaining:
                self._index.setdefault(j, set()).add(key)
        # remaining degree 0: redundant, still counts as delivered

        self.delivered_count += 1
        self.trace.append(
            self.delivered_count / self.k, self.recovered_fraction(), tx_index
        )
        return newly

    def _ripple(self, j: int, payload: int) -> int:
        stack = [(j, payload)]
        newly = 0
        while stack:
            j, payload = stack.pop()
            if j in self.recovered:
                continue
            self.recovered[j] = payload.to_bytes(self.symbol_len, "big")
            newly += 1
            for key in self._index.pop(j, ()):
                entry = self.buffer.get(key)
                if entry is None:
                    continue
                remaining, buf_payload = entry
                remaining.discard(j)
                buf_payload ^= payload
                if len(remaining) == 1:
                    del self.buffer[key]
                    last = next(iter(remaining))
                    self._index.get(last, set()).discard(key)
                    stack.append((last, buf_payload))
                else:
                    entry[1] = buf_payload
        return newly


def decoder_ingest(state: DecoderState, symbol: EncodedSymbol, tx_index=None) -> int:
    return state.ingest(symbol, tx_index)


def recovered_fraction(state: DecoderState) -> float:
    return state.recovered_fraction()


# --- binary serialization (test fixtures) ---------------------------------
# record: u32 id, u16 degree, u16 payload_len, degree * u32 neighbors, payload


def pack_symbol(symbol: EncodedSymbol) -> bytes:
    head = struct.pack(
        ">IHH%dI" % symbol.degree,
        symbol.id,
        symbol.degree,
        len(symbol.payload),
        *symbol.neighbors,
    )
    return head + symbol.payload


def unpack_symbol(buf: bytes, offset: int = 0):
    sym_id, degree, plen = struct.unpack_from(">IHH", buf, offset)
    offset += 8
    neighbors = struct.unpack_from(">%dI" % degree, buf, offset)
    offset += 4 * degree
    payload = bytes(buf[offset : offset + plen])
    return EncodedSymbol(sym_id, tuple(neighbors), payload), offset + plen


def pack_symbols(symbols) -> bytes:
    return b"".join(pack_symbol(s) for s in symbols)


def unpack_symbols(buf: bytes):
    out, offset = [], 0
    while offset < len(buf):
        sym, offset = unpack_symbol(buf, offset)
        out.append(sym)
    return out
