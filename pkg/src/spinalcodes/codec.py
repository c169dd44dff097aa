"""Spinal code primitives: hash chain, symbol generation, QAM mapping, ML decoding.

A spinal encoder folds an n-bit message into a chain of v-bit spine values,
one per k-bit segment, and each spine value seeds a counter-mode symbol
generator that emits one constellation point per transmitted pass.  The
decoder inverts this by exhaustive maximum-likelihood search over the
message tree, reusing partial path costs across shared prefixes.

Conventions pinned here (they matter for reproducibility):

* Bit order: ``Message.bits[0]`` is the first (most significant) bit; segment
  ``i`` covers bits ``[(i-1)k, ik)`` and is read MSB-first.  Lexicographic
  order on bit strings therefore equals numeric order of ``Message.to_int()``.
* Constellation indexing: row-major over the square grid, imaginary axis
  ascending with the row index, real axis ascending with the column index.
* Metric accumulation: each segment's subtotal adds its pass terms in
  ascending pass order, and the path cost adds segment subtotals in ascending
  segment order.  The tree decoder, ``segment_costs``, and any flat
  re-evaluation of a path produce bit-identical float sums because they all
  group additions this exact way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_MASK64 = (1 << 64) - 1

# Domain separation between the chain hash and the symbol generator.
_CHAIN_TAG = 0xA0761D6478BD642F
_SYMBOL_TAG = 0xE7037ED1A0B428DB


class BudgetExceededError(RuntimeError):
    """Raised when a request exceeds a configured complexity budget."""


#: Exhaustive ML enumerates 2^n messages; refuse beyond this many bits
#: unless the caller raises the cap explicitly.
DEFAULT_DECODE_BUDGET_BITS = 24


# ---------------------------------------------------------------------------
# 64-bit mixers (pluggable via CodeParams.hash_id)
# ---------------------------------------------------------------------------

def _splitmix64_int(z: int) -> int:
    """One SplitMix64 step on a python int (wrapping 64-bit arithmetic)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _splitmix64_vec(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _fmix64_int(z: int) -> int:
    """MurmurHash3 64-bit finalizer on a python int."""
    z ^= z >> 33
    z = (z * 0xFF51AFD7ED558CCD) & _MASK64
    z ^= z >> 33
    z = (z * 0xC4CEB9FE1A85EC53) & _MASK64
    return z ^ (z >> 33)


def _fmix64_vec(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(33))
    z = z * np.uint64(0xFF51AFD7ED558CCD)
    z = z ^ (z >> np.uint64(33))
    z = z * np.uint64(0xC4CEB9FE1A85EC53)
    return z ^ (z >> np.uint64(33))


#: hash_id -> (scalar mixer, numpy-uint64 vector mixer)
HASH_REGISTRY = {
    "splitmix64": (_splitmix64_int, _splitmix64_vec),
    "fmix64": (_fmix64_int, _fmix64_vec),
}

DEFAULT_HASH_ID = "splitmix64"


def registered_hashes() -> tuple[str, ...]:
    return tuple(sorted(HASH_REGISTRY))


def _lookup_hash(hash_id: str):
    try:
        return HASH_REGISTRY[hash_id]
    except KeyError:
        raise ValueError(
            f"unknown hash_id {hash_id!r}; registered hashes: "
            + ", ".join(registered_hashes())
        ) from None


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodeParams:
    """Parameters of one spinal code instance.

    n       message length in bits
    k       segment length in bits (k must divide n)
    c       modulation order in bits/symbol; even (square QAM)
    L       number of transmitted passes
    v       spine width in bits (k <= v <= 64)
    d_min   minimum constellation distance
    hash_id registered name of the 64-bit mixer driving hash and RNG
    """

    n: int
    k: int
    c: int
    L: int
    v: int = 32
    d_min: float = 2.0
    hash_id: str = DEFAULT_HASH_ID

    def __post_init__(self):
        if self.k < 1 or self.n < 1 or self.n % self.k != 0:
            raise ValueError(f"k must divide n, got n={self.n}, k={self.k}")
        if self.c % 2 != 0 or not 2 <= self.c <= 16:
            raise ValueError(f"c must be even in [2, 16], got c={self.c}")
        if not self.k <= self.v <= 64:
            raise ValueError(f"v must satisfy k <= v <= 64, got v={self.v}")
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got L={self.L}")
        if not self.d_min > 0:
            raise ValueError(f"d_min must be > 0, got d_min={self.d_min}")
        _lookup_hash(self.hash_id)

    @property
    def n_segments(self) -> int:
        return self.n // self.k


@dataclass(frozen=True)
class Message:
    """An n-bit message, MSB-first."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("message bits must be 0 or 1")

    @classmethod
    def from_int(cls, value: int, n: int) -> "Message":
        if not 0 <= value < (1 << n):
            raise ValueError(f"value out of range for {n}-bit message")
        return cls(tuple((value >> (n - 1 - i)) & 1 for i in range(n)))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Message":
        return cls.from_int(int(rng.integers(0, 1 << n)), n)

    def to_int(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    def segments(self, k: int) -> list[int]:
        """Split into k-bit words m_1..m_{n/k}, each read MSB-first."""
        n = len(self.bits)
        if k < 1 or n % k != 0:
            raise ValueError(f"segment length {k} does not divide n={n}")
        return [
            Message(self.bits[i : i + k]).to_int() for i in range(0, n, k)
        ]


@dataclass(frozen=True, eq=False)
class Constellation:
    """Square QAM grid: 2^c points with adjacent spacing d_min, zero mean."""

    c: int
    d_min: float
    points: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return 1 << self.c


@lru_cache(maxsize=64)
def build_constellation(c: int, d_min: float = 2.0) -> Constellation:
    """Build the 2^(c/2) x 2^(c/2) grid for even c in [2, 16].

    Index p maps row-major: row = p // side moves along the imaginary axis
    (ascending), col = p % side along the real axis (ascending).
    """
    if c % 2 != 0 or not 2 <= c <= 16:
        raise ValueError(f"unsupported modulation: c must be even in [2, 16], got {c}")
    if not d_min > 0:
        raise ValueError(f"d_min must be > 0, got {d_min}")
    side = 1 << (c // 2)
    levels = (2.0 * np.arange(side) - (side - 1)) * (d_min / 2.0)
    points = (levels[None, :] + 1j * levels[:, None]).ravel()
    points.setflags(write=False)
    return Constellation(c=c, d_min=d_min, points=points)


@dataclass(frozen=True, eq=False)
class ObservationGrid:
    """Received samples y and their known fading coefficients h, shape (n/k, L)."""

    y: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.complex128)
        h = np.asarray(self.h, dtype=np.complex128)
        if y.ndim != 2 or y.shape != h.shape:
            raise ValueError(
                f"observation shape mismatch: y {y.shape}, h {h.shape}"
            )
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(h))):
            raise ValueError("observations must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "h", h)

    @property
    def shape(self) -> tuple[int, int]:
        return self.y.shape


# ---------------------------------------------------------------------------
# Hash chain and symbol generation
# ---------------------------------------------------------------------------

def hash_step(s: int, m: int, params: CodeParams) -> int:
    """Next spine value: fold (s, m) through two mixer rounds, keep v bits."""
    if not 0 <= m < (1 << params.k):
        raise ValueError(f"segment word {m} out of range for k={params.k}")
    mix, _ = _lookup_hash(params.hash_id)
    t = mix(s ^ _CHAIN_TAG)
    t = mix(t ^ m)
    return t & ((1 << params.v) - 1)


def _hash_step_vec(spines: np.ndarray, words, params: CodeParams) -> np.ndarray:
    _, mixv = _lookup_hash(params.hash_id)
    t = mixv(spines ^ np.uint64(_CHAIN_TAG))
    t = mixv(t ^ np.asarray(words, dtype=np.uint64))
    return t & np.uint64((1 << params.v) - 1)


def spine_chain(message: Message, params: CodeParams) -> list[int]:
    """Spine values s_1..s_{n/k} from s_0 = 0."""
    if len(message.bits) != params.n:
        raise ValueError(
            f"invalid message: expected {params.n} bits, got {len(message.bits)}"
        )
    chain = []
    s = 0
    for m in message.segments(params.k):
        s = hash_step(s, m, params)
        chain.append(s)
    return chain


def rng_symbol(s: int, j: int, params: CodeParams) -> int:
    """c-bit symbol index for pass j from spine value s.

    Counter mode over the mixer: the pass index is folded in after a
    domain-separation tag, so any pass is accessible in O(1) and symbols
    for distinct passes are independent.  Depends only on (s, j, hash_id).
    """
    if j < 1:
        raise ValueError(f"pass index must be >= 1, got {j}")
    mix, _ = _lookup_hash(params.hash_id)
    t = mix(s ^ _SYMBOL_TAG)
    t = mix(t ^ j)
    return t & ((1 << params.c) - 1)


def _rng_symbol_vec(spines: np.ndarray, j: int, params: CodeParams) -> np.ndarray:
    _, mixv = _lookup_hash(params.hash_id)
    t = mixv(spines ^ np.uint64(_SYMBOL_TAG))
    t = mixv(t ^ np.uint64(j))
    return t & np.uint64((1 << params.c) - 1)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def encode(message: Message, params: CodeParams) -> np.ndarray:
    """Encode to the (n/k, L) grid of complex constellation points."""
    psi = build_constellation(params.c, params.d_min)
    chain = spine_chain(message, params)
    idx = np.empty((params.n_segments, params.L), dtype=np.int64)
    for i, s in enumerate(chain):
        for j in range(1, params.L + 1):
            idx[i, j - 1] = rng_symbol(s, j, params)
    return psi.points[idx]


def _encode_block(msg_ints: np.ndarray, params: CodeParams) -> np.ndarray:
    """Encode a batch of messages given as integers; returns (T, n/k, L)."""
    psi = build_constellation(params.c, params.d_min)
    rows, L, k = params.n_segments, params.L, params.k
    msg = np.asarray(msg_ints, dtype=np.uint64)
    seg_mask = np.uint64((1 << k) - 1)
    out = np.empty((msg.shape[0], rows, L), dtype=np.complex128)
    spines = np.zeros(msg.shape[0], dtype=np.uint64)
    for i in range(rows):
        shift = np.uint64(k * (rows - 1 - i))
        words = (msg >> shift) & seg_mask
        spines = _hash_step_vec(spines, words, params)
        for j in range(1, L + 1):
            out[:, i, j - 1] = psi.points[_rng_symbol_vec(spines, j, params)]
    return out


# ---------------------------------------------------------------------------
# Exhaustive ML decoding
# ---------------------------------------------------------------------------

def ml_decode(obs: ObservationGrid, params: CodeParams,
              max_message_bits: int = DEFAULT_DECODE_BUDGET_BITS) -> Message:
    """Exact ML decode: argmin over all 2^n messages of sum |y - h*x(M')|^2.

    Implemented as a breadth-first expansion of the depth-(n/k) message tree
    with branching 2^k; each level extends every surviving prefix by one
    segment and adds that segment's cost once, so shared prefixes are never
    re-evaluated.  Exact ties resolve to the lexicographically smallest
    message (argmin returns the first, i.e. numerically smallest, index).
    """
    if params.n > max_message_bits:
        raise BudgetExceededError(
            f"exhaustive ML over 2^{params.n} messages exceeds the "
            f"{max_message_bits}-bit budget"
        )
    if obs.shape != (params.n_segments, params.L):
        raise ValueError(
            f"observation grid shape {obs.shape} does not match "
            f"(n/k, L) = ({params.n_segments}, {params.L})"
        )
    y = obs.y[None, :, :]
    h = obs.h[None, :, :]
    best = _decode_block(y, h, params)
    return Message.from_int(int(best[0]), params.n)


def _decode_block(y: np.ndarray, h: np.ndarray, params: CodeParams) -> np.ndarray:
    """Vectorized tree ML decode of T instances; y, h shaped (T, n/k, L).

    The code tree (spines and symbol indices per level) is message-indexed
    and shared by every instance, so it is expanded once per level as flat
    arrays; only path costs carry a trial axis.  Each level's cost increment
    is gathered from a per-trial lookup of the 2^c per-symbol metrics, which
    performs the exact same float ops per instance as decoding instances one
    at a time, so outcomes do not depend on T.
    """
    psi = build_constellation(params.c, params.d_min)
    rows, L, k = params.n_segments, params.L, params.k
    T = y.shape[0]
    B = 1 << k
    child_words = np.arange(B, dtype=np.uint64)

    spines = np.zeros(1, dtype=np.uint64)
    costs = np.zeros((T, 1), dtype=np.float64)
    for i in range(rows):
        words = np.tile(child_words, spines.size)
        spines = _hash_step_vec(np.repeat(spines, B), words, params)
        subtotal = 0.0
        for j in range(1, L + 1):
            idx = _rng_symbol_vec(spines, j, params).astype(np.int64)
            d = y[:, i, j - 1, None] - h[:, i, j - 1, None] * psi.points[None, :]
            per_symbol = d.real * d.real + d.imag * d.imag
            subtotal = subtotal + per_symbol[:, idx]
        costs = np.repeat(costs, B, axis=1) + subtotal
    return np.argmin(costs, axis=1)


def segment_costs(message: Message, obs: ObservationGrid,
                  params: CodeParams) -> list[float]:
    """Per-segment partial metrics of one message against an observation grid.

    Each entry adds its pass terms in ascending order; summing the entries
    in segment order reproduces the tree decoder's path cost bit-for-bit.
    """
    if obs.shape != (params.n_segments, params.L):
        raise ValueError(
            f"observation grid shape {obs.shape} does not match "
            f"(n/k, L) = ({params.n_segments}, {params.L})"
        )
    x = encode(message, params)
    out = []
    for i in range(params.n_segments):
        acc = 0.0
        for j in range(params.L):
            d = obs.y[i, j] - obs.h[i, j] * x[i, j]
            acc = acc + (d.real * d.real + d.imag * d.imag)
        out.append(acc)
    return out
