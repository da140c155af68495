"""Equal-split piecewise-constant rank index.

The index splits the key range [x_min, x_max] into K equal-length
intervals and stores one half-integer rank estimate per interval.  A
lookup locates its interval with one division, reads the stored estimate,
and corrects it to the exact rank with an exponential search.  Build cost
is O(n + K); lookup cost is O(log error).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .core import KeyArray, rank_bruteforce
from .errors import (
    IndexMismatch,
    InvalidIndexFile,
    InvalidK,
    InvalidPolicyParams,
    OutOfRange,
)
from .search import SearchOutcome, exponential_search

MAGIC = b"ESPC1"
SLOT_BYTES = 8
HEADER_BYTES = len(MAGIC) + 2 * 8 + 3 * 8  # magic, n, K, x_first, x_last, delta


@dataclass(frozen=True, eq=False)
class EspcIndex:
    """Built index: K intervals of length ``delta`` with rank estimates ``r``.

    ``r[k-1]`` is the midpoint of the rank range attainable inside
    interval k, i.e. (keys before interval k) + (keys inside interval k)/2.
    The array is non-decreasing, each entry a half-integer in [0, n].
    Instances are immutable and safe for concurrent lookups.
    """

    K: int
    delta: float
    x_first: float
    x_last: float
    n: int
    r: np.ndarray


def assign_intervals(values, lo: float, step: float, k: int) -> np.ndarray:
    """Interval numbers (1-based) for ``values`` under equal-length splits.

    Uses the clamped ceiling rule ``clip(ceil((v - lo)/step), 1, k)``.
    Membership everywhere in the package is decided by this formula, never
    by recomputing boundary positions, so every value maps to exactly one
    interval even under floating-point roundoff.
    """
    raw = np.ceil((np.asarray(values, dtype=np.float64) - lo) / step)
    return np.clip(raw, 1, k).astype(np.int64)


def build_espc(A: KeyArray, k: int) -> EspcIndex:
    """Build an index with ``k`` equal-length intervals over ``A``.

    When all keys are equal the range is degenerate and the index stores a
    single interval with estimate n/2.

    Raises:
        InvalidK: k < 1.
    """
    if k < 1:
        raise InvalidK(f"interval count must be >= 1, got {k}")
    n = A.n
    x_first = float(A.keys[0])
    x_last = float(A.keys[-1])
    if x_first == x_last:
        r = np.array([n / 2.0])
        r.setflags(write=False)
        return EspcIndex(K=1, delta=0.0, x_first=x_first, x_last=x_last, n=n, r=r)
    delta = (x_last - x_first) / k
    ks = assign_intervals(A.keys, x_first, delta, k)
    counts = np.bincount(ks, minlength=k + 1)[1:].astype(np.float64)
    before = np.concatenate(([0.0], np.cumsum(counts)[:-1]))
    r = before + counts / 2.0
    r.setflags(write=False)
    return EspcIndex(K=k, delta=delta, x_first=x_first, x_last=x_last, n=n, r=r)


def locate_interval(idx: EspcIndex, q) -> int:
    """Interval number (1-based) containing ``q``; constant time.

    Raises:
        OutOfRange: q outside [x_first, x_last].
    """
    qf = float(q)
    if qf < idx.x_first or qf > idx.x_last:
        raise OutOfRange(f"{q!r} outside [{idx.x_first}, {idx.x_last}]")
    if idx.delta == 0.0:
        return 1
    k = math.ceil((qf - idx.x_first) / idx.delta)
    if k < 1:
        return 1
    if k > idx.K:
        return idx.K
    return k


def predict(idx: EspcIndex, q) -> float:
    """Piecewise-constant rank estimate for ``q``, in [0, n].

    Exact (0 or n) outside the key range; the stored interval estimate
    otherwise.  Non-decreasing in q.
    """
    qf = float(q)
    if qf < idx.x_first:
        return 0.0
    if qf > idx.x_last:
        return float(idx.n)
    return float(idx.r[locate_interval(idx, qf) - 1])


def predict_many(idx: EspcIndex, values) -> np.ndarray:
    """Vectorized :func:`predict` over an array of query values."""
    v = np.asarray(values, dtype=np.float64)
    out = np.empty(v.shape, dtype=np.float64)
    below = v < idx.x_first
    above = v > idx.x_last
    inside = ~(below | above)
    out[below] = 0.0
    out[above] = float(idx.n)
    if idx.delta == 0.0:
        out[inside] = idx.r[0]
    else:
        ks = assign_intervals(v[inside], idx.x_first, idx.delta, idx.K)
        out[inside] = idx.r[ks - 1]
    return out


def evaluate_rank(idx: EspcIndex, A: KeyArray, q) -> SearchOutcome:
    """Exact rank of ``q`` via predict-then-correct.

    Checks the range endpoints, reads the interval estimate, and runs an
    exponential search from ceil(estimate).  Comparison count includes the
    endpoint checks and the corrective search.

    Raises:
        IndexMismatch: index was built over an array of different length.
    """
    if idx.n != A.n:
        raise IndexMismatch(f"index holds n={idx.n}, array has n={A.n}")
    if q < A.x_min:
        return SearchOutcome(rank=0, comparisons=1)
    if q > A.x_max:
        return SearchOutcome(rank=A.n, comparisons=2)
    k = locate_interval(idx, q)
    start = math.ceil(idx.r[k - 1])
    corrected = exponential_search(A, start, q)
    return SearchOutcome(rank=corrected.rank, comparisons=2 + corrected.comparisons)


def approximation_error(idx: EspcIndex, A: KeyArray, q) -> float:
    """Absolute prediction error |rank(q) - estimate(q)|.

    Zero outside the key range; at most (keys in q's interval)/2 inside.
    """
    return abs(rank_bruteforce(A, q) - predict(idx, q))


# --- sizing policies -------------------------------------------------------

LINEAR = "linear"
SUBLINEAR = "sublinear"
CHEBYSHEV = "chebyshev"
SUBEXPONENTIAL = "subexponential"

_POLICY_KINDS = (LINEAR, SUBLINEAR, CHEBYSHEV, SUBEXPONENTIAL)


@dataclass(frozen=True)
class SizingPolicy:
    """Rule for picking the interval count K from the key count n.

    ``linear`` (K = n) buys constant expected lookup cost for densities
    with bounded support; ``sublinear`` (K = n/log2 n) trades down to
    log-log cost.  ``chebyshev`` (K = n*sqrt(n ln n), needs finite
    mean/variance) and ``subexponential`` (K = n ln n, needs exponential
    tails) cover unbounded supports by oversizing the index.
    """

    kind: str
    mu: float | None = None
    sigma: float | None = None
    tail_rate: float | None = None

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise InvalidPolicyParams(f"unknown sizing policy {self.kind!r}")
        if self.sigma is not None and self.sigma <= 0:
            raise InvalidPolicyParams("sigma must be positive")
        if self.tail_rate is not None and self.tail_rate <= 0:
            raise InvalidPolicyParams("tail rate must be positive")


def choose_k(policy: SizingPolicy, n: int) -> int:
    """Interval count prescribed by ``policy`` for an n-key array.

    Raises:
        InvalidPolicyParams: n < 2.
    """
    if n < 2:
        raise InvalidPolicyParams(f"sizing needs n >= 2, got {n}")
    if policy.kind == LINEAR:
        return n
    if policy.kind == SUBLINEAR:
        return max(1, math.ceil(n / math.log2(n)))
    if policy.kind == CHEBYSHEV:
        return max(1, math.ceil(n * math.sqrt(n * math.log(n))))
    return max(1, math.ceil(n * math.log(n)))


# --- two-layer equal-probability variant -----------------------------------


@dataclass(frozen=True, eq=False)
class HierIndex:
    """Two-layer index: quantile bucket boundaries plus a top-level index.

    The bottom layer cuts the array into ``K`` buckets of (approximately)
    equal occupancy at empirical quantiles; the top layer is an
    equal-split index over the bucket boundaries and resolves which bucket
    a query falls in.  Bucket rank estimates are implicit (bucket k is
    centred at (k - 1/2) * n / K), so only the boundaries and the top
    index occupy space.
    """

    boundaries: KeyArray
    top: EspcIndex
    n: int

    @property
    def K(self) -> int:
        return self.boundaries.n


def build_equal_probability(A: KeyArray, k: int, k_top: int) -> HierIndex:
    """Build the two-layer variant with ``k`` buckets and ``k_top`` top intervals.

    Bucket boundaries are the empirical quantiles keys[ceil(i*n/k)],
    i = 0..k-1, so the first boundary is the minimum key.

    Raises:
        InvalidK: k < 1, k_top < 1, or k > n.
    """
    n = A.n
    if k < 1 or k_top < 1:
        raise InvalidK("bucket and top interval counts must be >= 1")
    if k > n:
        raise InvalidK(f"bucket count {k} exceeds key count {n}")
    positions = np.minimum(np.ceil(np.arange(k) * n / k).astype(np.int64), n - 1)
    boundary_keys = A.keys[positions].copy()
    boundary_keys.setflags(write=False)
    boundaries = KeyArray(keys=boundary_keys, mode=A.mode)
    top = build_espc(boundaries, k_top)
    return HierIndex(boundaries=boundaries, top=top, n=n)


def evaluate_rank_hier(h: HierIndex, A: KeyArray, q) -> SearchOutcome:
    """Exact rank of ``q`` through both layers of the two-layer index.

    The top index finds the bucket (the exact rank of q among the
    boundaries), the bucket centre seeds an exponential search over the
    full array, and the reported comparisons are the sum of both layers.

    Raises:
        IndexMismatch: index was built over an array of different length.
    """
    if h.n != A.n:
        raise IndexMismatch(f"index holds n={h.n}, array has n={A.n}")
    if q < A.x_min:
        return SearchOutcome(rank=0, comparisons=1)
    if q > A.x_max:
        return SearchOutcome(rank=A.n, comparisons=2)
    top_out = evaluate_rank(h.top, h.boundaries, q)
    bucket = top_out.rank  # >= 1 because boundaries[0] == x_min <= q
    start = min(math.ceil((bucket - 0.5) * A.n / h.K), A.n)
    corrected = exponential_search(A, start, q)
    return SearchOutcome(
        rank=corrected.rank,
        comparisons=2 + top_out.comparisons + corrected.comparisons,
    )


# --- serialization ----------------------------------------------------------


def serialize_index(idx: EspcIndex) -> bytes:
    """Little-endian blob: magic, n, K (u64), x_first, x_last, delta, then r.

    The layout is fixed at HEADER_BYTES + SLOT_BYTES * K bytes and
    round-trips bit-exactly through :func:`deserialize_index`.
    """
    header = MAGIC + struct.pack("<QQ", idx.n, idx.K)
    header += struct.pack("<ddd", idx.x_first, idx.x_last, idx.delta)
    return header + np.ascontiguousarray(idx.r, dtype="<f8").tobytes()


def deserialize_index(blob: bytes) -> EspcIndex:
    """Inverse of :func:`serialize_index`.

    Raises:
        InvalidIndexFile: bad magic or length inconsistent with K.
    """
    if len(blob) < HEADER_BYTES or blob[: len(MAGIC)] != MAGIC:
        raise InvalidIndexFile("not a serialized index (bad magic)")
    n, k = struct.unpack_from("<QQ", blob, len(MAGIC))
    x_first, x_last, delta = struct.unpack_from("<ddd", blob, len(MAGIC) + 16)
    if len(blob) != HEADER_BYTES + SLOT_BYTES * k:
        raise InvalidIndexFile(
            f"expected {HEADER_BYTES + SLOT_BYTES * k} bytes for K={k}, got {len(blob)}"
        )
    r = np.frombuffer(blob, dtype="<f8", count=k, offset=HEADER_BYTES).copy()
    r.setflags(write=False)
    return EspcIndex(K=int(k), delta=delta, x_first=x_first, x_last=x_last, n=int(n), r=r)


def save_index(idx: EspcIndex, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_index(idx))


def load_index(path) -> EspcIndex:
    with open(path, "rb") as fh:
        return deserialize_index(fh.read())
