"""Sorted key arrays and the exact linear-scan rank oracle.

Everything else in the package is ultimately tested against
:func:`rank_bruteforce`, which counts keys by definition rather than by any
clever search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, NonFiniteKey

INT_MODE = "int64"
FLOAT_MODE = "float64"

_DTYPES = {INT_MODE: np.uint64, FLOAT_MODE: np.float64}

_UINT64_MAX = 2**64 - 1

# Ranks are plain integers in [0, n].
Rank = int


@dataclass(frozen=True, eq=False)
class KeyArray:
    """Immutable, non-decreasing array of 64-bit keys.

    Two storage modes exist: ``"int64"`` (unsigned 64-bit integers, the
    layout used by sorted-data benchmark files) and ``"float64"`` (IEEE
    doubles, the natural domain for synthetic data and rescaled keys).
    Duplicates are allowed and preserved.  Instances are safe to share
    across threads; the backing array is marked read-only.
    """

    keys: np.ndarray
    mode: str

    @property
    def n(self) -> int:
        return len(self.keys)

    @property
    def x_min(self):
        """Smallest key, as a native Python scalar."""
        return self.keys.item(0)

    @property
    def x_max(self):
        """Largest key, as a native Python scalar."""
        return self.keys.item(-1)

    def __len__(self) -> int:
        return len(self.keys)


def validate_key_array(raw, mode: str = FLOAT_MODE) -> KeyArray:
    """Validate, sort, and freeze a raw key sequence.

    Sorting is stable, so duplicate keys are preserved verbatim.  Float
    mode rejects NaN and infinities; integer mode stores unsigned 64-bit
    values.

    Raises:
        EmptyInput: ``raw`` has no elements.
        NonFiniteKey: float mode saw NaN or +/-inf.
    """
    if mode not in _DTYPES:
        raise ValueError(f"unknown key mode {mode!r}")
    arr = np.asarray(raw, dtype=_DTYPES[mode])
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise EmptyInput("key array must contain at least one key")
    if mode == FLOAT_MODE and not np.isfinite(arr).all():
        raise NonFiniteKey("float keys must be finite (no NaN/inf)")
    if not _is_sorted(arr):
        arr = np.sort(arr, kind="stable")
    else:
        arr = arr.copy()
    arr.setflags(write=False)
    return KeyArray(keys=arr, mode=mode)


def rank_bruteforce(A: KeyArray, q) -> Rank:
    """Exact rank of ``q``: the number of keys <= q, by linear scan.

    This is the definitional oracle; ties are counted (rank of a
    duplicated key includes every copy).  Always in [0, n] and
    non-decreasing in ``q``.
    """
    if A.mode == INT_MODE and isinstance(q, (int, np.integer)):
        # Keep the vectorized comparison inside the uint64 domain.
        if q < 0:
            return 0
        if q > _UINT64_MAX:
            return A.n
    return int(np.count_nonzero(A.keys <= q))


def _is_sorted(arr: np.ndarray) -> bool:
    return bool(np.all(arr[:-1] <= arr[1:]))
