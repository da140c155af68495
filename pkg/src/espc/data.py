"""Dataset lifecycle: seeded generators, sorted-data binary files, rescaling.

The binary layout is the one used by sorted-data search benchmarks:
little-endian, a u64 key count followed by that many 64-bit keys.  Files
ending in ``.gz`` are compressed/decompressed transparently.
"""

from __future__ import annotations

import gzip
import struct
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import FLOAT_MODE, INT_MODE, KeyArray, validate_key_array
from .errors import (
    CountMismatch,
    DegenerateRange,
    InvalidM,
    InvalidParams,
    TruncatedFile,
    UnsortedFileWarning,
)

UNIFORM = "uniform"
NORMAL = "normal"
BETA22 = "beta22"
LOGNORMAL = "lognormal"
FILE = "file"

_SYNTHETIC_KINDS = (UNIFORM, NORMAL, BETA22, LOGNORMAL)


@dataclass(frozen=True)
class DatasetSpec:
    """What to load: a named synthetic family or a file on disk.

    Synthetic kinds: ``uniform`` on [0, 1]; ``normal`` (params ``mu``,
    ``sigma``); ``beta22`` (the symmetric Beta(2, 2) hump on [0, 1]);
    ``lognormal`` (params ``mu``, ``sigma``; a heavy-tailed stand-in for
    hard real-world key sets).  Kind ``file`` reads params["path"]
    (params["mode"] selects int64/float64 payloads).
    """

    kind: str
    n: int = 0
    params: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0


def generate(spec: DatasetSpec) -> KeyArray:
    """Materialize a dataset: n seeded draws, sorted, duplicates kept.

    Deterministic given (kind, params, seed).  Synthetic data is float
    mode; files keep the mode they are read with.

    Raises:
        InvalidParams: unknown kind, n < 1, or bad distribution params.
    """
    if spec.kind == FILE:
        path = spec.params.get("path")
        if not path:
            raise InvalidParams("file datasets need params['path']")
        return read_sosd(path, mode=str(spec.params.get("mode", INT_MODE)))
    if spec.kind not in _SYNTHETIC_KINDS:
        raise InvalidParams(f"unknown dataset kind {spec.kind!r}")
    if spec.n < 1:
        raise InvalidParams(f"need n >= 1, got {spec.n}")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == UNIFORM:
        draws = rng.random(spec.n)
    elif spec.kind == BETA22:
        draws = rng.beta(2.0, 2.0, spec.n)
    else:
        mu = float(spec.params.get("mu", 0.0))
        sigma = float(spec.params.get("sigma", 1.0 if spec.kind == NORMAL else 2.0))
        if sigma <= 0:
            raise InvalidParams(f"sigma must be positive, got {sigma}")
        if spec.kind == NORMAL:
            draws = rng.normal(mu, sigma, spec.n)
        else:
            draws = rng.lognormal(mu, sigma, spec.n)
    return validate_key_array(draws, FLOAT_MODE)


def read_sosd(path, mode: str = INT_MODE) -> KeyArray:
    """Read a key file: u64 count, then n 64-bit keys (little-endian).

    ``mode`` selects how the 8-byte payload is interpreted (unsigned
    integers or IEEE doubles).  Unsorted files are sorted in memory with a
    warning.

    Raises:
        TruncatedFile: size differs from 8 + 8n.
        CountMismatch: header count is zero.
    """
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8:
        raise TruncatedFile(f"{path}: too short for a count header")
    (n,) = struct.unpack_from("<Q", blob)
    if n == 0:
        raise CountMismatch(f"{path}: header declares zero keys")
    if len(blob) != 8 + 8 * n:
        raise TruncatedFile(f"{path}: expected {8 + 8 * n} bytes for n={n}, got {len(blob)}")
    dtype = "<u8" if mode == INT_MODE else "<f8"
    keys = np.frombuffer(blob, dtype=dtype, count=n, offset=8)
    if np.any(keys[:-1] > keys[1:]):
        warnings.warn(f"{path}: keys not sorted; sorting", UnsortedFileWarning, stacklevel=2)
    return validate_key_array(keys, mode)


def write_sosd(path, A: KeyArray) -> None:
    """Write ``A`` in the binary key-file layout (gzip for ``.gz`` paths).

    Reading the result back with the same mode reproduces ``A`` exactly,
    and re-writing a file read this way is byte-identical.
    """
    dtype = "<u8" if A.mode == INT_MODE else "<f8"
    blob = struct.pack("<Q", A.n) + np.ascontiguousarray(A.keys, dtype=dtype).tobytes()
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as fh:
        fh.write(blob)


def rescale_unit(A: KeyArray) -> KeyArray:
    """Affinely map keys onto [0, 1] (float mode); order preserved.

    The smallest key maps to exactly 0 and the largest to exactly 1.

    Raises:
        DegenerateRange: all keys equal.
    """
    vals = A.keys.astype(np.float64, copy=False)
    lo = float(vals[0])
    span = float(vals[-1]) - lo
    if span <= 0.0:
        raise DegenerateRange("all keys equal; nothing to rescale")
    scaled = (vals - lo) / span
    scaled.setflags(write=False)
    return KeyArray(keys=scaled, mode=FLOAT_MODE)


def subsample(A: KeyArray, m: int, seed: int = 0) -> KeyArray:
    """m keys drawn uniformly without replacement, re-sorted; seeded.

    Raises:
        InvalidM: m outside [1, n].
    """
    if not 1 <= m <= A.n:
        raise InvalidM(f"subsample size must be in [1, {A.n}], got {m}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(A.n, size=m, replace=False)
    keys = np.sort(A.keys[picks], kind="stable")
    keys.setflags(write=False)
    return KeyArray(keys=keys, mode=A.mode)
