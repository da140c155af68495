"""Partition statistics, error-bound calculators, and density estimation.

The expected prediction error of an equal-split index is controlled by the
collision probability sum(p_k^2) of the key distribution over equal-length
cells, or equivalently by the squared L2 norm of the key density
(``rho = integral of f^2``, which equals E[f] and is therefore estimable
by Monte Carlo).  This module computes the empirical cell probabilities,
the order-2 Renyi entropy, the closed-form bounds, and the rho estimator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import KeyArray
from .errors import (
    DegenerateIQR,
    DegenerateIqrWarning,
    InvalidK,
    InvalidParams,
    InvalidWidth,
    SupportViolation,
)
from .index import assign_intervals

HISTOGRAM = "histogram"
KERNEL = "kernel"

_KDE_GRID_SIZE = 2048
_KDE_TAIL_CUT = 4.0  # kernel support, in bandwidths, kept on each side


@dataclass(frozen=True, eq=False)
class PartitionProfile:
    """Probabilities of K equal-length cells partitioning [a, b].

    ``p`` sums to 1 (within 1e-9) with non-negative entries.
    """

    a: float
    b: float
    K: int
    p: np.ndarray

    @property
    def collision_probability(self) -> float:
        """sum(p_k^2): chance two independent draws share a cell."""
        return float(np.dot(self.p, self.p))


def partition_probabilities(A: KeyArray, a: float, b: float, k: int) -> PartitionProfile:
    """Empirical cell probabilities of ``A`` over K equal cells of [a, b].

    Cell membership uses the same clamped-ceiling rule as index
    construction, so these probabilities predict index behaviour directly.

    Raises:
        SupportViolation: [a, b] does not contain the key range.
        InvalidK: k < 1.
    """
    if k < 1:
        raise InvalidK(f"cell count must be >= 1, got {k}")
    if not a < b:
        raise SupportViolation(f"need a < b, got [{a}, {b}]")
    if a > float(A.keys[0]) or float(A.keys[-1]) > b:
        raise SupportViolation(
            f"support [{a}, {b}] does not cover keys "
            f"[{float(A.keys[0])}, {float(A.keys[-1])}]"
        )
    cells = assign_intervals(A.keys, a, (b - a) / k, k)
    p = np.bincount(cells, minlength=k + 1)[1:] / A.n
    p.setflags(write=False)
    return PartitionProfile(a=float(a), b=float(b), K=k, p=p)


def renyi_entropy_2(profile: PartitionProfile, base: float | None = None) -> float:
    """Order-2 Renyi entropy -log(sum p_k^2), in nats by default.

    Maximized (= log K) by the uniform profile; zero for a point mass.
    Pass ``base=2`` for bits.
    """
    h = -math.log(profile.collision_probability)
    if base is not None:
        h /= math.log(base)
    return h


def error_bound_partition(n: int, profile: PartitionProfile) -> float:
    """Expected-error bound (3n/2) * sum(p_k^2) from the cell profile."""
    if n < 1:
        raise InvalidParams(f"need n >= 1, got {n}")
    return 1.5 * n * profile.collision_probability


def error_bound_rho(n: int, k: int, a: float, b: float, rho: float) -> float:
    """Expected-error bound (3(b-a)/2) * rho * n / K from the density norm."""
    if k < 1:
        raise InvalidK(f"cell count must be >= 1, got {k}")
    if rho < 0:
        raise InvalidParams(f"rho must be non-negative, got {rho}")
    if not b > a:
        raise InvalidParams(f"need b > a, got [{a}, {b}]")
    return 1.5 * (b - a) * rho * n / k


def error_bound_query_dist(
    n: int, k: int, a: float, b: float, rho_keys: float, rho_queries: float
) -> float:
    """Expected-error bound when queries follow their own density.

    Replaces rho with sqrt(rho_keys * rho_queries); reduces to
    :func:`error_bound_rho` when the two coincide.
    """
    if rho_queries < 0:
        raise InvalidParams(f"query rho must be non-negative, got {rho_queries}")
    return error_bound_rho(n, k, a, b, math.sqrt(rho_keys * rho_queries))


def log_error_entropy_bound(
    n: int, profile: PartitionProfile, base: float | None = None
) -> float:
    """Bound on E[log error]: log(3n/2) minus the order-2 entropy.

    Uses the same log base as :func:`renyi_entropy_2` (natural by
    default).
    """
    if n < 1:
        raise InvalidParams(f"need n >= 1, got {n}")
    bound = math.log(1.5 * n) - renyi_entropy_2(profile)
    if base is not None:
        bound = math.log(1.5 * n) / math.log(base) - renyi_entropy_2(profile, base=base)
    return bound


# --- density estimation ------------------------------------------------------


def fd_bin_width(A: KeyArray) -> float:
    """Freedman-Diaconis histogram bin width 2*IQR / n^(1/3).

    The IQR uses linear-interpolation quantiles.  A zero IQR falls back to
    (range)/ceil(sqrt(n)) with a :class:`DegenerateIqrWarning`.

    Raises:
        InvalidParams: n < 4.
        DegenerateIQR: all keys equal, so no usable width exists.
    """
    n = A.n
    if n < 4:
        raise InvalidParams(f"bin-width rule needs n >= 4, got {n}")
    vals = A.keys.astype(np.float64, copy=False)
    q25, q75 = np.quantile(vals, [0.25, 0.75])
    iqr = float(q75 - q25)
    if iqr > 0.0:
        return 2.0 * iqr / n ** (1.0 / 3.0)
    span = float(vals[-1]) - float(vals[0])
    if span <= 0.0:
        raise DegenerateIQR("all keys equal; no bin width is meaningful")
    warnings.warn(
        "IQR is zero; falling back to range-based bin width",
        DegenerateIqrWarning,
        stacklevel=2,
    )
    return span / math.ceil(math.sqrt(n))


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Evaluable density estimate over [a, b]; integrates to ~1.

    ``histogram`` kind stores bin edges and heights; ``kernel`` kind
    stores the bandwidth, a handle to the sample, and a precomputed grid
    that evaluation interpolates on.  Calling the instance evaluates the
    density (vectorized, >= 0 everywhere, 0 outside [a, b]).
    """

    kind: str
    a: float
    b: float
    edges: np.ndarray | None = None
    heights: np.ndarray | None = None
    bandwidth: float | None = None
    sample: np.ndarray | None = None
    grid_x: np.ndarray | None = None
    grid_y: np.ndarray | None = None

    def __call__(self, x) -> np.ndarray:
        v = np.asarray(x, dtype=np.float64)
        if self.kind == HISTOGRAM:
            width = self.edges[1] - self.edges[0] if len(self.edges) > 1 else 1.0
            nbins = len(self.heights)
            idx = np.clip(
                np.floor((v - self.edges[0]) / width).astype(np.int64), 0, nbins - 1
            )
            out = self.heights[idx]
            return np.where((v >= self.a) & (v <= self.b), out, 0.0)
        return np.interp(v, self.grid_x, self.grid_y, left=0.0, right=0.0)

    def integral(self) -> float:
        """Numerical mass of the estimate (exact sum for histograms)."""
        if self.kind == HISTOGRAM:
            width = self.edges[1] - self.edges[0] if len(self.edges) > 1 else self.b - self.a
            return float(np.sum(self.heights) * width)
        return float(np.trapezoid(self.grid_y, self.grid_x))


def histogram_density(A: KeyArray, width: float) -> DensityEstimate:
    """Histogram density over [x_min, x_max] with the given bin width.

    The last bin is padded past x_max so every key lands in a bin;
    heights are count/(n*width), making the total mass exactly 1.

    Raises:
        InvalidWidth: width <= 0 or not finite.
    """
    if not (width > 0.0 and math.isfinite(width)):
        raise InvalidWidth(f"bin width must be positive and finite, got {width}")
    vals = A.keys.astype(np.float64, copy=False)
    lo = float(vals[0])
    span = float(vals[-1]) - lo
    nbins = max(1, math.ceil(span / width))
    edges = lo + width * np.arange(nbins + 1, dtype=np.float64)
    idx = np.clip(np.floor((vals - lo) / width).astype(np.int64), 0, nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    heights = counts / (A.n * width)
    heights.setflags(write=False)
    edges.setflags(write=False)
    return DensityEstimate(
        kind=HISTOGRAM, a=lo, b=float(edges[-1]), edges=edges, heights=heights
    )


def kde_density(A: KeyArray, bandwidth: float | None = None) -> DensityEstimate:
    """Gaussian kernel density estimate of the key distribution.

    Defaults to the normal-reference bandwidth 1.06 * std * n^(-1/5).
    Evaluation interpolates a dense precomputed grid (binned convolution),
    which keeps large-sample evaluation affordable; the grid is fine
    enough that the approximation error is far below sampling noise.

    Raises:
        InvalidParams: n < 2, or the bandwidth is not positive (e.g. all
            keys equal and none supplied).
    """
    n = A.n
    if n < 2:
        raise InvalidParams(f"kernel estimate needs n >= 2, got {n}")
    vals = A.keys.astype(np.float64, copy=False)
    if bandwidth is None:
        spread = float(np.std(vals, ddof=1))
        bandwidth = 1.06 * spread * n ** (-0.2)
    if not (bandwidth > 0.0 and math.isfinite(bandwidth)):
        raise InvalidParams(f"bandwidth must be positive and finite, got {bandwidth}")

    pad = _KDE_TAIL_CUT * bandwidth
    lo = float(vals[0]) - pad
    hi = float(vals[-1]) + pad
    grid_x = np.linspace(lo, hi, _KDE_GRID_SIZE)
    step = grid_x[1] - grid_x[0]
    counts, _ = np.histogram(vals, bins=_KDE_GRID_SIZE, range=(lo, hi))
    mass = counts / n
    half = min(int(math.ceil(pad / step)), (_KDE_GRID_SIZE - 1) // 2)
    offsets = np.arange(-half, half + 1) * step
    kernel = np.exp(-0.5 * (offsets / bandwidth) ** 2) / (
        bandwidth * math.sqrt(2.0 * math.pi)
    )
    grid_y = np.convolve(mass, kernel, mode="same")
    grid_y.setflags(write=False)
    grid_x.setflags(write=False)
    return DensityEstimate(
        kind=KERNEL,
        a=lo,
        b=hi,
        bandwidth=float(bandwidth),
        sample=A.keys,
        grid_x=grid_x,
        grid_y=grid_y,
    )


# --- Monte-Carlo estimate of the density norm -------------------------------


@dataclass(frozen=True)
class RhoEstimate:
    """Monte-Carlo estimate of the squared L2 norm of the key density.

    Never much below 1/(b-a): the uniform density minimizes the norm on a
    bounded support.  Deterministic given (data, draws, method, seed).
    """

    value: float
    draws: int
    method: str
    seed: int


def estimate_rho(
    A: KeyArray,
    draws: int,
    method: str = HISTOGRAM,
    seed: int = 0,
    bandwidth: float | None = None,
) -> RhoEstimate:
    """Estimate integral(f^2) = E[f] by averaging a density estimate.

    Samples ``draws`` keys uniformly with replacement from ``A`` (seeded),
    evaluates the fitted density estimate at each, and averages in index
    order.  The histogram method uses the Freedman-Diaconis width; the
    kernel method uses :func:`kde_density`.

    Raises:
        InvalidParams: draws < 1 or unknown method.
    """
    if draws < 1:
        raise InvalidParams(f"need at least one draw, got {draws}")
    if method == HISTOGRAM:
        density = histogram_density(A, fd_bin_width(A))
    elif method == KERNEL:
        density = kde_density(A, bandwidth=bandwidth)
    else:
        raise InvalidParams(f"unknown density method {method!r}")
    rng = np.random.default_rng(seed)
    z = A.keys[rng.integers(0, A.n, size=draws)]
    value = float(np.sum(density(z)) / draws)
    return RhoEstimate(value=value, draws=draws, method=method, seed=seed)
