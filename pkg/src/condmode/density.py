"""Gaussian product kernels and kernel mixtures.

All bandwidths are per-dimension standard deviations. Points are 1-D float
arrays; most evaluators also accept a stack of points of shape ``(n, d)`` and
return one value per row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import UsageError

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
WEIGHT_SUM_TOL = 1e-12


def as_point(values, dim: int | None = None, name: str = "point") -> np.ndarray:
    """Coerce ``values`` to a finite 1-D float array, optionally of length ``dim``."""
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise UsageError(f"{name} must be a vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise UsageError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} has non-finite coordinates")
    return arr


def as_bandwidth(values, dim: int | None = None) -> np.ndarray:
    s = as_point(values, dim, name="bandwidth")
    if np.any(s <= 0):
        raise UsageError("bandwidth components must be positive")
    return s


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_weights(weights: np.ndarray) -> None:
    if weights.ndim != 1 or weights.shape[0] < 1:
        raise UsageError("need at least one kernel weight")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise UsageError("kernel weights must be finite and non-negative")
    if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise UsageError(f"kernel weights sum to {weights.sum()!r}, not 1")


def _check_block(arr: np.ndarray, k: int, name: str, positive: bool = False) -> None:
    if arr.ndim != 2 or arr.shape[0] != k or arr.shape[1] < 1:
        raise UsageError(f"{name} must have shape ({k}, d), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} contains non-finite values")
    if positive and np.any(arr <= 0):
        raise UsageError(f"{name} must be strictly positive")


@dataclass(frozen=True, eq=False)
class Mixture:
    """Weighted sum of axis-aligned Gaussian kernels in ``d`` dimensions.

    Parameters
    ----------
    weights : array of shape (k,)
        Non-negative component weights summing to one.
    centers : array of shape (k, d)
    bandwidths : array of shape (k, d)
        Per-component, per-dimension standard deviations.
    """

    weights: np.ndarray
    centers: np.ndarray
    bandwidths: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        c = np.asarray(self.centers, dtype=float)
        s = np.asarray(self.bandwidths, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if s.ndim == 1:
            s = s[:, None]
        _check_weights(w)
        _check_block(c, w.shape[0], "centers")
        _check_block(s, w.shape[0], "bandwidths", positive=True)
        if s.shape != c.shape:
            raise UsageError("centers and bandwidths must have the same shape")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "centers", _frozen(c))
        object.__setattr__(self, "bandwidths", _frozen(s))

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def peak_bound(self) -> float:
        """Largest single-kernel peak height; an upper bound for the density."""
        return float(np.max(np.exp(-np.sum(np.log(self.bandwidths), axis=1) - self.dim * LOG_SQRT_2PI)))


@dataclass(frozen=True, eq=False)
class JointKernelModel:
    """Kernel estimate of a joint density over ``(x, y)``.

    Each kernel ``i`` is the product of a Gaussian over ``x`` centred at
    ``x_centers[i]`` and one over ``y`` centred at ``y_centers[i]``.
    """

    weights: np.ndarray
    x_centers: np.ndarray
    y_centers: np.ndarray
    x_bandwidths: np.ndarray
    y_bandwidths: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        _check_weights(w)
        m = w.shape[0]
        blocks = {}
        for name in ("x_centers", "y_centers", "x_bandwidths", "y_bandwidths"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim == 1:
                arr = arr[:, None]
            _check_block(arr, m, name, positive=name.endswith("bandwidths"))
            blocks[name] = arr
        if blocks["x_centers"].shape != blocks["x_bandwidths"].shape:
            raise UsageError("x_centers and x_bandwidths must have the same shape")
        if blocks["y_centers"].shape != blocks["y_bandwidths"].shape:
            raise UsageError("y_centers and y_bandwidths must have the same shape")
        object.__setattr__(self, "weights", _frozen(w))
        for name, arr in blocks.items():
            object.__setattr__(self, name, _frozen(arr))

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def dx(self) -> int:
        return self.x_centers.shape[1]

    @property
    def dy(self) -> int:
        return self.y_centers.shape[1]

    def __eq__(self, other):
        if not isinstance(other, JointKernelModel):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("weights", "x_centers", "y_centers", "x_bandwidths", "y_bandwidths")
        )

    __hash__ = None


def gaussian_kernel(offset, s) -> float:
    """Product Gaussian kernel ``prod_k N(offset_k; 0, s_k^2)``.

    >>> round(gaussian_kernel([0.0], [1.0]), 7)
    0.3989423
    """
    offset = as_point(offset, name="offset")
    s = as_bandwidth(s, offset.shape[0])
    norm = np.prod(1.0 / (np.sqrt(2.0 * np.pi) * s))
    return float(norm * np.exp(np.sum(-(offset**2) / (2.0 * s**2))))


def gaussian_log_kernel(offset, s) -> float:
    offset = as_point(offset, name="offset")
    s = as_bandwidth(s, offset.shape[0])
    return float(-np.sum(np.log(s)) - s.shape[0] * LOG_SQRT_2PI - np.sum(offset**2 / (2.0 * s**2)))


def _points(y, dim: int) -> tuple[np.ndarray, bool]:
    """Return ``(n, dim)`` array and whether the input was a single point."""
    arr = np.asarray(y, dtype=float)
    single = arr.ndim <= 1
    if single:
        arr = as_point(arr, dim)[None, :]
    elif arr.ndim != 2 or arr.shape[1] != dim:
        raise UsageError(f"points must have shape (n, {dim}), got {arr.shape}")
    return arr, single


def kernel_log_terms(centers: np.ndarray, bandwidths: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-kernel log densities, shape ``(n, k)`` for ``y`` of shape ``(n, d)``."""
    log_norm = -np.sum(np.log(bandwidths), axis=1) - centers.shape[1] * LOG_SQRT_2PI
    diff = y[:, None, :] - centers[None, :, :]
    with np.errstate(over="ignore"):
        # Overflow yields -inf log terms, which callers treat as underflow.
        return log_norm - np.sum(diff**2 / (2.0 * bandwidths**2), axis=2)


def _kernel_terms_direct(centers, bandwidths, y) -> np.ndarray:
    norm = np.prod(1.0 / (np.sqrt(2.0 * np.pi) * bandwidths), axis=1)
    diff = y[:, None, :] - centers[None, :, :]
    return norm * np.exp(-np.sum(diff**2 / (2.0 * bandwidths**2), axis=2))


def _chunks(n: int, k: int, d: int, budget: int = 4_000_000):
    step = max(1, budget // max(1, k * d))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def mixture_density(mix: Mixture, y):
    """Evaluate ``sum_i w_i N(y; c_i, diag(s_i^2))``.

    ``y`` may be a single point (returns a float) or an ``(n, d)`` stack
    (returns an array of length ``n``).
    """
    pts, single = _points(y, mix.dim)
    out = np.empty(pts.shape[0])
    for sl in _chunks(pts.shape[0], mix.k, mix.dim):
        out[sl] = _kernel_terms_direct(mix.centers, mix.bandwidths, pts[sl]) @ mix.weights
    return float(out[0]) if single else out


def mixture_log_density(mix: Mixture, y):
    """Log of :func:`mixture_density`, computed with log-sum-exp."""
    pts, single = _points(y, mix.dim)
    with np.errstate(divide="ignore"):
        log_w = np.log(mix.weights)
    out = np.empty(pts.shape[0])
    for sl in _chunks(pts.shape[0], mix.k, mix.dim):
        out[sl] = logsumexp(kernel_log_terms(mix.centers, mix.bandwidths, pts[sl]) + log_w, axis=1)
    return float(out[0]) if single else out


def mixture_gradient(mix: Mixture, y) -> np.ndarray:
    """Analytic gradient of :func:`mixture_density` at a single point ``y``."""
    y = as_point(y, mix.dim)
    terms = _kernel_terms_direct(mix.centers, mix.bandwidths, y[None, :])[0] * mix.weights
    return -(terms[:, None] * (y - mix.centers) / mix.bandwidths**2).sum(axis=0)


def joint_density(model: JointKernelModel, x, y) -> float:
    """Evaluate the joint kernel estimate at a single ``(x, y)`` pair."""
    x = as_point(x, model.dx, name="x")
    y = as_point(y, model.dy, name="y")
    phi = _kernel_terms_direct(model.x_centers, model.x_bandwidths, x[None, :])[0]
    psi = _kernel_terms_direct(model.y_centers, model.y_bandwidths, y[None, :])[0]
    return float(np.sum(model.weights * phi * psi))


def marginal_x_density(model: JointKernelModel, x) -> float:
    x = as_point(x, model.dx, name="x")
    phi = _kernel_terms_direct(model.x_centers, model.x_bandwidths, x[None, :])[0]
    return float(model.weights @ phi)
