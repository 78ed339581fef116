"""Global maximization of Gaussian kernel mixtures.

The search draws ``q`` points from the mixture itself, keeps the one with the
highest density and optionally polishes it with a monotone gradient ascent.
Because candidates are density-distributed, the chance that none of them
lands in the top ``1 - alpha`` density mass is ``alpha**q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import Mixture, as_point, mixture_density, mixture_gradient
from .errors import UsageError
from .rng import make_rng

_ARMIJO_C = 1e-4


@dataclass(frozen=True)
class AscentConfig:
    """Backtracking gradient-ascent settings.

    ``initial_step`` is the length of the first trial step; ``None`` means
    one tenth of the smallest bandwidth component of the mixture.
    """

    initial_step: float | None = None
    max_iterations: int = 200
    gradient_tolerance: float = 1e-8
    backtrack_factor: float = 0.5

    def __post_init__(self):
        if self.initial_step is not None and not self.initial_step > 0:
            raise UsageError("initial_step must be positive")
        if self.max_iterations < 1:
            raise UsageError("max_iterations must be positive")
        if not self.gradient_tolerance > 0:
            raise UsageError("gradient_tolerance must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise UsageError("backtrack_factor must lie in (0, 1)")


@dataclass(frozen=True)
class SearchConfig:
    q: int = 1000
    refine: bool = True
    ascent: AscentConfig = field(default_factory=AscentConfig)

    def __post_init__(self):
        if int(self.q) < 1:
            raise UsageError("q must be at least 1")


@dataclass(frozen=True, eq=False)
class ModeResult:
    argmax: np.ndarray
    density: float
    best_sample: np.ndarray
    best_sample_density: float
    ascent_iterations: int
    candidates_evaluated: int

    def __eq__(self, other):
        if not isinstance(other, ModeResult):
            return NotImplemented
        return (
            np.array_equal(self.argmax, other.argmax)
            and np.array_equal(self.best_sample, other.best_sample)
            and self.density == other.density
            and self.best_sample_density == other.best_sample_density
            and self.ascent_iterations == other.ascent_iterations
            and self.candidates_evaluated == other.candidates_evaluated
        )

    __hash__ = None


def categorical_draw(weights, u: float) -> int:
    """Index ``i`` with ``cumsum[i-1] <= u < cumsum[i]``.

    >>> categorical_draw([0.45, 0.45, 0.1], 0.5)
    1
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise UsageError("weights must be a non-negative vector summing to 1")
    if not 0.0 <= u < 1.0:
        raise UsageError("u must lie in [0, 1)")
    return int(_draw_indices(w, np.array([u]))[0])


def _draw_indices(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights)
    idx = np.searchsorted(cdf, u, side="right")
    # Rounding can leave cdf[-1] slightly below 1; map the overflow to the
    # last kernel that actually carries weight.
    last = np.flatnonzero(weights > 0)[-1]
    return np.minimum(idx, last)


def sample_mixture(mix: Mixture, q: int, seed) -> np.ndarray:
    """Draw ``q`` points from ``mix``; returns an array of shape ``(q, d)``.

    Each point picks a kernel by weight, draws a standard normal vector scaled
    by that kernel's bandwidths, and shifts it by the kernel center.
    """
    q = int(q)
    if q < 1:
        raise UsageError("q must be at least 1")
    rng = make_rng(seed)
    u = rng.random(q)
    z = rng.standard_normal((q, mix.dim))
    idx = _draw_indices(mix.weights, u)
    return mix.centers[idx] + z * mix.bandwidths[idx]


def _ascend(mix: Mixture, start: np.ndarray, cfg: AscentConfig):
    y = start.copy()
    f = mixture_density(mix, y)
    g = mixture_gradient(mix, y)
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        return y, f, 0
    step = cfg.initial_step if cfg.initial_step is not None else 0.1 * float(mix.bandwidths.min())
    alpha = step / gnorm
    iterations = 0
    while iterations < cfg.max_iterations and gnorm >= cfg.gradient_tolerance:
        while True:
            y_new = y + alpha * g
            f_new = mixture_density(mix, y_new)
            if f_new >= f + _ARMIJO_C * alpha * gnorm**2:
                break
            alpha *= cfg.backtrack_factor
            if alpha * gnorm <= np.finfo(float).eps * (1.0 + np.linalg.norm(y)):
                return y, f, iterations
        g_new = mixture_gradient(mix, y_new)
        dy, dg = y_new - y, g_new - g
        curvature = -float(dy @ dg)
        y, f, g = y_new, f_new, g_new
        gnorm = float(np.linalg.norm(g))
        # Barzilai-Borwein trial step; fall back to growing the last step
        # where the local curvature is not concave.
        if curvature > 0:
            alpha = float(dy @ dy) / curvature
        else:
            alpha /= cfg.backtrack_factor
        iterations += 1
    return y, f, iterations


def gradient_ascent(mix: Mixture, start, cfg: AscentConfig = AscentConfig()) -> np.ndarray:
    """Climb ``mix`` from ``start`` with a backtracking (Armijo) line search.

    Never returns a point of lower density than ``start``. Stops on a small
    gradient, a step that underflows, or ``max_iterations`` accepted steps.
    """
    return _ascend(mix, as_point(start, mix.dim, name="start"), cfg)[0]


def find_mode(mix: Mixture, cfg: SearchConfig = SearchConfig(), seed=0) -> ModeResult:
    """Approximate the global maximum of ``mix``.

    Parameters
    ----------
    mix : Mixture
    cfg : SearchConfig
        ``q`` candidates are sampled; with ``refine`` the best one is passed
        to :func:`gradient_ascent`.
    seed : int
        Unsigned 64-bit seed; equal seeds give identical results.

    Returns
    -------
    ModeResult
        Ties between candidates go to the lowest sample index.
    """
    samples = sample_mixture(mix, cfg.q, seed)
    dens = mixture_density(mix, samples)
    best = int(np.argmax(dens))
    best_sample = samples[best].copy()
    # Re-evaluate as a single point so reported densities match mixture_density(argmax).
    best_density = mixture_density(mix, best_sample)
    if cfg.refine:
        argmax, density, its = _ascend(mix, best_sample, cfg.ascent)
    else:
        argmax, density, its = best_sample.copy(), best_density, 0
    return ModeResult(
        argmax=argmax,
        density=float(density),
        best_sample=best_sample,
        best_sample_density=best_density,
        ascent_iterations=its,
        candidates_evaluated=int(cfg.q),
    )
