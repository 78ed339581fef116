"""Conditioning a joint kernel model on an observed input ``x``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .density import JointKernelModel, Mixture, as_point, kernel_log_terms, mixture_density
from .errors import OutsideSupportError, UsageError


@dataclass(frozen=True)
class PruneConfig:
    """Drop kernels whose conditioned weight is below ``relative_threshold * max weight``."""

    relative_threshold: float = 1e-12

    def __post_init__(self):
        if not (0.0 <= self.relative_threshold < 1.0):
            raise UsageError("relative_threshold must lie in [0, 1)")


NO_PRUNING = PruneConfig(0.0)


@dataclass(frozen=True, eq=False)
class ConditionalMixture:
    mixture: Mixture
    source_indices: np.ndarray
    query: np.ndarray


def conditional_log_weights(model: JointKernelModel, x) -> np.ndarray:
    """Normalized log weights ``log(a_i phi_i(x - x_i) / sum_j a_j phi_j(x - x_j))``."""
    x = as_point(x, model.dx, name="x")
    with np.errstate(divide="ignore"):
        log_a = np.log(model.weights)
    log_terms = log_a + kernel_log_terms(model.x_centers, model.x_bandwidths, x[None, :])[0]
    log_norm = logsumexp(log_terms)
    if not np.isfinite(log_norm):
        raise OutsideSupportError(f"query x={x.tolist()} is outside the model support")
    return log_terms - log_norm


def condition(model: JointKernelModel, x, prune: PruneConfig = PruneConfig()) -> ConditionalMixture:
    """Reweight the y-kernels of ``model`` by their x-kernel response at ``x``.

    Weights are ``a_i phi_i(x - x_i)`` normalized over all kernels, computed in
    the log domain. Kernels below the relative pruning threshold are dropped
    and the survivors renormalized; y-centers and y-bandwidths are unchanged.

    Raises
    ------
    OutsideSupportError
        If every weighted x-kernel underflows even in log space.
    """
    x = as_point(x, model.dx, name="x")
    log_w = conditional_log_weights(model, x)
    log_max = log_w.max()
    if prune.relative_threshold > 0:
        keep = log_w >= log_max + np.log(prune.relative_threshold)
    else:
        keep = np.isfinite(log_w)
    idx = np.flatnonzero(keep)
    w = np.exp(log_w[idx] - log_max)
    w /= w.sum()
    mix = Mixture(w, model.y_centers[idx], model.y_bandwidths[idx])
    return ConditionalMixture(mixture=mix, source_indices=idx, query=x)


def conditional_density(model: JointKernelModel, x, y):
    """Density of ``y`` given ``x`` under the joint model (no pruning)."""
    return mixture_density(condition(model, x, NO_PRUNING).mixture, y)
