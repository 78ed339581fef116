"""Kernel regression by conditional mode and by conditional expectation."""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .conditioning import PruneConfig, condition
from .density import LOG_SQRT_2PI, JointKernelModel, as_bandwidth, as_point
from .errors import DegenerateDataError, OutsideSupportError, UsageError
from .mode_search import SearchConfig, find_mode
from .rng import check_seed, derive_seed


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` paired samples, inputs ``x`` of shape (n, dx) and outputs ``y`` of shape (n, dy)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim == 1:
            y = y[:, None]
        if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
            raise UsageError(f"x and y must be (n, d) arrays with equal n, got {x.shape} and {y.shape}")
        if x.shape[0] < 1 or x.shape[1] < 1 or y.shape[1] < 1:
            raise UsageError("dataset needs at least one row and one column on each side")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise UsageError("dataset contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dx(self) -> int:
        return self.x.shape[1]

    @property
    def dy(self) -> int:
        return self.y.shape[1]

    def joined(self) -> np.ndarray:
        return np.hstack([self.x, self.y])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    __hash__ = None


@dataclass(frozen=True)
class RegressorConfig:
    bandwidth: tuple
    search: SearchConfig = field(default_factory=SearchConfig)
    prune: PruneConfig = field(default_factory=PruneConfig)

    def __post_init__(self):
        object.__setattr__(self, "bandwidth", tuple(float(v) for v in as_bandwidth(self.bandwidth)))


def fit_kde(data: Dataset, bandwidth) -> JointKernelModel:
    """One kernel per sample, weight ``1/n``, shared bandwidth split into x and y parts."""
    s = as_bandwidth(bandwidth)
    if s.shape[0] != data.dx + data.dy:
        raise UsageError(f"bandwidth has dimension {s.shape[0]}, expected dx + dy = {data.dx + data.dy}")
    n = data.n
    return JointKernelModel(
        weights=np.full(n, 1.0 / n),
        x_centers=data.x,
        y_centers=data.y,
        x_bandwidths=np.broadcast_to(s[: data.dx], (n, data.dx)),
        y_bandwidths=np.broadcast_to(s[data.dx :], (n, data.dy)),
    )


def loo_log_likelihood(data: Dataset, bandwidth) -> float:
    """Sum over rows of the log density at row ``i`` under the KDE fit without row ``i``."""
    z = data.joined()
    s = as_bandwidth(bandwidth, z.shape[1])
    n = z.shape[0]
    if n < 2:
        raise UsageError("leave-one-out needs at least two rows")
    log_norm = -np.sum(np.log(s)) - z.shape[1] * LOG_SQRT_2PI
    total = 0.0
    step = max(1, 2_000_000 // (n * z.shape[1]))
    for start in range(0, n, step):
        rows = slice(start, min(n, start + step))
        diff = z[rows, None, :] - z[None, :, :]
        log_k = log_norm - np.sum(diff**2 / (2.0 * s**2), axis=2)
        r = np.arange(rows.start, rows.stop)
        log_k[r - rows.start, r] = -np.inf
        total += float(np.sum(logsumexp(log_k, axis=1) - np.log(n - 1)))
    return total


def select_bandwidth_loo(data: Dataset, grid) -> np.ndarray:
    """Pick the grid bandwidth with the largest leave-one-out log-likelihood.

    Candidates are scanned in lexicographic order, so ties go to the smaller
    bandwidth. When every row has an exact duplicate, the criterion grows
    without bound as the bandwidth shrinks; the smallest candidate is then
    returned with a warning.
    """
    if data.n < 2:
        raise UsageError("leave-one-out bandwidth selection needs at least two rows")
    d = data.dx + data.dy
    candidates = [as_bandwidth(b, d) for b in grid]
    if not candidates:
        raise UsageError("bandwidth grid is empty")
    candidates.sort(key=tuple)
    z = data.joined()
    _, counts = np.unique(z, axis=0, return_counts=True)
    if np.all(counts > 1):
        warnings.warn(
            "every sample has an exact duplicate; leave-one-out likelihood is unbounded, "
            "returning the smallest grid bandwidth",
            RuntimeWarning,
            stacklevel=2,
        )
        return candidates[0]
    scores = np.array([loo_log_likelihood(data, c) for c in candidates])
    if not np.any(np.isfinite(scores)):
        raise DegenerateDataError("no grid bandwidth gives a finite leave-one-out likelihood")
    scores[~np.isfinite(scores)] = -np.inf
    return candidates[int(np.argmax(scores))]


def predict_mode(model: JointKernelModel, x, cfg: RegressorConfig, seed=0) -> np.ndarray:
    """Most probable ``y`` given ``x``: global mode of the conditional mixture."""
    cond = condition(model, x, cfg.prune)
    return find_mode(cond.mixture, cfg.search, seed).argmax


def predict_nw(model: JointKernelModel, x, prune: PruneConfig = PruneConfig()) -> np.ndarray:
    """Nadaraya-Watson estimate: expectation of ``y`` under the conditional mixture."""
    mix = condition(model, x, prune).mixture
    return mix.weights @ mix.centers


def thread_count() -> int:
    """Worker threads from ``CONDMODE_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("CONDMODE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"CONDMODE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("CONDMODE_THREADS must be non-negative")
    return n or (os.cpu_count() or 1)


def _batch(fn, queries: np.ndarray, threads: int | None):
    threads = thread_count() if threads is None else max(1, threads)

    def safe(i):
        try:
            return fn(i)
        except OutsideSupportError:
            return None

    idx = range(queries.shape[0])
    if threads == 1 or queries.shape[0] < 2:
        return [safe(i) for i in idx]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(safe, idx))


def predict_mode_batch(model: JointKernelModel, queries, cfg: RegressorConfig, seed=0, threads=None):
    """Mode predictions for each row of ``queries``.

    Query ``i`` uses the sub-seed ``derive_seed(seed, i)``, so results do not
    depend on thread count or order. Queries outside the model support give
    ``None``.
    """
    seed = check_seed(seed)
    q = np.asarray(queries, dtype=float).reshape(-1, model.dx)
    return _batch(lambda i: predict_mode(model, q[i], cfg, derive_seed(seed, i)), q, threads)


def predict_nw_batch(model: JointKernelModel, queries, prune: PruneConfig = PruneConfig(), threads=None):
    q = np.asarray(queries, dtype=float).reshape(-1, model.dx)
    return _batch(lambda i: predict_nw(model, as_point(q[i], model.dx), prune), q, threads)
