"""Synthetic datasets, a grid-search oracle, and the two regression comparisons.

The sine comparison fits a KDE to noisy samples of ``sin(x**1.6)`` and scores
both predictors against the noiseless curve. The ambiguous comparison uses a
two-branch dataset in which the expectation falls between the branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import Mixture, mixture_density
from .errors import UsageError
from .mode_search import SearchConfig
from .regression import Dataset, RegressorConfig, fit_kde, predict_mode_batch, predict_nw_batch
from .rng import check_seed, make_rng

X_LO, X_HI = 0.0, 2.0 * math.pi
QUERY_MARGIN = 0.25
N_QUERIES = 200

# Ambiguous generator constants.
BRANCH_A_PROB = 0.65
BRANCH_FLOOR = 0.3
BRANCH_NOISE = 0.1
DEAD_ZONE_FRACTION = 0.5

MAX_GRID_POINTS = 10**7


def sine_curve(x):
    return np.sin(np.asarray(x, dtype=float) ** 1.6)


def branch_height(x):
    """Half the gap between the two branches: ``sin(x/2)`` floored at 0.3."""
    return np.maximum(np.sin(np.asarray(x, dtype=float) / 2.0), BRANCH_FLOOR)


def gen_sine_dataset(n: int, noise_sigma: float, seed) -> Dataset:
    if int(n) < 1:
        raise UsageError("n must be at least 1")
    if not noise_sigma >= 0:
        raise UsageError("noise_sigma must be non-negative")
    rng = make_rng(seed)
    x = rng.uniform(X_LO, X_HI, int(n))
    eps = rng.standard_normal(int(n)) * noise_sigma
    return Dataset(x, sine_curve(x) + eps)


def gen_ambiguous_dataset(n: int, seed, return_labels: bool = False):
    """Two mirrored branches ``y = +b(x)`` (probability 0.65) and ``y = -b(x)``.

    ``b`` is :func:`branch_height`; every ``y`` carries N(0, 0.1**2) noise.
    With ``return_labels`` also returns a boolean array, True for branch A.
    """
    if int(n) < 1:
        raise UsageError("n must be at least 1")
    rng = make_rng(seed)
    n = int(n)
    x = rng.uniform(X_LO, X_HI, n)
    on_a = rng.random(n) < BRANCH_A_PROB
    eps = rng.standard_normal(n) * BRANCH_NOISE
    data = Dataset(x, np.where(on_a, 1.0, -1.0) * branch_height(x) + eps)
    return (data, on_a) if return_labels else data


def true_sine_conditional(x: float, y, noise_sigma: float):
    """Density of ``y`` given ``x`` for the noisy sine data."""
    if not noise_sigma > 0:
        raise UsageError("noise_sigma must be positive")
    r = (np.asarray(y, dtype=float) - sine_curve(x)) / noise_sigma
    out = np.exp(-0.5 * r * r) / (math.sqrt(2.0 * math.pi) * noise_sigma)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GridSpec:
    """Regular grid, one ``(lo, hi, points)`` triple per dimension."""

    axes: tuple

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), int(p)) for lo, hi, p in self.axes)
        if not axes:
            raise UsageError("grid needs at least one axis")
        for lo, hi, p in axes:
            if not lo < hi or p < 2:
                raise UsageError(f"bad grid axis ({lo}, {hi}, {p})")
        if math.prod(p for _, _, p in axes) > MAX_GRID_POINTS:
            raise UsageError("grid has more than 1e7 points")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def covering(cls, mix: Mixture, points: int, pad: float = 6.0) -> "GridSpec":
        """Box spanning every kernel center +- ``pad`` bandwidths."""
        lo = (mix.centers - pad * mix.bandwidths).min(axis=0)
        hi = (mix.centers + pad * mix.bandwidths).max(axis=0)
        return cls(tuple((a, b, points) for a, b in zip(lo, hi)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    def coords(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, p) for lo, hi, p in self.axes]

    def steps(self) -> np.ndarray:
        return np.array([(hi - lo) / (p - 1) for lo, hi, p in self.axes])


def brute_force_mode(mix: Mixture, grid: GridSpec, return_density: bool = False):
    """Grid point with the highest mixture density.

    Points are visited in lexicographic order and the first maximum wins, so
    ties resolve to the lexicographically smallest point.
    """
    if grid.dim != mix.dim:
        raise UsageError(f"grid dimension {grid.dim} does not match mixture dimension {mix.dim}")
    coords = grid.coords()
    shape = tuple(len(c) for c in coords)
    total = math.prod(shape)
    chunk = max(1, 2_000_000 // (mix.k * mix.dim))
    best_val, best_flat = -1.0, 0
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        idx = np.unravel_index(flat, shape)
        pts = np.column_stack([c[i] for c, i in zip(coords, idx)])
        dens = mixture_density(mix, pts)
        j = int(np.argmax(dens))
        if dens[j] > best_val:
            best_val, best_flat = float(dens[j]), int(flat[j])
    point = np.array([c[i] for c, i in zip(coords, np.unravel_index(best_flat, shape))])
    return (point, best_val) if return_density else point


def rmse(predictions, truth) -> float:
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    if t.ndim == 1:
        t = t[:, None]
    if p.shape != t.shape or p.shape[0] < 1:
        raise UsageError(f"shape mismatch: {p.shape} vs {t.shape}")
    return float(np.sqrt(np.mean(np.sum((p - t) ** 2, axis=1))))


@dataclass
class ExperimentReport:
    """Per-query records plus summary metrics and the configuration used.

    Missing predictions (query outside the model support) are stored as
    ``None`` and excluded from the metrics.
    """

    kind: str
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def recompute_summary(self) -> dict:
        return SUMMARIZERS[self.kind](self.records)


def query_grid(count: int = N_QUERIES) -> np.ndarray:
    return np.linspace(X_LO + QUERY_MARGIN, X_HI - QUERY_MARGIN, count)


def _scalar(v):
    return None if v is None else float(np.asarray(v).ravel()[0])


def _summarize_sine(records) -> dict:
    ok = [r for r in records if r["y_mode"] is not None and r["y_nw"] is not None]
    truth = [r["y_true"] for r in ok]
    return {
        "queries": len(records),
        "missing": len(records) - len(ok),
        "mode_rmse": rmse([r["y_mode"] for r in ok], truth) if ok else None,
        "nw_rmse": rmse([r["y_nw"] for r in ok], truth) if ok else None,
    }


def _summarize_ambiguous(records) -> dict:
    ok = [r for r in records if r["y_mode"] is not None and r["y_nw"] is not None]
    out = {"queries": len(records), "missing": len(records) - len(ok)}
    for name in ("mode", "nw"):
        dead = sum(1 for r in ok if r[f"dead_{name}"])
        out[f"{name}_dead_zone_count"] = dead
        out[f"{name}_dead_zone_rate"] = dead / len(ok) if ok else None
        out[f"{name}_mean_branch_distance"] = (
            float(np.mean([r[f"dist_{name}"] for r in ok])) if ok else None
        )
    return out


SUMMARIZERS = {"sine": _summarize_sine, "ambiguous": _summarize_ambiguous}


def _predict_both(data: Dataset, s, q: int, search_seed: int, queries: np.ndarray, threads):
    cfg = RegressorConfig(bandwidth=s, search=SearchConfig(q=q))
    model = fit_kde(data, cfg.bandwidth)
    modes = predict_mode_batch(model, queries, cfg, search_seed, threads)
    nws = predict_nw_batch(model, queries, cfg.prune, threads)
    return [_scalar(v) for v in modes], [_scalar(v) for v in nws]


def run_sine_experiment(
    n: int = 1000,
    s=(0.1, 0.1),
    q: int = 1000,
    data_seed: int = 0,
    search_seed: int = 1,
    noise_sigma: float = 0.2,
    queries: int = N_QUERIES,
    threads=None,
) -> ExperimentReport:
    """Compare mode and Nadaraya-Watson predictions on noisy ``sin(x**1.6)`` data."""
    data_seed, search_seed = check_seed(data_seed), check_seed(search_seed)
    data = gen_sine_dataset(n, noise_sigma, data_seed)
    xs = query_grid(queries)
    modes, nws = _predict_both(data, s, q, search_seed, xs, threads)
    records = [
        {"x": float(x), "y_mode": m, "y_nw": w, "y_true": float(sine_curve(x))}
        for x, m, w in zip(xs, modes, nws)
    ]
    config = {
        "experiment": "sine",
        "n": int(n),
        "s": [float(v) for v in s],
        "q": int(q),
        "noise_sigma": float(noise_sigma),
        "data_seed": data_seed,
        "search_seed": search_seed,
        "queries": int(queries),
        "query_range": [float(xs[0]), float(xs[-1])],
    }
    return ExperimentReport("sine", records, _summarize_sine(records), config)


def run_ambiguous_experiment(
    n: int = 1000,
    s=(0.1, 0.1),
    q: int = 1000,
    data_seed: int = 0,
    search_seed: int = 1,
    queries: int = N_QUERIES,
    threads=None,
) -> ExperimentReport:
    """Measure how often each predictor lands between the two branches.

    The dead zone at ``x`` is ``|y| < 0.5 * b(x)``; branch distance is the
    distance to the nearer noiseless branch ``+-b(x)``.
    """
    data_seed, search_seed = check_seed(data_seed), check_seed(search_seed)
    data = gen_ambiguous_dataset(n, data_seed)
    xs = query_grid(queries)
    modes, nws = _predict_both(data, s, q, search_seed, xs, threads)
    records = []
    for x, m, w in zip(xs, modes, nws):
        b = float(branch_height(x))
        rec = {"x": float(x), "y_mode": m, "y_nw": w, "branch": b}
        for name, v in (("mode", m), ("nw", w)):
            rec[f"dist_{name}"] = None if v is None else abs(abs(v) - b)
            rec[f"dead_{name}"] = None if v is None else bool(abs(v) < DEAD_ZONE_FRACTION * b)
        records.append(rec)
    config = {
        "experiment": "ambiguous",
        "n": int(n),
        "s": [float(v) for v in s],
        "q": int(q),
        "data_seed": data_seed,
        "search_seed": search_seed,
        "queries": int(queries),
        "query_range": [float(xs[0]), float(xs[-1])],
        "generator": {
            "branch_a_prob": BRANCH_A_PROB,
            "branch": "max(sin(x/2), 0.3)",
            "noise_sigma": BRANCH_NOISE,
            "dead_zone": "|y| < 0.5 * branch(x)",
        },
    }
    return ExperimentReport("ambiguous", records, _summarize_ambiguous(records), config)
