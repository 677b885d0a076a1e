"""Summary statistics, kernel density estimates and distribution
distances for sample sets produced by the simulation pipelines."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    n: int
    point_mass: Optional[float] = None

    @property
    def degenerate(self) -> bool:
        return self.point_mass is not None


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Rule-of-thumb bandwidth 0.9 min(sd, IQR/1.34) n^(-1/5)."""
    sd = float(np.std(samples, ddof=1)) if len(samples) > 1 else 0.0
    q75, q25 = np.percentile(samples, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(s for s in (sd, iqr / 1.34) if s > 0) if (sd > 0 or iqr > 0) else 0.0
    return 0.9 * spread * len(samples) ** (-0.2)


def kde(samples, grid_size: int = 256) -> DensityEstimate:
    """Gaussian kernel density estimate on an automatic grid.

    A sample set with zero spread has no meaningful density; it is
    reported as a point mass instead.
    """
    xs = np.asarray(samples, dtype=float)
    if xs.ndim != 1 or len(xs) == 0:
        raise ConfigError("kde needs a nonempty 1-d sample array")
    if grid_size < 2:
        raise ConfigError("grid_size must be >= 2")
    h = silverman_bandwidth(xs)
    if h == 0.0:
        return DensityEstimate(
            grid=np.array([xs[0]]),
            values=np.array([math.inf]),
            bandwidth=0.0,
            n=len(xs),
            point_mass=float(xs[0]),
        )
    grid = np.linspace(xs.min() - 4.0 * h, xs.max() + 4.0 * h, grid_size)
    z = (grid[:, None] - xs[None, :]) / h
    values = np.exp(-0.5 * z * z).sum(axis=1) / (len(xs) * h * math.sqrt(2.0 * math.pi))
    return DensityEstimate(grid=grid, values=values, bandwidth=h, n=len(xs))


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance."""
    xa = np.sort(np.asarray(a, dtype=float))
    xb = np.sort(np.asarray(b, dtype=float))
    if len(xa) == 0 or len(xb) == 0:
        raise ConfigError("ks_distance needs two nonempty samples")
    pooled = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, pooled, side="right") / len(xa)
    fb = np.searchsorted(xb, pooled, side="right") / len(xb)
    return float(np.max(np.abs(fa - fb)))


def summary(samples) -> dict:
    xs = np.asarray(samples, dtype=float)
    if len(xs) == 0:
        raise ConfigError("summary needs a nonempty sample array")
    return {
        "n": int(len(xs)),
        "mean": float(np.mean(xs)),
        "std": float(np.std(xs, ddof=1)) if len(xs) > 1 else 0.0,
        "min": float(np.min(xs)),
        "q25": float(np.percentile(xs, 25.0)),
        "median": float(np.median(xs)),
        "q75": float(np.percentile(xs, 75.0)),
        "max": float(np.max(xs)),
    }


def density_csv(estimate: DensityEstimate) -> str:
    lines = ["grid,value"]
    for x, v in zip(estimate.grid, estimate.values):
        lines.append(f"{float(x)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"
