"""Distances between empirical samples and reference laws."""

from __future__ import annotations

import numpy as np

from .errors import ParameterDomainError

W1_QUANTILES = 10_000


def _sorted_nonempty(sample) -> np.ndarray:
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size == 0:
        raise ParameterDomainError("empty sample")
    return x


def ks_distance(sample, reference_cdf) -> float:
    """sup_x |F_n(x) - F(x)| for a continuous reference CDF (vectorized callable).

    Ties in the sample are handled by comparing at both one-sided limits of the
    empirical CDF.
    """
    x = _sorted_nonempty(sample)
    n = x.size
    values, first = np.unique(x, return_index=True)
    below = first / n
    upto = np.append(first[1:], n) / n
    f = np.asarray(reference_cdf(values), dtype=float)
    return float(min(1.0, max(np.max(np.abs(upto - f)), np.max(np.abs(below - f)))))


def ks_to_point_mass(sample, c: float) -> float:
    """KS distance between the sample and the point mass at ``c``."""
    x = _sorted_nonempty(sample)
    n = x.size
    below = np.searchsorted(x, c, side="left") / n
    upto = np.searchsorted(x, c, side="right") / n
    return float(max(below, 1.0 - upto))


def two_sample_ks(a, b) -> float:
    xa = _sorted_nonempty(a)
    xb = _sorted_nonempty(b)
    grid = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, grid, side="right") / xa.size
    fb = np.searchsorted(xb, grid, side="right") / xb.size
    return float(np.max(np.abs(fa - fb)))


def _midpoints(m: int) -> np.ndarray:
    return (np.arange(m) + 0.5) / m


def empirical_quantile(sorted_x: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.clip(np.ceil(u * sorted_x.size).astype(int) - 1, 0, sorted_x.size - 1)
    return sorted_x[idx]


def wasserstein1(sample, reference, m: int = W1_QUANTILES) -> float:
    """W1 via midpoint quantiles; ``reference`` is a quantile function or a sample."""
    x = _sorted_nonempty(sample)
    u = _midpoints(m)
    if callable(reference):
        ref_q = np.asarray(reference(u), dtype=float)
    else:
        ref_q = empirical_quantile(_sorted_nonempty(reference), u)
    return float(np.mean(np.abs(empirical_quantile(x, u) - ref_q)))
