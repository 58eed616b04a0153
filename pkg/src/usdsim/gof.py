"""Chi-square checks used to validate the transition samplers.

Two flavours: a goodness-of-fit test of sampled transitions against an exact
law, and a two-sample homogeneity test between two samplers.  Cells with small
expected counts are pooled (Cochran-style) before the statistic is formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable

import numpy as np
from scipy import stats

__all__ = [
    "GofResult",
    "count_outcomes",
    "chi_square_gof",
    "two_sample_chi_square",
]


@dataclass(frozen=True)
class GofResult:
    statistic: float
    df: int
    pvalue: float
    cells: int

    def passed(self, alpha: float = 0.01) -> bool:
        return self.pvalue >= alpha


def count_outcomes(samples: np.ndarray) -> dict[tuple[int, int], int]:
    """Tally an ``(m, 2)`` array of sampled ``(a, b)`` outcomes."""
    samples = np.asarray(samples)
    base = int(samples[:, 1].max()) + 1  # class counts are never negative
    keys = samples[:, 0] * base + samples[:, 1]
    counts = np.bincount(keys)
    return {
        (int(k // base), int(k % base)): int(counts[k]) for k in np.nonzero(counts)[0]
    }


def chi_square_gof(
    observed: dict[Hashable, int],
    expected_probs: dict[Hashable, float],
    n_samples: int,
    min_expected: float = 5.0,
) -> GofResult:
    """Pearson goodness-of-fit of observed outcome counts against an exact law.

    Outcomes observed outside the law's support fail outright (the exact law
    assigns them probability zero, so any occurrence falsifies the sampler).
    Support outcomes with expected count below ``min_expected`` are pooled into
    a single cell; a pooled remainder still below the floor is merged into the
    smallest retained cell.  A single-cell law (point mass) passes trivially
    once the support check is done.
    """
    support = {k for k, p in expected_probs.items() if p > 0.0}
    stray = sum(c for k, c in observed.items() if k not in support)
    if stray > 0:
        return GofResult(statistic=math.inf, df=0, pvalue=0.0, cells=len(support))
    items = sorted(
        ((expected_probs[k] * n_samples, observed.get(k, 0)) for k in support),
        key=lambda t: t[0],
    )
    pooled_exp = 0.0
    pooled_obs = 0
    cells: list[tuple[float, int]] = []
    for exp, obs in items:
        if exp >= min_expected:
            cells.append((exp, obs))
        else:
            pooled_exp += exp
            pooled_obs += obs
    if pooled_exp > 0.0:
        if pooled_exp >= min_expected or not cells:
            cells.append((pooled_exp, pooled_obs))
        else:
            exp0, obs0 = cells[0]
            cells[0] = (exp0 + pooled_exp, obs0 + pooled_obs)
    df = len(cells) - 1
    if df <= 0:
        return GofResult(statistic=0.0, df=0, pvalue=1.0, cells=len(cells))
    statistic = sum((obs - exp) ** 2 / exp for exp, obs in cells)
    pvalue = float(stats.chi2.sf(statistic, df))
    return GofResult(statistic=float(statistic), df=df, pvalue=pvalue, cells=len(cells))


def _quantile_bins(pooled: np.ndarray, column: np.ndarray, max_bins: int) -> tuple[np.ndarray, int]:
    qs = np.linspace(0.0, 1.0, max_bins + 1)[1:-1]
    edges = np.unique(np.quantile(pooled, qs))
    return np.digitize(column, edges), len(edges) + 1


def two_sample_chi_square(
    x: np.ndarray,
    y: np.ndarray,
    max_bins_per_axis: int = 8,
    min_pooled: float = 10.0,
) -> GofResult:
    """Homogeneity test between two ``(m, 2)`` samples of ``(a, b)`` outcomes.

    Outcomes are histogrammed on a grid of pooled-sample quantile bins per
    coordinate (the third census coordinate is determined by the first two),
    sparse cells are pooled, and the 2 x cells contingency table goes through
    the standard chi-square test.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    pooled = np.concatenate([x, y], axis=0)
    idx_a_x, na = _quantile_bins(pooled[:, 0], x[:, 0], max_bins_per_axis)
    idx_b_x, nb = _quantile_bins(pooled[:, 1], x[:, 1], max_bins_per_axis)
    idx_a_y, _ = _quantile_bins(pooled[:, 0], y[:, 0], max_bins_per_axis)
    idx_b_y, _ = _quantile_bins(pooled[:, 1], y[:, 1], max_bins_per_axis)
    n_cells = na * nb
    counts_x = np.bincount(idx_a_x * nb + idx_b_x, minlength=n_cells)
    counts_y = np.bincount(idx_a_y * nb + idx_b_y, minlength=n_cells)
    pooled_counts = counts_x + counts_y
    keep = pooled_counts >= min_pooled
    cols_x = list(counts_x[keep])
    cols_y = list(counts_y[keep])
    rest_x = int(counts_x[~keep].sum())
    rest_y = int(counts_y[~keep].sum())
    if rest_x + rest_y > 0:
        cols_x.append(rest_x)
        cols_y.append(rest_y)
    table = np.array([cols_x, cols_y], dtype=np.int64)
    nonzero = table.sum(axis=0) > 0
    table = table[:, nonzero]
    if table.shape[1] < 2:
        # both samples concentrate on a single cell: identical point masses
        return GofResult(statistic=0.0, df=0, pvalue=1.0, cells=int(table.shape[1]))
    statistic, pvalue, df, _ = stats.chi2_contingency(table, correction=False)
    return GofResult(
        statistic=float(statistic), df=int(df), pvalue=float(pvalue), cells=int(table.shape[1])
    )
