"""Closed-form one-round expectations, phase-transition constants and
trajectory statistics.

The dynamics undergoes a phase transition at noise probability 1/6: below it
(noise ``p = 1/6 - eps``) the process settles into a long-lived almost
consensus whose bias stays inside a linear band; above it (``p = 1/6 + eps``)
the bias collapses to the square-root-of-``n`` scale and the majority opinion
keeps switching.  This module evaluates the exact expectations of the next
round's census, the analytic constants describing the two regimes, and the
per-trajectory statistics (metastable entry, threshold crossing, majority
switch counting) that the experiment harness aggregates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Configuration

__all__ = [
    "CRITICAL_NOISE",
    "Regime",
    "classify_regime",
    "ExpectedNext",
    "expected_next",
    "expected_next_regime",
    "ThresholdSet",
    "thresholds",
    "metastable_entry",
    "below_threshold_entry",
    "count_switches",
    "TrajectoryStats",
    "trajectory_stats",
]

CRITICAL_NOISE = 1.0 / 6.0
_CRITICAL_TOL = 1e-12


class Regime(Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


def classify_regime(p: float, tol: float = _CRITICAL_TOL) -> Regime:
    """Which side of the critical noise probability 1/6 the channel sits on.

    ``p`` within ``tol`` of 1/6 is classified critical; the theory makes no
    claim exactly at the threshold.
    """
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"noise probability must be in [0, 1/2], got {p}")
    if p < CRITICAL_NOISE - tol:
        return Regime.SUBCRITICAL
    if p > CRITICAL_NOISE + tol:
        return Regime.SUPERCRITICAL
    return Regime.CRITICAL


@dataclass(frozen=True)
class ExpectedNext:
    """Expected census after one round, conditioned on the current one."""

    e_a: float
    e_b: float
    e_s: float
    e_q: float


def expected_next(config: Configuration, p: float) -> ExpectedNext:
    """Exact conditional expectations of next-round (A, B, S, Q) under uniform
    noise ``p``:

    *  E[A] = (a/n)(a + 2q)(1 - 2p) + [a(a + b) + (a + q)(b + q)] p/n
    *  E[B] = (b/n)(b + 2q)(1 - 2p) + [b(a + b) + (a + q)(b + q)] p/n
    *  E[S] = s (1 - p + (1 - 3p) q/n)
    *  E[Q] = p n + (1 - 3p)/(2n) [2 q^2 + (n - q)^2 - s^2]
    """
    n = config.n
    if n == 0:
        raise ValueError("expectations undefined for an empty population")
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"noise probability must be in [0, 1/2], got {p}")
    a, b, q, s = config.a, config.b, config.q, config.s
    cross = (a + q) * (b + q)
    e_a = a / n * (a + 2 * q) * (1 - 2 * p) + (a * (a + b) + cross) * p / n
    e_b = b / n * (b + 2 * q) * (1 - 2 * p) + (b * (a + b) + cross) * p / n
    e_s = s * (1 - p + (1 - 3 * p) * q / n)
    e_q = p * n + (1 - 3 * p) / (2 * n) * (2 * q * q + (n - q) ** 2 - s * s)
    return ExpectedNext(e_a=e_a, e_b=e_b, e_s=e_s, e_q=e_q)


def expected_next_regime(
    config: Configuration, epsilon: float, regime: Regime
) -> ExpectedNext:
    """Regime-specialised expectations, algebraically identical to
    :func:`expected_next` at ``p = 1/6 - eps`` (subcritical) or
    ``p = 1/6 + eps`` (supercritical):

    *  subcritical:  E[S] = s (5/6 + eps + (1 + 6 eps)/2 * q/n)
    *  supercritical: E[S] = s (5/6 - eps + (1 - 6 eps)/2 * q/n)

    and the matching quadratic forms for E[Q].  E[A] and E[B] follow from
    E[A] + E[B] = n - E[Q] and E[A] - E[B] = E[S].
    """
    n = config.n
    if n == 0:
        raise ValueError("expectations undefined for an empty population")
    q, s = config.q, config.s
    if regime is Regime.SUBCRITICAL:
        if not 0.0 < epsilon < 1 / 6:
            raise ValueError(f"subcritical distance must be in (0, 1/6), got {epsilon}")
        sign = 1.0
    elif regime is Regime.SUPERCRITICAL:
        if not 0.0 < epsilon <= 1 / 3:
            raise ValueError(
                f"supercritical distance must be in (0, 1/3], got {epsilon}"
            )
        sign = -1.0
    else:
        raise ValueError("no regime-specialised form at the critical point")
    c = 1 + sign * 6 * epsilon  # 1 +- 6 eps, the recurring regime constant
    e_s = s * (5 / 6 + sign * epsilon + 0.5 * c * q / n)
    e_q = (
        0.75 * (c / n) * q * q
        - 0.5 * c * q
        + (5 + sign * 6 * epsilon) / 12 * n
        - (c / n) * (s / 2) ** 2
    )
    e_a = (n - e_q + e_s) / 2
    e_b = (n - e_q - e_s) / 2
    return ExpectedNext(e_a=e_a, e_b=e_b, e_s=e_s, e_q=e_q)


@dataclass(frozen=True)
class ThresholdSet:
    """Analytic constants of one regime at distance ``epsilon`` from the
    critical noise probability, all expressed as fractions of ``n`` so a single
    set serves every population size in a sweep.

    Subcritical fields (``p = 1/6 - eps``):

    * ``delta_lo_frac``/``delta_hi_frac`` -- the bias band
      ``[2 sqrt(eps)/(1+6 eps), 1 - 2((1-6 eps)/12)^3]`` of the metastable
      almost-consensus phase.
    * ``beta_sub_frac = 2 sqrt(3 eps)/(1+6 eps)`` -- bias level below which the
      drift amplifies the majority each round.
    * ``q_lo_frac = (1-4 eps)/(3(1+6 eps))`` -- undecided mass sustaining that
      amplification.
    * ``q_floor_frac = (1-6 eps)/12`` and ``b_floor_frac = ((1-6 eps)/12)^3``
      -- persistent floors for the undecided mass and the minority opinion.

    Supercritical fields (``p = 1/6 + eps``):

    * ``beta_super_frac = 2 sqrt(2 eps)/sqrt((1+6 eps)(1-6 eps))`` -- base of
      the geometric interval ladder for the collapsing bias.
    * ``q_cap_super_frac = (1+3 eps)/(3(1-6 eps))`` -- undecided-mass cap under
      which the bias keeps shrinking.
    * ``k = ceil(log_{2/3}(beta) - 1)`` and the strictly decreasing ``qbar``
      ladder (entries for ladder indices -1..k) pairing each bias interval with
      its guaranteed undecided mass.

    The supercritical ladder machinery is only defined for ``eps <= 1/12``
    (and the cap needs ``eps < 1/6``); outside these ranges the fields are
    ``None``.
    """

    epsilon: float
    regime: Regime
    delta_lo_frac: float | None = None
    delta_hi_frac: float | None = None
    beta_sub_frac: float | None = None
    q_lo_frac: float | None = None
    q_floor_frac: float | None = None
    b_floor_frac: float | None = None
    beta_super_frac: float | None = None
    q_cap_super_frac: float | None = None
    k: int | None = None
    qbar: tuple[float, ...] | None = None


def _qbar_ladder(epsilon: float, k: int) -> tuple[float, ...]:
    # ladder index i runs from -1 to k; generic entries up to i = k-2, then the
    # two tail entries 2/9 + eps/3 and 1/12 + eps.
    vals = [
        1 / 3 - 2 * epsilon / (1 + 6 * epsilon) * 1.5 ** (2 * i + 3)
        for i in range(-1, k - 1)
    ]
    vals.append(2 / 9 + epsilon / 3)
    vals.append(1 / 12 + epsilon)
    return tuple(vals)


def thresholds(epsilon: float, regime: Regime) -> ThresholdSet:
    """Evaluate every analytic constant of the given regime at ``epsilon``.

    Subcritical requires ``eps`` in (0, 1/6); supercritical requires ``eps``
    in (0, 1/3].  Fields belonging to the other regime are left ``None``.
    """
    if regime is Regime.SUBCRITICAL:
        if not 0.0 < epsilon < 1 / 6:
            raise ValueError(f"subcritical distance must be in (0, 1/6), got {epsilon}")
        c = 1 + 6 * epsilon
        return ThresholdSet(
            epsilon=epsilon,
            regime=regime,
            delta_lo_frac=2 * math.sqrt(epsilon) / c,
            delta_hi_frac=1 - 2 * ((1 - 6 * epsilon) / 12) ** 3,
            beta_sub_frac=2 * math.sqrt(3 * epsilon) / c,
            q_lo_frac=(1 - 4 * epsilon) / (3 * c),
            q_floor_frac=(1 - 6 * epsilon) / 12,
            b_floor_frac=((1 - 6 * epsilon) / 12) ** 3,
        )
    if regime is Regime.SUPERCRITICAL:
        if not 0.0 < epsilon <= 1 / 3:
            raise ValueError(
                f"supercritical distance must be in (0, 1/3], got {epsilon}"
            )
        q_cap = (1 + 3 * epsilon) / (3 * (1 - 6 * epsilon)) if epsilon < 1 / 6 else None
        beta = None
        k = None
        qbar = None
        if epsilon <= 1 / 12:
            beta = 2 * math.sqrt(2 * epsilon) / math.sqrt((1 + 6 * epsilon) * (1 - 6 * epsilon))
            k = math.ceil(math.log(beta) / math.log(2 / 3) - 1)
            qbar = _qbar_ladder(epsilon, k)
        return ThresholdSet(
            epsilon=epsilon,
            regime=regime,
            beta_super_frac=beta,
            q_cap_super_frac=q_cap,
            k=k,
            qbar=qbar,
        )
    raise ValueError("no threshold constants at the critical point")


def _bias_array(traj) -> np.ndarray:
    return np.asarray(getattr(traj, "s", traj), dtype=np.int64)


def metastable_entry(
    traj, ts: ThresholdSet | None = None, frac: float | None = None
) -> int | None:
    """First round whose absolute bias reaches ``frac * n`` (default: the
    subcritical band's lower edge ``delta_lo_frac``); ``None`` if the
    trajectory never gets there.
    """
    if frac is None:
        if ts is None:
            raise ValueError("need a subcritical ThresholdSet or an explicit frac")
        if ts.regime is not Regime.SUBCRITICAL:
            raise ValueError("metastable entry is defined by the subcritical band")
        frac = ts.delta_lo_frac
    s = _bias_array(traj)
    hits = np.nonzero(np.abs(s) >= frac * traj.n)[0]
    return int(hits[0]) if hits.size else None


def below_threshold_entry(
    traj, coefficient: float = 10.0, log_base: float = math.e
) -> int | None:
    """First round with absolute bias below ``coefficient * sqrt(n log n)``;
    ``None`` if never.  The logarithm base defaults to natural log and is
    exposed because the scale is only fixed up to that choice.
    """
    if coefficient <= 0:
        raise ValueError(f"coefficient must be positive, got {coefficient}")
    n = traj.n
    threshold = coefficient * math.sqrt(n * math.log(n) / math.log(log_base))
    s = _bias_array(traj)
    hits = np.nonzero(np.abs(s) < threshold)[0]
    return int(hits[0]) if hits.size else None


def count_switches(traj) -> int:
    """Number of majority-opinion changes along a bias trajectory: rounds where
    the bias sign differs from the previous sign, both nonzero.  Rounds at
    exactly zero bias carry the previous nonzero sign forward, and a leading
    zero stretch contributes no switch.
    """
    s = _bias_array(traj)
    if s.size == 0:
        return 0
    signs = np.sign(s)
    nonzero = signs != 0
    last_idx = np.maximum.accumulate(np.where(nonzero, np.arange(s.size), -1))
    carried = np.where(last_idx >= 0, signs[np.maximum(last_idx, 0)], 0)
    prev, cur = carried[:-1], carried[1:]
    return int(np.count_nonzero((prev != cur) & (prev != 0) & (cur != 0)))


@dataclass(frozen=True)
class TrajectoryStats:
    """Per-trial statistics: entry rounds under both criteria, majority switch
    count, and the absolute-bias range over the analysis window.
    """

    entry_round_metastable: int | None
    entry_round_below_threshold: int | None
    switch_count: int
    min_abs_bias: int
    max_abs_bias: int


def trajectory_stats(
    traj,
    entry_frac: float | None = None,
    below_coefficient: float = 10.0,
    log_base: float = math.e,
    window: tuple[int, int | None] | None = None,
) -> TrajectoryStats:
    """Compute all per-trajectory statistics in one pass.

    ``entry_frac`` enables the metastable-entry criterion (``None`` skips it,
    e.g. in the supercritical regime where the band is undefined).  ``window``
    restricts switch counting and the bias range to rounds ``[start, stop)``.
    """
    s = _bias_array(traj)
    lo, hi = window if window is not None else (0, None)
    windowed = s[lo:hi]
    entry_meta = metastable_entry(traj, frac=entry_frac) if entry_frac is not None else None
    return TrajectoryStats(
        entry_round_metastable=entry_meta,
        entry_round_below_threshold=below_threshold_entry(traj, below_coefficient, log_base),
        switch_count=count_switches(windowed),
        min_abs_bias=int(np.min(np.abs(windowed))) if windowed.size else 0,
        max_abs_bias=int(np.max(np.abs(windowed))) if windowed.size else 0,
    )
