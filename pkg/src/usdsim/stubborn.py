"""Noiseless dynamics with stubborn agents, and its exact equivalence with the
oblivious-noise model.

An oblivious channel with corruption probability ``p_noise`` and redraw law
``dist`` acts on ``n`` updating agents exactly like enlarging the population
with ``n_stub = p_noise / (1 - p_noise) * n`` never-updating agents split as
``n_stub * dist_j`` per state: in both models an updating agent pulls state
``j`` with probability ``(1 - p_noise) * c_j / n + p_noise * dist_j``.  The
equivalence is exact only when the stubborn counts come out integral, so
non-integral counts raise instead of being rounded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Configuration,
    NoiseSpec,
    ObservationDistribution,
    UniformNoise,
    _sample_given_observation,
    observation_distribution,
)
from .gof import GofResult, two_sample_chi_square

__all__ = [
    "NonIntegerStubbornCount",
    "StubbornSetup",
    "noise_to_stubborn",
    "nearest_admissible_n",
    "stubborn_observation_distribution",
    "step_stubborn",
    "sample_transitions_stubborn",
    "EquivalenceReport",
    "equivalence_report",
]

_INT_TOL = 1e-9
_ANALYTIC_TOL = 1e-12


class NonIntegerStubbornCount(ValueError):
    """The (n, noise) pair does not admit an exact stubborn realization."""


@dataclass(frozen=True)
class StubbornSetup:
    """``n`` updating agents plus fixed counts of never-updating agents per
    state.  The stubborn counts are constant across every simulated round.
    """

    n: int
    stub_alpha: int
    stub_beta: int
    stub_undecided: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one updating agent, got n={self.n}")
        if min(self.stub_alpha, self.stub_beta, self.stub_undecided) < 0:
            raise ValueError("stubborn counts must be >= 0")

    @property
    def n_stub(self) -> int:
        return self.stub_alpha + self.stub_beta + self.stub_undecided


def _as_oblivious(noise: NoiseSpec):
    return noise.as_oblivious() if isinstance(noise, UniformNoise) else noise


def noise_to_stubborn(n: int, noise: NoiseSpec) -> StubbornSetup:
    """Map a noise channel acting on ``n`` agents to its equivalent stubborn
    population: ``n_stub = p_noise / (1 - p_noise) * n`` agents split as
    ``n_stub * dist_j`` per state.

    Uniform noise ``p`` maps through its oblivious form (``p_noise = 3p``,
    uniform redraw), which requires ``p < 1/3``.  Raises
    :class:`NonIntegerStubbornCount` when a count is further than 1e-9 from an
    integer; callers can use :func:`nearest_admissible_n` to pick a nearby
    population size instead.
    """
    obl = _as_oblivious(noise)
    if obl.p_noise == 0.0:
        return StubbornSetup(n, 0, 0, 0)
    total = obl.p_noise / (1.0 - obl.p_noise) * n
    counts = []
    for pj in (*obl.dist,):
        raw = total * pj
        rounded = round(raw)
        if abs(raw - rounded) > _INT_TOL:
            raise NonIntegerStubbornCount(
                f"stubborn count {raw!r} for n={n} is not an integer; "
                f"nearest admissible n is {nearest_admissible_n(n, noise)}"
            )
        counts.append(int(rounded))
    return StubbornSetup(n, *counts)


def nearest_admissible_n(n: int, noise: NoiseSpec, max_delta: int = 10_000) -> int:
    """Smallest-|delta| population size near ``n`` whose stubborn counts are
    integral (ties resolved downward).
    """
    obl = _as_oblivious(noise)
    for delta in range(max_delta + 1):
        for candidate in (n - delta, n + delta) if delta else (n,):
            if candidate < 1:
                continue
            total = obl.p_noise / (1.0 - obl.p_noise) * candidate
            if all(abs(total * pj - round(total * pj)) <= _INT_TOL for pj in obl.dist):
                return candidate
    raise NonIntegerStubbornCount(
        f"no admissible population size within {max_delta} of {n}"
    )


def stubborn_observation_distribution(
    config: Configuration, setup: StubbornSetup
) -> ObservationDistribution:
    """Noiseless pull law over the enlarged complete graph: an updating agent
    sees state ``j`` with probability ``(c_j + stub_j) / (n + n_stub)``.
    """
    if config.n != setup.n:
        raise ValueError(
            f"configuration population {config.n} != updating agents {setup.n}"
        )
    total = setup.n + setup.n_stub
    return ObservationDistribution(
        (config.a + setup.stub_alpha) / total,
        (config.b + setup.stub_beta) / total,
        (config.q + setup.stub_undecided) / total,
    )


def sample_transitions_stubborn(
    config: Configuration, setup: StubbornSetup, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorised :func:`step_stubborn`: ``(size, 2)`` array of next ``(a, b)``
    counts among the updating agents.
    """
    obs = stubborn_observation_distribution(config, setup)
    return _sample_given_observation(config.a, config.b, config.q, obs, size, rng)


def step_stubborn(
    config: Configuration, setup: StubbornSetup, rng: np.random.Generator
) -> Configuration:
    """One exact aggregated round of the noiseless dynamics with stubborn
    agents; only the ``n`` updating agents transition.
    """
    a2, b2 = sample_transitions_stubborn(config, setup, 1, rng)[0]
    return Configuration(config.n, int(a2), int(b2))


@dataclass(frozen=True)
class EquivalenceReport:
    """Two-tier check that the noise model and its stubborn image transition
    identically: an analytic bound on the observation distributions over a
    configuration grid, and a chi-square homogeneity test on one-round samples
    from a shared start.
    """

    n: int
    setup: StubbornSetup
    samples: int
    start: Configuration
    max_observation_diff: float
    chi_square: GofResult
    alpha: float

    @property
    def analytic_passed(self) -> bool:
        return self.max_observation_diff <= _ANALYTIC_TOL

    @property
    def chi_square_passed(self) -> bool:
        return self.chi_square.pvalue >= self.alpha

    @property
    def passed(self) -> bool:
        return self.analytic_passed and self.chi_square_passed


def equivalence_report(
    n: int,
    noise: NoiseSpec,
    samples: int,
    rng: np.random.Generator,
    start: Configuration | None = None,
    grid_step: int | None = None,
    alpha: float = 0.01,
) -> EquivalenceReport:
    """Verify the noise/stubborn equivalence at population size ``n``.

    The analytic tier evaluates both observation distributions on a grid of
    configurations (step ``grid_step``, default ``max(1, n // 10)``) and
    reports the largest absolute component difference; the identity makes it
    vanish up to float rounding, so anything above 1e-12 is a failure.  The
    statistical tier draws ``samples`` one-round transitions from both models
    starting at ``start`` (default: balanced ``a = b = n // 2``) and compares
    them with a chi-square homogeneity test at significance ``alpha``, which
    guards the samplers themselves.

    Raises :class:`NonIntegerStubbornCount` when the pair is inadmissible.
    """
    setup = noise_to_stubborn(n, noise)
    step = grid_step if grid_step is not None else max(1, n // 10)
    max_diff = 0.0
    for a in range(0, n + 1, step):
        for b in range(0, n - a + 1, step):
            config = Configuration(n, a, b)
            from_noise = observation_distribution(config, noise).as_tuple()
            from_stub = stubborn_observation_distribution(config, setup).as_tuple()
            diff = max(abs(x - y) for x, y in zip(from_noise, from_stub))
            max_diff = max(max_diff, diff)
    if start is None:
        start = Configuration(n, n // 2, n // 2)
    noise_draws = _sample_given_observation(
        start.a, start.b, start.q, observation_distribution(start, noise), samples, rng
    )
    stub_draws = sample_transitions_stubborn(start, setup, samples, rng)
    chi2 = two_sample_chi_square(noise_draws, stub_draws)
    return EquivalenceReport(
        n=n,
        setup=setup,
        samples=samples,
        start=start,
        max_observation_diff=max_diff,
        chi_square=chi2,
        alpha=alpha,
    )
