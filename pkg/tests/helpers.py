"""Shared test utilities: deterministic generators and seeded chi-square
checks of the transition samplers.
"""

from __future__ import annotations

import numpy as np

from usdsim import Configuration, exact_transition_distribution
from usdsim.gof import GofResult, chi_square_gof, count_outcomes


def make_rng(*entropy) -> np.random.Generator:
    """Deterministic generator keyed by an arbitrary tuple of non-negative ints."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def law_by_counts(law: dict[Configuration, float]) -> dict[tuple[int, int], float]:
    return {(cfg.a, cfg.b): prob for cfg, prob in law.items()}


def sampler_gof(
    config,
    noise,
    sampler,
    n_samples: int,
    *entropy,
) -> GofResult:
    """Draw ``n_samples`` transitions with ``sampler`` under a seed derived
    from ``entropy`` and test them against the exact law.
    """
    rng = make_rng(*entropy)
    samples = sampler(config, noise, n_samples, rng)
    expected = law_by_counts(exact_transition_distribution(config, noise))
    return chi_square_gof(count_outcomes(samples), expected, n_samples)


def sampler_gof_with_retry(
    config,
    noise,
    sampler,
    n_samples: int,
    *entropy,
    alpha: float = 0.01,
    retries: int = 1,
) -> tuple[bool, int]:
    """Seeded goodness-of-fit with a bounded retry on a fresh sample.

    A correct sampler fails a single chi-square test at significance ``alpha``
    about ``alpha`` of the time, so a sweep of hundreds of such tests would
    stochastically fail somewhere; one independent retry drops the per-test
    false-failure rate to about ``alpha**2`` while a genuinely wrong sampler
    still fails both attempts essentially surely at these sample sizes.
    Returns (passed, attempts_used).
    """
    for attempt in range(retries + 1):
        result = sampler_gof(config, noise, sampler, n_samples, *entropy, attempt)
        if result.pvalue >= alpha:
            return True, attempt + 1
    return False, retries + 1


def all_configurations(max_n: int, min_n: int = 1):
    """Every census with ``min_n <= n <= max_n``."""
    for n in range(min_n, max_n + 1):
        for a in range(n + 1):
            for b in range(n - a + 1):
                yield Configuration(n, a, b)
