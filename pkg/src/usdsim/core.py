"""Core of the noisy undecided-state dynamics on the complete graph.

A population of ``n`` anonymous agents holds one of three states: one of two
opinions (alpha, beta) or the undecided state.  In every synchronous round
each agent pulls the state of one agent chosen uniformly at random (possibly
itself), the observed message may be corrupted by noise, and the agent applies
the three-state update rule: conflicting opinions produce the undecided state,
and an undecided agent adopts whatever it observed.

Because agents are anonymous and the graph is complete, the whole process is a
Markov chain on the census ``(a, b, q)``.  This module provides three mutually
checking transition engines:

* :func:`step_aggregated` -- exact class-aggregated sampling: two binomial
  draws plus one multinomial draw per round, independent of ``n``.
* :func:`step_naive` -- per-agent simulation, kept as a slow oracle.
* :func:`exact_transition_distribution` -- full enumeration of the one-round
  law for tiny populations (brute-force oracle for the two samplers).

Sampling uses ``numpy.random.Generator`` binomial/multinomial draws, which are
exact discrete samplers (inversion/BTPE and conditional binomials), not normal
approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction

import numpy as np

__all__ = [
    "Opinion",
    "Configuration",
    "UniformNoise",
    "ObliviousNoise",
    "NoiseSpec",
    "ObservationDistribution",
    "update_rule",
    "observation_distribution",
    "step_aggregated",
    "step_naive",
    "sample_transitions_aggregated",
    "sample_transitions_naive",
    "exact_transition_distribution",
    "exact_transition_given_observation",
    "MAX_EXACT_N",
]

# Enumeration of the exact one-round law is exponential in the class counts;
# past this population size the oracle is not worth its cost.
MAX_EXACT_N = 12

_DIST_TOL = 1e-12


class Opinion(IntEnum):
    """Agent states.  Integer codes double as indices into distribution vectors."""

    ALPHA = 0
    BETA = 1
    UNDECIDED = 2


# update table indexed [own state, observed state]:
# an opinionated agent keeps its opinion unless it observes the other opinion
# (then it turns undecided); an undecided agent adopts whatever it observed.
_UPDATE = np.array(
    [
        [Opinion.ALPHA, Opinion.UNDECIDED, Opinion.ALPHA],
        [Opinion.UNDECIDED, Opinion.BETA, Opinion.BETA],
        [Opinion.ALPHA, Opinion.BETA, Opinion.UNDECIDED],
    ],
    dtype=np.int8,
)


def update_rule(self_state: Opinion, observed_state: Opinion) -> Opinion:
    """Next state of an agent in ``self_state`` that observed ``observed_state``.

    Total and deterministic over the 3x3 state square.
    """
    return Opinion(int(_UPDATE[int(self_state), int(observed_state)]))


@dataclass(frozen=True)
class Configuration:
    """Census of a complete-graph population: ``a`` alpha agents, ``b`` beta
    agents and ``q = n - a - b`` undecided agents.

    The signed bias ``s = a - b`` identifies the majority opinion.
    """

    n: int
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"population size must be >= 0, got {self.n}")
        if self.a < 0 or self.b < 0:
            raise ValueError(f"negative class count: a={self.a}, b={self.b}")
        if self.a + self.b > self.n:
            raise ValueError(
                f"a + b = {self.a + self.b} exceeds population size {self.n}"
            )

    @property
    def q(self) -> int:
        return self.n - self.a - self.b

    @property
    def s(self) -> int:
        return self.a - self.b

    def swapped(self) -> "Configuration":
        """The configuration with the two opinions exchanged."""
        return Configuration(self.n, self.b, self.a)

    @classmethod
    def consensus_alpha(cls, n: int) -> "Configuration":
        return cls(n, n, 0)

    @classmethod
    def consensus_beta(cls, n: int) -> "Configuration":
        return cls(n, 0, n)

    @classmethod
    def all_undecided(cls, n: int) -> "Configuration":
        return cls(n, 0, 0)


@dataclass(frozen=True)
class UniformNoise:
    """Symmetric message noise: an observed message comes through intact with
    probability ``1 - 2p`` and is replaced by each of the two other states
    with probability ``p``.

    ``p = 0`` is the noiseless dynamics; ``p`` may not exceed 1/2.
    """

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"noise probability must be in [0, 1/2], got {self.p}")

    def as_oblivious(self) -> "ObliviousNoise":
        """Equivalent oblivious channel: corrupt with probability ``3p`` and
        redraw uniformly over the three states.  Requires ``p < 1/3``.
        """
        if self.p >= 1 / 3:
            raise ValueError(
                f"uniform noise p={self.p} has no oblivious form (needs p < 1/3)"
            )
        third = 1.0 / 3.0
        return ObliviousNoise(3.0 * self.p, (third, third, third))


@dataclass(frozen=True)
class ObliviousNoise:
    """Message-oblivious noise: with probability ``p_noise`` the sent message is
    replaced by a draw from ``dist`` (over alpha, beta, undecided), independent
    of its value.
    """

    p_noise: float
    dist: tuple[float, float, float]

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_noise < 1.0:
            raise ValueError(f"p_noise must be in [0, 1), got {self.p_noise}")
        if len(self.dist) != 3:
            raise ValueError("dist must have exactly 3 components")
        if any(c < 0 for c in self.dist):
            raise ValueError(f"dist components must be >= 0, got {self.dist}")
        if abs(sum(self.dist) - 1.0) > _DIST_TOL:
            raise ValueError(f"dist must sum to 1 within {_DIST_TOL}, got {self.dist}")


NoiseSpec = UniformNoise | ObliviousNoise


@dataclass(frozen=True)
class ObservationDistribution:
    """Law of the message an agent ends up seeing in one pull: the composition
    of the uniform pull (self included) with the noise channel.
    """

    p_see_alpha: float
    p_see_beta: float
    p_see_undecided: float

    def __post_init__(self) -> None:
        probs = (self.p_see_alpha, self.p_see_beta, self.p_see_undecided)
        if any(c < -_DIST_TOL or c > 1 + _DIST_TOL for c in probs):
            raise ValueError(f"components must lie in [0, 1], got {probs}")
        if abs(sum(probs) - 1.0) > _DIST_TOL:
            raise ValueError(f"components must sum to 1 within {_DIST_TOL}, got {probs}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_see_alpha, self.p_see_beta, self.p_see_undecided)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)


def observation_distribution(
    config: Configuration, noise: NoiseSpec
) -> ObservationDistribution:
    """Probability of seeing each state in one noisy pull from ``config``.

    For uniform noise ``p`` the chance of seeing state ``j`` with class count
    ``c_j`` is ``(1 - 3p) * c_j / n + p``; for an oblivious channel it is
    ``(1 - p_noise) * c_j / n + p_noise * dist_j``.
    """
    n = config.n
    if n == 0:
        raise ValueError("observation distribution undefined for an empty population")
    counts = (config.a, config.b, config.q)
    if isinstance(noise, UniformNoise):
        keep = 1.0 - 3.0 * noise.p
        probs = tuple(keep * c / n + noise.p for c in counts)
    else:
        keep = 1.0 - noise.p_noise
        probs = tuple(
            keep * c / n + noise.p_noise * pj for c, pj in zip(counts, noise.dist)
        )
    return ObservationDistribution(*probs)


def _sample_given_observation(
    a: int, b: int, q: int, obs: ObservationDistribution, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample ``size`` one-round transitions of a census with observation law
    ``obs``; returns an ``(size, 2)`` int64 array of next ``(a, b)`` counts.

    Every agent's observation is independent, so the round factorises by class:
    alpha agents turn undecided when they see beta (binomial), beta agents when
    they see alpha (binomial), and the undecided split three ways (multinomial).
    """
    d_a = rng.binomial(a, obs.p_see_beta, size=size) if a > 0 else np.zeros(size, dtype=np.int64)
    d_b = rng.binomial(b, obs.p_see_alpha, size=size) if b > 0 else np.zeros(size, dtype=np.int64)
    if q > 0:
        pulls = rng.multinomial(q, obs.as_array(), size=size)
        u_a = pulls[:, 0]
        u_b = pulls[:, 1]
    else:
        u_a = np.zeros(size, dtype=np.int64)
        u_b = np.zeros(size, dtype=np.int64)
    out = np.empty((size, 2), dtype=np.int64)
    out[:, 0] = a - d_a + u_a
    out[:, 1] = b - d_b + u_b
    return out


def sample_transitions_aggregated(
    config: Configuration, noise: NoiseSpec, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorised :func:`step_aggregated`: ``size`` independent one-round
    outcomes as an ``(size, 2)`` array of ``(a', b')``.
    """
    obs = observation_distribution(config, noise)
    return _sample_given_observation(config.a, config.b, config.q, obs, size, rng)


def step_aggregated(
    config: Configuration, noise: NoiseSpec, rng: np.random.Generator
) -> Configuration:
    """One exact round by class aggregation.

    Per round this consumes one binomial draw for each opinion class and one
    multinomial draw for the undecided class, in that order, regardless of
    ``n``.  The sampled law is identical to per-agent simulation because the
    agents' pulls and noise are mutually independent.
    """
    a2, b2 = sample_transitions_aggregated(config, noise, 1, rng)[0]
    return Configuration(config.n, int(a2), int(b2))


def _observed_to_seen_oblivious(
    observed: np.ndarray, noise: ObliviousNoise, u: np.ndarray
) -> np.ndarray:
    """Oblivious channel on one uniform variate per observation: values above
    ``1 - p_noise`` are rescaled and pushed through the inverse CDF of ``dist``.
    """
    keep = 1.0 - noise.p_noise
    seen = observed.copy()
    corrupt = u >= keep
    if noise.p_noise > 0 and np.any(corrupt):
        v = (u[corrupt] - keep) / noise.p_noise
        c0, c1, _ = noise.dist
        seen[corrupt] = np.where(v < c0, 0, np.where(v < c0 + c1, 1, 2)).astype(np.int8)
    return seen


def sample_transitions_naive(
    config: Configuration, noise: NoiseSpec, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorised :func:`step_naive`: ``size`` independent one-round outcomes
    simulated agent by agent, as an ``(size, 2)`` array of ``(a', b')``.

    Agents are processed in census order (alphas, betas, undecided); each agent
    consumes one uniform pull index and one noise variate.  Intended as an
    oracle; cost grows linearly with ``n``.
    """
    n, a, b = config.n, config.a, config.b
    if n == 0:
        raise ValueError("cannot simulate an empty population")
    count_a = np.zeros(size, dtype=np.int64)
    count_b = np.zeros(size, dtype=np.int64)
    self_states = [Opinion.ALPHA] * a + [Opinion.BETA] * b + [Opinion.UNDECIDED] * config.q
    for self_state in self_states:
        targets = rng.integers(0, n, size=size)
        u = rng.random(size)
        observed = (targets >= a).astype(np.int8)
        observed += targets >= a + b
        if isinstance(noise, UniformNoise):
            # one variate per observation: below 1-2p the message survives, the
            # two probability-p slabs shift it to the other states in cyclic order
            shift = (u >= 1.0 - 2.0 * noise.p).astype(np.int8)
            shift += u >= 1.0 - noise.p
            seen = (observed + shift) % 3
        else:
            seen = _observed_to_seen_oblivious(observed, noise, u)
        nxt = _UPDATE[int(self_state), seen]
        count_a += nxt == Opinion.ALPHA
        count_b += nxt == Opinion.BETA
    out = np.empty((size, 2), dtype=np.int64)
    out[:, 0] = count_a
    out[:, 1] = count_b
    return out


def step_naive(
    config: Configuration, noise: NoiseSpec, rng: np.random.Generator
) -> Configuration:
    """One round simulated agent by agent (pull uniform over all ``n`` agents,
    self included; noise applied independently per observation; update rule).

    Distributionally identical to :func:`step_aggregated`; kept as an oracle
    for populations up to about 10^4 agents.
    """
    a2, b2 = sample_transitions_naive(config, noise, 1, rng)[0]
    return Configuration(config.n, int(a2), int(b2))


def _binomial_pmf_exact(m: int, p: Fraction) -> list[Fraction]:
    """Binomial(m, p) mass function as exact rationals (index = successes)."""
    q = 1 - p
    return [Fraction(math.comb(m, k)) * p**k * q ** (m - k) for k in range(m + 1)]


def exact_transition_given_observation(
    config: Configuration, obs: ObservationDistribution
) -> dict[Configuration, float]:
    """Exact one-round law of a census whose agents observe messages drawn from
    ``obs``; see :func:`exact_transition_distribution`.
    """
    n, a, b, q = config.n, config.a, config.b, config.q
    if n > MAX_EXACT_N:
        raise ValueError(
            f"exact enumeration limited to n <= {MAX_EXACT_N}, got n = {n}"
        )
    if n == 0:
        raise ValueError("exact law undefined for an empty population")
    # Exact rational arithmetic: float observation probabilities are dyadic
    # rationals, so every term below is computed without rounding and the swap
    # symmetry alpha <-> beta holds bit-for-bit in the returned floats.
    pa = Fraction(obs.p_see_alpha)
    pb = Fraction(obs.p_see_beta)
    pu = Fraction(obs.p_see_undecided)
    down_a = _binomial_pmf_exact(a, pb)  # alpha agents that saw beta
    down_b = _binomial_pmf_exact(b, pa)  # beta agents that saw alpha
    multi: list[tuple[int, int, Fraction]] = []
    for u_a in range(q + 1):
        for u_b in range(q - u_a + 1):
            u_q = q - u_a - u_b
            coeff = Fraction(
                math.factorial(q)
                // (math.factorial(u_a) * math.factorial(u_b) * math.factorial(u_q))
            )
            w = coeff * pa**u_a * pb**u_b * pu**u_q
            if w != 0:
                multi.append((u_a, u_b, w))
    law: dict[tuple[int, int], Fraction] = {}
    for d_a, w_a in enumerate(down_a):
        if w_a == 0:
            continue
        for d_b, w_b in enumerate(down_b):
            w_ab = w_a * w_b
            if w_ab == 0:
                continue
            for u_a, u_b, w_u in multi:
                key = (a - d_a + u_a, b - d_b + u_b)
                law[key] = law.get(key, Fraction(0)) + w_ab * w_u
    return {
        Configuration(n, a2, b2): float(w) for (a2, b2), w in law.items() if w != 0
    }


def exact_transition_distribution(
    config: Configuration, noise: NoiseSpec
) -> dict[Configuration, float]:
    """Exact one-round transition law as a map from next configuration to
    probability, computed by convolving the two class binomials with the
    undecided multinomial.

    Guarded to ``n <= MAX_EXACT_N``; the returned probabilities sum to 1
    within 1e-9 (in practice much closer: the convolution is carried out in
    exact rational arithmetic and only the final values are rounded).
    """
    obs = observation_distribution(config, noise)
    return exact_transition_given_observation(config, obs)
