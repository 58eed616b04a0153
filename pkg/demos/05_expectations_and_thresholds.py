"""The closed-form expectation engine and the constants behind both regimes.

One round of the dynamics has exact conditional expectations; specialising
them at p = 1/6 -+ eps exposes why 1/6 is critical: the bias drift gains a
factor (1 + eps/3) per round below the threshold (given enough undecided
agents) and loses a factor (1 - eps/2) above it.
"""

import numpy as np

from usdsim import (
    Configuration,
    Regime,
    UniformNoise,
    expected_next,
    expected_next_regime,
    sample_transitions_aggregated,
    thresholds,
)

config = Configuration(n=10_000, a=4_000, b=2_500)
print(f"Census: n={config.n}, a={config.a}, b={config.b}, q={config.q}, s={config.s}")

for p in (0.05, 1 / 6, 0.3):
    e = expected_next(config, p)
    print(f"  p={p:.4f}: E[A']={e.e_a:9.1f}  E[B']={e.e_b:9.1f}  "
          f"E[S']={e.e_s:9.1f}  E[Q']={e.e_q:9.1f}")

print("\nMonte Carlo check at p = 0.05 (100000 aggregated draws):")
rng = np.random.default_rng(5)
samples = sample_transitions_aggregated(config, UniformNoise(0.05), 100_000, rng)
e = expected_next(config, 0.05)
print(f"  empirical means: A'={samples[:, 0].mean():9.1f}  B'={samples[:, 1].mean():9.1f}")
print(f"  closed forms:    A'={e.e_a:9.1f}  B'={e.e_b:9.1f}")

eps = 1 / 12
via_regime = expected_next_regime(config, eps, Regime.SUBCRITICAL)
via_p = expected_next(config, 1 / 6 - eps)
print(f"\nRegime-specialised form at eps = {eps:.4f} equals the general form at "
      f"p = 1/6 - eps:\n  E[S'] {via_regime.e_s!r} vs {via_p.e_s!r}")

print("\nSubcritical constants (eps = 1/12, i.e. p = 1/12):")
sub = thresholds(1 / 12, Regime.SUBCRITICAL)
print(f"  bias band:           [{sub.delta_lo_frac:.6f}, {sub.delta_hi_frac:.6f}] * n")
print(f"  amplification edge:  {sub.beta_sub_frac:.6f} * n")
print(f"  undecided sustainer: {sub.q_lo_frac:.6f} * n")
print(f"  minority floor:      {sub.b_floor_frac:.2e} * n")

print("\nSupercritical constants (eps = 1/30, i.e. p = 1/5):")
sup = thresholds(1 / 30, Regime.SUPERCRITICAL)
print(f"  interval-ladder base: {sup.beta_super_frac:.6f} * n, {sup.k + 2} ladder entries")
print(f"  undecided cap:        {sup.q_cap_super_frac:.6f} * n")
print(f"  undecided ladder:     {[round(x, 4) for x in sup.qbar]} * n")
