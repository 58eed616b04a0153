"""Three mutually checking views of one round of the noisy dynamics.

A census (a, b, q) on the complete graph evolves by every agent pulling a
uniformly random agent (possibly itself), the observed message passing
through a noise channel, and the three-state update rule being applied.
This script walks through the update rule, the observation law, and the
three transition engines: exact enumeration, class-aggregated sampling and
per-agent simulation.
"""

import numpy as np

from usdsim import (
    Configuration,
    Opinion,
    UniformNoise,
    exact_transition_distribution,
    observation_distribution,
    sample_transitions_aggregated,
    sample_transitions_naive,
    update_rule,
)

rng = np.random.default_rng(1)

print("The update rule (own state x observed state):")
for own in Opinion:
    row = [update_rule(own, seen).name.lower() for seen in Opinion]
    print(f"  {own.name.lower():>9} observes alpha/beta/undecided -> {row[0]}/{row[1]}/{row[2]}")

config = Configuration(n=100, a=50, b=30)
noise = UniformNoise(p=0.1)
print(f"\nCensus: n={config.n}, a={config.a}, b={config.b}, q={config.q}, bias s={config.s}")
print(f"Noise: each observed message survives w.p. {1 - 2 * noise.p:.2f}, "
      f"flips to each other state w.p. {noise.p:.2f}")

obs = observation_distribution(config, noise)
print(f"\nWhat one pull ends up showing: alpha {obs.p_see_alpha:.4f}, "
      f"beta {obs.p_see_beta:.4f}, undecided {obs.p_see_undecided:.4f}")

# exact one-round law for a tiny census, then both samplers against it
tiny = Configuration(n=4, a=2, b=1)
law = exact_transition_distribution(tiny, noise)
print(f"\nExact one-round law from (a=2, b=1, q=1) at n=4, p=0.1 "
      f"({len(law)} reachable censuses):")
for nxt, prob in sorted(law.items(), key=lambda kv: -kv[1])[:5]:
    print(f"  -> a={nxt.a} b={nxt.b} q={nxt.q}: {prob:.4f}")
print("  ... (probabilities sum to 1)")

m = 200_000
agg = sample_transitions_aggregated(tiny, noise, m, rng)
nai = sample_transitions_naive(tiny, noise, m, rng)
print(f"\nEmpirical frequencies over {m} draws (aggregated vs per-agent vs exact):")
for nxt, prob in sorted(law.items(), key=lambda kv: -kv[1])[:5]:
    f_agg = np.mean((agg[:, 0] == nxt.a) & (agg[:, 1] == nxt.b))
    f_nai = np.mean((nai[:, 0] == nxt.a) & (nai[:, 1] == nxt.b))
    print(f"  a={nxt.a} b={nxt.b}: {f_agg:.4f} vs {f_nai:.4f} vs {prob:.4f}")

print("\nThe aggregated engine draws two binomials and one multinomial per round")
print("(exact samplers, no normal approximation), so its cost is independent of n.")
