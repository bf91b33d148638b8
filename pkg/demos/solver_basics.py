"""
Playing distributions from the hybrid potential
===============================================

Each round the learner plays the minimiser of <x, L> + F(x) over the
simplex, where F mixes a square-root (Tsallis) term weighted by sqrt(t)
with a negentropy term weighted by the inverse learning rate.
"""

import numpy as np

from delaybandit import PotentialParams, objective_value, solve_distribution

# Observed cumulative losses for four arms
L = np.array([10.0, 12.0, 15.0, 30.0])

###############################################################################
# With no delays the negentropy weight is zero: pure Tsallis behaviour.
p = PotentialParams.at_round(100, 0.0)
x, cert = solve_distribution(L, p)
print("tsallis only :", np.round(x.probs, 4), " multiplier", round(cert.multiplier, 4))

###############################################################################
# Delays raise the inverse learning rate, which flattens the distribution.
for inv_eta in (1.0, 10.0, 100.0):
    x, cert = solve_distribution(L, PotentialParams.at_round(100, inv_eta))
    print(f"inv_eta={inv_eta:6.1f}:", np.round(x.probs, 4), f" residual {cert.max_residual:.1e}")

###############################################################################
# Adding a constant to every loss leaves the distribution unchanged.
a, _ = solve_distribution(L, p)
b, _ = solve_distribution(L + 1e4, p)
print("shift gap    :", np.max(np.abs(a.probs - b.probs)))

###############################################################################
# The uniform distribution scores worse than the solver's answer.
uniform = np.full(4, 0.25)
print("objective    :", objective_value(a, L, p), "vs uniform", objective_value(uniform, L, p))
