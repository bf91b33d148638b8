"""
Skipping a few huge delays
==========================

A short prefix of rounds waits until the very end of the game while all
other feedback arrives immediately.  The simple tuning pays for every
waiting round; the skipping tuner sets the long waits aside and keeps a
much smaller inverse learning rate.
"""

import numpy as np

from delaybandit import ExperimentConfig, check_bounds, run
from delaybandit.bench import build_instance

n, k = 4000, 4
common = dict(n=n, k=k, delay_gen="unbalanced", seeds=list(range(5)))

###############################################################################
# Same losses, same delays, two tuners
results = {tuner: run(ExperimentConfig(tuner=tuner, **common)) for tuner in ("simple", "advanced")}
for tuner, res in results.items():
    s = res.summary
    print(f"{tuner:9s} mean regret {s['mean_regret']:7.1f} +- {s['std_regret']:5.1f}"
          f"   final inv_eta {res.reports[0].inv_eta[-1]:8.2f}")

###############################################################################
# The skip set and the bound it certifies
inst = build_instance(ExperimentConfig(**common), 0)
adv = results["advanced"]
bc = check_bounds(adv.summary, inst)
print("total delay", inst.total_delay, " skipped rounds", bc.skip_size)
print(f"simple bound {bc.simple_bound:.1f}   skipping bound {bc.skipping_bound:.1f}")

###############################################################################
# Deactivations happen one at a time
trace = adv.reports[0].deactivated
per_round = np.array([len(d) for d in trace])
print("rounds with a deactivation:", int((per_round > 0).sum()), " max per round:", per_round.max())
