"""
Replaying a hand-written instance
=================================

Instances are plain JSON documents, so an adversarial loss sequence built
elsewhere can be saved once and replayed against every tuner.
"""

import tempfile
from pathlib import Path

import numpy as np

from delaybandit import ExperimentConfig, Instance, run, save_instance

# arm 0 is good for the first two thirds, arm 1 afterwards; every tenth round
# reports with delay 30
n, k = 600, 2
losses = np.zeros((n, k))
switch = 2 * n // 3
losses[:switch, 1] = 1.0
losses[switch:, 0] = 1.0
t = np.arange(1, n + 1)
delays = np.where(t % 10 == 0, np.minimum(30, n - t), 0)

path = Path(tempfile.mkdtemp()) / "switch.json"
save_instance(Instance(losses, delays), path)

###############################################################################
# Only the learner's randomness changes from seed to seed
for tuner in ("tsallis", "simple", "advanced"):
    cfg = ExperimentConfig(n=n, k=k, tuner=tuner, delay_gen=f"file:{path}", seeds=[0, 1, 2])
    s = run(cfg).summary
    print(f"{tuner:9s} regret per seed", [round(p["regret"], 1) for p in s["per_seed"]])
