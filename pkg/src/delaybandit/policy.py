"""FTRL policy for bandits with delayed feedback."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ledger import DelayLedger, make_tuner
from .solver import PotentialParams, SimplexDistribution, solve_distribution

__all__ = ["ActionSample", "LossEstimate", "FTRLPolicy", "make_estimate", "sample_arm"]


@dataclass(frozen=True)
class ActionSample:
    round: int
    distribution: SimplexDistribution
    arm: int
    prob_of_arm: float
    inv_eta: float = 0.0


@dataclass(frozen=True)
class LossEstimate:
    """Importance-weighted estimate: ``value`` on coordinate ``arm``, zero elsewhere."""

    origin_round: int
    arm: int
    value: float

    def as_vector(self, k: int) -> np.ndarray:
        v = np.zeros(k)
        v[self.arm] = self.value
        return v


def make_estimate(sample: ActionSample, observed_loss: float) -> LossEstimate:
    if not 0.0 <= observed_loss <= 1.0:
        raise ValueError(f"losses must lie in [0, 1], got {observed_loss!r}")
    if not sample.prob_of_arm > 0:
        raise ValueError("sampling probability must be positive")
    return LossEstimate(sample.round, sample.arm, observed_loss / sample.prob_of_arm)


def sample_arm(probs, u: float) -> int:
    """Inverse-CDF draw in arm order from one uniform ``u`` in [0, 1)."""
    acc = 0.0
    last = len(probs) - 1
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    # rounding can leave the total a hair under 1; fall back to the last positive arm
    for i in range(last, -1, -1):
        if probs[i] > 0:
            return i
    return last


class FTRLPolicy:
    """Follow the regularized leader with the hybrid potential.

    Each round: call :meth:`act`, play the arm, then pass whatever
    observations the environment delivered at the end of that round to
    :meth:`ingest`.  Observations arriving at the end of round ``t`` first
    influence the distribution of round ``t + 1``.

    Parameters
    ----------
    k : int
        Number of arms.
    tuner : str or tuner object
        ``"simple"``, ``"advanced"`` or ``"tsallis"`` (negentropy switched off).
    rng : numpy.random.Generator, int or None
        Source of the one uniform variate drawn per round.
    """

    def __init__(self, k: int, tuner="simple", rng=None):
        if k < 2:
            raise ValueError("k >= 2 required")
        self.k = k
        self.tuner = make_tuner(tuner, k) if isinstance(tuner, str) else tuner
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.ledger = DelayLedger()
        self.cum_obs_loss = np.zeros(k)
        self.round = 0
        self.pending_probs = {}  # origin round -> ActionSample, released on arrival
        self._multiplier = None

    def act(self) -> ActionSample:
        t = self.round + 1
        inv_eta = self.tuner.begin_round(self.ledger, t)
        dist, cert = solve_distribution(
            self.cum_obs_loss, PotentialParams.at_round(t, inv_eta), c_hint=self._multiplier
        )
        self._multiplier = cert.multiplier
        probs = dist.probs.tolist()
        arm = sample_arm(probs, self.rng.random())
        sample = ActionSample(t, dist, arm, probs[arm], inv_eta)
        self.ledger.register(t)
        self.round = t
        self.pending_probs[t] = sample
        return sample

    def ingest(self, observations):
        """Fold in observations delivered at the end of the current round.

        ``observations`` is an iterable of ``(origin_round, loss)`` pairs or of
        objects with ``origin_round`` and ``loss`` attributes.
        """
        items = []
        for ob in observations:
            s, loss = (ob.origin_round, ob.loss) if hasattr(ob, "origin_round") else ob
            if s not in self.pending_probs or any(e.origin_round == s for e in items):
                raise ValueError(f"no pending action for round {s} (unregistered or already arrived)")
            items.append(make_estimate(self.pending_probs[s], loss))
        estimates = []
        for est in items:
            self.ledger.record_arrival(est.origin_round, self.round)
            del self.pending_probs[est.origin_round]
            self.cum_obs_loss[est.arm] += est.value
            estimates.append(est)
        return estimates
