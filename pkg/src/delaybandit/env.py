"""Oblivious delayed-feedback environment, instance generators and regret accounting."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

__all__ = [
    "INSTANCE_SCHEMA",
    "Instance",
    "Observation",
    "DelayedEnvironment",
    "RegretReport",
    "gen_uniform",
    "gen_unbalanced",
    "gen_stochastic_losses",
    "unbalanced_prefix",
    "compute_regret",
    "load_instance",
    "save_instance",
]

INSTANCE_SCHEMA = "delaybandit.instance/1"


class Observation(NamedTuple):
    origin_round: int
    arm: int
    loss: float
    arrival_round: int


@dataclass(frozen=True)
class Instance:
    """Loss matrix (n x k, entries in [0, 1]) and delay vector, fixed before play.

    Row ``t - 1`` holds the losses of round ``t``.  Every observation must
    arrive by the end of the game: ``t + d_t <= n``.
    """

    losses: np.ndarray
    delays: np.ndarray

    def __post_init__(self):
        losses = np.array(self.losses, dtype=float)
        delays = np.array(self.delays)
        if losses.ndim != 2 or losses.shape[0] < 1 or losses.shape[1] < 2:
            raise ValueError("losses must be an n x k matrix with n >= 1, k >= 2")
        if not np.all(np.isfinite(losses)) or losses.min() < 0 or losses.max() > 1:
            raise ValueError("losses must lie in [0, 1]")
        n = losses.shape[0]
        if delays.shape != (n,):
            raise ValueError(f"need {n} delays, got shape {delays.shape}")
        if delays.size and not np.all(delays == np.round(delays)):
            raise ValueError("delays must be integers")
        delays = delays.astype(np.int64)
        if np.any(delays < 0):
            raise ValueError("delays must be nonnegative")
        t = np.arange(1, n + 1)
        if np.any(t + delays > n):
            bad = int(np.argmax(t + delays > n)) + 1
            raise ValueError(f"round {bad} would arrive after the horizon (t + d_t > n)")
        losses.setflags(write=False)
        delays.setflags(write=False)
        object.__setattr__(self, "losses", losses)
        object.__setattr__(self, "delays", delays)

    @property
    def n(self) -> int:
        return self.losses.shape[0]

    @property
    def k(self) -> int:
        return self.losses.shape[1]

    @property
    def total_delay(self) -> int:
        return int(self.delays.sum())

    def to_dict(self) -> dict:
        return {
            "schema": INSTANCE_SCHEMA,
            "n": self.n,
            "k": self.k,
            "delays": self.delays.tolist(),
            "losses": self.losses.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        if d.get("schema") != INSTANCE_SCHEMA:
            raise ValueError(f"unsupported instance schema {d.get('schema')!r}; expected {INSTANCE_SCHEMA!r}")
        inst = cls(np.asarray(d["losses"], dtype=float), np.asarray(d["delays"]))
        if inst.n != d["n"] or inst.k != d["k"]:
            raise ValueError("n / k fields disagree with the arrays")
        return inst


def save_instance(instance: Instance, path):
    Path(path).write_text(json.dumps(instance.to_dict()))


def load_instance(path) -> Instance:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read instance file {path}: {exc}") from exc
    return Instance.from_dict(d)


class DelayedEnvironment:
    """Plays out an :class:`Instance` one round at a time.

    ``step(arm)`` charges the loss of ``arm`` in the current round, schedules
    its observation for round ``t + d_t`` and returns everything due at the
    end of this round.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.round = 0
        self.arms = []
        self._queue = {}
        self._losses = instance.losses.tolist()
        self._delays = instance.delays.tolist()

    def step(self, arm: int):
        inst = self.instance
        if self.round >= inst.n:
            raise RuntimeError(f"the game is over after {inst.n} rounds")
        if not 0 <= arm < inst.k:
            raise ValueError(f"arm {arm} out of range for k={inst.k}")
        t = self.round + 1
        self.round = t
        self.arms.append(arm)
        loss = self._losses[t - 1][arm]
        due = t + self._delays[t - 1]
        self._queue.setdefault(due, []).append(Observation(t, arm, loss, due))
        return self._queue.pop(t, [])

    @property
    def pending(self) -> int:
        return sum(len(v) for v in self._queue.values())


def _loss_matrix(loss_source, n, k):
    if loss_source is None:
        return np.zeros((n, k))
    if callable(loss_source):
        loss_source = loss_source(n, k)
    m = np.asarray(loss_source, dtype=float)
    if m.shape != (n, k):
        raise ValueError(f"loss source has shape {m.shape}, expected {(n, k)}")
    return m


def gen_uniform(n: int, k: int, d: int, loss_source=None) -> Instance:
    """Delay ``d`` in every round, clipped to ``n - t`` so all feedback arrives by round ``n``.

    ``loss_source`` is an ``(n, k)`` array, a callable ``(n, k) -> array``, or
    ``None`` for all-zero losses.
    """
    if d < 0:
        raise ValueError("delay must be nonnegative")
    t = np.arange(1, n + 1)
    return Instance(_loss_matrix(loss_source, n, k), np.minimum(d, n - t))


def unbalanced_prefix(n: int, k: int) -> int:
    """floor(sqrt(k n / log k)): the number of long-delay rounds in :func:`gen_unbalanced`."""
    return math.floor(math.sqrt(k * n / math.log(k)))


def gen_unbalanced(n: int, k: int, loss_source=None) -> Instance:
    """The first ``m = floor(sqrt(k n / log k))`` rounds wait until the end (d_t = n - t); the rest have no delay."""
    if k < 2:
        raise ValueError("k >= 2 required")
    m = min(unbalanced_prefix(n, k), n)
    t = np.arange(1, n + 1)
    delays = np.where(t <= m, n - t, 0)
    return Instance(_loss_matrix(loss_source, n, k), delays)


def gen_stochastic_losses(n: int, k: int, means, rng) -> np.ndarray:
    """Independent Bernoulli(means[i]) losses, drawn once for the whole game."""
    means = np.asarray(means, dtype=float)
    if means.shape != (k,):
        raise ValueError(f"need {k} means, got {means.shape}")
    if np.any(means < 0) or np.any(means > 1):
        raise ValueError("means must lie in [0, 1]")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return (rng.random((n, k)) < means).astype(float)


@dataclass
class RegretReport:
    """Per-round trace and summary of one run.

    ``cum_regret[t-1]`` is the learner's cumulative loss through round ``t``
    minus that of the best arm over the same prefix, so the final entry is
    the pseudo-regret against the best fixed arm of the whole game.
    """

    arms: np.ndarray
    losses: np.ndarray
    cum_loss: np.ndarray
    cum_regret: np.ndarray
    best_arm: int
    regret: float
    total_delay: int
    inv_eta: np.ndarray | None = None
    outstanding: np.ndarray | None = None
    deactivated: list = field(default_factory=list)  # per round: list of deactivated origin rounds
    cum_outstanding: int | None = None
    skipped: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.arms)


def compute_regret(instance: Instance, arms, diagnostics: dict | None = None) -> RegretReport:
    """Pseudo-regret of an action trace on the realised loss matrix (lowest index wins ties)."""
    arms = np.asarray(arms, dtype=np.int64)
    if arms.shape != (instance.n,):
        raise ValueError(f"trace has {arms.size} actions, instance has {instance.n} rounds")
    if np.any(arms < 0) or np.any(arms >= instance.k):
        raise ValueError("arm index out of range")
    L = instance.losses
    inst_loss = L[np.arange(instance.n), arms]
    cum_loss = np.cumsum(inst_loss)
    cum_arm = np.cumsum(L, axis=0)
    cum_regret = cum_loss - cum_arm.min(axis=1)
    totals = cum_arm[-1]
    best = int(np.argmin(totals))
    report = RegretReport(
        arms=arms,
        losses=inst_loss,
        cum_loss=cum_loss,
        cum_regret=cum_regret,
        best_arm=best,
        regret=float(cum_loss[-1] - totals[best]),
        total_delay=instance.total_delay,
    )
    for key, value in (diagnostics or {}).items():
        setattr(report, key, value)
    return report
