"""Experiment runner: instances x seeds x tuner, CSV traces, JSON summary, bound checks."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .env import (
    DelayedEnvironment,
    Instance,
    RegretReport,
    compute_regret,
    gen_stochastic_losses,
    gen_unbalanced,
    gen_uniform,
    load_instance,
)
from .policy import FTRLPolicy

__all__ = [
    "CSV_COLUMNS",
    "SUMMARY_SCHEMA",
    "TUNERS",
    "ExperimentConfig",
    "BoundCheck",
    "ExperimentResult",
    "simple_bound",
    "skipping_bound",
    "check_bounds",
    "build_instance",
    "run_seed",
    "run",
    "write_csv",
    "write_outputs",
]

CSV_COLUMNS = ["round", "arm", "loss", "cum_loss", "cum_regret", "inv_eta", "outstanding", "deactivated_round"]
SUMMARY_SCHEMA = "delaybandit.summary/1"
TUNERS = ("simple", "advanced", "tsallis")
DEFAULT_MEANS_BEST, DEFAULT_MEANS_OTHER = 0.4, 0.6


@dataclass
class ExperimentConfig:
    """One experiment.

    ``delay_gen`` is ``"zero"``, ``"uniform:<d>"``, ``"unbalanced"`` or
    ``"file:<path>"``.  For generated instances the losses are Bernoulli
    draws with ``means`` (default: 0.4 for arm 0, 0.6 for the rest), redrawn
    for every seed from a stream independent of the policy's.
    """

    n: int = 1000
    k: int = 4
    tuner: str = "simple"
    delay_gen: str = "zero"
    means: list | None = None
    seeds: list = field(default_factory=lambda: [0])
    generator: str = "PCG64"
    out: str | None = None
    check_bounds: bool = False

    def __post_init__(self):
        if self.tuner == "tsallis-baseline":
            self.tuner = "tsallis"
        if self.tuner not in TUNERS:
            raise ValueError(f"tuner must be one of {TUNERS}, got {self.tuner!r}")
        if self.k < 2:
            raise ValueError("k >= 2 required")
        if self.n < 1:
            raise ValueError("n >= 1 required")
        if not self.seeds:
            raise ValueError("need at least one seed")
        self.seeds = [int(s) for s in self.seeds]
        if not hasattr(np.random, self.generator) or self.generator in ("Generator", "SeedSequence"):
            raise ValueError(f"unknown bit generator {self.generator!r}")
        if self.means is not None:
            self.means = [float(m) for m in self.means]
            if len(self.means) != self.k:
                raise ValueError(f"need {self.k} means, got {len(self.means)}")
        kind = self.delay_gen.split(":", 1)[0]
        if kind not in ("zero", "uniform", "unbalanced", "file"):
            raise ValueError(f"unknown delay generator {self.delay_gen!r}")
        if kind == "uniform":
            try:
                d = int(self.delay_gen.split(":", 1)[1])
            except (IndexError, ValueError):
                raise ValueError("uniform delays need an integer, e.g. uniform:25") from None
            if d < 0:
                raise ValueError("uniform delay must be nonnegative")

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {path}: {exc}") from exc
        d = {key.replace("-", "_"): v for key, v in d.items()}
        d.update({key: v for key, v in overrides.items() if v is not None})
        return cls(**d)

    def resolved_means(self):
        if self.means is not None:
            return self.means
        return [DEFAULT_MEANS_BEST] + [DEFAULT_MEANS_OTHER] * (self.k - 1)


def _streams(config: ExperimentConfig, seed: int):
    env_seq, policy_seq = np.random.SeedSequence(seed).spawn(2)
    bitgen = getattr(np.random, config.generator)
    return np.random.Generator(bitgen(env_seq)), np.random.Generator(bitgen(policy_seq))


def build_instance(config: ExperimentConfig, seed: int = 0, env_rng=None) -> Instance:
    kind, _, arg = config.delay_gen.partition(":")
    if kind == "file":
        inst = load_instance(arg)
        if (inst.n, inst.k) != (config.n, config.k):
            raise ValueError(f"instance file is {inst.n} x {inst.k}, config says {config.n} x {config.k}")
        return inst
    if env_rng is None:
        env_rng = _streams(config, seed)[0]
    losses = gen_stochastic_losses(config.n, config.k, config.resolved_means(), env_rng)
    if kind == "zero":
        return gen_uniform(config.n, config.k, 0, losses)
    if kind == "uniform":
        return gen_uniform(config.n, config.k, int(arg), losses)
    return gen_unbalanced(config.n, config.k, losses)


def run_seed(config: ExperimentConfig, seed: int) -> RegretReport:
    env_rng, policy_rng = _streams(config, seed)
    instance = build_instance(config, seed, env_rng)
    env = DelayedEnvironment(instance)
    policy = FTRLPolicy(config.k, config.tuner, policy_rng)
    n = instance.n
    inv_eta = np.empty(n)
    outstanding = np.empty(n, dtype=np.int64)
    deactivated = []
    for t in range(n):
        sample = policy.act()
        inv_eta[t] = sample.inv_eta
        outstanding[t] = policy.tuner.last_outstanding
        deactivated.append(list(policy.tuner.last_deactivated))
        policy.ingest(env.step(sample.arm))
    return compute_regret(
        instance,
        env.arms,
        {
            "inv_eta": inv_eta,
            "outstanding": outstanding,
            "deactivated": deactivated,
            "cum_outstanding": policy.tuner.cumulative,
            "skipped": policy.tuner.skipped,
            "meta": {"seed": seed, "generator": config.generator, "tuner": config.tuner},
        },
    )


def simple_bound(k: int, n: int, total_delay: float) -> float:
    """4 sqrt(k n) + sqrt(8 D log k)."""
    return 4.0 * math.sqrt(k * n) + math.sqrt(8.0 * total_delay * math.log(k))


def skipping_bound(k: int, n: int, skip_size: int, unskipped_delay: float) -> float:
    """4 sqrt(k n) + 10 max(|S| + sqrt(D_notS log k), 2 log k) for one candidate skip set S."""
    log_k = math.log(k)
    return 4.0 * math.sqrt(k * n) + 10.0 * max(skip_size + math.sqrt(unskipped_delay * log_k), 2.0 * log_k)


@dataclass
class BoundCheck:
    measured: float
    simple_bound: float
    skipping_bound: float
    skip_size: int
    unskipped_delay: int
    simple_pass: bool
    skipping_pass: bool
    applicable: str

    @property
    def passed(self) -> bool:
        return self.skipping_pass if self.applicable == "skipping" else self.simple_pass

    @property
    def margin(self) -> float:
        bound = self.skipping_bound if self.applicable == "skipping" else self.simple_bound
        return bound - self.measured


def check_bounds(summary, instance: Instance, skipped=(), tuner: str = "simple") -> BoundCheck:
    """Compare a measured (seed-mean) regret with both regret bounds.

    ``summary`` is either the mean regret or a summary mapping with
    ``mean_regret`` (and optionally ``skipped`` / ``tuner``).  The bounds use
    the instance's true delays; the skipping bound is evaluated at the
    algorithm's own skip set, which upper-bounds the minimum over all sets.
    """
    if isinstance(summary, dict):
        measured = float(summary["mean_regret"])
        skipped = summary.get("skipped", skipped)
        tuner = summary.get("tuner", tuner)
    else:
        measured = float(summary)
    S = sorted(set(int(s) for s in skipped))
    unskipped = instance.total_delay - int(sum(instance.delays[s - 1] for s in S))
    b1 = simple_bound(instance.k, instance.n, instance.total_delay)
    b2 = skipping_bound(instance.k, instance.n, len(S), unskipped)
    return BoundCheck(
        measured=measured,
        simple_bound=b1,
        skipping_bound=b2,
        skip_size=len(S),
        unskipped_delay=unskipped,
        simple_pass=measured <= b1,
        skipping_pass=measured <= b2,
        applicable="skipping" if tuner == "advanced" else "simple",
    )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reports: list
    summary: dict
    bounds: BoundCheck


def run(config: ExperimentConfig) -> ExperimentResult:
    reports = [run_seed(config, s) for s in config.seeds]
    regrets = np.array([r.regret for r in reports])
    instance = build_instance(config, config.seeds[0])
    per_seed = [
        {
            "seed": r.meta["seed"],
            "regret": r.regret,
            "best_arm": r.best_arm,
            "total_delay": r.total_delay,
            "cum_outstanding": r.cum_outstanding,
            "final_inv_eta": float(r.inv_eta[-1]),
            "skip_size": len(r.skipped),
        }
        for r in reports
    ]
    # The skip set depends on the delays only, which are shared by all seeds.
    skipped = reports[0].skipped
    summary = {
        "schema": SUMMARY_SCHEMA,
        "config": asdict(config),
        "generator": config.generator,
        "tuner": config.tuner,
        "n": config.n,
        "k": config.k,
        "seeds": list(config.seeds),
        "total_delay": instance.total_delay,
        "mean_regret": float(regrets.mean()),
        "std_regret": float(regrets.std(ddof=1)) if regrets.size > 1 else 0.0,
        "skipped": list(skipped),
        "per_seed": per_seed,
    }
    bounds = check_bounds(summary, instance)
    summary["bounds"] = {**asdict(bounds), "passed": bounds.passed, "margin": bounds.margin}
    return ExperimentResult(config, reports, summary, bounds)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(report: RegretReport, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t in range(report.n):
            deact = report.deactivated[t] if report.deactivated else []
            w.writerow([
                t + 1,
                int(report.arms[t]),
                _fmt(report.losses[t]),
                _fmt(report.cum_loss[t]),
                _fmt(report.cum_regret[t]),
                _fmt(report.inv_eta[t]) if report.inv_eta is not None else "",
                int(report.outstanding[t]) if report.outstanding is not None else "",
                ";".join(str(s) for s in deact),
            ])


def write_outputs(result: ExperimentResult, out_dir):
    """One CSV per seed (in seed order) plus ``summary.json``; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for report in result.reports:
        p = out / f"{result.config.tuner}_seed{report.meta['seed']}.csv"
        write_csv(report, p)
        paths.append(p)
    p = out / "summary.json"
    p.write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    paths.append(p)
    return paths
