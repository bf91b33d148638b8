"""``delaybandit-bench``: run delayed-bandit experiments from the command line."""
from __future__ import annotations

import argparse
import sys

from .bench import TUNERS, ExperimentConfig, run, write_outputs


def _seeds(text: str):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) == 1:
        # a lone integer is a count: seeds 0..count-1
        count = int(parts[0])
        if count < 1:
            raise argparse.ArgumentTypeError("seed count must be positive")
        return list(range(count))
    return [int(p) for p in parts]


def _means(text: str):
    return [float(p) for p in text.split(",")]


def build_parser():
    p = argparse.ArgumentParser(
        prog="delaybandit-bench",
        description="Run FTRL with delayed bandit feedback over a grid of seeds.",
    )
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--tuner", choices=TUNERS + ("tsallis-baseline",))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--delay-gen", dest="delay_gen", help="zero | uniform:<d> | unbalanced | file:<path>")
    p.add_argument("--means", type=_means, help="comma-separated Bernoulli loss means, one per arm")
    p.add_argument("--seeds", type=_seeds, help="a count (seeds 0..count-1) or a comma-separated list")
    p.add_argument("--generator", help="numpy bit generator name (default PCG64)")
    p.add_argument("--out", help="output directory for per-seed CSVs and summary.json")
    p.add_argument("--check-bounds", dest="check_bounds", action="store_true", default=None,
                   help="exit with status 1 if the mean regret exceeds the applicable bound")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {key: v for key, v in vars(args).items() if key != "config" and v is not None}
    try:
        if args.config:
            config = ExperimentConfig.from_file(args.config, **overrides)
        else:
            config = ExperimentConfig(**overrides)
        result = run(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if config.out:
        write_outputs(result, config.out)

    s, b = result.summary, result.bounds
    print(f"tuner={config.tuner} n={config.n} k={config.k} delays={config.delay_gen} D={s['total_delay']}")
    print(f"mean regret {s['mean_regret']:.2f} +- {s['std_regret']:.2f} over {len(config.seeds)} seeds")
    print(f"simple bound {b.simple_bound:.2f}  skipping bound {b.skipping_bound:.2f} (|S|={b.skip_size})")
    if config.check_bounds:
        status = "PASS" if b.passed else "FAIL"
        print(f"{status}: {b.applicable} bound, margin {b.margin:.2f}")
        return 0 if b.passed else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
