"""``relay-ee`` command-line runner.

    relay-ee cdf|surface|threshold|pmf|rates --config FILE [--set key=value ...]
             [--seed N] [--out PATH] [--mc-realizations N] [--workers N]
             [--analytic-only | --mc-only] [--dump-samples PATH]

Exit status: 0 on success, 3 when a numerical routine failed to converge,
2 for unusable configuration.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .montecarlo import simulate
from .params import InvalidParameterError
from .sinr import ConvergenceError
from .studies import run_cdf_study, run_ee_surface, run_pmf_dump, run_rates, run_threshold_study

EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
STUDIES = ("cdf", "surface", "threshold", "pmf", "rates")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relay-ee", description="Relay-network energy-efficiency experiments.")
    ap.add_argument("study", choices=STUDIES)
    ap.add_argument("--config", help="TOML configuration file (defaults used when omitted)")
    ap.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config key; dotted keys address tables, e.g. mc.seed=3")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output CSV path (stdout when omitted)")
    ap.add_argument("--mc-realizations", type=int)
    ap.add_argument("--workers", type=int)
    mode = ap.add_mutually_exclusive_group()
    mode.add_argument("--analytic-only", action="store_true")
    mode.add_argument("--mc-only", action="store_true")
    ap.add_argument("--dump-samples", metavar="PATH", help="write per-realization SINR samples as CSV")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    sets = list(args.sets)
    if args.seed is not None:
        sets.append(f"mc.seed={args.seed}")
    if args.mc_realizations is not None:
        sets.append(f"mc.n_realizations={args.mc_realizations}")
    if args.workers is not None:
        sets.append(f"mc.workers={args.workers}")
    try:
        cfg = load_config(args.config, sets)
    except (InvalidParameterError, ValueError, TypeError, OSError) as exc:
        print(f"relay-ee: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    analytic = not args.mc_only
    mc = not args.analytic_only
    try:
        samples = None
        if mc and (args.study in ("cdf", "rates") or args.dump_samples):
            samples = simulate(cfg.params, cfg.mc)
            if args.dump_samples:
                samples.write_csv(args.dump_samples)
        if args.study == "cdf":
            table = run_cdf_study(cfg, analytic=analytic, mc=mc, samples=samples)
        elif args.study == "surface":
            table = run_ee_surface(cfg)
        elif args.study == "threshold":
            table = run_threshold_study(cfg, analytic=analytic, mc=mc)
        elif args.study == "pmf":
            table = run_pmf_dump(cfg)
        else:
            table = run_rates(cfg, analytic=analytic, mc=mc, samples=samples)
    except ConvergenceError as exc:
        print(f"relay-ee: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE

    text = table.render(cfg)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
