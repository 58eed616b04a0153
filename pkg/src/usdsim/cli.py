"""Command-line front end.

Subcommands: ``run`` (one experiment), ``sweep`` (an (n, p) grid), ``expect``
(closed-form next-round expectations), ``thresholds`` (regime constants),
``equiv`` (noise/stubborn equivalence check), ``analyze`` (statistics over a
persisted trajectory CSV).

Exit codes: 0 success, 2 usage or configuration error, 3 runtime error or a
failed check.  Probabilities are accepted as decimals or exact fractions
("1/12").  The output directory can also be set with the ``USDSIM_OUT_DIR``
environment variable; an explicit ``--out-dir`` wins.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analytics, harness
from .analytics import Regime, classify_regime, thresholds, trajectory_stats
from .core import Configuration, UniformNoise
from .harness import (
    AnalyticsOptions,
    ExperimentSpec,
    InitialCondition,
    load_spec,
    parse_probability,
)
from .stubborn import NonIntegerStubbornCount, equivalence_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_ENV_OUT_DIR = "USDSIM_OUT_DIR"


class _Formatter(argparse.HelpFormatter):
    """Fixed-width help so --help output is stable across terminals."""

    def __init__(self, prog):
        super().__init__(prog, width=96)


def _add_experiment_flags(sub: argparse.ArgumentParser, many: bool) -> None:
    sub.add_argument("--config", metavar="PATH", help="experiment config file (TOML)")
    if many:
        sub.add_argument("--n", metavar="LIST", help="comma-separated population sizes")
        sub.add_argument("--p", metavar="LIST", help="comma-separated noise probabilities")
    else:
        sub.add_argument("--n", type=int, metavar="N", help="population size")
        sub.add_argument("--p", metavar="PROB", help="uniform noise probability")
    sub.add_argument("--rounds", type=int, metavar="R", help="rounds per trial (default 400)")
    sub.add_argument("--trials", type=int, metavar="T", help="trials per experiment (default 100)")
    sub.add_argument("--seed", type=int, metavar="SEED", help="64-bit master seed (default 0)")
    sub.add_argument(
        "--init",
        choices=["balanced", "consensus-alpha", "consensus-beta", "explicit"],
        help="initial configuration (default balanced)",
    )
    sub.add_argument("--a", type=int, metavar="A", help="alpha count for --init explicit")
    sub.add_argument("--b", type=int, metavar="B", help="beta count for --init explicit")
    sub.add_argument("--out-dir", metavar="DIR", help="artifact directory (env USDSIM_OUT_DIR)")
    sub.add_argument("--threads", type=int, default=1, metavar="N", help="worker thread cap")
    sub.add_argument(
        "--entry-frac", type=float, metavar="F", help="override metastable entry threshold (of n)"
    )
    sub.add_argument(
        "--below-coef", type=float, metavar="C", help="bias-collapse coefficient (default 10)"
    )
    sub.add_argument("--log-base", metavar="BASE", help="log base in sqrt(n log n) (default e)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usdsim",
        formatter_class=_Formatter,
        description="Simulate and analyse the noisy undecided-state opinion dynamics.",
    )
    subs = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    run = subs.add_parser(
        "run",
        formatter_class=_Formatter,
        help="run one experiment and persist trajectories + summary",
    )
    _add_experiment_flags(run, many=False)

    sw = subs.add_parser(
        "sweep",
        formatter_class=_Formatter,
        help="run an (n, p) grid and emit a combined table",
    )
    _add_experiment_flags(sw, many=True)

    expect = subs.add_parser(
        "expect",
        formatter_class=_Formatter,
        help="print closed-form expectations of the next round",
    )
    expect.add_argument("--n", type=int, required=True, metavar="N", help="population size")
    expect.add_argument("--a", type=int, required=True, metavar="A", help="alpha count")
    expect.add_argument("--b", type=int, required=True, metavar="B", help="beta count")
    expect.add_argument("--p", required=True, metavar="PROB", help="uniform noise probability")

    thr = subs.add_parser(
        "thresholds",
        formatter_class=_Formatter,
        help="print the analytic constants of a regime",
    )
    thr.add_argument("--p", metavar="PROB", help="noise probability (implies regime)")
    thr.add_argument("--epsilon", metavar="EPS", help="distance from the critical point 1/6")
    thr.add_argument(
        "--regime",
        choices=["subcritical", "supercritical"],
        help="regime for --epsilon",
    )

    eq = subs.add_parser(
        "equiv",
        formatter_class=_Formatter,
        help="check the noise/stubborn-agent equivalence",
    )
    eq.add_argument("--n", type=int, required=True, metavar="N", help="updating agents")
    eq.add_argument("--p", required=True, metavar="PROB", help="uniform noise probability")
    eq.add_argument(
        "--samples", type=int, default=1_000_000, metavar="M", help="one-round samples per model"
    )
    eq.add_argument("--seed", type=int, default=0, metavar="SEED", help="sampling seed")
    eq.add_argument("--grid-step", type=int, metavar="STEP", help="analytic grid step (default n/10)")

    an = subs.add_parser(
        "analyze",
        formatter_class=_Formatter,
        help="recompute entry/switch statistics from a trajectory CSV",
    )
    an.add_argument("--csv", required=True, metavar="PATH", help="trajectory CSV path")
    an.add_argument("--p", metavar="PROB", help="noise probability (sets the entry criterion)")
    an.add_argument("--entry-frac", type=float, metavar="F", help="explicit entry threshold (of n)")
    an.add_argument("--below-coef", type=float, default=10.0, metavar="C", help="collapse coefficient")
    an.add_argument("--log-base", default="e", metavar="BASE", help="log base (default e)")
    return parser


def _resolve_out_dir(flag_value: str | None) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(_ENV_OUT_DIR)
    if env:
        return Path(env)
    return Path("usdsim-out")


def _parse_log_base(value) -> float:
    if value is None:
        return math.e
    if isinstance(value, str) and value.strip().lower() == "e":
        return math.e
    return float(value)


def _spec_from_args(args, n: int | None = None, p: float | None = None) -> ExperimentSpec:
    """Experiment spec from --config plus flag overrides, or flags alone."""
    n = n if n is not None else args.n
    if p is None and args.p is not None:
        p = parse_probability(args.p)
    analytics_overrides = {
        k: v
        for k, v in {
            "entry_frac": args.entry_frac,
            "below_coefficient": args.below_coef,
            "log_base": _parse_log_base(args.log_base) if args.log_base else None,
        }.items()
        if v is not None
    }
    if args.config:
        spec = load_spec(args.config)
        updates = {}
        if n is not None:
            updates["n"] = n
        if p is not None:
            updates["model"] = UniformNoise(p)
        if args.rounds is not None:
            updates["rounds"] = args.rounds
        if args.trials is not None:
            updates["trials"] = args.trials
        if args.seed is not None:
            updates["master_seed"] = args.seed
        if args.init is not None:
            updates["init"] = InitialCondition(kind=args.init, a=args.a, b=args.b)
        if analytics_overrides:
            updates["analytics"] = dataclasses.replace(spec.analytics, **analytics_overrides)
        return dataclasses.replace(spec, **updates)
    if n is None or p is None:
        raise ValueError("need --config, or both --n and --p")
    init = InitialCondition(kind=args.init or "balanced", a=args.a, b=args.b)
    return ExperimentSpec(
        n=n,
        model=UniformNoise(p),
        init=init,
        rounds=args.rounds if args.rounds is not None else 400,
        trials=args.trials if args.trials is not None else 100,
        master_seed=args.seed if args.seed is not None else 0,
        analytics=AnalyticsOptions(**analytics_overrides),
    )


def _cmd_run(args) -> int:
    spec = _spec_from_args(args)
    out_dir = _resolve_out_dir(args.out_dir)
    summary = harness.run_experiment(spec, out_dir=out_dir, threads=args.threads)
    print(json.dumps(summary.to_summary_dict(), indent=2))
    print(f"artifacts written to {out_dir}", file=sys.stderr)
    return EXIT_OK


def _parse_list(text: str, convert) -> list:
    return [convert(item) for item in text.split(",") if item.strip()]


def _cmd_sweep(args) -> int:
    if args.n is None:
        raise ValueError("sweep needs --n with at least one population size")
    n_values = _parse_list(args.n, int)
    p_values = _parse_list(args.p, parse_probability) if args.p else []
    base = _spec_from_args(args, n=n_values[0] if n_values else None, p=p_values[0] if p_values else 0.0)
    out_dir = _resolve_out_dir(args.out_dir)
    cells = harness.sweep(base, n_values, p_values, out_dir=out_dir, threads=args.threads)
    print(harness.format_sweep_table(cells, n_values, p_values), end="")
    failed = [c for c in cells if c.error is not None]
    for cell in failed:
        print(f"cell n={cell.n} p={cell.p:.6g} failed: {cell.error}", file=sys.stderr)
    return EXIT_OK


def _cmd_expect(args) -> int:
    p = parse_probability(args.p)
    config = Configuration(args.n, args.a, args.b)
    expected = analytics.expected_next(config, p)
    for name, value in (
        ("e_a", expected.e_a),
        ("e_b", expected.e_b),
        ("e_s", expected.e_s),
        ("e_q", expected.e_q),
    ):
        print(f"{name} = {value!r}")
    return EXIT_OK


def _cmd_thresholds(args) -> int:
    if args.p is not None:
        p = parse_probability(args.p)
        regime = classify_regime(p)
        if regime is Regime.CRITICAL:
            raise ValueError("p is at the critical point 1/6; no regime constants there")
        epsilon = abs(analytics.CRITICAL_NOISE - p)
    elif args.epsilon is not None:
        if args.regime is None:
            raise ValueError("--epsilon needs --regime")
        epsilon = parse_probability(args.epsilon)
        regime = Regime(args.regime)
    else:
        raise ValueError("need --p or --epsilon/--regime")
    ts = thresholds(epsilon, regime)
    print(f"epsilon = {ts.epsilon!r}")
    print(f"regime = {ts.regime.value}")
    for field in (
        "delta_lo_frac",
        "delta_hi_frac",
        "beta_sub_frac",
        "q_lo_frac",
        "q_floor_frac",
        "b_floor_frac",
        "beta_super_frac",
        "q_cap_super_frac",
        "k",
    ):
        value = getattr(ts, field)
        if value is not None:
            print(f"{field} = {value!r}")
    if ts.qbar is not None:
        print("qbar = " + ", ".join(repr(x) for x in ts.qbar))
    return EXIT_OK


def _cmd_equiv(args) -> int:
    p = parse_probability(args.p)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((args.seed, 0))))
    report = equivalence_report(
        args.n, UniformNoise(p), args.samples, rng, grid_step=args.grid_step
    )
    setup = report.setup
    print(
        f"stubborn setup: n={setup.n} stub_alpha={setup.stub_alpha} "
        f"stub_beta={setup.stub_beta} stub_undecided={setup.stub_undecided}"
    )
    print(f"analytic max observation difference = {report.max_observation_diff!r}")
    print(f"analytic check: {'pass' if report.analytic_passed else 'FAIL'} (tolerance 1e-12)")
    chi = report.chi_square
    print(f"chi-square statistic = {chi.statistic:.6g} (df={chi.df}, p-value={chi.pvalue:.6g})")
    print(f"chi-square check: {'pass' if report.chi_square_passed else 'FAIL'} (alpha={report.alpha})")
    if report.passed:
        print("equivalence: PASS")
        return EXIT_OK
    print("equivalence: FAIL")
    return EXIT_RUNTIME


def _cmd_analyze(args) -> int:
    trajectories = harness.read_trajectories_csv(args.csv)
    if not trajectories:
        raise ValueError(f"no trajectories in {args.csv}")
    log_base = _parse_log_base(args.log_base)
    entry_frac = args.entry_frac
    if entry_frac is None and args.p is not None:
        entry_frac = harness.default_entry_frac(
            trajectories[0].n, parse_probability(args.p), args.below_coef, log_base
        )
    per_trial = [
        trajectory_stats(
            traj,
            entry_frac=entry_frac,
            below_coefficient=args.below_coef,
            log_base=log_base,
        )
        for traj in trajectories
    ]
    meta = [st.entry_round_metastable for st in per_trial]
    below = [st.entry_round_below_threshold for st in per_trial]
    switches = [st.switch_count for st in per_trial]
    meta_ok = [e for e in meta if e is not None]
    below_ok = [e for e in below if e is not None]
    out = {
        "n": trajectories[0].n,
        "trials": len(trajectories),
        "rounds": trajectories[0].rounds,
        "entry_frac": entry_frac,
        "below_coef": args.below_coef,
        "log_base": log_base,
        "mean_entry_metastable": float(np.mean(meta_ok)) if meta_ok else None,
        "failure_rate_metastable": (
            1.0 - len(meta_ok) / len(meta) if entry_frac is not None else None
        ),
        "mean_entry_below": float(np.mean(below_ok)) if below_ok else None,
        "mean_switches": float(np.mean(switches)),
        "per_trial_switches": switches,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


_DISPATCH = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "expect": _cmd_expect,
    "thresholds": _cmd_thresholds,
    "equiv": _cmd_equiv,
    "analyze": _cmd_analyze,
}

_CONFIG_ERRORS = (
    ValueError,  # includes OddBalancedInit, NonIntegerStubbornCount, bad flags
    FileNotFoundError,
    KeyError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except NonIntegerStubbornCount as exc:
        print(f"usdsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _CONFIG_ERRORS as exc:
        print(f"usdsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - depends on environment
        print(f"usdsim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
