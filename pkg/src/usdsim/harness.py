"""Multi-trial experiment harness: configure, execute, aggregate and persist
seeded simulations of the noisy dynamics (or its stubborn-agent equivalent).

Reproducibility contract: trial ``i`` of an experiment with master seed ``m``
draws from ``PCG64`` seeded with ``SeedSequence((m, i))``.  Within a trial the
aggregated engine consumes exactly three generator calls per round (two
binomials, one multinomial), so trajectories are bit-identical across runs and
worker counts.

Artifacts: per-trial trajectories as CSV (``trial,round,a,b,q,s``, LF line
endings), the aggregate summary as JSON, and sweep grids as an aligned
plain-text table.
"""

from __future__ import annotations

import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analytics import (
    CRITICAL_NOISE,
    Regime,
    classify_regime,
    thresholds,
    trajectory_stats,
)
from .core import Configuration, NoiseSpec, ObliviousNoise, UniformNoise, step_aggregated
from .stubborn import StubbornSetup, step_stubborn

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

__all__ = [
    "OddBalancedInit",
    "InitialCondition",
    "AnalyticsOptions",
    "ExperimentSpec",
    "Trajectory",
    "SummaryStats",
    "SweepCell",
    "trial_rng",
    "run_trial",
    "run_experiment",
    "sweep",
    "default_entry_frac",
    "equivalent_uniform_p",
    "parse_probability",
    "load_spec",
    "spec_from_mapping",
    "write_trajectories_csv",
    "read_trajectories_csv",
    "write_summary_json",
    "format_sweep_table",
]


class OddBalancedInit(ValueError):
    """Balanced initialisation needs an even number of agents."""


_INIT_KINDS = ("balanced", "consensus-alpha", "consensus-beta", "explicit")


@dataclass(frozen=True)
class InitialCondition:
    kind: str
    a: int | None = None
    b: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _INIT_KINDS:
            raise ValueError(f"unknown init kind {self.kind!r}, expected one of {_INIT_KINDS}")
        if self.kind == "explicit" and (self.a is None or self.b is None):
            raise ValueError("explicit init needs both a and b")

    @classmethod
    def balanced(cls) -> "InitialCondition":
        return cls("balanced")

    @classmethod
    def consensus_alpha(cls) -> "InitialCondition":
        return cls("consensus-alpha")

    @classmethod
    def consensus_beta(cls) -> "InitialCondition":
        return cls("consensus-beta")

    @classmethod
    def explicit(cls, a: int, b: int) -> "InitialCondition":
        return cls("explicit", a=a, b=b)

    def resolve(self, n: int) -> Configuration:
        if self.kind == "balanced":
            if n % 2:
                raise OddBalancedInit(f"balanced init needs even n, got {n}")
            return Configuration(n, n // 2, n // 2)
        if self.kind == "consensus-alpha":
            return Configuration.consensus_alpha(n)
        if self.kind == "consensus-beta":
            return Configuration.consensus_beta(n)
        return Configuration(n, int(self.a), int(self.b))


@dataclass(frozen=True)
class AnalyticsOptions:
    """Per-experiment analytics knobs.

    ``entry_frac`` overrides the metastable-entry threshold (default: the
    subcritical band's lower edge for the model's noise level, or disabled in
    the other regimes).  ``window`` restricts switch counting to a round range.
    """

    entry_frac: float | None = None
    below_coefficient: float = 10.0
    log_base: float = math.e
    window: tuple[int, int | None] | None = None


@dataclass(frozen=True)
class ExperimentSpec:
    n: int
    model: NoiseSpec | StubbornSetup
    init: InitialCondition
    rounds: int
    trials: int
    master_seed: int
    analytics: AnalyticsOptions = field(default_factory=AnalyticsOptions)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"population size must be >= 1, got {self.n}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master seed must fit in 64 unsigned bits")
        if isinstance(self.model, StubbornSetup) and self.model.n != self.n:
            raise ValueError(
                f"stubborn setup is for {self.model.n} updating agents, spec has n={self.n}"
            )
        self.init.resolve(self.n)  # fails fast on inconsistent init


@dataclass
class Trajectory:
    """Census record of one trial: arrays indexed by round, record 0 being the
    initial configuration.
    """

    n: int
    a: np.ndarray
    b: np.ndarray

    @property
    def q(self) -> np.ndarray:
        return self.n - self.a - self.b

    @property
    def s(self) -> np.ndarray:
        return self.a - self.b

    @property
    def rounds(self) -> int:
        return len(self.a) - 1

    def census(self, t: int) -> Configuration:
        return Configuration(self.n, int(self.a[t]), int(self.b[t]))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """The documented per-trial stream: PCG64 seeded with
    ``SeedSequence((master_seed, trial_index))``.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, trial_index))))


def run_trial(spec: ExperimentSpec, trial_index: int) -> Trajectory:
    """Simulate one trial for ``spec.rounds`` rounds; deterministic given
    ``(spec.master_seed, trial_index)``.
    """
    rng = trial_rng(spec.master_seed, trial_index)
    config = spec.init.resolve(spec.n)
    a = np.empty(spec.rounds + 1, dtype=np.int64)
    b = np.empty(spec.rounds + 1, dtype=np.int64)
    a[0], b[0] = config.a, config.b
    model = spec.model
    if isinstance(model, StubbornSetup):
        for t in range(1, spec.rounds + 1):
            config = step_stubborn(config, model, rng)
            a[t], b[t] = config.a, config.b
    else:
        for t in range(1, spec.rounds + 1):
            config = step_aggregated(config, model, rng)
            a[t], b[t] = config.a, config.b
    return Trajectory(n=spec.n, a=a, b=b)


def equivalent_uniform_p(model: NoiseSpec | StubbornSetup) -> float:
    """Uniform-noise probability equivalent to the experiment's model.

    Exact for uniform noise and for oblivious/stubborn models with a uniform
    redraw law or an even stubborn split; otherwise it is the corruption
    probability spread evenly and should be read as a nominal level.
    """
    if isinstance(model, UniformNoise):
        return model.p
    if isinstance(model, ObliviousNoise):
        return model.p_noise / 3.0
    p_noise = model.n_stub / (model.n + model.n_stub)
    return p_noise / 3.0


def default_entry_frac(
    n: int, p: float, below_coefficient: float = 10.0, log_base: float = math.e
) -> float | None:
    """Default metastable-entry threshold as a fraction of ``n``, or ``None``
    outside the subcritical regime.

    The subcritical band's lower edge ``delta_lo_frac``, floored at the
    observed symmetry-breaking scale ``below_coefficient * sqrt(n log n) / n``.
    The floor vanishes for large ``n``; for small populations near the
    critical point it is what separates runs that durably reach the band from
    ones whose equilibrium bias never clears the square-root scale (the
    ``Failed`` cells of the reference grid).
    """
    if classify_regime(p) is not Regime.SUBCRITICAL or p <= 0.0:
        return None
    band_lo = thresholds(CRITICAL_NOISE - p, Regime.SUBCRITICAL).delta_lo_frac
    floor = below_coefficient * math.sqrt(n * math.log(n) / math.log(log_base)) / n
    return max(band_lo, floor)


def _resolve_entry_frac(spec: ExperimentSpec) -> float | None:
    """Effective metastable-entry threshold for an experiment:
    ``analytics.entry_frac`` if set, otherwise :func:`default_entry_frac` for
    the model's uniform-equivalent noise level.  The value in force is
    recorded in the summary's ``entry_criterion`` field.
    """
    opts = spec.analytics
    if opts.entry_frac is not None:
        return opts.entry_frac
    return default_entry_frac(
        spec.n, equivalent_uniform_p(spec.model), opts.below_coefficient, opts.log_base
    )


@dataclass
class SummaryStats:
    """Aggregated experiment outputs plus the per-trial records they come from.

    ``failure_rate`` is the fraction of trials that never satisfied the active
    entry criterion (metastable band entry when defined, otherwise the
    below-threshold crossing); means and deviations are over successful trials.
    """

    n: int
    p: float
    trials: int
    rounds: int
    seed: int
    entry_criterion: str
    log_base: float
    entry_metastable: tuple[int | None, ...]
    entry_below: tuple[int | None, ...]
    switches: tuple[int, ...]
    mean_entry_metastable: float | None
    sd_entry: float | None
    failure_rate: float
    mean_entry_below: float | None
    mean_switches: float
    sd_switches: float

    def to_summary_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "trials": self.trials,
            "rounds": self.rounds,
            "mean_entry_metastable": self.mean_entry_metastable,
            "sd_entry": self.sd_entry,
            "failure_rate": self.failure_rate,
            "mean_entry_below": self.mean_entry_below,
            "mean_switches": self.mean_switches,
            "sd_switches": self.sd_switches,
            "seed": self.seed,
            "entry_criterion": self.entry_criterion,
            "log_base": self.log_base,
        }


def _mean_sd(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def summarize(spec: ExperimentSpec, trajectories: list[Trajectory]) -> SummaryStats:
    """Per-trial analytics plus aggregation for a finished batch of trials."""
    opts = spec.analytics
    entry_frac = _resolve_entry_frac(spec)
    stats = [
        trajectory_stats(
            traj,
            entry_frac=entry_frac,
            below_coefficient=opts.below_coefficient,
            log_base=opts.log_base,
            window=opts.window,
        )
        for traj in trajectories
    ]
    entry_meta = tuple(st.entry_round_metastable for st in stats)
    entry_below = tuple(st.entry_round_below_threshold for st in stats)
    switches = tuple(st.switch_count for st in stats)
    mean_meta, sd_meta = _mean_sd([e for e in entry_meta if e is not None])
    mean_below, _ = _mean_sd([e for e in entry_below if e is not None])
    mean_sw, sd_sw = _mean_sd(list(switches))
    if entry_frac is not None:
        criterion = f"metastable:abs_bias>={entry_frac:.12g}*n"
        failures = sum(1 for e in entry_meta if e is None)
    else:
        criterion = f"below:abs_bias<{opts.below_coefficient:.12g}*sqrt(n*log(n))"
        failures = sum(1 for e in entry_below if e is None)
    return SummaryStats(
        n=spec.n,
        p=equivalent_uniform_p(spec.model),
        trials=spec.trials,
        rounds=spec.rounds,
        seed=spec.master_seed,
        entry_criterion=criterion,
        log_base=opts.log_base,
        entry_metastable=entry_meta,
        entry_below=entry_below,
        switches=switches,
        mean_entry_metastable=mean_meta,
        sd_entry=sd_meta,
        failure_rate=failures / spec.trials,
        mean_entry_below=mean_below,
        mean_switches=mean_sw if mean_sw is not None else 0.0,
        sd_switches=sd_sw if sd_sw is not None else 0.0,
    )


def run_experiment(
    spec: ExperimentSpec, out_dir: str | Path | None = None, threads: int = 1
) -> SummaryStats:
    """Run all trials, aggregate, and (optionally) persist artifacts.

    Trials are independent and may run on a thread pool; results are merged by
    trial index so the outputs do not depend on the worker count.  Artifacts
    are written only after every trial has finished, so a failed run persists
    nothing.
    """
    indices = range(spec.trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trajectories = list(pool.map(lambda i: run_trial(spec, i), indices))
    else:
        trajectories = [run_trial(spec, i) for i in indices]
    summary = summarize(spec, trajectories)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_trajectories_csv(out / "trajectories.csv", trajectories)
        write_summary_json(out / "summary.json", summary)
    return summary


@dataclass
class SweepCell:
    n: int
    p: float
    summary: SummaryStats | None
    error: str | None = None


def sweep(
    base_spec: ExperimentSpec,
    n_values: list[int],
    p_values: list[float],
    out_dir: str | Path | None = None,
    threads: int = 1,
) -> list[SweepCell]:
    """One experiment per (n, p) grid cell, mirroring the layout of the
    reference tables; per-cell failures are recorded without aborting the rest
    of the grid.
    """
    cells: list[SweepCell] = []
    for n in n_values:
        for p in p_values:
            cell_dir = None
            if out_dir is not None:
                cell_dir = Path(out_dir) / f"n{n}_p{p:.6g}"
            try:
                spec = replace(base_spec, n=n, model=UniformNoise(p))
                summary = run_experiment(spec, out_dir=cell_dir, threads=threads)
                cells.append(SweepCell(n=n, p=p, summary=summary))
            except Exception as exc:  # keep sweeping, report per cell
                cells.append(SweepCell(n=n, p=p, summary=None, error=str(exc)))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        table = format_sweep_table(cells, n_values, p_values)
        with open(out / "table.txt", "w", encoding="utf-8", newline="") as fh:
            fh.write(table)
    return cells


def _cell_text(cell: SweepCell) -> str:
    if cell.error is not None:
        return "error"
    summary = cell.summary
    if summary.entry_criterion.startswith("metastable"):
        if summary.failure_rate > 0.5 or summary.mean_entry_metastable is None:
            return "Failed"
        return str(round(summary.mean_entry_metastable))
    entry = "-" if summary.mean_entry_below is None else str(round(summary.mean_entry_below))
    return f"{entry}/{round(summary.mean_switches)}"


def format_sweep_table(
    cells: list[SweepCell], n_values: list[int], p_values: list[float]
) -> str:
    """Aligned plain-text grid, one row per population size and one column per
    noise level (subcritical cells show the mean entry round or ``Failed``;
    supercritical cells show ``entry/switches``).
    """
    by_key = {(c.n, c.p): c for c in cells}
    header = ["size_n"] + [f"p={p:.6g}" for p in p_values]
    rows = [header]
    for n in n_values:
        row = [str(n)]
        for p in p_values:
            cell = by_key.get((n, p))
            row.append(_cell_text(cell) if cell is not None else "-")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(item.ljust(w) for item, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def write_trajectories_csv(path: str | Path, trajectories: list[Trajectory]) -> None:
    """Persist per-trial census records: header ``trial,round,a,b,q,s``, one
    row per (trial, round), integers only, LF line endings.  Conservation
    ``a + b + q = n`` is audited on every row written.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("trial,round,a,b,q,s\n")
        for trial, traj in enumerate(trajectories):
            q = traj.q
            s = traj.s
            for t in range(len(traj.a)):
                a, b = int(traj.a[t]), int(traj.b[t])
                if a + b + int(q[t]) != traj.n:
                    raise AssertionError(
                        f"census broken at trial {trial} round {t}: {a}+{b}+{int(q[t])} != {traj.n}"
                    )
                fh.write(f"{trial},{t},{a},{b},{int(q[t])},{int(s[t])}\n")


def read_trajectories_csv(path: str | Path) -> list[Trajectory]:
    """Load trajectories written by :func:`write_trajectories_csv`."""
    per_trial: dict[int, list[tuple[int, int, int]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "trial,round,a,b,q,s":
            raise ValueError(f"unexpected trajectory CSV header: {header!r}")
        for line in fh:
            trial_s, round_s, a_s, b_s, q_s, _s = line.strip().split(",")
            per_trial.setdefault(int(trial_s), []).append((int(round_s), int(a_s), int(b_s)))
            n = int(a_s) + int(b_s) + int(q_s)
    trajectories = []
    for trial in sorted(per_trial):
        rows = sorted(per_trial[trial])
        a = np.array([r[1] for r in rows], dtype=np.int64)
        b = np.array([r[2] for r in rows], dtype=np.int64)
        trajectories.append(Trajectory(n=n, a=a, b=b))
    return trajectories


def write_summary_json(path: str | Path, summary: SummaryStats) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(summary.to_summary_dict(), indent=2))
        fh.write("\n")


def parse_probability(value) -> float:
    """Probabilities from config/CLI input: decimals or exact fractions such
    as ``"1/12"`` (parsed exactly, so critical-point comparisons are not lost
    to decimal rounding).
    """
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


def _parse_log_base(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() == "e":
            return math.e
        return float(value)
    return float(value)


def spec_from_mapping(mapping: dict) -> ExperimentSpec:
    """Build an :class:`ExperimentSpec` from a parsed config mapping; every
    field is mandatory except the ``[analytics]`` overrides.
    """
    try:
        n = int(mapping["n"])
        rounds = int(mapping["rounds"])
        trials = int(mapping["trials"])
        master_seed = int(mapping["master_seed"])
        model_map = mapping["model"]
        init_map = mapping["init"]
    except KeyError as missing:
        raise ValueError(f"experiment config is missing required field {missing}") from None
    kind = model_map.get("kind")
    if kind == "uniform":
        model: NoiseSpec | StubbornSetup = UniformNoise(parse_probability(model_map["p"]))
    elif kind == "oblivious":
        dist = tuple(float(x) for x in model_map["dist"])
        model = ObliviousNoise(parse_probability(model_map["p_noise"]), dist)
    elif kind == "stubborn":
        model = StubbornSetup(
            n=n,
            stub_alpha=int(model_map["stub_alpha"]),
            stub_beta=int(model_map["stub_beta"]),
            stub_undecided=int(model_map["stub_undecided"]),
        )
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    init = InitialCondition(
        kind=init_map.get("kind", ""),
        a=init_map.get("a"),
        b=init_map.get("b"),
    )
    analytics_map = mapping.get("analytics", {})
    window = analytics_map.get("window")
    analytics = AnalyticsOptions(
        entry_frac=analytics_map.get("entry_frac"),
        below_coefficient=float(analytics_map.get("below_coefficient", 10.0)),
        log_base=_parse_log_base(analytics_map.get("log_base", math.e)),
        window=tuple(window) if window is not None else None,
    )
    return ExperimentSpec(
        n=n,
        model=model,
        init=init,
        rounds=rounds,
        trials=trials,
        master_seed=master_seed,
        analytics=analytics,
    )


def load_spec(path: str | Path) -> ExperimentSpec:
    """Parse an experiment config file (TOML: key-value with nested sections)."""
    with open(path, "rb") as fh:
        mapping = _toml.load(fh)
    return spec_from_mapping(mapping)
