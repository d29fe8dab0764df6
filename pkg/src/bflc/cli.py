"""Command-line pipeline: synth -> benchmark -> train -> simulate -> report.

Exit codes: 0 success, 1 computational failure (e.g. infeasible contract),
2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import timeseries as ts
from .bounding import BoundEnvelope, Trajectory, hull_envelope
from .control import BflcController, SteadyController, contract_volume, simulate_year
from .dispatch import read_dispatch_csv, solve_annual_benchmark
from .errors import InfeasibleError, ValidationError
from .fuzzy import load_model, save_model
from .plant import PlantSpec, daily_max_hydrogen
from .pso import PsoConfig, data_ranges, train

log = logging.getLogger("bflc")


class DependencyError(ValidationError):
    """An input produced by an earlier pipeline step is missing."""


@dataclass
class RunConfig:
    plant: PlantSpec = field(default_factory=PlantSpec)
    train_years: list = field(default_factory=list)
    test_years: list = field(default_factory=list)
    pso: PsoConfig = field(default_factory=PsoConfig)
    output_dir: Path = Path(".")
    contract_fraction: float = 0.40
    contract_kg: float | None = None

    def __post_init__(self):
        if not 0 < self.contract_fraction <= 1:
            raise ValidationError(f"contract fraction must lie in (0, 1], got {self.contract_fraction}")


def _pick(flag, config: dict, key, default):
    if flag is not None:
        return flag
    return config.get(key, default)


def build_config(args) -> RunConfig:
    """Merge the optional JSON config file with command-line flags; flags win."""
    raw = {}
    if getattr(args, "config", None):
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if getattr(args, "plant_config", None):
        plant = PlantSpec.from_file(args.plant_config)
    else:
        plant = PlantSpec.from_mapping(raw.get("plant", {}))
    pso_raw = raw.get("pso", {})
    pso = PsoConfig(
        particles=_pick(getattr(args, "particles", None), pso_raw, "particles", 30),
        max_iters=_pick(getattr(args, "iters", None), pso_raw, "iters", 100),
        seed=_pick(getattr(args, "seed", None), pso_raw, "seed", 0),
        inertia=pso_raw.get("inertia", 0.5),
        cognitive=pso_raw.get("cognitive", 1.5),
        social=pso_raw.get("social", 1.5),
    )
    return RunConfig(
        plant=plant,
        train_years=list(_pick(getattr(args, "years", None), raw, "train_years", [])),
        test_years=list(_pick(getattr(args, "test_years", None), raw, "test_years", [])),
        pso=pso,
        output_dir=Path(_pick(getattr(args, "out_dir", None), raw, "output_dir", ".")),
        contract_fraction=_pick(getattr(args, "contract_fraction", None), raw, "contract_fraction", 0.40),
        contract_kg=_pick(getattr(args, "contract_kg", None), raw, "contract_kg", None),
    )


def _label(path) -> str:
    return Path(path).stem


def _load_years(paths):
    return [ts.load_csv(p, year_label=_label(p)) for p in paths]


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_trajectory(traj: Trajectory, path) -> None:
    _write_rows(path, ("day", "cumulative_kg"), ((d, repr(float(v))) for d, v in enumerate(traj.points)))


def _read_trajectory(path) -> Trajectory:
    with open(path, newline="", encoding="utf-8") as fh:
        return Trajectory([float(r["cumulative_kg"]) for r in csv.DictReader(fh)])


def _require(path: Path) -> Path:
    if not path.exists():
        raise DependencyError(f"missing input {path}; run the previous pipeline step first")
    return path


def _max_production_t(series, plant) -> list[float]:
    return [float(daily_max_hydrogen(s.w, plant).sum()) / 1000.0 for s in series]


# -- commands -----------------------------------------------------------------


def cmd_synth(args) -> int:
    if args.random_inputs:
        e, w = ts.synth_inputs(
            args.seed, days=args.days, price_mean=args.price_mean, price_std=args.price_std, wind_mean=args.wind_mean
        )
        stamps = ts.default_timestamps(args.year, len(e))
    else:
        stamps, e = ts.load_column_csv(args.e, "e_eur_mwh")
        w_stamps, w = ts.load_column_csv(args.w, "w")
        if stamps != w_stamps:
            raise ValidationError(f"timestamps of {args.e} and {args.w} do not match")
    h = ts.synth_hydrogen_prices(e, args.mean_h, seed=args.seed)
    label = args.year_label or Path(args.out).stem
    series = ts.HourlySeries(label, e, h, w, tuple(stamps))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    ts.save_csv(series, args.out)
    log.info("wrote %s (%d hours)", args.out, series.hours)
    return 0


def cmd_benchmark(args) -> int:
    cfg = build_config(args)
    if not cfg.train_years:
        raise ValidationError("benchmark needs at least one series (--years)")
    series = _load_years(cfg.train_years)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    max_t = _max_production_t(series, cfg.plant)
    total = cfg.contract_kg if cfg.contract_kg is not None else contract_volume(max_t, cfg.contract_fraction)
    plant = cfg.plant.with_contract(total)
    (out / "contract.json").write_text(
        json.dumps(
            {
                "hpa_total_kg": total,
                "contract_fraction": cfg.contract_fraction,
                "max_production_t": dict(zip((s.year_label for s in series), max_t)),
                "plant": plant.to_dict(),
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    rows, failed = [], []
    for s in series:
        try:
            sol = solve_annual_benchmark(s, plant)
        except InfeasibleError as exc:
            log.error("%s: %s", s.year_label, exc)
            failed.append(s.year_label)
            continue
        sol.to_csv(out / f"{s.year_label}_dispatch.csv")
        _write_trajectory(Trajectory.from_daily(sol.daily_hpa(), plant.hpa_total), out / f"{s.year_label}_trajectory.csv")
        rows.append((s.year_label, repr(sol.revenue)))
    _write_rows(out / "benchmark_summary.csv", ("year", "total_revenue_eur"), rows)
    return 1 if failed else 0


def _contract_from(bench_dir: Path) -> dict:
    return json.loads(_require(bench_dir / "contract.json").read_text(encoding="utf-8"))


def cmd_train(args) -> int:
    cfg = build_config(args)
    if not cfg.train_years:
        raise ValidationError("train needs at least one training series (--years)")
    bench_dir = Path(args.benchmark_dir) if args.benchmark_dir else cfg.output_dir
    contract = _contract_from(bench_dir)
    total = cfg.contract_kg if cfg.contract_kg is not None else contract["hpa_total_kg"]
    X, y, trajs = [], [], []
    for path in cfg.train_years:
        label = _label(path)
        flows = read_dispatch_csv(_require(bench_dir / f"{label}_dispatch.csv"))
        traj = _read_trajectory(_require(bench_dir / f"{label}_trajectory.csv"))
        s = ts.load_csv(path, year_label=label)
        if len(flows) != s.hours:
            raise ValidationError(f"{label}: benchmark has {len(flows)} hours, series has {s.hours}")
        X.append(ts.daily_feature_matrix(s))
        y.append(flows.m2.reshape(-1, 24).sum(axis=1) / 24.0)
        trajs.append(traj)
    X = np.vstack(X)
    y = np.concatenate(y)
    horizon = max(t.days for t in trajs)
    trajs = [t if t.days == horizon else t.rescaled(horizon) for t in trajs]
    if len(trajs) == 1:
        log.warning("single training year: envelope is the hull of one trajectory")
    envelope = hull_envelope(trajs, total)

    ranges = data_ranges(X, (0.0, cfg.plant.max_hourly_h2))
    result = train(X, y, ranges, cfg.pso)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    save_model(result.model, out / "model.txt")
    _write_rows(out / "objective_trace.csv", ("iteration", "best_objective"),
                ((k, repr(v)) for k, v in enumerate(result.objective_trace, start=1)))
    envelope.to_csv(out / "envelope.csv")
    log.info("objective %.6g after %d iterations", result.objective, result.iterations_run)
    return 0


def cmd_simulate(args) -> int:
    cfg = build_config(args)
    paths = [(p, "in") for p in cfg.train_years] + [(p, "out") for p in cfg.test_years]
    if not paths:
        raise ValidationError("simulate needs at least one series (--years or --test-years)")
    controllers = ("steady", "bflc") if args.controller == "both" else (args.controller,)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    model = envelope = None
    if "bflc" in controllers:
        model_dir = Path(args.model_dir) if args.model_dir else out
        model = load_model(_require(Path(args.model) if args.model else model_dir / "model.txt"))
        envelope = BoundEnvelope.from_csv(_require(Path(args.envelope) if args.envelope else model_dir / "envelope.csv"))

    if cfg.contract_kg is not None:
        total = cfg.contract_kg
    elif envelope is not None:
        total = envelope.total
    elif args.benchmark_dir:
        total = _contract_from(Path(args.benchmark_dir))["hpa_total_kg"]
    else:
        series = _load_years([p for p, _ in paths])
        total = contract_volume(_max_production_t(series, cfg.plant), cfg.contract_fraction)
    plant = cfg.plant.with_contract(total)

    summary, comparison = [], []
    status = 0
    for path, sample in paths:
        s = ts.load_csv(path, year_label=_label(path))
        try:
            bench = solve_annual_benchmark(s, plant).revenue if plant.contract_days(s.days) == s.days else None
        except InfeasibleError as exc:
            log.error("%s: %s", s.year_label, exc)
            status = 1
            continue
        revs = {}
        for name in controllers:
            ctrl = SteadyController() if name == "steady" else BflcController(model, envelope)
            report = simulate_year(s, plant, ctrl, bench)
            report.write_daily(out / f"{s.year_label}_{name}_daily.csv")
            row = report.summary_row()
            summary.append((s.year_label, sample, row["controller"], row["total_revenue_eur"], row["hpa_kg"],
                            row["normalized"], repr(report.contract_shortfall_kg)))
            revs[name] = report
            if not report.contract_met:
                log.warning("%s/%s: contract short by %.3f kg", s.year_label, name, report.contract_shortfall_kg)
        comparison.append((
            s.year_label,
            repr(revs["steady"].total_revenue) if "steady" in revs else "",
            repr(revs["bflc"].total_revenue) if "bflc" in revs else "",
            repr(next(iter(revs.values())).benchmark_revenue),
            repr(revs["steady"].normalized_revenue) if "steady" in revs else "",
            repr(revs["bflc"].normalized_revenue) if "bflc" in revs else "",
        ))
    _write_rows(out / "summary.csv",
                ("year", "sample", "controller", "total_revenue_eur", "hpa_kg", "normalized", "contract_shortfall_kg"),
                summary)
    _write_rows(out / "comparison.csv", COMPARISON_HEADER, comparison)
    return status


COMPARISON_HEADER = ("year", "steady_rev", "bflc_rev", "benchmark_rev", "steady_norm", "bflc_norm")


def cmd_report(args) -> int:
    merged = {}
    for path in args.inputs:
        with open(_require(Path(path)), newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != COMPARISON_HEADER:
                raise ValidationError(f"{path}: not a comparison table")
            for row in reader:
                merged[row["year"]] = row
    rows = [tuple(merged[k][c] for c in COMPARISON_HEADER) for k in sorted(merged)]
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    _write_rows(args.out, COMPARISON_HEADER, rows)
    return 0


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bflc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override it")
    common.add_argument("--plant-config", help="plant parameters (JSON or key = value)")
    common.add_argument("--out-dir")

    contract = argparse.ArgumentParser(add_help=False)
    contract.add_argument("--contract-kg", type=float)
    contract.add_argument("--contract-fraction", type=float)

    p = sub.add_parser("synth", help="build an hourly series with synthetic hydrogen prices")
    p.add_argument("--e", help="CSV with timestamp,e_eur_mwh")
    p.add_argument("--w", help="CSV with timestamp,w")
    p.add_argument("--random-inputs", action="store_true", help="generate e and w as well")
    p.add_argument("--mean-h", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--year-label")
    p.add_argument("--year", type=int, default=2017)
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--price-mean", type=float, default=40.0)
    p.add_argument("--price-std", type=float, default=15.0)
    p.add_argument("--wind-mean", type=float, default=0.46)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("benchmark", parents=[common, contract], help="perfect-foresight dispatch per year")
    p.add_argument("--years", nargs="+")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("train", parents=[common, contract], help="fit the fuzzy controller and envelope")
    p.add_argument("--years", nargs="+")
    p.add_argument("--benchmark-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--particles", type=int)
    p.add_argument("--iters", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", parents=[common, contract], help="run steady and/or BFLC control")
    p.add_argument("--years", nargs="+", help="in-sample series")
    p.add_argument("--test-years", nargs="+", help="out-of-sample series")
    p.add_argument("--controller", choices=("steady", "bflc", "both"), default="both")
    p.add_argument("--model-dir")
    p.add_argument("--model")
    p.add_argument("--envelope")
    p.add_argument("--benchmark-dir")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="merge comparison tables")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "synth" and not args.random_inputs and not (args.e and args.w):
        parser.error("synth needs --e and --w (or --random-inputs)")
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"bflc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleError, RuntimeError) as exc:
        print(f"bflc {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
