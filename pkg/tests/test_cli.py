import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from bflc.cli import COMPARISON_HEADER, main
from bflc.dispatch import DispatchProblem, lp_oracle
from bflc.plant import PlantSpec
from bflc.timeseries import default_timestamps, load_csv


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _raw_inputs(tmp_path, hours=48, seed=0):
    rng = np.random.default_rng(seed)
    stamps = default_timestamps(2019, hours)
    e_path, w_path = tmp_path / "elec.csv", tmp_path / "wind.csv"
    e_path.write_text("timestamp,e_eur_mwh\n" + "".join(f"{t},{float(v)!r}\n" for t, v in zip(stamps, rng.uniform(5, 90, hours))))
    w_path.write_text("timestamp,w\n" + "".join(f"{t},{float(v)!r}\n" for t, v in zip(stamps, rng.uniform(0, 1, hours))))
    return e_path, w_path


def test_synth_from_files_is_byte_identical(tmp_path):
    e, w = _raw_inputs(tmp_path)
    args = ["synth", "--e", str(e), "--w", str(w), "--mean-h", "3", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    s = load_csv(tmp_path / "a.csv")
    assert s.hours == 48 and np.all((s.h >= 1) & (s.h <= 5))


def test_synth_missing_wind_is_usage_error(tmp_path):
    e, _ = _raw_inputs(tmp_path)
    with pytest.raises(SystemExit) as info:
        main(["synth", "--e", str(e), "--out", str(tmp_path / "x.csv")])
    assert info.value.code == 2


def test_validation_error_exit_code(tmp_path):
    e, w = _raw_inputs(tmp_path)
    w.write_text(w.read_text().replace(",0.", ",1.", 1))
    assert main(["synth", "--e", str(e), "--w", str(w), "--out", str(tmp_path / "x.csv")]) == 2


def test_benchmark_matches_oracle(tmp_path):
    e, w = _raw_inputs(tmp_path)
    year = tmp_path / "toy.csv"
    main(["synth", "--e", str(e), "--w", str(w), "--out", str(year)])
    out = tmp_path / "bench"
    assert main(["benchmark", "--years", str(year), "--out-dir", str(out)]) == 0
    contract = json.loads((out / "contract.json").read_text())
    s = load_csv(year)
    spec = PlantSpec(hpa_total=contract["hpa_total_kg"])
    ref = lp_oracle(DispatchProblem(s.e, s.h, s.w, spec.hpa_total, spec))
    (row,) = _rows(out / "benchmark_summary.csv")
    assert float(row["total_revenue_eur"]) == pytest.approx(ref.revenue, rel=1e-6)


def test_zero_contract(tmp_path):
    e, w = _raw_inputs(tmp_path)
    year = tmp_path / "toy.csv"
    main(["synth", "--e", str(e), "--w", str(w), "--out", str(year)])
    out = tmp_path / "bench"
    assert main(["benchmark", "--years", str(year), "--contract-kg", "0", "--out-dir", str(out)]) == 0
    assert all(float(r["cumulative_kg"]) == 0.0 for r in _rows(out / "toy_trajectory.csv"))
    s = load_csv(year)
    free = lp_oracle(DispatchProblem(s.e, s.h, s.w, 0.0, PlantSpec()))
    assert float(_rows(out / "benchmark_summary.csv")[0]["total_revenue_eur"]) == pytest.approx(free.revenue, rel=1e-9)


def test_train_without_benchmark_names_missing_file(tmp_path, capsys):
    e, w = _raw_inputs(tmp_path)
    year = tmp_path / "toy.csv"
    main(["synth", "--e", str(e), "--w", str(w), "--out", str(year)])
    assert main(["train", "--years", str(year), "--out-dir", str(tmp_path / "m")]) == 2
    assert "contract.json" in capsys.readouterr().err


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    years = []
    for k, (mean, std) in enumerate([(30, 10), (60, 25)]):
        path = root / f"y{2017 + k}.csv"
        assert main(["synth", "--random-inputs", "--seed", str(k), "--days", "30", "--price-mean", str(mean),
                     "--price-std", str(std), "--year", str(2017 + k), "--out", str(path)]) == 0
        years.append(str(path))
    assert main(["benchmark", "--years", *years, "--out-dir", str(root / "bench")]) == 0
    train = ["train", "--years", *years, "--benchmark-dir", str(root / "bench"), "--particles", "4", "--iters", "2"]
    assert main(train + ["--out-dir", str(root / "model")]) == 0
    assert main(train + ["--out-dir", str(root / "model2")]) == 0
    return root, years


def test_train_rerun_identical(pipeline):
    root, _ = pipeline
    for name in ("model.txt", "envelope.csv", "objective_trace.csv"):
        assert (root / "model" / name).read_bytes() == (root / "model2" / name).read_bytes()


def test_simulate_both_writes_reports(pipeline):
    root, years = pipeline
    out = root / "sim"
    assert main(["simulate", "--years", *years, "--controller", "both", "--model-dir", str(root / "model"),
                 "--out-dir", str(out)]) == 0
    daily = sorted(p.name for p in out.glob("*_daily.csv"))
    assert daily == ["y2017_bflc_daily.csv", "y2017_steady_daily.csv", "y2018_bflc_daily.csv", "y2018_steady_daily.csv"]
    rows = _rows(out / "comparison.csv")
    assert tuple(rows[0]) == COMPARISON_HEADER and len(rows) == 2
    summary = _rows(out / "summary.csv")
    assert {r["sample"] for r in summary} == {"in"} and len(summary) == 4
    for r in summary:
        # only runs that meet the contract are bounded by the benchmark
        if float(r["contract_shortfall_kg"]) <= 1e-6:
            assert float(r["normalized"]) <= 1 + 1e-12


def test_single_year_training_warns(pipeline, caplog):
    root, years = pipeline
    with pytest.warns(UserWarning):
        assert main(["train", "--years", years[0], "--benchmark-dir", str(root / "bench"), "--particles", "3",
                     "--iters", "1", "--out-dir", str(root / "single")]) == 0


def test_report_merges_tables(pipeline):
    root, years = pipeline
    sim = root / "sim_steady"
    assert main(["simulate", "--test-years", years[1], "--controller", "steady", "--benchmark-dir",
                 str(root / "bench"), "--out-dir", str(sim)]) == 0
    assert {r["sample"] for r in _rows(sim / "summary.csv")} == {"out"}
    merged = root / "merged.csv"
    assert main(["report", "--inputs", str(sim / "comparison.csv"), "--out", str(merged)]) == 0
    assert _rows(merged)[0]["year"] == "y2018"


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "bflc", "--help"], capture_output=True, text=True)
    assert done.returncode == 0 and "simulate" in done.stdout
