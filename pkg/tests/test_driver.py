import json

import numpy as np
import pytest

from pauliscope.circuits import CircuitSpec
from pauliscope.csvio import (
    HISTOGRAM_HEADER,
    MOMENTS_HEADER,
    MSE_HEADER,
    read_csv_rows,
    write_histogram_csv,
    write_moments_csv,
    write_mse_csv,
    write_sidecar,
)
from pauliscope.driver import (
    ExperimentConfig,
    SweepSpec,
    run_ensemble,
    simulate_histogram,
    simulate_moments,
    simulate_mse,
)

BASE = {
    "circuit": {
        "geometry": "chain",
        "n_sites": 4,
        "depth": 6,
        "gamma": 0.05,
        "master_seed": 5,
    },
    "sweep": {"t": [2, 4, 6], "k": [2]},
    "n_realizations": 24,
    "engine": "simulator",
}


def test_config_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(BASE))
    cfg = ExperimentConfig.from_json(path)
    assert cfg.circuit.n_sites == 4
    assert cfg.sweep.t == [2, 4, 6]
    resolved = cfg.resolved()
    assert resolved["version"]
    assert ExperimentConfig.from_dict(resolved | {"version": None} if False else BASE)


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="bogus"):
        ExperimentConfig.from_dict({**BASE, "bogus": 1})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({**BASE, "sweep": {"tt": [1]}})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({**BASE, "engine": "quantum"})


def test_run_ensemble_reproducible():
    rows1 = run_ensemble(ExperimentConfig.from_dict(BASE))
    rows2 = run_ensemble(ExperimentConfig.from_dict(BASE))
    assert len(rows1) == 9  # 3 depths x (mu, nu, nu_over_F2k)
    for a, b in zip(rows1, rows2):
        assert a.value == b.value and a.stderr == b.stderr


def test_threaded_matches_serial():
    serial = run_ensemble(ExperimentConfig.from_dict(BASE))
    threaded = run_ensemble(ExperimentConfig.from_dict({**BASE, "threads": 2}))
    for a, b in zip(serial, threaded):
        assert a.value == b.value and a.stderr == b.stderr


def test_stderr_shrinks_with_ensemble():
    spec = CircuitSpec(geometry="chain", n_sites=4, depth=4, gamma=0.1, master_seed=17)
    small = simulate_moments(spec, [4], [2], 200)
    large = simulate_moments(spec, [4], [2], 800)
    ratio = small[0].stderr / large[0].stderr
    assert 1.5 < ratio < 2.7  # ~2 from quadrupling, statistical slack


def test_moment_quantities_consistent():
    spec = CircuitSpec(geometry="chain", n_sites=4, depth=4, gamma=0.1, master_seed=3)
    rows = simulate_moments(spec, [4], [2], 30)
    by_q = {r.quantity: r for r in rows}
    fid = (1 - 0.1) ** (4 * 4)
    assert by_q["nu_over_F2k"].value == pytest.approx(by_q["nu"].value / fid**4)
    assert by_q["mu"].value > 0 and by_q["nu"].n_samples == 30


def test_csv_schemas(tmp_path):
    cfg = ExperimentConfig.from_dict(BASE)
    rows = run_ensemble(cfg)
    mpath = tmp_path / "moments.csv"
    write_moments_csv(mpath, rows, cfg.engine)
    records = read_csv_rows(mpath)
    assert list(records[0].keys()) == MOMENTS_HEADER
    assert {r["quantity"] for r in records} == {"mu", "nu", "nu_over_F2k"}
    assert all(r["geometry"] == "chain" and r["N"] == "4" for r in records)

    spec = cfg.circuit
    hists = simulate_histogram(spec, [4], 10)
    hpath = tmp_path / "hist.csv"
    write_histogram_csv(hpath, hists, spec.master_seed)
    hrec = read_csv_rows(hpath)
    assert list(hrec[0].keys()) == HISTOGRAM_HEADER
    assert len(hrec) == 60

    points = simulate_mse(spec, [1, 4], 5)
    spath = tmp_path / "mse.csv"
    write_mse_csv(spath, points, spec, spec.master_seed)
    srec = read_csv_rows(spath)
    assert list(srec[0].keys()) == MSE_HEADER

    write_sidecar(tmp_path / "meta.json", cfg.resolved(), 1.23)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["wall_seconds"] == 1.23
    assert meta["circuit"]["n_sites"] == 4


def test_histogram_ensemble_normalization():
    spec = CircuitSpec(geometry="chain", n_sites=4, depth=6, gamma=0.02, master_seed=2)
    (hist,) = simulate_histogram(spec, [6], 12)
    widths = np.diff(hist.bin_edges)
    total = hist.zero_mass + float(np.sum(hist.density_mean * widths))
    assert abs(total - 1.0) < 1e-8


def test_rtn_engine_rows():
    cfg = ExperimentConfig.from_dict(
        {
            "circuit": {"geometry": "chain", "n_sites": 4, "depth": 6, "master_seed": 5},
            "sweep": {"t": [2, 4], "k": [2], "gamma": [0.0, 0.02]},
            "engine": "rtn",
            "n_realizations": 2,
        }
    )
    rows = run_ensemble(cfg)
    assert len(rows) == 4
    assert {r.quantity for r in rows} == {"mu", "nu"}
    assert all("truncation_error" in r.meta for r in rows)


def test_rmpu_engine_rows():
    cfg = ExperimentConfig.from_dict(
        {
            "circuit": {
                "geometry": "rmpu", "n_sites": 4, "r": 1,
                "master_seed": 5, "initial_site": 0,
            },
            "sweep": {"k": [2, 3], "gamma": [0.0, 0.05], "n": [3, 4]},
            "engine": "rmpu_exact",
            "n_realizations": 2,
        }
    )
    rows = run_ensemble(cfg)
    assert len(rows) == 8
    cfg.engine = "rmpu_asymptotic"
    asym = run_ensemble(cfg)
    assert len(asym) == 8
    for a, b in zip(rows, asym):
        assert abs(a.value - b.value) < 0.5 * max(a.value, b.value)
