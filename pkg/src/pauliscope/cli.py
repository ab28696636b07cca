"""Command-line entry point for the experiment drivers.

Every run writes its CSV next to a JSON sidecar holding the fully resolved
configuration, package version and wall-clock time, so outputs are
reproducible from the sidecar alone.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import defaultdict
from pathlib import Path

from . import __version__
from .circuits import CircuitSpec
from .csvio import (
    ensure_dir,
    read_csv_rows,
    write_histogram_csv,
    write_moments_csv,
    write_mse_csv,
    write_sidecar,
)
from .driver import ExperimentConfig, run_ensemble, simulate_histogram, simulate_mse
from .fits import fit_kappa, locate_threshold
from .spectrum import haar_moment


def _load_config(args, default_engine=None) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
    else:
        raise SystemExit("--config <path.json> is required for this subcommand")
    if default_engine is not None:
        cfg.engine = default_engine
    if args.engine:
        cfg.engine = args.engine
    if args.seed is not None:
        cfg.circuit.master_seed = args.seed
    if args.realizations is not None:
        cfg.n_realizations = args.realizations
    if args.threads is not None:
        cfg.threads = args.threads
    if args.out:
        cfg.out_dir = args.out
    return cfg


def _finish(cfg: ExperimentConfig, csv_name: str, writer, t0: float) -> Path:
    out = ensure_dir(cfg.out_dir)
    csv_path = out / csv_name
    writer(csv_path)
    write_sidecar(out / (csv_path.stem + ".meta.json"), cfg.resolved(), time.time() - t0)
    print(f"wrote {csv_path}")
    return csv_path


def cmd_moments(args) -> int:
    cfg = _load_config(args)
    t0 = time.time()
    rows = run_ensemble(cfg)
    _finish(cfg, "moments.csv", lambda p: write_moments_csv(p, rows, cfg.engine), t0)
    return 0


def cmd_rmpu(args, engine: str) -> int:
    cfg = _load_config(args, default_engine=engine)
    t0 = time.time()
    rows = run_ensemble(cfg)
    name = "moments_rmpu_exact.csv" if engine == "rmpu_exact" else "moments_rmpu_asymptotic.csv"
    _finish(cfg, name, lambda p: write_moments_csv(p, rows, cfg.engine), t0)
    return 0


def cmd_rtn(args) -> int:
    cfg = _load_config(args, default_engine="rtn")
    t0 = time.time()
    rows = run_ensemble(cfg)
    _finish(cfg, "moments_rtn.csv", lambda p: write_moments_csv(p, rows, cfg.engine), t0)
    return 0


def cmd_spectrum_hist(args) -> int:
    cfg = _load_config(args)
    t0 = time.time()
    depths = cfg.sweep.t if cfg.sweep.t is not None else [cfg.circuit.n_layers]
    gammas = cfg.sweep.gamma if cfg.sweep.gamma is not None else [cfg.circuit.gamma]
    ensembles = []
    for gamma in gammas:
        spec = CircuitSpec.from_dict({**cfg.circuit.to_dict(), "gamma": gamma})
        ensembles.extend(
            simulate_histogram(spec, depths, cfg.n_realizations, threads=cfg.threads)
        )
    _finish(
        cfg,
        "histogram.csv",
        lambda p: write_histogram_csv(p, ensembles, cfg.circuit.master_seed),
        t0,
    )
    return 0


def cmd_truncate_mse(args) -> int:
    cfg = _load_config(args)
    t0 = time.time()
    gammas = cfg.sweep.gamma if cfg.sweep.gamma is not None else [cfg.circuit.gamma]
    out = ensure_dir(cfg.out_dir)
    for gamma in gammas:
        spec = CircuitSpec.from_dict({**cfg.circuit.to_dict(), "gamma": gamma})
        points = simulate_mse(spec, cfg.sweep.n_paulis, cfg.n_realizations)
        path = out / f"mse_gamma{gamma:g}.csv"
        write_mse_csv(path, points, spec, spec.master_seed)
        print(f"wrote {path}")
    write_sidecar(out / "mse.meta.json", cfg.resolved(), time.time() - t0)
    return 0


def cmd_fit_kappa(args) -> int:
    rows = read_csv_rows(args.input)
    series = defaultdict(list)
    for row in rows:
        if row["quantity"] != "mu" or int(row["k"]) != 2:
            continue
        series[float(row["gamma"])].append(
            (int(row["t"]), float(row["value"]), float(row["stderr"]))
        )
    if not series:
        raise SystemExit("no (quantity=mu, k=2) rows in the input CSV")
    window = tuple(args.window) if args.window else None
    out_rows = []
    for gamma in sorted(series):
        pts = sorted(series[gamma])
        t, v, s = zip(*pts)
        n_sites = int(rows[0]["N"])
        fit = fit_kappa(t, v, s, haar_value=haar_moment(2), window=window)
        out_rows.append(
            {
                "gamma": gamma,
                "gammaN": gamma * n_sites,
                "kappa": fit.kappa,
                "kappa_stderr": fit.kappa_stderr,
                "t_min": fit.window[0],
                "t_max": fit.window[1],
                "r_squared": fit.r_squared,
                "n_points": fit.n_points,
            }
        )
    out = Path(args.out or "kappa.csv")
    with open(out, "w") as fh:
        keys = list(out_rows[0])
        fh.write(",".join(keys) + "\n")
        for r in out_rows:
            fh.write(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k]) for k in keys) + "\n")
    print(f"wrote {out}")
    return 0


def cmd_threshold(args) -> int:
    rows = read_csv_rows(args.input)
    xs = [float(r["gammaN"]) for r in rows]
    ks = [float(r["kappa"]) for r in rows]
    ss = [float(r["kappa_stderr"]) for r in rows]
    res = locate_threshold(xs, ks, ss)
    payload = {
        "gammaN_critical": res.value,
        "stderr": res.stderr,
        "n_sign_changes": res.n_sign_changes,
        "bracket": list(res.bracket),
    }
    print(json.dumps(payload, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_selftest(args) -> int:
    """Fast oracle-equivalence sweep (a scaled-down acceptance suite)."""
    import numpy as np

    from .circuits import run_circuit
    from .pauli import pauli_transform
    from .rmpu import RmpuParams, global_haar_moment, rmpu_moment_exact
    from .rtn import contract_brickwork
    from .spectrum import moment_nu
    from .weingarten import gram_matrix, weingarten_matrix

    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        failures += 0 if ok else 1

    for n, q in ((2, 4.0), (4, 2.0), (4, 8.0)):
        g = gram_matrix(n, q).entries
        w = weingarten_matrix(n, q).entries
        rel = float(np.max(np.abs(g @ w @ g - g)) / np.max(np.abs(g)))
        check(f"gram-inverse n={n} q={q}", rel < 1e-10, f"resid={rel:.1e}")

    p = RmpuParams(n_sites=3, r=1, k=2, gamma=0.05)
    exact = rmpu_moment_exact(p)
    spec = CircuitSpec(geometry="rmpu", n_sites=3, r=1, gamma=0.05,
                       master_seed=11, initial_site=0)
    vals = []
    for real in range(400):
        vals.append(moment_nu(pauli_transform(run_circuit(spec, real)), 2))
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(len(vals)))
    check("rmpu transfer vs Monte Carlo", abs(mean - exact) < 3 * se,
          f"{mean:.4f}+-{se:.4f} vs {exact:.4f}")

    r = contract_brickwork(2, 1, k=2)
    ref = rmpu_moment_exact(RmpuParams(n_sites=2, r=1, k=2))
    check("rtn vs transfer (N=2, t=1)", abs(r.value - ref) < 1e-9 * ref)

    r1 = contract_brickwork(5, 4, k=1)
    check("rtn norm identity (nu1=1)", abs(r1.value - 1.0) < 1e-10)

    deep = contract_brickwork(4, 20, k=2)
    gh = global_haar_moment(16.0, 2)
    check("rtn deep limit vs global Haar", abs(deep.value - gh) < 1e-3,
          f"{deep.value:.6f} vs {gh:.6f}")

    print("selftest:", "OK" if failures == 0 else f"{failures} FAILURES")
    return 1 if failures else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="pauliscope",
        description="Pauli-spectrum experiments for noisy random circuits",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, help="override master seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--engine", help="override engine")
        p.add_argument("--realizations", type=int, help="override ensemble size")
        p.add_argument("--threads", type=int, help="worker processes")

    for name, fn in (
        ("moments", cmd_moments),
        ("spectrum-hist", cmd_spectrum_hist),
        ("rtn", cmd_rtn),
        ("truncate-mse", cmd_truncate_mse),
    ):
        p = sub.add_parser(name)
        add_common(p)
        p.set_defaults(fn=fn)

    for name, engine in (("rmpu-exact", "rmpu_exact"), ("rmpu-asymptotic", "rmpu_asymptotic")):
        p = sub.add_parser(name)
        add_common(p)
        p.set_defaults(fn=lambda a, e=engine: cmd_rmpu(a, e))

    p = sub.add_parser("fit-kappa")
    p.add_argument("--input", required=True, help="moments CSV")
    p.add_argument("--out", help="output kappa CSV")
    p.add_argument("--window", nargs=2, type=float, help="depth window t_min t_max")
    p.set_defaults(fn=cmd_fit_kappa)

    p = sub.add_parser("threshold")
    p.add_argument("--input", required=True, help="kappa CSV from fit-kappa")
    p.add_argument("--out", help="optional JSON output path")
    p.set_defaults(fn=cmd_threshold)

    p = sub.add_parser("selftest")
    add_common(p)
    p.set_defaults(fn=cmd_selftest)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
