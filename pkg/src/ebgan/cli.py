"""Command-line entry point: run, compare, oracle, gen-data.

Exit codes: 0 success, 1 training diverged, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError, ExperimentConfig
from .data import MixtureDataset, generate_mixture, write_dataset_csv
from .metrics import mode_coverage, nearest_component, pca2, project, write_pca_points
from .nn import save_checkpoint
from .numerics import ParameterError, make_stream
from .oracle import (
    LOG4,
    bruteforce_max_Jd,
    optimal_discriminator,
    random_histogram,
    sweep_minimum,
    virtual_criterion,
)
from .svg import PlotStyle, ScatterData, SeriesData, emit_svg
from .trainer import METHODS, METRIC_COLUMNS, RunLog, TrainingDiverged, sample_fake, train

log = logging.getLogger("ebgan")

EXIT_OK, EXIT_DIVERGED, EXIT_USAGE = 0, 1, 2
SVG_POINTS = 2000


def write_metrics_csv(runlog: RunLog, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        for rec in runlog.records:
            w.writerow([rec["iter"]] + [f"{rec[c]:.17g}" for c in METRIC_COLUMNS[1:]])


def read_metrics_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {c: np.array([float(r[c]) for r in rows]) for c in METRIC_COLUMNS}


def _window(runlog: RunLog, exp: ExperimentConfig) -> tuple[float, float]:
    """Window means of both mean-D series; the window is clipped to the logged range."""
    last = int(runlog.records[-1]["iter"])
    lo, hi = min(exp.metrics.window_lo, last), min(exp.metrics.window_hi, last)
    return runlog.window_mean("mean_d_real", lo, hi), runlog.window_mean("mean_d_fake", lo, hi)


def run_seed(exp: ExperimentConfig, seed: int, out_dir: Path, ds: MixtureDataset | None = None) -> dict:
    """Train one seed and write its artifacts; returns a summary row."""
    out_dir.mkdir(parents=True, exist_ok=True)
    seed_exp = replace(exp, seeds=(seed,), out_dir=str(out_dir))
    cfgmod.dump(seed_exp, out_dir / "resolved_config.txt")
    ds = ds if ds is not None else generate_mixture(exp.data)
    tcfg = exp.train_for_seed(seed)
    t0 = time.perf_counter()
    try:
        runlog = train(tcfg, ds)
    except TrainingDiverged as e:
        write_metrics_csv(e.log, out_dir / "metrics.csv")
        (out_dir / "abort.json").write_text(json.dumps(e.log.abort, indent=2) + "\n")
        raise
    write_metrics_csv(runlog, out_dir / "metrics.csv")

    ckpt = out_dir / "checkpoints"
    ckpt.mkdir(exist_ok=True)
    save_checkpoint(runlog.disc, ckpt / "disc.bin")
    for j, g in enumerate(runlog.ensemble.params):
        save_checkpoint(g, ckpt / f"gen_{j:02d}.bin")

    fake = sample_fake(runlog.ensemble, exp.metrics.fake_per_generator, tcfg.latent,
                       make_stream(seed, "final", "latent"))
    rep = mode_coverage(fake, ds, exp.metrics.min_fraction, exp.metrics.radius_quantile)
    (out_dir / "coverage.json").write_text(rep.to_json() + "\n")

    proj = pca2(ds.X)
    fake_lab = nearest_component(fake, ds)
    write_pca_points(out_dir / "pca_points.csv", proj, ds.X, ds.labels, fake, fake_lab)

    it = runlog.column("iter")
    emit_svg(SeriesData(it, {"mean D(real)": runlog.column("mean_d_real"),
                             "mean D(fake)": runlog.column("mean_d_fake")}),
             PlotStyle(title=f"{tcfg.method} seed {seed}", xlabel="iteration", ylabel="mean D", hlines=(0.5,)),
             out_dir / "convergence.svg")
    rs = np.linspace(0, ds.N - 1, min(SVG_POINTS, ds.N)).astype(int)
    fs = np.linspace(0, fake.shape[0] - 1, min(SVG_POINTS, fake.shape[0])).astype(int)
    pts = np.concatenate([project(proj, ds.X[rs]), project(proj, fake[fs])])
    emit_svg(ScatterData(pts, ["real"] * rs.size + ["fake"] * fs.size),
             PlotStyle(title=f"PCA: {rep.covered_count}/{len(rep.covered)} components covered"),
             out_dir / "coverage.svg")

    d_real, d_fake = _window(runlog, exp)
    return {"method": tcfg.method, "seed": seed, "window_d_real": d_real, "window_d_fake": d_fake,
            "gap": max(abs(d_real - 0.5), abs(d_fake - 0.5)), "covered_count": rep.covered_count,
            "seconds": time.perf_counter() - t0}


def _run_seed_job(args):
    exp, seed, out = args
    try:
        return run_seed(exp, seed, Path(out))
    except TrainingDiverged as e:
        return {"method": exp.train.method, "seed": seed, "diverged": str(e)}


def run_experiment(exp: ExperimentConfig, out_dir: Path, jobs: int = 1) -> list[dict]:
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(exp, s, str(out_dir / f"seed_{s}")) for s in exp.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_seed_job, tasks))
    return [_run_seed_job(t) for t in tasks]


def _load(args, path: str) -> ExperimentConfig:
    exp = cfgmod.load(path) if path else ExperimentConfig()
    over: dict[str, str] = {}
    if getattr(args, "seed", None):
        over["run.seeds"] = ", ".join(str(s) for s in args.seed)
    if getattr(args, "method", None):
        over["train.method"] = args.method
    if getattr(args, "out", None):
        over["run.out_dir"] = args.out
    if over:
        flat = cfgmod.to_flat(exp)
        flat.update(over)
        exp = cfgmod.build(flat)
    return exp


def _report(rows: list[dict]) -> int:
    status = EXIT_OK
    for r in rows:
        if "diverged" in r:
            print(f"seed {r['seed']}: {r['diverged']}", file=sys.stderr)
            status = EXIT_DIVERGED
        else:
            print(f"{r['method']} seed {r['seed']}: window D(real)={r['window_d_real']:.4f} "
                  f"D(fake)={r['window_d_fake']:.4f} covered={r['covered_count']} ({r['seconds']:.1f}s)")
    return status


def cmd_run(args) -> int:
    exp = _load(args, args.config)
    rows = run_experiment(exp, Path(exp.out_dir), args.jobs)
    return _report(rows)


SUMMARY_COLUMNS = ("config", "method", "seed", "window_d_real", "window_d_fake", "gap", "covered_count")


def cmd_compare(args) -> int:
    if not args.config or len(args.config) < 2:
        print("compare needs at least two --config files", file=sys.stderr)
        return EXIT_USAGE
    exps = [_load(argparse.Namespace(seed=args.seed, method=None, out=None), p) for p in args.config]
    for p, e in zip(args.config[1:], exps[1:]):
        if e.data != exps[0].data:
            raise ParameterError(f"{p}: dataset spec differs from {args.config[0]}")
        if e.seeds != exps[0].seeds:
            raise ParameterError(f"{p}: seed list differs from {args.config[0]}")
    out = Path(args.out or exps[0].out_dir)
    ds = generate_mixture(exps[0].data)
    summary, status = [], EXIT_OK
    for k, (path, exp) in enumerate(zip(args.config, exps)):
        label = f"{k}_{Path(path).stem}"
        for seed in exp.seeds:
            try:
                row = run_seed(exp, seed, out / label / f"seed_{seed}", ds)
            except TrainingDiverged as e:
                print(f"{label} seed {seed}: {e}", file=sys.stderr)
                status = EXIT_DIVERGED
                continue
            summary.append({"config": label, **row})
            _report([row])
    with open(out / "summary.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in summary:
            w.writerow([r["config"], r["method"], r["seed"], f"{r['window_d_real']:.17g}",
                        f"{r['window_d_fake']:.17g}", f"{r['gap']:.17g}", r["covered_count"]])
    return status


def cmd_oracle(args) -> int:
    rng = np.random.default_rng(args.seed[0] if args.seed else 0)
    print("Optimal discriminator: brute-force maximizer vs p/(p+q)")
    print(f"{'pair':>4} {'bins':>4} {'max|D_bf - D*|':>16}")
    worst = 0.0
    for i in range(args.pairs):
        p, q = random_histogram(rng, args.bins, 0.2), random_histogram(rng, args.bins, 0.2)
        err = float(np.max(np.abs(bruteforce_max_Jd(p, q) - optimal_discriminator(p, q))))
        worst = max(worst, err)
        if i < args.show:
            print(f"{i:>4} {args.bins:>4} {err:>16.3e}")
    print(f"worst over {args.pairs} pairs: {worst:.3e}")
    print()
    print("Virtual criterion along q(s) = (1-s) q0 + s p")
    print(f"{'q0':>4} {'C(p,q0)':>12} {'argmin s':>9} {'min C':>18} {'min C + log 4':>14}")
    p = random_histogram(rng, args.bins)
    for i in range(args.show):
        q0 = random_histogram(rng, args.bins)
        s, c = sweep_minimum(p, q0)
        print(f"{i:>4} {virtual_criterion(p, q0):>12.6f} {s:>9.3f} {c:>18.15f} {c + LOG4:>14.2e}")
    return EXIT_OK


def cmd_gen_data(args) -> int:
    exp = _load(argparse.Namespace(seed=None, method=None, out=None), args.config)
    ds = generate_mixture(exp.data)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(ds, out)
    print(f"wrote {ds.N} rows x {ds.X.shape[1]} columns to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ebgan", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="train every configured seed and write artifacts")
    r.add_argument("--config", help="key = value config file (defaults when omitted)")
    r.add_argument("--out", help="output directory (overrides run.out_dir)")
    r.add_argument("--seed", type=int, action="append", help="seed; repeat for several (overrides run.seeds)")
    r.add_argument("--method", choices=METHODS, help="override train.method")
    r.add_argument("--jobs", type=int, default=1, help="seeds trained concurrently")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="run several configs on the same data and seeds")
    c.add_argument("--config", action="append", help="config file; give at least two")
    c.add_argument("--out", help="output directory")
    c.add_argument("--seed", type=int, action="append")
    c.set_defaults(func=cmd_compare)

    o = sub.add_parser("oracle", help="print optimal-discriminator and virtual-criterion checks")
    o.add_argument("--seed", type=int, action="append")
    o.add_argument("--pairs", type=int, default=100)
    o.add_argument("--bins", type=int, default=8)
    o.add_argument("--show", type=int, default=5)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen-data", help="write the synthetic mixture as CSV")
    g.add_argument("--config")
    g.add_argument("--out", required=True, help="CSV path")
    g.set_defaults(func=cmd_gen_data)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
