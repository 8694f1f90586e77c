"""Experiment command-line harness.

Four subcommands cover the experiment families:

    train             one model per seed, metrics + aggregate CIs
    init-study        MF-kind x initialization-scale grid with trajectories
    pareto-sweep      scalarization-weight sweep plus reference runs
    export-partition  centers and membership curves of a saved model

Every output is CSV or JSON (plot-ready data; no figure rendering).  All
commands are deterministic given an identical config: rerunning writes
byte-identical files.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from .data import load_csv, load_manifest, split_scale, synth_regression
from .fcm_init import FCMConfig, derive_scales, fcm_fit
from .inference import Order, RuleBase, load_model, predict, save_model
from .membership import MFKind, membership_values
from .metrics import (
    EvalReport,
    ParetoPoint,
    mean_distinguishability,
    pareto_front,
    regression_metrics,
)
from .numerics import mean_ci95
from .training import (
    DivergenceError,
    Mode,
    TrainConfig,
    traces_to_csv,
    train,
    trajectory_to_csv,
)


@dataclass
class ExperimentConfig:
    # data source: exactly one of manifest / synth
    manifest: str | None = None
    synth: str | None = None
    synth_n: int = 2000
    synth_noise: float = 0.05
    # model
    mode: str = "anfis"
    mf: str = "cauchy"
    rules: int = 5
    order: str = "zero"
    # training
    lr_backward: float = 0.1
    lr_xpass: float = 0.1
    lam: float = 1e-4
    d_target: float = 0.5
    mo_weight: float = 1.0
    max_epochs: int = 500
    patience: int = 20
    clip_lo: float = -1.0
    clip_hi: float = 1.0
    # clustering
    fcm_fuzziness: float = 2.0
    fcm_tol: float = 1e-5
    fcm_max_iter: int = 300
    # experiment
    seeds: list = field(default_factory=lambda: list(range(10)))
    out: str = "runs"
    workers: int = 1
    trajectory: bool = False
    # init-study
    scales: list = field(default_factory=list)
    # pareto sweep
    weights_count: int = 20
    weights_lo: float = 0.01
    weights_hi: float = 10.0

    def train_config(self, mode=None, mo_weight=None, seed=0):
        return TrainConfig(
            mode=Mode(mode or self.mode),
            lr_backward=self.lr_backward,
            lr_xpass=self.lr_xpass,
            lam=self.lam,
            d_target=self.d_target,
            mo_weight=self.mo_weight if mo_weight is None else mo_weight,
            max_epochs=self.max_epochs,
            patience=self.patience,
            clip_lo=self.clip_lo,
            clip_hi=self.clip_hi,
            seed=seed,
        )


@dataclass
class SweepSpec:
    count: int = 20
    lo: float = 0.01
    hi: float = 10.0

    def validate(self):
        if self.count < 1:
            raise ValueError(f"weight count must be >= 1, got {self.count}")
        if not (0 < self.lo <= self.hi):
            raise ValueError(f"weight range must be positive, got [{self.lo}, {self.hi}]")


def weight_grid(spec):
    """Log-spaced scalarization weights with exact endpoints."""
    spec.validate()
    if spec.count == 1:
        return np.array([spec.lo])
    grid = np.logspace(np.log10(spec.lo), np.log10(spec.hi), spec.count)
    grid[0] = spec.lo
    grid[-1] = spec.hi
    return grid


@dataclass
class RunRecord:
    run_id: str
    mode: str
    mf: str
    seed: int
    report: EvalReport
    rb: object
    traces: list
    scaler: object
    epochs_run: int
    diverged: bool = False
    weight: float | None = None
    init_scale: float | None = None


def _load_dataset(cfg, seed):
    if cfg.manifest:
        return load_csv(load_manifest(cfg.manifest))
    if cfg.synth:
        return synth_regression(cfg.synth, cfg.synth_n, cfg.synth_noise, seed=seed)
    raise ValueError("config must name either a CSV manifest or a synthetic dataset")


def run_experiment(task):
    """Train and evaluate one configured run; used by every subcommand.

    task: dict with cfg (ExperimentConfig) plus run_id, seed and optional
    overrides mode / mf / mo_weight / init_scale / trajectory.
    """
    cfg = task["cfg"]
    seed = int(task["seed"])
    mode = Mode(task.get("mode", cfg.mode))
    mf = MFKind(task.get("mf", cfg.mf))
    record_traj = bool(task.get("trajectory", cfg.trajectory))

    X, y = _load_dataset(cfg, seed)
    split = split_scale(X, y, seed=seed)
    fcm = fcm_fit(
        split.X_train,
        FCMConfig(
            n_clusters=cfg.rules,
            fuzziness=cfg.fcm_fuzziness,
            tol=cfg.fcm_tol,
            max_iter=cfg.fcm_max_iter,
            seed=seed,
        ),
    )
    scales = derive_scales(split.X_train, fcm, override_scale=task.get("init_scale"))
    rb0 = RuleBase(
        mf_kind=mf, centers=fcm.centers, scales=scales, order=Order(cfg.order)
    )
    tcfg = cfg.train_config(mode=mode, mo_weight=task.get("mo_weight"), seed=seed)

    diverged = False
    try:
        rb, traces = train(
            split.X_train,
            split.y_train,
            split.X_val,
            split.y_val,
            rb0,
            tcfg,
            record_trajectory=record_traj,
        )
    except DivergenceError as err:
        diverged = True
        rb, traces = err.last_rb, err.traces

    mse, rmse, mae, r2 = regression_metrics(split.y_test, _predict_or_nan(rb, split.X_test))
    mean_d, per_feature = mean_distinguishability(rb)
    report = EvalReport(mse=mse, rmse=rmse, mae=mae, r2=r2, mean_D=mean_d, per_feature_D=per_feature)
    return RunRecord(
        run_id=task["run_id"],
        mode=str(mode),
        mf=mf.value,
        seed=seed,
        report=report,
        rb=rb,
        traces=traces,
        scaler=split.scaler,
        epochs_run=len(traces) - 1,
        diverged=diverged,
        weight=task.get("mo_weight"),
        init_scale=task.get("init_scale"),
    )


def _predict_or_nan(rb, X):
    if rb is None or rb.consequents is None:
        return np.full(X.shape[0], np.nan)
    return predict(rb, X)


def _run_all(tasks, workers):
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_experiment, tasks))
    else:
        results = [run_experiment(t) for t in tasks]
    return sorted(results, key=lambda r: r.run_id)


def _check_out_dir(out):
    try:
        os.makedirs(out, exist_ok=True)
        probe = os.path.join(out, ".write_probe")
        with open(probe, "w", encoding="utf-8"):
            pass
        os.remove(probe)
    except OSError as err:
        raise ValueError(f"output directory {out!r} is not writable: {err}") from err


METRICS_COLUMNS = [
    "run_id", "mode", "mf", "order", "rules", "seed", "lr_backward", "lr_xpass",
    "lambda", "d_target", "mo_weight", "weight", "init_scale", "epochs_run",
    "diverged", "mse", "rmse", "mae", "r2", "mean_D",
]


def _metrics_row(cfg, rec):
    rep = rec.report
    return [
        rec.run_id, rec.mode, rec.mf, cfg.order, cfg.rules, rec.seed,
        repr(cfg.lr_backward), repr(cfg.lr_xpass), repr(cfg.lam),
        repr(cfg.d_target), repr(cfg.mo_weight),
        "" if rec.weight is None else repr(rec.weight),
        "" if rec.init_scale is None else repr(rec.init_scale),
        rec.epochs_run, int(rec.diverged),
        repr(rep.mse), repr(rep.rmse), repr(rep.mae), repr(rep.r2), repr(rep.mean_D),
    ]


def _write_metrics_csv(path, cfg, records):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for rec in records:
            writer.writerow(_metrics_row(cfg, rec))


def _write_aggregate_csv(path, records):
    """Mean and 95% CI rows for r2 and mean_D over the runs."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "mean", "ci_lo", "ci_hi", "n"])
        for name, values in (
            ("r2", [r.report.r2 for r in records]),
            ("mean_D", [r.report.mean_D for r in records]),
        ):
            if len(values) >= 2:
                mean, lo, hi = mean_ci95(values)
                writer.writerow([name, repr(mean), repr(lo), repr(hi), len(values)])
            else:
                writer.writerow([name, repr(float(values[0])), "", "", 1])


# --------------------------------------------------------------------
# Subcommands (library-level; the argparse layer wires flags to these)
# --------------------------------------------------------------------

def cmd_train(cfg):
    """One model per seed; writes models, traces, metrics and aggregates."""
    _check_out_dir(cfg.out)
    tasks = [
        {"cfg": cfg, "run_id": f"seed{seed:04d}", "seed": seed}
        for seed in cfg.seeds
    ]
    records = _run_all(tasks, cfg.workers)
    for rec in records:
        save_model(
            os.path.join(cfg.out, f"model_{rec.run_id}.json"),
            rec.rb,
            scaler_meta=rec.scaler.to_dict(),
        )
        traces_to_csv(rec.traces, os.path.join(cfg.out, f"trace_{rec.run_id}.csv"))
        if cfg.trajectory:
            trajectory_to_csv(
                rec.traces, os.path.join(cfg.out, f"trajectory_{rec.run_id}.csv")
            )
    _write_metrics_csv(os.path.join(cfg.out, "metrics.csv"), cfg, records)
    _write_aggregate_csv(os.path.join(cfg.out, "aggregate.csv"), records)
    return records


def cmd_init_study(cfg, scale_list):
    """Both MF kinds across the given initialization scales (one seed).

    Every run records full parameter trajectories; diverged runs keep
    their last finite metrics instead of aborting the study.
    """
    if not scale_list:
        raise ValueError("init-study needs a nonempty list of initialization scales")
    _check_out_dir(cfg.out)
    seed = cfg.seeds[0]
    tasks = []
    for kind in (MFKind.GAUSSIAN, MFKind.CAUCHY):
        for idx, scale in enumerate(scale_list):
            tasks.append(
                {
                    "cfg": cfg,
                    "run_id": f"{kind.value}_s{idx:02d}",
                    "seed": seed,
                    "mode": Mode.ANFIS.value,
                    "mf": kind.value,
                    "init_scale": float(scale),
                    "trajectory": True,
                }
            )
    records = _run_all(tasks, cfg.workers)
    for rec in records:
        stem = f"{rec.mf}_{rec.init_scale:g}"
        traces_to_csv(rec.traces, os.path.join(cfg.out, f"trace_{stem}.csv"))
        trajectory_to_csv(rec.traces, os.path.join(cfg.out, f"trajectory_{stem}.csv"))
    summary_path = os.path.join(cfg.out, "summary.csv")
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["mf", "init_scale", "mse", "rmse", "mae", "r2", "mean_D", "epochs_run", "diverged"]
        )
        for rec in records:
            rep = rec.report
            writer.writerow(
                [
                    rec.mf, repr(rec.init_scale), repr(rep.mse), repr(rep.rmse),
                    repr(rep.mae), repr(rep.r2), repr(rep.mean_D),
                    rec.epochs_run, int(rec.diverged),
                ]
            )
    return records


def cmd_pareto_sweep(cfg, sweep):
    """Scalarization-weight sweep plus single ANFIS / X-ANFIS references.

    Writes points.csv (sweep points then reference rows) and front.csv
    (non-dominated subset of the sweep points).
    """
    _check_out_dir(cfg.out)
    weights = weight_grid(sweep)
    seed = cfg.seeds[0]
    tasks = [
        {
            "cfg": cfg,
            "run_id": f"mo_w{idx:04d}",
            "seed": seed,
            "mode": Mode.MO_ANFIS.value,
            "mo_weight": float(w),
        }
        for idx, w in enumerate(weights)
    ]
    tasks.append({"cfg": cfg, "run_id": "ref_anfis", "seed": seed, "mode": Mode.ANFIS.value})
    tasks.append({"cfg": cfg, "run_id": "ref_x_anfis", "seed": seed, "mode": Mode.X_ANFIS.value})
    records = _run_all(tasks, cfg.workers)

    sweep_records = [r for r in records if r.run_id.startswith("mo_w")]
    refs = [r for r in records if not r.run_id.startswith("mo_w")]
    points = [
        ParetoPoint(run_id=r.run_id, r2=r.report.r2, mean_D=r.report.mean_D,
                    config={"weight": r.weight, "mode": r.mode})
        for r in sweep_records
    ]
    front = pareto_front(points)

    columns = ["run_id", "mode", "weight", "seed", "r2", "mean_D"]

    def point_row(rec):
        return [
            rec.run_id, rec.mode,
            "" if rec.weight is None else repr(rec.weight),
            rec.seed, repr(rec.report.r2), repr(rec.report.mean_D),
        ]

    with open(os.path.join(cfg.out, "points.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in sweep_records + refs:
            writer.writerow(point_row(rec))
    front_ids = {p.run_id for p in front}
    with open(os.path.join(cfg.out, "front.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in sweep_records:
            if rec.run_id in front_ids:
                writer.writerow(point_row(rec))
    return records, front


def cmd_export_partition(model_path, samples_per_curve, out):
    """Dump a saved model's centers and sampled membership curves."""
    _check_out_dir(out)
    rb, _scaler = load_model(model_path)
    r, f = rb.centers.shape
    with open(os.path.join(out, "centers.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rule", "feature", "center", "scale"])
        for j in range(r):
            for k in range(f):
                writer.writerow(
                    [j, k, repr(float(rb.centers[j, k])), repr(float(rb.scales[j, k]))]
                )
    xs = np.linspace(0.0, 1.0, int(samples_per_curve))
    with open(os.path.join(out, "curves.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "rule", "x", "membership"])
        for k in range(f):
            for j in range(r):
                mu = membership_values(rb.mf_kind, xs, rb.centers[j, k], rb.scales[j, k])
                for x, m in zip(xs, mu):
                    writer.writerow([k, j, repr(float(x)), repr(float(m))])
    return os.path.join(out, "centers.csv"), os.path.join(out, "curves.csv")


# --------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------

def _parse_seeds(text):
    return [int(s) for s in text.split(",") if s.strip() != ""]


def _parse_scales(text):
    return [float(s) for s in text.split(",") if s.strip() != ""]


def _parse_range(text):
    sep = ":" if ":" in text else ","
    lo, hi = text.split(sep)
    return float(lo), float(hi)


def _add_common_flags(p):
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--manifest", help="JSON dataset manifest (CSV ingestion)")
    p.add_argument("--synth", choices=["two_blob", "sinc2d", "friedman"])
    p.add_argument("--synth-n", type=int, dest="synth_n")
    p.add_argument("--synth-noise", type=float, dest="synth_noise")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--mf", choices=[k.value for k in MFKind])
    p.add_argument("--rules", type=int)
    p.add_argument("--order", choices=[o.value for o in Order])
    p.add_argument("--seeds", type=_parse_seeds, help="comma-separated seed list")
    p.add_argument("--lr", type=float, dest="lr_backward")
    p.add_argument("--lr-xpass", type=float, dest="lr_xpass")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--d-target", type=float, dest="d_target")
    p.add_argument("--mo-weight", type=float, dest="mo_weight")
    p.add_argument("--epochs", type=int, dest="max_epochs")
    p.add_argument("--patience", type=int)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.add_argument("--trajectory", action="store_const", const=True, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xanfis",
        description="Neuro-fuzzy regression experiments (ANFIS / MO-ANFIS / X-ANFIS)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one model per seed")
    _add_common_flags(p_train)

    p_init = sub.add_parser("init-study", help="MF kind x init-scale stability grid")
    _add_common_flags(p_init)
    p_init.add_argument("--scales", type=_parse_scales, help="comma-separated init scales")

    p_sweep = sub.add_parser("pareto-sweep", help="scalarization weight sweep")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--weights-count", type=int, dest="weights_count")
    p_sweep.add_argument(
        "--weights-range", type=_parse_range, dest="weights_range", help="LO:HI"
    )

    p_export = sub.add_parser("export-partition", help="dump centers and MF curves")
    p_export.add_argument("--model", required=True)
    p_export.add_argument("--samples", type=int, default=201, help="points per curve")
    p_export.add_argument("--out", required=True)
    return parser


_CONFIG_FIELDS = {f.name for f in fields(ExperimentConfig)}


def build_config(args):
    """Merge config file and explicit flags; returns (config, explicit keys)."""
    doc = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        unknown = set(doc) - _CONFIG_FIELDS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    explicit = set(doc)
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            doc[name] = value
            explicit.add(name)
    if getattr(args, "weights_range", None) is not None:
        doc["weights_lo"], doc["weights_hi"] = args.weights_range
        explicit.update(("weights_lo", "weights_hi"))
    cfg = ExperimentConfig(**doc)
    if not cfg.seeds:
        raise ValueError("need at least one seed")
    return cfg, explicit


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "export-partition":
            cmd_export_partition(args.model, args.samples, args.out)
            return 0
        cfg, explicit = build_config(args)
        if cfg.mode == Mode.ANFIS.value and "lr_xpass" in explicit:
            print("warning: lr_xpass is ignored in anfis mode", file=sys.stderr)
        if args.command == "train":
            records = cmd_train(cfg)
            if any(r.diverged for r in records):
                bad = [r.run_id for r in records if r.diverged]
                print(f"error: diverged runs: {', '.join(bad)}", file=sys.stderr)
                return 1
            return 0
        if args.command == "init-study":
            if args.scales is not None and not args.scales:
                parser.error("--scales must list at least one value")
            scale_list = args.scales if args.scales is not None else cfg.scales
            if not scale_list:
                parser.error("init-study needs --scales or a 'scales' config entry")
            cmd_init_study(cfg, scale_list)
            return 0
        if args.command == "pareto-sweep":
            spec = SweepSpec(count=cfg.weights_count, lo=cfg.weights_lo, hi=cfg.weights_hi)
            cmd_pareto_sweep(cfg, spec)
            return 0
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, OSError, DivergenceError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
