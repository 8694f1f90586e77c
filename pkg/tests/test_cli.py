"""Command harness: file contracts, grids, determinism, error paths."""

import csv
import json
import os

import numpy as np
import pytest

from xanfis.cli import (
    ExperimentConfig,
    SweepSpec,
    build_config,
    build_parser,
    cmd_export_partition,
    cmd_init_study,
    cmd_pareto_sweep,
    cmd_train,
    main,
    weight_grid,
)
from xanfis.inference import load_model
from xanfis.membership import membership_values


def fast_cfg(out, **kw):
    base = dict(
        synth="sinc2d",
        synth_n=300,
        synth_noise=0.05,
        rules=3,
        max_epochs=10,
        patience=10,
        out=str(out),
        seeds=[0, 1, 2],
    )
    base.update(kw)
    return ExperimentConfig(**base)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


class TestWeightGrid:
    def test_log_spaced_with_exact_endpoints(self):
        grid = weight_grid(SweepSpec(count=20, lo=0.01, hi=10.0))
        assert len(grid) == 20
        assert grid[0] == 0.01
        assert grid[-1] == 10.0
        ratios = grid[1:] / grid[:-1]
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-9)

    def test_single_weight(self):
        np.testing.assert_array_equal(weight_grid(SweepSpec(count=1, lo=0.5, hi=2.0)), [0.5])

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            weight_grid(SweepSpec(count=0, lo=0.01, hi=10))
        with pytest.raises(ValueError):
            weight_grid(SweepSpec(count=5, lo=-1.0, hi=10))


class TestTrainCommand:
    def test_file_contract(self, tmp_path):
        out = tmp_path / "runs"
        records = cmd_train(fast_cfg(out, mode="x_anfis"))
        assert len(records) == 3
        for seed in (0, 1, 2):
            assert (out / f"model_seed{seed:04d}.json").exists()
            assert (out / f"trace_seed{seed:04d}.csv").exists()
        rows = read_rows(out / "metrics.csv")
        assert len(rows) == 3
        assert rows[0]["mode"] == "x_anfis"
        agg = read_rows(out / "aggregate.csv")
        assert [r["metric"] for r in agg] == ["r2", "mean_D"]
        assert all(r["ci_lo"] != "" for r in agg)

    def test_model_artifact_readable(self, tmp_path):
        out = tmp_path / "runs"
        cmd_train(fast_cfg(out, seeds=[0]))
        rb, scaler_meta = load_model(out / "model_seed0000.json")
        assert rb.centers.shape == (3, 2)
        assert scaler_meta is not None and "x_min" in scaler_meta

    def test_trajectory_flag_writes_files(self, tmp_path):
        out = tmp_path / "runs"
        cmd_train(fast_cfg(out, seeds=[0], trajectory=True))
        rows = read_rows(out / "trajectory_seed0000.csv")
        assert {r["epoch"] for r in rows} == {str(i) for i in range(11)}

    def test_unwritable_out_dir_fails_before_training(self, tmp_path):
        # a file where the directory should be blocks creation even for root
        blocked = tmp_path / "blocked"
        blocked.write_text("in the way")
        with pytest.raises(ValueError, match="not writable"):
            cmd_train(fast_cfg(blocked / "runs"))

    def test_workers_two_matches_serial(self, tmp_path):
        serial = cmd_train(fast_cfg(tmp_path / "a", workers=1))
        parallel = cmd_train(fast_cfg(tmp_path / "b", workers=2))
        for r1, r2 in zip(serial, parallel):
            assert r1.run_id == r2.run_id
            assert r1.report.r2 == r2.report.r2
        assert (tmp_path / "a" / "metrics.csv").read_bytes() == (
            tmp_path / "b" / "metrics.csv"
        ).read_bytes()


class TestInitStudyCommand:
    def test_kind_by_scale_grid(self, tmp_path):
        out = tmp_path / "study"
        records = cmd_init_study(fast_cfg(out, seeds=[0]), [0.5, 0.25, 0.125])
        assert len(records) == 6  # two kinds x three scales
        rows = read_rows(out / "summary.csv")
        assert len(rows) == 6
        assert {r["mf"] for r in rows} == {"gaussian", "cauchy"}
        assert {r["init_scale"] for r in rows} == {"0.5", "0.25", "0.125"}
        for scale in ("0.5", "0.25", "0.125"):
            assert (out / f"trajectory_gaussian_{scale}.csv").exists()
            assert (out / f"trajectory_cauchy_{scale}.csv").exists()

    def test_initial_scales_come_from_override(self, tmp_path):
        out = tmp_path / "study"
        cmd_init_study(fast_cfg(out, seeds=[0]), [0.25])
        rows = read_rows(out / "trajectory_cauchy_0.25.csv")
        first_epoch = [r for r in rows if r["epoch"] == "0"]
        assert all(float(r["scale"]) == 0.25 for r in first_epoch)

    def test_empty_scales_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="nonempty"):
            cmd_init_study(fast_cfg(tmp_path / "s"), [])


class TestParetoSweepCommand:
    def test_points_and_front_files(self, tmp_path):
        out = tmp_path / "sweep"
        cfg = fast_cfg(out, seeds=[0])
        records, front = cmd_pareto_sweep(cfg, SweepSpec(count=5, lo=0.01, hi=10.0))
        points = read_rows(out / "points.csv")
        assert len(points) == 7  # 5 weights + 2 reference rows
        assert points[-2]["mode"] == "anfis" and points[-2]["run_id"] == "ref_anfis"
        assert points[-1]["mode"] == "x_anfis"
        front_rows = read_rows(out / "front.csv")
        point_keys = {(r["run_id"], r["r2"], r["mean_D"]) for r in points}
        assert all((r["run_id"], r["r2"], r["mean_D"]) in point_keys for r in front_rows)
        assert all(r["mode"] == "mo_anfis" for r in front_rows)

    def test_front_matches_brute_force(self, tmp_path):
        out = tmp_path / "sweep"
        cfg = fast_cfg(out, seeds=[1])
        _, front = cmd_pareto_sweep(cfg, SweepSpec(count=6, lo=0.01, hi=10.0))
        points = [r for r in read_rows(out / "points.csv") if r["mode"] == "mo_anfis"]
        vals = [(r["run_id"], float(r["r2"]), float(r["mean_D"])) for r in points]
        survivors = set()
        for rid, r2, d in vals:
            dominated = any(
                q2 >= r2 and qd >= d and (q2 > r2 or qd > d) for _, q2, qd in vals
            )
            if not dominated:
                survivors.add(rid)
        assert {p.run_id for p in front} == survivors


class TestExportPartitionCommand:
    def test_counts_and_round_trip(self, tmp_path):
        out = tmp_path / "runs"
        cmd_train(fast_cfg(out, seeds=[0], rules=4))
        model = out / "model_seed0000.json"
        centers_csv, curves_csv = cmd_export_partition(model, 17, tmp_path / "export")
        centers = read_rows(centers_csv)
        assert len(centers) == 4 * 2  # rules x features
        curves = read_rows(curves_csv)
        assert len(curves) == 4 * 2 * 17
        rb, _ = load_model(model)
        for row in curves[:40]:
            j, k = int(row["rule"]), int(row["feature"])
            expect = float(
                membership_values(rb.mf_kind, float(row["x"]), rb.centers[j, k], rb.scales[j, k])
            )
            assert float(row["membership"]) == expect

    def test_corrupt_model_rejected(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        with pytest.raises(ValueError):
            cmd_export_partition(bad, 10, tmp_path / "out")


class TestMainEntry:
    def test_train_exit_zero_and_idempotent(self, tmp_path):
        args = [
            "train", "--synth", "sinc2d", "--synth-n", "300", "--rules", "3",
            "--seeds", "0", "--epochs", "8", "--out",
        ]
        assert main(args + [str(tmp_path / "r1")]) == 0
        assert main(args + [str(tmp_path / "r2")]) == 0
        for name in ("metrics.csv", "aggregate.csv", "model_seed0000.json", "trace_seed0000.csv"):
            a = (tmp_path / "r1" / name).read_bytes()
            b = (tmp_path / "r2" / name).read_bytes()
            assert a == b, name

    def test_config_file_with_flag_override(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(
            json.dumps(
                {
                    "synth": "sinc2d",
                    "synth_n": 300,
                    "rules": 3,
                    "seeds": [0],
                    "max_epochs": 5,
                    "out": str(tmp_path / "from_config"),
                }
            )
        )
        out = tmp_path / "flag_wins"
        assert main(["train", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "metrics.csv").exists()
        assert not (tmp_path / "from_config").exists()

    def test_anfis_mode_warns_on_explicit_lr_xpass(self, tmp_path, capsys):
        args = [
            "train", "--synth", "sinc2d", "--synth-n", "300", "--rules", "3",
            "--seeds", "0", "--epochs", "5", "--mode", "anfis",
            "--lr-xpass", "0.2", "--out", str(tmp_path / "w"),
        ]
        assert main(args) == 0
        assert "lr_xpass is ignored" in capsys.readouterr().err

    def test_unknown_config_key_fails(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"synth": "sinc2d", "bogus_key": 1}))
        code = main(["train", "--config", str(cfg_path), "--out", str(tmp_path / "x")])
        assert code == 1

    def test_missing_data_source_fails(self, tmp_path):
        code = main(["train", "--seeds", "0", "--out", str(tmp_path / "x")])
        assert code == 1

    def test_init_study_requires_scales(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["init-study", "--synth", "sinc2d", "--out", str(tmp_path / "x")])
        assert exc.value.code == 2

    def test_parser_covers_spec_flags(self):
        parser = build_parser()
        args = parser.parse_args(
            [
                "pareto-sweep", "--mode", "mo_anfis",
                "--rules", "5", "--seeds", "0,1", "--weights-count", "9",
                "--weights-range", "0.01:10", "--mf", "cauchy",
                "--out", "o", "--workers", "2", "--trajectory",
            ]
        )
        assert args.weights_count == 9
        assert args.weights_range == (0.01, 10.0)
        assert args.trajectory is True
        cfg, explicit = build_config(args)
        assert cfg.weights_lo == 0.01 and cfg.weights_hi == 10.0
        assert cfg.seeds == [0, 1]
