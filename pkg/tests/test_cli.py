import numpy as np
import pytest

from deltapinn.cli import main, read_field_csv, write_field_csv
from deltapinn.errors import FormatError
from deltapinn.problems import seconds_to_nondim
from deltapinn.training import load_checkpoint, read_metrics

SMALL_TRAIN = [
    "--override", "net.num_subnets=1",
    "--override", "net.layers=2",
    "--override", "net.width=8",
    "--override", "net.scales=1",
    "--override", "trainer.iterations=60",
    "--override", "trainer.batch_interior0=32",
    "--override", "trainer.batch_interior1=32",
    "--override", "trainer.batch_boundary=32",
    "--override", "trainer.eval_every=30",
    "--override", "reference.terms=50",
    "--override", "reference.mesh=21",
]


def test_train_writes_manifest_metrics_checkpoint(tmp_path):
    out = tmp_path / "run"
    code = main(["train", "--problem", "poisson", "--out", str(out), *SMALL_TRAIN])
    assert code == 0
    manifest = (out / "manifest.cfg").read_text()
    assert manifest.startswith("# deltapinn-config 1\n")
    assert "problem.name = poisson" in manifest
    rows = read_metrics(out / "metrics.csv")
    assert len(rows) == 60
    assert rows[0]["iter"] == 0 and rows[-1]["iter"] == 59
    assert rows[-1]["l2_mean"] is not None  # final iteration is evaluated
    net = load_checkpoint(out / "final.bin")
    assert net.config.width == 8


def test_manifest_refeed_reproduces_metrics_bytes(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    assert main(["train", "--problem", "poisson", "--out", str(d1), *SMALL_TRAIN]) == 0
    assert (
        main(["train", "--config", str(d1 / "manifest.cfg"), "--out", str(d2)]) == 0
    )
    assert (d1 / "metrics.csv").read_bytes() == (d2 / "metrics.csv").read_bytes()
    assert (d1 / "manifest.cfg").read_bytes() == (d2 / "manifest.cfg").read_bytes()
    assert (d1 / "final.bin").read_bytes() == (d2 / "final.bin").read_bytes()


def test_seed_flag_changes_metrics(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    base = ["train", "--problem", "poisson", *SMALL_TRAIN]
    assert main([*base, "--out", str(d1), "--seed", "0"]) == 0
    assert main([*base, "--out", str(d2), "--seed", "1"]) == 0
    assert (d1 / "metrics.csv").read_bytes() != (d2 / "metrics.csv").read_bytes()


def test_eval_scores_checkpoint_and_writes_fields(tmp_path):
    out = tmp_path / "run"
    assert main(["train", "--problem", "poisson", "--out", str(out), *SMALL_TRAIN]) == 0
    ev = tmp_path / "ev"
    code = main(
        [
            "eval",
            "--checkpoint", str(out / "final.bin"),
            "--problem", "poisson",
            "--out", str(ev),
            "--override", "reference.terms=50",
            "--override", "reference.mesh=21",
        ]
    )
    assert code == 0
    for name in ("prediction.csv", "reference.csv", "abs_error.csv"):
        points, values, columns = read_field_csv(ev / name)
        assert columns == ["u"]
        assert points.shape[1] == 2
        assert values.shape == (points.shape[0], 1)
    pred_pts, pred, _ = read_field_csv(ev / "prediction.csv")
    ref_pts, ref, _ = read_field_csv(ev / "reference.csv")
    _, err, _ = read_field_csv(ev / "abs_error.csv")
    assert np.array_equal(pred_pts, ref_pts)
    assert np.allclose(err, np.abs(pred - ref))
    summary = (ev / "l2_summary.csv").read_text()
    assert summary.startswith("# deltapinn-l2 1\n")
    assert "mean," in summary


def test_eval_rejects_architecture_problem_mismatch(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["train", "--problem", "poisson", "--out", str(out), *SMALL_TRAIN]) == 0
    code = main(
        [
            "eval",
            "--checkpoint", str(out / "final.bin"),
            "--problem", "maxwell",
            "--out", str(tmp_path / "ev"),
        ]
    )
    assert code == 2
    assert "maxwell" in capsys.readouterr().err


def test_unknown_override_key_exits_2(tmp_path, capsys):
    code = main(
        [
            "train",
            "--problem", "poisson",
            "--out", str(tmp_path / "x"),
            "--override", "trainer.momentum=0.9",
        ]
    )
    assert code == 2
    assert "trainer.momentum" in capsys.readouterr().err


def test_reference_fdtd_writes_snapshots(tmp_path):
    out = tmp_path / "ref"
    code = main(
        [
            "reference", "fdtd",
            "--out", str(out),
            "--resolution", "0.1",
            "--snapshots", "0.3 0.5",
        ]
    )
    assert code == 0
    points, values, columns = read_field_csv(out / "fdtd_00.csv")
    assert columns == ["Ex", "Ey", "Hz"]
    assert points.shape == (400, 3)  # 20x20 cells, (x, y, t)
    assert np.unique(points[:, 2]).size == 1
    _, _, _ = read_field_csv(out / "fdtd_01.csv")


def test_reference_fdtd_unstable_courant_exits_2(tmp_path, capsys):
    code = main(
        [
            "reference", "fdtd",
            "--out", str(tmp_path / "x"),
            "--resolution", "0.1",
            "--courant", "1.5",
            "--snapshots", "0.3",
        ]
    )
    assert code == 2
    assert "courant" in capsys.readouterr().err.lower()


def test_reference_times_ns_conversion_recorded(tmp_path):
    out = tmp_path / "ref"
    code = main(
        [
            "reference", "fdtd",
            "--out", str(out),
            "--resolution", "0.1",
            "--times-ns", "1.0",
        ]
    )
    assert code == 0
    header = (out / "fdtd_00.csv").read_text().splitlines()[:4]
    note = next(line for line in header if "ns" in line)
    assert f"{seconds_to_nondim(1e-9):.6f}"[:6] in note


def test_reference_poisson_series(tmp_path):
    out = tmp_path / "ref"
    code = main(
        [
            "reference", "poisson-series",
            "--out", str(out),
            "--terms", "50",
            "--mesh", "11",
        ]
    )
    assert code == 0
    points, values, columns = read_field_csv(out / "poisson_series.csv")
    assert columns == ["u"]
    assert values.shape[0] == points.shape[0] <= 81


def test_reference_barry_mercer_series(tmp_path):
    out = tmp_path / "ref"
    code = main(
        [
            "reference", "barry-mercer-series",
            "--out", str(out),
            "--modes", "8",
            "--mesh", "7",
            "--override", "reference.num_times=2",
        ]
    )
    assert code == 0
    points, values, columns = read_field_csv(out / "barry_mercer_series.csv")
    assert columns == ["u", "v", "p"]
    assert points.shape[1] == 3 and values.shape[1] == 3


def test_out_root_env_var_supplies_default_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("DELTAPINN_OUT_ROOT", str(tmp_path))
    code = main(
        ["reference", "poisson-series", "--terms", "20", "--mesh", "7"]
    )
    assert code == 0
    assert (tmp_path / "reference-poisson" / "poisson_series.csv").exists()


def test_field_csv_round_trip_and_version_check(tmp_path):
    points = np.array([[0.1, 0.2], [0.3, 0.4]])
    values = np.array([[1.0 / 3.0], [2.0 / 7.0]])
    path = tmp_path / "f.csv"
    write_field_csv(path, points, values, ("u",), notes=["context line"])
    p2, v2, cols = read_field_csv(path)
    assert np.array_equal(p2, points)
    assert np.array_equal(v2, values)  # 17 significant digits round trip
    assert cols == ["u"]
    bad = tmp_path / "bad.csv"
    bad.write_text(path.read_text().replace("field 1", "field 9", 1))
    with pytest.raises(FormatError):
        read_field_csv(bad)


def test_missing_config_file_exits_2(tmp_path, capsys):
    code = main(
        ["train", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "x")]
    )
    assert code == 2
