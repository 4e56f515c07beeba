import csv
import io
import json

import numpy as np
import pytest

from pmcut.cli import main, oracle_check_rows, sweep_rows
from pmcut.errors import InvalidArgumentError
from pmcut.imaging import RawImage, read_image, read_label_map, write_image, write_label_map


@pytest.fixture
def image(tmp_path):
    rng = np.random.default_rng(0)
    data = np.full((20, 24), 60, np.uint8)
    data[:, 12:] = 190
    data = np.clip(data + rng.integers(-10, 11, data.shape), 0, 255).astype(np.uint8)
    path = tmp_path / "in.pgm"
    write_image(RawImage.from_array(data), path)
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_noise_gaussian_zero_is_byte_identical(image, tmp_path, capsys):
    out = tmp_path / "n.pgm"
    code, text, _ = run(["noise", image, out, "--noise-type", "gaussian", "--noise-level", 0], capsys)
    assert code == 0 and "modified pixels: 0" in text
    assert out.read_bytes() == image.read_bytes()


def test_noise_sp_count_and_determinism(image, tmp_path, capsys):
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    code, text, _ = run(["noise", image, a, "--noise-type", "sp", "--noise-level", 0.25, "--seed", 3], capsys)
    assert code == 0 and "(overwritten: 120)" in text
    run(["noise", image, b, "--noise-type", "sp", "--noise-level", 0.25, "--seed", 3], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_noise_keeps_plain_format(tmp_path, capsys):
    src = tmp_path / "p.pgm"
    write_image(RawImage.from_array(np.zeros((3, 3), np.uint8)), src, plain=True)
    out = tmp_path / "q.pgm"
    assert run(["noise", src, out, "--noise-type", "sp", "--noise-level", 0.5], capsys)[0] == 0
    assert out.read_bytes()[:2] == b"P2"


def test_segment_writes_all_outputs(image, tmp_path, capsys):
    paths = {k: tmp_path / f"{k}.{ext}" for k, ext in (("labels", "pgm"), ("denoised", "pgm"), ("overlay", "ppm"), ("meta", "json"))}
    argv = ["segment", image, "--k", 4, "--node-limit", 20, "-v"]
    for k, p in paths.items():
        argv += [f"--{k}", p]
    code, text, _ = run(argv, capsys)
    assert code == 0
    assert "superpixels:" in text and "lambda:" in text and "gap: min" in text
    labels = read_label_map(paths["labels"])
    assert labels.shape == (20, 24)
    assert read_image(paths["overlay"]).channels == 3
    meta = json.loads(paths["meta"].read_text())
    assert meta["params"]["k"] == 4 and len(meta["patches"]) == 4
    assert meta["n_superpixels"] == labels.max() + 1


def test_segment_independent_of_workers(image, tmp_path, capsys):
    outs = []
    for workers in (1, 2):
        lab, den = tmp_path / f"l{workers}.pgm", tmp_path / f"d{workers}.pgm"
        code, _, _ = run(["segment", image, "--k", 4, "--node-limit", 20, "--workers", workers, "--labels", lab, "--denoised", den], capsys)
        assert code == 0
        outs.append((lab.read_bytes(), den.read_bytes()))
    assert outs[0] == outs[1]


def test_segment_usage_errors(image, tmp_path, capsys):
    code, _, err = run(["segment", image, "--k", 100000], capsys)
    assert code == 1 and "superpixel count" in err
    with pytest.raises(SystemExit) as info:
        main(["segment", str(image)])  # --k is required
    assert info.value.code == 1


def test_missing_input_exits_2_without_outputs(tmp_path, capsys):
    lab = tmp_path / "l.pgm"
    code, _, err = run(["segment", tmp_path / "none.pgm", "--k", 4, "--labels", lab], capsys)
    assert code == 2 and "none.pgm" in err
    assert not lab.exists()


def test_malformed_input_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n4 4\n255\n\x00")
    code, _, err = run(["noise", bad, tmp_path / "o.pgm", "--noise-type", "sp", "--noise-level", 0.1], capsys)
    assert code == 2 and "bad.pgm" in err and "byte" in err
    assert not (tmp_path / "o.pgm").exists()


def test_metrics_csv(tmp_path, capsys):
    gt = np.zeros((6, 6), int)
    gt[3:] = 1
    write_label_map(gt, tmp_path / "gt.pgm")
    write_label_map(gt, tmp_path / "sp.pgm")
    code, text, _ = run(["metrics", tmp_path / "sp.pgm", "--gt", tmp_path / "gt.pgm", "--mode", "best", "--mode", "avg", "--k", 2], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["mode"] for r in rows] == ["best", "avg"]
    assert float(rows[0]["ue"]) == 0.0 and float(rows[0]["rec"]) == 1.0
    assert rows[0]["image"] == "sp" and rows[0]["k_requested"] == "2"


def test_metrics_shape_mismatch_and_missing_gt(tmp_path, capsys):
    write_label_map(np.zeros((4, 4), int), tmp_path / "sp.pgm")
    write_label_map(np.zeros((4, 5), int), tmp_path / "gt.pgm")
    assert run(["metrics", tmp_path / "sp.pgm", "--gt", tmp_path / "gt.pgm"], capsys)[0] == 1
    with pytest.raises(SystemExit) as info:
        main(["metrics", str(tmp_path / "sp.pgm")])
    assert info.value.code == 1


def test_oracle_check_passes(capsys):
    code, text, _ = run(["oracle-check", "--sizes", "2x3,3x3", "--seeds", "0:3", "--lambdas", "0.05,0.2"], capsys)
    assert code == 0
    assert text.count("PASS") == 4 and "FAIL" not in text


def test_oracle_check_rejects_large_grids(capsys):
    assert run(["oracle-check", "--sizes", "5x5"], capsys)[0] == 1
    with pytest.raises(InvalidArgumentError):
        oracle_check_rows([(4, 5)], [0], [0.1])


def test_oracle_check_failure_exit_code(monkeypatch, capsys):
    import pmcut.cli as cli

    def broken(y, lam):
        class R:
            objective = -1.0

        return R()

    monkeypatch.setattr(cli, "brute_force_oracle", broken)
    code, text, _ = run(["oracle-check", "--sizes", "2x2", "--seeds", "0", "--lambdas", "0.1"], capsys)
    assert code == 3 and "FAIL" in text


def test_sweep_rows_and_csv(image, tmp_path, capsys):
    gt = np.zeros((20, 24), int)
    gt[:, 12:] = 1
    write_label_map(gt, tmp_path / "gt.pgm")
    code, text, _ = run(["sweep", image, "--gt", tmp_path / "gt.pgm", "--k", 4, "--sigmas", "0.4,0.6", "--node-limit", "5,10"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 4
    assert {(r["sigma"], r["node_limit"]) for r in rows} == {(s, n) for s in ("0.4", "0.6") for n in ("5", "10")}
    direct = sweep_rows(np.zeros((8, 8)), [np.zeros((8, 8), int)], 4, [0.5], node_limits=[5])
    assert direct[0]["ue"] == 0.0 and direct[0]["k_superpixels"] == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["noise", "a", "b", "--noise-type", "poisson", "--noise-level", "0.1"],
        ["oracle-check", "--sizes", "3by3"],
        ["oracle-check", "--seeds", "x"],
        ["sweep", "a", "--gt", "g", "--k", "4", "--sigmas", "0.1,,"],
    ],
)
def test_argument_errors_exit_1(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1
