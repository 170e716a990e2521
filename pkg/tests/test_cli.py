import json

import numpy as np
import pytest

from priorshift import fileio
from priorshift.calibration import CalibrationParams
from priorshift.cli import main
from priorshift.core import as_label_vector, as_prediction_matrix


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out-dir", str(out), "--n-train", "500", "--n-val", "1000",
                 "--n-test", "2000", "--seed", "3"]) == 0
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_synth_files(data):
    names = {p.name for p in data.iterdir()}
    for split in ("train", "val", "test"):
        assert {f"{split}_preds.csv", f"{split}_logits.csv", f"{split}_labels.csv"} <= names
    cms = fileio.read_json(data / "true_cm.json")
    assert cms["hard"][0][0] == pytest.approx(0.8413, abs=1e-4)


def test_synth_same_seed_identical(tmp_path, data):
    assert main(["synth", "--out-dir", str(tmp_path), "--n-train", "500", "--n-val", "1000",
                 "--n-test", "2000", "--seed", "3"]) == 0
    for f in data.iterdir():
        assert (tmp_path / f.name).read_bytes() == f.read_bytes()


def test_estimate_adapt_evaluate(capsys, data, tmp_path):
    code, out, _ = run(capsys, "estimate", "--method", "scm-l", "--val-preds", data / "val_preds.csv",
                       "--val-labels", data / "val_labels.csv", "--test-preds", data / "test_preds.csv")
    assert code == 0
    report = json.loads(out)
    assert report["in_simplex"] and abs(report["priors"][0] - 0.9) < 0.05
    est = tmp_path / "est.json"
    est.write_text(out)
    adapted = tmp_path / "adapted.csv"
    code, _, _ = run(capsys, "adapt", "--test-preds", data / "test_preds.csv", "--new-priors", est,
                     "--val-preds", data / "val_preds.csv", "--out", adapted)
    assert code == 0
    _, base, _ = run(capsys, "evaluate", "--preds", data / "test_preds.csv",
                     "--labels", data / "test_labels.csv")
    _, after, _ = run(capsys, "evaluate", "--preds", adapted, "--labels", data / "test_labels.csv")
    assert json.loads(after)["accuracy"] > json.loads(base)["accuracy"]


def test_adapt_identity(capsys, data, tmp_path):
    out = tmp_path / "same.csv"
    code, _, _ = run(capsys, "adapt", "--test-preds", data / "test_preds.csv",
                     "--new-priors", data / "train_priors.json",
                     "--train-priors", data / "train_priors.json", "--out", out)
    assert code == 0
    _, orig = fileio.read_matrix(data / "test_preds.csv")
    _, same = fileio.read_matrix(out)
    np.testing.assert_allclose(same, orig, atol=1e-15)


def test_bbse_weights_clamped_warning(capsys, tmp_path):
    preds = tmp_path / "p.csv"
    fileio.write_matrix(preds, [[0.5, 0.5], [0.3, 0.7]])
    w = tmp_path / "w.json"
    fileio.write_vector_file(w, "weights", [8 / 3, -2 / 3])
    code, _, err = run(capsys, "adapt", "--test-preds", preds, "--new-priors", w, "--out", tmp_path / "o.csv")
    assert code == 0
    assert "warning:" in err and "clamped" in err


def test_calibrate_roundtrip(capsys, data, tmp_path):
    params = tmp_path / "cal.json"
    code, out, _ = run(capsys, "calibrate", "--calibration", "bcts", "--val-logits", data / "val_logits.csv",
                       "--val-labels", data / "val_labels.csv", "--out", params)
    assert code == 0 and "nll_after" in out
    p = fileio.read_calibration(params)
    assert abs(p.temperature - 1.0) < 0.2
    code, out, _ = run(capsys, "estimate", "--calibration-params", params, "--method", "em",
                       "--test-preds", data / "test_logits.csv", "--val-preds", data / "val_logits.csv")
    assert code == 0


def test_file_roundtrips(tmp_path):
    rng = np.random.default_rng(0)
    m = rng.dirichlet(np.ones(3), size=20)
    fileio.write_matrix(tmp_path / "m.csv", m, "p")
    kind, back = fileio.read_matrix(tmp_path / "m.csv")
    assert kind == "p"
    np.testing.assert_array_equal(back, m)
    fileio.write_vector_file(tmp_path / "v.json", "priors", [1 / 3, 2 / 3])
    assert fileio.read_vector_file(tmp_path / "v.json")[1].tolist() == [1 / 3, 2 / 3]
    params = CalibrationParams(1.2345678901234567, [0.1, -0.2, 0.0])
    fileio.write_calibration(tmp_path / "c.json", params, 3)
    back = fileio.read_calibration(tmp_path / "c.json")
    assert abs(back.temperature - params.temperature) < 1e-9
    np.testing.assert_allclose(back.biases, params.biases, atol=1e-9)
    y = rng.integers(0, 3, 30)
    fileio.write_labels(tmp_path / "y.csv", y)
    np.testing.assert_array_equal(fileio.read_labels(tmp_path / "y.csv"), y)


def test_exit_codes(capsys, tmp_path, data):
    code, _, err = run(capsys, "estimate", "--method", "rlls", "--test-preds", data / "test_preds.csv")
    assert code == 2 and "scm-l" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("p_0,p_1\n0.5,0.5\n0.5,x\n")
    code, _, err = run(capsys, "evaluate", "--preds", bad, "--labels", data / "test_labels.csv")
    assert code == 3 and "bad.csv:3:2" in err
    singular = tmp_path / "sing.csv"
    fileio.write_matrix(singular, np.full((10, 2), 0.5))
    labels = tmp_path / "y.csv"
    fileio.write_labels(labels, [0, 1] * 5)
    code, _, err = run(capsys, "estimate", "--method", "cm", "--val-preds", singular, "--val-labels", labels,
                       "--test-preds", singular)
    assert code == 4 and "cm-l" in err
    code, out, _ = run(capsys, "estimate", "--method", "cm-l", "--val-preds", singular, "--val-labels", labels,
                       "--test-preds", singular)
    assert code == 0 and json.loads(out)["in_simplex"]


def test_row_mismatch_is_data_error(capsys, tmp_path, data):
    short = tmp_path / "y.csv"
    fileio.write_labels(short, [0, 1])
    code, _, err = run(capsys, "evaluate", "--preds", data / "test_preds.csv", "--labels", short)
    assert code == 3 and "mismatch" in err


def test_sweep(capsys, data, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--method", "none,scm-l", "--sizes", "10,1000", "--repeats", "3",
                     "--val-preds", data / "val_preds.csv", "--val-labels", data / "val_labels.csv",
                     "--test-preds", data / "test_preds.csv", "--test-labels", data / "test_labels.csv",
                     "--out", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "size,method,mean_accuracy,std_accuracy,median_accuracy"
    assert len(lines) == 5


def test_counter_example_flagged_outside_simplex(capsys, tmp_path):
    # validation decisions give the hard CM [[0.8, 0.2], [0.2, 0.8]]; every test row decides class 0
    val = [[0.9, 0.1]] * 8 + [[0.1, 0.9]] * 2 + [[0.9, 0.1]] * 2 + [[0.1, 0.9]] * 8
    fileio.write_matrix(tmp_path / "val.csv", val)
    fileio.write_labels(tmp_path / "val_y.csv", [0] * 10 + [1] * 10)
    fileio.write_matrix(tmp_path / "test.csv", [[0.9, 0.1]] * 5)
    args = ["--val-preds", tmp_path / "val.csv", "--val-labels", tmp_path / "val_y.csv",
            "--test-preds", tmp_path / "test.csv"]
    code, out, err = run(capsys, "estimate", "--method", "cm", *args)
    report = json.loads(out)
    assert code == 0 and not report["in_simplex"] and "outside the simplex" in err
    np.testing.assert_allclose(report["priors"], [4 / 3, -1 / 3], atol=1e-12)
    code, out, _ = run(capsys, "estimate", "--method", "cm-l", *args)
    np.testing.assert_allclose(json.loads(out)["priors"], [1.0, 0.0], atol=1e-12)


def test_calibrate_none_and_mismatch(capsys, data, tmp_path):
    code, out, _ = run(capsys, "calibrate", "--val-logits", data / "val_logits.csv",
                       "--val-labels", data / "val_labels.csv")
    obj = json.loads(out)
    assert code == 0 and obj["temperature"] == 1.0 and obj["biases"] == [0.0, 0.0]
    code, _, err = run(capsys, "calibrate", "--calibration", "ts", "--val-logits", data / "val_logits.csv",
                       "--val-labels", data / "test_labels.csv")
    assert code == 3 and "val_logits.csv" in err and "test_labels.csv" in err


def test_oracle_passthrough(capsys, data):
    code, out, _ = run(capsys, "estimate", "--method", "oracle", "--true-priors", data / "test_priors.json",
                       "--test-preds", data / "test_preds.csv", "--val-preds", data / "val_preds.csv")
    assert code == 0 and json.loads(out)["priors"] == [0.9, 0.1]


def test_adapt_worked_row(capsys, tmp_path):
    fileio.write_matrix(tmp_path / "p.csv", [[0.5, 0.5]])
    fileio.write_vector_file(tmp_path / "train.json", "priors", [0.25, 0.75])
    fileio.write_vector_file(tmp_path / "new.json", "priors", [0.5, 0.5])
    code, _, _ = run(capsys, "adapt", "--test-preds", tmp_path / "p.csv", "--new-priors", tmp_path / "new.json",
                     "--train-priors", tmp_path / "train.json", "--out", tmp_path / "o.csv")
    assert code == 0
    np.testing.assert_allclose(fileio.read_matrix(tmp_path / "o.csv")[1], [[0.75, 0.25]], atol=1e-9)


def test_sweep_full_size_matches_single_run(capsys, data, tmp_path):
    val = ["--val-preds", data / "val_preds.csv", "--val-labels", data / "val_labels.csv"]
    code, out, _ = run(capsys, "sweep", "--method", "scm-l", "--sizes", "2000", "--repeats", "1", *val,
                       "--test-preds", data / "test_preds.csv", "--test-labels", data / "test_labels.csv")
    assert code == 0
    swept = float(out.splitlines()[1].split(",")[2])
    _, est, _ = run(capsys, "estimate", "--method", "scm-l", *val, "--test-preds", data / "test_preds.csv")
    (tmp_path / "est.json").write_text(est)
    run(capsys, "adapt", "--test-preds", data / "test_preds.csv", "--new-priors", tmp_path / "est.json",
        "--val-preds", data / "val_preds.csv", "--out", tmp_path / "a.csv")
    _, acc, _ = run(capsys, "evaluate", "--preds", tmp_path / "a.csv", "--labels", data / "test_labels.csv")
    assert swept == json.loads(acc)["accuracy"]
    code, _, err = run(capsys, "sweep", "--method", "scm-l", "--sizes", "2001", "--repeats", "1", *val,
                       "--test-preds", data / "test_preds.csv", "--test-labels", data / "test_labels.csv")
    assert code == 3 and "2001" in err


def test_synth_files_parse(data):
    for split in ("train", "val", "test"):
        kind, preds = fileio.read_matrix(data / f"{split}_preds.csv")
        assert kind == "p"
        as_prediction_matrix(preds)
        as_label_vector(fileio.read_labels(data / f"{split}_labels.csv"), 2)
    assert fileio.read_vector_file(data / "test_priors.json")[0] == "priors"
