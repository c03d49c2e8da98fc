import csv
import json

import pytest

from dickman.cli import main


def write(tmp_path, obj, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_density_row_at_two(tmp_path):
    cfg = write(tmp_path, {"theta": 1, "x_max": 3})
    assert main(["density", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    table = rows(tmp_path / "o" / "density-0" / "density.csv")
    assert table[0] == ["x", "rho", "p", "F"]
    at_two = next(r for r in table[1:] if r[0] == "2.0")
    assert float(at_two[1]) == pytest.approx(0.3068528, abs=1e-7)


def test_classify_record(tmp_path, capsys):
    cfg = write(tmp_path, {"mu": {"c": 1, "a": [0, 1]}, "p": {"c": 1, "b": [1, 1]}})
    assert main(["classify", "--config", cfg, "--out", str(tmp_path)]) == 0
    record = json.loads((tmp_path / "classify-0" / "verdict.json").read_text())
    assert record == {"kind": "Dickman", "theta": 1, "L": 1}


def test_classify_scheme(tmp_path):
    cfg = write(tmp_path, {"scheme": {"variant": "ratio", "ratios": [0.5, 1]}})
    assert main(["classify", "--config", cfg, "--out", str(tmp_path)]) == 0
    record = json.loads((tmp_path / "classify-0" / "verdict.json").read_text())
    assert record["theta"] == 2 and record["L"] == 0.5


def test_missing_key_exit_two(tmp_path, capsys):
    cfg = write(tmp_path, {"model": {"variant": "truncated_poisson", "theta0": 2}, "n_grid": [100]})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "replicates" in capsys.readouterr().err


def test_unknown_keys_listed(tmp_path, capsys):
    cfg = write(tmp_path, {"theta": 1, "colour": "red", "mixing": {"variant": "point_mass_one", "shade": 1},
                           "count": 5})
    assert main(["sample", "--config", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "colour" in err and "mixing.shade" in err


def test_domain_error_exit_two(tmp_path):
    cfg = write(tmp_path, {"N": 100, "s": 10})
    assert main(["smooth", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_capability_error_exit_three(tmp_path):
    cfg = write(tmp_path, {"model": {"variant": "deterministic", "mu": {"c": 1, "a": [1, 0, 0, 0, 0, 1]},
                                     "p": {"c": 1, "b": [1]}}, "n_grid": [100], "replicates": 100})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 3


def test_collision_refused(tmp_path):
    cfg = write(tmp_path, {"N": 1000, "s": [2, 3]})
    assert main(["smooth", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert main(["smooth", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert main(["smooth", "--config", cfg, "--out", str(tmp_path), "--seed", "1"]) == 0


def test_env_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("DICKMAN_OUT_ROOT", str(tmp_path / "env"))
    cfg = write(tmp_path, {"N": 1000, "s": 2})
    assert main(["smooth", "--config", cfg]) == 0
    record = json.loads((tmp_path / "env" / "smooth-0" / "smooth.json").read_text())
    assert record["psi"] <= 1000 and record["ratio"] == record["psi"] / 1000


def test_manifest_rerun_byte_identical(tmp_path):
    cfg = write(tmp_path, {"model": {"variant": "subset_uniform", "scheme": {"variant": "top"}},
                           "n_grid": [100, 2000], "replicates": 150})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "77"]) == 0
    first = tmp_path / "a" / "simulate-77"
    manifest = json.loads((first / "manifest.json").read_text())
    assert manifest["master_seed"] == 77 and manifest["subcommand"] == "simulate"
    assert main(["simulate", "--config", str(first / "manifest.json"), "--out", str(tmp_path / "b"),
                 "--threads", "2"]) == 0
    second = tmp_path / "b" / "simulate-77"
    for name in ("samples.csv", "distances.csv", "verdict.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    assert rows(first / "distances.csv")[0] == ["n", "M_n", "ks", "w1", "mean", "var", "var_theory"]


def test_manifest_for_other_subcommand_rejected(tmp_path):
    cfg = write(tmp_path, {"N": 1000, "s": 2})
    assert main(["smooth", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert main(["density", "--config", str(tmp_path / "smooth-0" / "manifest.json"),
                 "--out", str(tmp_path)]) == 2


def test_sample_and_inversions(tmp_path):
    cfg = write(tmp_path, {"theta": 2, "mixing": {"variant": "finite_discrete", "atoms": [0.6666666666666666,
                                                                                          1.3333333333333333]},
                           "count": 1000})
    assert main(["sample", "--config", cfg, "--out", str(tmp_path), "--seed", "3"]) == 0
    assert len(rows(tmp_path / "sample-3" / "samples.csv")) == 1001
    cfg = write(tmp_path, {"scheme": {"variant": "full"}, "n": 50, "replicates": 20, "oracle_cases": 5}, "inv.json")
    assert main(["inversions", "--config", cfg, "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "inversions-0" / "summary.json").read_text())
    assert summary["oracle_agreement"] == "5/5"


def test_floats_round_trip(tmp_path):
    cfg = write(tmp_path, {"theta": 0.7, "x_max": 4, "points_per_unit": 7})
    assert main(["density", "--config", cfg, "--out", str(tmp_path)]) == 0
    for row in rows(tmp_path / "density-0" / "density.csv")[1:]:
        for cell in row:
            assert repr(float(cell)) == cell


def test_verify_subset(tmp_path):
    cfg = write(tmp_path, {"criteria": [4]})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "verify-12345" / "verify.csv")
    assert table[1][:3] == ["4", "classifier decision table", "true"]
