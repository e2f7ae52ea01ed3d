import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from bigeo.cli import COMMANDS, main

FIXTURE = Path(__file__).parent / "fixtures" / "knee" / "manifest.json"


def run(*args, env=None):
    return subprocess.run([sys.executable, "-m", "bigeo", *args], capture_output=True, text=True, env=env)


def rows(text):
    return list(csv.reader(text.splitlines()))


@pytest.mark.parametrize("command", sorted(COMMANDS))
def test_help_lists_flags(command):
    out = run(command, "--help")
    assert out.returncode == 0
    for flag in ("--seed", "--out"):
        assert flag in out.stdout
    if command != "knee-fixture":
        for flag in ("--lambda", "--max-iters", "--tol"):
            assert flag in out.stdout


def test_usage_errors_exit_2():
    assert run("synth-equivariance", "--estimator", "lasso").returncode == 2
    assert run("r2-hist", "--translations", "-1").returncode == 2
    assert run("knee").returncode == 2
    assert run("frobnicate").returncode == 2
    assert run("synth-equivariance", "--lambda", "0").returncode == 2


def test_header_only_csv(capsys):
    assert main(["synth-equivariance", "--translations", "0"]) == 0
    assert capsys.readouterr().out == "index,side,estimator,deviation,converged\n"


def test_synth_equivariance_biinvariant(capsys):
    assert main(["synth-equivariance", "--seed", "7", "--translations", "2"]) == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == ["index", "side", "estimator", "deviation", "converged"]
    assert [r[:3] for r in table[1:]] == [["0", "left", "biinvariant"], ["0", "right", "biinvariant"],
                                          ["1", "left", "biinvariant"], ["1", "right", "biinvariant"]]
    assert all(float(r[3]) < 1e-6 and r[4] == "true" for r in table[1:])


def test_synth_equivariance_riemannian_right(capsys):
    assert main(["synth-equivariance", "--estimator", "riemannian", "--side", "right", "--translations", "5"]) == 0
    table = rows(capsys.readouterr().out)[1:]
    assert {r[1] for r in table} == {"right"}
    assert max(float(r[3]) for r in table) > 1e-2


def test_r2_hist_identity_translation(tmp_path):
    out = tmp_path / "r2.csv"
    assert main(["r2-hist", "--translations", "1", "--translation-variance", "0", "--out", str(out)]) == 0
    summary = json.loads((tmp_path / "r2.summary.json").read_text())
    (r2,) = [float(r[1]) for r in rows(out.read_text())[1:]]
    assert abs(r2 - summary["untranslated"]) < 1e-9
    assert summary["untranslated"] >= 0.9
    assert summary["seed"] == 0 and summary["count"] == 1


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["r2-hist", "--seed", "3", "--translations", "2", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.summary.json").read_bytes() == (tmp_path / "b.summary.json").read_bytes()
    assert b"\r" not in a.read_bytes()


def test_seed_from_environment(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["r2-hist", "--seed", "5", "--translations", "1", "--out", str(a)]) == 0
    monkeypatch.setenv("BIGEO_SEED", "5")
    assert main(["r2-hist", "--translations", "1", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("BIGEO_SEED", "five")
    with pytest.raises(SystemExit) as exc:
        main(["r2-hist", "--translations", "1"])
    assert exc.value.code == 2


def test_knee_fixture_norms_decrease(tmp_path):
    out = tmp_path / "knee.csv"
    assert main(["knee", "--manifest", str(FIXTURE), "--out", str(out)]) == 0
    table = rows(out.read_text())
    assert table[0] == ["grade", "t", "translational_norm"]
    assert [r[1] for r in table[1:]] == ["0", "0.25", "0.5", "0.75", "1"]
    norms = [float(r[2]) for r in table[1:]]
    assert all(a > b for a, b in zip(norms, norms[1:]))
    fit = json.loads((tmp_path / "knee.fit.json").read_text())
    assert fit["converged"] and "iterations" in fit and fit["final_update_norm"] < 1e-9


def copy_fixture(tmp_path, n_per_grade=1):
    entries = json.loads(FIXTURE.read_text())
    chosen = [next(e for e in entries if e["kl_grade"] == g) for g in range(5)][: 5 * n_per_grade]
    for e in chosen:
        for key in ("femur_path", "tibia_path"):
            shutil.copy(FIXTURE.parent / e[key], tmp_path / e[key])
    return chosen


def test_knee_identical_subjects_constant_norms(tmp_path, capsys):
    first = copy_fixture(tmp_path)[0]
    entries = [dict(first, subject_id=f"S{g}", kl_grade=g) for g in range(5)]
    (tmp_path / "m.json").write_text(json.dumps(entries))
    assert main(["knee", "--manifest", str(tmp_path / "m.json")]) == 0
    norms = [float(r[2]) for r in rows(capsys.readouterr().out)[1:]]
    assert max(norms) - min(norms) < 1e-9


def test_knee_missing_file_names_path(tmp_path):
    entries = copy_fixture(tmp_path)
    entries[2]["tibia_path"] = "gone.xyz"
    (tmp_path / "m.json").write_text(json.dumps(entries))
    out = run("knee", "--manifest", str(tmp_path / "m.json"))
    assert out.returncode == 1
    assert "gone.xyz" in out.stderr


def test_knee_missing_manifest():
    out = run("knee", "--manifest", "no/such/manifest.json")
    assert out.returncode == 1 and "no/such/manifest.json" in out.stderr


def test_knee_degenerate_cloud_names_subject(tmp_path):
    entries = copy_fixture(tmp_path)
    (tmp_path / "flat.xyz").write_text("".join(f"{i} {i * i % 7} 0\n" for i in range(10)))
    entries[3]["femur_path"] = "flat.xyz"
    (tmp_path / "m.json").write_text(json.dumps(entries))
    out = run("knee", "--manifest", str(tmp_path / "m.json"))
    assert out.returncode == 1
    assert entries[3]["subject_id"] in out.stderr


def test_knee_malformed_off(tmp_path):
    entries = copy_fixture(tmp_path)
    (tmp_path / "bad.off").write_text("OFX\n1 0 0\n0 0 0\n")
    entries[0]["femur_path"] = "bad.off"
    (tmp_path / "m.json").write_text(json.dumps(entries))
    out = run("knee", "--manifest", str(tmp_path / "m.json"))
    assert out.returncode == 1
    assert "OFF" in out.stderr


def test_knee_fixture_command(tmp_path, capsys):
    assert main(["knee-fixture", "--out", str(tmp_path), "--per-grade", "2", "--vertices", "30"]) == 0
    entries = json.loads((tmp_path / "manifest.json").read_text())
    assert len(entries) == 10 and {e["kl_grade"] for e in entries} == set(range(5))
    assert main(["knee", "--manifest", str(tmp_path / "manifest.json")]) == 0
