import json
import subprocess
import sys

import pytest

from vecmol.cli import EXIT_INPUT, EXIT_OK, EXIT_USAGE, PARAMS_ENV, main, read_manifest
from vecmol.fixtures import FixtureSpec, dominated_corpus, generate, standard_corpus, write_corpus
from vecmol.params import DEFAULT_PARAMS


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    write_corpus(standard_corpus(12, seed=3), d)
    return d


def test_parse_prints_smiles(tmp_path, capsys):
    fx = generate(FixtureSpec(0, "toluene"))
    src = tmp_path / "t.instr"
    src.write_text(fx.instructions)
    assert main(["parse", str(src)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == fx.smiles


def test_parse_writes_outputs(tmp_path):
    fx = generate(FixtureSpec(0, "anisole"))
    src = tmp_path / "a.instr"
    src.write_text(fx.instructions)
    out = {k: tmp_path / f"o.{k}" for k in ("cdxml", "lg", "smiles", "dot")}
    args = ["parse", str(src)] + [a for k, p in out.items() for a in (f"--{k}", str(p))]
    assert main(args) == EXIT_OK
    assert out["smiles"].read_text().strip() == fx.smiles
    assert out["cdxml"].read_text().startswith("<?xml")
    assert out["dot"].read_text().startswith("graph")


@pytest.mark.parametrize("content", [None, "", "\x00\x01 not a stream"])
def test_bad_input_exit_code(tmp_path, content):
    src = tmp_path / "bad.instr"
    if content is not None:
        src.write_text(content)
    assert main(["parse", str(src)]) == EXIT_INPUT


def test_usage_errors():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == EXIT_USAGE


def test_params_env_var(tmp_path, monkeypatch):
    fx = generate(FixtureSpec(0, "propane"))
    src = tmp_path / "p.instr"
    src.write_text(fx.instructions)
    monkeypatch.setenv(PARAMS_ENV, str(tmp_path / "missing.params"))
    assert main(["parse", str(src)]) == EXIT_INPUT
    bad = tmp_path / "bad.params"
    bad.write_text("NOT_A_PARAM=1\n")
    monkeypatch.setenv(PARAMS_ENV, str(bad))
    assert main(["parse", str(src)]) == EXIT_INPUT
    good = tmp_path / "good.params"
    good.write_text(DEFAULT_PARAMS.dumps())
    monkeypatch.setenv(PARAMS_ENV, str(good))
    assert main(["parse", str(src)]) == EXIT_OK


def test_batch_is_deterministic_across_jobs(corpus, tmp_path, capsys):
    manifest = corpus / "manifest.tsv"
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["batch", str(manifest), "--out", str(a), "--jobs", "1"]) == EXIT_OK
    capsys.readouterr()
    assert main(["batch", str(manifest), "--out", str(b), "--jobs", "3"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["molecules"] == 12
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_batch_survives_corrupt_file(corpus, tmp_path):
    rows = read_manifest(corpus / "manifest.tsv")
    bad = tmp_path / "corrupt.instr"
    bad.write_text("1 0 0 1 0 0 cm\n10 20 m\n")
    lines = [f"{r.truth_lg}\t{r.truth_smiles}\t{r.input_path}" for r in rows[:3]]
    lines.append(f"{rows[0].truth_lg}\t{rows[0].truth_smiles}\t{bad}")
    m = tmp_path / "manifest.tsv"
    m.write_text("\n".join(lines) + "\n")
    out = tmp_path / "out"
    assert main(["batch", str(m), "--out", str(out)]) == EXIT_OK
    failures = (out / "failures.tsv").read_text()
    assert "corrupt" in failures
    assert len(list(out.glob("*.smi"))) == 3


def test_eval_reports_perfect_self_score(corpus, tmp_path):
    manifest = corpus / "manifest.tsv"
    preds = tmp_path / "preds"
    assert main(["batch", str(manifest), "--out", str(preds)]) == EXIT_OK
    report = tmp_path / "r.json"
    html = tmp_path / "r.html"
    assert main(["eval", str(manifest), str(preds), "--json", str(report), "--html", str(html)]) == EXIT_OK
    doc = json.loads(report.read_text())
    assert doc["exact_match_rate"] == 1.0 and doc["structure_plus_class_rate"] == 1.0
    assert html.read_text().startswith("<!DOCTYPE html>")


def test_eval_missing_predictions(corpus, tmp_path, capsys):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["eval", str(corpus / "manifest.tsv"), str(empty)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["exact_match_rate"] == 0.0
    assert all(r["error"] == "missing prediction" for r in doc["per_molecule"])


def test_tune_one_point_grid(tmp_path):
    d = tmp_path / "dom"
    write_corpus(dominated_corpus()[:2], d)
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps([{"name": "s", "grid": {"MAX_ALPHA_DIST": [2.5]}}]))
    out, log = tmp_path / "tuned.params", tmp_path / "log.jsonl"
    assert main(["tune", str(d / "manifest.tsv"), "--grid", str(grid), "--out", str(out),
                 "--log", str(log)]) == EXIT_OK
    assert "MAX_ALPHA_DIST=2.5" in out.read_text().replace(" ", "")
    assert len(log.read_text().strip().splitlines()) == 1


def test_fixtures_command(tmp_path):
    assert main(["fixtures", str(tmp_path), "--count", "5", "--seed", "2"]) == EXIT_OK
    assert len((tmp_path / "manifest.tsv").read_text().strip().splitlines()) == 5


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "vecmol", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "vecmol" in r.stdout
