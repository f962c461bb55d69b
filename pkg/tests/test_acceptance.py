"""One test per acceptance criterion, each printing a PASS/FAIL line."""

import json
import subprocess
import sys
import time
from pathlib import Path

from vecmol.cli import main
from vecmol.evaluation import CorpusItem, evaluate_corpus
from vecmol.fixtures import (DOMINATED_WINNERS, ablation_corpus, divergence_corpus, dominated_corpus,
                             standard_corpus, thickness_corpus, write_corpus)
from vecmol.params import DEFAULT_PARAMS
from vecmol.pipeline import parse_text
from vecmol.smiles import write_smiles

TESTS = Path(__file__).parent


def _report(fixtures, params=DEFAULT_PARAMS):
    items = []
    for fx in fixtures:
        try:
            mol = parse_text(fx.instructions, "instr", params).molecule
            items.append(CorpusItem(fx.name, fx.truth, fx.smiles, mol, write_smiles(mol)))
        except Exception as e:  # a crash is a miss, not a test error
            items.append(CorpusItem(fx.name, fx.truth, fx.smiles, None, None, str(e)))
    return evaluate_corpus(items)


def test_criterion_1_corpus_correctness(criterion):
    start = time.perf_counter()
    fixtures = standard_corpus(200)
    rep = _report(fixtures)
    elapsed = time.perf_counter() - start
    has_ion_pair = any(f.spec.template == "ion_pair" for f in fixtures)
    ok = (len(fixtures) >= 200 and has_ion_pair and rep.exact_match_rate == 1.0
          and rep.structure_plus_class_rate == 1.0 and elapsed < 30.0)
    criterion(1, ok, f"n={len(fixtures)} exact={rep.exact_match_rate:.4f} "
                     f"structure+class={rep.structure_plus_class_rate:.4f} time={elapsed:.1f}s")


def test_criterion_2_throughput(criterion, tmp_path, capsys):
    manifest = write_corpus(standard_corpus(200), tmp_path / "corpus")
    capsys.readouterr()
    code = main(["batch", str(manifest), "--out", str(tmp_path / "out"), "--jobs", "1"])
    summary = json.loads(capsys.readouterr().out)
    ok = code == 0 and summary["molecules"] == 200 and summary["mean_ms"] < 50.0
    criterion(2, ok, f"mean={summary['mean_ms']:.2f} ms/molecule over {summary['molecules']}")


def test_criterion_3_pruning_ablation(criterion):
    fixtures = ablation_corpus()
    on = _report(fixtures).exact_match_rate
    off = _report(fixtures, DEFAULT_PARAMS.with_values(
        {"ABS_COS_CHAR_PRUNE": None, "CHAR_LINE_Z_TOLERANCE": None})).exact_match_rate
    criterion(3, off < on, f"defaults={on:.3f} both prunes off={off:.3f}")


def test_criterion_4_thickness_direction(criterion):
    rates = {t: _report(fx).exact_match_rate for t, fx in sorted(thickness_corpus().items())}
    seq = [rates[t] for t in sorted(rates)]
    ok = all(a >= b for a, b in zip(seq, seq[1:]))
    criterion(4, ok, " ".join(f"{t}x={r:.3f}" for t, r in sorted(rates.items())))


def test_criterion_5_metric_divergence(criterion):
    fixtures = divergence_corpus(20, 5)
    rep = _report(fixtures)
    ok = len(fixtures) == 20 and rep.exact_match_rate == 1.0 and rep.structure_plus_class_rate == 0.75
    criterion(5, ok, f"exact={rep.exact_match_rate:.3f} structure+class={rep.structure_plus_class_rate:.3f}")


PROPERTY_SUITES = [
    "test_mst.py::test_kruskal_matches_brute_force_on_1000_instances",
    "test_evaluation.py::test_levenshtein_metric_axioms_10k_triples",
    "test_smiles.py::test_permutation_invariance",
    "test_chemio.py::test_cdxml_round_trip",
    "test_chemio.py::test_lg_round_trip",
    "test_evaluation.py::test_self_evaluation_is_perfect",
    "test_pipeline.py::test_rotation_invariance",
    "test_pipeline.py::test_molecule_stage_is_deterministic",
    "test_pipeline.py::test_molecule_stage_takes_no_parameters",
    "test_pipeline.py::test_molecule_stage_ignores_parameter_choices",
]


def test_criterion_6_property_suites(criterion):
    r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                        *[str(TESTS / s) for s in PROPERTY_SUITES]],
                       capture_output=True, text=True, cwd=TESTS.parent)
    last = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr.strip()
    criterion(6, r.returncode == 0, last)


def test_criterion_7_grid_search(criterion, tmp_path):
    manifest = write_corpus(dominated_corpus(), tmp_path / "dominated")
    out, log = tmp_path / "tuned.params", tmp_path / "tune.jsonl"
    code = main(["tune", str(manifest), "--out", str(out), "--log", str(log)])
    counts: dict[str, int] = {}
    for line in log.read_text().splitlines():
        stage = json.loads(line)["stage"]
        counts[stage] = counts.get(stage, 0) + 1
    tuned = DEFAULT_PARAMS.loads(out.read_text())
    picked = {k: tuned.get(k) for k in DOMINATED_WINNERS}
    ok = (code == 0 and picked == DOMINATED_WINNERS
          and counts == {"stage1": 125, "stage2": 36, "stage3": 27})
    criterion(7, ok, f"picked={picked} runs={counts}")
