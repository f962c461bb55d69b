import json
import random

import jsonschema
import pytest
from hypothesis import given, strategies as st

from vecmol.evaluation import (DEFAULT_GRID, CorpusItem, EvaluationError, TuneSample, canonical,
                               error_histogram, evaluate_corpus, f1, graph_metrics, grid_search,
                               inverse_avg_nld, levenshtein, load_grid, nld, report_html,
                               report_schema)
from vecmol.fixtures import FixtureSpec, generate
from vecmol.graph import Edge
from vecmol.pipeline import parse_text
from vecmol.smiles import write_smiles

ALPHABET = "CNO()=#1"


def test_levenshtein_examples():
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("", "abc") == 3
    assert nld("", "") == 0.0
    assert nld("abc", "abd") == pytest.approx(1 / 3)


def test_levenshtein_metric_axioms_10k_triples():
    rng = random.Random(7)
    def word():
        return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 8)))
    for _ in range(10_000):
        a, b, c = word(), word(), word()
        ab, bc, ac = levenshtein(a, b), levenshtein(b, c), levenshtein(a, c)
        assert (ab == 0) == (a == b)
        assert ab == levenshtein(b, a)
        assert ac <= ab + bc


@given(st.text(ALPHABET, max_size=12), st.text(ALPHABET, max_size=12))
def test_nld_in_unit_interval(a, b):
    assert 0.0 <= nld(a, b) <= 1.0


def test_f1_edge_cases():
    assert f1(0, 0, 0) == 1.0
    assert f1(0, 3, 0) == 0.0
    assert f1(2, 2, 2) == 1.0


def _item(template, seed=0, mutate=None):
    fx = generate(FixtureSpec(seed, template))
    out = parse_text(fx.instructions, "instr").molecule
    if mutate:
        mutate(out)
    return CorpusItem(fx.name, fx.truth, fx.smiles, out, write_smiles(out))


TEN = ["propane", "benzene", "toluene", "anisole", "pyridine", "acetone", "furan",
       "naphthalene", "cyclohexanone", "acetic_acid"]


def test_self_evaluation_is_perfect():
    fx = [generate(FixtureSpec(0, t)) for t in TEN]
    items = [CorpusItem(f.name, f.truth, f.smiles, f.truth, f.smiles) for f in fx]
    rep = evaluate_corpus(items)
    assert rep.node_f1 == rep.edge_f1 == 1.0
    assert rep.exact_match_rate == rep.structure_plus_class_rate == rep.inverse_avg_nld == 1.0
    assert rep.error_histogram == []


def test_dropped_bond_counts_against_structure():
    items = [_item(t) for t in TEN[:9]]
    items.append(_item("naphthalene", mutate=lambda g: g.edges.pop()))
    rep = evaluate_corpus(items)
    assert rep.structure_rate == pytest.approx(0.9)
    assert rep.exact_match_rate == pytest.approx(0.9)
    assert rep.edge_f1 < 1.0
    assert rep.error_histogram[0]["kind"] == "edge" and rep.error_histogram[0]["output"] == "ABSENT"


def test_wrong_bond_class_keeps_structure():
    def relabel(g):
        e = next(e for e in g.edges if e.label == "Double")
        g.edges[g.edges.index(e)] = Edge(e.u, e.v, "Single")
    it = _item("benzene", mutate=relabel)
    s = graph_metrics(it.truth_graph, it.output_graph)
    assert s.structure and not s.structure_class


def test_missing_prediction():
    fx = generate(FixtureSpec(0, "propane"))
    rep = evaluate_corpus([CorpusItem("x", fx.truth, fx.smiles, None, None, "missing prediction")])
    assert rep.exact_match_rate == 0.0 and rep.inverse_avg_nld == 0.0
    assert rep.per_molecule[0]["error"] == "missing prediction"


def test_empty_inputs():
    assert error_histogram([]) == []
    with pytest.raises(EvaluationError):
        evaluate_corpus([])


def test_report_matches_schema_and_html():
    items = [_item(t) for t in TEN[:3]] + [_item("benzene", mutate=lambda g: g.edges.pop())]
    rep = evaluate_corpus(items)
    doc = json.loads(json.dumps(rep.to_json()))
    jsonschema.validate(doc, report_schema())
    page = report_html(rep, link=lambda m: f"{m}.html")
    assert "<table>" in page and "benzene_0000.html" in page


def test_canonical_normalizes():
    assert canonical("OCC") == canonical("CCO")
    assert inverse_avg_nld([("CCO", "CCO")]) == 1.0


def test_grid_cardinality():
    sizes = []
    for stage in DEFAULT_GRID:
        n = 1
        for v in stage["grid"].values():
            n *= len(v)
        sizes.append(n)
    assert sizes == [125, 36, 27]


def test_one_point_grid_returns_those_values():
    fx = generate(FixtureSpec(0, "propane"))
    corpus = [TuneSample(fx.name, fx.instructions, "instr", fx.smiles)]
    grid = [{"name": "only", "grid": {"MAX_ALPHA_DIST": [2.5]}}]
    params, recs = grid_search(corpus, grid)
    assert params.get("MAX_ALPHA_DIST") == 2.5
    assert len(recs) == 1 and recs[0]["exact_match_rate"] == 1.0


def test_grid_errors():
    fx = generate(FixtureSpec(0, "propane"))
    corpus = [TuneSample(fx.name, fx.instructions, "instr", fx.smiles)]
    with pytest.raises(EvaluationError):
        grid_search([], DEFAULT_GRID)
    with pytest.raises(EvaluationError):
        grid_search(corpus, [{"name": "x", "grid": {"MAX_ALPHA_DIST": []}}])
    with pytest.raises(EvaluationError):
        load_grid("[]")
    assert len(load_grid(json.dumps({"stages": DEFAULT_GRID}))) == 3
