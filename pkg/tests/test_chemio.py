import pytest
from hypothesis import given, settings, strategies as st

from vecmol.chemio import FormatError, read_cdxml, read_lg, write_cdxml, write_lg
from vecmol.fixtures import TEMPLATES, FixtureSpec, generate
from vecmol.graph import StructuralError
from vecmol.molecule import expand_abbreviations
from vecmol.pipeline import parse_text
from vecmol.smiles import write_smiles


def shape(g):
    nodes = sorted((n.id, n.kind, n.label, n.element, n.charge) for n in g.nodes)
    edges = sorted((e.u, e.v, e.label) for e in g.edges)
    return nodes, edges


@settings(max_examples=40)
@given(template=st.sampled_from(sorted(TEMPLATES)))
def test_cdxml_round_trip(template):
    fx = generate(FixtureSpec(0, template))
    mol = parse_text(fx.instructions, "instr").molecule
    back = read_cdxml(write_cdxml(mol))
    assert shape(back) == shape(mol)
    assert write_smiles(back) == write_smiles(mol)
    for a, b in zip(sorted(mol.nodes, key=lambda n: n.id), sorted(back.nodes, key=lambda n: n.id)):
        assert a.position == pytest.approx(b.position, abs=1e-6)


@settings(max_examples=40)
@given(template=st.sampled_from(sorted(TEMPLATES)))
def test_lg_round_trip(template):
    fx = generate(FixtureSpec(0, template))
    truth = read_lg(fx.lg)
    again = read_lg(write_lg(truth))
    assert shape(again) == shape(truth)
    if not any(n.charge for n in fx.truth.nodes):  # Lg records no charges
        assert write_smiles(expand_abbreviations(again)) == fx.smiles


def test_token_graph_lg_lists_every_token():
    fx = generate(FixtureSpec(0, "toluene"))
    tg = parse_text(fx.instructions, "instr").tokens
    text = write_lg(tg)
    assert text.count("\nO, ") + text.startswith("O, ") == len(tg.tokens)
    assert f"# Objects ({len(tg.tokens)})" in text


def test_malformed_xml_reports_position():
    with pytest.raises(FormatError, match=r"line 3, column \d+"):
        read_cdxml("<CDXML>\n<page>\n<fragment><n id='1' p='0 0'></fragment>\n</page></CDXML>")


@pytest.mark.parametrize("text,match", [
    ("<Other/>", "root element"),
    ("<CDXML><page><fragment><n id='1' p='0'/></fragment></page></CDXML>", "expected 2 numbers"),
    ("<CDXML><page><fragment><n id='1' p='0 0'/><b id='9' B='1' E='7'/></fragment></page></CDXML>",
     "missing node"),
    ("<CDXML><page><fragment><n id='1' p='0 0'/><n id='1' p='1 1'/></fragment></page></CDXML>",
     "duplicate"),
])
def test_cdxml_rejects(text, match):
    with pytest.raises(FormatError, match=match):
        read_cdxml(text)


def test_cdxml_self_loop_is_structural():
    text = "<CDXML><page><fragment><n id='1' p='0 0'/><b id='2' B='1' E='1'/></fragment></page></CDXML>"
    with pytest.raises(StructuralError):
        read_cdxml(text)


@pytest.mark.parametrize("text,match", [
    ("O, 0, C, 1.0\nO, 0, C, 1.0\n", "line 2: duplicate"),
    ("O, x, C\n", "line 1: malformed"),
    ("Q, 1\n", "unknown record"),
    ("O, 0, C, 1.0\nR, 0, 5, Single, 1.0\n", "undeclared"),
])
def test_lg_rejects(text, match):
    with pytest.raises(FormatError, match=match):
        read_lg(text)


def test_lg_hidden_carbon_has_no_box():
    g = read_lg("O, 0, C, 1.0\nO, 1, OH, 1.0\nR, 0, 1, Single, 1.0\n#contours\n0, 0.0, 0.0\n"
                "1, 5.0, 0.0, 1, -4, 9, -4, 9, 4, 1, 4\n")
    assert g.node(0).kind == "HiddenCarbon"
    assert g.node(1).box is not None
    assert write_smiles(g) == "CO"
