import copy
import inspect

import pytest

from vecmol.evaluation import graph_metrics
from vecmol.fixtures import FixtureSpec, Style, generate
from vecmol.ingest import IngestError
from vecmol.molecule import build_molecule
from vecmol.params import DEFAULT_PARAMS
from vecmol.pipeline import parse_file, parse_primitives, parse_text
from vecmol.smiles import write_smiles

ROTATION_SET = ["acetonitrile", "anisole", "benzoic_acid", "biphenyl", "chain_hash", "nitrotoluene",
                "phenanthrene", "picoline", "wedge_hash4", "cyclohexanone"]


@pytest.mark.parametrize("template", ROTATION_SET)
def test_rotation_invariance(template):
    for k in range(36):
        fx = generate(FixtureSpec(0, template, Style(rotation=10.0 * k)))
        mol = parse_text(fx.instructions, "instr").molecule
        assert write_smiles(mol) == fx.smiles, (template, 10 * k)
        assert graph_metrics(fx.truth, mol).structure_class, (template, 10 * k)


def _snapshot(g):
    return ([(n.id, n.kind, n.label, n.element, n.charge, n.hcount, n.position) for n in g.nodes],
            [(e.u, e.v, e.label) for e in g.edges])


@pytest.mark.parametrize("template", ["toluene", "wedge_solid", "ion_pair", "naphthalene"])
def test_molecule_stage_is_deterministic(template):
    fx = generate(FixtureSpec(4, template))
    tg = parse_text(fx.instructions, "instr").tokens
    first = build_molecule(copy.deepcopy(tg))
    second = build_molecule(copy.deepcopy(tg))
    assert _snapshot(first) == _snapshot(second)


def test_molecule_stage_takes_no_parameters():
    assert "params" not in inspect.signature(build_molecule).parameters


def test_molecule_stage_ignores_parameter_choices():
    fx = generate(FixtureSpec(4, "nitrotoluene"))
    res = parse_text(fx.instructions, "instr")
    ref = _snapshot(build_molecule(copy.deepcopy(res.tokens)))
    for values in ({"MAX_ALPHA_DIST": 3.0}, {"ANGLE_TOLERANCE_DEGREES": 3},
                   {"CHAR_LINE_Z_TOLERANCE": 1.0}):
        other = parse_text(fx.instructions, "instr", DEFAULT_PARAMS.with_values(values))
        tokens_same = [(t.kind, t.prims, t.label) for t in other.tokens.tokens] == \
            [(t.kind, t.prims, t.label) for t in res.tokens.tokens]
        if tokens_same:
            assert _snapshot(other.molecule) == ref


def test_empty_input_rejected():
    with pytest.raises(IngestError):
        parse_primitives([])


def test_parse_file_guesses_format(tmp_path):
    fx = generate(FixtureSpec(0, "phenol"))
    p = tmp_path / "phenol.instr"
    p.write_text(fx.instructions)
    assert write_smiles(parse_file(p).molecule) == fx.smiles
