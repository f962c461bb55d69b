import pytest

from vecmol.chemio import read_lg
from vecmol.fixtures import (TEMPLATES, FixtureSpec, GenerationError, Style, ablation_corpus,
                             divergence_corpus, dominated_corpus, generate, standard_corpus,
                             thickness_corpus, thickness_sweep, write_corpus)
from vecmol.ingest import load_primitives
from vecmol.molecule import expand_abbreviations
from vecmol.smiles import write_smiles


@pytest.mark.parametrize("template", sorted(TEMPLATES))
def test_truth_smiles_matches_truth_graph(template):
    fx = generate(FixtureSpec(0, template))
    assert write_smiles(fx.truth) == fx.smiles
    if not any(n.charge for n in fx.truth.nodes):  # Lg records no charges
        assert write_smiles(expand_abbreviations(read_lg(fx.lg))) == fx.smiles
    assert load_primitives(fx.instructions, "instr")


def test_generation_is_deterministic():
    a = standard_corpus(30, seed=5)
    b = standard_corpus(30, seed=5)
    assert [f.instructions for f in a] == [f.instructions for f in b]
    assert [f.instructions for f in standard_corpus(30, seed=6)] != [f.instructions for f in a]


@pytest.mark.parametrize("bad", [dict(thickness=0), dict(thickness=-1), dict(rotation=360),
                                 dict(label_mode="none"), dict(line_width=0)])
def test_bad_style_rejected(bad):
    with pytest.raises(GenerationError):
        Style(**bad)


def test_rotation_keeps_truth():
    base = generate(FixtureSpec(2, "anisole"))
    turned = generate(FixtureSpec(2, "anisole", Style(rotation=40)))
    assert turned.smiles == base.smiles
    assert turned.instructions != base.instructions


def test_thickness_sweep_scales_width():
    fxs = thickness_sweep(FixtureSpec(0, "naphthalene"))
    assert [f.spec.style.thickness for f in fxs] == [0.5, 1.0, 1.5]
    assert len({f.smiles for f in fxs}) == 1
    with pytest.raises(GenerationError):
        thickness_sweep(FixtureSpec(0, "naphthalene"), (0.0,))


def test_corpus_sizes():
    assert len(standard_corpus(200)) == 200
    assert len(ablation_corpus()) == 6
    div = divergence_corpus(20, 5)
    assert len(div) == 20 and sum(f.spec.swap_wedges for f in div) == 5
    assert len(dominated_corpus()) == 7
    thick = thickness_corpus()
    assert sorted(thick) == [0.5, 1.0, 1.5]
    assert len({len(v) for v in thick.values()}) == 1


def test_write_corpus(tmp_path):
    fxs = standard_corpus(4)
    manifest = write_corpus(fxs, tmp_path)
    rows = manifest.read_text().strip().splitlines()
    assert len(rows) == 4
    for row in rows:
        lg, smi, instr = row.split("\t")
        assert (tmp_path / lg).exists() and (tmp_path / instr).exists()
        assert smi
