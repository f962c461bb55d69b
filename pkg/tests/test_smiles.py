import random

import pytest
from hypothesis import given, settings, strategies as st

from vecmol.graph import ATOM, Edge, MoleculeGraph, Node, parse_atom_label
from vecmol.smiles import SmilesError, read_smiles, write_smiles

MOLECULES = [
    "CCC", "CC(C)C", "CC(C)(C)C", "C=CC", "C#CC", "CC#N", "CCO", "CC(=O)O", "CC(C)=O",
    "C1=CC=CC=C1", "C1CCCCC1", "CC1=CC=CC=C1", "O=[N+]([O-])C1=CC=CC=C1", "C1=CC=NC=C1",
    "C1=CC=CO1", "C1=CC=C2C=CC=CC2=C1", "C1CCC2CCCCC2C1", "C1=CC=C(C=C1)C1=CC=CC=C1",
    "[Na+].[Cl-]", "OC(=O)C1=CC=CC=C1",
]


def shuffled(g: MoleculeGraph, rng: random.Random) -> MoleculeGraph:
    ids = [n.id for n in g.nodes]
    new_ids = rng.sample(range(100, 100 + 3 * len(ids)), len(ids))
    remap = dict(zip(ids, new_ids))
    nodes = [Node(remap[n.id], n.kind, n.label, element=n.element, charge=n.charge, hcount=n.hcount)
             for n in g.nodes]
    rng.shuffle(nodes)
    edges = []
    for e in g.edges:
        u, v = remap[e.u], remap[e.v]
        if rng.random() < 0.5:
            u, v = v, u
        edges.append(Edge(u, v, e.label))
    rng.shuffle(edges)
    return MoleculeGraph(nodes, edges)


def test_known_molecules_are_distinct():
    canon = {write_smiles(read_smiles(s)) for s in MOLECULES}
    assert len(canon) == len(MOLECULES)


@pytest.mark.parametrize("smi", MOLECULES)
def test_permutation_invariance(smi):
    g = read_smiles(smi)
    ref = write_smiles(g)
    rng = random.Random(smi)
    for _ in range(100):
        assert write_smiles(shuffled(g, rng)) == ref


@pytest.mark.parametrize("smi", MOLECULES)
def test_write_read_round_trip(smi):
    ref = write_smiles(read_smiles(smi))
    assert write_smiles(read_smiles(ref)) == ref


def test_aromatic_kekule_forms_agree():
    a = MoleculeGraph([Node(i, ATOM, "C", element="C") for i in range(6)],
                      [Edge(i, (i + 1) % 6, "Double" if i % 2 else "Single") for i in range(6)])
    b = MoleculeGraph([Node(i, ATOM, "C", element="C") for i in range(6)],
                      [Edge(i, (i + 1) % 6, "Single" if i % 2 else "Double") for i in range(6)])
    assert write_smiles(a) == write_smiles(b)


def test_empty_graph():
    assert write_smiles(MoleculeGraph()) == ""


@pytest.mark.parametrize("bad", ["C(C", "C1CC", "X", "[Q]", ")C", "1C"])
def test_reader_rejects(bad):
    with pytest.raises(SmilesError):
        read_smiles(bad)


@pytest.mark.parametrize("label,expected", [
    ("OH", ("O", 1, 0)), ("NH2", ("N", 2, 0)), ("H3C", ("C", 3, 0)), ("Cl", ("Cl", None, 0)),
    ("O-", ("O", None, -1)), ("N+", ("N", None, 1)), ("NO2", None), ("OMe", None),
])
def test_parse_atom_label(label, expected):
    assert parse_atom_label(label) == expected


@settings(max_examples=50)
@given(n=st.integers(1, 12), data=st.data())
def test_random_trees_canonical_under_relabel(n, data):
    labels = data.draw(st.lists(st.sampled_from(["C", "N", "O"]), min_size=n, max_size=n))
    parents = [data.draw(st.integers(0, i - 1)) for i in range(1, n)]
    g = MoleculeGraph([Node(i, ATOM, s, element=s) for i, s in enumerate(labels)],
                      [Edge(p, i + 1, "Single") for i, p in enumerate(parents)])
    seed = data.draw(st.integers(0, 10 ** 6))
    assert write_smiles(shuffled(g, random.Random(seed))) == write_smiles(g)
