"""Semantic analysis: token graph to molecule graph.

This stage has no tunable parameters. Bond endpoints that touch are
clustered into atoms; clusters touching a name token become that name's
node, the rest become hidden carbons.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .geometry import Point, closest_distance, dist
from .graph import ATOM, HIDDEN, SUPERATOM, Edge, MoleculeGraph, Node, StructuralError, parse_atom_label
from .mst import UnionFind
from .smiles import SmilesError, read_smiles
from .visual import BOND, CHARGE, NAME, TokenGraph


class MoleculeWarning(UserWarning):
    pass


class AbbreviationDict(dict):
    """Name to fragment graph; each fragment has one ``*`` node."""

    @classmethod
    def parse(cls, text: str, origin: str = "<dictionary>") -> "AbbreviationDict":
        d = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{origin}:{lineno}: expected NAME<TAB>SMILES")
            name, smi = parts[0].strip(), parts[1].strip()
            try:
                frag = read_smiles(smi)
            except SmilesError as e:
                raise ValueError(f"{origin}:{lineno}: {e}") from None
            stars = [n for n in frag.nodes if n.label == "*"]
            if len(stars) != 1 or len(frag.neighbors(stars[0].id)) != 1:
                raise ValueError(f"{origin}:{lineno}: fragment needs exactly one singly bonded *")
            d[name] = frag
        return d

    @classmethod
    def load(cls, path: str | Path | None = None) -> "AbbreviationDict":
        if path is None:
            text = resources.files("vecmol").joinpath("data/abbreviations.tsv").read_text("utf-8")
            return cls.parse(text, "abbreviations.tsv")
        return cls.parse(Path(path).read_text(encoding="utf-8"), str(path))


_DEFAULT_DICT: AbbreviationDict | None = None


def default_dictionary() -> AbbreviationDict:
    global _DEFAULT_DICT
    if _DEFAULT_DICT is None:
        _DEFAULT_DICT = AbbreviationDict.load()
    return _DEFAULT_DICT


@dataclass
class Intermediate:
    """Atoms after carbon insertion; ``bond_atoms`` lists the atom ids each
    bond token touches, start end first."""

    atoms: list[Node]
    bond_atoms: dict[int, list[int]]
    tokens: TokenGraph
    warnings: list[str] = field(default_factory=list)


def _name_distance(tg: TokenGraph, name_id: int, p: Point) -> float:
    return min(closest_distance(tg.nodes[c].geometry, p) for c in tg.tokens[name_id].prims)


def intersections_to_carbons(tg: TokenGraph) -> Intermediate:
    tokens = tg.tokens
    bonds = [t for t in tokens if t.kind == BOND]
    names = [t for t in tokens if t.kind == NAME]
    # items: 2 per bond end, then one per name token
    item: dict[tuple, int] = {}
    for t in bonds:
        item[(t.id, 0)] = len(item)
        item[(t.id, 1)] = len(item)
    for t in names:
        item[("name", t.id)] = len(item)
    uf = UnionFind(len(item))
    for a, b in sorted(tg.edges):
        ta, tb = tokens[a], tokens[b]
        if ta.kind == BOND and tb.kind == BOND:
            pairs = [(dist(ta.endpoints[i], tb.endpoints[j]), i, j) for i in (0, 1) for j in (0, 1)]
            _, i, j = min(pairs)
            uf.union(item[(a, i)], item[(b, j)])
        elif {ta.kind, tb.kind} == {BOND, NAME}:
            bond, name = (ta, tb) if ta.kind == BOND else (tb, ta)
            d0 = _name_distance(tg, name.id, bond.endpoints[0])
            d1 = _name_distance(tg, name.id, bond.endpoints[1])
            end = 0 if d0 <= d1 else 1
            uf.union(item[(bond.id, end)], item[("name", name.id)])

    clusters: dict[int, list[tuple]] = {}
    for key, idx in item.items():
        clusters.setdefault(uf.find(idx), []).append(key)

    atoms: list[Node] = []
    node_of_item: dict[tuple, int] = {}
    name_node: dict[int, int] = {}
    for t in names:
        members = clusters[uf.find(item[("name", t.id)])]
        other = [k for k in members if k[0] == "name" and k[1] != t.id]
        if other:
            raise StructuralError(f"name tokens {t.text!r} and {tokens[other[0][1]].text!r} "
                                  "share a bond endpoint")
        ends = [tokens[k[0]].endpoints[k[1]] for k in members if k[0] != "name"]
        node = _name_node(tg, t.id, len(atoms), ends)
        name_node[t.id] = node.id
        atoms.append(node)
        for k in members:
            node_of_item[k] = node.id

    warns: list[str] = []
    for t in bonds:
        for end in (0, 1):
            key = (t.id, end)
            if key in node_of_item:
                continue
            members = sorted(k for k in clusters[uf.find(item[key])])
            pts = [tokens[k[0]].endpoints[k[1]] for k in members]
            pos = (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))
            node = Node(len(atoms), HIDDEN, "C", pos, element="C")
            atoms.append(node)
            for k in members:
                node_of_item[k] = node.id

    for t in tokens:
        if t.kind != CHARGE:
            continue
        if t.owner is None or t.owner not in name_node:
            warns.append(f"charge token {t.id} is not attached to a name")
            continue
        atoms[name_node[t.owner]].charge += 1 if t.text == "+" else -1
        atoms[name_node[t.owner]].prims += t.prims

    bond_atoms = {t.id: [node_of_item[(t.id, 0)], node_of_item[(t.id, 1)]] for t in bonds}
    for w in warns:
        warnings.warn(w, MoleculeWarning, stacklevel=2)
    return Intermediate(atoms, bond_atoms, tg, warns)


def _name_node(tg: TokenGraph, tid: int, nid: int, ends: list[Point]) -> Node:
    t = tg.tokens[tid]
    chars = [tg.nodes[c] for c in t.prims]
    if ends:
        anchor = min(chars, key=lambda c: (min(closest_distance(c.geometry, p) for p in ends),
                                           c.center[0], c.id))
    else:
        upper = [c for c in chars if c.label[:1].isupper() and c.label != "H"]
        anchor = upper[0] if upper else chars[0]
    return Node(nid, ATOM, t.text, anchor.center, box=t.box, prims=tuple(t.prims))


def bonds_to_edges(inter: Intermediate) -> MoleculeGraph:
    tokens = inter.tokens.tokens
    edges = []
    for tid in sorted(inter.bond_atoms):
        ends = inter.bond_atoms[tid]
        t = tokens[tid]
        if len(ends) != 2 or len(set(ends)) != 2:
            raise StructuralError(f"bond token {tid} ({t.label}) has neighbors {ends}, expected 2 distinct atoms")
        edges.append(Edge(ends[0], ends[1], t.label, t.prims))
    used = {n for e in edges for n in (e.u, e.v)}
    nodes = [n for n in inter.atoms if n.kind != HIDDEN or n.id in used]
    return MoleculeGraph(nodes, edges)


def expand_abbreviations(g: MoleculeGraph, dictionary: AbbreviationDict | None = None) -> MoleculeGraph:
    """Resolve name labels to atoms or superatoms with expansion fragments."""
    d = default_dictionary() if dictionary is None else dictionary
    out = g.copy()
    for n in out.nodes:
        if n.kind == HIDDEN:
            continue
        if n.label in d:
            n.kind = SUPERATOM
            n.element = None
            n.hcount = None
            n.expansion = d[n.label].copy()
            continue
        parsed = parse_atom_label(n.label)
        if parsed is not None:
            n.kind = ATOM
            n.element, n.hcount, chg = parsed
            n.charge += chg
            n.expansion = None
        else:
            n.kind = SUPERATOM
            n.element = None
            n.expansion = None
            warnings.warn(f"unknown label {n.label!r} kept as an opaque superatom",
                          MoleculeWarning, stacklevel=2)
    return out


def build_molecule(tg: TokenGraph, dictionary: AbbreviationDict | None = None) -> MoleculeGraph:
    return expand_abbreviations(bonds_to_edges(intersections_to_carbons(tg)), dictionary)
