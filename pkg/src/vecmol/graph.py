"""Molecular structure graph shared by the parser, writers and evaluation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .geometry import Box, Point

ATOM = "Atom"
SUPERATOM = "Superatom"
HIDDEN = "HiddenCarbon"

BOND_ORDER = {"Single": 1, "Double": 2, "Triple": 3, "SolidWedge": 1, "HashedWedge": 1, "Wavy": 1}
WEDGES = ("SolidWedge", "HashedWedge")

ELEMENTS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn Ga Ge As "
    "Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La Ce Pr Nd Pm Sm Eu "
    "Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np "
    "Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og").split()
ATOMIC_NUMBER = {s: i + 1 for i, s in enumerate(ELEMENTS)}


class StructuralError(ValueError):
    pass


@dataclass
class Node:
    """A molecule node.

    ``label`` is the text as drawn ("OH", "NO2") or "C" for a hidden carbon.
    ``element`` and ``hcount`` describe atoms; ``hcount`` None means the
    hydrogen count follows from default valence. Superatoms may carry an
    ``expansion`` fragment whose ``*`` node marks the attachment.
    """

    id: int
    kind: str
    label: str
    position: Point = (0.0, 0.0)
    element: str | None = None
    charge: int = 0
    hcount: int | None = None
    box: Box | None = None
    expansion: "MoleculeGraph | None" = None
    prims: tuple[int, ...] = ()


@dataclass
class Edge:
    """Bond from ``u`` to ``v``; for wedges ``u`` is the narrow start."""

    u: int
    v: int
    label: str
    prims: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return BOND_ORDER[self.label]


@dataclass
class MoleculeGraph:
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def node(self, nid: int) -> Node:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise KeyError(nid)

    def by_id(self) -> dict[int, Node]:
        return {n.id: n for n in self.nodes}

    def neighbors(self, nid: int) -> list[int]:
        out = []
        for e in self.edges:
            if e.u == nid:
                out.append(e.v)
            elif e.v == nid:
                out.append(e.u)
        return out

    def validate(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise StructuralError("duplicate node ids")
        known = set(ids)
        for e in self.edges:
            if e.u not in known or e.v not in known:
                raise StructuralError(f"edge {e.u}-{e.v} references a missing node")
            if e.u == e.v:
                raise StructuralError(f"self loop on node {e.u}")
            if e.label not in BOND_ORDER:
                raise StructuralError(f"unknown bond label {e.label!r}")

    def copy(self) -> "MoleculeGraph":
        return MoleculeGraph([replace(n) for n in self.nodes], [replace(e) for e in self.edges])


_ATOM_LABEL = re.compile(r"^(H(\d*))?([A-Z][a-z]?)(H(\d*))?([+-]\d*)?$")


def parse_atom_label(text: str) -> tuple[str, int | None, int] | None:
    """(element, hydrogen count, charge) for labels like OH, NH2, H3C, Cl, O-.

    Returns None when the text is not a single element with hydrogens.
    """
    m = _ATOM_LABEL.match(text)
    if not m:
        return None
    pre, pre_n, elem, post, post_n, chg = m.groups()
    if elem not in ATOMIC_NUMBER or (pre and post):
        return None
    if elem == "H" and (pre or post):
        return None
    h = None
    if pre or post:
        digits = pre_n if pre else post_n
        h = int(digits) if digits else 1
    charge = 0
    if chg:
        mag = int(chg[1:]) if len(chg) > 1 else 1
        charge = mag if chg[0] == "+" else -mag
    return elem, h, charge
