"""Canonical SMILES writer and a small SMILES reader.

The writer ranks atoms with Morgan-style refinement, breaks remaining ties
by trying each candidate and keeping the smallest string, then emits a
depth-first traversal. Stereo and aromaticity are not represented.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass

from .graph import ATOM, ATOMIC_NUMBER, HIDDEN, SUPERATOM, Edge, MoleculeGraph, Node

ORGANIC = {"B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
           "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,)}
_GROUP_15_16 = {"N", "P", "As", "O", "S", "Se"}
BOND_SYMBOL = {1: "", 2: "=", 3: "#"}
MAX_LEAVES = 256


class SmilesError(ValueError):
    pass


@dataclass
class _Atom:
    symbol: str  # element or "*"
    charge: int
    hcount: int | None
    nbrs: list  # [(atom index, order)]


def _implicit_h(symbol: str, charge: int, valence: int) -> int:
    if symbol not in ORGANIC:
        return 0
    for v in ORGANIC[symbol]:
        if charge:
            v = v + charge if symbol in _GROUP_15_16 else v - abs(charge)
        if v >= valence:
            return v - valence
    return 0


# -- flattening superatoms into atoms --------------------------------------

def atoms_of(g: MoleculeGraph) -> list[_Atom]:
    """Atom list with superatoms expanded; wedges become single bonds."""
    atoms: list[_Atom] = []
    index: dict[int, int] = {}
    for n in g.nodes:
        if n.kind == SUPERATOM and n.expansion is not None:
            sub = n.expansion
            local: dict[int, int] = {}
            star = None
            for s in sub.nodes:
                if s.label == "*":
                    star = s.id
                    continue
                local[s.id] = len(atoms)
                atoms.append(_Atom(s.element or s.label, s.charge, s.hcount, []))
            if star is None:
                raise SmilesError(f"expansion of {n.label!r} has no attachment point")
            anchor = None
            for e in sub.edges:
                if star in (e.u, e.v):
                    anchor = local[e.v if e.u == star else e.u]
                    continue
                a, b = local[e.u], local[e.v]
                atoms[a].nbrs.append((b, e.order))
                atoms[b].nbrs.append((a, e.order))
            if anchor is None:
                raise SmilesError(f"expansion of {n.label!r} has a detached attachment point")
            atoms[anchor].charge += n.charge
            index[n.id] = anchor
        else:
            index[n.id] = len(atoms)
            if n.kind == SUPERATOM:
                atoms.append(_Atom("*", n.charge, 0, []))
            else:
                sym = n.element or ("C" if n.kind == HIDDEN else n.label)
                atoms.append(_Atom(sym, n.charge, n.hcount, []))
    for e in g.edges:
        a, b = index[e.u], index[e.v]
        atoms[a].nbrs.append((b, e.order))
        atoms[b].nbrs.append((a, e.order))
    return atoms


def _hydrogens(a: _Atom) -> int:
    if a.hcount is not None:
        return a.hcount
    if a.symbol == "*":
        return 0
    return _implicit_h(a.symbol, a.charge, sum(o for _, o in a.nbrs))


# -- ranking ---------------------------------------------------------------

def _dense(keys: list) -> list[int]:
    order = sorted(set(keys))
    pos = {k: i for i, k in enumerate(order)}
    return [pos[k] for k in keys]


def _refine(atoms: list[_Atom], ranks: list[int]) -> list[int]:
    while True:
        keys = [(ranks[i], tuple(sorted((ranks[j], o) for j, o in a.nbrs))) for i, a in enumerate(atoms)]
        new = _dense(keys)
        if len(set(new)) == len(set(ranks)):
            return new
        ranks = new


def _initial(atoms: list[_Atom], hs: list[int]) -> list[int]:
    keys = [(ATOMIC_NUMBER.get(a.symbol, 0), len(a.nbrs), sum(o for _, o in a.nbrs),
             a.charge, hs[i], a.symbol) for i, a in enumerate(atoms)]
    return _dense(keys)


# -- emission --------------------------------------------------------------

def _atom_text(a: _Atom, h: int) -> str:
    if a.symbol == "*":
        return "*" if a.charge == 0 else f"[*{_charge_text(a.charge)}]"
    if a.symbol in ORGANIC and a.charge == 0 and \
            h == _implicit_h(a.symbol, 0, sum(o for _, o in a.nbrs)):
        return a.symbol
    htext = "" if h == 0 else "H" if h == 1 else f"H{h}"
    return f"[{a.symbol}{htext}{_charge_text(a.charge)}]"


def _charge_text(c: int) -> str:
    if c == 0:
        return ""
    sign = "+" if c > 0 else "-"
    return sign if abs(c) == 1 else f"{sign}{abs(c)}"


def _ring_label(d: int) -> str:
    if d > 99:
        raise SmilesError("more than 99 simultaneously open rings")
    return str(d) if d < 10 else f"%{d}"


def _emit(atoms: list[_Atom], hs: list[int], ranks: list[int], comp: list[int]) -> str:
    start = min(comp, key=lambda i: ranks[i])
    order: list[int] = []
    parent = {start: None}
    children: dict[int, list[int]] = {i: [] for i in comp}
    ring_open: dict[int, list[tuple[int, int]]] = {i: [] for i in comp}
    ring_close: dict[int, list[int]] = {i: [] for i in comp}
    visited = set()
    seen_back = set()

    def nbrs(i):
        return sorted(atoms[i].nbrs, key=lambda t: (ranks[t[0]], t[0]))

    # iterative DFS keeping preorder and discovering back edges
    stack = [(start, iter(nbrs(start)))]
    visited.add(start)
    order.append(start)
    while stack:
        i, it = stack[-1]
        for j, o in it:
            if j == parent[i] and (i, j) not in seen_back:
                seen_back.add((i, j))
                continue
            if j in visited:
                if (j, i) not in seen_back and (i, j) not in seen_back:
                    seen_back.update({(i, j), (j, i)})
                    ring_open[j].append((i, o))
                    ring_close[i].append(j)
                continue
            visited.add(j)
            parent[j] = i
            children[i].append(j)
            order.append(j)
            stack.append((j, iter(nbrs(j))))
            break
        else:
            stack.pop()
    pre = {a: k for k, a in enumerate(order)}
    bond = {}
    for i in comp:
        for j, o in atoms[i].nbrs:
            bond[(i, j)] = o

    out: list[str] = []
    free: list[int] = []
    digits: dict[tuple[int, int], int] = {}
    next_digit = [1]

    def take() -> int:
        if free:
            free.sort()
            return free.pop(0)
        d = next_digit[0]
        next_digit[0] += 1
        return d

    def walk(i: int):
        out.append(_atom_text(atoms[i], hs[i]))
        for j in sorted(ring_close[i], key=lambda j: pre[j]):
            d = digits.pop((j, i))
            out.append(_ring_label(d))
            free.append(d)
        for j, o in sorted(ring_open[i], key=lambda t: pre[t[0]]):
            d = take()
            digits[(i, j)] = d
            out.append(BOND_SYMBOL[o] + _ring_label(d))
        kids = children[i]
        for k, c in enumerate(kids):
            last = k == len(kids) - 1
            if not last:
                out.append("(")
            out.append(BOND_SYMBOL[bond[(i, c)]])
            walk(c)
            if not last:
                out.append(")")

    if len(comp) + 100 > sys.getrecursionlimit():
        sys.setrecursionlimit(len(comp) + 200)
    walk(start)
    return "".join(out)


def _components(atoms: list[_Atom]) -> list[list[int]]:
    seen = set()
    comps = []
    for s in range(len(atoms)):
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y, _ in atoms[x].nbrs:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        comps.append(sorted(comp))
    return comps


def _canonical_component(atoms: list[_Atom], hs: list[int], base: list[int], comp: list[int]) -> str:
    best: list[str | None] = [None]
    leaves = [0]

    def search(ranks: list[int]):
        if leaves[0] >= MAX_LEAVES and best[0] is not None:
            return
        classes: dict[int, list[int]] = {}
        for i in comp:
            classes.setdefault(ranks[i], []).append(i)
        tied = [r for r, m in classes.items() if len(m) > 1]
        if not tied:
            leaves[0] += 1
            s = _emit(atoms, hs, ranks, comp)
            if best[0] is None or s < best[0]:
                best[0] = s
            return
        r = min(tied)
        for i in classes[r]:
            nr = [2 * x for x in ranks]
            nr[i] -= 1
            search(_refine(atoms, _dense(nr)))
            if leaves[0] >= MAX_LEAVES:
                return

    search(base)
    return best[0]


def write_smiles(g: MoleculeGraph) -> str:
    atoms = atoms_of(g)
    if not atoms:
        return ""
    hs = [_hydrogens(a) for a in atoms]
    base = _refine(atoms, _initial(atoms, hs))
    parts = [_canonical_component(atoms, hs, base, comp) for comp in _components(atoms)]
    return ".".join(sorted(parts))


# -- reader ----------------------------------------------------------------

_SMILES_TOKEN = re.compile(
    r"\[(?P<bracket>[^\]]+)\]|(?P<organic>Cl|Br|[BCNOPSFI*])|(?P<bond>[-=#])"
    r"|(?P<ring>%\d\d|\d)|(?P<open>\()|(?P<close>\))|(?P<dot>\.)")
_BRACKET = re.compile(r"^(\d+)?(\*|[A-Z][a-z]?)(H\d*)?([+-]+\d*)?$")
_ORDER = {"-": 1, "=": 2, "#": 3}
_LABEL = {1: "Single", 2: "Double", 3: "Triple"}


def read_smiles(text: str) -> MoleculeGraph:
    """Parse the SMILES subset the writer emits (plus explicit ``-`` bonds)."""
    g = MoleculeGraph()
    prev: int | None = None
    branch: list[int | None] = []
    rings: dict[str, tuple[int, int | None]] = {}
    pending: int | None = None
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _SMILES_TOKEN.match(text, pos)
        if not m:
            raise SmilesError(f"unexpected {text[pos]!r} at {pos}")
        pos = m.end()
        kind = m.lastgroup
        if kind in ("bracket", "organic"):
            if kind == "organic":
                sym, h, chg = m.group("organic"), None, 0
            else:
                b = _BRACKET.match(m.group("bracket"))
                if not b:
                    raise SmilesError(f"bad bracket atom [{m.group('bracket')}]")
                sym = b.group(2)
                h = 0 if not b.group(3) else int(b.group(3)[1:] or 1)
                chg = 0
                if b.group(4):
                    c = b.group(4)
                    mag = int(c.lstrip("+-") or len(c))
                    chg = mag if c[0] == "+" else -mag
            if sym != "*" and sym not in ATOMIC_NUMBER:
                raise SmilesError(f"unknown element {sym!r}")
            nid = len(g.nodes)
            g.nodes.append(Node(nid, ATOM, sym, element=None if sym == "*" else sym,
                                charge=chg, hcount=h))
            if prev is not None:
                g.edges.append(Edge(prev, nid, _LABEL[pending or 1]))
            prev, pending = nid, None
        elif kind == "bond":
            pending = _ORDER[m.group("bond")]
        elif kind == "ring":
            key = m.group("ring")
            if prev is None:
                raise SmilesError(f"ring bond {key} before any atom")
            if key in rings:
                other, order = rings.pop(key)
                g.edges.append(Edge(other, prev, _LABEL[order or pending or 1]))
            else:
                rings[key] = (prev, pending)
            pending = None
        elif kind == "open":
            branch.append(prev)
        elif kind == "close":
            if not branch:
                raise SmilesError(f"unbalanced ')' at {pos - 1}")
            prev = branch.pop()
        elif kind == "dot":
            prev = None
    if branch or rings:
        raise SmilesError("unclosed branch or ring")
    return g
