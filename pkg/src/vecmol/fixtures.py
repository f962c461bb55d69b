"""Deterministic synthetic molecule drawings with known ground truth.

A template sketches a molecule on unit bond-length coordinates; rendering
scales, rotates and draws it as an instruction stream, placing labels
upright and trimming bond lines a fixed gap short of label boxes. Ground
truth comes from the sketch, never from parsing.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from .chemio import write_lg
from .geometry import Box, Point, Segment, closest_distance, rotate
from .graph import ATOM, HIDDEN, Edge, MoleculeGraph, Node
from .molecule import expand_abbreviations
from .smiles import ORGANIC, _implicit_h, write_smiles

LABEL_MODES = ("terminal-hetero", "all")

# drawn form -> (form used when the bond leaves to the right, anchor index)
REVERSED = {
    "OH": ("HO", 1), "NH2": ("H2N", 2), "NH": ("HN", 1), "SH": ("HS", 1), "NO2": ("O2N", 2),
    "CH3": ("H3C", 2), "CH2": ("H2C", 2), "CH": ("HC", 1), "OMe": ("MeO", 2), "OEt": ("EtO", 2),
    "CF3": ("F3C", 2), "COOH": ("HOOC", 3), "CN": ("NC", 1), "SMe": ("MeS", 2),
    "CO2Me": ("MeO2C", 4), "NMe2": ("Me2N", 3), "OAc": ("AcO", 2),
}


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class Style:
    bond_length: float = 30.0
    line_width: float = 1.0
    label_mode: str = "terminal-hetero"
    double_gap: float = 4.5
    rotation: float = 0.0
    thickness: float = 1.0
    show_hydrogens: bool = True
    label_gap: float = 4.5
    ring_shorten: float = 4.5
    triple_gap: float = 3.5
    wedge_width: float = 6.0
    hash_width: float = 7.0
    char_width: float = 7.0
    char_height: float = 9.0

    def __post_init__(self):
        if self.thickness <= 0:
            raise GenerationError("thickness must be positive")
        if self.line_width <= 0:
            raise GenerationError("line width must be positive")
        if self.bond_length <= 4 * self.line_width * self.thickness:
            raise GenerationError("bond length must exceed 4 line widths")
        if not 0 <= self.rotation < 360:
            raise GenerationError("rotation must be in [0, 360)")
        if self.label_mode not in LABEL_MODES:
            raise GenerationError(f"label mode must be one of {LABEL_MODES}")


@dataclass(frozen=True)
class FixtureSpec:
    seed: int
    template: str
    style: Style = Style()
    swap_wedges: bool = False


@dataclass
class Fixture:
    spec: FixtureSpec
    instructions: str
    truth: MoleculeGraph
    smiles: str
    lg: str

    @property
    def name(self) -> str:
        return f"{self.spec.template}_{self.spec.seed:04d}"


# -- sketches --------------------------------------------------------------

@dataclass
class SAtom:
    symbol: str
    pos: Point
    label: str | None = None  # superatom or forced label
    charge: int = 0
    hidden: bool | None = None


@dataclass
class Floating:
    """A free-standing label placed next to another atom's label."""
    symbol: str
    text: str
    near: int
    placement: str  # "diagonal" or "right"
    gap: float
    charge: int = 0


@dataclass
class Sketch:
    atoms: list[SAtom] = field(default_factory=list)
    bonds: list[tuple[int, int, str]] = field(default_factory=list)
    rings: list[list[int]] = field(default_factory=list)
    floating: list[Floating] = field(default_factory=list)
    wedge_shape: str = "triangle"
    hash_lines: int = 3
    ring_gaps: dict[tuple[int, int], float] = field(default_factory=dict)  # (atom, nbr) -> gap factor

    def atom(self, symbol: str, pos: Point, label: str | None = None, charge: int = 0) -> int:
        self.atoms.append(SAtom(symbol, pos, label, charge))
        return len(self.atoms) - 1

    def bond(self, i: int, j: int, label: str = "Single"):
        self.bonds.append((i, j, label))

    def grow(self, i: int, deg: float, symbol: str = "C", label: str | None = None,
             bond: str = "Single", charge: int = 0) -> int:
        x, y = self.atoms[i].pos
        r = math.radians(deg)
        j = self.atom(symbol, (x + math.cos(r), y + math.sin(r)), label, charge)
        self.bond(i, j, bond)
        return j

    def ring(self, n: int, center: Point = (0.0, 0.0), start_deg: float = -90.0,
             doubles: tuple = (), symbols: dict | None = None) -> list[int]:
        """Regular n-ring of unit sides; bond k joins ring atoms k and k+1."""
        radius = 0.5 / math.sin(math.pi / n)
        idx = []
        for k in range(n):
            a = math.radians(start_deg + 360.0 * k / n)
            sym = (symbols or {}).get(k, "C")
            idx.append(self.atom(sym, (center[0] + radius * math.cos(a), center[1] + radius * math.sin(a))))
        for k in range(n):
            self.bond(idx[k], idx[(k + 1) % n], "Double" if k in doubles else "Single")
        self.rings.append(idx)
        return idx

    def fuse(self, ring: list[int], k: int, n: int, doubles: tuple = ()) -> list[int]:
        """New n-ring sharing bond (ring[k], ring[k+1]); new bonds numbered from
        the shared pair's second atom."""
        a, b = ring[k], ring[(k + 1) % len(ring)]
        pa, pb = self.atoms[a].pos, self.atoms[b].pos
        c_old = _centroid([self.atoms[i].pos for i in ring])
        mid = ((pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2)
        apothem = 0.5 / math.tan(math.pi / n)
        dx, dy = mid[0] - c_old[0], mid[1] - c_old[1]
        d = math.hypot(dx, dy)
        center = (mid[0] + dx / d * apothem, mid[1] + dy / d * apothem)
        radius = 0.5 / math.sin(math.pi / n)
        ang_b = math.degrees(math.atan2(pb[1] - center[1], pb[0] - center[0]))
        ang_a = math.degrees(math.atan2(pa[1] - center[1], pa[0] - center[0]))
        step = 360.0 / n
        # walk from b away from a
        direction = 1 if ((ang_a - ang_b) % 360.0) > 180.0 else -1
        idx = [a, b]
        for m in range(1, n - 1):
            ang = math.radians(ang_b + direction * step * m)
            idx.append(self.atom("C", (center[0] + radius * math.cos(ang), center[1] + radius * math.sin(ang))))
        for m in range(1, n):
            lab = "Double" if m in doubles else "Single"
            self.bond(idx[m], idx[(m + 1) % n], lab)
        self.rings.append(idx)
        return idx

    def out_angle(self, i: int) -> float:
        """Direction (degrees) pointing away from the atom's neighbors."""
        x, y = self.atoms[i].pos
        sx = sy = 0.0
        for a, b, _ in self.bonds:
            if i in (a, b):
                o = self.atoms[b if a == i else a].pos
                d = math.hypot(o[0] - x, o[1] - y)
                sx += (o[0] - x) / d
                sy += (o[1] - y) / d
        return math.degrees(math.atan2(-sy, -sx))


def _centroid(pts):
    return (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))


def _zigzag(s: Sketch, n: int, start: int | None = None, first_deg: float = -30.0,
            bonds: dict | None = None) -> list[int]:
    idx = [s.atom("C", (0.0, 0.0))] if start is None else [start]
    deg = first_deg
    for k in range(1, n):
        idx.append(s.grow(idx[-1], deg, bond=(bonds or {}).get(k - 1, "Single")))
        deg = -deg
    return idx


# -- templates -------------------------------------------------------------

def _chain(n, bonds=None):
    def build():
        s = Sketch()
        _zigzag(s, n, bonds=bonds)
        return s
    return build


def _linear(symbols, bonds, tail=0):
    """Collinear atoms (for triple bonds), then ``tail`` zigzag carbons."""
    def build():
        s = Sketch()
        idx = [s.atom(symbols[0], (0.0, 0.0))]
        for k, sym in enumerate(symbols[1:]):
            idx.append(s.grow(idx[-1], 0.0, sym, bond=bonds[k]))
        deg = -30.0
        for _ in range(tail):
            idx.append(s.grow(idx[-1], deg))
            deg = -deg
        return s
    return build


def _star(k):
    def build():
        s = Sketch()
        c = s.atom("C", (0.0, 0.0))
        for m in range(k):
            s.grow(c, -90.0 + 360.0 * m / k)
        return s
    return build


def _hetero_chain(n, symbol, label=None, bond="Single"):
    def build():
        s = Sketch()
        idx = _zigzag(s, n)
        deg = -30.0 if n % 2 == 1 else 30.0
        s.grow(idx[-1], deg, symbol, label, bond=bond)
        return s
    return build


def _acid():
    s = Sketch()
    c1 = s.atom("C", (0.0, 0.0))
    c2 = s.grow(c1, -30.0)
    s.grow(c2, -90.0, "O", bond="Double")
    s.grow(c2, 30.0, "O")
    return s


def _acetone():
    s = Sketch()
    c1 = s.atom("C", (0.0, 0.0))
    c2 = s.grow(c1, -30.0)
    s.grow(c2, -90.0, "O", bond="Double")
    s.grow(c2, 30.0)
    return s


def _ether():
    s = Sketch()
    c1 = s.atom("C", (0.0, 0.0))
    o = s.grow(c1, -30.0, "O")
    s.grow(o, 30.0)
    return s


def _ring(n, doubles=(), symbols=None, subs=()):
    """Ring with substituents ``(ring position, symbol, label, bond)``."""
    def build():
        s = Sketch()
        r = s.ring(n, doubles=doubles, symbols=symbols)
        for k, sym, label, bond in subs:
            s.grow(r[k], s.out_angle(r[k]), sym, label, bond=bond)
        return s
    return build


BENZENE = (0, 2, 4)


def _benzoic():
    s = Sketch()
    r = s.ring(6, doubles=BENZENE)
    c = s.grow(r[0], s.out_angle(r[0]))
    s.grow(c, -30.0 - 90.0 + 60.0, "O", bond="Double")
    s.grow(c, -30.0 - 90.0 - 60.0 + 360.0, "O")
    return s


def _naphthalene():
    s = Sketch()
    a = s.ring(6, doubles=(0, 4))
    s.fuse(a, 2, 6, doubles=(1, 3, 5))
    return s


def _fused(n2, saturated=True, first_doubles=BENZENE, k=1):
    def build():
        s = Sketch()
        a = s.ring(6, doubles=first_doubles)
        s.fuse(a, k, n2)
        return s
    return build


def _biphenyl():
    s = Sketch()
    a = s.ring(6, doubles=BENZENE)
    ang = s.out_angle(a[1])
    b0 = s.grow(a[1], ang)
    # second ring centred further out along the same direction
    r = 1.0 / (2 * math.sin(math.pi / 6))
    x, y = s.atoms[b0].pos
    cx, cy = x + r * math.cos(math.radians(ang)), y + r * math.sin(math.radians(ang))
    ring = [b0]
    for m in range(1, 6):
        t = math.radians(ang + 180.0 + 60.0 * m)
        ring.append(s.atom("C", (cx + r * math.cos(t), cy + r * math.sin(t))))
    for m in range(6):
        s.bond(ring[m], ring[(m + 1) % 6], "Double" if m in BENZENE else "Single")
    s.rings.append(ring)
    return s


def _phenanthrene():
    s = Sketch()
    a = s.ring(6, doubles=(0, 4))
    b = s.fuse(a, 2, 6, doubles=(1, 5))
    s.fuse(b, 2, 6, doubles=(2, 4))
    return s


def _wedged(label, shape="triangle", hashes=3, symbol="C", sub_label=None, ring_doubles=()):
    def build():
        s = Sketch(wedge_shape=shape, hash_lines=hashes)
        r = s.ring(6, doubles=ring_doubles)
        s.grow(r[0], s.out_angle(r[0]), symbol, sub_label, bond=label)
        return s
    return build


def _chain_wedge(label, hashes=3):
    def build():
        s = Sketch(hash_lines=hashes)
        idx = _zigzag(s, 4)
        s.grow(idx[1], 90.0, bond=label)
        return s
    return build


def _ion_pair():
    s = Sketch()
    r = s.ring(6, doubles=BENZENE)
    c = s.grow(r[0], s.out_angle(r[0]))
    s.grow(c, -150.0, "O", bond="Double")
    o = s.grow(c, -30.0, "O", charge=-1)
    s.grow(r[2], s.out_angle(r[2]), "O", "OMe")
    s.grow(r[3], s.out_angle(r[3]), "Cl")
    s.grow(r[4], s.out_angle(r[4]), "N")
    s.grow(r[5], s.out_angle(r[5]), "F")
    s.floating.append(Floating("Na", "Na", o, "right", 15.0, charge=1))
    return s


def _ablation():
    s = Sketch()
    r = s.ring(6, doubles=BENZENE, start_deg=-90.0)
    s.grow(r[0], s.out_angle(r[0]), "O")
    s.grow(r[1], s.out_angle(r[1]), "Cl")
    s.grow(r[3], s.out_angle(r[3]), "N")
    s.grow(r[4], s.out_angle(r[4]), "O", "OMe")
    near = s.grow(r[2], s.out_angle(r[2]), "F")
    s.floating.append(Floating("Cl", "HCl", near, "diagonal", 3.0))
    return s


def _stage1():
    s = Sketch()
    r = s.ring(6, doubles=BENZENE, symbols={0: "N"})
    s.grow(r[3], s.out_angle(r[3]), "O")
    # bond r5-r0 stops 1.4 label gaps short of the N
    s.ring_gaps[(r[0], r[5])] = 1.4
    return s


def _stage2():
    s = Sketch(wedge_shape="trapezoid80")
    r = s.ring(6)
    s.grow(r[0], s.out_angle(r[0]), bond="SolidWedge")
    return s


def _stage3():
    s = Sketch()
    idx = _zigzag(s, 3)
    o = s.grow(idx[-1], 30.0, "O")
    s.floating.append(Floating("Cl", "HCl", o, "right", 10.125))
    return s


TEMPLATES: dict[str, Callable[[], Sketch]] = {
    "propane": _chain(3), "butane": _chain(4), "pentane": _chain(5), "hexane": _chain(6),
    "isobutane": _star(3), "neopentane": _star(4),
    "propene": _chain(3, {0: "Double"}), "butene": _chain(4, {1: "Double"}),
    "butadiene": _chain(4, {0: "Double", 2: "Double"}),
    "propyne": _linear("CCC", ["Single", "Triple"]),
    "butyne": _linear("CCCC", ["Single", "Triple", "Single"]),
    "pentyne": _linear("CCCC", ["Single", "Triple", "Single"], tail=1),
    "acetonitrile": _linear("CCN", ["Single", "Triple"]),
    "ethanol": _hetero_chain(2, "O"), "propanol": _hetero_chain(3, "O"),
    "propylamine": _hetero_chain(3, "N"), "chloroethane": _hetero_chain(2, "Cl"),
    "bromopropane": _hetero_chain(3, "Br"), "nitropropane": _hetero_chain(3, "N", "NO2"),
    "methoxyethane": _hetero_chain(2, "O", "OMe"),
    "acetic_acid": _acid, "acetone": _acetone, "dimethyl_ether": _ether,
    "cyclopropane": _ring(3), "cyclobutane": _ring(4), "cyclopentane": _ring(5),
    "cyclohexane": _ring(6), "benzene": _ring(6, BENZENE), "cyclohexene": _ring(6, (0,)),
    "toluene": _ring(6, BENZENE, subs=[(0, "C", "CH3", "Single")]),
    "nitrobenzene": _ring(6, BENZENE, subs=[(0, "N", "NO2", "Single")]),
    "anisole": _ring(6, BENZENE, subs=[(0, "O", "OMe", "Single")]),
    "phenol": _ring(6, BENZENE, subs=[(0, "O", None, "Single")]),
    "chlorobenzene": _ring(6, BENZENE, subs=[(0, "Cl", None, "Single")]),
    "aniline": _ring(6, BENZENE, subs=[(0, "N", None, "Single")]),
    "fluorobenzene": _ring(6, BENZENE, subs=[(0, "F", None, "Single")]),
    "nitrotoluene": _ring(6, BENZENE, subs=[(0, "N", "NO2", "Single"), (3, "C", "CH3", "Single")]),
    "chloroanisole": _ring(6, BENZENE, subs=[(0, "O", "OMe", "Single"), (3, "Cl", None, "Single")]),
    "xylene": _ring(6, BENZENE, subs=[(0, "C", "CH3", "Single"), (2, "C", "CH3", "Single")]),
    "methylcyclohexane": _ring(6, subs=[(0, "C", None, "Single")]),
    "cyclohexanone": _ring(6, subs=[(0, "O", None, "Double")]),
    "benzoic_acid": _benzoic,
    "pyridine": _ring(6, BENZENE, symbols={0: "N"}),
    "picoline": _ring(6, BENZENE, symbols={0: "N"}, subs=[(3, "C", "CH3", "Single")]),
    "furan": _ring(5, (1, 3), symbols={0: "O"}),
    "tetrahydrofuran": _ring(5, symbols={0: "O"}),
    "naphthalene": _naphthalene, "indane": _fused(5), "tetralin": _fused(6),
    "decalin": _fused(6, first_doubles=()), "biphenyl": _biphenyl, "phenanthrene": _phenanthrene,
    "wedge_solid": _wedged("SolidWedge"), "wedge_trapezoid": _wedged("SolidWedge", "trapezoid"),
    "wedge_hash3": _wedged("HashedWedge", hashes=3), "wedge_hash4": _wedged("HashedWedge", hashes=4),
    "wedge_oh": _wedged("SolidWedge", symbol="O"),
    "chain_hash": _chain_wedge("HashedWedge"), "chain_solid": _chain_wedge("SolidWedge"),
    "ion_pair": _ion_pair,
}

SPECIAL_TEMPLATES: dict[str, Callable[[], Sketch]] = {
    "ablation": _ablation, "stage1": _stage1, "stage2": _stage2, "stage3": _stage3,
}


# -- rendering -------------------------------------------------------------

MARGIN = 60.0
CLEARANCE = 9.5  # minimum distance between unrelated drawn objects


@dataclass
class _Label:
    text: str
    anchor: int
    boxes: list[Box]
    chars: list[str]

    @property
    def box(self) -> Box:
        b = self.boxes[0]
        for o in self.boxes[1:]:
            b = b.union(o)
        return b

    @property
    def center(self) -> Point:
        return self.boxes[self.anchor].center


def _char_size(ch: str, style: Style) -> tuple[float, float, float]:
    """(width, height, downward shift) of one glyph box."""
    if ch.isdigit():
        return (style.char_width - 2.0, style.char_height - 2.0, 2.5)
    return (style.char_width, style.char_height, 0.0)


def _layout(text: str, anchor: int, at: Point, style: Style) -> _Label:
    """Glyph boxes for ``text`` with glyph ``anchor`` centred on ``at``."""
    sizes = [_char_size(c, style) for c in text]
    x = at[0] - sizes[anchor][0] / 2 - sum(w for w, _, _ in sizes[:anchor])
    boxes = []
    for w, h, dy in sizes:
        cy = at[1] + dy
        boxes.append(Box(x, cy - h / 2, x + w, cy + h / 2))
        x += w
    return _Label(text, anchor, boxes, list(text))


def _valence(sk: Sketch, i: int) -> int:
    order = {"Double": 2, "Triple": 3}
    return sum(order.get(lab, 1) for a, b, lab in sk.bonds if i in (a, b))


def _degree(sk: Sketch, i: int) -> int:
    return sum(1 for a, b, _ in sk.bonds if i in (a, b))


def _label_text(sk: Sketch, i: int, style: Style) -> str | None:
    a = sk.atoms[i]
    if a.label:
        return a.label
    if a.hidden is True or (a.symbol == "C" and style.label_mode == "terminal-hetero"):
        return None
    text = a.symbol
    if _degree(sk, i) <= 1 and style.show_hydrogens and a.symbol in ORGANIC:
        h = _implicit_h(a.symbol, a.charge, _valence(sk, i))
        if h:
            text += "H" + (str(h) if h > 1 else "")
    return text


def _orient(text: str, bond_dirs: list[Point]) -> tuple[str, int]:
    """Label form and anchor glyph; reversed when the only bond leaves right."""
    if len(bond_dirs) == 1 and bond_dirs[0][0] > 0.1 and text in REVERSED:
        return REVERSED[text]
    if text.startswith("H") and len(text) > 1:
        k = next((n for n, c in enumerate(text) if c.isupper() and c != "H"), 0)
        return text, k
    return text, 0


def _page_positions(sk: Sketch, style: Style) -> list[Point]:
    pts = [rotate((a.pos[0] * style.bond_length, a.pos[1] * style.bond_length), style.rotation, (0.0, 0.0))
           for a in sk.atoms]
    x0 = min(p[0] for p in pts)
    y0 = min(p[1] for p in pts)
    return [(p[0] - x0 + MARGIN, p[1] - y0 + MARGIN) for p in pts]


def _unit(p: Point, q: Point) -> Point:
    d = math.hypot(q[0] - p[0], q[1] - p[1])
    return ((q[0] - p[0]) / d, (q[1] - p[1]) / d)


def _offset(p: Point, q: Point, k: float) -> tuple[Point, Point]:
    ux, uy = _unit(p, q)
    nx, ny = -uy, ux
    return ((p[0] + nx * k, p[1] + ny * k), (q[0] + nx * k, q[1] + ny * k))


def _shorten(p: Point, q: Point, s: float) -> tuple[Point, Point]:
    ux, uy = _unit(p, q)
    return ((p[0] + ux * s, p[1] + uy * s), (q[0] - ux * s, q[1] - uy * s))


def _trim_start(p: Point, q: Point, box: Box, gap: float) -> Point:
    """Move ``p`` toward ``q`` until it is ``gap`` away from ``box``."""
    def at(t):
        return (p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t)
    if closest_distance(box, p) >= gap:
        return p
    if closest_distance(box, q) < gap:
        raise GenerationError("bond too short to clear its label")
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if closest_distance(box, at(mid)) < gap:
            lo = mid
        else:
            hi = mid
    return at(hi)


@dataclass
class _Drawing:
    lines: list[tuple[Segment, frozenset]] = field(default_factory=list)  # (segment, atoms)
    polygons: list[tuple[list[Point], frozenset]] = field(default_factory=list)
    marks: list[tuple[Segment, int]] = field(default_factory=list)  # charge strokes, owner


_SWAP = {"SolidWedge": "HashedWedge", "HashedWedge": "SolidWedge"}
_WEDGE_SIDES = {"triangle": (0.0, 1.0), "trapezoid": (0.25, 1.0), "trapezoid80": (1.0, 1.25)}


def _bond_strokes(sk: Sketch, pos: list[Point], a: int, b: int, label: str, style: Style,
                  labels: dict) -> tuple[list, list]:
    """(lines, polygons) drawing one bond, before label trimming."""
    P, Q = pos[a], pos[b]
    if label == "Single":
        return [(P, Q)], []
    if label == "Double":
        ring = next((r for r in sk.rings if a in r and b in r), None)
        if ring is None:
            g = style.double_gap / 2
            return [_offset(P, Q, g), _offset(P, Q, -g)], []
        c = _centroid([pos[i] for i in ring])
        inner = min((_offset(P, Q, k) for k in (style.double_gap, -style.double_gap)),
                    key=lambda s: math.dist(_centroid(list(s)), c))
        return [(P, Q), _shorten(*inner, style.ring_shorten)], []
    if label == "Triple":
        g = style.triple_gap
        return [(P, Q), _offset(P, Q, g), _offset(P, Q, -g)], []
    if label == "HashedWedge":
        if a in labels or b in labels:
            raise GenerationError("hashed wedges are only drawn between hidden carbons")
        n = sk.hash_lines
        out = []
        for k in range(1, n + 1):
            t = k / (n + 1)
            m = (P[0] + (Q[0] - P[0]) * t, P[1] + (Q[1] - P[1]) * t)
            ux, uy = _unit(P, Q)
            h = style.hash_width * t / 2
            out.append(((m[0] - uy * h, m[1] + ux * h), (m[0] + uy * h, m[1] - ux * h)))
        return out, []
    if label == "SolidWedge":
        narrow, wide = _WEDGE_SIDES[sk.wedge_shape]
        if a in labels:
            P = _trim_start(P, Q, labels[a].box, style.label_gap)
        if b in labels:
            Q = _trim_start(Q, P, labels[b].box, style.label_gap)
        ux, uy = _unit(P, Q)
        hn, hw = narrow * style.wedge_width / 2, wide * style.wedge_width / 2
        poly = [(Q[0] - uy * hw, Q[1] + ux * hw), (Q[0] + uy * hw, Q[1] - ux * hw)]
        if hn == 0:
            poly.append(P)
        else:
            poly += [(P[0] + uy * hn, P[1] - ux * hn), (P[0] - uy * hn, P[1] + ux * hn)]
        return [], [poly]
    raise GenerationError(f"cannot draw bond label {label!r}")


def _charge_marks(label: _Label, charge: int) -> list[Segment]:
    b = label.boxes[-1]
    if charge == -1:
        y = b.ymin + 0.25 * b.height
        return [Segment((b.xmax + 1.0, y), (b.xmax + 5.0, y))]
    if charge == 1:
        cx, cy = b.xmax + 3.0, b.ymin + 1.0
        return [Segment((cx - 2.0, cy), (cx + 2.0, cy)), Segment((cx, cy - 2.0), (cx, cy + 2.0))]
    raise GenerationError(f"charge {charge} has no drawn form")


def _place_floating(f: Floating, near: _Label, style: Style) -> _Label:
    text = f.text
    k = next((n for n, c in enumerate(text) if c.isupper() and c != "H"), 0)
    probe = _layout(text, k, (0.0, 0.0), style)
    pb = probe.box
    nb = near.box
    if f.placement == "right":
        dx = nb.xmax + f.gap - pb.xmin
        dy = near.center[1]
    elif f.placement == "diagonal":
        d = f.gap / math.sqrt(2.0)
        dx = nb.xmax + d - pb.xmin
        dy = nb.ymax + d - pb.ymin
    else:
        raise GenerationError(f"unknown placement {f.placement!r}")
    return _layout(text, k, (dx, dy), style)


def _check_clearance(segs: list[tuple[Segment, frozenset]], labels: dict[int, _Label],
                     floats: list[_Label]):
    for x, (s1, a1) in enumerate(segs):
        for s2, a2 in segs[x + 1:]:
            if a1 & a2:
                continue
            if closest_distance(s1, s2) < CLEARANCE:
                raise GenerationError("bonds drawn too close together")
    for i, lab in labels.items():
        for s, atoms in segs:
            if i not in atoms and closest_distance(lab.box, s) < CLEARANCE:
                raise GenerationError(f"label {lab.text!r} too close to a bond")
    items = list(labels.values())
    for x, l1 in enumerate(items):
        for l2 in items[x + 1:]:
            if closest_distance(l1.box, l2.box) < CLEARANCE:
                raise GenerationError(f"labels {l1.text!r} and {l2.text!r} overlap")
    for lab in floats:
        for s, _ in segs:
            if closest_distance(lab.box, s) < CLEARANCE:
                raise GenerationError(f"floating label {lab.text!r} touches a bond")


def _num(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render(sk: Sketch, spec: FixtureSpec) -> Fixture:
    style = spec.style
    pos = _page_positions(sk, style)
    n = len(sk.atoms)
    dirs: dict[int, list[Point]] = {i: [] for i in range(n)}
    for a, b, _ in sk.bonds:
        dirs[a].append(_unit(pos[a], pos[b]))
        dirs[b].append(_unit(pos[b], pos[a]))

    labels: dict[int, _Label] = {}
    for i in range(n):
        text = _label_text(sk, i, style)
        if text:
            labels[i] = _layout(*_orient(text, dirs[i]), pos[i], style)

    lines: list[Segment] = []
    polygons: list[list[Point]] = []
    owned: list[tuple[Segment, frozenset]] = []  # every drawn edge with its bond's atoms
    for a, b, label in sk.bonds:
        drawn = _SWAP.get(label, label) if spec.swap_wedges else label
        atoms = frozenset((a, b))
        strokes, polys = _bond_strokes(sk, pos, a, b, drawn, style, labels)
        for p, q in strokes:
            if a in labels:
                p = _trim_start(p, q, labels[a].box, style.label_gap * sk.ring_gaps.get((a, b), 1.0))
            if b in labels:
                q = _trim_start(q, p, labels[b].box, style.label_gap * sk.ring_gaps.get((b, a), 1.0))
            lines.append(Segment(p, q))
            owned.append((lines[-1], atoms))
        for poly in polys:
            polygons.append(poly)
            owned += [(Segment(poly[k], poly[(k + 1) % len(poly)]), atoms) for k in range(len(poly))]

    marks: list[Segment] = []
    for i, a in enumerate(sk.atoms):
        if a.charge:
            if i not in labels:
                raise GenerationError("charged atoms must be labeled")
            marks += _charge_marks(labels[i], a.charge)
    floats = []
    for f in sk.floating:
        lab = _place_floating(f, labels[f.near], style)
        floats.append(lab)
        if f.charge:
            marks += _charge_marks(lab, f.charge)
    _check_clearance(owned, labels, floats)

    text = _emit(lines, polygons, marks, list(labels.values()) + floats, style)
    truth = _truth(sk, pos, labels, floats)
    return Fixture(spec, text, truth, write_smiles(truth), write_lg(truth))


def _emit(lines: list[Segment], polygons: list[list[Point]], marks: list[Segment],
          labels: list[_Label], style: Style) -> str:
    ys = [y for s in lines + marks for y in (s.a[1], s.b[1])]
    ys += [p[1] for poly in polygons for p in poly] + [b.ymax for lab in labels for b in lab.boxes]
    top = math.ceil(max(ys) + MARGIN)

    def pt(p: Point) -> str:
        return f"{_num(p[0])} {_num(top - p[1])}"

    out = [f"1 0 0 -1 0 {top} cm", f"{_num(style.line_width * style.thickness)} w"]
    for s in lines + marks:
        out.append(f"{pt(s.a)} m {pt(s.b)} l S")
    for poly in polygons:
        out.append(f"{pt(poly[0])} m " + " ".join(f"{pt(p)} l" for p in poly[1:]) + " h f")
    for lab in labels:
        for ch, b in zip(lab.chars, lab.boxes):
            out.append(f"{_num(b.xmin)} {_num(top - b.ymax)} {_num(b.width)} {_num(b.height)} ({ch}) ch")
    return "\n".join(out) + "\n"


def _truth(sk: Sketch, pos: list[Point], labels: dict[int, _Label],
           floats: list[_Label]) -> MoleculeGraph:
    nodes = []
    for i, a in enumerate(sk.atoms):
        if i in labels:
            lab = labels[i]
            nodes.append(Node(i, ATOM, lab.text, lab.center, charge=a.charge, box=lab.box))
        else:
            nodes.append(Node(i, HIDDEN, "C", pos[i], element="C"))
    for k, (f, lab) in enumerate(zip(sk.floating, floats)):
        nodes.append(Node(len(sk.atoms) + k, ATOM, lab.text, lab.center, charge=f.charge, box=lab.box))
    edges = [Edge(a, b, label) for a, b, label in sk.bonds]
    return expand_abbreviations(MoleculeGraph(nodes, edges))


def generate(spec: FixtureSpec) -> Fixture:
    build = TEMPLATES.get(spec.template) or SPECIAL_TEMPLATES.get(spec.template)
    if build is None:
        raise GenerationError(f"unknown template {spec.template!r}")
    return render(build(), spec)


def thickness_sweep(spec: FixtureSpec, thicknesses=(0.5, 1.0, 1.5)) -> list[Fixture]:
    return [generate(replace(spec, style=replace(spec.style, thickness=t))) for t in thicknesses]


# -- corpora ---------------------------------------------------------------

def _collect(candidates, count: int) -> list[Fixture]:
    """First ``count`` candidate specs that render cleanly."""
    out = []
    for spec in candidates:
        try:
            out.append(generate(spec))
        except GenerationError:
            continue
        if len(out) == count:
            break
    if len(out) < count:
        raise GenerationError(f"only {len(out)} of {count} fixtures could be generated")
    return out


def standard_corpus(count: int = 200, seed: int = 0) -> list[Fixture]:
    """Default-style corpus cycling through every template at random rotations."""
    names = sorted(TEMPLATES)
    rng = random.Random(seed)

    def specs():
        k = 0
        while True:
            name = names[k % len(names)]
            style = Style(rotation=float(rng.randrange(0, 360, 5)),
                          label_mode="all" if rng.random() < 0.2 else "terminal-hetero",
                          show_hydrogens=rng.random() < 0.8)
            yield FixtureSpec(seed + k, name, style)
            k += 1
            if k > 50 * count:
                return

    return _collect(specs(), count)


def ablation_corpus(count: int = 6) -> list[Fixture]:
    """Diagonally offset floating labels that only the MST pruning keeps apart."""
    specs = (FixtureSpec(k, "ablation", Style(rotation=float(r)))
             for k, r in enumerate([0, 5, 10, 15, 350, 355, 20, 340, 25, 335]))
    return _collect(specs, count)


DENSE_TEMPLATES = ("naphthalene", "phenanthrene", "tetralin", "indane", "decalin")


def thickness_corpus(thicknesses=(0.5, 1.0, 1.5), rotations=(0, 30, 75)) -> dict[float, list[Fixture]]:
    out: dict[float, list[Fixture]] = {t: [] for t in thicknesses}
    k = 0
    for name in DENSE_TEMPLATES:
        for r in rotations:
            for fx in thickness_sweep(FixtureSpec(k, name, Style(rotation=float(r))), thicknesses):
                out[fx.spec.style.thickness].append(fx)
            k += 1
    return out


WEDGE_TEMPLATES = ("wedge_solid", "wedge_trapezoid", "wedge_hash3", "wedge_hash4", "chain_hash",
                   "chain_solid")


def divergence_corpus(count: int = 20, swapped: int = 5) -> list[Fixture]:
    """Corpus where ``swapped`` fixtures draw the opposite wedge type to their truth."""
    plain = [n for n in sorted(TEMPLATES) if n not in WEDGE_TEMPLATES and n != "ion_pair"]
    out = [generate(FixtureSpec(k, WEDGE_TEMPLATES[k % len(WEDGE_TEMPLATES)], swap_wedges=True))
           for k in range(swapped)]
    out += [generate(FixtureSpec(swapped + k, plain[k % len(plain)])) for k in range(count - swapped)]
    return out


# the grid value each stage of the dominated corpus is built to require
DOMINATED_WINNERS = {"CLOSE_CHAR_LINE_ALPHA": 1.5, "S-WEDGE_LENGTHS_DIFF_RATIO": 0.85, "MAX_ALPHA_DIST": 2.0}


def dominated_corpus() -> list[Fixture]:
    """Fixtures whose correct parse needs one specific grid value per stage."""
    specs = [FixtureSpec(k, "stage1", Style(rotation=float(r))) for k, r in enumerate((0, 60, 120))]
    specs += [FixtureSpec(3 + k, "stage2", Style(rotation=float(r))) for k, r in enumerate((0, 45, 90))]
    specs += [FixtureSpec(6, "stage3")]
    return [generate(s) for s in specs]


def write_corpus(fixtures: list[Fixture], directory) -> Path:
    """Write each fixture's stream and truth Lg plus a ``manifest.tsv``
    (truth Lg path, truth SMILES, input path; paths relative to the directory)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    rows = []
    for fx in fixtures:
        name = fx.name if not fx.spec.swap_wedges else fx.name + "_swapped"
        name += "" if fx.spec.style.thickness == 1.0 else f"_t{fx.spec.style.thickness:g}"
        (d / f"{name}.instr").write_text(fx.instructions, encoding="utf-8")
        (d / f"{name}.lg").write_text(fx.lg, encoding="utf-8")
        rows.append(f"{name}.lg\t{fx.smiles}\t{name}.instr")
    manifest = d / "manifest.tsv"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return manifest
