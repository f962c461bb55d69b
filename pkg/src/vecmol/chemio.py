"""CDXML and Lg (label graph) readers and writers."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Union

from .geometry import Box
from .graph import (ATOM, ATOMIC_NUMBER, ELEMENTS, HIDDEN, SUPERATOM, Edge, MoleculeGraph, Node,
                    parse_atom_label)
from .visual import TokenGraph

ORDER_OF = {"Single": "1", "Double": "2", "Triple": "3", "SolidWedge": "1", "HashedWedge": "1", "Wavy": "1"}
DISPLAY_OF = {"SolidWedge": "WedgeBegin", "HashedWedge": "WedgedHashBegin", "Wavy": "Wavy"}
LABEL_OF_DISPLAY = {v: k for k, v in DISPLAY_OF.items()}
LABEL_OF_ORDER = {"1": "Single", "2": "Double", "3": "Triple"}


class FormatError(ValueError):
    pass


# -- CDXML -----------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.6f}"


def _bbox_attr(b: Box) -> str:
    return " ".join(_fmt(v) for v in (b.xmin, b.ymin, b.xmax, b.ymax))


def _fragment_xml(g: MoleculeGraph, ids, parent: ET.Element) -> ET.Element:
    frag = ET.SubElement(parent, "fragment", id=str(next(ids)))
    xml_id: dict[int, str] = {}
    for n in g.nodes:
        xml_id[n.id] = str(next(ids))
    for n in g.nodes:
        el = ET.SubElement(frag, "n", id=xml_id[n.id], p=f"{_fmt(n.position[0])} {_fmt(n.position[1])}")
        el.set("SourceID", str(n.id))
        if n.label == "*":
            el.set("NodeType", "ExternalConnectionPoint")
            continue
        if n.kind == SUPERATOM:
            el.set("NodeType", "Fragment")
        elif n.kind == ATOM and n.element:
            el.set("Element", str(ATOMIC_NUMBER[n.element]))
            if n.hcount is not None:
                el.set("NumHydrogens", str(n.hcount))
        if n.charge:
            el.set("Charge", str(n.charge))
        if n.box is not None:
            el.set("BoundingBox", _bbox_attr(n.box))
        if n.kind != HIDDEN:
            t = ET.SubElement(el, "t", p=el.get("p"))
            s = ET.SubElement(t, "s")
            s.text = n.label
        if n.kind == SUPERATOM and n.expansion is not None:
            _fragment_xml(n.expansion, ids, el)
    for e in g.edges:
        b = ET.SubElement(frag, "b", id=str(next(ids)), B=xml_id[e.u], E=xml_id[e.v], Order=ORDER_OF[e.label])
        if e.label in DISPLAY_OF:
            b.set("Display", DISPLAY_OF[e.label])
    return frag


def write_cdxml(g: MoleculeGraph) -> str:
    root = ET.Element("CDXML", CreationProgram="vecmol")
    if g.nodes:
        xs = [n.position[0] for n in g.nodes]
        ys = [n.position[1] for n in g.nodes]
        root.set("BoundingBox", " ".join(_fmt(v) for v in (min(xs), min(ys), max(xs), max(ys))))
    page = ET.SubElement(root, "page", id="1")

    def counter():
        k = 2
        while True:
            yield k
            k += 1

    _fragment_xml(g, counter(), page)
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _floats(text: str, n: int, where: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split())
    except ValueError:
        vals = ()
    if len(vals) != n:
        raise FormatError(f"{where}: expected {n} numbers, got {text!r}")
    return vals


def _read_fragment(frag: ET.Element) -> MoleculeGraph:
    g = MoleculeGraph()
    by_xml: dict[str, int] = {}
    for k, el in enumerate(frag.findall("n")):
        xid = el.get("id")
        if xid is None:
            raise FormatError("node without id")
        if xid in by_xml:
            raise FormatError(f"duplicate node id {xid}")
        where = f"node {xid}"
        pos = _floats(el.get("p", ""), 2, where)
        nid = int(el.get("SourceID", k))
        text_el = el.find("t/s")
        label = text_el.text if text_el is not None and text_el.text else None
        ntype = el.get("NodeType")
        charge = int(el.get("Charge", "0"))
        box = Box(*_floats(el.get("BoundingBox"), 4, where)) if el.get("BoundingBox") else None
        if ntype == "ExternalConnectionPoint":
            node = Node(nid, ATOM, "*", pos)
        elif ntype == "Fragment":
            inner = el.find("fragment")
            node = Node(nid, SUPERATOM, label or "?", pos, charge=charge, box=box,
                        expansion=_read_fragment(inner) if inner is not None else None)
        elif label is None and el.get("Element") in (None, "6"):
            node = Node(nid, HIDDEN, "C", pos, element="C", charge=charge)
        elif el.get("Element") is None:
            node = Node(nid, ATOM, label, pos, charge=charge, box=box)
        else:
            z = int(el.get("Element", "6"))
            if not 1 <= z <= len(ELEMENTS):
                raise FormatError(f"{where}: bad Element {z}")
            h = el.get("NumHydrogens")
            node = Node(nid, ATOM, label or ELEMENTS[z - 1], pos, element=ELEMENTS[z - 1],
                        charge=charge, hcount=int(h) if h is not None else None, box=box)
        by_xml[xid] = nid
        g.nodes.append(node)
    for el in frag.findall("b"):
        b, e = el.get("B"), el.get("E")
        if b not in by_xml or e not in by_xml:
            raise FormatError(f"bond {el.get('id')} references missing node {b if b not in by_xml else e}")
        disp = el.get("Display")
        label = LABEL_OF_DISPLAY.get(disp) or LABEL_OF_ORDER.get(el.get("Order", "1"))
        if label is None:
            raise FormatError(f"bond {el.get('id')}: unsupported Order {el.get('Order')!r}")
        g.edges.append(Edge(by_xml[b], by_xml[e], label))
    return g


def read_cdxml(text: str) -> MoleculeGraph:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        line, col = e.position
        raise FormatError(f"malformed XML at line {line}, column {col}") from None
    if root.tag != "CDXML":
        raise FormatError(f"root element is {root.tag!r}, expected 'CDXML'")
    g = MoleculeGraph()
    for page in root.findall("page"):
        for frag in page.findall("fragment"):
            part = _read_fragment(frag)
            g.nodes.extend(part.nodes)
            g.edges.extend(part.edges)
    g.validate()
    return g


# -- Lg --------------------------------------------------------------------

def _r(v: float) -> str:
    return repr(float(v))


def write_lg(g: Union[MoleculeGraph, TokenGraph]) -> str:
    if isinstance(g, TokenGraph):
        return _write_token_lg(g)
    out = [f"# Objects ({len(g.nodes)})"]
    for n in g.nodes:
        prims = ", ".join(str(p) for p in n.prims)
        out.append(f"O, {n.id}, {n.label}, 1.0" + (f", {prims}" if prims else ""))
    out.append(f"# Relationships ({len(g.edges)})")
    for e in g.edges:
        out.append(f"R, {e.u}, {e.v}, {e.label}, 1.0")
    out.append("#contours")
    for n in g.nodes:
        vals = [n.position[0], n.position[1]]
        if n.box is not None:
            for x, y in n.box.corners():
                vals += [x, y]
        out.append(f"{n.id}, " + ", ".join(_r(v) for v in vals))
    return "\n".join(out) + "\n"


def _write_token_lg(tg: TokenGraph) -> str:
    out = [f"# Objects ({len(tg.tokens)})"]
    for t in tg.tokens:
        label = t.text if t.kind in ("Name", "Charge") else (t.label or t.kind)
        out.append(f"O, {t.id}, {label}, 1.0, " + ", ".join(str(p) for p in t.prims))
    out.append(f"# Relationships ({len(tg.edges)})")
    for a, b in sorted(tg.edges):
        out.append(f"R, {a}, {b}, CONNECTED, 1.0")
    out.append("#contours")
    for p in tg.nodes:
        b = p.box
        out.append(f"{p.id}, " + ", ".join(_r(v) for xy in b.corners() for v in xy))
    return "\n".join(out) + "\n"


def read_lg(text: str) -> MoleculeGraph:
    """Read an Lg molecule file; ``C`` objects without a box are hidden carbons."""
    objects: dict[int, tuple[str, tuple[int, ...]]] = {}
    rels: list[tuple[int, int, str]] = []
    contours: dict[int, list[float]] = {}
    in_contours = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.lower().startswith("#contours"):
                in_contours = True
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            if in_contours:
                contours[int(parts[0])] = [float(v) for v in parts[1:]]
            elif parts[0] == "O":
                oid = int(parts[1])
                if oid in objects:
                    raise FormatError(f"line {lineno}: duplicate object {oid}")
                objects[oid] = (parts[2], tuple(int(p) for p in parts[4:]))
            elif parts[0] == "R":
                rels.append((int(parts[1]), int(parts[2]), parts[3]))
            else:
                raise FormatError(f"line {lineno}: unknown record {parts[0]!r}")
        except (ValueError, IndexError) as e:
            if isinstance(e, FormatError):
                raise
            raise FormatError(f"line {lineno}: malformed record {line!r}") from None
    g = MoleculeGraph()
    for oid, (label, prims) in objects.items():
        vals = contours.get(oid, [])
        pos = (vals[0], vals[1]) if len(vals) >= 2 else (0.0, 0.0)
        box = Box.around([(vals[k], vals[k + 1]) for k in range(2, 10, 2)]) if len(vals) >= 10 else None
        if label == "C" and box is None:
            g.nodes.append(Node(oid, HIDDEN, "C", pos, element="C", prims=prims))
        else:
            parsed = parse_atom_label(label)
            g.nodes.append(Node(oid, ATOM, label, pos, element=parsed[0] if parsed else None,
                                box=box, prims=prims))
    for u, v, label in rels:
        if u not in objects or v not in objects:
            raise FormatError(f"relation {u}-{v} references an undeclared object")
        g.edges.append(Edge(u, v, label))
    return g
