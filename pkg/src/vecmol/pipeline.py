"""End-to-end parse of one diagram."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .graph import MoleculeGraph
from .ingest import IngestError, Primitive, load_primitives
from .molecule import AbbreviationDict, build_molecule
from .mst import PrimitiveGraph, build_mst
from .params import DEFAULT_PARAMS, ParserParams
from .visual import (TokenGraph, VisualGraph, detect_negative_charges, label_bonds,
                     reconnect_floating_parallels, restructure_edges, tokenize)


@dataclass
class ParseResult:
    primitives: list[Primitive]
    mst: PrimitiveGraph
    visual: VisualGraph
    tokens: TokenGraph
    molecule: MoleculeGraph
    warnings: list[str] = field(default_factory=list)


def parse_primitives(prims: list[Primitive], params: ParserParams = DEFAULT_PARAMS,
                     dictionary: AbbreviationDict | None = None) -> ParseResult:
    if not prims:
        raise IngestError("no primitives")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mst = build_mst(prims, params)
        vg = detect_negative_charges(mst, params)
        vg = reconnect_floating_parallels(vg, params)
        vg = restructure_edges(vg, params)
        tg = label_bonds(tokenize(vg, params))
        mol = build_molecule(tg, dictionary)
    return ParseResult(prims, mst, vg, tg, mol, [str(w.message) for w in caught])


def parse_text(text: str, fmt: str, params: ParserParams = DEFAULT_PARAMS,
               dictionary: AbbreviationDict | None = None) -> ParseResult:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        prims = load_primitives(text, fmt, params)
    res = parse_primitives(prims, params, dictionary)
    res.warnings[:0] = [str(w.message) for w in caught]
    return res


def parse_file(path: str | Path, fmt: str | None = None, params: ParserParams = DEFAULT_PARAMS,
               dictionary: AbbreviationDict | None = None) -> ParseResult:
    path = Path(path)
    if fmt is None:
        fmt = guess_format(path)
    return parse_text(path.read_text(encoding="utf-8"), fmt, params, dictionary)


def guess_format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix == ".cdxml":
        return "cdxml"
    return "instr"
