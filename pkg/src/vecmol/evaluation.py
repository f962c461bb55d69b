"""SMILES string metrics, aligned graph metrics, error histograms and the
staged parameter grid search."""

from __future__ import annotations

import html
import itertools
import json
from dataclasses import dataclass, field
from statistics import fmean
from typing import Any, Callable, Iterable, Sequence

from .geometry import convex_intersection_area, disc_polygon, dist
from .graph import WEDGES, MoleculeGraph
from .params import DEFAULT_PARAMS, ParserParams
from .smiles import SmilesError, read_smiles, write_smiles

ABSENT = "ABSENT"
HIDDEN_DISC_RATIO = 0.1
FALLBACK_RATIO = 0.5


class EvaluationError(ValueError):
    pass


# -- strings ---------------------------------------------------------------

def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def nld(a: str, b: str) -> float:
    m = max(len(a), len(b))
    return 0.0 if m == 0 else levenshtein(a, b) / m


def inverse_avg_nld(pairs: Sequence[tuple[str, str]]) -> float:
    if not pairs:
        raise EvaluationError("no SMILES pairs")
    return 1.0 - fmean(nld(a, b) for a, b in pairs)


def canonical(smiles: str) -> str:
    """Pass a SMILES string through our canonicalizer; unreadable strings are
    returned unchanged so they still count as mismatches."""
    try:
        return write_smiles(read_smiles(smiles))
    except (SmilesError, KeyError):
        return smiles


# -- alignment -------------------------------------------------------------

@dataclass
class Alignment:
    mapping: dict[int, int]  # output id -> truth id
    unmatched_output: set[int]
    unmatched_truth: set[int]


def mean_bond_length(g: MoleculeGraph) -> float | None:
    pos = {n.id: n.position for n in g.nodes}
    lengths = [dist(pos[e.u], pos[e.v]) for e in g.edges]
    return fmean(lengths) if lengths else None


def _extent(node, radius: float) -> list:
    if node.box is not None and node.box.width > 0 and node.box.height > 0:
        return node.box.corners()
    return disc_polygon(node.position, radius)


def align_nodes(truth: MoleculeGraph, out: MoleculeGraph) -> Alignment:
    scale = mean_bond_length(truth) or mean_bond_length(out) or 10.0
    radius = HIDDEN_DISC_RATIO * scale
    t_ext = {n.id: _extent(n, radius) for n in truth.nodes}
    o_ext = {n.id: _extent(n, radius) for n in out.nodes}
    cand = []
    for o in out.nodes:
        for t in truth.nodes:
            a = convex_intersection_area(o_ext[o.id], t_ext[t.id])
            if a > 0:
                cand.append((-a, o.id, t.id))
    cand.sort()
    mapping: dict[int, int] = {}
    used: set[int] = set()
    for _, o, t in cand:
        if o not in mapping and t not in used:
            mapping[o] = t
            used.add(t)
    tpos = {n.id: n.position for n in truth.nodes}
    near = []
    for o in out.nodes:
        if o.id in mapping:
            continue
        for t in truth.nodes:
            if t.id in used:
                continue
            d = dist(o.position, tpos[t.id])
            if d <= FALLBACK_RATIO * scale:
                near.append((d, o.id, t.id))
    for _, o, t in sorted(near):
        if o not in mapping and t not in used:
            mapping[o] = t
            used.add(t)
    return Alignment(mapping, {n.id for n in out.nodes} - set(mapping),
                     {n.id for n in truth.nodes} - used)


# -- graph metrics ---------------------------------------------------------

def _edge_table(g: MoleculeGraph, rename: dict[int, Any]) -> dict[frozenset, str]:
    """Unordered node pair -> label, with wedge direction folded into the label."""
    table = {}
    for e in g.edges:
        u, v = rename[e.u], rename[e.v]
        label = e.label
        if label in WEDGES:
            label = f"{label}:{u}>{v}"
        table[frozenset((u, v))] = label
    return table


def _display(label: str, key: frozenset, truth_label: str | None) -> str:
    """Readable edge label; a wedge pointing against truth gets ':reversed'."""
    if ":" not in label:
        return label
    base = label.split(":")[0]
    if truth_label is not None and truth_label.split(":")[0] == base and truth_label != label:
        return f"{base}:reversed"
    return base


@dataclass
class MoleculeScore:
    node_correct: int
    truth_nodes: int
    output_nodes: int
    edge_correct: int
    truth_edges: int
    output_edges: int
    structure: bool
    structure_class: bool
    disagreements: list[tuple[str, str, str]]

    @property
    def node_f1(self) -> float:
        return f1(self.node_correct, self.truth_nodes, self.output_nodes)

    @property
    def edge_f1(self) -> float:
        return f1(self.edge_correct, self.truth_edges, self.output_edges)


def f1(correct: int, n_truth: int, n_out: int) -> float:
    if n_truth == 0 and n_out == 0:
        return 1.0
    r = correct / n_truth if n_truth else 0.0
    p = correct / n_out if n_out else 0.0
    return 0.0 if r + p == 0 else 2 * r * p / (r + p)


def graph_metrics(truth: MoleculeGraph, out: MoleculeGraph, align: Alignment | None = None) -> MoleculeScore:
    if align is None:
        align = align_nodes(truth, out)
    t_ren = {n.id: ("t", n.id) for n in truth.nodes}
    o_ren = {n.id: ("t", align.mapping[n.id]) if n.id in align.mapping else ("o", n.id)
             for n in out.nodes}
    t_lab = {t_ren[n.id]: n.label for n in truth.nodes}
    o_lab = {o_ren[n.id]: n.label for n in out.nodes}
    node_correct = sum(1 for k, v in o_lab.items() if t_lab.get(k) == v)
    t_edges = _edge_table(truth, t_ren)
    o_edges = _edge_table(out, o_ren)
    edge_correct = sum(1 for k, v in o_edges.items() if t_edges.get(k) == v)

    dis: list[tuple[str, str, str]] = []
    for k in sorted(set(t_lab) | set(o_lab)):
        a, b = t_lab.get(k, ABSENT), o_lab.get(k, ABSENT)
        if a != b:
            dis.append(("node", a, b))
    for k in sorted(set(t_edges) | set(o_edges), key=lambda s: sorted(s)):
        a, b = t_edges.get(k), o_edges.get(k)
        if a != b:
            dis.append(("edge", ABSENT if a is None else _display(a, k, None),
                        ABSENT if b is None else _display(b, k, a)))
    structure = not align.unmatched_output and not align.unmatched_truth \
        and set(t_edges) == set(o_edges)
    structure_class = structure and not dis
    return MoleculeScore(node_correct, len(truth.nodes), len(out.nodes), edge_correct,
                         len(t_edges), len(o_edges), structure, structure_class, dis)


# -- corpus reports --------------------------------------------------------

@dataclass
class CorpusItem:
    mol_id: str
    truth_graph: MoleculeGraph
    truth_smiles: str
    output_graph: MoleculeGraph | None
    output_smiles: str | None
    error: str | None = None


@dataclass
class EvalReport:
    exact_match_rate: float
    inverse_avg_nld: float
    node_f1: float
    edge_f1: float
    structure_rate: float
    structure_plus_class_rate: float
    molecules: int
    error_histogram: list[dict] = field(default_factory=list)
    per_molecule: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "exact_match_rate": self.exact_match_rate,
            "inverse_avg_nld": self.inverse_avg_nld,
            "node_f1": self.node_f1,
            "edge_f1": self.edge_f1,
            "structure_rate": self.structure_rate,
            "structure_plus_class_rate": self.structure_plus_class_rate,
            "molecules": self.molecules,
            "error_histogram": self.error_histogram,
            "per_molecule": self.per_molecule,
        }


def error_histogram(results: Iterable[tuple[str, MoleculeScore]]) -> list[dict]:
    groups: dict[tuple[str, str, str], list[str]] = {}
    for mol_id, score in results:
        for d in score.disagreements:
            groups.setdefault(d, []).append(mol_id)
    entries = [{"kind": k, "truth": t, "output": o, "count": len(ids), "molecules": sorted(set(ids))}
               for (k, t, o), ids in groups.items()]
    entries.sort(key=lambda e: (-e["count"], e["kind"], e["truth"], e["output"]))
    return entries


def evaluate_corpus(items: Sequence[CorpusItem]) -> EvalReport:
    if not items:
        raise EvaluationError("empty corpus")
    pairs = []
    scores: list[tuple[str, MoleculeScore]] = []
    per = []
    for it in items:
        t = canonical(it.truth_smiles)
        o = canonical(it.output_smiles) if it.output_smiles is not None else ""
        pairs.append((t, o))
        out_graph = it.output_graph if it.output_graph is not None else MoleculeGraph()
        s = graph_metrics(it.truth_graph, out_graph)
        scores.append((it.mol_id, s))
        per.append({"id": it.mol_id, "truth_smiles": t, "output_smiles": o, "exact": t == o,
                    "structure": s.structure, "structure_class": s.structure_class,
                    "node_f1": s.node_f1, "edge_f1": s.edge_f1, "error": it.error})
    n = len(items)
    nc = sum(s.node_correct for _, s in scores)
    ec = sum(s.edge_correct for _, s in scores)
    return EvalReport(
        exact_match_rate=sum(a == b for a, b in pairs) / n,
        inverse_avg_nld=inverse_avg_nld(pairs),
        node_f1=f1(nc, sum(s.truth_nodes for _, s in scores), sum(s.output_nodes for _, s in scores)),
        edge_f1=f1(ec, sum(s.truth_edges for _, s in scores), sum(s.output_edges for _, s in scores)),
        structure_rate=sum(s.structure for _, s in scores) / n,
        structure_plus_class_rate=sum(s.structure_class for _, s in scores) / n,
        molecules=n,
        error_histogram=error_histogram(scores),
        per_molecule=per,
    )


def report_html(report: EvalReport, link: Callable[[str], str] | None = None) -> str:
    esc = html.escape
    rows = []
    for name in ("exact_match_rate", "inverse_avg_nld", "node_f1", "edge_f1",
                 "structure_rate", "structure_plus_class_rate"):
        rows.append(f"<tr><th>{name}</th><td>{getattr(report, name):.4f}</td></tr>")
    hist = []
    for e in report.error_histogram:
        mols = ", ".join(f'<a href="{esc(link(m))}">{esc(m)}</a>' if link else esc(m)
                         for m in e["molecules"])
        hist.append(f"<tr><td>{esc(e['kind'])}</td><td>{esc(e['truth'])}</td>"
                    f"<td>{esc(e['output'])}</td><td>{e['count']}</td><td>{mols}</td></tr>")
    return ("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Evaluation report</title></head>"
            "<body>\n<h1>Evaluation report</h1>\n"
            f"<p>{report.molecules} molecules</p>\n<table>\n" + "\n".join(rows) + "\n</table>\n"
            "<h2>Error histogram</h2>\n<table>\n<tr><th>kind</th><th>truth</th><th>output</th>"
            "<th>count</th><th>molecules</th></tr>\n" + "\n".join(hist) + "\n</table>\n</body></html>\n")


def report_schema() -> dict:
    from importlib import resources
    return json.loads(resources.files("vecmol").joinpath("data/report.schema.json").read_text("utf-8"))


# -- grid search -----------------------------------------------------------

DEFAULT_GRID = [
    {"name": "stage1", "grid": {
        "ANGLE_TOLERANCE_DEGREES": [1, 3, 5, 10, 15],
        "CLOSE_NONPARALLEL_ALPHA": [1, 1.25, 1.5, 1.75, 2.0],
        "CLOSE_CHAR_LINE_ALPHA": [1, 1.25, 1.5, 1.75, 2.0]}},
    {"name": "stage2", "grid": {
        "S-WEDGE_LENGTHS_DIFF_RATIO": [0.70, 0.85, 0.90, 0.95],
        "NEG-CHARGE_Y_POSITION": [0, 0.25, 0.5],
        "NEG-CHARGE_LENGTH_TOLERANCE": [0.33, 0.5, 0.66]}},
    {"name": "stage3", "grid": {
        "ABS_COS_CHAR_PRUNE": [0.10, 0.15, 0.20],
        "CHAR_LINE_Z_TOLERANCE": [1.0, 1.5, 2.0],
        "MAX_ALPHA_DIST": [2.0, 2.5, 3.0]}},
]


@dataclass
class TuneSample:
    mol_id: str
    text: str
    fmt: str
    truth_smiles: str


def score_params(corpus: Sequence[TuneSample], params: ParserParams) -> tuple[float, float]:
    """(exact match rate, inverse average NLD) of parsing the corpus."""
    from .pipeline import parse_text

    pairs = []
    for s in corpus:
        try:
            out = write_smiles(parse_text(s.text, s.fmt, params).molecule)
        except Exception:  # any failure is a miss for this configuration
            out = ""
        pairs.append((canonical(s.truth_smiles), out))
    return sum(a == b for a, b in pairs) / len(pairs), inverse_avg_nld(pairs)


def grid_search(corpus: Sequence[TuneSample], stages: Sequence[dict] = DEFAULT_GRID,
                base: ParserParams = DEFAULT_PARAMS,
                log: Callable[[dict], None] | None = None) -> tuple[ParserParams, list[dict]]:
    """Search each stage's cartesian product in turn, freezing winners.

    Best means highest exact-match rate, then highest inverse NLD, then
    earliest in grid order.
    """
    if not corpus:
        raise EvaluationError("empty corpus")
    if not stages or any(not st.get("grid") for st in stages):
        raise EvaluationError("empty grid")
    params = base
    records: list[dict] = []
    for st in stages:
        names = list(st["grid"])
        values = [list(st["grid"][k]) for k in names]
        if any(not v for v in values):
            raise EvaluationError(f"stage {st.get('name')}: empty value list")
        best = None
        for run, combo in enumerate(itertools.product(*values)):
            setting = dict(zip(names, combo))
            trial = params.with_values(setting)
            em, inv = score_params(corpus, trial)
            rec = {"stage": st.get("name", ""), "run": run, "values": setting,
                   "exact_match_rate": em, "inverse_avg_nld": inv}
            records.append(rec)
            if log is not None:
                log(rec)
            if best is None or (em, inv) > best[0]:
                best = ((em, inv), setting)
        params = params.with_values(best[1])
    return params, records


def load_grid(text: str) -> list[dict]:
    doc = json.loads(text)
    stages = doc["stages"] if isinstance(doc, dict) else doc
    if not isinstance(stages, list) or not stages:
        raise EvaluationError("grid file has no stages")
    for st in stages:
        if not isinstance(st, dict) or not isinstance(st.get("grid"), dict) or not st["grid"]:
            raise EvaluationError("every stage needs a non-empty 'grid' object")
        for k, v in st["grid"].items():
            if not isinstance(v, list) or not v:
                raise EvaluationError(f"grid values for {k} must be a non-empty list")
            ParserParams().with_values({k: v[0]})
    return stages

