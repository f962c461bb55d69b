"""Command-line interface: parse, batch, eval, tune and fixtures.

Exit codes are 0 on success, 1 for usage errors, 2 for unreadable or
malformed input and 3 when the pipeline itself fails. ``VECMOL_PARAMS``
names the default parameter file.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .chemio import FormatError, read_cdxml, read_lg, write_cdxml, write_lg
from .evaluation import (CorpusItem, EvaluationError, TuneSample, evaluate_corpus, grid_search,
                         load_grid, report_html, DEFAULT_GRID)
from .fixtures import (GenerationError, ablation_corpus, divergence_corpus, dominated_corpus,
                       standard_corpus, thickness_corpus, write_corpus)
from .geometry import GeometryError
from .graph import StructuralError
from .ingest import IngestError
from .mst import GraphError, to_dot
from .params import DEFAULT_PARAMS, ParamsError, ParserParams
from .pipeline import guess_format, parse_text
from .smiles import SmilesError, write_smiles

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_PIPELINE = 0, 1, 2, 3
PARAMS_ENV = "VECMOL_PARAMS"

INPUT_ERRORS = (OSError, UnicodeDecodeError, IngestError, FormatError, ParamsError, GeometryError)
PIPELINE_ERRORS = (StructuralError, GraphError, SmilesError, EvaluationError, GenerationError)


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_params(path: str | None) -> ParserParams:
    path = path or os.environ.get(PARAMS_ENV)
    if not path:
        return DEFAULT_PARAMS
    return ParserParams.load(path)


# -- manifest --------------------------------------------------------------

@dataclass(frozen=True)
class ManifestRow:
    truth_lg: Path
    truth_smiles: str
    input_path: Path

    @property
    def mol_id(self) -> str:
        return self.input_path.stem


def read_manifest(path: str | Path) -> list[ManifestRow]:
    """Rows of ``truth Lg<TAB>truth SMILES<TAB>input``; relative paths are
    resolved against the manifest's directory."""
    path = Path(path)
    base = path.parent
    rows = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip() or raw.startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 3:
            raise InputError(f"{path}:{lineno}: expected 3 tab-separated fields")
        lg, smi, inp = (p.strip() for p in parts)
        rows.append(ManifestRow(base / lg, smi, base / inp))
    if not rows:
        raise InputError(f"{path}: manifest is empty")
    stems = [r.mol_id for r in rows]
    if len(set(stems)) != len(stems):
        raise InputError(f"{path}: input file names must be unique")
    return rows


# -- parse -----------------------------------------------------------------

def cmd_parse(args) -> int:
    params = _load_params(args.params)
    path = Path(args.input)
    text = path.read_text(encoding="utf-8")
    fmt = args.format or guess_format(path)
    if fmt == "cdxml":
        mol, res = read_cdxml(text), None
    else:
        res = parse_text(text, fmt, params)
        mol = res.molecule
        for w in res.warnings:
            print(f"warning: {w}", file=sys.stderr)
    smiles = write_smiles(mol)
    wrote = False
    if args.cdxml:
        Path(args.cdxml).write_text(write_cdxml(mol), encoding="utf-8")
        wrote = True
    if args.lg:
        Path(args.lg).write_text(write_lg(mol), encoding="utf-8")
        wrote = True
    if args.dot:
        if res is None:
            raise UsageError("--dot needs a drawing input, not CDXML")
        Path(args.dot).write_text(to_dot(res.visual), encoding="utf-8")
        wrote = True
    if args.smiles:
        Path(args.smiles).write_text(smiles + "\n", encoding="utf-8")
    elif not wrote or args.print_smiles:
        print(smiles)
    return EXIT_OK


# -- batch -----------------------------------------------------------------

def _batch_one(job: tuple[str, str, ParserParams]) -> tuple[str, float, str | None]:
    """Parse one input and write its outputs; returns (id, ms, error)."""
    inp, out_dir, params = job
    path = Path(inp)
    stem = path.stem
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        t0 = time.perf_counter()
        try:
            mol = parse_text(path.read_text(encoding="utf-8"), guess_format(path), params).molecule
            smiles = write_smiles(mol)
        except INPUT_ERRORS + PIPELINE_ERRORS as e:
            return stem, (time.perf_counter() - t0) * 1000.0, f"{type(e).__name__}: {e}"
        ms = (time.perf_counter() - t0) * 1000.0
    out = Path(out_dir)
    (out / f"{stem}.cdxml").write_text(write_cdxml(mol), encoding="utf-8")
    (out / f"{stem}.lg").write_text(write_lg(mol), encoding="utf-8")
    (out / f"{stem}.smi").write_text(smiles + "\n", encoding="utf-8")
    return stem, ms, None


def timing_summary(times_ms: list[float], wall_s: float) -> dict:
    ordered = sorted(times_ms)
    p95 = ordered[min(len(ordered) - 1, max(0, int(round(0.95 * len(ordered))) - 1))] if ordered else 0.0
    return {"molecules": len(times_ms), "total_s": wall_s,
            "mean_ms": statistics.fmean(times_ms) if times_ms else 0.0, "p95_ms": p95}


def run_batch(rows: list[ManifestRow], out_dir: Path, params: ParserParams, jobs: int = 1):
    out_dir.mkdir(parents=True, exist_ok=True)
    work = [(str(r.input_path), str(out_dir), params) for r in rows]
    t0 = time.perf_counter()
    if jobs == 1:
        results = [_batch_one(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    wall = time.perf_counter() - t0
    failures = [(stem, err) for stem, _, err in results if err is not None]
    fail_file = out_dir / "failures.tsv"
    if failures:
        fail_file.write_text("".join(f"{s}\t{e}\n" for s, e in failures), encoding="utf-8")
    elif fail_file.exists():
        fail_file.unlink()
    summary = timing_summary([ms for _, ms, err in results if err is None], wall)
    summary["failures"] = len(failures)
    return summary, failures


def cmd_batch(args) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    params = _load_params(args.params)
    rows = read_manifest(args.manifest)
    summary, failures = run_batch(rows, Path(args.out), params, args.jobs)
    for stem, err in failures:
        print(f"warning: {stem}: {err}", file=sys.stderr)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


# -- eval ------------------------------------------------------------------

def load_predictions(rows: list[ManifestRow], pred_dir: Path) -> list[CorpusItem]:
    items = []
    for r in rows:
        truth = read_lg(r.truth_lg.read_text(encoding="utf-8"))
        cdxml = pred_dir / f"{r.mol_id}.cdxml"
        smi = pred_dir / f"{r.mol_id}.smi"
        graph = out_smiles = error = None
        try:
            if cdxml.exists():
                graph = read_cdxml(cdxml.read_text(encoding="utf-8"))
            if smi.exists():
                out_smiles = smi.read_text(encoding="utf-8").strip()
            elif graph is not None:
                out_smiles = write_smiles(graph)
            if graph is None and out_smiles is None:
                error = "missing prediction"
        except (FormatError, SmilesError, StructuralError) as e:
            error = f"unreadable prediction: {e}"
        items.append(CorpusItem(r.mol_id, truth, r.truth_smiles, graph, out_smiles, error))
    return items


def cmd_eval(args) -> int:
    rows = read_manifest(args.manifest)
    report = evaluate_corpus(load_predictions(rows, Path(args.predictions)))
    doc = json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
    if args.json:
        Path(args.json).write_text(doc, encoding="utf-8")
    else:
        sys.stdout.write(doc)
    if args.html:
        pred = Path(args.predictions)
        Path(args.html).write_text(report_html(report, lambda m: str(pred / f"{m}.cdxml")),
                                   encoding="utf-8")
    return EXIT_OK


# -- tune ------------------------------------------------------------------

def cmd_tune(args) -> int:
    rows = read_manifest(args.manifest)
    stages = load_grid(Path(args.grid).read_text(encoding="utf-8")) if args.grid else DEFAULT_GRID
    corpus = [TuneSample(r.mol_id, r.input_path.read_text(encoding="utf-8"), guess_format(r.input_path),
                         r.truth_smiles) for r in rows]
    base = _load_params(args.params)
    log_fh = open(args.log, "w", encoding="utf-8") if args.log else None
    try:
        def log(rec):
            if log_fh is not None:
                log_fh.write(json.dumps(rec, sort_keys=True) + "\n")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params, records = grid_search(corpus, stages, base, log)
    finally:
        if log_fh is not None:
            log_fh.close()
    text = params.dumps()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    counts = {}
    for rec in records:
        counts[rec["stage"]] = counts.get(rec["stage"], 0) + 1
    print(", ".join(f"{k}: {v} runs" for k, v in counts.items()), file=sys.stderr)
    return EXIT_OK


# -- fixtures --------------------------------------------------------------

def cmd_fixtures(args) -> int:
    if args.corpus == "standard":
        fx = standard_corpus(args.count, args.seed)
    elif args.corpus == "ablation":
        fx = ablation_corpus()
    elif args.corpus == "thickness":
        fx = [f for group in thickness_corpus().values() for f in group]
    elif args.corpus == "divergence":
        fx = divergence_corpus()
    else:
        fx = dominated_corpus()
    manifest = write_corpus(fx, args.out)
    print(f"{len(fx)} fixtures, manifest {manifest}")
    return EXIT_OK


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vecmol", description="Parse born-digital molecule drawings into structures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    params_help = f"parameter file (key=value); defaults to ${PARAMS_ENV}"

    s = sub.add_parser("parse", help="parse one drawing")
    s.add_argument("input")
    s.add_argument("--format", choices=("json", "instr", "cdxml"), help="input format (default: by suffix)")
    s.add_argument("--params", help=params_help)
    s.add_argument("--cdxml", help="write the molecule as CDXML")
    s.add_argument("--lg", help="write the molecule as an Lg file")
    s.add_argument("--smiles", help="write the canonical SMILES to a file")
    s.add_argument("--dot", help="write the visual structure graph in DOT")
    s.add_argument("--print-smiles", action="store_true", help="print SMILES even when writing files")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("batch", help="parse every input of a manifest")
    s.add_argument("manifest")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--params", help=params_help)
    s.set_defaults(func=cmd_batch)

    s = sub.add_parser("eval", help="score predictions against a manifest's truth")
    s.add_argument("manifest")
    s.add_argument("predictions", help="directory of <id>.cdxml / <id>.smi files")
    s.add_argument("--json", help="report JSON path (default: stdout)")
    s.add_argument("--html", help="also write an HTML report")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("tune", help="staged grid search over parser parameters")
    s.add_argument("manifest")
    s.add_argument("--grid", help="JSON grid file (default: the built-in three-stage grid)")
    s.add_argument("--params", help="starting parameters; " + params_help)
    s.add_argument("--out", help="tuned parameter file (default: stdout)")
    s.add_argument("--log", help="JSON-lines log of every run")
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("fixtures", help="generate a synthetic corpus with ground truth")
    s.add_argument("out")
    s.add_argument("--corpus", default="standard",
                   choices=("standard", "ablation", "thickness", "divergence", "dominated"))
    s.add_argument("--count", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_fixtures)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"vecmol: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError,) + INPUT_ERRORS as e:
        print(f"vecmol: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except PIPELINE_ERRORS as e:
        print(f"vecmol: pipeline error: {e}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
