"""Command-line entry point: ``udsgraph <command> ...``.

Exit codes are 0 on success, 1 when some input data failed, and 2 for
usage errors and malformed queries.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

from .annotations import AttachmentError, AnnotationLoadError, attach_attributes, crosstab_counts
from .annotations import read_raw_annotations, render_crosstabs
from .conllu import SPLITS, ConlluError, SentenceValidationError, iter_blocks, parse_block
from .extraction import RuleConfig, extract_predicates
from .normalization.optim import OptimizerConfig
from .normalization.pipeline import load_attributes, normalize, write_attributes
from .query import QuerySyntaxError, QueryTypeError, evaluate, parse_query, to_triples, to_tsv
from .semantics import UdsGraph, build_uds_graph
from .serialization import DocumentError, export_ntriples, parse_document, render_document
from .syntax import build_syntax_graph

log = logging.getLogger("udsgraph")

EXPORT_FORMATS = ["ntriples"]
EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _document_paths(paths: list[str]) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("*.json")))
        elif p.exists():
            out.append(p)
        else:
            raise UsageError(f"no such file or directory: {p}")
    return out


def _load_documents(paths: list[str]) -> list[UdsGraph]:
    graphs = []
    for p in _document_paths(paths):
        try:
            graphs.append(parse_document(p.read_text(encoding="utf-8")))
        except DocumentError as exc:
            raise DocumentError(f"{p}: {exc}") from None
    return graphs


def _file_name(sentence_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", sentence_id) + ".json"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_build(args) -> int:
    rules = RuleConfig.load(args.config) if args.config else RuleConfig()
    out = Path(args.out)
    failures = 0
    for path in map(Path, args.conllu):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        for index, (_, block) in enumerate(iter_blocks(text), start=1):
            default_id = f"{path.stem}-{args.split}-{index}"
            try:
                sentence = parse_block(block, args.split, default_id)
                g = build_syntax_graph(sentence)
                u = build_uds_graph(g, extract_predicates(g, rules), args.split)
            except (ConlluError, SentenceValidationError) as exc:
                log.error("%s: sentence %d: %s", path, index, exc)
                failures += 1
                continue
            _write(out / _file_name(u.sentence_id), render_document(u))
    return EXIT_DATA if failures else EXIT_OK


def cmd_normalize(args) -> int:
    cfg = OptimizerConfig.load(args.config) if args.config else OptimizerConfig()
    lines = []
    for path in args.raw:
        try:
            lines.extend(Path(path).read_text(encoding="utf-8").splitlines())
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    raw = read_raw_annotations(lines)
    result = normalize(raw, cfg, protoroles_zscore_first=args.zscore_first)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_attributes(result.attributes, out / "attributes.jsonl")
    _write(out / "diagnostics.jsonl",
           "".join(json.dumps(d, sort_keys=True) + "\n" for d in result.diagnostics))
    for d in result.diagnostics:
        if not d["converged"]:
            log.warning("fit %s/%s did not converge", d["subspace"], d["property"])
    if args.strict and not result.converged:
        return EXIT_DATA
    return EXIT_OK


def cmd_annotate(args) -> int:
    graphs = _load_documents(args.documents)
    attrs = load_attributes(args.attributes)
    owner = {}
    for n, u in enumerate(graphs):
        for node_id in u.semantics_nodes:
            owner[node_id] = n
    per_graph: dict[int, dict] = {}
    failures = 0
    for key, av in attrs.items():
        target = key[0]
        node = target[0] if isinstance(target, tuple) else target
        if node not in owner:
            log.error("attribute target %r is not in any document", target)
            failures += 1
            continue
        per_graph.setdefault(owner[node], {})[key] = av
    out = Path(args.out)
    for n, u in enumerate(graphs):
        try:
            u = attach_attributes(u, per_graph.get(n, {}))
        except AttachmentError as exc:
            log.error("%s: %s", u.sentence_id, exc)
            failures += 1
            continue
        _write(out / _file_name(u.sentence_id), render_document(u))
    return EXIT_DATA if failures else EXIT_OK


def cmd_query(args) -> int:
    if (args.query is None) == (args.expression is None):
        raise UsageError("give exactly one of --query FILE or -e TEXT")
    text = Path(args.query).read_text(encoding="utf-8") if args.query else args.expression
    q = parse_query(text)
    view = to_triples(_load_documents(args.documents))
    rows = evaluate(q, view, distinct=args.distinct)
    sys.stdout.write(to_tsv(q, rows))
    return EXIT_OK


def cmd_stats(args) -> int:
    graphs = _load_documents(args.documents)
    splits = tuple(args.split) if args.split else SPLITS
    tabs = crosstab_counts((u for u in graphs if (u.split or "train") in splits), splits)
    sys.stdout.write(render_crosstabs({s: tabs[s] for s in splits}))
    return EXIT_OK


def cmd_export(args) -> int:
    if args.format not in EXPORT_FORMATS:
        raise UsageError(f"unsupported format {args.format!r}; supported formats: {EXPORT_FORMATS}")
    text = export_ntriples(to_triples(_load_documents(args.documents)))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udsgraph", description="Build and query decompositional semantic graphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="CoNLL-U files to graph documents")
    p.add_argument("conllu", nargs="+")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="extraction rule config (JSON)")
    p.add_argument("--split", default="train", choices=SPLITS)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("normalize", help="raw responses to attribute values")
    p.add_argument("raw", nargs="+", help="raw annotation JSONL files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="optimizer config (JSON)")
    p.add_argument("--strict", action="store_true", help="exit 1 if any fit did not converge")
    p.add_argument("--zscore-first", action="store_true",
                   help="z-score protoroles values before applicability scaling")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("annotate", help="attach attribute values to graph documents")
    p.add_argument("documents", nargs="+")
    p.add_argument("--attributes", required=True, help="attributes.jsonl from normalize")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("query", help="evaluate a query over graph documents")
    p.add_argument("documents", nargs="+")
    p.add_argument("--query", help="file holding the query")
    p.add_argument("-e", "--expression", help="query text")
    p.add_argument("--distinct", action="store_true", help="drop duplicate rows")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("stats", help="annotation cross-tabs per split")
    p.add_argument("documents", nargs="*")
    p.add_argument("--split", action="append", choices=SPLITS)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="export graph documents as N-Triples")
    p.add_argument("documents", nargs="+")
    p.add_argument("--format", default="ntriples")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, QuerySyntaxError) as exc:
        print(f"udsgraph {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DocumentError, AnnotationLoadError, QueryTypeError, ValueError, OSError) as exc:
        print(f"udsgraph {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
