"""Command line entry point: harvest, clean, align, evaluate, report.

Exit codes: 0 success, 1 validation error, 2 I/O or network error,
64 bad usage. The PLAINALIGN_LOG environment variable (error, warn,
info, debug) controls log verbosity. Report commands print delimited
output and, when ``--out`` is given, also write it as files together
with rendered figures (disable with ``--no-figures``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .aligners import (
    AlignerConfig,
    align_cats_c3g,
    align_embed_threshold,
    align_massalign,
    load_embeddings,
)
from .corpus_model import (
    DocumentPair,
    SentenceAlignmentRecord,
    load_alignments,
    load_pairs,
    save_alignments,
)
from .errors import (
    ConfigurationError,
    ExtractionError,
    TransportError,
    UsageError,
    ValidationError,
)
from .eval_alignment import evaluate_corpus
from .harvester import (
    FixtureTransport,
    UrllibTransport,
    append_manifest_atomically,
    harvest_site,
    load_site_configs,
)
from .metrics_stats import MetricReport, corpus_stats, metric_report
from .preprocess import clean_aligned_pairs

logger = logging.getLogger("plainalign")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64

ALIGN_METHODS = ("massalign", "cats", "embed")
SUBSET_FLAGS = {"all": "all", "1to1": "one_to_one", "ntom": "n_to_m"}

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved paths and knobs for one command invocation."""

    manifest: Path | None = None
    alignments: Path | None = None
    embeddings_dir: Path | None = None
    out: Path | None = None
    aligner: AlignerConfig = field(default_factory=AlignerConfig)
    subset: str = "all"
    beta: float = 0.5
    seed: int = 0
    figures: bool = True

    def __post_init__(self) -> None:
        flags = {
            "manifest": "--manifest",
            "alignments": "--alignments",
            "embeddings_dir": "--embeddings",
        }
        for name, flag in flags.items():
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise ValidationError(f"{flag}: no such path: {path}")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plainalign", description=__doc__)
    parser.add_argument("--version", action="version", version=f"plainalign {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    harvest = sub.add_parser("harvest", help="fetch and pair configured web pages")
    harvest.add_argument("--site-config", required=True, help="JSON array of site configs")
    harvest.add_argument("--out", required=True, help="output directory")
    harvest.add_argument(
        "--fixtures",
        help="directory with fixtures.json for offline harvesting",
    )
    harvest.add_argument("--seed", type=int, default=0, help="reserved for sampling features")
    harvest.set_defaults(func=cmd_harvest)

    clean = sub.add_parser("clean", help="drop short, near-identical, duplicate pairs")
    clean.add_argument("--manifest", required=True)
    clean.add_argument("--alignments", required=True)
    clean.add_argument("--out", required=True, help="output directory")
    clean.add_argument("--seed", type=int, default=0, help="reserved for sampling features")
    clean.set_defaults(func=cmd_clean)

    align = sub.add_parser("align", help="run an automatic sentence aligner")
    align.add_argument("--manifest", required=True)
    align.add_argument("--method", required=True, choices=ALIGN_METHODS)
    align.add_argument("--embeddings", help="directory with <doc_id>.emb files")
    align.add_argument("--threshold", type=float, help="method's primary threshold")
    align.add_argument("--radius", type=int, help="vicinity radius (massalign)")
    align.add_argument("--mutual-best", action="store_true")
    align.add_argument("--out", required=True, help="alignment TSV to write")
    align.add_argument("--seed", type=int, default=0)
    align.set_defaults(func=cmd_align)

    evaluate = sub.add_parser("eval-align", help="score predictions against gold")
    evaluate.add_argument("--gold", required=True)
    evaluate.add_argument("--pred", required=True)
    evaluate.add_argument("--manifest", help="needed for --exclude-identical")
    evaluate.add_argument("--subset", choices=sorted(SUBSET_FLAGS), default="all")
    evaluate.add_argument("--beta", type=float, default=0.5)
    evaluate.add_argument("--exclude-identical", action="store_true")
    evaluate.add_argument("--out", help="directory for report files and figures")
    evaluate.add_argument("--no-figures", action="store_true")
    evaluate.add_argument("--seed", type=int, default=0, help="reserved for sampling features")
    evaluate.set_defaults(func=cmd_eval_align)

    stats = sub.add_parser("stats", help="corpus statistics table")
    stats.add_argument("--manifest", required=True)
    stats.add_argument("--alignments", required=True)
    stats.add_argument("--out", help="directory for report files and figures")
    stats.add_argument("--no-figures", action="store_true")
    stats.add_argument("--seed", type=int, default=0, help="reserved for sampling features")
    stats.set_defaults(func=cmd_stats)

    metrics = sub.add_parser("metrics", help="SARI, BLEU, and reading ease")
    metrics.add_argument("--sources", required=True, help="one item per line")
    metrics.add_argument("--outputs", required=True)
    metrics.add_argument("--refs", required=True)
    metrics.add_argument(
        "--identity",
        action="store_true",
        help="also score the copy-the-source baseline",
    )
    metrics.add_argument("--system-name", default="system")
    metrics.add_argument("--out", help="directory for report files and figures")
    metrics.add_argument("--no-figures", action="store_true")
    metrics.add_argument("--seed", type=int, default=0, help="reserved for sampling features")
    metrics.set_defaults(func=cmd_metrics)

    return parser


def _read_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8", newline="\n") as handle:
        lines = handle.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _require_exists(path: str | Path, flag: str) -> Path:
    resolved = Path(path)
    if not resolved.exists():
        raise ValidationError(f"{flag}: no such path: {resolved}")
    return resolved


# ---------------------------------------------------------------------------
# Commands


def cmd_harvest(args: argparse.Namespace) -> int:
    site_config_path = _require_exists(args.site_config, "--site-config")
    out_dir = Path(args.out)
    if args.fixtures:
        transport = FixtureTransport(_require_exists(args.fixtures, "--fixtures"))
    else:
        transport = UrllibTransport()
    sites = load_site_configs(site_config_path)
    all_rows = []
    reports = []
    for site in sites:
        rows, report = harvest_site(site, transport, out_dir)
        all_rows.extend(rows)
        reports.append(report)
        logger.info(
            "site %s: %d pairs, %d unpaired",
            site.site_id,
            len(rows),
            len(report.unpaired),
        )
    append_manifest_atomically(all_rows, out_dir / "manifest.tsv")
    _write_harvest_report(reports, out_dir)
    for report in reports:
        strategies = ", ".join(
            f"{strategy}={count}"
            for strategy, count in sorted(report.pairs_by_strategy.items())
        )
        print(
            f"{report.site_id}\tpairs={sum(report.pairs_by_strategy.values())}"
            f"\t{strategies or 'none'}\tunpaired={len(report.unpaired)}"
        )
    return EXIT_OK


def _write_harvest_report(reports, out_dir: Path) -> None:
    import json

    payload = [
        {
            "site_id": report.site_id,
            "n_fetched": report.n_fetched,
            "n_skipped": report.n_skipped,
            "pairs_by_strategy": dict(sorted(report.pairs_by_strategy.items())),
            "unpaired": [
                {"url": doc.url, "doc_id": doc.doc_id, "role": doc.role}
                for doc in report.unpaired
            ],
        }
        for report in reports
    ]
    with open(out_dir / "harvest_report.json", "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, ensure_ascii=False, sort_keys=True, indent=2)
        handle.write("\n")


def cmd_clean(args: argparse.Namespace) -> int:
    config = PipelineConfig(
        manifest=Path(args.manifest), alignments=Path(args.alignments)
    )
    corpus = _load_corpus_with_alignments(config.manifest, config.alignments)
    aligned_texts = []
    for pair, records in corpus:
        for record in records:
            complex_text = " ".join(
                pair.complex.sentences[i].text for i in record.complex_indices
            )
            simple_text = " ".join(
                pair.simple.sentences[j].text for j in record.simple_indices
            )
            aligned_texts.append((complex_text, simple_text, (pair.pair_id, record)))
    kept, report = clean_aligned_pairs(aligned_texts)
    records_by_pair: dict[str, list[SentenceAlignmentRecord]] = {
        pair.pair_id: [] for pair, _records in corpus
    }
    for _complex_text, _simple_text, (pair_id, record) in kept:
        records_by_pair[pair_id].append(record)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_alignments(records_by_pair, out_dir / "alignments.tsv")
    report_tsv = (
        "removed_short\tremoved_near_identical\tremoved_duplicates\tkept\n"
        f"{report.removed_short}\t{report.removed_near_identical}"
        f"\t{report.removed_duplicates}\t{report.kept}\n"
    )
    (out_dir / "cleaning_report.tsv").write_text(report_tsv, encoding="utf-8")
    print(report_tsv, end="")
    return EXIT_OK


def _load_corpus_with_alignments(manifest: Path, alignments: Path):
    pairs = load_pairs(manifest)
    records_by_pair = load_alignments(alignments)
    known = {pair.pair_id for pair in pairs}
    unknown = set(records_by_pair) - known
    if unknown:
        raise ValidationError(
            f"alignments reference unknown pair_id(s): {sorted(unknown)}"
        )
    return [(pair, records_by_pair.get(pair.pair_id, [])) for pair in pairs]


def cmd_align(args: argparse.Namespace) -> int:
    config = PipelineConfig(
        manifest=Path(args.manifest),
        embeddings_dir=Path(args.embeddings) if args.embeddings else None,
        seed=args.seed,
        aligner=_aligner_config(args),
    )
    pairs = load_pairs(config.manifest)
    records_by_pair: dict[str, list[SentenceAlignmentRecord]] = {}
    for pair in pairs:
        if args.method == "massalign":
            records = align_massalign(pair, config.aligner)
        elif args.method == "cats":
            records = align_cats_c3g(pair, config.aligner)
        else:
            if config.embeddings_dir is None:
                raise ValidationError("--embeddings is required for method 'embed'")
            embeds = (
                load_embeddings(config.embeddings_dir / f"{pair.complex.doc_id}.emb"),
                load_embeddings(config.embeddings_dir / f"{pair.simple.doc_id}.emb"),
            )
            records = align_embed_threshold(pair, embeds, config.aligner)
        records_by_pair[pair.pair_id] = records
    out_path = Path(args.out)
    save_alignments(records_by_pair, out_path)
    total = sum(len(records) for records in records_by_pair.values())
    print(f"aligned\t{total}\tpairs\t{len(pairs)}\tmethod\t{args.method}")
    return EXIT_OK


def _aligner_config(args: argparse.Namespace) -> AlignerConfig:
    kwargs = {}
    if args.threshold is not None:
        key = {
            "massalign": "merge_threshold",
            "cats": "cats_threshold",
            "embed": "embed_threshold",
        }[args.method]
        kwargs[key] = args.threshold
    if getattr(args, "radius", None) is not None:
        kwargs["vicinity_radius"] = args.radius
    if getattr(args, "mutual_best", False):
        kwargs["mutual_best"] = True
    return AlignerConfig(**kwargs)


def cmd_eval_align(args: argparse.Namespace) -> int:
    gold_path = _require_exists(args.gold, "--gold")
    pred_path = _require_exists(args.pred, "--pred")
    subset = SUBSET_FLAGS[args.subset]
    gold = load_alignments(gold_path)
    pred = load_alignments(pred_path)
    pairs_by_id: dict[str, DocumentPair] | None = None
    if args.manifest:
        manifest = _require_exists(args.manifest, "--manifest")
        pairs_by_id = {pair.pair_id: pair for pair in load_pairs(manifest)}
        unknown = (set(gold) | set(pred)) - set(pairs_by_id)
        if unknown:
            raise ValidationError(
                f"alignments reference unknown pair_id(s): {sorted(unknown)}"
            )
    elif args.exclude_identical:
        raise ValidationError("--exclude-identical requires --manifest")
    report = evaluate_corpus(
        gold,
        pred,
        subset=subset,
        beta=args.beta,
        pairs=pairs_by_id,
        exclude_identical=args.exclude_identical,
    )
    print(report.to_tsv(), end="")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "eval_report.tsv").write_text(report.to_tsv(), encoding="utf-8")
        (out_dir / "eval_report.json").write_text(report.to_json(), encoding="utf-8")
        if not args.no_figures:
            from .figures import save_eval_figure

            save_eval_figure([report], out_dir / "eval_report.png")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    config = PipelineConfig(
        manifest=Path(args.manifest), alignments=Path(args.alignments)
    )
    corpus = _load_corpus_with_alignments(config.manifest, config.alignments)
    table = corpus_stats(corpus)
    print(table.to_tsv(), end="")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "corpus_stats.tsv").write_text(table.to_tsv(), encoding="utf-8")
        (out_dir / "corpus_stats.json").write_text(table.to_json(), encoding="utf-8")
        if not args.no_figures:
            from .figures import save_alignment_type_figure

            save_alignment_type_figure(table, out_dir / "alignment_types.png")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    sources = _read_lines(_require_exists(args.sources, "--sources"))
    outputs = _read_lines(_require_exists(args.outputs, "--outputs"))
    references = _read_lines(_require_exists(args.refs, "--refs"))
    rows: list[tuple[str, MetricReport]] = [
        (args.system_name, metric_report(sources, outputs, references))
    ]
    if args.identity:
        rows.append(("src2src", metric_report(sources, sources, references)))
    lines = ["system\tsari\tbleu\tfre\tn"]
    for name, report in rows:
        lines.append(
            f"{name}\t{report.sari:.3f}\t{report.bleu:.3f}"
            f"\t{report.fre:.3f}\t{report.n_items}"
        )
    output_text = "\n".join(lines) + "\n"
    print(output_text, end="")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "metrics.tsv").write_text(output_text, encoding="utf-8")
        if not args.no_figures:
            from .figures import save_metric_figure

            save_metric_figure(rows, out_dir / "metrics.png")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point


def _configure_logging() -> None:
    level_name = os.environ.get("PLAINALIGN_LOG", "warn").lower()
    level = LOG_LEVELS.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ConfigurationError, ExtractionError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (TransportError, OSError) as exc:
        logger.error("%s", exc)
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
