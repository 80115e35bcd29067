"""Batch entry points: preannotate, evaluate, split, stats, serve, init.

Data goes to stdout, diagnostics to stderr. Exit codes: 0 success,
1 internal error, 2 user or input error.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
import traceback
from pathlib import Path

from . import evaluation
from .corpus import corpus_stats, load_corpus, split_manifest, stratified_split
from .ensemble import EnsembleConfig
from .errors import CleanError
from .extractor import load_negation_lexicon
from .lexicon import load_lexicon
from .project import Project, run_preannotation
from .standoff import doc_to_mentions, parse_ann

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USER = 2


def _parse_method(raw: str, negation_policy: str) -> EnsembleConfig:
    if raw.startswith("vote:"):
        try:
            k = int(raw.split(":", 1)[1])
        except ValueError:
            raise CleanError(f"bad vote count in --method {raw!r}") from None
        return EnsembleConfig(method="vote", vote_k=k, negation_policy=negation_policy)
    return EnsembleConfig(method=raw, negation_policy=negation_policy)


def cmd_preannotate(args: argparse.Namespace) -> int:
    lexicon = load_lexicon(args.lexicon)
    neg = load_negation_lexicon(args.negation_lexicon)
    cfg = _parse_method(args.method, args.negation_policy)
    results = run_preannotation(
        args.corpus, lexicon, args.out, tools_dir=args.tools_dir, cfg=cfg, neg=neg
    )
    print(f"wrote {len(results)} .ann files to {args.out}", file=sys.stderr)
    return EXIT_OK


def _read_mentions(directory: Path, note, kind: str) -> list:
    path = directory / f"{note.id}.ann"
    if not path.exists():
        print(f"warning: no {kind} file for {note.id}, treating as empty", file=sys.stderr)
        return []
    return doc_to_mentions(parse_ann(path.read_text(encoding="utf-8")), note, source=kind)


def _fmt(summary: evaluation.MetricSummary) -> str:
    return f"{summary.mean:.3f} ({summary.ci_low:.3f} to {summary.ci_high:.3f})"


def cmd_evaluate(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    gold_dir, pred_dir = Path(args.gold), Path(args.pred)
    levels = ["note", "sentence"] if args.level == "both" else [args.level]

    all_scores: dict[str, list[evaluation.NoteScore]] = {lv: [] for lv in levels}
    print("note_id\tlevel\tprecision\trecall\tf1\tconcept_frequency\tlength")
    for note in corpus.notes:
        gold = _read_mentions(gold_dir, note, "gold")
        pred = _read_mentions(pred_dir, note, "pred")
        for level in levels:
            if level == "note":
                score = evaluation.note_level_score(gold, pred, note, args.policy)
            else:
                score = evaluation.sentence_level_score(
                    gold, pred, note, corpus.sentences[note.id], args.policy
                )
            all_scores[level].append(score)
            print(
                f"{score.note_id}\t{score.level}\t{score.precision:.4f}\t{score.recall:.4f}"
                f"\t{score.f1:.4f}\t{score.concept_frequency}\t{score.length}"
            )

    reports = {lv: evaluation.aggregate(scores, corpus_id=str(args.gold)) for lv, scores in all_scores.items()}
    print()
    print("Level\tPrecision (95% CI)\tRecall (95% CI)\tF1 (95% CI)")
    for level in levels:
        rep = reports[level]
        print(f"{level}\t{_fmt(rep.precision)}\t{_fmt(rep.recall)}\t{_fmt(rep.f1)}")

    if args.json:
        payload = {
            level: {
                "precision": rep.precision.__dict__,
                "recall": rep.recall.__dict__,
                "f1": rep.f1.__dict__,
                "notes": [s.__dict__ for s in rep.scores],
            }
            for level, rep in reports.items()
        }
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_split(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    strata = {}
    for lineno, line in enumerate(Path(args.strata).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CleanError(f"{args.strata}:{lineno}: expected note-id<TAB>label")
        strata[parts[0]] = parts[1]
    parts_list = stratified_split(corpus, strata, k=args.k, seed=args.seed)
    manifest = split_manifest(corpus, parts_list, args.seed)
    if args.out:
        Path(args.out).write_text(manifest, encoding="utf-8")
        print(f"wrote manifest to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(manifest)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    stats = corpus_stats(load_corpus(args.corpus))
    print(f"notes\t{stats.note_count}")
    print(f"total_words\t{stats.total_words}")
    print(f"mean_words_per_note\t{stats.mean_words_per_note:.1f}")
    print(f"stddev_words_per_note\t{stats.stddev_words_per_note:.1f}")
    return EXIT_OK


def cmd_init(args: argparse.Namespace) -> int:
    neg = load_negation_lexicon(args.negation_lexicon)
    Project.init(
        args.project,
        args.corpus,
        args.lexicon,
        pre_dir=args.pre,
        neg=neg,
        force=args.force,
    )
    print(f"initialized project at {args.project}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    project = Project(args.project)

    # fail fast with a clean diagnostic instead of a server traceback
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
    except OSError:
        print(f"AddressInUse: {args.host}:{args.port}", file=sys.stderr)
        return EXIT_USER
    finally:
        probe.close()

    import uvicorn

    from .service import create_app

    app = create_app(project, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clean", description="Clinical note annotation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preannotate", help="run the pipeline and write .ann files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tools-dir", default=None)
    p.add_argument("--method", default="union", help="union | intersection | vote:k")
    p.add_argument("--negation-policy", default="keep-flag", choices=["keep-flag", "drop-negated"])
    p.add_argument("--negation-lexicon", default=None)
    p.set_defaults(func=cmd_preannotate)

    p = sub.add_parser("evaluate", help="score predicted .ann files against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--level", default="both", choices=["note", "sentence", "both"])
    p.add_argument("--negation-policy", dest="policy", default="ignore-assertion",
                   choices=["ignore-assertion", "affirmed-only"])
    p.add_argument("--json", default=None, help="also write a JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("split", help="stratified random split of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--strata", required=True, help="file of note-id<TAB>label lines")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="corpus size statistics")
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("init", help="create an annotation project")
    p.add_argument("--project", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--pre", default=None, help=".ann dir; omit to run the built-in pipeline")
    p.add_argument("--negation-lexicon", default=None)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("serve", help="serve the annotation API (and UI if built)")
    p.add_argument("--project", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8711)
    p.add_argument("--static", default=None, help="directory of built UI assets")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CleanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except (FileNotFoundError, NotADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
