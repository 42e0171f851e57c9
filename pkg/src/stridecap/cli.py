"""Command line entry point: ``ingest``, ``caption``, ``evaluate`` and ``report``.

Exit codes: 0 success (including partial success), 1 nothing produced,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ALL_METRICS, load_config
from .core import ConfigError, ParseError, StrideCapError, ValidationError
from .ingest import manifest_from_annotations, read_manifest, serialize_manifest
from .metrics.evaluate import build_report, match_captions, report_to_csv
from .pipeline import CAPTIONS_FILE, SUMMARY_FILE, make_backends, read_captions, run_caption, \
    write_caption_outputs
from .report import FORMATS, RunRecord, UsageError, aggregate_runs, emit_table
from .stride import EmbeddingFailed
from .synthetic import write_synthetic_corpus

logger = logging.getLogger("stridecap")

EXIT_OK, EXIT_EMPTY, EXIT_USAGE = 0, 1, 2


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--mock", action="store_true", default=None,
                   help="use deterministic offline backends")
    p.add_argument("--seed", type=int, help="run seed")
    p.add_argument("--out", help="output path (file or directory, per subcommand)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="stridecap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="annotations -> scene manifest JSON")
    p.add_argument("annotations", nargs="?", help="YouCookII-style annotation JSON")
    p.add_argument("--split", help="keep only this subset (e.g. validation)")
    p.add_argument("--synthetic", metavar="DIR",
                   help="write the bundled 12-scene synthetic corpus to DIR and ingest it")

    p = sub.add_parser("caption", parents=[common], help="caption every scene of a manifest")
    p.add_argument("--manifest")
    p.add_argument("--frames-root", dest="frames_root")
    p.add_argument("--M", type=int, dest="M", help="subsample rate")
    p.add_argument("--K", type=int, dest="K", help="window size")
    p.add_argument("--s-base", type=float, dest="s_base")
    p.add_argument("--s-max", type=float, dest="s_max")
    p.add_argument("--alpha", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("evaluate", parents=[common], help="score captions against references")
    p.add_argument("--captions", required=True, help="captions JSONL or a caption run directory")
    p.add_argument("--manifest")
    p.add_argument("--metrics", help=f"comma-separated subset of {','.join(ALL_METRICS)}")

    p = sub.add_parser("report", parents=[common], help="mean (std) table over seed reports")
    p.add_argument("reports", nargs="+", help="metric report JSON files")
    p.add_argument("--format", default="markdown", help=f"one of {', '.join(FORMATS)}")
    p.add_argument("--population", action="store_true", help="population std (divisor n)")
    p.add_argument("--force", action="store_true", help="allow mixed config fingerprints")
    p.add_argument("--raw", action="store_true",
                   help="do not scale B@4 and METEOR to percent")
    return parser


def _config(args, **extra):
    overrides = {"seed": args.seed, "out": args.out, "mock": args.mock, **extra}
    return load_config(args.config, overrides)


def cmd_ingest(args) -> int:
    if args.synthetic:
        paths = write_synthetic_corpus(args.synthetic, seed=args.seed or 0)
        manifest = read_manifest(paths["manifest"])
        print(f"wrote synthetic corpus to {args.synthetic}: {len(manifest)} scenes")
        print(f"  manifest:    {paths['manifest']}")
        print(f"  frames root: {paths['frames_root']}")
        print(f"  config:      {paths['config']}")
        return EXIT_OK
    if not args.annotations:
        print("error: annotations file required (or --synthetic DIR)", file=sys.stderr)
        return EXIT_USAGE
    try:
        doc = json.loads(Path(args.annotations).read_text(encoding="utf-8"))
        manifest, skipped = manifest_from_annotations(doc, split=args.split)
    except (OSError, json.JSONDecodeError, ParseError, ValidationError) as exc:
        print(f"error: cannot ingest {args.annotations}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out or "manifest.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_manifest(manifest), encoding="utf-8")
    for reason in skipped:
        print(f"skipped: {reason}", file=sys.stderr)
    if len(manifest) == 0:
        print("warning: manifest has 0 entries", file=sys.stderr)
    print(f"wrote {out}: {len(manifest)} entries, {len(skipped)} skipped")
    return EXIT_OK


def cmd_caption(args) -> int:
    cfg = _config(args, manifest=args.manifest, frames_root=args.frames_root, M=args.M, K=args.K,
                  s_base=args.s_base, s_max=args.s_max, alpha=args.alpha, tau=args.tau,
                  workers=args.workers)
    if not cfg.manifest or not cfg.frames_root:
        raise ConfigError("caption needs --manifest and --frames-root (or config keys)")
    manifest = read_manifest(cfg.manifest)
    try:
        results = run_caption(cfg, manifest)
    except EmbeddingFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    paths = write_caption_outputs(cfg.out, results, cfg)
    ok = sum(r.ok for r in results)
    print(f"captioned {ok}/{len(results)} scenes -> {paths[CAPTIONS_FILE].parent} "
          f"(fingerprint {cfg.fingerprint()})")
    for r in results:
        if not r.ok:
            print(f"failed: {r.entry.frames_dir}: {r.error}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_EMPTY


def _captions_location(path: Path) -> tuple:
    if path.is_dir():
        return path / CAPTIONS_FILE, path
    return path, path.parent


def cmd_evaluate(args) -> int:
    metrics = None
    if args.metrics:
        metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    cfg = _config(args, manifest=args.manifest, metrics=metrics)
    if not cfg.manifest:
        raise ConfigError("evaluate needs --manifest (or the manifest config key)")
    captions_path, run_dir = _captions_location(Path(args.captions))
    captions = read_captions(captions_path)
    manifest = read_manifest(cfg.manifest)
    fps = sorted({c.config_fingerprint for c in captions})
    if len(fps) > 1:
        raise ConfigError(f"captions file mixes config fingerprints: {fps}")
    seed = args.seed
    summary = run_dir / SUMMARY_FILE
    if seed is None and summary.exists():
        seed = json.loads(summary.read_text(encoding="utf-8")).get("seed")
    seed = cfg.pipeline.seed if seed is None else int(seed)

    pairs, unmatched = match_captions(captions, manifest)
    for u in unmatched:
        print(f"excluded: {u['video_id']}_{u['segment_index']} (no {u['missing']})", file=sys.stderr)
    if not pairs:
        print("error: no caption matches a manifest reference", file=sys.stderr)
        return EXIT_EMPTY

    embedder = scorer = None
    needs_embedder = set(cfg.metrics) & {"bert", "sbert", "dtw"}
    if cfg.mock:
        b = make_backends(cfg)
        embedder, scorer = b.embedder, b.pair_scorer
    else:
        b = make_backends(cfg, roles=("embedder",) if needs_embedder else ())
        embedder, scorer = b.embedder, b.pair_scorer
    report = build_report(pairs, cfg.metrics, embedder, scorer, seed=seed,
                          config_fingerprint=fps[0] if fps else "", excluded=unmatched)
    out = Path(args.out) if args.out else run_dir / "metrics.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    out.with_suffix(".csv").write_text(report_to_csv(report), encoding="utf-8")
    print(f"scored {len(pairs)} scenes -> {out}")
    return EXIT_OK


def cmd_report(args) -> int:
    records = [RunRecord.load(p) for p in args.reports]
    scale = None if args.raw else {"bleu4": 100.0, "meteor": 100.0}
    try:
        table = aggregate_runs(records, population=args.population, force=args.force, scale=scale)
    except ValidationError as exc:
        print(f"error: {exc} (use --force to override)", file=sys.stderr)
        return EXIT_USAGE
    text = emit_table(table, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "caption": cmd_caption, "evaluate": cmd_evaluate,
            "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError, ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, StrideCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())
