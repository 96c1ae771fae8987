"""
Corpus commands

- forge corpus ingest FILE... --output DIR [--source web_corpus|wikipedia|other]
- forge corpus dedup MANIFEST --output DIR
- forge corpus shuffle MANIFEST --output DIR
- forge corpus sample MANIFEST --target-bytes N --output DIR
- forge corpus merge MANIFEST... --output DIR
"""

import logging

from ..core.config import RunConfig
from ..corpus import CorpusManifest, Source, dedup_exact, ingest, merge_manifests, sample_bytes, shuffle
from .common import emit, require

logger = logging.getLogger(__name__)


def _summary(manifest: CorpusManifest) -> dict:
    return {
        "documents": manifest.document_count,
        "bytes": manifest.total_bytes,
        "shards": len(manifest.shards),
        "fingerprints": manifest.dedup_fingerprint_count,
        "shuffle_seed": manifest.shuffle_seed,
        "undersized": manifest.undersized,
        "rejects": manifest.rejects,
        "source_bytes": manifest.source_bytes,
    }


def ingest_command(args, run: RunConfig) -> int:
    manifest = ingest(
        args.paths,
        args.source or Source.WEB_CORPUS.value,
        require(args.output, "--output"),
        shard_bytes=args.shard_bytes,
        workers=run.workers,
        fmt=args.format,
    )
    emit(_summary(manifest))
    return 0


def dedup_command(args, run: RunConfig) -> int:
    manifest = dedup_exact(CorpusManifest.load(args.manifest), require(args.output, "--output"), workers=run.workers)
    emit(_summary(manifest))
    return 0


def shuffle_command(args, run: RunConfig) -> int:
    manifest = shuffle(
        CorpusManifest.load(args.manifest),
        run.seed,
        require(args.output, "--output"),
        shard_bytes=args.shard_bytes,
        workers=run.workers,
    )
    emit(_summary(manifest))
    return 0


def sample_command(args, run: RunConfig) -> int:
    manifest = sample_bytes(
        CorpusManifest.load(args.manifest),
        require(args.target_bytes, "--target-bytes"),
        run.seed,
        require(args.output, "--output"),
        shard_bytes=args.shard_bytes,
        workers=run.workers,
    )
    emit(_summary(manifest))
    return 0


def merge_command(args, run: RunConfig) -> int:
    manifests = [CorpusManifest.load(path) for path in args.manifests]
    emit(_summary(merge_manifests(manifests, require(args.output, "--output"))))
    return 0


def register(subparsers) -> None:
    group = subparsers.add_parser("corpus", help="Ingest, deduplicate, shuffle and sample corpora")
    commands = group.add_subparsers(dest="command", metavar="COMMAND")

    parser = commands.add_parser("ingest", help="Shard raw JSONL or plain-text files")
    parser.add_argument("paths", nargs="+")
    parser.add_argument("--source", choices=[s.value for s in Source])
    parser.add_argument("--format", choices=["jsonl", "text"])
    parser.add_argument("--shard-bytes", type=int)
    parser.add_argument("--output")
    parser.set_defaults(handler=ingest_command)

    parser = commands.add_parser("dedup", help="Drop exact duplicate documents")
    parser.add_argument("manifest")
    parser.add_argument("--output")
    parser.set_defaults(handler=dedup_command)

    parser = commands.add_parser("shuffle", help="Seeded document-level shuffle")
    parser.add_argument("manifest")
    parser.add_argument("--shard-bytes", type=int)
    parser.add_argument("--output")
    parser.set_defaults(handler=shuffle_command)

    parser = commands.add_parser("sample", help="Seeded byte-budget sample")
    parser.add_argument("manifest")
    parser.add_argument("--target-bytes", type=int)
    parser.add_argument("--shard-bytes", type=int)
    parser.add_argument("--output")
    parser.set_defaults(handler=sample_command)

    parser = commands.add_parser("merge", help="Concatenate manifests in the given order")
    parser.add_argument("manifests", nargs="+")
    parser.add_argument("--output")
    parser.set_defaults(handler=merge_command)
