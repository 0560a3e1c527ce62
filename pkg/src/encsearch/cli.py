"""Command-line front end: keygen, build-index, trapdoor, query, eval, bench.

Every role communicates through files, so the three parties can run in
separate processes (or on separate machines).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .config import RunConfig, load_config
from .embeddings import load_embeddings
from .evaluation import DEFAULT_SCHEMES, SCHEMES, load_qrels, run_eval
from .pipeline import DataOwner, DataUser, SecretBundle, encrypt_documents, read_payloads, write_payloads
from .secure_knn import SecretKey, keygen
from .server import EncryptedIndex
from .text import CORPUS_FORMATS, load_corpus, load_queries, preprocess
from .wire import read_trapdoor, write_index, write_trapdoor

log = logging.getLogger("encsearch")

# independent random streams derived from one seed
STREAM_KEY, STREAM_INDEX, STREAM_TRAPDOOR = 0, 1, 2


def stream(seed: int | None, which: int) -> np.random.Generator:
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(3)[which])


def _config_options(p: argparse.ArgumentParser, *names: str) -> None:
    helps = {
        "n1": (int, "concept dimensions kept from the SVD"),
        "n2": (int, "embedding dimension"),
        "k": (int, "number of results"),
        "seed": (int, "seed for all randomness of this command"),
        "r_max": (float, "upper bound of the query scale r"),
        "t_max": (float, "bound on the query shift |t|"),
        "corpus": (str, "corpus location"),
        "corpus_format": (str, f"one of {', '.join(CORPUS_FORMATS)}"),
        "embeddings": (str, "textual word-embedding file"),
        "key": (str, "secret key file"),
        "index": (str, "encrypted index file"),
        "bundle": (str, "directory holding the data-user secret bundle"),
        "payloads": (str, "encrypted document store"),
        "trapdoor": (str, "trapdoor file"),
        "queries": (str, "query file"),
        "queries_format": (str, f"one of {', '.join(CORPUS_FORMATS)}"),
        "qrels": (str, "relevance judgments (query_id doc_id grade)"),
    }
    for name in names:
        kind, text = helps[name]
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=kind, default=None, help=text)


def _settings(args: argparse.Namespace) -> RunConfig:
    names = [f for f in RunConfig.__dataclass_fields__ if hasattr(args, f)]
    overrides = {n: getattr(args, n) for n in names}
    if getattr(args, "queries_renumber", False):
        overrides["queries_renumber"] = True
    return load_config(args.config, **overrides)


def _write_text(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_keygen(args) -> int:
    cfg = _settings(args)
    cfg.require("key")
    if cfg.seed is None:
        raise ValueError("keygen needs an explicit --seed")
    key = keygen(cfg.n, stream(cfg.seed, STREAM_KEY))
    key.save(cfg.key)
    log.info("wrote %s (n+1 = %d)", cfg.key, key.dim)
    return 0


def cmd_build_index(args) -> int:
    cfg = _settings(args)
    cfg.require("corpus", "embeddings", "key", "index", "bundle")
    corpus = load_corpus(cfg.corpus, cfg.corpus_format)
    table = load_embeddings(cfg.embeddings)
    if table.n2 != cfg.n2:
        raise ValueError(f"embedding file has dimension {table.n2}, config says n2={cfg.n2}")
    key = SecretKey.load(cfg.key)
    owner = DataOwner.from_corpus(corpus, table, cfg.n1)
    rng = stream(cfg.seed, STREAM_INDEX)
    subs = owner.build_index(key, rng)
    write_index(cfg.index, subs)
    if cfg.payloads:
        write_payloads(cfg.payloads, encrypt_documents(corpus, key, rng))
    owner.bundle(key, str(Path(cfg.embeddings).resolve())).save(cfg.bundle)
    log.info("indexed %d documents into %s", len(subs), cfg.index)
    return 0


def cmd_trapdoor(args) -> int:
    cfg = _settings(args)
    cfg.require("bundle", "trapdoor")
    keywords = preprocess(" ".join(args.keywords))
    if not keywords:
        raise ValueError("no keywords left after normalization")
    user = DataUser(SecretBundle.load(cfg.bundle), r_max=cfg.r_max, t_max=cfg.t_max)
    write_trapdoor(cfg.trapdoor, user.trapdoor(keywords, stream(cfg.seed, STREAM_TRAPDOOR)))
    return 0


def cmd_query(args) -> int:
    cfg = _settings(args)
    cfg.require("index", "trapdoor")
    index = EncryptedIndex.load(cfg.index)
    results = index.top_k(read_trapdoor(cfg.trapdoor), cfg.k)
    _write_text(args.out, results.to_csv())
    if args.decrypt_dir:
        cfg.require("bundle", "payloads")
        user = DataUser(SecretBundle.load(cfg.bundle))
        store = read_payloads(cfg.payloads)
        out = Path(args.decrypt_dir)
        out.mkdir(parents=True, exist_ok=True)
        for doc_id in results.doc_ids:
            (out / f"{doc_id}.txt").write_text(user.decrypt(doc_id, store[doc_id]), encoding="utf-8")
    return 0


def cmd_eval(args) -> int:
    cfg = _settings(args)
    cfg.require("corpus", "queries", "qrels", "embeddings")
    report = run_eval(
        load_corpus(cfg.corpus, cfg.corpus_format),
        load_queries(cfg.queries, cfg.queries_format, renumber=cfg.queries_renumber),
        load_qrels(cfg.qrels),
        load_embeddings(cfg.embeddings),
        n1=cfg.n1,
        schemes=args.schemes.split(","),
        seed=0 if cfg.seed is None else cfg.seed,
        r_max=cfg.r_max,
        t_max=cfg.t_max,
    )
    _write_text(args.out, report.to_csv())
    sys.stderr.write(report.summary())
    return 0


def cmd_bench(args) -> int:
    values = [int(v) for v in args.values.split(",")] if args.values else None
    report = bench.run_bench(args.sweep, values, threads=args.threads, reps=args.reps)
    _write_text(args.out, report.to_csv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="encsearch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, fn, help_text, *options):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="key=value settings file (flags win)")
        _config_options(p, *options)
        p.set_defaults(func=fn)
        return p

    command("keygen", cmd_keygen, "generate a secret key", "n1", "n2", "seed", "key")
    command(
        "build-index", cmd_build_index, "encrypt the corpus index and documents",
        "n1", "n2", "seed", "corpus", "corpus_format", "embeddings", "key", "index", "bundle", "payloads",
    )
    p = command("trapdoor", cmd_trapdoor, "encrypt a keyword query", "seed", "bundle", "trapdoor", "r_max", "t_max")
    p.add_argument("keywords", nargs="+")
    p = command("query", cmd_query, "rank the index against a trapdoor", "k", "index", "trapdoor", "bundle", "payloads")
    p.add_argument("--out", default=None, help="CSV output (default stdout)")
    p.add_argument("--decrypt-dir", default=None, help="decrypt returned documents into this directory")
    p = command(
        "eval", cmd_eval, "NDCG evaluation against baselines",
        "n1", "seed", "corpus", "corpus_format", "embeddings", "queries", "queries_format", "qrels", "r_max", "t_max",
    )
    p.add_argument("--queries-renumber", action="store_true", help="use 1-based positions as query ids")
    p.add_argument("--schemes", default=",".join(DEFAULT_SCHEMES), help=f"comma list from {', '.join(SCHEMES)}")
    p.add_argument("--out", default=None)
    p = sub.add_parser("bench", help="system-cost sweeps")
    p.add_argument("--sweep", choices=sorted(bench.SWEEPS), default="documents")
    p.add_argument("--values", default=None, help="comma list of sweep points")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--reps", type=int, default=bench.REPS)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"encsearch {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
