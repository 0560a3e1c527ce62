"""NDCG@3/@10 of every scheme on the committed planted collection.

    python scripts/run_synthetic_eval.py [--n1 20] [--out results.csv]
"""

import argparse
from pathlib import Path

from encsearch.embeddings import load_embeddings
from encsearch.evaluation import SCHEMES, load_qrels, run_eval
from encsearch.text import load_corpus, load_queries

ROOT = Path(__file__).resolve().parents[1] / "data" / "synthetic"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", default=str(ROOT))
    ap.add_argument("--n1", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="per-query CSV")
    args = ap.parse_args()
    d = Path(args.data)
    report = run_eval(
        load_corpus(d / "corpus.jsonl", "jsonl"),
        load_queries(d / "queries.jsonl", "jsonl"),
        load_qrels(d / "qrels.txt"),
        load_embeddings(d / "embeddings.txt"),
        n1=args.n1,
        schemes=tuple(SCHEMES),
        seed=args.seed,
    )
    print(report.summary(), end="")
    if args.out:
        Path(args.out).write_text(report.to_csv())


if __name__ == "__main__":
    main()
