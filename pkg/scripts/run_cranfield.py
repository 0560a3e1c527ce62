"""Evaluate on a user-supplied Cranfield collection.

The collection is not shipped. Point the script at the three standard files
and a word-embedding text file whose dimension matches --n2:

    python scripts/run_cranfield.py cran.all.1400 cran.qry cranqrel vectors.txt

Query ids in cran.qry are not contiguous while cranqrel numbers queries
1..225 by position, so queries are renumbered by default.
"""

import argparse

from encsearch.embeddings import load_embeddings
from encsearch.evaluation import DEFAULT_SCHEMES, load_qrels, run_eval
from encsearch.text import load_corpus, load_queries


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("docs")
    ap.add_argument("queries")
    ap.add_argument("qrels")
    ap.add_argument("embeddings")
    ap.add_argument("--n1", type=int, default=300)
    ap.add_argument("--keep-query-ids", action="store_true")
    ap.add_argument("--schemes", default=",".join(DEFAULT_SCHEMES))
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    report = run_eval(
        load_corpus(args.docs, "cranfield"),
        load_queries(args.queries, "cranfield", renumber=not args.keep_query_ids),
        load_qrels(args.qrels),
        load_embeddings(args.embeddings),
        n1=args.n1,
        schemes=args.schemes.split(","),
    )
    print(report.summary(), end="")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_csv())


if __name__ == "__main__":
    main()
