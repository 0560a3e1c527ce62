"""Run all three cost sweeps single-threaded and print the fitted trends.

    python scripts/run_benchmarks.py [--out bench.csv]
"""

import argparse
from pathlib import Path

from encsearch.bench import BenchReport, sweep_dimensions, sweep_documents, sweep_query_keywords, thread_limit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    rep = BenchReport()
    with thread_limit(args.threads):
        sweep_documents(report=rep)
        sweep_query_keywords(report=rep)
        sweep_dimensions(report=rep)
    print(rep.to_csv(), end="")
    kw = {r.value: r.seconds for r in rep.select("trapdoor", "keywords")}
    print(f"\nbuild-index vs documents   R^2 = {rep.linear_r2('build-index', 'documents'):.4f}")
    print(f"query vs dimension         R^2 = {rep.linear_r2('query', 'dimension'):.4f}")
    print(f"trapdoor {max(kw)} / {min(kw)} keywords  ratio = {kw[max(kw)] / kw[min(kw)]:.3f}")
    if args.out:
        Path(args.out).write_text(rep.to_csv())


if __name__ == "__main__":
    main()
