"""System-cost benchmarks: index building, trapdoor generation and querying."""

from __future__ import annotations

import csv
import io
import statistics
import time
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .pipeline import DataOwner, DataUser
from .server import EncryptedIndex
from .synthetic import bag_of_words_corpus, pseudo_words, random_embedding_table
from .wire import TRAPDOOR_HEADER

REPS = 5


@dataclass(frozen=True)
class BenchRow:
    operation: str
    parameter: str
    value: int
    seconds: float
    size_bytes: int

    def __post_init__(self):
        if self.seconds < 0:
            raise ValueError("negative timing")


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    def add(self, *args) -> None:
        self.rows.append(BenchRow(*args))

    def select(self, operation: str, parameter: str) -> list[BenchRow]:
        return [r for r in self.rows if r.operation == operation and r.parameter == parameter]

    def linear_r2(self, operation: str, parameter: str) -> float:
        rows = self.select(operation, parameter)
        return linear_r2([r.value for r in rows], [r.seconds for r in rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["operation", "parameter", "value", "seconds", "size_bytes"])
        for r in self.rows:
            w.writerow([r.operation, r.parameter, r.value, f"{r.seconds:.6g}", r.size_bytes])
        return buf.getvalue()


def linear_r2(x: Sequence[float], y: Sequence[float]) -> float:
    """Coefficient of determination of the least-squares line through (x, y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    return 1.0 if total == 0 else float(1.0 - np.sum(resid**2) / total)


def median_time(fn: Callable[[], object], reps: int = REPS, inner: int = 1) -> float:
    """Median over ``reps`` of the mean wall time of ``inner`` back-to-back calls."""
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        samples.append((time.perf_counter() - t0) / inner)
    return statistics.median(samples)


def thread_limit(threads: int | None):
    if threads is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=threads)


@dataclass(frozen=True)
class BenchSetup:
    vocab_size: int = 4000
    doc_len: int = 80
    n_docs: int = 1000
    seed: int = 11


def _system(setup: BenchSetup, n_docs: int, n1: int, n2: int):
    rng = np.random.default_rng(setup.seed)
    vocab = pseudo_words(setup.vocab_size, rng)
    corpus = bag_of_words_corpus(n_docs, vocab, rng, setup.doc_len)
    table = random_embedding_table(vocab, n2, rng)
    owner = DataOwner.from_corpus(corpus, table, n1)
    key = owner.new_key(rng)
    return owner, key, vocab, rng


def sweep_documents(
    doc_counts: Sequence[int] = (250, 500, 1000),
    n1: int = 300,
    n2: int = 100,
    setup: BenchSetup = BenchSetup(),
    reps: int = REPS,
    report: BenchReport | None = None,
) -> BenchReport:
    """Index-building time against document count under a fixed model and key."""
    report = report or BenchReport()
    owner, key, _vocab, rng = _system(setup, max(max(doc_counts), setup.n_docs), n1, n2)
    for count in doc_counts:
        subs = owner.build_index(key, rng, limit=count)
        size = sum(len(s.to_bytes()) for s in subs)
        t = median_time(lambda: owner.build_index(key, rng, limit=count), reps)
        report.add("build-index", "documents", count, t, size)
    return report


def sweep_dimensions(
    dims: Sequence[int] = (100, 200, 400),
    setup: BenchSetup = BenchSetup(),
    k: int = 50,
    query_keywords: int = 5,
    reps: int = REPS,
    inner: int = 100,
    report: BenchReport | None = None,
) -> BenchReport:
    """Build, trapdoor and query costs against the vector dimension n (n1 = 3n/4)."""
    report = report or BenchReport()
    for n in dims:
        n1 = 3 * n // 4
        owner, key, vocab, rng = _system(setup, setup.n_docs, n1, n - n1)
        subs = owner.build_index(key, rng)
        t_build = median_time(lambda: owner.build_index(key, rng), reps)
        report.add("build-index", "dimension", n, t_build, sum(len(s.to_bytes()) for s in subs))

        user = DataUser(owner.bundle(key))
        kws = list(rng.choice(vocab, size=query_keywords, replace=False))
        trap = user.trapdoor(kws, rng)
        t_trap = median_time(lambda: user.trapdoor(kws, rng), reps, inner)
        report.add("trapdoor", "dimension", n, t_trap, len(trap.to_bytes()))

        index = EncryptedIndex(subs)
        t_query = median_time(lambda: index.top_k(trap, k), reps, inner)
        report.add("query", "dimension", n, t_query, sum(len(s.to_bytes()) for s in subs))
    return report


def sweep_query_keywords(
    counts: Sequence[int] = (5, 25),
    n1: int = 300,
    n2: int = 100,
    setup: BenchSetup = BenchSetup(),
    reps: int = REPS,
    inner: int = 50,
    report: BenchReport | None = None,
) -> BenchReport:
    """Trapdoor time against the number of query keywords at fixed dimension."""
    report = report or BenchReport()
    owner, key, vocab, rng = _system(setup, setup.n_docs, n1, n2)
    user = DataUser(owner.bundle(key))
    for c in counts:
        kws = list(rng.choice(vocab, size=c, replace=False))
        t = median_time(lambda: user.trapdoor(kws, rng), reps, inner)
        report.add("trapdoor", "keywords", c, t, TRAPDOOR_HEADER + 16 * (key.n + 1))
    return report


SWEEPS = {
    "documents": sweep_documents,
    "dimension": sweep_dimensions,
    "keywords": sweep_query_keywords,
}


def run_bench(sweep: str, values: Sequence[int] | None = None, threads: int | None = 1, reps: int = REPS, setup: BenchSetup = BenchSetup()) -> BenchReport:
    if sweep not in SWEEPS:
        raise ValueError(f"unknown sweep {sweep!r}; choose from {sorted(SWEEPS)}")
    fn = SWEEPS[sweep]
    with thread_limit(threads):
        if values is None:
            return fn(setup=setup, reps=reps)
        return fn(tuple(values), setup=setup, reps=reps)
