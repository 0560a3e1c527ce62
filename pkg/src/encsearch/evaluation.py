"""NDCG@k, graded relevance judgments and baseline scorers for search-quality runs."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingTable
from .lexical import query_tfidf_vector
from .pipeline import DataOwner, DataUser
from .secure_knn import R_MAX, T_MAX
from .server import EncryptedIndex, rank_by_scores
from .text import Corpus, QuerySet

log = logging.getLogger(__name__)

MAX_GRADE = 4
SCHEMES = ("lrse", "lrse-plain", "svd-only", "embedding-only", "tfidf", "mrse")
DEFAULT_SCHEMES = ("mrse", "tfidf", "svd-only", "embedding-only", "lrse")
SCHEME_LABELS = {
    "mrse": "MRSE_I (keyword count)",
    "tfidf": "TFxIDF cosine",
    "svd-only": "SVD concepts only",
    "embedding-only": "TFxIDF weighted embeddings only",
    "lrse-plain": "LRSE (plaintext oracle)",
    "lrse": "LRSE (encrypted)",
}

QrelSet = dict  # query_id -> {doc_id: grade}


def load_qrels(path) -> QrelSet:
    """Whitespace separated ``query_id doc_id grade`` lines; grades clamped to 0..4."""
    qrels: dict[str, dict[str, int]] = defaultdict(dict)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) < 3:
                raise ValueError(f"{path}:{lineno}: expected 'query_id doc_id grade', got {line.strip()!r}")
            try:
                grade = int(fields[2])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: grade {fields[2]!r} is not an integer") from exc
            clamped = min(max(grade, 0), MAX_GRADE)
            if clamped != grade:
                log.warning("%s:%d: grade %d clamped to %d", path, lineno, grade, clamped)
            qrels[fields[0]][fields[1]] = clamped
    return dict(qrels)


def write_qrels(path, qrels: QrelSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid, judged in qrels.items():
            for doc_id, grade in judged.items():
                fh.write(f"{qid} {doc_id} {grade}\n")


def dcg(grades: Iterable[float]) -> float:
    return sum(g / math.log2(i + 2) for i, g in enumerate(grades))


def ndcg_at_k(ranked: Sequence[str], judged: Mapping[str, int], k: int) -> float:
    """Linear-gain NDCG; the ideal list is all judged grades, descending, cut at k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ideal = dcg(sorted(judged.values(), reverse=True)[:k])
    if ideal <= 0:
        return 0.0
    return dcg(judged.get(d, 0) for d in ranked[:k]) / ideal


def baseline_mrse_score(doc_keywords: Iterable[str], query_keywords: Iterable[str]) -> int:
    return len(set(doc_keywords) & set(query_keywords))


def baseline_tfidf_score(doc_vector, query_vector) -> float:
    """Cosine similarity, 0 when either side is the zero vector."""
    a = np.asarray(doc_vector, dtype=np.float64)
    b = np.asarray(query_vector, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


@dataclass
class EvalReport:
    ks: tuple[int, ...]
    per_query: dict = field(default_factory=dict)  # scheme -> {query_id: {k: ndcg}}
    rankings: dict = field(default_factory=dict)  # scheme -> {query_id: [doc_id, ...]}

    def macro(self, scheme: str, k: int) -> float:
        vals = [v[k] for v in self.per_query[scheme].values()]
        return float(np.mean(vals)) if vals else 0.0

    @property
    def schemes(self) -> list[str]:
        return list(self.per_query)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scheme", "query_id"] + [f"ndcg{k}" for k in self.ks])
        for scheme, rows in self.per_query.items():
            for qid, vals in rows.items():
                w.writerow([scheme, qid] + [f"{vals[k]:.6f}" for k in self.ks])
        return buf.getvalue()

    def summary(self) -> str:
        head = ["Scheme"] + [f"NDCG@{k}" for k in self.ks]
        rows = [[SCHEME_LABELS.get(s, s)] + [f"{self.macro(s, k):.3f}" for k in self.ks] for s in self.schemes]
        width = max(len(r[0]) for r in rows + [head])
        lines = [head[0].ljust(width) + "  " + "  ".join(h.rjust(8) for h in head[1:])]
        lines.append("-" * len(lines[0]))
        lines += [r[0].ljust(width) + "  " + "  ".join(v.rjust(8) for v in r[1:]) for r in rows]
        return "\n".join(lines) + "\n"


def run_eval(
    corpus: Corpus,
    queries: QuerySet,
    qrels: QrelSet,
    table: EmbeddingTable,
    n1: int,
    schemes: Sequence[str] = DEFAULT_SCHEMES,
    ks: Sequence[int] = (3, 10),
    seed: int = 0,
    r_max: float = R_MAX,
    t_max: float = T_MAX,
) -> EvalReport:
    """Rank every judged query under each scheme and score the rankings with NDCG."""
    unknown = set(schemes) - set(SCHEMES)
    if unknown:
        raise ValueError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
    ks = tuple(ks)
    depth = max(ks)
    owner = DataOwner.from_corpus(corpus, table, n1)
    doc_ids = owner.doc_ids
    id_rank = np.argsort(np.argsort(np.array(doc_ids, dtype=object), kind="stable"), kind="stable")
    D1, D2 = owner.plain_vectors()
    A = owner.matrix.weights
    doc_kw = [set(kw.terms) for kw in owner.matrix.keywords]

    seeds = np.random.SeedSequence(seed).spawn(3)
    key = owner.new_key(np.random.default_rng(seeds[0]))
    user = DataUser(owner.bundle(key), r_max=r_max, t_max=t_max)
    index = None
    if "lrse" in schemes:
        index = EncryptedIndex(owner.build_index(key, np.random.default_rng(seeds[1])))
    trap_rng = np.random.default_rng(seeds[2])

    def plain(scores):
        return [doc_ids[i] for i in rank_by_scores(np.asarray(scores, dtype=np.float64), id_rank, depth)]

    report = EvalReport(ks)
    for s in schemes:
        report.per_query[s] = {}
        report.rankings[s] = {}
    for qid, kws in queries:
        judged = qrels.get(qid)
        if judged is None:
            log.warning("query %s has no relevance judgments; skipped", qid)
            continue
        q1, q2 = user.query_vectors(kws)
        for s in schemes:
            if s == "lrse":
                ranked = list(index.top_k(user.trapdoor(kws, trap_rng), depth).doc_ids)
            elif s == "lrse-plain":
                ranked = plain(D1 @ q1 + D2 @ q2)
            elif s == "svd-only":
                ranked = plain(D1 @ q1)
            elif s == "embedding-only":
                ranked = plain(D2 @ q2)
            elif s == "tfidf":
                qv = query_tfidf_vector(kws, owner.matrix.stats, owner.matrix.vocabulary)
                ranked = plain(A.T @ qv)
            else:
                ranked = plain([baseline_mrse_score(dk, kws) for dk in doc_kw])
            report.rankings[s][qid] = ranked
            report.per_query[s][qid] = {k: ndcg_at_k(ranked, judged, k) for k in ks}
    return report
