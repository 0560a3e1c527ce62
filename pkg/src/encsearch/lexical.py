"""TF x IDF weighting, top-keyword extraction and the keyword-document matrix."""

from __future__ import annotations

import math
import struct
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .text import Corpus

TOP_KEYWORDS = 10
_MATRIX_MAGIC = b"KDM1"


def idf(document_count: int, document_frequency: int) -> float:
    """Natural-log idf with the +0.01 smoothing inside the log."""
    if document_frequency <= 0:
        raise ValueError("term does not occur in the corpus (document_frequency = 0)")
    if document_count < 1 or document_frequency > document_count:
        raise ValueError(f"invalid counts |D|={document_count}, |D_t|={document_frequency}")
    return math.log(document_count / document_frequency + 0.01)


@dataclass(frozen=True)
class CorpusStats:
    document_count: int
    document_frequency: dict

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "CorpusStats":
        df = Counter()
        for doc in corpus:
            df.update(set(doc.tokens))
        return cls(len(corpus), dict(df))

    def idf(self, term: str) -> float:
        return idf(self.document_count, self.document_frequency.get(term, 0))


def tfidf_weights(tokens: Sequence[str], stats: CorpusStats) -> dict[str, float]:
    """Unit-norm TF x IDF weights over every corpus term occurring in ``tokens``."""
    tf = Counter(t for t in tokens if t in stats.document_frequency)
    raw = {t: c * stats.idf(t) for t, c in tf.items()}
    norm = math.sqrt(sum(v * v for v in raw.values()))
    if norm == 0.0:
        return {}
    return {t: v / norm for t, v in raw.items()}


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]

    def __post_init__(self):
        if list(self.terms) != sorted(set(self.terms)):
            raise ValueError("vocabulary terms must be sorted and distinct")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term) -> bool:
        return term in self._index

    def index(self, term: str) -> int:
        return self._index[term]

    def get(self, term: str, default=None):
        return self._index.get(term, default)

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "Vocabulary":
        return cls(tuple(sorted(set(terms))))


def _normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def tfidf_document_vector(tokens: Sequence[str], stats: CorpusStats, vocabulary: Vocabulary) -> np.ndarray:
    """TF x IDF weights restricted to ``vocabulary`` and re-normalized to unit length.

    All-zero when the document shares no term with the vocabulary.
    """
    vec = np.zeros(len(vocabulary))
    for term, w in tfidf_weights(tokens, stats).items():
        j = vocabulary.get(term)
        if j is not None:
            vec[j] = w
    return _normalize(vec)


def query_term_vector(keywords: Sequence[str], vocabulary: Vocabulary) -> np.ndarray:
    """Term-count vector over the vocabulary; the data user has no idf table."""
    vec = np.zeros(len(vocabulary))
    for kw in keywords:
        j = vocabulary.get(kw)
        if j is not None:
            vec[j] += 1.0
    return vec


def query_tfidf_vector(keywords: Sequence[str], stats: CorpusStats, vocabulary: Vocabulary) -> np.ndarray:
    return tfidf_document_vector(keywords, stats, vocabulary)


@dataclass(frozen=True)
class DocKeywords:
    doc_id: str
    keywords: tuple[tuple[str, float], ...]

    @property
    def terms(self) -> list[str]:
        return [t for t, _ in self.keywords]


def extract_top_keywords(weights, doc_id: str = "", limit: int = TOP_KEYWORDS) -> DocKeywords:
    """The ``limit`` heaviest terms, ties broken lexicographically.

    ``weights`` is a term -> weight mapping (the output of ``tfidf_weights``).
    """
    ranked = sorted(((t, w) for t, w in weights.items() if w > 0), key=lambda tw: (-tw[1], tw[0]))
    return DocKeywords(doc_id, tuple(ranked[:limit]))


@dataclass(frozen=True)
class KeywordDocumentMatrix:
    vocabulary: Vocabulary
    weights: np.ndarray  # t x |D|
    doc_ids: tuple[str, ...]
    keywords: tuple[DocKeywords, ...]
    stats: CorpusStats

    @property
    def t(self) -> int:
        return self.weights.shape[0]

    def column(self, i: int) -> np.ndarray:
        return self.weights[:, i]

    def to_bytes(self) -> bytes:
        t, d = self.weights.shape
        return _MATRIX_MAGIC + struct.pack("<II", t, d) + np.asfortranarray(self.weights, dtype="<f8").tobytes(order="F")

    def to_csv(self) -> str:
        lines = ["term," + ",".join(self.doc_ids)]
        for term, row in zip(self.vocabulary.terms, self.weights):
            lines.append(term + "," + ",".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"


def matrix_from_bytes(data: bytes) -> np.ndarray:
    if data[:4] != _MATRIX_MAGIC:
        raise ValueError("not a keyword-document matrix file")
    t, d = struct.unpack_from("<II", data, 4)
    body = np.frombuffer(data, dtype="<f8", offset=12)
    if body.size != t * d:
        raise ValueError(f"matrix body has {body.size} values, header says {t}x{d}")
    return body.reshape((t, d), order="F").astype(np.float64)


def build_matrix(corpus: Corpus, limit: int = TOP_KEYWORDS) -> KeywordDocumentMatrix:
    """Vocabulary = union of per-document top keywords; columns re-normalized after restriction."""
    stats = CorpusStats.from_corpus(corpus)
    per_doc = [tfidf_weights(doc.tokens, stats) for doc in corpus]
    keywords = tuple(extract_top_keywords(w, doc.doc_id, limit) for w, doc in zip(per_doc, corpus))
    vocab = Vocabulary.from_terms(t for kw in keywords for t in kw.terms)
    if len(vocab) == 0:
        raise ValueError("empty vocabulary: no document produced any keyword")
    A = np.zeros((len(vocab), len(corpus)))
    for i, w in enumerate(per_doc):
        for term, val in w.items():
            j = vocab.get(term)
            if j is not None:
                A[j, i] = val
        A[:, i] = _normalize(A[:, i])
    return KeywordDocumentMatrix(vocab, A, tuple(corpus.doc_ids), keywords, stats)
