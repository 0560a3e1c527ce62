"""Pretrained word-embedding table and TF x IDF weighted document embeddings."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .lexical import DocKeywords


class EmbeddingFormatError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    words: tuple[str, ...]
    vectors: np.ndarray  # len(words) x n2

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise EmbeddingFormatError("one vector row per word required")
        index = {}
        for i, w in enumerate(self.words):
            if w in index:
                raise EmbeddingFormatError(f"duplicate word {w!r}")
            index[w] = i
        object.__setattr__(self, "_index", index)

    @property
    def n2(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self._index

    def get(self, word: str):
        i = self._index.get(word)
        return None if i is None else self.vectors[i]


def _is_header(fields: list[str]) -> bool:
    if len(fields) != 2:
        return False
    try:
        int(fields[0]), int(fields[1])
    except ValueError:
        return False
    return True


def load_embeddings(path) -> EmbeddingTable:
    """Parse the textual ``word v1 ... vn`` format with an optional ``count dim`` header."""
    words, rows = [], []
    dim = None
    declared_count = None
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields:
                continue
            if lineno == 1 and _is_header(fields):
                declared_count, dim = int(fields[0]), int(fields[1])
                continue
            word, values = fields[0], fields[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim or dim == 0:
                raise EmbeddingFormatError(f"{path}:{lineno}: expected {dim} values for {word!r}, got {len(values)}")
            if word in seen:
                raise EmbeddingFormatError(f"{path}:{lineno}: duplicate word {word!r}")
            try:
                rows.append([float(x) for x in values])
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: {exc}") from exc
            seen.add(word)
            words.append(word)
    if not words:
        raise EmbeddingFormatError(f"{path}: no embedding rows")
    if declared_count is not None and declared_count != len(words):
        raise EmbeddingFormatError(f"{path}: header declares {declared_count} words, found {len(words)}")
    return EmbeddingTable(tuple(words), np.array(rows, dtype=np.float64))


def save_embeddings(table: EmbeddingTable, path, header: bool = True) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(table)} {table.n2}\n")
        for w, v in zip(table.words, table.vectors):
            fh.write(w + " " + " ".join(repr(float(x)) for x in v) + "\n")


def _unit(v: np.ndarray, n2: int) -> np.ndarray:
    norm = np.linalg.norm(v)
    # exact cancellation leaves rounding residue; treat it as zero
    if norm < 1e-12:
        return np.zeros(n2)
    return v / norm


def doc_embedding(keywords: DocKeywords, table: EmbeddingTable) -> np.ndarray:
    """Normalized TF x IDF weighted sum of keyword embeddings; OOV keywords skipped."""
    acc = np.zeros(table.n2)
    for term, weight in sorted(keywords.keywords):
        e = table.get(term)
        if e is not None:
            acc += weight * e
    return _unit(acc, table.n2)


def query_embedding(keywords: Iterable[str], table: EmbeddingTable) -> np.ndarray:
    """Normalized plain sum of query keyword embeddings; OOV keywords skipped."""
    acc = np.zeros(table.n2)
    for term in sorted(keywords):
        e = table.get(term)
        if e is not None:
            acc += e
    return _unit(acc, table.n2)
