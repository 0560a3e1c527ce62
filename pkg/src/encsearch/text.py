"""Corpus ingestion and text normalization.

The normalizer is pinned in-repo (stopword list + a small rule-based
stemmer) so that every run of the pipeline sees exactly the same tokens.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

log = logging.getLogger(__name__)

CORPUS_FORMATS = ("txt-dir", "cranfield", "jsonl")

STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are aren as at be
    because been before being below between both but by can cannot could
    couldn did didn do does doesn doing don down during each few for from
    further had hadn has hasn have haven having he her here hers herself him
    himself his how however i if in into is isn it its itself just ll me
    might more most must mustn my myself no nor not now of off on once only
    or other ought our ours ourselves out over own re same shan she should
    shouldn so some such than that the their theirs them themselves then
    there these they this those through to too under until up upon us very
    was wasn we were weren what when where which while who whom why will
    with won would wouldn ve you your yours yourself yourselves also may
    thus et al eg ie per via yet
    """.split()
)

_SPLIT = re.compile(r"[^0-9a-z]+")
_VOWELS = set("aeiouy")
_NO_UNDOUBLE = set("lsz")


class CorpusFormatError(ValueError):
    """A corpus or query file could not be parsed."""


def _has_vowel(s: str) -> bool:
    return any(c in _VOWELS for c in s)


def _undouble(stem: str) -> str:
    if len(stem) >= 4 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS | _NO_UNDOUBLE:
        return stem[:-1]
    return stem


def _stem_step(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies") and len(w) >= 5:
        return w[:-3] + "y"
    if w.endswith("s") and len(w) >= 4 and not w.endswith(("ss", "us", "is")):
        return w[:-1]
    if w.endswith("ing") and len(w) >= 6 and _has_vowel(w[:-3]):
        return _undouble(w[:-3])
    if w.endswith("ed") and not w.endswith("eed") and len(w) >= 5 and _has_vowel(w[:-2]):
        return _undouble(w[:-2])
    if w.endswith("ly") and len(w) >= 6:
        return w[:-2]
    return w


def stem(word: str) -> str:
    """Strip inflectional suffixes until no rule applies.

    Iterating to a fixpoint makes ``stem`` idempotent by construction.
    """
    while True:
        nxt = _stem_step(word)
        if nxt == word:
            return word
        word = nxt


def preprocess(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, stem, drop stopwords and short tokens."""
    out = []
    for raw in _SPLIT.split(text.lower()):
        if len(raw) < 2 or raw in STOPWORDS:
            continue
        tok = stem(raw)
        if len(tok) < 2 or tok in STOPWORDS:
            continue
        out.append(tok)
    return out


@dataclass(frozen=True)
class Document:
    doc_id: str
    raw_text: str
    tokens: tuple[str, ...] = field(default=())

    @classmethod
    def from_text(cls, doc_id: str, text: str) -> "Document":
        return cls(doc_id, text, tuple(preprocess(text)))


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    def __post_init__(self):
        if not self.documents:
            raise CorpusFormatError("corpus is empty")
        seen = set()
        for i, doc in enumerate(self.documents):
            if doc.doc_id in seen:
                raise CorpusFormatError(f"duplicate doc_id {doc.doc_id!r} at record {i}")
            seen.add(doc.doc_id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.documents]

    @classmethod
    def from_texts(cls, items: Iterable[tuple[str, str]]) -> "Corpus":
        return cls(tuple(Document.from_text(i, t) for i, t in items))


@dataclass(frozen=True)
class QuerySet:
    queries: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        for qid, kws in self.queries:
            if not kws:
                raise CorpusFormatError(f"query {qid!r} has no keywords after normalization")

    def __len__(self) -> int:
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)


# -- readers -----------------------------------------------------------------

def _read_txt_dir(path: Path) -> list[tuple[str, str]]:
    if not path.is_dir():
        raise CorpusFormatError(f"{path} is not a directory")
    files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix == ".txt")
    return [(p.stem, p.read_text(encoding="utf-8")) for p in files]


def _read_jsonl(path: Path) -> list[tuple[str, str]]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                records.append((str(obj["id"]), str(obj["text"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusFormatError(f"{path}: malformed record {len(records)} (line {i + 1}): {exc}") from exc
    return records


_CRAN_FIELD = re.compile(r"^\.([ITABW])\b\s*(.*)$")


def _read_cranfield(path: Path, text_fields: str = "TW") -> list[tuple[str, str]]:
    """Parse the concatenated ``.I/.T/.A/.B/.W`` record format."""
    records: list[tuple[str, dict[str, list[str]]]] = []
    current = None
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            m = _CRAN_FIELD.match(line)
            if m and m.group(1) == "I":
                doc_id = m.group(2).strip()
                if not doc_id:
                    raise CorpusFormatError(f"{path}: record {len(records)} (line {lineno}) has no id")
                records.append((doc_id, {}))
                current = None
                continue
            if not records:
                if line.strip():
                    raise CorpusFormatError(f"{path}: record 0 (line {lineno}): text before first .I")
                continue
            if m:
                current = m.group(1)
                records[-1][1].setdefault(current, [])
                if m.group(2):
                    records[-1][1][current].append(m.group(2))
            elif line.startswith("."):
                raise CorpusFormatError(
                    f"{path}: record {len(records) - 1} (line {lineno}): unknown field {line.split()[0]!r}"
                )
            elif current is None:
                if line.strip():
                    raise CorpusFormatError(f"{path}: record {len(records) - 1} (line {lineno}): text outside a field")
            else:
                records[-1][1][current].append(line)
    out = []
    for doc_id, fields in records:
        parts = [" ".join(fields.get(f, [])).strip() for f in text_fields]
        out.append((doc_id, "\n".join(p for p in parts if p)))
    return out


def _read_records(path, fmt: str, text_fields: str = "TW") -> list[tuple[str, str]]:
    path = Path(path)
    if fmt not in CORPUS_FORMATS:
        raise ValueError(f"unknown corpus format {fmt!r}; expected one of {CORPUS_FORMATS}")
    if fmt != "txt-dir" and not path.is_file():
        raise FileNotFoundError(f"{path} does not exist")
    if fmt == "txt-dir":
        return _read_txt_dir(path)
    if fmt == "jsonl":
        return _read_jsonl(path)
    return _read_cranfield(path, text_fields)


def load_corpus(path, fmt: str = "jsonl") -> Corpus:
    return Corpus.from_texts(_read_records(path, fmt))


def save_corpus(corpus: Corpus, path, fmt: str = "jsonl") -> None:
    """Write raw texts back out; tokens are recomputed on reload."""
    path = Path(path)
    if fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for d in corpus:
                fh.write(json.dumps({"id": d.doc_id, "text": d.raw_text}) + "\n")
    elif fmt == "txt-dir":
        path.mkdir(parents=True, exist_ok=True)
        for d in corpus:
            (path / f"{d.doc_id}.txt").write_text(d.raw_text, encoding="utf-8")
    else:
        raise ValueError(f"cannot write corpus format {fmt!r}")


def load_queries(path, fmt: str = "jsonl", renumber: bool = False) -> QuerySet:
    """Load queries as (query_id, keywords).

    ``renumber`` replaces ids by their 1-based position, which is what the
    Cranfield qrels expect (the ``.I`` numbers in cran.qry have gaps).
    Queries that normalize to nothing are dropped with a warning.
    """
    records = _read_records(path, fmt, text_fields="W")
    queries = []
    for pos, (qid, text) in enumerate(records, 1):
        kws = tuple(preprocess(text))
        qid = str(pos) if renumber else qid
        if not kws:
            log.warning("query %s has no keywords after normalization; skipped", qid)
            continue
        queries.append((qid, kws))
    return QuerySet(tuple(queries))
