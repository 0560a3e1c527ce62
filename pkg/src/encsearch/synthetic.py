"""Synthetic collections: planted-relevance search data and bag-of-words benchmark corpora."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingTable, save_embeddings
from .evaluation import QrelSet, write_qrels
from .text import STOPWORDS, Corpus, QuerySet, preprocess, save_corpus

_CONSONANTS = "bdfgklmnprtvz"
_VOWELS = "aeiou"


def pseudo_words(count: int, rng: np.random.Generator, syllables: int = 3) -> list[str]:
    """Distinct consonant-vowel words that survive normalization unchanged."""
    words: list[str] = []
    seen = set()
    while len(words) < count:
        w = "".join(rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS)) for _ in range(syllables))
        if w in seen or w in STOPWORDS or preprocess(w) != [w]:
            continue
        seen.add(w)
        words.append(w)
    return words


def _unit(v):
    return v / np.linalg.norm(v)


@dataclass
class PlantedCollection:
    corpus: Corpus
    queries: QuerySet
    qrels: QrelSet
    table: EmbeddingTable

    def write(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        save_corpus(self.corpus, d / "corpus.jsonl")
        with open(d / "queries.jsonl", "w", encoding="utf-8") as fh:
            for qid, kws in self.queries:
                fh.write(json.dumps({"id": qid, "text": " ".join(kws)}) + "\n")
        write_qrels(d / "qrels.txt", self.qrels)
        save_embeddings(self.table, d / "embeddings.txt")


def planted_collection(
    seed: int = 2019,
    n_topics: int = 20,
    docs_per_topic: int = 10,
    concepts_per_topic: int = 5,
    synonyms: int = 3,
    background_words: int = 120,
    n2: int = 8,
) -> PlantedCollection:
    """Topic corpus where each concept has several surface forms (synonyms).

    Synonyms share an embedding direction, so they are related only through
    the embedding table and through co-occurrence statistics. Each query names
    two concepts of one topic; a document of that topic gets grade 1, plus one
    per named concept it mentions under any surface form, with both mentioned
    scoring the top grade 4.
    """
    rng = np.random.default_rng(seed)
    n_concepts = n_topics * concepts_per_topic
    words = pseudo_words(n_concepts * synonyms + background_words, rng)
    forms = np.array(words[: n_concepts * synonyms]).reshape(n_topics, concepts_per_topic, synonyms)
    background = words[n_concepts * synonyms:]

    topic_dirs = rng.normal(size=(n_topics, n2))
    vectors = {}
    for j in range(n_topics):
        for c in range(concepts_per_topic):
            concept = _unit(topic_dirs[j]) + 0.6 * _unit(rng.normal(size=n2))
            for s in range(synonyms):
                vectors[forms[j, c, s]] = _unit(concept + 0.05 * rng.normal(size=n2))
    for w in background:
        vectors[w] = _unit(rng.normal(size=n2))

    docs = []
    doc_concepts = []
    for j in range(n_topics):
        for m in range(docs_per_topic):
            chosen = rng.choice(concepts_per_topic, size=rng.integers(2, 4), replace=False)
            toks = []
            for c in chosen:
                form = forms[j, c, rng.integers(synonyms)]
                toks += [str(form)] * int(rng.integers(1, 4))
            toks += list(rng.choice(background, size=rng.integers(8, 16)))
            if rng.random() < 0.3:
                other = (j + rng.integers(1, n_topics)) % n_topics
                toks.append(str(forms[other, rng.integers(concepts_per_topic), rng.integers(synonyms)]))
            rng.shuffle(toks)
            docs.append(" ".join(toks))
            doc_concepts.append((j, set(int(c) for c in chosen)))

    order = rng.permutation(len(docs))
    ids = [f"d{k:03d}" for k in range(len(docs))]
    corpus = Corpus.from_texts((ids[pos], docs[i]) for pos, i in enumerate(order))
    concepts_by_id = {ids[pos]: doc_concepts[i] for pos, i in enumerate(order)}

    queries, qrels = [], {}
    for j in range(n_topics):
        named = rng.choice(concepts_per_topic, size=2, replace=False)
        kws = tuple(str(forms[j, c, rng.integers(synonyms)]) for c in named)
        qid = f"q{j:02d}"
        queries.append((qid, kws))
        judged = {}
        for doc_id, (topic, concepts) in concepts_by_id.items():
            if topic != j:
                continue
            hits = len(concepts & set(int(c) for c in named))
            judged[doc_id] = (1, 2, 4)[hits]
        qrels[qid] = judged

    words_sorted = sorted(vectors)
    table = EmbeddingTable(tuple(words_sorted), np.array([vectors[w] for w in words_sorted]))
    return PlantedCollection(corpus, QuerySet(tuple(queries)), qrels, table)


def bag_of_words_corpus(
    n_docs: int,
    vocab: list[str],
    rng: np.random.Generator,
    doc_len: int = 80,
    zipf: float = 1.1,
) -> Corpus:
    """Documents drawn from a Zipf distribution over ``vocab``."""
    p = 1.0 / np.arange(1, len(vocab) + 1) ** zipf
    p /= p.sum()
    perm = rng.permutation(len(vocab))
    texts = []
    for i in range(n_docs):
        idx = rng.choice(len(vocab), size=doc_len, p=p)
        texts.append((f"doc{i:05d}", " ".join(vocab[perm[k]] for k in idx)))
    return Corpus.from_texts(texts)


def random_embedding_table(words: list[str], n2: int, rng: np.random.Generator) -> EmbeddingTable:
    return EmbeddingTable(tuple(words), rng.normal(size=(len(words), n2)))
