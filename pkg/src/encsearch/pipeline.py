"""Data-owner and data-user roles: plaintext representations, index building, trapdoors.

The cloud-server role lives in :mod:`encsearch.server`.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingTable, doc_embedding, load_embeddings, query_embedding
from .latent import SvdModel, project, truncated_svd
from .lexical import KeywordDocumentMatrix, Vocabulary, build_matrix, query_term_vector
from .secure_knn import (
    R_MAX,
    T_MAX,
    SecretKey,
    decrypt_payload,
    encrypt_index,
    encrypt_payload,
    gen_trapdoor,
    keygen,
    NONCE_BYTES,
)
from .text import Corpus
from .wire import EncryptedSubindex, Trapdoor

log = logging.getLogger(__name__)

_PAYLOAD_MAGIC = b"PAYL"


def _pad(v: np.ndarray, size: int) -> np.ndarray:
    # rank-deficient SVDs give fewer concepts; zero padding keeps the key dimension fixed
    if v.shape[0] == size:
        return v
    out = np.zeros(size)
    out[: v.shape[0]] = v
    return out


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class SecretBundle:
    """What the data owner hands to data users over a secure channel."""

    key: SecretKey
    svd: SvdModel
    vocabulary: Vocabulary
    n1: int
    embeddings: EmbeddingTable
    embeddings_path: str = ""

    @property
    def n2(self) -> int:
        return self.embeddings.n2

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.key.save(d / "key.bin")
        (d / "svd.bin").write_bytes(self.svd.to_bytes())
        (d / "vocabulary.txt").write_text("".join(t + "\n" for t in self.vocabulary.terms), encoding="utf-8")
        meta = {"n1": self.n1, "n2": self.n2, "embeddings": self.embeddings_path}
        if self.embeddings_path:
            meta["embeddings_sha256"] = file_sha256(self.embeddings_path)
        (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory, embeddings: EmbeddingTable | None = None) -> "SecretBundle":
        d = Path(directory)
        meta = json.loads((d / "meta.json").read_text())
        if embeddings is None:
            path = meta.get("embeddings")
            if not path:
                raise ValueError("bundle has no embedding reference; pass the table explicitly")
            if "embeddings_sha256" in meta and file_sha256(path) != meta["embeddings_sha256"]:
                raise ValueError(f"embedding file {path} changed since the bundle was built")
            embeddings = load_embeddings(path)
        terms = [t for t in (d / "vocabulary.txt").read_text(encoding="utf-8").split("\n") if t]
        return cls(
            key=SecretKey.load(d / "key.bin"),
            svd=SvdModel.from_bytes((d / "svd.bin").read_bytes()),
            vocabulary=Vocabulary(tuple(terms)),
            n1=int(meta["n1"]),
            embeddings=embeddings,
            embeddings_path=meta.get("embeddings", ""),
        )


class DataOwner:
    """Holds the plaintext corpus model and produces the encrypted index."""

    def __init__(self, matrix: KeywordDocumentMatrix, svd: SvdModel, table: EmbeddingTable, n1: int):
        self.matrix = matrix
        self.svd = svd
        self.table = table
        self.n1 = n1

    @classmethod
    def from_corpus(cls, corpus: Corpus, table: EmbeddingTable, n1: int) -> "DataOwner":
        matrix = build_matrix(corpus)
        svd = truncated_svd(matrix, n1)
        if svd.n1 < n1:
            log.warning("keyword matrix has numerical rank %d < n1=%d; concept vectors are zero padded", svd.n1, n1)
        return cls(matrix, svd, table, n1)

    @property
    def doc_ids(self) -> tuple[str, ...]:
        return self.matrix.doc_ids

    @property
    def n(self) -> int:
        return self.n1 + self.table.n2

    def concept_vector(self, i: int) -> np.ndarray:
        return _pad(project(self.matrix.column(i), self.svd), self.n1)

    def embedding_vector(self, i: int) -> np.ndarray:
        return doc_embedding(self.matrix.keywords[i], self.table)

    def plain_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """(|D| x n1 concept vectors, |D| x n2 embedding vectors)."""
        D1 = np.array([self.concept_vector(i) for i in range(len(self.doc_ids))]).reshape(-1, self.n1)
        D2 = np.array([self.embedding_vector(i) for i in range(len(self.doc_ids))]).reshape(-1, self.table.n2)
        return D1, D2

    def build_index(self, key: SecretKey, rng: np.random.Generator, limit: int | None = None) -> list[EncryptedSubindex]:
        """One subindex per document (the first ``limit`` documents if given)."""
        if key.n != self.n:
            raise ValueError(f"key dimension n={key.n} but n1 + n2 = {self.n}")
        ids = self.doc_ids if limit is None else self.doc_ids[:limit]
        return [
            encrypt_index(self.concept_vector(i), self.embedding_vector(i), key, rng, doc_id=doc_id)
            for i, doc_id in enumerate(ids)
        ]

    def bundle(self, key: SecretKey, embeddings_path: str = "") -> SecretBundle:
        return SecretBundle(key, self.svd, self.matrix.vocabulary, self.n1, self.table, embeddings_path)

    def new_key(self, rng: np.random.Generator) -> SecretKey:
        return keygen(self.n, rng)


class DataUser:
    """Turns keyword queries into trapdoors and decrypts returned documents."""

    def __init__(self, bundle: SecretBundle, r_max: float = R_MAX, t_max: float = T_MAX):
        self.bundle = bundle
        self.r_max = r_max
        self.t_max = t_max

    def query_vectors(self, keywords: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        b = self.bundle
        q = query_term_vector(keywords, b.vocabulary)
        q1 = _pad(project(q, b.svd), b.n1)
        q2 = query_embedding(keywords, b.embeddings)
        return q1, q2

    def trapdoor(self, keywords: Sequence[str], rng: np.random.Generator, r=None, t=None) -> Trapdoor:
        q1, q2 = self.query_vectors(keywords)
        if not q1.any() and not q2.any():
            log.warning("no query keyword is in the vocabulary or the embedding table: %s", list(keywords))
        return gen_trapdoor(q1, q2, self.bundle.key, rng, r=r, t=t, r_max=self.r_max, t_max=self.t_max)

    def decrypt(self, doc_id: str, ciphertext: bytes) -> str:
        return decrypt_payload(ciphertext, self.bundle.key.payload_key, doc_id.encode("utf-8")).decode("utf-8")


# -- encrypted document store ------------------------------------------------

def encrypt_documents(corpus: Corpus, key: SecretKey, rng: np.random.Generator) -> dict[str, bytes]:
    """Encrypt raw texts, binding each ciphertext to its doc_id."""
    return {
        d.doc_id: encrypt_payload(d.raw_text.encode("utf-8"), key.payload_key, rng.bytes(NONCE_BYTES), d.doc_id.encode("utf-8"))
        for d in corpus
    }


def write_payloads(path, payloads: dict[str, bytes]) -> None:
    with open(path, "wb") as fh:
        fh.write(_PAYLOAD_MAGIC)
        for doc_id, ct in payloads.items():
            ident = doc_id.encode("utf-8")
            fh.write(struct.pack("<H", len(ident)) + ident + struct.pack("<I", len(ct)) + ct)


def read_payloads(path) -> dict[str, bytes]:
    data = Path(path).read_bytes()
    if data[:4] != _PAYLOAD_MAGIC:
        raise ValueError("not a payload store")
    out, pos = {}, 4
    while pos < len(data):
        (n,) = struct.unpack_from("<H", data, pos)
        doc_id = data[pos + 2:pos + 2 + n].decode("utf-8")
        pos += 2 + n
        (m,) = struct.unpack_from("<I", data, pos)
        out[doc_id] = data[pos + 4:pos + 4 + m]
        pos += 4 + m
    return out
