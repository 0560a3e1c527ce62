"""Encrypted artifacts exchanged between the three roles, and their binary codecs.

All integers and floats are little-endian.

Subindex record::

    b"SIDX" | u32 n | u16 len(doc_id) | doc_id utf-8 | (n+1) f64 left | (n+1) f64 right

Trapdoor file::

    b"TRPD" | u32 n | (n+1) f64 left | (n+1) f64 right

An index file is a plain concatenation of subindex records.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

SUBINDEX_MAGIC = b"SIDX"
TRAPDOOR_MAGIC = b"TRPD"
TRAPDOOR_HEADER = 8


class WireFormatError(ValueError):
    pass


def _vec(data: bytes, offset: int, count: int) -> np.ndarray:
    if offset + 8 * count > len(data):
        raise WireFormatError("truncated vector payload")
    return np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64)


@dataclass(frozen=True)
class EncryptedSubindex:
    doc_id: str
    left: np.ndarray
    right: np.ndarray

    @property
    def dim(self) -> int:
        return self.left.shape[0]

    def header_size(self) -> int:
        return 10 + len(self.doc_id.encode("utf-8"))

    def to_bytes(self) -> bytes:
        ident = self.doc_id.encode("utf-8")
        head = SUBINDEX_MAGIC + struct.pack("<IH", self.dim - 1, len(ident)) + ident
        return head + self.left.astype("<f8").tobytes() + self.right.astype("<f8").tobytes()

    @classmethod
    def read_from(cls, data: bytes, offset: int = 0) -> tuple["EncryptedSubindex", int]:
        if data[offset:offset + 4] != SUBINDEX_MAGIC:
            raise WireFormatError(f"bad subindex magic at byte {offset}")
        n, id_len = struct.unpack_from("<IH", data, offset + 4)
        pos = offset + 10
        doc_id = data[pos:pos + id_len].decode("utf-8")
        pos += id_len
        left = _vec(data, pos, n + 1)
        right = _vec(data, pos + 8 * (n + 1), n + 1)
        return cls(doc_id, left, right), pos + 16 * (n + 1)


@dataclass(frozen=True)
class Trapdoor:
    left: np.ndarray
    right: np.ndarray

    @property
    def dim(self) -> int:
        return self.left.shape[0]

    def scaled(self, a: float) -> "Trapdoor":
        return Trapdoor(a * self.left, a * self.right)

    def to_bytes(self) -> bytes:
        return (
            TRAPDOOR_MAGIC
            + struct.pack("<I", self.dim - 1)
            + self.left.astype("<f8").tobytes()
            + self.right.astype("<f8").tobytes()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "Trapdoor":
        if data[:4] != TRAPDOOR_MAGIC:
            raise WireFormatError("not a trapdoor file")
        (n,) = struct.unpack_from("<I", data, 4)
        if len(data) != TRAPDOOR_HEADER + 16 * (n + 1):
            raise WireFormatError(f"trapdoor size {len(data)} does not match n={n}")
        return cls(_vec(data, 8, n + 1), _vec(data, 8 + 8 * (n + 1), n + 1))


def iter_subindexes(data: bytes) -> Iterator[EncryptedSubindex]:
    pos = 0
    while pos < len(data):
        sub, pos = EncryptedSubindex.read_from(data, pos)
        yield sub


def write_index(path, subindexes: Iterable[EncryptedSubindex]) -> None:
    with open(path, "wb") as fh:
        for sub in subindexes:
            fh.write(sub.to_bytes())


def read_index_file(path) -> list[EncryptedSubindex]:
    return list(iter_subindexes(Path(path).read_bytes()))


def write_trapdoor(path, trapdoor: Trapdoor) -> None:
    Path(path).write_bytes(trapdoor.to_bytes())


def read_trapdoor(path) -> Trapdoor:
    return Trapdoor.from_bytes(Path(path).read_bytes())
