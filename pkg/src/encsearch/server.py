"""Cloud-server role: encrypted inner-product scoring and top-k ranking.

Only the wire artifacts are visible here; nothing in this module touches
a secret key or a plaintext vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .wire import EncryptedSubindex, Trapdoor, read_index_file


def score(subindex: EncryptedSubindex, trapdoor: Trapdoor) -> float:
    if subindex.dim != trapdoor.dim:
        raise ValueError(f"subindex dimension {subindex.dim} != trapdoor dimension {trapdoor.dim}")
    return float(subindex.left @ trapdoor.left + subindex.right @ trapdoor.right)


@dataclass(frozen=True)
class RankedResults:
    doc_ids: tuple[str, ...]
    scores: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.doc_ids)

    def __iter__(self):
        return iter(zip(self.doc_ids, self.scores))

    def to_csv(self) -> str:
        return "doc_id,score\n" + "".join(f"{d},{s!r}\n" for d, s in self)


class EncryptedIndex:
    """All subindexes stacked into two ``|D| x (n+1)`` matrices for a linear scan."""

    def __init__(self, subindexes: Sequence[EncryptedSubindex]):
        if not subindexes:
            raise ValueError("empty index")
        dims = {s.dim for s in subindexes}
        if len(dims) != 1:
            raise ValueError(f"subindexes have mixed dimensions {sorted(dims)}")
        ids = [s.doc_id for s in subindexes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate doc_id in index")
        self.subindexes = tuple(subindexes)
        self.doc_ids = tuple(ids)
        self.dim = dims.pop()
        self.left = np.stack([s.left for s in subindexes])
        self.right = np.stack([s.right for s in subindexes])
        # position of each doc in ascending doc_id order, for tie-breaking
        order = sorted(range(len(ids)), key=ids.__getitem__)
        self._id_rank = np.empty(len(ids), dtype=np.int64)
        self._id_rank[order] = np.arange(len(ids))

    def __len__(self) -> int:
        return len(self.doc_ids)

    @classmethod
    def load(cls, path) -> "EncryptedIndex":
        return cls(read_index_file(path))

    def scores(self, trapdoor: Trapdoor) -> np.ndarray:
        if trapdoor.dim != self.dim:
            raise ValueError(f"trapdoor dimension {trapdoor.dim} != index dimension {self.dim}")
        return self.left @ trapdoor.left + self.right @ trapdoor.right

    def top_k(self, trapdoor: Trapdoor, k: int) -> RankedResults:
        return top_k(self, trapdoor, k)


def rank_by_scores(scores: np.ndarray, id_rank: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` best scores, descending, ties by ``id_rank`` ascending."""
    order = np.lexsort((id_rank, -scores))
    return order[:k]


def top_k(index: EncryptedIndex, trapdoor: Trapdoor, k: int) -> RankedResults:
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(index) == 0:
        raise ValueError("empty index")
    s = index.scores(trapdoor)
    best = rank_by_scores(s, index._id_rank, k)
    return RankedResults(tuple(index.doc_ids[i] for i in best), tuple(float(s[i]) for i in best))
