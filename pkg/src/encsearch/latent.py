"""Truncated SVD of the keyword-document matrix and concept-space projection."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

SIGMA_FLOOR = 1e-10  # relative to the largest singular value
ZERO_NORM = 1e-12
DEFAULT_CONCEPTS = 300
_SVD_MAGIC = b"SVD1"


@dataclass(frozen=True)
class SvdModel:
    """Top singular triplets ``A ~ U diag(S) V^T``.

    ``n1`` is the effective concept count, which can be smaller than the
    requested rank when A is rank deficient.
    """

    U: np.ndarray  # t x n1
    S: np.ndarray  # n1, descending, > 0
    V: np.ndarray  # |D| x n1
    requested: int

    @property
    def n1(self) -> int:
        return self.S.shape[0]

    @property
    def t(self) -> int:
        return self.U.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.S) @ self.V.T

    def to_bytes(self) -> bytes:
        t, n1 = self.U.shape
        d = self.V.shape[0]
        header = _SVD_MAGIC + struct.pack("<IIII", t, d, n1, self.requested)
        return header + b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in (self.U, self.S, self.V))

    @classmethod
    def from_bytes(cls, data: bytes) -> "SvdModel":
        if data[:4] != _SVD_MAGIC:
            raise ValueError("not an SVD model file")
        t, d, n1, requested = struct.unpack_from("<IIII", data, 4)
        off = 20
        arrays = []
        for shape in ((t, n1), (n1,), (d, n1)):
            count = int(np.prod(shape))
            arrays.append(np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(shape).copy())
            off += 8 * count
        if off != len(data):
            raise ValueError("trailing or missing bytes in SVD model file")
        return cls(*arrays, requested=requested)


def truncated_svd(A, n1: int = DEFAULT_CONCEPTS) -> SvdModel:
    """Top-``n1`` singular triplets of A (a matrix or a KeywordDocumentMatrix)."""
    A = np.asarray(getattr(A, "weights", A), dtype=np.float64)
    t, d = A.shape
    if not 1 <= n1 <= min(t, d):
        raise ValueError(f"n1={n1} outside [1, min(t, |D|)] = [1, {min(t, d)}]")
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    keep = min(n1, int(np.sum(S > SIGMA_FLOOR * S[0]))) if S[0] > 0 else 0
    if keep == 0:
        raise ValueError("matrix is numerically zero")
    U, S, V = U[:, :keep], S[:keep], Vt[:keep].T
    # deterministic sign: largest-magnitude entry of each left vector positive
    flip = np.sign(U[np.argmax(np.abs(U), axis=0), np.arange(keep)])
    flip[flip == 0] = 1.0
    return SvdModel(U * flip, S.copy(), V * flip, requested=n1)


def project(term_vector, model: SvdModel) -> np.ndarray:
    """Unit vector of ``v^T U S^-1``; zero when that norm underflows."""
    v = np.asarray(term_vector, dtype=np.float64)
    if v.shape != (model.t,):
        raise ValueError(f"term vector has shape {v.shape}, model expects ({model.t},)")
    p = (v @ model.U) / model.S
    norm = np.linalg.norm(p)
    if norm < ZERO_NORM:
        return np.zeros(model.n1)
    return p / norm
