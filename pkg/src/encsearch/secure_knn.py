"""Secure kNN split-and-transform encryption of document indexes and query trapdoors.

Everything random draws from a caller-supplied ``numpy.random.Generator`` so
keys, subindexes and trapdoors are reproducible under a pinned seed.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .wire import EncryptedSubindex, Trapdoor

MAX_CONDITION = 1e6
KEYGEN_ATTEMPTS = 100
R_MAX = 1000.0
T_MAX = 1000.0
PAYLOAD_KEY_BYTES = 32
NONCE_BYTES = 12
_KEY_MAGIC = b"SKEY"


class PayloadAuthError(ValueError):
    """Ciphertext failed authentication (tampered, truncated or wrong key)."""


@dataclass(frozen=True)
class SecretKey:
    S: np.ndarray  # uint8 in {0, 1}, length n+1
    M1: np.ndarray
    M2: np.ndarray
    M1_inv: np.ndarray
    M2_inv: np.ndarray
    payload_key: bytes

    @property
    def n(self) -> int:
        return self.S.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    def inverse_error(self) -> float:
        eye = np.eye(self.dim)
        return max(np.abs(self.M1 @ self.M1_inv - eye).max(), np.abs(self.M2 @ self.M2_inv - eye).max())

    def to_bytes(self) -> bytes:
        bits = np.packbits(self.S.astype(np.uint8)).tobytes()
        mats = b"".join(np.ascontiguousarray(m, dtype="<f8").tobytes() for m in (self.M1, self.M2, self.M1_inv, self.M2_inv))
        return (
            _KEY_MAGIC
            + struct.pack("<I", self.n)
            + bits
            + mats
            + struct.pack("<H", len(self.payload_key))
            + self.payload_key
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SecretKey":
        if data[:4] != _KEY_MAGIC:
            raise ValueError("not a secret key file")
        (n,) = struct.unpack_from("<I", data, 4)
        dim = n + 1
        off = 8
        nbits = (dim + 7) // 8
        S = np.unpackbits(np.frombuffer(data, dtype=np.uint8, count=nbits, offset=off))[:dim]
        off += nbits
        mats = []
        for _ in range(4):
            mats.append(np.frombuffer(data, dtype="<f8", count=dim * dim, offset=off).reshape(dim, dim).astype(np.float64))
            off += 8 * dim * dim
        (klen,) = struct.unpack_from("<H", data, off)
        off += 2
        payload_key = bytes(data[off:off + klen])
        if off + klen != len(data):
            raise ValueError("key file length mismatch")
        return cls(S.astype(np.uint8), *mats, payload_key=payload_key)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "SecretKey":
        return cls.from_bytes(Path(path).read_bytes())


def _invertible(dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    for _ in range(KEYGEN_ATTEMPTS):
        M = rng.uniform(-1.0, 1.0, size=(dim, dim))
        if np.linalg.cond(M) <= MAX_CONDITION:
            return M, np.linalg.inv(M)
    raise RuntimeError(f"no matrix with condition number <= {MAX_CONDITION:g} after {KEYGEN_ATTEMPTS} attempts")


def keygen(n: int, rng: np.random.Generator) -> SecretKey:
    """Splitting indicator, two well-conditioned (n+1)x(n+1) matrices and a payload key."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    dim = n + 1
    S = rng.integers(0, 2, size=dim, dtype=np.uint8)
    M1, M1_inv = _invertible(dim, rng)
    M2, M2_inv = _invertible(dim, rng)
    payload_key = rng.bytes(PAYLOAD_KEY_BYTES)
    return SecretKey(S, M1, M2, M1_inv, M2_inv, payload_key)


def _split(vec, mask: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape != mask.shape:
        raise ValueError(f"vector length {vec.shape} does not match indicator length {mask.shape}")
    bound = max(1.0, 2.0 * float(np.abs(vec).max(initial=0.0)))
    noise = rng.uniform(-bound, bound, size=vec.shape)
    a = np.where(mask, noise, vec)
    b = np.where(mask, vec - noise, vec)
    return a, b


def split_index(D, S, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random additive split where ``S[m] == 1``, copy elsewhere."""
    S = np.asarray(S)
    return _split(D, S == 1, rng)


def split_query(Q, S, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random additive split where ``S[m] == 0``, copy elsewhere."""
    S = np.asarray(S)
    return _split(Q, S == 0, rng)


def merge_split(a, b, mask) -> np.ndarray:
    """Undo a split: sum at split positions, either half elsewhere."""
    return np.where(mask, a + b, a)


def plain_document_vector(d1, d2) -> np.ndarray:
    return np.concatenate([np.asarray(d1, dtype=np.float64), np.asarray(d2, dtype=np.float64), [1.0]])


def _check_dims(d1, d2, key: SecretKey) -> None:
    if len(d1) + len(d2) != key.n:
        raise ValueError(f"|d1| + |d2| = {len(d1) + len(d2)} but key has n = {key.n}")


def encrypt_index(d1, d2, key: SecretKey, rng: np.random.Generator, doc_id: str = "") -> EncryptedSubindex:
    _check_dims(d1, d2, key)
    Da, Db = split_index(plain_document_vector(d1, d2), key.S, rng)
    return EncryptedSubindex(doc_id, key.M1.T @ Da, key.M2.T @ Db)


def sample_query_scale(rng: np.random.Generator, r_max: float = R_MAX, t_max: float = T_MAX) -> tuple[float, float]:
    """Draw r in (0, r_max] (bounded away from 0) and t in [-t_max, t_max]."""
    while True:
        r = r_max - rng.uniform(0.0, r_max)  # (0, r_max]
        if r >= 1e-6 * r_max:
            break
    t = rng.uniform(-t_max, t_max)
    return float(r), float(t)


def extended_query_vector(q1, q2, r: float, t: float) -> np.ndarray:
    if not r > 0:
        raise ValueError("r must be positive")
    return np.concatenate([r * np.asarray(q1, dtype=np.float64), r * np.asarray(q2, dtype=np.float64), [t]])


def gen_trapdoor(
    q1,
    q2,
    key: SecretKey,
    rng: np.random.Generator,
    r: float | None = None,
    t: float | None = None,
    r_max: float = R_MAX,
    t_max: float = T_MAX,
) -> Trapdoor:
    """Encrypt ``(r*q1, r*q2, t)``; r and t are sampled unless pinned by the caller."""
    _check_dims(q1, q2, key)
    if r is None or t is None:
        r_s, t_s = sample_query_scale(rng, r_max, t_max)
        r = r_s if r is None else r
        t = t_s if t is None else t
    Qa, Qb = split_query(extended_query_vector(q1, q2, r, t), key.S, rng)
    return Trapdoor(key.M1_inv @ Qa, key.M2_inv @ Qb)


def unlinkability_bound(alpha: int, mu: int, delta_q: float, delta_r: float, delta_t: float) -> float:
    """log2 of the probability that two trapdoors for one query coincide."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if min(mu, delta_q, delta_r, delta_t) < 0:
        raise ValueError("bit widths and mu must be non-negative")
    return -(math.log2(alpha) + delta_r + delta_t + mu * delta_q)


# -- document payloads -------------------------------------------------------

def encrypt_payload(plaintext: bytes, payload_key: bytes, nonce: bytes | None = None, associated: bytes = b"") -> bytes:
    """AES-256-GCM; output is ``nonce || ciphertext || tag``."""
    if nonce is None:
        nonce = os.urandom(NONCE_BYTES)
    if len(nonce) != NONCE_BYTES:
        raise ValueError(f"nonce must be {NONCE_BYTES} bytes")
    return nonce + AESGCM(payload_key).encrypt(nonce, plaintext, associated or None)


def decrypt_payload(ciphertext: bytes, payload_key: bytes, associated: bytes = b"") -> bytes:
    if len(ciphertext) < NONCE_BYTES + 16:
        raise PayloadAuthError("ciphertext too short")
    nonce, body = ciphertext[:NONCE_BYTES], ciphertext[NONCE_BYTES:]
    try:
        return AESGCM(payload_key).decrypt(nonce, body, associated or None)
    except InvalidTag as exc:
        raise PayloadAuthError("payload authentication failed") from exc
