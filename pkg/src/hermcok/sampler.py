"""Random Hermitian matrices over O/pi^M.

A Hermitian matrix is determined by the n^2 free p-adic digits
Y_ij (i <= j) and Z_ij (i < j) through X_ij = Y_ij + theta*Z_ij.  Randomness
comes from counter-based Philox streams keyed by the seed and a fixed block of
sample indices, so a sample is reproducible on its own whatever the worker
layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ring import RingElem, sigma


class NotHermitian(ValueError):
    pass


@dataclass
class HermitianMatrix:
    spec: object
    n: int
    entries: list

    def __post_init__(self):
        if len(self.entries) != self.n or any(len(row) != self.n for row in self.entries):
            raise ValueError("entries must be an n x n array")
        for i in range(self.n):
            if self.entries[i][i].y:
                raise NotHermitian(f"diagonal entry ({i},{i}) has a nonzero theta-digit")
            for j in range(i, self.n):
                if self.entries[j][i] != sigma(self.entries[i][j]):
                    raise NotHermitian(f"entry ({j},{i}) is not the conjugate of ({i},{j})")

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self):
        return [list(r) for r in self.entries]

    def to_json(self):
        return [[e.to_json() for e in row] for row in self.entries]

    def dumps(self):
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj, spec):
        rows = [[RingElem.from_json(e, spec) for e in row] for row in obj]
        return cls(spec, len(rows), rows)

    def digits(self):
        """(Y, Z) integer arrays of the theta-expansion of every entry."""
        Y = np.array([[e.x for e in row] for row in self.entries], dtype=np.int64)
        Z = np.array([[e.y for e in row] for row in self.entries], dtype=np.int64)
        return Y, Z


@dataclass(frozen=True)
class EntryDistribution:
    """Law of the mod-p residue of a digit; higher p-adic digits stay uniform."""

    residue_probs: tuple
    epsilon: float

    def __post_init__(self):
        probs = tuple(float(x) for x in self.residue_probs)
        object.__setattr__(self, "residue_probs", probs)
        if any(x < 0 for x in probs):
            raise ValueError("negative probability")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"residue probabilities sum to {sum(probs)}, not 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if max(probs) > 1 - self.epsilon + 1e-15:
            raise ValueError(f"max residue probability {max(probs)} exceeds 1 - epsilon")

    @property
    def p(self):
        return len(self.residue_probs)

    @classmethod
    def from_probs(cls, probs, epsilon=None):
        probs = tuple(probs)
        if epsilon is None:
            epsilon = 1.0 - max(probs)
        return cls(probs, epsilon)

    @classmethod
    def uniform(cls, p):
        return cls.from_probs([1.0 / p] * p)

    @classmethod
    def parse(cls, text, p):
        """Parse ``"r0:p0,r1:p1,..."`` or a JSON array of probabilities."""
        text = text.strip()
        if text.startswith("["):
            probs = [float(x) for x in json.loads(text)]
        else:
            probs = [0.0] * p
            for item in text.split(","):
                r, w = item.split(":")
                probs[int(r) % p] += float(w)
        if len(probs) != p:
            raise ValueError(f"expected {p} residue probabilities, got {len(probs)}")
        return cls.from_probs(probs)

    def to_json(self):
        return {"residue_probs": list(self.residue_probs), "epsilon": self.epsilon}


def rng_stream(seed, index):
    """Independent Philox stream for sample ``index`` under global ``seed``."""
    key = ((int(seed) & (2**64 - 1)) << 64) | (int(index) & (2**64 - 1))
    return np.random.Generator(np.random.Philox(key=key))


def _draw(rng, p, m, size, dist):
    if m == 0:
        return np.zeros(size, dtype=np.int64)
    if dist is None:
        return rng.integers(0, p**m, size=size, dtype=np.int64)
    if dist.p != p:
        raise ValueError(f"distribution over {dist.p} residues used with p = {p}")
    residue = rng.choice(p, size=size, p=dist.residue_probs).astype(np.int64)
    high = rng.integers(0, p ** (m - 1), size=size, dtype=np.int64)
    return residue + p * high


def draw_free_digits(spec, n, rng, dist_y=None, dist_z=None):
    """The n(n+1)/2 diagonal-and-above Y digits, then the n(n-1)/2 Z digits."""
    ys = _draw(rng, spec.p, spec.m_x, n * (n + 1) // 2, dist_y)
    zs = _draw(rng, spec.p, spec.m_y, n * (n - 1) // 2, dist_z)
    return ys, zs


def assemble_digits(spec, n, ys, zs):
    """Fill full (Y, Z) digit arrays from the free digits via X_ji = sigma(X_ij)."""
    Y = np.zeros((n, n), dtype=np.int64)
    Z = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n)
    Y[iu] = ys
    iu1 = np.triu_indices(n, 1)
    Z[iu1] = zs
    # sigma(x + theta y) = (x + s y) - theta y
    lo = np.tril_indices(n, -1)
    Y[lo] = (Y.T[lo] + spec.s * Z.T[lo]) % spec.mod_x
    Z[lo] = (-Z.T[lo]) % spec.mod_y
    return Y, Z


def _to_matrix(spec, Y, Z):
    n = Y.shape[0]
    rows = [[RingElem(int(Y[i, j]), int(Z[i, j]), spec) for j in range(n)] for i in range(n)]
    return HermitianMatrix(spec, n, rows)


def sample_haar(spec, n, rng):
    if n < 1:
        raise ValueError("n must be >= 1")
    ys, zs = draw_free_digits(spec, n, rng)
    return _to_matrix(spec, *assemble_digits(spec, n, ys, zs))


def sample_eps_balanced(spec, n, dist_y, dist_z, rng):
    if n < 1:
        raise ValueError("n must be >= 1")
    ys, zs = draw_free_digits(spec, n, rng, dist_y, dist_z)
    return _to_matrix(spec, *assemble_digits(spec, n, ys, zs))


CHUNK = 256


def _chunk_digits(spec, n, seed, chunk, dist_y, dist_z):
    """Free digits for the CHUNK consecutive sample indices of one chunk.

    The stream is keyed by (seed, chunk), and chunks are fixed ranges of
    sample indices, so a sample's digits never depend on how work is split.
    """
    rng = rng_stream(seed, chunk)
    ys = _draw(rng, spec.p, spec.m_x, (CHUNK, n * (n + 1) // 2), dist_y)
    zs = _draw(rng, spec.p, spec.m_y, (CHUNK, n * (n - 1) // 2), dist_z)
    return ys, zs


def _assemble_batch(spec, n, ys, zs):
    B = ys.shape[0]
    Y = np.zeros((B, n, n), dtype=np.int64)
    Z = np.zeros((B, n, n), dtype=np.int64)
    iu = np.triu_indices(n)
    Y[:, iu[0], iu[1]] = ys
    iu1 = np.triu_indices(n, 1)
    Z[:, iu1[0], iu1[1]] = zs
    lo = np.tril_indices(n, -1)
    Yt = Y.transpose(0, 2, 1)
    Zt = Z.transpose(0, 2, 1)
    Y[:, lo[0], lo[1]] = (Yt[:, lo[0], lo[1]] + spec.s * Zt[:, lo[0], lo[1]]) % spec.mod_x
    Z[:, lo[0], lo[1]] = (-Zt[:, lo[0], lo[1]]) % spec.mod_y
    return Y, Z


def sample_batch(spec, n, seed, indices, dist_y=None, dist_z=None):
    """Digit arrays (Y, Z) of shape (len(indices), n, n) for the given sample indices."""
    idx = np.asarray(list(indices), dtype=np.int64)
    Y = np.empty((len(idx), n, n), dtype=np.int64)
    Z = np.empty((len(idx), n, n), dtype=np.int64)
    chunks = idx // CHUNK
    for c in np.unique(chunks):
        sel = np.nonzero(chunks == c)[0]
        ys, zs = _chunk_digits(spec, n, seed, int(c), dist_y, dist_z)
        pos = idx[sel] % CHUNK
        Y[sel], Z[sel] = _assemble_batch(spec, n, ys[pos], zs[pos])
    return Y, Z


def sample_indexed(spec, n, seed, index, dist_y=None, dist_z=None):
    """The matrix that :func:`sample_batch` produces for ``index``."""
    Y, Z = sample_batch(spec, n, seed, [index], dist_y, dist_z)
    return _to_matrix(spec, Y[0], Z[0])
