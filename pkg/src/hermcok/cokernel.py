"""Cokernel types over the chain ring O/pi^a and module counting.

``cokernel_type`` runs valuation-pivot elimination (Smith normal form over a
chain ring).  Division only ever happens by units, and the quotient
``b / pi^v`` is taken as a digit lift, so every step is exact at the working
truncation.
"""

from __future__ import annotations

from fractions import Fraction
from math import prod

import numpy as np

from .partitions import Partition, dominated_by
from .ring import divide_by_pi, invert_unit, valuation
from .sampler import HermitianMatrix


class ClampError(ValueError):
    pass


def _rows_of(A):
    if isinstance(A, HermitianMatrix):
        return A.spec, A.rows()
    rows = [list(r) for r in A]
    if not rows or not rows[0]:
        raise ValueError("empty matrix")
    return rows[0][0].spec, rows


def elementary_divisors(A, a):
    """Valuations of the Smith form of A mod pi^a; values >= a are reported as a."""
    spec, rows = _rows_of(A)
    if a > spec.M:
        raise ClampError(f"clamp {a} exceeds truncation {spec.M}")
    sp = spec.with_truncation(a)
    B = [[e.reduce(sp) for e in row] for row in rows]
    nr, nc = len(B), len(B[0])
    divisors = []
    k = 0
    while k < min(nr, nc):
        best = None
        for i in range(k, nr):
            for j in range(k, nc):
                v = valuation(B[i][j])
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        B[k], B[i] = B[i], B[k]
        for row in B:
            row[k], row[j] = row[j], row[k]
        unit = divide_by_pi(B[k][k], v)
        uinv = invert_unit(unit)
        for r in range(k + 1, nr):
            if B[r][k]:
                c = divide_by_pi(B[r][k], v) * uinv
                for col in range(k, nc):
                    B[r][col] = B[r][col] - c * B[k][col]
        # column clearing only touches row k, which is dropped from here on
        divisors.append(v)
        k += 1
    divisors += [a] * (min(nr, nc) - k)
    # a non-square matrix has a free part in its cokernel
    divisors += [a] * max(0, nr - nc)
    return divisors


def cokernel_type(A, a):
    """Type of cok(A) (x) O/pi^a as a Partition clamped at ``a``."""
    return Partition.clamped(elementary_divisors(A, a), a)


# ----------------------------------------------------------------------------
# vectorized engine for Monte Carlo batches


class BatchRing:
    """Digit arithmetic on int64 arrays for one truncation."""

    def __init__(self, spec):
        self.spec = spec
        self.p, self.s, self.t = spec.p, spec.s, spec.t
        self.mx, self.my = spec.mod_x, spec.mod_y
        inv = np.zeros(self.mx, dtype=np.int64)
        for r in range(self.mx):
            if r % self.p:
                inv[r] = pow(r, -1, self.mx)
        self.inv_table = inv
        self.u_inv = spec._u_inv

    def mul(self, x1, y1, x2, y2):
        return (
            (x1 * x2 + self.t * y1 * y2) % self.mx,
            (x1 * y2 + x2 * y1 + self.s * y1 * y2) % self.my,
        )

    def valuation(self, x, y):
        """Elementwise valuation with ``M`` standing for zero."""
        sp = self.spec
        M = sp.M
        vx = _vp_array(x, self.p, sp.m_x)
        vy = _vp_array(y, self.p, sp.m_y)
        if not sp.ramified:
            v = np.minimum(vx, vy)
        else:
            v = np.minimum(np.where(x == 0, 2 * M + 2, 2 * vx), np.where(y == 0, 2 * M + 2, 1 + 2 * vy))
        return np.minimum(v, M)

    def invert_unit(self, x, y):
        nm = (x * x + self.s * x * y - self.t * y * y) % self.mx
        ninv = self.inv_table[nm]
        return ((x + self.s * y) * ninv) % self.mx, (-y * ninv) % self.my

    def divide_by_pi(self, x, y, k):
        """Elementwise lift of (x + theta y) / pi^k where k >= 0 varies per entry."""
        x = x.copy()
        y = y.copy()
        if not self.spec.ramified:
            pk = self.p ** k
            return (x // pk) % self.mx, (y // pk) % self.my
        kmax = int(k.max()) if np.size(k) else 0
        for step in range(kmax):
            m = k > step
            x1 = x[m] // self.p
            x[m], y[m] = (y[m] - self.s * x1 * self.u_inv) % self.mx, (x1 * self.u_inv) % self.my
        return x, y


def _vp_array(v, p, cap):
    out = np.zeros(v.shape, dtype=np.int64)
    w = v.copy()
    live = w != 0
    out[~live] = cap
    for _ in range(cap):
        div = live & (w % p == 0)
        if not div.any():
            break
        out[div] += 1
        w[div] //= p
        live = div
    return out


def batch_elementary_divisors(spec, X, Y, a):
    """Clamped elementary divisors for a batch of square matrices.

    ``X``, ``Y`` are digit arrays of shape (B, n, n) at truncation ``spec.M``.
    Returns an int array (B, n) sorted in decreasing order.  Pivoting matches
    :func:`elementary_divisors` (first minimal entry in row-major order).
    """
    if a > spec.M:
        raise ClampError(f"clamp {a} exceeds truncation {spec.M}")
    sp = spec.with_truncation(a)
    br = BatchRing(sp)
    X = X % sp.mod_x
    Y = Y % sp.mod_y
    B, n, _ = X.shape
    out = np.full((B, n), a, dtype=np.int64)
    ar = np.arange(B)
    for k in range(n):
        sub_x = X[:, k:, k:]
        sub_y = Y[:, k:, k:]
        vals = br.valuation(sub_x, sub_y).reshape(B, -1)
        flat = np.argmin(vals, axis=1)
        v = vals[ar, flat]
        out[:, k] = v
        m = n - k
        i = flat // m + k
        j = flat % m + k
        # row swap k <-> i, column swap k <-> j
        for arr in (X, Y):
            rk = arr[ar, k, :].copy()
            arr[ar, k, :] = arr[ar, i, :]
            arr[ar, i, :] = rk
            ck = arr[ar, :, k].copy()
            arr[ar, :, k] = arr[ar, :, j]
            arr[ar, :, j] = ck
        if k == n - 1:
            break
        live = v < a
        vv = np.where(live, v, 0)
        ux, uy = br.divide_by_pi(X[:, k, k], Y[:, k, k], vv)
        uix, uiy = br.invert_unit(np.where(live, ux, 1), np.where(live, uy, 0))
        cx, cy = br.divide_by_pi(X[:, k + 1:, k], Y[:, k + 1:, k], np.repeat(vv[:, None], n - k - 1, axis=1))
        cx, cy = br.mul(cx, cy, uix[:, None], uiy[:, None])
        cx = np.where(live[:, None], cx, 0)
        cy = np.where(live[:, None], cy, 0)
        px, py = X[:, k:k + 1, k + 1:], Y[:, k:k + 1, k + 1:]
        tx, ty = br.mul(cx[:, :, None], cy[:, :, None], px, py)
        X[:, k + 1:, k + 1:] = (X[:, k + 1:, k + 1:] - tx) % br.mx
        Y[:, k + 1:, k + 1:] = (Y[:, k + 1:, k + 1:] - ty) % br.my
    # once the minimum reaches the clamp every later divisor is clamped too
    out = np.minimum(np.maximum.accumulate(out, axis=1), a)
    return -np.sort(-out, axis=1)


def divisors_to_partition(row, a):
    return Partition.clamped([int(x) for x in row if x], a)


# ----------------------------------------------------------------------------
# counting homomorphisms between module types


def count_hom(lam, mu, q):
    return q ** sum(min(x, y) for x in lam for y in mu)


def count_automorphisms(mu, q):
    """|Aut_O(G_mu)| for residue field size q.

    Hillar-Rhea style product over parts e_1 <= ... <= e_r written in q.
    """
    e = sorted(mu.parts)
    r = len(e)
    if r == 0:
        return 1
    total = 1
    for k in range(1, r + 1):
        d_k = max(l for l in range(1, r + 1) if e[l - 1] == e[k - 1])
        c_k = min(l for l in range(1, r + 1) if e[l - 1] == e[k - 1])
        total *= q**d_k - q ** (k - 1)
        total *= q ** (e[k - 1] * (r - d_k))
        total *= q ** ((e[k - 1] - 1) * (r - c_k + 1))
    return total


def count_submodules(mu, lam, q):
    """Number of submodules of type ``mu`` in G_lam (exact rational evaluation)."""
    if not dominated_by(mu, lam):
        return 0
    length = len(lam.conj_list()) + 1
    mc = mu.conj_list(length)
    lc = lam.conj_list(length)
    total = Fraction(1)
    for j in range(length - 1):
        total *= Fraction(q) ** (mc[j] * lc[j] - mc[j] ** 2)
        for k in range(1, mc[j] - mc[j + 1] + 1):
            total *= (1 - Fraction(q) ** (-lc[j] + mc[j] - k)) / (1 - Fraction(q) ** (-k))
    if total.denominator != 1:
        raise ArithmeticError(f"non-integral submodule count {total} for {mu} in {lam}")
    return int(total)


def count_surjections(lam, mu, q):
    """|Sur_O(G_lam, G_mu)|: submodules of cotype mu times |Aut(G_mu)|.

    Finite modules over a DVR are self-dual, so submodules of cotype mu are
    as numerous as submodules of type mu.
    """
    if not mu.parts:
        return 1
    return count_submodules(mu.unclamped(), lam.unclamped(), q) * count_automorphisms(mu, q)


def count_surjections_from_clamped(lam, mu, q):
    """Surjections from a module whose a-truncation has type ``lam`` onto G_mu.

    Valid when mu_1 <= clamp of lam, since Sur(M, G) = Sur(M (x) O/pi^a, G)
    once pi^a G = 0.
    """
    if lam.clamp is not None and mu.parts and mu.parts[0] > lam.clamp:
        raise ClampError(f"target {mu} needs clamp >= {mu.parts[0]}, have {lam.clamp}")
    return count_surjections(lam, mu, q)


def module_order(mu, q):
    return prod(q**x for x in mu.parts)
