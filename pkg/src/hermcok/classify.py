"""Hermitian congruence: diagonal (unramified) or block-diagonal (ramified) forms.

``classify`` returns a unimodular Y and a canonical form F with
Y A sigma(Y)^t = F exactly at the working truncation.  Every elimination
multiplier is a quotient by a pivot that has been split as pi^v * unit, so
nothing is lost to truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cokernel import cokernel_type, elementary_divisors
from .ring import RingElem, divide_by_pi, invert_unit, sigma, val_or, valuation
from .sampler import HermitianMatrix


class ClassificationError(ValueError):
    pass


@dataclass
class CanonicalForm:
    """Ordered cells along the diagonal.

    Each cell is ``("diag", u, d)`` for the entry u*p^d with u a unit of Z_p,
    ``("block", a, b, c)`` for the 2x2 cell [[a, c], [sigma(c), b]], or
    ``("zero",)`` for a zero 1x1 cell.
    """

    spec: object
    cells: list = field(default_factory=list)

    @property
    def kind_tag(self):
        return "Ramified" if self.spec.ramified else "Unramified"

    @property
    def diagonal_cells(self):
        return [(c[1], c[2]) for c in self.cells if c[0] == "diag"]

    @property
    def blocks(self):
        return [(c[1], c[2], c[3]) for c in self.cells if c[0] == "block"]

    @property
    def zero_rank(self):
        return sum(1 for c in self.cells if c[0] == "zero")

    @property
    def n(self):
        return sum(2 if c[0] == "block" else 1 for c in self.cells)

    def materialize(self):
        sp = self.spec
        n = self.n
        rows = [[sp.zero] * n for _ in range(n)]
        k = 0
        for cell in self.cells:
            if cell[0] == "diag":
                rows[k][k] = cell[1] * (sp.p ** cell[2])
                k += 1
            elif cell[0] == "zero":
                k += 1
            else:
                _, a, b, c = cell
                rows[k][k], rows[k][k + 1] = a, c
                rows[k + 1][k], rows[k + 1][k + 1] = sigma(c), b
                k += 2
        return HermitianMatrix(sp, n, rows)

    def cell_valuations(self):
        """pi-adic valuation contributed by each nonzero cell to det."""
        sp = self.spec
        out = []
        for cell in self.cells:
            if cell[0] == "diag":
                out.append(cell[2] * (2 if sp.ramified else 1))
            elif cell[0] == "block":
                out.append(2 * valuation(cell[3]))
        return out

    def block_conditions_hold(self):
        """c != 0, a/c and b/(pi c) integral, a and b in Z_p."""
        for a, b, c in self.blocks:
            vc = valuation(c)
            if vc is None or a.y or b.y:
                return False
            if val_or(a, self.spec.M) < vc or val_or(b, self.spec.M) < vc + 1:
                return False
        return True

    def to_json(self):
        cells = []
        for cell in self.cells:
            if cell[0] == "diag":
                cells.append({"diag": {"unit": cell[1].to_json(), "exponent": cell[2]}})
            elif cell[0] == "zero":
                cells.append({"zero": 1})
            else:
                cells.append({"block": {"a": cell[1].to_json(), "b": cell[2].to_json(), "c": cell[3].to_json()}})
        return {"kind": self.kind_tag, "cells": cells}


def _matmul(A, B):
    n, m, k = len(A), len(B), len(B[0])
    sp = A[0][0].spec
    out = [[sp.zero] * k for _ in range(n)]
    for i in range(n):
        for t in range(m):
            a = A[i][t]
            if a:
                row = B[t]
                o = out[i]
                for j in range(k):
                    if row[j]:
                        o[j] = o[j] + a * row[j]
    return out


def _conj_transpose(A):
    return [[sigma(A[j][i]) for j in range(len(A))] for i in range(len(A[0]))]


def congruence(Y, A):
    """Y A sigma(Y)^t."""
    return _matmul(_matmul(Y, A), _conj_transpose(Y))


def _identity(sp, n):
    return [[sp.one if i == j else sp.zero for j in range(n)] for i in range(n)]


class _Work:
    def __init__(self, A):
        self.sp = A.spec
        self.n = A.n
        self.B = A.rows()
        self.Y = _identity(self.sp, self.n)

    def swap(self, i, j):
        if i == j:
            return
        B, Y = self.B, self.Y
        B[i], B[j] = B[j], B[i]
        for row in B:
            row[i], row[j] = row[j], row[i]
        Y[i], Y[j] = Y[j], Y[i]

    def row_op(self, E_rows):
        """Apply B <- E B sigma(E)^t and Y <- E Y, where E = I + sum of given entries.

        ``E_rows`` maps a target row r to a dict {source column: coefficient}.
        Source rows must not be targets themselves.
        """
        sp = self.sp
        n = self.n
        E = _identity(sp, n)
        for r, coeffs in E_rows.items():
            for col, c in coeffs.items():
                E[r][col] = E[r][col] + c
        self.B = congruence(E, self.B)
        self.Y = _matmul(E, self.Y)


def _min_entry(B, k):
    best = None
    n = len(B)
    for i in range(k, n):
        for j in range(i, n):
            v = valuation(B[i][j])
            if v is not None and (best is None or v < best[0] or (v == best[0] and i == j and best[1] != best[2])):
                best = (v, i, j)
    return best


def _diag_unit(x, v, sp):
    """Split a diagonal entry of valuation v as u * p^d with u in Z_p."""
    d = v // 2 if sp.ramified else v
    u = sp.elem(x.x // sp.p**d, 0)
    return u, d


def classify(A):
    """Return (Y, form) with Y A sigma(Y)^t equal to ``form.materialize()``."""
    if not isinstance(A, HermitianMatrix):
        raise TypeError("classify expects a HermitianMatrix")
    sp = A.spec
    w = _Work(A)
    n = w.n
    cells = []
    k = 0
    repairs = [sp.one, sp.theta, sp.one + sp.theta]
    while k < n:
        best = _min_entry(w.B, k)
        if best is None:
            cells.extend([("zero",)] * (n - k))
            break
        v, i, j = best
        if i != j:
            # try to move the minimal valuation onto the diagonal: row_i += c * row_j
            for c in repairs:
                B = w.B
                cand = B[i][i] + c * B[j][i] + sigma(c * B[j][i]) + c * sigma(c) * B[j][j]
                if valuation(cand) == v:
                    w.row_op({i: {j: c}})
                    j = i
                    break
        if i == j:
            w.swap(k, i)
            B = w.B
            piv = B[k][k]
            uinv = invert_unit(divide_by_pi(piv, v))
            ops = {}
            for r in range(k + 1, n):
                if B[r][k]:
                    ops[r] = {k: -(divide_by_pi(B[r][k], v) * uinv)}
            if ops:
                w.row_op(ops)
            piv = w.B[k][k]
            if piv.y:
                raise ClassificationError(f"diagonal pivot {piv} is not in Z_p")
            u, d = _diag_unit(piv, v, sp)
            cells.append(("diag", u, d))
            k += 1
            continue
        if not sp.ramified:
            raise ClassificationError(f"diagonal repair failed at valuation {v}")
        if k + 1 >= n:
            raise ClassificationError("2x2 block needed but only one index left")
        # 2x2 pivot on indices (i, j): move them to (k, k+1)
        w.swap(k, i)
        w.swap(k + 1, j if j != k else i)
        B = w.B
        P = [[divide_by_pi(B[k + a][k + b], v) for b in range(2)] for a in range(2)]
        det = P[0][0] * P[1][1] - P[0][1] * P[1][0]
        dinv = invert_unit(det)
        Pinv = [[P[1][1] * dinv, -(P[0][1] * dinv)], [-(P[1][0] * dinv), P[0][0] * dinv]]
        ops = {}
        for r in range(k + 2, n):
            if B[r][k] or B[r][k + 1]:
                D = [divide_by_pi(B[r][k], v), divide_by_pi(B[r][k + 1], v)]
                L = [D[0] * Pinv[0][0] + D[1] * Pinv[1][0], D[0] * Pinv[0][1] + D[1] * Pinv[1][1]]
                ops[r] = {k: -L[0], k + 1: -L[1]}
        if ops:
            w.row_op(ops)
        B = w.B
        cells.append(("block", B[k][k], B[k + 1][k + 1], B[k][k + 1]))
        k += 2
    form = CanonicalForm(sp, cells)
    return w.Y, form


def is_unimodular(Y):
    sp = Y[0][0].spec
    return cokernel_type(Y, 1).rank == 0 if sp.M >= 1 else True


def verify_congruence(A, Y, form):
    """True iff Y is unimodular and Y A sigma(Y)^t equals the form exactly."""
    rows = A.rows() if hasattr(A, "rows") else A
    if len(Y) != len(rows) or form.n != len(rows):
        return False
    if not is_unimodular(Y):
        return False
    return congruence(Y, rows) == form.materialize().rows()


def block_cokernels_match(form, a):
    """Each block with pi^e || c has cokernel type (e, e) at clamp a."""
    for ab, bb, c in form.blocks:
        e = valuation(c)
        div = elementary_divisors([[ab, c], [sigma(c), bb]], a)
        if sorted(div) != [min(e, a)] * 2:
            return False
    return True


def matrix_from_json(obj, spec):
    return HermitianMatrix.from_json(obj, spec)


def form_from_json(obj, spec):
    cells = []
    for cell in obj["cells"]:
        if "diag" in cell:
            cells.append(("diag", RingElem.from_json(cell["diag"]["unit"], spec), int(cell["diag"]["exponent"])))
        elif "zero" in cell:
            cells.append(("zero",))
        else:
            b = cell["block"]
            cells.append(("block",) + tuple(RingElem.from_json(b[x], spec) for x in "abc"))
    return CanonicalForm(spec, cells)
