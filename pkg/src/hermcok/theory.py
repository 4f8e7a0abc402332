"""Closed-form predictions: cokernel probabilities, moments, invertible counts.

All products are evaluated with :class:`fractions.Fraction`; floats appear
only when a limiting (infinite) product has to be truncated, and then the
truncation error is carried along as an explicit bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cokernel import count_automorphisms
from .oracles import BudgetExceeded, cached_pairing_data, count_perfect_hermitian_pairings
from .partitions import Partition


class PairingDataUnavailable(RuntimeError):
    pass


def moment_closed_form(mu, spec):
    """E #Sur(cok X, G_mu) in the limit."""
    p = spec.p
    parts = mu.parts
    if not spec.ramified:
        return p ** sum((2 * i - 1) * x for i, x in enumerate(parts, 1))
    return p ** sum((i - 1) * x + x // 2 for i, x in enumerate(parts, 1))


def _unram_factor(p, i):
    return 1 + Fraction((-1) ** i, p**i)


def _ram_factor(p, i):
    return 1 - Fraction(1, p ** (2 * i - 1))


def count_invertible_hermitian(n, p):
    """Invertible matrices in H_n(F_{p^2})."""
    val = Fraction(p ** (n * n))
    for i in range(1, n + 1):
        val *= _unram_factor(p, i)
    if val.denominator != 1:
        raise ArithmeticError(f"non-integral Hermitian count {val}")
    return int(val)


def count_invertible_symmetric(n, p):
    """Invertible symmetric n x n matrices over F_p."""
    val = Fraction(p ** (n * (n + 1) // 2))
    for i in range(1, (n + 1) // 2 + 1):
        val *= _ram_factor(p, i)
    if val.denominator != 1:
        raise ArithmeticError(f"non-integral symmetric count {val}")
    return int(val)


def gaussian_binomial(n, k, q):
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


@dataclass(frozen=True)
class Approx:
    """A real value with an absolute error bound (0 for exact values)."""

    value: float
    error: float = 0.0
    exact: Fraction | None = None

    def to_json(self):
        out = {"value": self.value, "error": self.error}
        if self.exact is not None:
            out["exact"] = f"{self.exact.numerator}/{self.exact.denominator}"
        return out


@dataclass
class TheoryContext:
    spec: object
    tail_terms: int = 40
    pairing_count_source: str = "oracle"  # or "cached"
    budget: int = 2**22
    _mass: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.tail_terms < 20:
            raise ValueError("tail_terms must be at least 20")
        if self.pairing_count_source not in ("oracle", "cached"):
            raise ValueError(f"unknown pairing count source {self.pairing_count_source!r}")

    @property
    def p(self):
        return self.spec.p

    @property
    def ramified(self):
        return self.spec.ramified

    @property
    def q(self):
        return self.spec.q

    def pairing_count(self, gamma):
        """|Phi_Gamma| from the brute-force oracle."""
        gamma = gamma.unclamped()
        if not gamma.parts:
            return 1
        try:
            if self.pairing_count_source == "cached":
                return cached_pairing_data(gamma, self.spec, self.budget)["perfect"]
            return count_perfect_hermitian_pairings(gamma, self.spec, self.budget)
        except BudgetExceeded as exc:
            raise PairingDataUnavailable(f"|Phi| for {gamma}: {exc}") from exc

    def mass(self, gamma):
        """|Phi_Gamma| / |Aut(Gamma)|, i.e. the sum of 1/|Aut(Gamma, delta)| over classes."""
        gamma = gamma.unclamped()
        if gamma not in self._mass:
            self._mass[gamma] = Fraction(self.pairing_count(gamma), count_automorphisms(gamma, self.q))
        return self._mass[gamma]


def residual_product(ctx, k):
    """P_k: the second product of the finite-n formula for corank-free dimension k."""
    val = Fraction(1)
    if not ctx.ramified:
        for i in range(1, k + 1):
            val *= _unram_factor(ctx.p, i)
    else:
        for i in range(1, (k + 1) // 2 + 1):
            val *= _ram_factor(ctx.p, i)
    return val


def infinite_product(ctx):
    """The limit constant c_inf with a rigorous truncation error bound."""
    p, T = ctx.p, ctx.tail_terms
    val = Fraction(1)
    if not ctx.ramified:
        for i in range(1, T + 1):
            val *= _unram_factor(p, i)
        tail = 1.0 / (p**T * (p - 1))
    else:
        for i in range(1, T + 1):
            val *= _ram_factor(p, i)
        tail = p ** (1 - 2 * (T + 1)) / (1 - p**-2)
    # every omitted factor is 1 + x with |x| <= 1/2, so |log(1 + x)| <= 2|x|
    partial = float(val)
    err = partial * math.expm1(2 * tail)
    return Approx(partial, err, None)


def finite_n_haar_probability(gamma, n, ctx):
    """P(cok X_n = Gamma) for Haar random X_n in H_n(O), exactly."""
    gamma = gamma.unclamped()
    r = gamma.rank
    if n < r:
        return Fraction(0)
    first = Fraction(1)
    for j in range(n - r + 1, n + 1):
        first *= 1 - Fraction(1, ctx.p ** (j if ctx.ramified else 2 * j))
    return ctx.mass(gamma) * first * residual_product(ctx, n - r)


def limiting_probability(gamma, ctx):
    c = infinite_product(ctx)
    m = ctx.mass(gamma)
    return Approx(float(m) * c.value, float(m) * c.error, None)


# ----------------------------------------------------------------------------
# probabilities of clamped classes


def corank_probability(k, n, ctx):
    """P(rank of X mod pi is n - k) for Haar X in H_n(O), exactly."""
    if k < 0 or k > n:
        return Fraction(0)
    if not ctx.ramified:
        total = ctx.p ** (n * n)
        good = gaussian_binomial(n, k, ctx.p**2) * count_invertible_hermitian(n - k, ctx.p)
    else:
        total = ctx.p ** (n * (n + 1) // 2)
        good = gaussian_binomial(n, k, ctx.p) * count_invertible_symmetric(n - k, ctx.p)
    return Fraction(good, total)


def corank_limit(k, ctx):
    """lim_n P(corank k), from the finite-n counts."""
    c = infinite_product(ctx)
    p = ctx.p
    if not ctx.ramified:
        f = Fraction(1, p ** (k * k))
        for i in range(1, k + 1):
            f /= 1 - Fraction(1, p ** (2 * i))
    else:
        f = Fraction(1, p ** (k * (k + 1) // 2))
        for i in range(1, k + 1):
            f /= 1 - Fraction(1, p**i)
    return Approx(float(f) * c.value, float(f) * c.error, None)


def class_probability(cls, n, ctx):
    """Theory value for the clamped class ``cls`` (a Partition with clamp a).

    n = None asks for the limit.  Returns an :class:`Approx`, or None when the
    class merges infinitely many module types (a part equals the clamp and
    a > 1), which only an infinite sum over pairing data would resolve, or
    when the pairing oracle is over budget for it.
    """
    a = cls.clamp
    if a == 1:
        k = cls.rank
        if n is None:
            return corank_limit(k, ctx)
        v = corank_probability(k, n, ctx)
        return Approx(float(v), 0.0, v)
    if not cls.exact():
        return None
    gamma = cls.unclamped()
    try:
        if n is None:
            return limiting_probability(gamma, ctx)
        v = finite_n_haar_probability(gamma, n, ctx)
    except PairingDataUnavailable:
        return None
    return Approx(float(v), 0.0, v)


def exact_classes(a, max_rank, max_size=None):
    """Clamped classes at level a whose parts are all below a (so the type is exact)."""
    from .partitions import partitions_in_box

    if a == 1:
        return [Partition.clamped((1,) * k, 1) for k in range(max_rank + 1)]
    out = []
    for g in partitions_in_box(a - 1, max_rank):
        if max_size is None or g.size <= max_size:
            out.append(Partition(g.parts, a))
    return out


def theory_table(ctx, gammas, n=None):
    """Rows for the ``theory`` command: pairing data, finite-n value, limit and tail error."""
    rows = []
    for g in gammas:
        g = g.unclamped()
        row = {"gamma": str(g), "rank": g.rank}
        try:
            row["phi"] = ctx.pairing_count(g)
            row["aut"] = count_automorphisms(g, ctx.q)
            lim = limiting_probability(g, ctx)
            row["limit"] = lim.value
            row["tail_error"] = lim.error
            if n is not None:
                v = finite_n_haar_probability(g, n, ctx)
                row["finite_n"] = float(v)
                row["finite_n_exact"] = f"{v.numerator}/{v.denominator}"
        except PairingDataUnavailable as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows
