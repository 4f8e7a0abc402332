"""Truncated rings of integers of quadratic extensions of Q_p.

Every element of O/pi^M is stored as two p-adic digits ``x + theta*y`` where
``theta`` satisfies ``theta^2 = s*theta + t``.  For the unramified extension
``theta`` is a lift of a generator of F_{p^2} and pi = p; for the ramified
extensions ``theta`` is itself the uniformizer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class Kind(enum.Enum):
    UNRAMIFIED = "unram"
    RAMIFIED_ODD = "ram-odd"
    RAMIFIED2_I = "ram2-i"
    RAMIFIED2_II = "ram2-ii"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for kind in cls:
            if value in (kind.value, kind.name, kind.name.lower()):
                return kind
        raise ValueError(f"unknown extension kind {value!r}")


class SpecError(ValueError):
    pass


class SpecMismatch(ValueError):
    pass


class NotAUnit(ZeroDivisionError):
    pass


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def v_p(n, p, cap):
    """p-adic valuation of the integer ``n``, capped at ``cap`` (used for zero)."""
    if n == 0:
        return cap
    v = 0
    while n % p == 0 and v < cap:
        n //= p
        v += 1
    return v


def _smallest_nonresidue(p):
    squares = {(i * i) % p for i in range(1, p)}
    return next(r for r in range(1, p) if r not in squares)


@dataclass(frozen=True)
class ExtensionSpec:
    """Ambient ring O/pi^M for one quadratic extension of Q_p."""

    p: int
    kind: Kind
    unit_param: int
    s: int
    t: int
    M: int

    @property
    def ramified(self):
        return self.kind is not Kind.UNRAMIFIED

    @property
    def type_ii(self):
        return self.kind is Kind.RAMIFIED2_II

    @property
    def m_x(self):
        return (self.M + 1) // 2 if self.ramified else self.M

    @property
    def m_y(self):
        return self.M // 2 if self.ramified else self.M

    @property
    def q(self):
        return self.p if self.ramified else self.p * self.p

    @property
    def mod_x(self):
        return self.p ** self.m_x

    @property
    def mod_y(self):
        return self.p ** self.m_y

    @property
    def size(self):
        return self.mod_x * self.mod_y

    @property
    def trace_modulus(self):
        """Modulus of the integer returned by :func:`trace_map`."""
        if not self.ramified:
            return self.p ** self.M
        if self.type_ii:
            return self.mod_y
        return self.mod_x

    def with_truncation(self, M):
        return make_spec(self.p, self.kind, self.unit_param, M)

    def key(self):
        return (self.p, self.kind.value, self.unit_param, self.M)

    def describe(self):
        return f"({self.p},{self.kind.value},{self.M})"

    # element constructors
    def elem(self, x=0, y=0):
        return RingElem(x % self.mod_x, y % self.mod_y, self)

    @property
    def zero(self):
        return self.elem(0, 0)

    @property
    def one(self):
        return self.elem(1, 0)

    @property
    def theta(self):
        return self.elem(0, 1)

    @property
    def pi(self):
        """The uniformizer: p when unramified, theta otherwise."""
        return self.elem(self.p, 0) if not self.ramified else self.theta

    def elements(self):
        for y in range(self.mod_y):
            for x in range(self.mod_x):
                yield RingElem(x, y, self)

    def random_elem(self, rng):
        return RingElem(int(rng.integers(self.mod_x)), int(rng.integers(self.mod_y)), self)

    @cached_property
    def _u_inv(self):
        # inverse of t/p modulo p^{m_x}, used when dividing by theta
        return pow(self.t // self.p, -1, self.mod_x) if self.ramified else None

    @cached_property
    def tables(self):
        return RingTables(self)


def make_spec(p, kind, unit_param=None, M=1):
    """Validate parameters and fix the defining relation theta^2 = s*theta + t."""
    kind = Kind.parse(kind)
    if not is_prime(p):
        raise SpecError(f"{p} is not prime")
    if M < 1:
        raise SpecError("truncation M must be >= 1")
    if kind is Kind.UNRAMIFIED:
        if p == 2:
            s, t = -1, 1
        else:
            s, t = 0, _smallest_nonresidue(p)
        # x^2 - s x - t must have no root mod p
        if any((r * r - s * r - t) % p == 0 for r in range(p)):
            raise SpecError("reducible quadratic for the unramified extension")
        return ExtensionSpec(p, kind, 0 if unit_param is None else unit_param, s, t, M)
    u = 1 if unit_param is None else unit_param
    if u % p == 0:
        raise SpecError(f"unit parameter {u} is divisible by {p}")
    if kind is Kind.RAMIFIED_ODD:
        if p == 2:
            raise SpecError("RamifiedOdd requires an odd prime")
        return ExtensionSpec(p, kind, u, 0, p * u, M)
    if p != 2:
        raise SpecError(f"{kind.name} requires p = 2")
    if kind is Kind.RAMIFIED2_I:
        return ExtensionSpec(p, kind, u, 0, 2 * u, M)
    return ExtensionSpec(p, kind, u, 2, 2 * u, M)


@dataclass(frozen=True, slots=True)
class RingElem:
    x: int
    y: int
    spec: ExtensionSpec = field(repr=False, compare=True)

    def _check(self, other):
        if not isinstance(other, RingElem):
            return self.spec.elem(other, 0)
        if other.spec != self.spec:
            raise SpecMismatch(f"{self.spec.describe()} vs {other.spec.describe()}")
        return other

    def __add__(self, other):
        other = self._check(other)
        sp = self.spec
        return RingElem((self.x + other.x) % sp.mod_x, (self.y + other.y) % sp.mod_y, sp)

    __radd__ = __add__

    def __neg__(self):
        sp = self.spec
        return RingElem(-self.x % sp.mod_x, -self.y % sp.mod_y, sp)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        sp = self.spec
        x1, y1, x2, y2 = self.x, self.y, other.x, other.y
        return RingElem(
            (x1 * x2 + sp.t * y1 * y2) % sp.mod_x,
            (x1 * y2 + x2 * y1 + sp.s * y1 * y2) % sp.mod_y,
            sp,
        )

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.x or self.y)

    def __str__(self):
        sp = self.spec
        return f"{self.x}+θ*{self.y} mod {sp.describe()}"

    def to_json(self):
        return {"x": self.x, "y": self.y}

    @classmethod
    def from_json(cls, obj, spec):
        return spec.elem(int(obj["x"]), int(obj["y"]))

    def reduce(self, spec):
        """Image under O/pi^M -> O/pi^M' for M' <= M."""
        if (spec.p, spec.kind, spec.s, spec.t) != (self.spec.p, self.spec.kind, self.spec.s, self.spec.t):
            raise SpecMismatch("reduction between different extensions")
        if spec.M > self.spec.M:
            raise SpecMismatch("cannot reduce to a finer truncation")
        return RingElem(self.x % spec.mod_x, self.y % spec.mod_y, spec)

    def lift(self, spec):
        """Digit-wise representative in a finer truncation (a section of reduction)."""
        return RingElem(self.x, self.y, spec)


def add(a, b):
    return a + b


def neg(a):
    return -a


def mul(a, b):
    return a * b


def sigma(a):
    """Galois conjugate: sigma(x + theta*y) = (x + s*y) - theta*y."""
    sp = a.spec
    return RingElem((a.x + sp.s * a.y) % sp.mod_x, -a.y % sp.mod_y, sp)


def norm(a):
    """a*sigma(a) = x^2 + s*x*y - t*y^2, an integer mod p^{m_x}."""
    sp = a.spec
    return (a.x * a.x + sp.s * a.x * a.y - sp.t * a.y * a.y) % sp.mod_x


def valuation(a):
    """pi-adic valuation, or None when a = 0 in O/pi^M (meaning ">= M")."""
    sp = a.spec
    if not a.x and not a.y:
        return None
    if not sp.ramified:
        return min(v_p(a.x, sp.p, sp.M), v_p(a.y, sp.p, sp.M))
    inf = 2 * sp.M + 2
    vx = 2 * v_p(a.x, sp.p, sp.m_x) if a.x else inf
    vy = 1 + 2 * v_p(a.y, sp.p, sp.m_y) if a.y else inf
    return min(vx, vy)


def val_or(a, default):
    v = valuation(a)
    return default if v is None else v


def invert_unit(a):
    sp = a.spec
    nm = norm(a)
    if nm % sp.p == 0:
        raise NotAUnit(f"{a} is not a unit")
    inv = pow(nm, -1, sp.mod_x)
    c = sigma(a)
    return RingElem(c.x * inv % sp.mod_x, c.y * inv % sp.mod_y, sp)


def divide_by_pi(a, k=1):
    """Some b with pi^k * b = a; requires valuation(a) >= k.

    The quotient is only determined modulo pi^{M-k}; a digit-wise lift is
    returned, which is all that exact elimination needs.
    """
    sp = a.spec
    v = valuation(a)
    if v is not None and v < k:
        raise ValueError(f"{a} is not divisible by pi^{k}")
    if not sp.ramified:
        pk = sp.p ** k
        return RingElem(a.x // pk % sp.mod_x, a.y // pk % sp.mod_y, sp)
    x, y = a.x, a.y
    for _ in range(k):
        x1 = x // sp.p
        x, y = (y - sp.s * x1 * sp._u_inv) % sp.mod_x, (x1 * sp._u_inv) % sp.mod_y
    return RingElem(x, y, sp)


def pi_power(spec, k):
    r = spec.one
    for _ in range(k):
        r = r * spec.pi
    return r


def trace_map(a):
    """Tr(a) = a + sigma(a) (unramified) or the map T of the ramified case, as an int."""
    sp = a.spec
    if not sp.ramified:
        return (2 * a.x + sp.s * a.y) % sp.trace_modulus
    if sp.type_ii:
        return (a.x + a.y) % sp.trace_modulus
    return a.x % sp.trace_modulus


def is_sigma_fixed(a):
    return sigma(a) == a


class RingTables:
    """Elements of a small truncated ring encoded as ints ``x + mod_x*y``.

    Lookup tables make vectorized brute force over modules and pairings
    practical.  Only meant for rings with a few hundred elements.
    """

    def __init__(self, spec):
        if spec.size > 4096:
            raise ValueError("ring too large for lookup tables")
        self.spec = spec
        n = spec.size
        self.elems = list(spec.elements())
        xs = np.array([e.x for e in self.elems], dtype=np.int64)
        ys = np.array([e.y for e in self.elems], dtype=np.int64)
        mx, my = spec.mod_x, spec.mod_y
        self.add = ((xs[:, None] + xs[None, :]) % mx + mx * ((ys[:, None] + ys[None, :]) % my)).astype(np.int32)
        px = (xs[:, None] * xs[None, :] + spec.t * ys[:, None] * ys[None, :]) % mx
        py = (xs[:, None] * ys[None, :] + xs[None, :] * ys[:, None] + spec.s * ys[:, None] * ys[None, :]) % my
        self.mul = (px + mx * py).astype(np.int32)
        self.neg = ((-xs) % mx + mx * ((-ys) % my)).astype(np.int32)
        self.sigma = ((xs + spec.s * ys) % mx + mx * ((-ys) % my)).astype(np.int32)
        self.val = np.array([spec.M if valuation(e) is None else valuation(e) for e in self.elems], dtype=np.int32)
        self.size = n

    def encode(self, a):
        return a.x + self.spec.mod_x * a.y

    def decode(self, i):
        return self.elems[int(i)]
