"""Brute-force ground truth for the counts used by the closed forms.

Everything here enumerates.  Budgets are explicit and exceeding one raises
:class:`BudgetExceeded`; nothing silently falls back to sampling.
"""

from __future__ import annotations

import itertools
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cokernel import batch_elementary_divisors
from .partitions import Partition
from .ring import Kind, invert_unit, make_spec, sigma, trace_map, val_or, valuation


class BudgetExceeded(RuntimeError):
    pass


def _check_budget(what, needed, budget):
    if needed > budget:
        raise BudgetExceeded(f"{what}: needs {needed} > budget {budget}")


# ----------------------------------------------------------------------------
# invertible matrices over the residue field


def _field_spec(p, shape):
    if shape == "hermitian":
        return make_spec(p, Kind.UNRAMIFIED, None, 1)
    if shape == "symmetric":
        # O/pi for a ramified O is F_p with trivial conjugation
        return make_spec(p, Kind.RAMIFIED_ODD if p > 2 else Kind.RAMIFIED2_I, None, 1)
    raise ValueError(f"unknown matrix shape {shape!r}")


def _field_rank(rows):
    """Rank of a matrix over a finite field given as RingElems at truncation 1."""
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = invert_unit(rows[rank][col])
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                c = rows[r][col] * inv
                rows[r] = [a - c * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def brute_force_invertible_count(n, p, shape="hermitian", budget=2**24):
    """Count invertible n x n Hermitian matrices over F_{p^2} or symmetric ones over F_p."""
    sp = _field_spec(p, shape)
    diag = [e for e in sp.elements() if not e.y]
    off = list(sp.elements())
    total = len(diag) ** n * len(off) ** (n * (n - 1) // 2)
    _check_budget("invertible count", total, budget)
    if n == 0:
        return 1
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    count = 0
    for d in itertools.product(diag, repeat=n):
        for o in itertools.product(off, repeat=len(pairs)):
            A = [[sp.zero] * n for _ in range(n)]
            for i in range(n):
                A[i][i] = d[i]
            for (i, j), v in zip(pairs, o):
                A[i][j] = v
                A[j][i] = sigma(v)
            if _field_rank(A) == n:
                count += 1
    return count


# ----------------------------------------------------------------------------
# modules over a DVR with residue field of size q


def residue_spec(q, M):
    """A truncated DVR O/pi^M whose residue field has q elements."""
    for p in range(2, q + 1):
        if q == p:
            kind = Kind.RAMIFIED_ODD if p > 2 else Kind.RAMIFIED2_I
            return make_spec(p, kind, None, M)
        if q == p * p:
            return make_spec(p, Kind.UNRAMIFIED, None, M)
    raise ValueError(f"q = {q} is not a prime or the square of a prime")


def _valued_reps(spec, k, c):
    """Representatives of pi^c O / pi^k O as elements of ``spec`` (needs k <= spec.M)."""
    sk = spec.with_truncation(k) if k else None
    out = []
    if k == 0:
        return [spec.zero]
    for e in sk.elements():
        v = valuation(e)
        if v is None or v >= c:
            out.append(e.lift(spec))
    return out


def hom_entry_choices(spec, lam, mu):
    """For f in Hom(G_lam, G_mu): choices of f_ji = image of e_i in component j."""
    return [[_valued_reps(spec, mj, max(0, mj - li)) for li in lam.parts] for mj in mu.parts]


class _AddGroup:
    """Additive subgroup closure inside prod O/pi^{mu_j} (tiny cases only)."""

    def __init__(self, spec, mu):
        self.spec = spec
        self.mods = [spec.with_truncation(m) for m in mu.parts]

    def reduce(self, vec):
        return tuple((e.reduce(s).x, e.reduce(s).y) for e, s in zip(vec, self.mods))

    def add(self, u, v):
        return tuple(((a[0] + b[0]) % s.mod_x, (a[1] + b[1]) % s.mod_y) for a, b, s in zip(u, v, self.mods))

    def span_size(self, gens):
        zero = tuple((0, 0) for _ in self.mods)
        seen = {zero}
        frontier = [zero]
        gens = [g for g in gens if g != zero]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.add(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return len(seen)


def brute_force_surjections_direct(lam, mu, q, budget=2**14):
    """|Sur(G_lam, G_mu)| by enumerating every homomorphism and its image."""
    lam, mu = lam.unclamped(), mu.unclamped()
    if not mu.parts:
        return 1
    M = max(lam.parts + mu.parts)
    spec = residue_spec(q, M)
    choices = hom_entry_choices(spec, lam, mu)
    flat = [c for row in choices for c in row]
    total = 1
    for c in flat:
        total *= len(c)
    _check_budget("homomorphism enumeration", total, budget)
    grp = _AddGroup(spec, mu)
    target = q ** mu.size
    r, s = len(lam.parts), len(mu.parts)
    count = 0
    for combo in itertools.product(*flat):
        cols = [[combo[j * r + i] for j in range(s)] for i in range(r)]
        # the O-span of the columns is the Z_p-span of the columns and theta*columns
        gens = []
        for col in cols:
            gens.append(grp.reduce(col))
            gens.append(grp.reduce([spec.theta * e for e in col]))
        if grp.span_size(gens) == target:
            count += 1
    return count


def _field_tables(q):
    sp = residue_spec(q, 1)
    els = list(sp.elements())
    idx = {(e.x, e.y): i for i, e in enumerate(els)}
    add = [[idx[((a + b).x, (a + b).y)] for b in els] for a in els]
    mul = [[idx[((a * b).x, (a * b).y)] for b in els] for a in els]
    return add, mul


def count_full_rank_pattern(allowed, q, method="subspace", budget=10**6):
    """Number of s x r matrices over F_q, zero outside ``allowed``, of rank s.

    ``allowed[j][i]`` says whether row j, column i may be nonzero.
    ``method="subspace"`` runs a dynamic program whose state is the span of
    the columns chosen so far (any pattern).  ``method="nested"`` requires
    each column's allowed rows to form a prefix and tracks only dimensions.
    """
    s = len(allowed)
    r = len(allowed[0]) if s else 0
    if s == 0:
        return 1
    if method == "nested":
        supports = []
        for i in range(r):
            rows = [j for j in range(s) if allowed[j][i]]
            if rows != list(range(len(rows))):
                raise ValueError("pattern is not nested")
            supports.append(len(rows))
        supports.sort()
        # state: dimension of the span, which always sits inside F_q^k for the current k
        dist = {0: 1}
        for k in supports:
            new = {}
            for d, w in dist.items():
                new[d] = new.get(d, 0) + w * q**d
                if d < k:
                    new[d + 1] = new.get(d + 1, 0) + w * (q**k - q**d)
            dist = new
        return dist.get(s, 0)
    add, mul = _field_tables(q)
    nz = range(1, q)

    def vectors(i):
        rows = [j for j in range(s) if allowed[j][i]]
        for vals in itertools.product(range(q), repeat=len(rows)):
            v = [0] * s
            for j, x in zip(rows, vals):
                v[j] = x
            yield tuple(v)

    def extend(span, v):
        out = set(span)
        for c in nz:
            cv = tuple(mul[c][x] for x in v)
            for u in span:
                out.add(tuple(add[a][b] for a, b in zip(u, cv)))
        return frozenset(out)

    zero = tuple([0] * s)
    dist = {frozenset([zero]): 1}
    for i in range(r):
        new = {}
        vecs = list(vectors(i))
        for span, w in dist.items():
            for v in vecs:
                nspan = span if v in span else extend(span, v)
                new[nspan] = new.get(nspan, 0) + w
        dist = new
        _check_budget("span states", len(dist) * q**s, budget)
    full = q**s
    return sum(w for span, w in dist.items() if len(span) == full)


def brute_force_surjections(lam, mu, q, method="subspace", budget=10**6):
    """|Sur(G_lam, G_mu)| via Nakayama: f is onto iff it is onto modulo pi.

    Entry f_ji lies in pi^{c}O/pi^{mu_j}O with c = max(0, mu_j - lam_i).  Its
    residue can be nonzero only when c = 0; the number of lifts of a fixed
    residue is q^{mu_j - 1} in that case, and every choice (q^{lam_i} of them)
    is free otherwise.
    """
    lam, mu = lam.unclamped(), mu.unclamped()
    if not mu.parts:
        return 1
    if len(mu.parts) > len(lam.parts):
        return 0
    # order rows by increasing part so that allowed supports are prefixes
    rows = sorted(mu.parts)
    allowed = [[m <= l for l in lam.parts] for m in rows]
    lifts = 1
    for m in rows:
        for l in lam.parts:
            lifts *= q ** (m - 1) if m <= l else q**l
    return count_full_rank_pattern(allowed, q, method, budget) * lifts


def brute_force_automorphisms(mu, q, method=None, budget=10**6):
    """|Aut(G_mu)|: bijective endomorphisms, i.e. surjective ones.

    ``method`` is "direct" (enumerate every endomorphism), "subspace" or
    "nested" (see :func:`count_full_rank_pattern`); by default the cheapest
    exact method that fits the budget.
    """
    mu = mu.unclamped()
    if method == "direct":
        return brute_force_surjections_direct(mu, mu, q, budget)
    if method is None:
        method = "subspace" if q ** len(mu.parts) <= 64 else "nested"
    return brute_force_surjections(mu, mu, q, method, budget)


def brute_force_hom_count(lam, mu, q, budget=2**14):
    spec = residue_spec(q, max(lam.parts + mu.parts + (1,)))
    total = 1
    for row in hom_entry_choices(spec, lam, mu):
        for c in row:
            total *= len(c)
    _check_budget("hom count", total, budget)
    return total


# ----------------------------------------------------------------------------
# brute-force cokernel


def brute_force_cokernel_type(A, a, budget=2**16):
    """Type of cok(A mod pi^a) from the sizes of pi^k-multiples of the quotient.

    Only for tiny matrices: enumerates the image as an additive subgroup.
    """
    rows = A.rows() if hasattr(A, "rows") else [list(r) for r in A]
    spec = rows[0][0].spec.with_truncation(a)
    n, m = len(rows), len(rows[0])
    _check_budget("cokernel enumeration", spec.size**n, budget)
    B = [[e.reduce(spec) for e in row] for row in rows]
    grp = _AddGroup(spec, Partition((a,) * n))
    cols = [[B[i][j] for i in range(n)] for j in range(m)]
    base = []
    for col in cols:
        base.append(grp.reduce(col))
        base.append(grp.reduce([spec.theta * e for e in col]))
    img = grp.span_size(base)
    sizes = []
    for k in range(a + 1):
        gens = list(base)
        pk = spec.one
        for _ in range(k):
            pk = pk * spec.pi
        for i in range(n):
            for g in (pk, pk * spec.theta):
                v = [spec.zero] * n
                v[i] = g
                gens.append(grp.reduce(v))
        sizes.append(grp.span_size(gens) // img)
    # sizes[k] = |pi^k Q|; the number of parts >= k is log_q |pi^{k-1} Q / pi^k Q|
    q = spec.q
    conj = []
    for k in range(1, a + 1):
        ratio = sizes[k - 1] // sizes[k]
        c = 0
        while ratio > 1:
            ratio //= q
            c += 1
        conj.append(c)
    parts = [sum(1 for c in conj if c > i) for i in range(conj[0] if conj else 0)]
    return Partition.clamped(parts, a)


# ----------------------------------------------------------------------------
# Hermitian pairings on Gamma = prod O/pi^{lam_i}


def pairing_value_spec(gamma, spec):
    """Ring that holds pairing values, identifying p^{-e}O/O with O/p^e.

    Multiplying by p^e (fixed by sigma) keeps the identification compatible
    with conjugation.
    """
    top = gamma.parts[0] if gamma.parts else 1
    if spec.ramified:
        return spec.with_truncation(2 * ((top + 1) // 2))
    return spec.with_truncation(top)


@dataclass(frozen=True)
class PairingTable:
    gamma: Partition
    values: tuple  # r x r tuple of RingElem at the pairing value spec

    def to_json(self):
        return {"gamma": self.gamma.to_json(), "values": [[v.to_json() for v in row] for row in self.values]}


class PairingSpace:
    """All Hermitian pairing tables on Gamma, encoded through RingTables."""

    def __init__(self, gamma, spec, budget=2**22, diagonal="liftable"):
        gamma = gamma.unclamped()
        self.gamma = gamma
        self.r = r = len(gamma.parts)
        self.vspec = vs = pairing_value_spec(gamma, spec)
        self.tab = tab = vs.tables
        M = vs.M
        lam = gamma.parts
        self.cells = [(i, j) for i in range(r) for j in range(i, r)]
        self.choices = []
        for i, j in self.cells:
            need = M - min(lam[i], lam[j])
            ok = tab.val >= need
            if i == j:
                if diagonal == "liftable":
                    # delta(x, x) must lift to a sigma-fixed element of K, i.e. zero theta-digit
                    ok &= np.arange(tab.size) // vs.mod_x == 0
                elif diagonal == "intrinsic":
                    ok &= tab.sigma == np.arange(tab.size)
                else:
                    raise ValueError(f"unknown diagonal rule {diagonal!r}")
            self.choices.append(np.nonzero(ok)[0].astype(np.int32))
        self.num_tables = int(np.prod([len(c) for c in self.choices])) if r else 1
        _check_budget("pairing tables", self.num_tables * max(1, gamma.order(spec.q)), budget)
        # elements of Gamma as lifted representatives
        comps = [np.array([tab.encode(e) for e in _valued_reps(vs, l, 0)], dtype=np.int32) for l in lam]
        self.elements = (
            np.array(list(itertools.product(*comps)), dtype=np.int32).reshape(-1, r) if r else np.zeros((1, 0), np.int32)
        )

    def tables(self, start=0, stop=None):
        """Encoded r x r tables with index in [start, stop)."""
        stop = self.num_tables if stop is None else stop
        idx = np.arange(start, stop, dtype=np.int64)
        out = np.zeros((len(idx), self.r, self.r), dtype=np.int32)
        for (i, j), ch in zip(reversed(self.cells), reversed(self.choices)):
            pick = ch[idx % len(ch)]
            idx //= len(ch)
            out[:, i, j] = pick
            out[:, j, i] = self.tab.sigma[pick]
        return out

    def is_perfect(self, T):
        """Vector of booleans: no nonzero g with sum_j sigma(g_j) v_ij = 0 for all i."""
        tab = self.tab
        if self.r == 0:
            return np.ones(len(T), dtype=bool)
        g = tab.sigma[self.elements[1:]]  # (E, r)
        killed = np.ones((len(T), len(g)), dtype=bool)
        for i in range(self.r):
            acc = np.zeros((len(T), len(g)), dtype=np.int32)
            for j in range(self.r):
                acc = tab.add[acc, tab.mul[g[None, :, j], T[:, i, j][:, None]]]
            killed &= acc == 0
        return ~killed.any(axis=1)

    def perfect_tables(self, chunk=4096):
        out = []
        for start in range(0, self.num_tables, chunk):
            T = self.tables(start, min(self.num_tables, start + chunk))
            out.append(T[self.is_perfect(T)])
        return np.concatenate(out) if out else np.zeros((0, self.r, self.r), np.int32)

    def to_table(self, T):
        return PairingTable(self.gamma, tuple(tuple(self.tab.decode(v) for v in row) for row in T))

    def encode_table(self, table):
        return np.array([[self.tab.encode(v) for v in row] for row in table.values], dtype=np.int32)


def count_perfect_hermitian_pairings(gamma, spec, budget=2**22, diagonal="liftable"):
    """|Phi_Gamma|, the number of perfect Hermitian pairings on Gamma.

    With ``diagonal="liftable"`` the self-pairings delta(x, x) are required
    to lift to sigma-fixed elements of K, which is what pairings coming from
    Hermitian matrices satisfy.  ``"intrinsic"`` only asks that they be
    sigma-fixed in K/O; the two agree except for ramified p = 2.
    """
    if not gamma.parts:
        return 1
    return len(PairingSpace(gamma, spec, budget, diagonal).perfect_tables())


def module_automorphisms(gamma, spec, vspec, budget=2**21):
    """Encoded automorphism matrices f (f[a, i] = component a of f(e_i)) of Gamma."""
    lam = gamma.parts
    r = len(lam)
    tab = vspec.tables
    choices = [
        [np.array([tab.encode(e) for e in _valued_reps(vspec, la, max(0, la - li))], dtype=np.int32) for li in lam]
        for la in lam
    ]
    flat = [c for row in choices for c in row]
    total = int(np.prod([len(c) for c in flat]))
    _check_budget("endomorphism enumeration", total, budget)
    idx = np.arange(total, dtype=np.int64)
    F = np.zeros((total, r, r), dtype=np.int32)
    for k in reversed(range(r * r)):
        ch = flat[k]
        F[:, k // r, k % r] = ch[idx % len(ch)]
        idx //= len(ch)
    # invertible iff invertible modulo pi
    field = vspec.with_truncation(1)
    enc = F.astype(np.int64)
    X = (enc % vspec.mod_x) % field.mod_x
    Y = (enc // vspec.mod_x) % max(field.mod_y, 1)
    div = batch_elementary_divisors(field, X, Y, 1)
    return F[(div == 0).all(axis=1)]


def pullback(F, T, tab):
    """(f^* delta)(e_i, e_j) = sum_{a,b} f_ai sigma(f_bj) delta(e_a, e_b), for a batch of f."""
    N, r, _ = F.shape
    out = np.zeros((N, r, r), dtype=np.int32)
    sF = tab.sigma[F]
    for i in range(r):
        for j in range(r):
            acc = np.zeros(N, dtype=np.int32)
            for a in range(r):
                for b in range(r):
                    acc = tab.add[acc, tab.mul[tab.mul[F[:, a, i], sF[:, b, j]], T[a, b]]]
            out[:, i, j] = acc
    return out


def count_pairing_preserving_automorphisms(gamma, table, spec, budget=2**21):
    """|Aut(Gamma, delta)|."""
    if not gamma.parts:
        return 1
    space = PairingSpace(gamma, spec)
    T = space.encode_table(table)
    F = module_automorphisms(space.gamma, spec, space.vspec, budget)
    img = pullback(F, T, space.tab)
    return int((img == T[None]).all(axis=(1, 2)).sum())


@dataclass
class PairingClass:
    representative: PairingTable
    orbit_size: int
    stabilizer: int


@dataclass
class PairingCensus:
    gamma: Partition
    perfect: int
    automorphisms: int
    classes: list

    def identity_holds(self):
        """sum |Aut| / |Aut(delta)| = |Phi| and orbit * stabilizer = |Aut| for every class."""
        return (
            sum(self.automorphisms // c.stabilizer for c in self.classes) == self.perfect
            and all(c.orbit_size * c.stabilizer == self.automorphisms for c in self.classes)
            and sum(c.orbit_size for c in self.classes) == self.perfect
        )

    def mass(self):
        """sum over classes of 1/|Aut(Gamma, delta)| as a Fraction."""
        from fractions import Fraction

        return sum((Fraction(1, c.stabilizer) for c in self.classes), Fraction(0))

    def to_json(self):
        return {
            "gamma": str(self.gamma),
            "perfect": self.perfect,
            "automorphisms": self.automorphisms,
            "classes": [{"orbit": c.orbit_size, "stabilizer": c.stabilizer} for c in self.classes],
        }


def pairing_census(gamma, spec, budget=2**22, diagonal="liftable"):
    """Split Phi_Gamma into Aut(Gamma)-orbits, recording orbit sizes and stabilizers."""
    gamma = gamma.unclamped()
    if not gamma.parts:
        empty = PairingTable(gamma, ())
        return PairingCensus(gamma, 1, 1, [PairingClass(empty, 1, 1)])
    space = PairingSpace(gamma, spec, budget, diagonal)
    perfect = space.perfect_tables()
    F = module_automorphisms(space.gamma, spec, space.vspec, budget)
    remaining = {t.tobytes(): t for t in perfect}
    classes = []
    while remaining:
        key = min(remaining)
        T = remaining[key]
        img = pullback(F, T, space.tab)
        stab = int((img == T[None]).all(axis=(1, 2)).sum())
        orbit = {x.tobytes() for x in img}
        missing = orbit - remaining.keys()
        if missing:
            raise AssertionError(f"pullback left the set of perfect pairings on {gamma}")
        for k in orbit:
            del remaining[k]
        classes.append(PairingClass(space.to_table(T), len(orbit), stab))
    return PairingCensus(gamma, len(perfect), len(F), classes)


# ----------------------------------------------------------------------------
# persistent cache for pairing counts


def _cache_path():
    root = os.environ.get("HERMCOK_CACHE")
    base = Path(root) if root else Path.home() / ".cache" / "hermcok"
    return base / "pairings.json"


def _load_cache(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError):
        return {}


def _cache_key(gamma, spec):
    return f"{spec.kind.value}|{spec.p}|{spec.unit_param}|{'.'.join(map(str, gamma.parts))}"


def cached_pairing_data(gamma, spec, budget=2**22, use_cache=True):
    """(|Phi_Gamma|, sum 1/|Aut(Gamma,delta)| as 'num/den') with a JSON file cache."""
    gamma = gamma.unclamped()
    path = _cache_path()
    key = _cache_key(gamma, spec)
    if use_cache:
        entry = _load_cache(path).get(key)
        if entry is not None:
            return entry
    census = pairing_census(gamma, spec, budget)
    mass = census.mass()
    entry = {
        "perfect": census.perfect,
        "automorphisms": census.automorphisms,
        "mass": f"{mass.numerator}/{mass.denominator}",
        "classes": len(census.classes),
        "budget": budget,
    }
    if use_cache:
        path.parent.mkdir(parents=True, exist_ok=True)
        data = _load_cache(path)
        data.setdefault(key, entry)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
        os.replace(tmp, path)
        entry = data[key]
    return entry


# ----------------------------------------------------------------------------
# the character-sum indicator for FX = 0


def charsum_spec(spec, gamma):
    """Ring R = O/pi^M and exponent m with pi^{M} G = 0, as used by the identity."""
    top = gamma.parts[0] if gamma.parts else 1
    if not spec.ramified:
        m = top
        return spec.with_truncation(m), m
    if spec.type_ii:
        m = max(1, (top + 1) // 2)
        return spec.with_truncation(2 * m), m
    m = max(2, (top + 2) // 2)
    return spec.with_truncation(2 * m - 1), m


def _cyclotomic_reduce(counts, p, m):
    """Reduce sum_e counts[e] x^e modulo the p^m-th cyclotomic polynomial.

    Phi_{p^m}(x) = sum_{j<p} x^{j p^{m-1}}; reduce top-down on the degree.
    """
    c = list(counts)
    N = p**m
    step = p ** (m - 1)
    deg = N - step  # degree of Phi
    for e in range(N - 1, deg - 1, -1):
        coef = c[e]
        if coef:
            c[e] = 0
            # x^e = x^{e-deg} * x^deg and x^deg = -sum_{j<p-1} x^{j*step}
            base = e - deg
            for j in range(p - 1):
                c[base + j * step] -= coef
    return c[:deg]


def character_sum(alpha, gamma, R, m):
    """(1/|G|^n) sum_C zeta^{tr(C(alpha))} for alpha in Hom(W, G) = G^n.

    ``alpha[j][k]`` is the k-th coordinate of alpha(w_j), a lift in R.
    Evaluated exactly in Z[zeta_{p^m}]; returns 0 or 1 and raises otherwise.
    """
    n = len(alpha)
    lam = gamma.parts
    p = R.p
    tors = []
    for lk in lam:
        tors.append([e for e in R.elements() if val_or(e, R.M) >= R.M - lk])
    slots = [tors[k] for _ in range(n) for k in range(len(lam))]
    terms = [alpha[j][k] for j in range(n) for k in range(len(lam))]
    counts = [0] * p**m
    for C in itertools.product(*slots):
        val = R.zero
        for c, x in zip(C, terms):
            val = val + c * x
        counts[trace_map(val) % p**m] += 1
    red = _cyclotomic_reduce(counts, p, m)
    order = gamma.order(R.q) ** n
    if all(v == 0 for v in red):
        return 0
    if red[0] == order and all(v == 0 for v in red[1:]):
        return 1
    raise ArithmeticError(f"character sum is not 0 or 1: {red}")


def indicator_character_sum(F, X, gamma, spec):
    """1_{FX=0} through the character sum; F[i] is the image f_i of v_i in G (coordinates).

    X is a Hermitian matrix over R (or over a finer truncation).
    """
    R, m = charsum_spec(spec, gamma)
    alpha = apply_FX(F, X, gamma, R)
    return character_sum(alpha, gamma, R, m)


def apply_FX(F, X, gamma, R):
    rows = X.rows() if hasattr(X, "rows") else X
    n = len(rows)
    lam = gamma.parts
    out = []
    for j in range(n):
        coords = []
        for k, lk in enumerate(lam):
            acc = R.zero
            for i in range(n):
                acc = acc + rows[i][j].reduce(R) * F[i][k].reduce(R)
            coords.append(acc)
        out.append(coords)
    return out


def direct_FX_zero(F, X, gamma, spec):
    R, _ = charsum_spec(spec, gamma)
    alpha = apply_FX(F, X, gamma, R)
    return int(all(val_or(c, R.M) >= lk for row in alpha for c, lk in zip(row, gamma.parts)))


def charsum_exhaustive(spec, n, gamma):
    """Compare the character sum with the direct test for every X in H_n(R) and every F.

    Returns (instances checked, disagreements, number of FX = 0 instances).
    """
    from .sampler import HermitianMatrix

    R, m = charsum_spec(spec, gamma)
    lam = gamma.parts
    diag = [e for e in R.elements() if not e.y]
    off = list(R.elements())
    G_elems = [list(_valued_reps(R, lk, 0)) for lk in lam]
    G_vecs = list(itertools.product(*G_elems))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cache = {}
    checked = bad = zeros = 0
    for d in itertools.product(diag, repeat=n):
        for o in itertools.product(off, repeat=len(pairs)):
            A = [[R.zero] * n for _ in range(n)]
            for i in range(n):
                A[i][i] = d[i]
            for (i, j), v in zip(pairs, o):
                A[i][j] = v
                A[j][i] = sigma(v)
            X = HermitianMatrix(R, n, A)
            for F in itertools.product(G_vecs, repeat=n):
                alpha = apply_FX(F, X, gamma, R)
                key = tuple(
                    (c.reduce(R.with_truncation(lk)).x, c.reduce(R.with_truncation(lk)).y)
                    for row in alpha
                    for c, lk in zip(row, lam)
                )
                if key not in cache:
                    cache[key] = character_sum(alpha, gamma, R, m)
                direct = int(all(v == (0, 0) for v in key))
                checked += 1
                zeros += direct
                bad += cache[key] != direct
    return checked, bad, zeros
