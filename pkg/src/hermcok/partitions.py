"""Module types: partitions, optionally clamped at a level ``a``."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Partition:
    """Type of the module prod O/pi^{parts[i]}.

    With ``clamp = a`` a part equal to ``a`` stands for "at least a", i.e. the
    partition describes M (x) O/pi^a.  ``clamp=None`` means an exact type.
    """

    parts: tuple = ()
    clamp: int | None = None

    def __post_init__(self):
        parts = tuple(sorted((int(x) for x in self.parts if x), reverse=True))
        if any(x < 0 for x in parts):
            raise ValueError("parts must be positive")
        if self.clamp is not None:
            if self.clamp < 1:
                raise ValueError("clamp must be positive")
            if parts and parts[0] > self.clamp:
                raise ValueError(f"part {parts[0]} exceeds clamp {self.clamp}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def clamped(cls, parts, a):
        return cls(tuple(min(x, a) for x in parts if x), a)

    def reclamp(self, a):
        return Partition.clamped(self.parts, a)

    @property
    def rank(self):
        return len(self.parts)

    @property
    def size(self):
        return sum(self.parts)

    def order(self, q):
        return q ** self.size

    def conjugate(self):
        if not self.parts:
            return Partition((), self.clamp)
        conj = tuple(sum(1 for x in self.parts if x >= j) for j in range(1, self.parts[0] + 1))
        return Partition(conj, None)

    def conj_list(self, length=None):
        """Conjugate parts as a list padded with zeros to ``length``."""
        c = list(self.conjugate().parts)
        if length is not None:
            c += [0] * (length - len(c))
        return c

    def exact(self):
        """True when no part sits at the clamp, so the type is known exactly."""
        return self.clamp is None or not self.parts or self.parts[0] < self.clamp

    def unclamped(self):
        return Partition(self.parts, None)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __str__(self):
        body = ".".join(str(x) for x in self.parts) or "0"
        return f"{body}@{self.clamp}" if self.clamp is not None else body

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if "@" in text:
            body, a = text.split("@", 1)
            clamp = int(a)
        else:
            body, clamp = text, None
        parts = tuple(int(x) for x in body.split(".") if x and x != "0")
        return cls(parts, clamp)

    def to_json(self):
        return {"parts": list(self.parts), "clamp": self.clamp}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj.get("parts", ())), obj.get("clamp"))


def dominated_by(mu, lam):
    """mu <= lam as types of a submodule (conjugates compared entrywise)."""
    mc, lc = mu.conj_list(), lam.conj_list()
    if len(mc) > len(lc):
        return False
    return all(m <= l for m, l in zip(mc, lc))


def partitions_of(n, max_part=None):
    """All partitions of n (as tuples), parts bounded by ``max_part``."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions_of(n - first, first):
            yield (first,) + rest


def partitions_up_to(total, max_part=None, max_rank=None):
    out = []
    for n in range(total + 1):
        for parts in partitions_of(n, max_part):
            if max_rank is None or len(parts) <= max_rank:
                out.append(Partition(parts))
    return out


def partitions_in_box(max_part, max_rank):
    """All partitions with parts <= max_part and at most max_rank parts."""
    out = []

    def rec(prefix, bound):
        out.append(Partition(tuple(prefix)))
        if len(prefix) == max_rank:
            return
        for x in range(1, bound + 1):
            rec(prefix + [x], x)

    rec([], max_part)
    return out
