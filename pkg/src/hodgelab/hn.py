"""Slope and Harder-Narasimhan type combinatorics, in exact rationals."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "HNType",
    "FiltrationDegrees",
    "slope",
    "dominance_leq",
    "oper_hn_type",
    "filtration_degrees",
    "enumerate_admissible_types",
]


def slope(deg: int, rank: int) -> Fraction:
    if rank < 1:
        raise ValueError("rank must be positive")
    return Fraction(deg, rank)


@dataclass(frozen=True)
class HNType:
    """Blocks of (slope, multiplicity) with strictly decreasing slopes."""

    entries: tuple[tuple[Fraction, int], ...]

    def __post_init__(self):
        for (s, m) in self.entries:
            if m < 1:
                raise ValueError("multiplicities must be positive")
        slopes = [s for s, _ in self.entries]
        if any(x <= y for x, y in zip(slopes, slopes[1:])):
            raise ValueError("block slopes must strictly decrease")

    @staticmethod
    def from_blocks(blocks) -> "HNType":
        return HNType(tuple((Fraction(s), int(m)) for s, m in blocks))

    @staticmethod
    def from_expanded(values) -> "HNType":
        vals = [Fraction(v) for v in values]
        if any(a < b for a, b in zip(vals, vals[1:])):
            raise ValueError("expanded vector must be weakly decreasing")
        blocks = [(s, len(list(grp))) for s, grp in itertools.groupby(vals)]
        return HNType.from_blocks(blocks)

    def expanded(self) -> list[Fraction]:
        out = []
        for s, m in self.entries:
            out.extend([s] * m)
        return out

    @property
    def length(self) -> int:
        return sum(m for _, m in self.entries)

    def total(self) -> Fraction:
        return sum((s * m for s, m in self.entries), Fraction(0))


def dominance_leq(lam: HNType, mu: HNType) -> bool:
    """Partial-sum dominance lambda <= mu (exact rational arithmetic)."""
    a, b = lam.expanded(), mu.expanded()
    if len(a) != len(b):
        raise ValueError("types must have equal expanded length")
    if sum(a) != sum(b):
        raise ValueError("types must have equal totals")
    pa = pb = Fraction(0)
    for x, y in zip(a, b):
        pa += x
        pb += y
        if pa > pb:
            return False
    return True


def oper_hn_type(n: int, g: int) -> HNType:
    """Expanded slope vector (n+1-2i)(g-1), i = 1..n."""
    if n < 1 or g < 2:
        raise ValueError("need n >= 1 and g >= 2")
    return HNType.from_expanded([(n + 1 - 2 * i) * (g - 1) for i in range(1, n + 1)])


@dataclass(frozen=True)
class FiltrationDegrees:
    """Degrees of the canonical flag, deg V_j = j (n-j)(g-1)."""

    n: int
    g: int
    degs: tuple[int, ...]

    def __post_init__(self):
        if self.degs[-1] != 0:
            raise ValueError("the full bundle must have degree zero")


def filtration_degrees(n: int, g: int) -> FiltrationDegrees:
    """Flag degrees from the line-bundle ladder with deg L = -(n-1)(g-1)."""
    if n < 1 or g < 2:
        raise ValueError("need n >= 1 and g >= 2")
    deg_l = -(n - 1) * (g - 1)
    degs = []
    for j in range(1, n + 1):
        d = j * deg_l + (n * j - j * (j + 1) // 2) * (2 * g - 2)
        assert d == j * (n - j) * (g - 1)
        degs.append(d)
    return FiltrationDegrees(n, g, tuple(degs))


def enumerate_admissible_types(n: int, g: int) -> list[HNType]:
    """All unstable types within the slope-gap region, exact and exhaustive.

    Blocks (n_i, d_i) with n_i >= 1 summing to n, integer degrees summing
    to zero, strictly decreasing slopes, and consecutive gaps at most
    2g - 2.  Budgeted to n <= 5, g <= 3.
    """
    if n > 5 or g > 3:
        raise ValueError("enumeration budget is n <= 5, g <= 3")
    if n < 1 or g < 2:
        raise ValueError("need n >= 1 and g >= 2")
    gap = 2 * g - 2
    out: list[HNType] = []

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(1, total - parts + 2):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    def search(ranks, idx, prev_slope, acc_deg, blocks):
        if idx == len(ranks) - 1:
            r = ranks[idx]
            d = -acc_deg
            s = Fraction(d, r)
            if s < prev_slope and prev_slope - s <= gap:
                out.append(HNType.from_blocks(blocks + [(s, r)]))
            return
        r = ranks[idx]
        lo_f = r * (prev_slope - gap)
        lo = int(lo_f) if lo_f == int(lo_f) else int(lo_f) + (1 if lo_f > 0 else 0)
        while Fraction(lo, r) < prev_slope - gap:
            lo += 1
        hi = r * prev_slope
        d = lo
        while Fraction(d, r) < prev_slope:
            search(ranks, idx + 1, Fraction(d, r), acc_deg + d, blocks + [(Fraction(d, r), r)])
            d += 1

    for ell in range(2, n + 1):
        for ranks in compositions(n, ell):
            # mu_1 > 0 and bounded by the gap chain to the (negative) last slope
            r1 = ranks[0]
            max_mu1 = (ell - 1) * gap
            for d1 in range(1, r1 * max_mu1 + 1):
                s1 = Fraction(d1, r1)
                if s1 > max_mu1:
                    break
                search(ranks, 1, s1, d1, [(s1, r1)])
    return out
