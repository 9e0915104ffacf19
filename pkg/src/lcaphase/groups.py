"""Products of cyclic groups, integer lines and tori.

Elements are plain tuples, one coordinate per factor: a residue in
``[0, n)`` for ``Z/n``, a signed int for ``Z`` and a :class:`fractions.Fraction`
in ``[0, 1)`` for ``T``.  The dual of ``Z/n`` is ``Z/n`` and ``Z`` and ``T``
are dual to each other, so :meth:`GroupSpec.dual` applied twice gives back
the original group.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Cyclic", "IntegerLine", "Torus", "GroupSpec", "SubgroupData", "CosetSection",
    "HaarWeights", "GroupError", "parse_group", "group_op", "group_neg", "group_sub",
    "pairing", "character_matrix", "subgroup_closure", "annihilator", "coset_section",
    "minimal_chain_member", "haar_weights", "all_subgroups", "element_key",
    "difference_set",
]


class GroupError(ValueError):
    """Raised for malformed group data or unsupported subgroup shapes."""


@dataclass(frozen=True)
class Cyclic:
    order: int

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 1:
            raise GroupError(f"cyclic order must be a positive integer, got {self.order!r}")

    def __str__(self):
        return f"Z/{self.order}"


@dataclass(frozen=True)
class IntegerLine:
    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class Torus:
    def __str__(self):
        return "T"


Factor = Cyclic | IntegerLine | Torus

_DUAL_FACTOR = {IntegerLine: Torus, Torus: IntegerLine}


@dataclass(frozen=True)
class GroupSpec:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise GroupError("factor list must be non-empty")
        for f in self.factors:
            if not isinstance(f, (Cyclic, IntegerLine, Torus)):
                raise GroupError(f"unknown factor {f!r}")

    def __str__(self):
        return " x ".join(str(f) for f in self.factors)

    def __mul__(self, other: GroupSpec) -> GroupSpec:
        return GroupSpec(self.factors + other.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def is_finite(self) -> bool:
        return all(isinstance(f, Cyclic) for f in self.factors)

    @property
    def order(self) -> int | float:
        if not self.is_finite:
            return math.inf
        return math.prod(f.order for f in self.factors)

    def dual(self) -> GroupSpec:
        return GroupSpec(f if isinstance(f, Cyclic) else _DUAL_FACTOR[type(f)]()
                         for f in self.factors)

    def zero(self) -> tuple:
        return tuple(Fraction(0) if isinstance(f, Torus) else 0 for f in self.factors)

    def element(self, coords: Iterable) -> tuple:
        """Validate and normalize a coordinate tuple."""
        coords = tuple(coords)
        if len(coords) != self.rank:
            raise GroupError(f"element {coords!r} has {len(coords)} coordinates, "
                             f"group {self} needs {self.rank}")
        out = []
        for c, f in zip(coords, self.factors):
            if isinstance(f, Torus):
                out.append(Fraction(c) % 1)
            else:
                if isinstance(c, Fraction):
                    if c.denominator != 1:
                        raise GroupError(f"non-integer coordinate {c} on factor {f}")
                    c = int(c)
                if isinstance(c, (np.integer,)):
                    c = int(c)
                if not isinstance(c, int):
                    raise GroupError(f"non-integer coordinate {c!r} on factor {f}")
                out.append(c % f.order if isinstance(f, Cyclic) else c)
        return tuple(out)

    def elements(self) -> list[tuple]:
        """All elements of a finite group, in canonical (lexicographic) order."""
        if not self.is_finite:
            raise GroupError(f"group {self} is infinite")
        return list(itertools.product(*(range(f.order) for f in self.factors)))

    def cyclic_axes(self) -> list[int]:
        return [i for i, f in enumerate(self.factors) if isinstance(f, Cyclic)]


_FACTOR_RE = re.compile(r"^\s*Z\s*/\s*(\d+)\s*$")


def parse_group(factors: Sequence[str] | str) -> GroupSpec:
    """Parse ``["Z/4", "Z/9", "Z"]`` (or ``"Z/4 x Z"``) into a GroupSpec."""
    if isinstance(factors, str):
        factors = [p for p in re.split(r"[x×,*]", factors) if p.strip()]
    out = []
    for tok in factors:
        if not isinstance(tok, str):
            raise GroupError(f"factor {tok!r} is not a string")
        m = _FACTOR_RE.match(tok)
        if m:
            out.append(Cyclic(int(m.group(1))))
        elif tok.strip() == "Z":
            out.append(IntegerLine())
        elif tok.strip() == "T":
            out.append(Torus())
        else:
            raise GroupError(f"cannot parse group factor {tok!r}")
    return GroupSpec(tuple(out))


def _check_arity(g: GroupSpec, *xs):
    for x in xs:
        if len(x) != g.rank:
            raise GroupError(f"arity mismatch: {x!r} vs group {g}")


def group_op(g: GroupSpec, a: Sequence, b: Sequence) -> tuple:
    _check_arity(g, a, b)
    return g.element(x + y for x, y in zip(a, b))


def group_neg(g: GroupSpec, a: Sequence) -> tuple:
    _check_arity(g, a)
    return g.element(-x for x in a)


def group_sub(g: GroupSpec, a: Sequence, b: Sequence) -> tuple:
    _check_arity(g, a, b)
    return g.element(x - y for x, y in zip(a, b))


def element_key(x: Sequence) -> tuple:
    """Sort key: lexicographic over coordinates, each ordered by magnitude then sign.

    On ``Z`` this gives the spiral order 0, 1, -1, 2, -2, ...
    """
    return tuple((abs(c), c < 0) for c in x)


def _phase_fraction(g: GroupSpec, x: Sequence, xi: Sequence) -> Fraction:
    total = Fraction(0)
    for f, a, b in zip(g.factors, x, xi):
        if isinstance(f, Cyclic):
            total += Fraction(int(a) * int(b), f.order)
        else:
            total += Fraction(a) * Fraction(b)
    return total % 1


def pairing(g: GroupSpec, x: Sequence, xi: Sequence) -> complex:
    """Character value <x, xi> for x in ``g`` and xi in ``g.dual()``."""
    _check_arity(g, x, xi)
    phase = _phase_fraction(g, x, xi)
    if phase == 0:
        return 1 + 0j
    return complex(np.exp(2j * np.pi * float(phase)))


def character_matrix(g: GroupSpec, xs: Sequence[Sequence], xis: Sequence[Sequence]) -> np.ndarray:
    """Matrix ``(<x, xi>)`` with rows indexed by ``xs`` and columns by ``xis``.

    Phases are accumulated as exact integers over a common denominator, so
    entries equal to 1 come out as exactly 1.
    """
    xs, xis = list(xs), list(xis)
    if not xs or not xis:
        return np.zeros((len(xs), len(xis)), dtype=complex)
    _check_arity(g, *xs)
    _check_arity(g, *xis)
    dens = []
    for j, f in enumerate(g.factors):
        if isinstance(f, Cyclic):
            dens.append(f.order)
        else:
            d = 1
            for v in itertools.chain((x[j] for x in xs), (y[j] for y in xis)):
                d = math.lcm(d, Fraction(v).denominator)
            dens.append(d)
    L = reduce(math.lcm, dens, 1)
    numer = np.zeros((len(xs), len(xis)), dtype=object)
    for j, f in enumerate(g.factors):
        if isinstance(f, Cyclic):
            a = [int(x[j]) for x in xs]
            b = [int(y[j]) * (L // f.order) for y in xis]
        else:
            # one side integral, the other rational: scale both numerators by L
            a = [Fraction(x[j]) * L for x in xs]
            b = [Fraction(y[j]) for y in xis]
            a = [v.numerator if v.denominator == 1 else v for v in a]
        numer = numer + np.outer(np.array(a, dtype=object), np.array(b, dtype=object))
    numer = np.vectorize(lambda v: int(Fraction(v) % L))(numer).astype(np.int64)
    out = np.exp(2j * np.pi * numer / L)
    out[numer == 0] = 1.0
    return out


# ---------------------------------------------------------------- subgroups

@dataclass(frozen=True, eq=False)
class SubgroupData:
    """Subgroup of ``parent``.

    ``elements`` lists the compact part (zero on every non-cyclic factor not
    in ``full``); ``full`` holds indices of non-cyclic factors that are
    included entirely, which makes the subgroup infinite.
    """

    parent: GroupSpec
    generators: tuple
    elements: tuple
    full: tuple = ()
    _members: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(self.elements, key=element_key)))
        object.__setattr__(self, "_members", frozenset(self.elements))

    @property
    def order(self) -> int | float:
        return math.inf if self.full else len(self.elements)

    @property
    def is_finite(self) -> bool:
        return not self.full

    def _project(self, x: Sequence) -> tuple:
        if not self.full:
            return tuple(x)
        return tuple(0 * c if i in self.full else c for i, c in enumerate(x))

    def contains(self, x: Sequence) -> bool:
        return self._project(self.parent.element(x)) in self._members

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def __len__(self) -> int:
        if self.full:
            raise GroupError("subgroup is infinite")
        return len(self.elements)

    def issubset(self, other: SubgroupData) -> bool:
        return set(self.full) <= set(other.full) and all(other.contains(x) for x in self.elements)

    def same_as(self, other: SubgroupData) -> bool:
        return self.issubset(other) and other.issubset(self)

    def __repr__(self):
        extra = f", full={self.full}" if self.full else ""
        return f"SubgroupData({self.parent}, order={self.order}{extra})"


def subgroup_closure(g: GroupSpec, generators: Iterable[Sequence], full: Iterable[int] = ()) -> SubgroupData:
    """Smallest subgroup containing ``generators`` (plus any whole factors in ``full``)."""
    full = tuple(sorted(set(full)))
    for i in full:
        if isinstance(g.factors[i], Cyclic):
            raise GroupError("whole cyclic factors are given through generators, not `full`")
    gens = [g.element(x) for x in generators]
    for x in gens:
        for i, (c, f) in enumerate(zip(x, g.factors)):
            if isinstance(f, IntegerLine) and c != 0 and i not in full:
                raise GroupError(f"closure of {x} would be infinite (integer-line coordinate {c})")
    proj = [tuple(0 * c if i in full else c for i, c in enumerate(x)) for x in gens]
    zero = g.zero()
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for a in frontier:
            for b in proj:
                c = group_op(g, a, b)
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return SubgroupData(g, tuple(gens), tuple(seen), full)


def annihilator(g: GroupSpec, h: SubgroupData) -> SubgroupData:
    """Characters of ``g`` trivial on ``h``, as a subgroup of ``g.dual()``."""
    gd = g.dual()
    full_out = []
    for i, f in enumerate(g.factors):
        if isinstance(f, Cyclic) or i in h.full:
            continue
        if any(x[i] != 0 for x in h.elements):
            raise GroupError(f"annihilator of a proper infinite subgroup of factor {f} is unsupported")
        full_out.append(i)
    axes = g.cyclic_axes()
    dual_zero = gd.zero()
    elements = []
    gens = [x for x in h.elements if any(c != 0 for c in x)] if not h.generators else list(h.generators)
    for res in itertools.product(*(range(g.factors[i].order) for i in axes)):
        xi = list(dual_zero)
        for i, r in zip(axes, res):
            xi[i] = r
        xi = tuple(xi)
        if all(_phase_fraction(g, _cyclic_only(g, x, h.full), xi) == 0 for x in gens):
            elements.append(xi)
    return SubgroupData(gd, tuple(e for e in elements if any(c != 0 for c in e)), tuple(elements),
                        tuple(full_out))


def _cyclic_only(g: GroupSpec, x, full):
    return tuple(c if isinstance(f, Cyclic) else 0 * c for f, c in zip(g.factors, x))


@dataclass(frozen=True, eq=False)
class CosetSection:
    subgroup: SubgroupData
    representatives: tuple
    _index: dict = field(repr=False)

    def index_of(self, x: Sequence) -> int:
        """Index of the representative of the coset containing ``x``."""
        h = self.subgroup
        return self._index[h._project(h.parent.element(x))]

    def __len__(self):
        return len(self.representatives)

    def __iter__(self):
        return iter(self.representatives)


def coset_section(g: GroupSpec, h: SubgroupData) -> CosetSection:
    """Canonical section of ``g / h``: the :func:`element_key`-minimal element of each coset."""
    for i, f in enumerate(g.factors):
        if not isinstance(f, Cyclic) and i not in h.full:
            raise GroupError(f"quotient {g} / H is infinite (factor {i}: {f})")
    axes = g.cyclic_axes()
    zero = g.zero()
    candidates = []
    for res in itertools.product(*(range(g.factors[i].order) for i in axes)):
        x = list(zero)
        for i, r in zip(axes, res):
            x[i] = r
        candidates.append(tuple(x))
    candidates.sort(key=element_key)
    index: dict = {}
    reps = []
    for x in candidates:
        if x in index:
            continue
        k = len(reps)
        reps.append(x)
        for y in h.elements:
            index[group_op(g, x, y)] = k
    return CosetSection(h, tuple(reps), index)


def minimal_chain_member(chain: Sequence[SubgroupData], s: Iterable[Sequence]) -> SubgroupData:
    """First member of an increasing subgroup chain that contains every point of ``s``."""
    if not chain:
        raise GroupError("empty subgroup chain")
    for a, b in zip(chain, chain[1:]):
        if not a.issubset(b):
            raise GroupError("subgroup chain is not increasing")
    s = list(s)
    for h in chain:
        if all(h.contains(x) for x in s):
            return h
    raise GroupError("no chain member contains the requested set")


@dataclass(frozen=True)
class HaarWeights:
    """Point masses on G (``primal_weight``) and on its dual (``dual_weight``).

    Torus factors always carry Lebesgue measure of total mass 1; the dual
    weight refers to the cyclic part of the dual.
    """

    primal_weight: float
    dual_weight: float

    def __post_init__(self):
        if not (self.primal_weight > 0 and self.dual_weight > 0):
            raise GroupError("Haar weights must be positive")

    def swapped(self) -> HaarWeights:
        return HaarWeights(self.dual_weight, self.primal_weight)


def haar_weights(g: GroupSpec, h: SubgroupData | None = None) -> HaarWeights:
    """Normalize so that ``m_G(h) = 1`` and ``m_Ghat(h^perp) = 1``.

    ``h`` must be compact and open: a finite subgroup, zero on integer lines.
    With ``h=None`` the trivial subgroup is used.
    """
    if h is None:
        h = subgroup_closure(g, [])
    if h.full or any(not isinstance(f, Cyclic) and any(x[i] != 0 for x in h.elements)
                     for i, f in enumerate(g.factors)):
        raise GroupError("the designated subgroup must be compact-open (finite, zero on Z factors)")
    if any(isinstance(f, Torus) for f in g.factors):
        raise GroupError("Haar weights are set on the primal group (no torus factors)")
    cyc = math.prod(g.factors[i].order for i in g.cyclic_axes())
    return HaarWeights(1.0 / len(h.elements), len(h.elements) / cyc)


def all_subgroups(g: GroupSpec) -> list[SubgroupData]:
    """Every subgroup of a finite group (exhaustive join of cyclic subgroups)."""
    elems = g.elements()
    found: dict[frozenset, SubgroupData] = {}
    trivial = subgroup_closure(g, [])
    found[frozenset(trivial.elements)] = trivial
    frontier = [trivial]
    while frontier:
        nxt = []
        for h in frontier:
            for x in elems:
                if x in h:
                    continue
                k = subgroup_closure(g, list(h.generators) + [x])
                key = frozenset(k.elements)
                if key not in found:
                    found[key] = k
                    nxt.append(k)
        frontier = nxt
    return sorted(found.values(), key=lambda h: (h.order, [element_key(x) for x in h.elements]))


def difference_set(g: GroupSpec, k_set: Iterable[Sequence]) -> list[tuple]:
    """``K - K`` in canonical order."""
    k_set = [g.element(x) for x in k_set]
    return sorted({group_sub(g, a, b) for a in k_set for b in k_set}, key=element_key)
