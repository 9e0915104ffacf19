"""Uniqueness sets for Paley-Wiener spaces and completeness of translate systems.

Every verdict is a finite-dimensional rank test and always comes with a
condition number.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .groups import (
    Cyclic, GroupError, GroupSpec, HaarWeights, SubgroupData, Torus, annihilator, character_matrix,
    coset_section, minimal_chain_member,
)
from .harmonic import Signal, numerical_rank, uniqueness_rank_oracle
from .stft import translate_autocorr_values

__all__ = [
    "UniquenessCertificate", "CompletenessCertificate", "PoolExhausted", "default_pool",
    "greedy_uniqueness_compact", "section_uniqueness", "chain_uniqueness", "product_uniqueness",
    "certify_uniqueness", "separation_radius", "completeness_check", "product_window",
    "product_completeness",
]


class PoolExhausted(RuntimeError):
    """The candidate pool ran out before the evaluation vectors reached full rank."""

    def __init__(self, rank: int, needed: int):
        super().__init__(f"candidate pool exhausted at rank {rank} of {needed}")
        self.rank = rank
        self.needed = needed


def _fmt(x) -> list:
    return [str(c) if isinstance(c, Fraction) else int(c) for c in x]


@dataclass(frozen=True)
class UniquenessCertificate:
    points: tuple
    spectrum: tuple
    rank: int
    condition: float
    separated: bool
    radius: float

    @property
    def valid(self) -> bool:
        return self.rank == len(self.spectrum)

    def to_dict(self) -> dict:
        return {"points": [_fmt(p) for p in self.points], "spectrum": [_fmt(w) for w in self.spectrum],
                "rank": self.rank, "condition": self.condition, "separated": self.separated,
                "radius": self.radius, "valid": self.valid}


@dataclass(frozen=True)
class CompletenessCertificate:
    window: str
    shift: tuple
    k_set: tuple
    lam: tuple
    rank: int
    condition: float

    @property
    def complete(self) -> bool:
        return self.rank == len(self.k_set)

    def to_dict(self) -> dict:
        return {"window": self.window, "shift": _fmt(self.shift), "k_set": [_fmt(t) for t in self.k_set],
                "lambda": [_fmt(x) for x in self.lam], "rank": self.rank,
                "condition": self.condition, "complete": self.complete}


# ----------------------------------------------------------------- uniqueness

def default_pool(g: GroupSpec, spectrum: Sequence[Sequence]) -> list[tuple]:
    """Candidate points for :func:`greedy_uniqueness_compact` on a compact group.

    Torus factors get the roots of unity of order ``max(2|spectrum| + 1, span + 1)``,
    where ``span`` is the spread of the spectrum on that factor (so that distinct
    frequencies stay distinct on the pool); cyclic factors contribute every residue.
    """
    spectrum = [tuple(w) for w in spectrum]
    axes = []
    for j, f in enumerate(g.factors):
        if isinstance(f, Cyclic):
            axes.append([c for c in range(f.order)])
        elif isinstance(f, Torus):
            coords = [int(w[j]) for w in spectrum] or [0]
            order = max(2 * len(spectrum) + 1, max(coords) - min(coords) + 1)
            axes.append([Fraction(k, order) for k in range(order)])
        else:
            raise GroupError("greedy pools are defined on compact groups (cyclic and torus factors)")
    return [g.element(x) for x in itertools.product(*axes)]


def greedy_uniqueness_compact(g: GroupSpec, spectrum: Sequence[Sequence],
                              pool: Sequence[Sequence] | None = None) -> list[tuple]:
    """Scan ``pool`` and keep each point whose evaluation vector raises the rank.

    The evaluation vector of ``x`` is ``(<x, eta>)`` over the spectrum; the scan
    stops once the rank equals ``|spectrum|``, so at most ``|spectrum|`` points
    are returned.
    """
    spectrum = [g.dual().element(w) for w in spectrum]
    if not spectrum:
        raise ValueError("empty spectrum")
    if pool is None:
        pool = default_pool(g, spectrum)
    pool = [g.element(x) for x in pool]
    rows = character_matrix(g, pool, spectrum)
    n = len(spectrum)
    basis = np.zeros((0, n), dtype=complex)  # orthonormal rows
    chosen: list[tuple] = []
    for x, v in zip(pool, rows):
        r = v - (v @ basis.conj().T) @ basis
        nr = np.linalg.norm(r)
        if nr > 1e-8 * np.linalg.norm(v):
            basis = np.vstack([basis, r / nr])
            chosen.append(x)
            if len(chosen) == n:
                return chosen
    raise PoolExhausted(len(chosen), n)


def separation_radius(g: GroupSpec, points: Sequence[Sequence]) -> float:
    """Half the smallest pairwise gap.

    The metric is the largest coordinate gap: circular distance on torus
    factors and the discrete metric (0 or 1) on the others.  A single point
    gets radius 0.5.
    """
    pts = [g.element(p) for p in points]
    best = 1.0
    for a, b in itertools.combinations(pts, 2):
        d = 0.0
        for f, x, y in zip(g.factors, a, b):
            if isinstance(f, Torus):
                t = float((Fraction(x) - Fraction(y)) % 1)
                d = max(d, min(t, 1 - t))
            elif x != y:
                d = max(d, 1.0)
        best = min(best, d)
    return best / 2


def certify_uniqueness(g: GroupSpec, points: Sequence[Sequence],
                       spectrum: Sequence[Sequence]) -> UniquenessCertificate:
    res = uniqueness_rank_oracle(g, points, spectrum)
    radius = separation_radius(g, points)
    return UniquenessCertificate(tuple(g.element(p) for p in points),
                                 tuple(g.dual().element(w) for w in spectrum),
                                 res.rank, res.condition, radius > 0, radius)


def section_uniqueness(g_dual: GroupSpec, h_perp: SubgroupData) -> list[tuple]:
    """Canonical section of ``g_dual / h_perp``.

    It is a uniqueness set for ``PW_H(g_dual)`` where ``H = (h_perp)^perp``.
    """
    return list(coset_section(g_dual, h_perp).representatives)


def chain_uniqueness(chain: Sequence[SubgroupData], k_minus_k: Sequence[Sequence]) -> list[tuple]:
    """Section of ``Ghat / H'^perp`` for the first chain member ``H'`` containing ``K - K``."""
    h = minimal_chain_member(chain, k_minus_k)
    g = h.parent
    return section_uniqueness(g.dual(), annihilator(g, h))


def product_uniqueness(part1: Sequence[Sequence], part2: Sequence[Sequence]) -> list[tuple]:
    """Cartesian product of two point sets, coordinates concatenated."""
    return [tuple(a) + tuple(b) for a in part1 for b in part2]


# --------------------------------------------------------------- completeness

def completeness_check(g: Signal, s: Sequence, k_set: Sequence[Sequence],
                       lam: Sequence[Sequence]) -> CompletenessCertificate:
    """Do ``{T_x g_s : x in lam}`` span all functions on the finite set ``k_set``?"""
    k_set = [g.group.element(t) for t in k_set]
    lam = [g.group.element(x) for x in lam]
    if not k_set or not lam:
        rank, cond = 0, math.inf
    else:
        # columns of the |lam| x |K| matrix are indexed by K: full column rank <=> spanning
        rank, cond = numerical_rank(translate_autocorr_values(g, s, lam, k_set))
    name = str(g.meta.get("construction", "window"))
    return CompletenessCertificate(name, g.group.element(s), tuple(k_set), tuple(lam), rank, cond)


def product_window(g1: Signal, g2: Signal) -> Signal:
    """Pointwise product ``(x, y) -> g1(x) g2(y)`` on ``G1 x G2``."""
    grp = g1.group * g2.group
    support = [a + b for a in g1.support for b in g2.support]
    values = np.outer(g1.values, g2.values).reshape(-1)
    w = HaarWeights(g1.weights.primal_weight * g2.weights.primal_weight,
                    g1.weights.dual_weight * g2.weights.dual_weight)
    meta = {"construction": f"product({g1.meta.get('construction', 'window')},"
                            f"{g2.meta.get('construction', 'window')})"}
    return Signal(grp, tuple(support), values, w, meta)


def product_completeness(g1: Signal, g2: Signal,
                         lambdas: tuple[Sequence, Sequence]) -> tuple[Signal, list[tuple]]:
    """Product window and product translation set ``lam1 x lam2``."""
    lam1, lam2 = lambdas
    return product_window(g1, g2), product_uniqueness(lam1, lam2)


def certificate_records(certs) -> list[dict]:
    return [c.to_dict() if hasattr(c, "to_dict") else asdict(c) for c in certs]
