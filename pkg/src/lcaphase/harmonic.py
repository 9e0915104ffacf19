"""Fourier analysis on finite products and Paley-Wiener sampling.

Conventions: ``fhat(xi) = w * sum_t f(t) * conj(<t, xi>)`` with ``w`` the
point mass of the domain, and the inverse carries the dual point mass and
the unconjugated character.  With ``m_G(H) = 1`` and ``m_Ghat(H^perp) = 1``
this pair is unitary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .groups import (
    GroupError, GroupSpec, HaarWeights, SubgroupData, character_matrix, coset_section,
    group_op, haar_weights,
)

__all__ = [
    "Signal", "DualSignal", "SpectrumSet", "OracleResult", "fourier", "inverse_fourier",
    "indicator", "pw_sample_reconstruct", "uniqueness_rank_oracle", "RANK_RTOL",
]

RANK_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Signal:
    """Finitely supported complex function on ``group``.

    ``weights.primal_weight`` is the mass of one point of ``group``.  Values
    off the support are zero.
    """

    group: GroupSpec
    support: tuple
    values: np.ndarray
    weights: HaarWeights
    meta: Mapping = field(default_factory=dict)
    _pos: dict = field(init=False, repr=False)

    def __post_init__(self):
        support = tuple(self.group.element(x) for x in self.support)
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        if len(support) != len(values):
            raise ValueError(f"{len(support)} support points but {len(values)} values")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values must be finite")
        pos = {x: i for i, x in enumerate(support)}
        if len(pos) != len(support):
            raise ValueError("support points must be distinct")
        values.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_pos", pos)

    @classmethod
    def from_mapping(cls, group: GroupSpec, data: Mapping, weights: HaarWeights, **kw) -> Signal:
        items = list(data.items())
        return cls(group, tuple(k for k, _ in items), np.array([v for _, v in items], dtype=complex),
                   weights, **kw)

    @classmethod
    def zeros(cls, group: GroupSpec, support: Sequence, weights: HaarWeights) -> Signal:
        return cls(group, tuple(support), np.zeros(len(support), dtype=complex), weights)

    @property
    def point_mass(self) -> float:
        return self.weights.primal_weight

    def __call__(self, x: Sequence) -> complex:
        i = self._pos.get(self.group.element(x))
        return 0j if i is None else complex(self.values[i])

    def at(self, points: Iterable[Sequence]) -> np.ndarray:
        """Values at ``points`` (zero off the support)."""
        pos = self._pos
        el = self.group.element
        return np.array([self.values[pos[p]] if (p := el(x)) in pos else 0j for x in points],
                        dtype=complex)

    def norm(self) -> float:
        return float(np.sqrt(self.point_mass * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: Signal) -> complex:
        """``<self, other> = w * sum self * conj(other)``."""
        return complex(self.point_mass * np.sum(self.values * np.conj(other.at(self.support))))

    def with_values(self, values) -> Signal:
        return type(self)(self.group, self.support, values, self.weights, dict(self.meta))

    def scaled(self, c: complex) -> Signal:
        return self.with_values(c * self.values)

    def dense(self) -> np.ndarray:
        """Values on every element of a finite group, in canonical order."""
        return self.at(self.group.elements())


class DualSignal(Signal):
    """A Signal living on a dual group; its ``weights`` are already swapped."""


@dataclass(frozen=True)
class SpectrumSet:
    elements: tuple

    def __post_init__(self):
        els = tuple(tuple(x) for x in self.elements)
        if len(set(els)) != len(els):
            raise ValueError("spectrum elements must be distinct")
        object.__setattr__(self, "elements", els)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def shifted(self, group: GroupSpec, xi: Sequence) -> SpectrumSet:
        return SpectrumSet(tuple(group_op(group, w, xi) for w in self.elements))


def fourier(f: Signal, points: Sequence[Sequence] | None = None) -> DualSignal:
    """Forward transform evaluated on ``points`` (all of the dual when finite)."""
    gd = f.group.dual()
    if points is None:
        if not gd.is_finite:
            raise GroupError(f"dual {gd} is infinite; pass explicit evaluation points")
        points = gd.elements()
    points = [gd.element(p) for p in points]
    chars = character_matrix(f.group, f.support, points)
    vals = f.point_mass * (np.conj(chars).T @ f.values)
    return DualSignal(gd, tuple(points), vals, f.weights.swapped())


def inverse_fourier(F: Signal, points: Sequence[Sequence] | None = None) -> Signal:
    """Inverse transform: ``f(t) = w_dual * sum_xi F(xi) <t, xi>``."""
    g = F.group.dual()
    if points is None:
        if not g.is_finite:
            raise GroupError(f"group {g} is infinite; pass explicit evaluation points")
        points = g.elements()
    points = [g.element(p) for p in points]
    chars = character_matrix(g, points, F.support)
    vals = F.point_mass * (chars @ F.values)
    return Signal(g, tuple(points), vals, F.weights.swapped())


def indicator(group: GroupSpec, points: Iterable[Sequence], weights: HaarWeights) -> Signal:
    pts = tuple(dict.fromkeys(group.element(p) for p in points))
    return Signal(group, pts, np.ones(len(pts)), weights)


def pw_sample_reconstruct(samples: Mapping[tuple, complex], h: SubgroupData,
                          weights: HaarWeights | None = None) -> Signal:
    """Extend samples on a section of ``G/h`` to the coset-constant function.

    This is the unique member of ``PW_{h^perp}`` with the given samples.  On
    an infinite ``G`` the samples may cover finitely many cosets; the result
    vanishes on the others.
    """
    g = h.parent
    if not h.is_finite:
        raise GroupError("sampling subgroup must be finite")
    keys = [g.element(x) for x in samples]
    if g.is_finite:
        section = coset_section(g, h)
        hit = [section.index_of(x) for x in keys]
        if sorted(hit) != list(range(len(section))):
            raise GroupError("sample points are not a section of G/H")
    else:
        covered = set()
        for x in keys:
            coset = frozenset(group_op(g, x, y) for y in h.elements)
            if coset & covered:
                raise GroupError("two sample points lie in the same coset of H")
            covered |= coset
    if weights is None:
        weights = haar_weights(g, h)
    data = {}
    for x, v in zip(keys, samples.values()):
        for y in h.elements:
            data[group_op(g, x, y)] = complex(v)
    return Signal.from_mapping(g, data, weights)


class OracleResult(NamedTuple):
    is_unique: bool
    rank: int
    condition: float


def numerical_rank(mat: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, float]:
    """Rank (singular values above ``rtol * s_max``) and the column condition number."""
    if mat.size == 0:
        return 0, np.inf
    s = np.linalg.svd(mat, compute_uv=False)
    if s[0] == 0:
        return 0, np.inf
    rank = int(np.sum(s > rtol * s[0]))
    ncols = mat.shape[1]
    cond = float(s[0] / s[ncols - 1]) if rank == ncols else np.inf
    return rank, cond


def uniqueness_rank_oracle(g: GroupSpec, upsilon: Sequence[Sequence],
                           omega: SpectrumSet | Sequence[Sequence]) -> OracleResult:
    """Decide whether ``upsilon`` is a uniqueness set for ``PW_omega(g)``.

    ``PW_omega`` is spanned by the characters in ``omega``, so this is a column
    rank test on ``(<u, w>)_{u, w}``.
    """
    omega = list(omega)
    if not omega:
        raise ValueError("empty spectrum")
    upsilon = [g.element(u) for u in upsilon]
    omega = [g.dual().element(w) for w in omega]
    mat = character_matrix(g, upsilon, omega)
    rank, cond = numerical_rank(mat)
    return OracleResult(rank == len(omega), rank, cond)
