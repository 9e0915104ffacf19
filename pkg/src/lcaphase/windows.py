"""Random window functions.

Two constructions:

* :func:`steinhaus_window` for a group with a finite (compact-open) subgroup
  ``H``: on each coset ``H - x_k`` the window is a random trigonometric
  polynomial ``sum_eta lam[k, eta] * eta(y + x_k)`` whose coefficients are
  ``a_eta`` times independent uniform phases.
* :func:`gaussian_discrete_window` for discrete groups: i.i.d. standard
  normal values along an enumeration of the group, paired with
  :func:`select_translation_indices` to pick translates whose matrices
  ``A^s_N`` involve disjoint sets of window values column by column.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .groups import (
    CosetSection, GroupError, GroupSpec, HaarWeights, IntegerLine, SubgroupData, annihilator,
    character_matrix, coset_section, element_key, group_neg, group_sub, haar_weights,
)
from .harmonic import Signal
from .stft import translate_autocorr_values

__all__ = [
    "CoeffProfile", "SteinhausDraw", "GaussianWindowDraw", "default_coeffs", "dual_quotient",
    "steinhaus_draw", "steinhaus_window", "translate_expansion_coeffs", "spiral_enumeration",
    "select_translation_indices", "column_arguments", "gaussian_discrete_window", "a_matrix",
    "lln_average", "lln_limit",
]


@dataclass(frozen=True, eq=False)
class CoeffProfile:
    """Positive weights ``a_mu`` indexed by characters of ``H``.

    The trivial character must dominate strictly: ``a_0^2 > sum_{mu != 0} a_mu^2``.
    """

    a: Mapping

    def __post_init__(self):
        a = {tuple(k): float(v) for k, v in dict(self.a).items()}
        if not a:
            raise ValueError("empty coefficient profile")
        zero = [k for k in a if all(c == 0 for c in k)]
        if not zero:
            raise ValueError("coefficient profile must contain the trivial character")
        if any(not (v > 0 and math.isfinite(v)) for v in a.values()):
            raise ValueError("coefficients must be positive and finite")
        a0 = a[zero[0]]
        rest = sum(v * v for k, v in a.items() if k != zero[0])
        if not a0 * a0 > rest:
            raise ValueError(f"a_0^2 = {a0 * a0} must exceed sum of other a_mu^2 = {rest}")
        object.__setattr__(self, "a", a)

    @property
    def a0(self) -> float:
        return next(v for k, v in self.a.items() if all(c == 0 for c in k))

    @property
    def max(self) -> float:
        return max(self.a.values())

    def vector(self, chars: Sequence) -> np.ndarray:
        try:
            return np.array([self.a[tuple(c)] for c in chars])
        except KeyError as e:
            raise GroupError(f"coefficient profile has no entry for character {e.args[0]}") from None

    def as_dict(self) -> dict:
        return {",".join(str(c) for c in k): v for k, v in self.a.items()}


def default_coeffs(h_dual: Sequence[Sequence]) -> CoeffProfile:
    """Flat profile: ``a_0 = 1`` and ``a_mu = 1 / (2 sqrt(m - 1))`` otherwise, ``m = |Hhat|``."""
    h_dual = [tuple(c) for c in h_dual]
    if not h_dual:
        raise ValueError("character list of H is empty")
    m = len(h_dual)
    rest = 1.0 / (2.0 * math.sqrt(m - 1)) if m > 1 else 0.0
    return CoeffProfile({c: (1.0 if all(v == 0 for v in c) else rest) for c in h_dual})


def dual_quotient(g: GroupSpec, h: SubgroupData) -> CosetSection:
    """Canonical representatives of ``Ghat / H^perp``, i.e. the characters of ``H``."""
    return coset_section(g.dual(), annihilator(g, h))


@dataclass(frozen=True, eq=False)
class SteinhausDraw:
    """``lam[k, m] = a_m * exp(2 pi i u_{k,m})``, one row per coset index ``k``."""

    seed: int
    lam: np.ndarray

    @property
    def n_cosets(self) -> int:
        return self.lam.shape[0]


def steinhaus_draw(seed: int, coeffs: np.ndarray, n_cosets: int) -> SteinhausDraw:
    # Philox is counter based: entry (k, m) is the (k*len(coeffs) + m)-th draw
    # of the stream keyed by `seed`, independent of every other entry.
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    u = rng.random((n_cosets, len(coeffs)))
    return SteinhausDraw(int(seed), np.asarray(coeffs)[None, :] * np.exp(2j * np.pi * u))


def steinhaus_window(g: GroupSpec, h: SubgroupData, section: CosetSection | Sequence,
                     coeffs: CoeffProfile, seed: int, weights: HaarWeights | None = None) -> Signal:
    """Random window supported on ``union_k (H - x_k)`` over the listed section points."""
    if not h.is_finite or h.parent != g:
        raise GroupError("H must be a finite subgroup of g")
    reps = list(section.representatives if isinstance(section, CosetSection) else section)
    reps = [g.element(x) for x in reps]
    if isinstance(section, CosetSection):
        if not section.subgroup.same_as(h):
            raise GroupError("section was built for a different subgroup")
    else:
        seen = set()
        for x in reps:
            c = frozenset(group_sub(g, y, x) for y in h.elements)
            if c & seen:
                raise GroupError("section points share a coset of H")
            seen |= c
    chars = dual_quotient(g, h).representatives
    draw = steinhaus_draw(seed, coeffs.vector(chars), len(reps))
    table = character_matrix(g, h.elements, chars)  # eta(t) for t in H
    support, values = [], []
    for k, x in enumerate(reps):
        vals = table @ draw.lam[k]
        for t, v in zip(h.elements, vals):
            support.append(group_sub(g, t, x))
            values.append(v)
    if weights is None:
        weights = haar_weights(g, h)
    meta = {"construction": "steinhaus", "seed": int(seed), "coeffs": coeffs.as_dict()}
    return Signal(g, tuple(support), np.array(values), weights, meta)


def translate_expansion_coeffs(draw: SteinhausDraw, chars: CosetSection, g: GroupSpec,
                               s: Sequence) -> np.ndarray:
    """``c[k, eta] = sum_mu lam[k, mu] conj(lam[k, mu - eta]) mu(-s)``.

    ``T_{x_k} g_s`` restricted to ``H`` equals ``sum_eta c[k, eta] eta``.
    """
    gd = g.dual()
    reps = chars.representatives
    m = len(reps)
    mu_minus_eta = np.array([[chars.index_of(group_sub(gd, mu, eta)) for eta in reps] for mu in reps])
    mu_at_minus_s = character_matrix(g, [group_neg(g, s)], reps)[0]
    lam = draw.lam
    out = np.zeros((draw.n_cosets, m), dtype=complex)
    for e in range(m):
        out[:, e] = (lam * np.conj(lam[:, mu_minus_eta[:, e]]) * mu_at_minus_s[None, :]).sum(axis=1)
    return out


# ------------------------------------------------------------- discrete case

@dataclass(frozen=True, eq=False)
class GaussianWindowDraw:
    seed: int
    values: np.ndarray


def spiral_enumeration(g: GroupSpec, radius: int) -> list[tuple]:
    """Elements with integer-line coordinates in ``[-radius, radius]``, in spiral order.

    Shells are ordered by the largest coordinate magnitude; inside a shell the
    canonical element order applies.  On ``Z`` this is 0, 1, -1, 2, -2, ...
    """
    ranges = []
    for f in g.factors:
        if isinstance(f, IntegerLine):
            ranges.append(range(-radius, radius + 1))
        elif hasattr(f, "order"):
            ranges.append(range(f.order))
        else:
            raise GroupError("spiral enumeration needs a discrete group")
    els = list(itertools.product(*ranges))
    return sorted(els, key=lambda x: (max(abs(c) for c in x), element_key(x)))


def column_arguments(g: GroupSpec, rows: Sequence, shifts: Sequence, y: Sequence) -> set:
    """Window arguments ``y_k - y`` and ``y_k - s - y`` used by a column translated by ``y``."""
    out = set()
    for yk in rows:
        base = group_sub(g, yk, y)
        out.add(base)
        for s in shifts:
            out.add(group_sub(g, base, s))
    return out


def select_translation_indices(g: GroupSpec, enumeration: Sequence, n: int,
                               shifts: Sequence) -> list[int]:
    """Greedily choose ``n`` indices ``j`` into ``enumeration``.

    Rows are the first ``n`` enumerated points.  A candidate ``j`` is accepted
    when every window argument its column uses lies in the enumeration and
    none is shared with a previously accepted column, for all shifts at once.
    """
    enumeration = [g.element(x) for x in enumeration]
    if n < 1:
        raise ValueError("n must be positive")
    if len(enumeration) < n:
        raise ValueError(f"enumeration has {len(enumeration)} points, need at least {n}")
    if len(set(enumeration)) != len(enumeration):
        raise ValueError("enumeration points must be distinct")
    rows = enumeration[:n]
    shifts = [g.element(s) for s in shifts]
    universe = set(enumeration)
    used: set = set()
    chosen: list[int] = []
    for j, y in enumerate(enumeration):
        args = column_arguments(g, rows, shifts, y)
        if not args <= universe or args & used:
            continue
        chosen.append(j)
        used |= args
        if len(chosen) == n:
            return chosen
    raise ValueError(f"enumeration exhausted after {len(chosen)} of {n} indices; enlarge it")


def gaussian_discrete_window(g: GroupSpec, enumeration: Sequence, seed: int,
                             weights: HaarWeights | None = None) -> Signal:
    """``g(y_k) = gamma_k`` with i.i.d. standard normal ``gamma_k``; counting measure."""
    enumeration = [g.element(x) for x in enumeration]
    draw = GaussianWindowDraw(int(seed), np.random.default_rng(int(seed)).standard_normal(len(enumeration)))
    if weights is None:
        weights = haar_weights(g)
    meta = {"construction": "gaussian", "seed": int(seed), "enumeration_size": len(enumeration)}
    return Signal(g, tuple(enumeration), draw.values.astype(complex), weights, meta)


def a_matrix(g: Signal, enumeration: Sequence, indices: Sequence[int], s: Sequence, n: int) -> np.ndarray:
    """``A^s_N[k, l] = (T_{y_{j_l}} g_s)(y_k)`` for ``k, l < n``."""
    rows = list(enumeration[:n])
    cols = [enumeration[j] for j in indices[:n]]
    return translate_autocorr_values(g, s, cols, rows).T


# ------------------------------------------------------- averaging diagnostics

def lln_average(draw: SteinhausDraw, chars: CosetSection, g: GroupSpec, mu, eta, eta0=None,
                ns: Sequence[int] = (100, 1000, 20000)) -> np.ndarray:
    """Running means ``(1/N) sum_k`` of the products appearing in the averaging lemmas.

    Without ``eta0``: ``lam[k, mu] conj(lam[k, mu - eta])``.  With ``eta0``:
    ``lam[k, mu] conj(lam[k, mu - eta]) conj(lam[k, 0]) lam[k, -eta0]``.
    Returns the mean at each ``N`` in ``ns``.
    """
    gd = g.dual()
    i_mu = chars.index_of(mu)
    i_me = chars.index_of(group_sub(gd, mu, eta))
    lam = draw.lam
    terms = lam[:, i_mu] * np.conj(lam[:, i_me])
    if eta0 is not None:
        if chars.index_of(eta0) == chars.index_of(gd.zero()):
            raise ValueError("eta0 must be a non-trivial character")
        terms = terms * np.conj(lam[:, chars.index_of(gd.zero())]) * lam[:, chars.index_of(group_neg(gd, eta0))]
    if max(ns) > len(terms):
        raise ValueError(f"draw has {len(terms)} cosets, need {max(ns)}")
    csum = np.cumsum(terms)
    return np.array([csum[n - 1] / n for n in ns])


def lln_limit(coeffs: CoeffProfile, chars: CosetSection, g: GroupSpec, mu, eta, eta0=None) -> float:
    """Almost-sure limit of :func:`lln_average`."""
    gd = g.dual()
    zero = chars.index_of(gd.zero())
    reps = chars.representatives
    if eta0 is None:
        if chars.index_of(eta) == zero:
            return coeffs.a[reps[chars.index_of(mu)]] ** 2
        return 0.0
    if chars.index_of(mu) == zero and chars.index_of(eta) == chars.index_of(eta0):
        return coeffs.a0 ** 2 * coeffs.a[reps[chars.index_of(group_neg(gd, eta0))]] ** 2
    return 0.0
