"""Translation, modulation, the STFT and the operators C(g, s)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .groups import GroupSpec, character_matrix, group_op, group_sub
from .harmonic import Signal

__all__ = [
    "PhaselessGrid", "WindowAutocorr", "translate", "modulate", "stft", "stft_grid", "stft_magnitudes",
    "window_autocorr", "translate_autocorr_values", "cgs_matrix",
]


def translate(f: Signal, x: Sequence) -> Signal:
    """``(T_x f)(y) = f(y - x)``."""
    g = f.group
    return Signal(g, tuple(group_op(g, t, x) for t in f.support), f.values, f.weights)


def modulate(f: Signal, xi: Sequence) -> Signal:
    """``(M_xi f)(y) = <y, xi> f(y)``."""
    chars = character_matrix(f.group, f.support, [xi])[:, 0]
    return f.with_values(chars * f.values)


def _check_compatible(f: Signal, g: Signal):
    if f.group != g.group:
        raise ValueError(f"signals live on different groups: {f.group} vs {g.group}")
    if not np.isclose(f.point_mass, g.point_mass, rtol=1e-12, atol=0):
        raise ValueError("signal and window carry different Haar weights")


def stft_grid(f: Signal, g: Signal, lam: Sequence[Sequence], gam: Sequence[Sequence]) -> np.ndarray:
    """``V_g f`` on ``lam x gam`` as a ``|lam| x |gam|`` array."""
    _check_compatible(f, g)
    grp = f.group
    chars = np.conj(character_matrix(grp, f.support, gam))  # |supp f| x |gam|
    out = np.empty((len(lam), len(gam)), dtype=complex)
    for i, x in enumerate(lam):
        shifted = g.at(group_sub(grp, t, x) for t in f.support)
        out[i] = (f.values * np.conj(shifted)) @ chars
    return f.point_mass * out


def stft_magnitudes(f: Signal, g: Signal, lam: Sequence[Sequence], gam: Sequence[Sequence]) -> np.ndarray:
    """``|V_g f|`` on ``lam x gam``, bit-identical for ``f`` and ``i f``.

    The sums run in real arithmetic on elementwise products, so multiplying
    ``f`` by a power of ``i`` only swaps and negates intermediate terms.
    """
    _check_compatible(f, g)
    grp = f.group
    chars = np.conj(character_matrix(grp, f.support, gam))
    a, b = f.values.real[:, None], f.values.imag[:, None]
    out = np.empty((len(lam), len(gam)))
    for i, x in enumerate(lam):
        k = np.conj(g.at(group_sub(grp, t, x) for t in f.support))[:, None] * chars
        c, d = k.real, k.imag
        re = np.sum(a * c - b * d, axis=0)
        im = np.sum(a * d + b * c, axis=0)
        out[i] = np.sqrt(re * re + im * im)
    return f.point_mass * out


def stft(f: Signal, g: Signal, points: Sequence[tuple[Sequence, Sequence]]) -> np.ndarray:
    """``V_g f(x, xi) = <f, M_xi T_x g>`` at each ``(x, xi)`` pair."""
    _check_compatible(f, g)
    out = np.empty(len(points), dtype=complex)
    for k, (x, xi) in enumerate(points):
        out[k] = stft_grid(f, g, [x], [xi])[0, 0]
    return out


@dataclass(frozen=True, eq=False)
class WindowAutocorr:
    """``g_s(y) = conj(g(y)) g(y - s)``, stored as a Signal on ``supp g``."""

    shift: tuple
    signal: Signal

    def __call__(self, y):
        return self.signal(y)


def window_autocorr(g: Signal, s: Sequence) -> WindowAutocorr:
    grp = g.group
    s = grp.element(s)
    vals = np.conj(g.values) * g.at(group_sub(grp, y, s) for y in g.support)
    return WindowAutocorr(s, g.with_values(vals))


def translate_autocorr_values(g: Signal, s: Sequence, lam: Sequence[Sequence],
                              points: Sequence[Sequence]) -> np.ndarray:
    """``(T_x g_s)(t)`` with rows indexed by ``x`` in ``lam`` and columns by ``t``."""
    grp = g.group
    s = grp.element(s)
    out = np.empty((len(lam), len(points)), dtype=complex)
    for i, x in enumerate(lam):
        base = [group_sub(grp, t, x) for t in points]
        out[i] = np.conj(g.at(base)) * g.at(group_sub(grp, y, s) for y in base)
    return out


def cgs_matrix(g: Signal, s: Sequence, k_set: Sequence[Sequence], lam: Sequence[Sequence]) -> np.ndarray:
    """Matrix of ``h -> (int_K h conj(T_x g_s) dm)_x``: rows ``lam``, columns ``k_set``."""
    if not len(lam) or not len(k_set):
        raise ValueError("C(g, s) needs non-empty Lambda and K")
    return g.point_mass * np.conj(translate_autocorr_values(g, s, lam, k_set))


@dataclass(frozen=True, eq=False)
class PhaselessGrid:
    """``|V_g f|`` sampled on ``lam x gam``; ``magnitudes`` has shape ``(|lam|, |gam|)``."""

    group: GroupSpec
    point_mass: float
    lam: tuple
    gam: tuple
    magnitudes: np.ndarray

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=float)
        if mags.shape != (len(self.lam), len(self.gam)):
            raise ValueError(f"magnitudes shape {mags.shape} does not match grid "
                             f"{len(self.lam)} x {len(self.gam)}")
        if np.any(mags < 0) or not np.all(np.isfinite(mags)):
            raise ValueError("magnitudes must be finite and nonnegative")
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "lam", tuple(map(tuple, self.lam)))
        object.__setattr__(self, "gam", tuple(map(tuple, self.gam)))

    def to_csv(self) -> str:
        r = self.group.rank
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"lambda_{j}" for j in range(r)] + [f"gamma_{j}" for j in range(r)] + ["magnitude"])
        for i, x in enumerate(self.lam):
            for k, xi in enumerate(self.gam):
                w.writerow([str(c) for c in x] + [str(c) for c in xi] + [repr(float(self.magnitudes[i, k]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, group: GroupSpec, point_mass: float) -> PhaselessGrid:
        rows = list(csv.reader(io.StringIO(text)))
        r = group.rank
        gd = group.dual()
        lam, gam, vals = [], [], {}
        for row in rows[1:]:
            x = group.element(int(c) for c in row[:r])
            xi = gd.element(Fraction(c) for c in row[r:2 * r])
            if x not in lam:
                lam.append(x)
            if xi not in gam:
                gam.append(xi)
            vals[x, xi] = float(row[-1])
        mags = np.array([[vals[x, xi] for xi in gam] for x in lam])
        return cls(group, point_mass, tuple(lam), tuple(gam), mags)
