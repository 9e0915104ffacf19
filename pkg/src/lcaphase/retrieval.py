"""Recover a signal up to global phase from phaseless STFT samples.

The pipeline has three inverse stages:

1. ``interpolate``: for each translate ``x`` in Lambda, the sampled
   spectrogram ``|V_g f(x, .)|^2`` is a trigonometric polynomial with
   frequencies in ``K - K``; solve for its coefficients ``A_x(s)`` from the
   samples on Gamma.
2. ``relations``: ``A_x(s) = sum_t F_s(t) (T_x g_s)(t)`` with
   ``F_s(t) = f(t) conj(f(t - s))``; invert ``C(g, s)`` for every shift.
3. ``assemble``: ``M[t, t'] = F_{t - t'}(t)`` equals ``f f^*``; take the
   leading eigenpair.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .groups import character_matrix, difference_set, group_sub
from .harmonic import Signal
from .stft import PhaselessGrid, cgs_matrix, stft_magnitudes

__all__ = [
    "RetrievalError", "AutocorrCoeffs", "RelationFunctions", "RetrievalProblem", "RetrievalReport",
    "forward_phaseless", "autocorr_from_magnitudes", "solve_relations", "assemble_rank_one",
    "align_and_score", "end_to_end", "LSTSQ_RCOND", "add_magnitude_noise",
]

LSTSQ_RCOND = 1e-10


class RetrievalError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str, **diagnostics):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message
        self.diagnostics = diagnostics


def _solve(mat: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, int, float]:
    """Truncated-SVD least squares. Returns (solution, rank, condition)."""
    u, sv, vh = np.linalg.svd(mat, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        return np.zeros((mat.shape[1],) + rhs.shape[1:], dtype=complex), 0, math.inf
    keep = sv > LSTSQ_RCOND * sv[0]
    rank = int(keep.sum())
    cond = float(sv[0] / sv[-1]) if rank == mat.shape[1] else math.inf
    coef = (u[:, keep].conj().T @ rhs) / (sv[keep][:, None] if rhs.ndim == 2 else sv[keep])
    return vh[keep].conj().T @ coef, rank, cond


def forward_phaseless(f: Signal, g: Signal, lam: Sequence, gam: Sequence) -> PhaselessGrid:
    """``|V_g f|`` on ``lam x gam``."""
    return PhaselessGrid(f.group, f.point_mass, tuple(lam), tuple(gam), stft_magnitudes(f, g, lam, gam))


def add_magnitude_noise(grid: PhaselessGrid, level: float, seed: int) -> PhaselessGrid:
    """Additive Gaussian noise on the magnitudes, clipped at zero."""
    if level == 0:
        return grid
    noise = np.random.default_rng(seed).standard_normal(grid.magnitudes.shape)
    mags = np.clip(grid.magnitudes + level * noise, 0.0, None)
    return PhaselessGrid(grid.group, grid.point_mass, grid.lam, grid.gam, mags)


@dataclass(frozen=True, eq=False)
class AutocorrCoeffs:
    """``values[i, j] = A_{lam_i}(k_minus_k[j])``."""

    lam: tuple
    k_minus_k: tuple
    values: np.ndarray
    condition: float


def autocorr_from_magnitudes(grid: PhaselessGrid, k_minus_k: Sequence) -> AutocorrCoeffs:
    """Fit ``|V_g f(x, gamma)|^2 = w^2 sum_s A_x(s) conj(<s, gamma>)`` over Gamma."""
    grp = grid.group
    kk = [grp.element(s) for s in k_minus_k]
    if len(grid.gam) < len(kk):
        raise RetrievalError("interpolate", f"{len(grid.gam)} frequency samples cannot determine "
                             f"{len(kk)} coefficients; Gamma is not a uniqueness set for PW_(K-K)",
                             n_gamma=len(grid.gam), n_shifts=len(kk))
    basis = grid.point_mass ** 2 * np.conj(character_matrix(grp, kk, grid.gam)).T  # |gam| x |K-K|
    q = grid.magnitudes.T ** 2  # |gam| x |lam|
    sol, rank, cond = _solve(basis, q.astype(complex))
    if rank < len(kk):
        raise RetrievalError("interpolate", f"sampling matrix has rank {rank} < {len(kk)}; "
                             "Gamma is not a uniqueness set for PW_(K-K)", rank=rank, condition=cond)
    return AutocorrCoeffs(grid.lam, tuple(kk), sol.T, cond)


@dataclass(frozen=True, eq=False)
class RelationFunctions:
    """``F[s]`` approximates ``t -> f(t) conj(f(t - s))`` on ``K & (s + K)``."""

    functions: dict
    conditions: dict

    def __getitem__(self, s):
        return self.functions[tuple(s)]

    def get(self, s, group=None):
        s = tuple(s)
        if s in self.functions:
            return self.functions[s]
        any_f = next(iter(self.functions.values()))
        return Signal.zeros(any_f.group, (), any_f.weights)


def solve_relations(acoeffs: AutocorrCoeffs, g: Signal, k_set: Sequence, lam: Sequence) -> RelationFunctions:
    """Invert ``C(g, s)`` for every shift ``s`` in ``K - K``.

    ``A_x(s)`` pairs ``F_s`` with ``T_x g_s`` itself, so the system matrix is
    ``conj(C(g, s)) / w``.
    """
    grp = g.group
    k_set = [grp.element(t) for t in k_set]
    lam = [grp.element(x) for x in lam]
    if tuple(lam) != tuple(acoeffs.lam):
        raise RetrievalError("relations", "Lambda differs from the one used for the magnitudes")
    kset = set(k_set)
    functions, conds = {}, {}
    for j, s in enumerate(acoeffs.k_minus_k):
        cols = [t for t in k_set if group_sub(grp, t, s) in kset]
        mat = np.conj(cgs_matrix(g, s, cols, lam)) / g.point_mass
        sol, rank, cond = _solve(mat, acoeffs.values[:, j])
        if rank < len(cols):
            raise RetrievalError("relations", f"C(g, s) is not injective for s={s} "
                                 f"(rank {rank} < {len(cols)})", shift=s, rank=rank, condition=cond)
        functions[s] = Signal(grp, tuple(cols), sol, g.weights)
        conds[s] = cond
    return RelationFunctions(functions, conds)


def assemble_rank_one(rel: RelationFunctions, k_set: Sequence) -> tuple[Signal, float, float]:
    """Leading eigenpair of ``M[t, t'] = F_{t - t'}(t)``.

    Returns ``(f_tilde, residual, hermitian_defect)``.  ``f_tilde`` is scaled
    by the square root of the top eigenvalue and rotated so that its
    largest-modulus entry is real positive.
    """
    any_f = next(iter(rel.functions.values()))
    grp = any_f.group
    k_set = [grp.element(t) for t in k_set]
    n = len(k_set)
    M = np.zeros((n, n), dtype=complex)
    for a, t in enumerate(k_set):
        for b, u in enumerate(k_set):
            M[a, b] = rel.get(group_sub(grp, t, u))(t)
    norm = np.linalg.norm(M)
    if norm <= np.finfo(float).tiny:
        raise RetrievalError("assemble", "signal absent: relation matrix vanishes")
    defect = float(np.linalg.norm(M - M.conj().T) / norm)
    H = (M + M.conj().T) / 2
    w, v = np.linalg.eigh(H)
    sigma, vec = w[-1], v[:, -1]
    if sigma <= 0:
        raise RetrievalError("assemble", "signal absent: no positive eigenvalue", top_eigenvalue=float(sigma))
    ft = math.sqrt(sigma) * vec
    k = int(np.argmax(np.abs(ft)))
    ft = ft * (abs(ft[k]) / ft[k])
    ft[k] = abs(ft[k])
    residual = float(np.linalg.norm(H - np.outer(ft, ft.conj())) / np.linalg.norm(H))
    return Signal(grp, tuple(k_set), ft, any_f.weights), residual, defect


def align_and_score(f: Signal, f_tilde: Signal) -> float:
    """``min_{|c| = 1} ||f - c f_tilde|| / ||f||``."""
    pts = list(dict.fromkeys(f.support + f_tilde.support))
    a, b = f.at(pts), f_tilde.at(pts)
    nf = np.linalg.norm(a)
    if nf == 0:
        raise ValueError("reference signal is zero")
    ip = np.vdot(b, a)  # sum a * conj(b)
    c = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.linalg.norm(a - c * b) / nf)


@dataclass(frozen=True, eq=False)
class RetrievalProblem:
    """Everything needed for one simulated measurement and reconstruction."""

    f: Signal
    window: Signal
    k_set: tuple
    lam: tuple
    gam: tuple
    noise: float = 0.0
    noise_seed: int = 0
    seed: int | None = None


def _fmt_elem(x) -> str:
    return "(" + ",".join(str(c) for c in x) + ")"


@dataclass
class RetrievalReport:
    seed: int | None
    ok: bool
    stage: str | None = None
    error: str | None = None
    noise: float = 0.0
    interpolation_condition: float = math.nan
    relation_conditions: dict = field(default_factory=dict)
    worst_condition: float = math.nan
    residual: float = math.nan
    hermitian_defect: float = math.nan
    recovery_error: float = math.nan
    timings: dict = field(default_factory=dict)
    f_tilde: Signal | None = None

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "seed": self.seed, "ok": self.ok, "stage": self.stage, "error": self.error,
            "noise": self.noise, "interpolation_condition": self.interpolation_condition,
            "relation_conditions": {_fmt_elem(s): c for s, c in self.relation_conditions.items()},
            "worst_condition": self.worst_condition, "residual": self.residual,
            "hermitian_defect": self.hermitian_defect, "recovery_error": self.recovery_error,
        }
        if timings:
            d["timings"] = dict(self.timings)
        return d


def end_to_end(problem: RetrievalProblem, dump: dict | None = None) -> RetrievalReport:
    """Measure ``|V_g f|`` on ``Lambda x Gamma`` and run the three inverse stages.

    Stage failures are returned in the report (``ok=False``, ``stage`` set).
    Pass a dict as ``dump`` to collect the intermediate matrices.
    """
    rep = RetrievalReport(seed=problem.seed, ok=False, noise=problem.noise)
    grp = problem.f.group
    k_set = [grp.element(t) for t in problem.k_set]
    kk = difference_set(grp, k_set)
    stage = "forward"
    try:
        t0 = time.perf_counter()
        grid = forward_phaseless(problem.f, problem.window, problem.lam, problem.gam)
        grid = add_magnitude_noise(grid, problem.noise, problem.noise_seed)
        t1 = time.perf_counter()
        stage = "interpolate"
        ac = autocorr_from_magnitudes(grid, kk)
        rep.interpolation_condition = ac.condition
        t2 = time.perf_counter()
        stage = "relations"
        rel = solve_relations(ac, problem.window, k_set, problem.lam)
        rep.relation_conditions = dict(rel.conditions)
        t3 = time.perf_counter()
        stage = "assemble"
        ft, residual, defect = assemble_rank_one(rel, k_set)
        t4 = time.perf_counter()
        rep.f_tilde, rep.residual, rep.hermitian_defect = ft, residual, defect
        rep.worst_condition = max([ac.condition, *rel.conditions.values()])
        stage = "score"
        rep.recovery_error = align_and_score(problem.f, ft)
        rep.timings = {"forward": t1 - t0, "interpolate": t2 - t1, "relations": t3 - t2,
                       "assemble": t4 - t3}
        rep.ok = True
        if dump is not None:
            dump["magnitudes"] = grid.magnitudes
            dump["autocorr"] = ac.values
            dump["relation_matrix"] = np.array([[rel.get(group_sub(grp, t, u))(t) for u in k_set]
                                                for t in k_set])
    except RetrievalError as e:
        rep.stage, rep.error = e.stage, e.message
    except ValueError as e:
        rep.stage, rep.error = stage, str(e)
    return rep
