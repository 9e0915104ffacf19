"""Experiment configuration (TOML) and construction of retrieval problems.

Grammar, by table::

    [group]     factors = ["Z/4", "Z/9"]          # "Z/n", "Z"
                subgroup = [[2, 0], [0, 3]]       # generators of the designated H
                chain = [[[2, 0]], [[1, 0]]]      # optional: generator lists, increasing
    [support]   K = "H" | [[0, 0], [2, 3], ...]
    [window]    kind = "steinhaus" | "gaussian"
                coeffs = "default" | {"0,0" = 1.0, "1,0" = 0.3, ...}
                radius = 150                      # gaussian: spiral enumeration radius
                translates = 11                   # gaussian: N (default covers K and K-K)
    [sampling]  lambda = "auto-section" | "auto-select" | [[...], ...]
                gamma = "auto-section" | "auto-greedy" | "auto-chain" | [[...], ...]
    [signal]    scale = 1.0
    [run]       seeds = {start = 0, count = 100} | [0, 1, 2]
                noise = [0.0]
                threshold = 1e-6
                max_condition = 1e6
    [verify]    drop = 0                          # drop the last `drop` Gamma points
    [lln]       ns = [100, 1000, 20000]
                cases = "all" | [{mu = [0, 0], eta = [1, 0], eta0 = [1, 0]}, ...]
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import tomli

from .groups import (
    GroupError, GroupSpec, SubgroupData, Torus, annihilator, coset_section, difference_set, haar_weights,
    minimal_chain_member, parse_group, subgroup_closure,
)
from .harmonic import Signal
from .retrieval import RetrievalProblem
from .sets import chain_uniqueness, greedy_uniqueness_compact, section_uniqueness
from .windows import (
    CoeffProfile, default_coeffs, dual_quotient, gaussian_discrete_window, select_translation_indices,
    spiral_enumeration, steinhaus_window,
)

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "Setup", "build_setup",
           "build_problem", "builtin_configs"]


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str, line: int | None = None):
        where = f" (line {line})" if line else ""
        super().__init__(f"config field '{field}'{where}: {message}")
        self.field = field
        self.message = message
        self.line = line

    def record(self) -> dict:
        return {"error": "config", "field": self.field, "message": self.message, "line": self.line}


@dataclass
class ExperimentConfig:
    raw: dict
    group: GroupSpec
    subgroup: SubgroupData
    chain: list | None
    k_set: list
    window: str
    coeffs: Any
    radius: int
    translates: int | None
    lambda_mode: Any
    gamma_mode: Any
    scale: float
    seeds: list
    noise: list
    threshold: float
    max_condition: float
    drop: int = 0
    lln_ns: list = field(default_factory=lambda: [100, 1000, 20000])
    lln_cases: Any = "all"

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_seeds(self, seeds: list[int]) -> ExperimentConfig:
        raw = json.loads(json.dumps(self.raw, default=str))
        raw.setdefault("run", {})["seeds"] = list(seeds)
        return parse_config(raw)


def builtin_configs() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("lcaphase.configs").iterdir()
                  if p.name.endswith(".toml"))


def load_config(path: str | Path) -> ExperimentConfig:
    """Load ``path``, or a bundled config given as ``builtin:<name>``."""
    path = str(path)
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        res = resources.files("lcaphase.configs") / f"{name}.toml"
        if not res.is_file():
            raise ConfigError("config", f"no bundled config {name!r}; have {builtin_configs()}")
        text = res.read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e.strerror}") from None
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError("syntax", str(e), getattr(e, "lineno", None)) from None
    return parse_config(raw)


def _elem(g: GroupSpec, value, fld: str) -> tuple:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(fld, f"expected a coordinate list, got {value!r}")
    try:
        return g.element(Fraction(c) if isinstance(c, str) else c for c in value)
    except (GroupError, ValueError, ZeroDivisionError) as e:
        raise ConfigError(fld, str(e)) from None


def _elems(g: GroupSpec, values, fld: str) -> list:
    if not isinstance(values, list) or not values:
        raise ConfigError(fld, "expected a non-empty list of coordinate lists")
    return [_elem(g, v, f"{fld}[{i}]") for i, v in enumerate(values)]


def _seeds(value) -> list[int]:
    if isinstance(value, dict):
        try:
            start, count = int(value.get("start", 0)), int(value["count"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("run.seeds", "expected {start = int, count = int}") from None
        seeds = list(range(start, start + count))
    elif isinstance(value, list) and all(isinstance(s, int) for s in value):
        seeds = list(value)
    else:
        raise ConfigError("run.seeds", f"expected a list of ints or {{start, count}}, got {value!r}")
    if not seeds:
        raise ConfigError("run.seeds", "seed list is empty")
    return seeds


def parse_config(raw: dict) -> ExperimentConfig:
    grp_t = raw.get("group")
    if not isinstance(grp_t, dict) or "factors" not in grp_t:
        raise ConfigError("group.factors", "missing")
    try:
        g = parse_group(grp_t["factors"])
    except GroupError as e:
        raise ConfigError("group.factors", str(e)) from None

    gens = grp_t.get("subgroup", [])
    h_gens = [_elem(g, v, f"group.subgroup[{i}]") for i, v in enumerate(gens)]
    try:
        h = subgroup_closure(g, h_gens)
        haar_weights(g, h)
    except GroupError as e:
        raise ConfigError("group.subgroup", str(e)) from None

    chain = None
    if "chain" in grp_t:
        chain = []
        for i, member in enumerate(grp_t["chain"]):
            try:
                chain.append(subgroup_closure(g, [_elem(g, v, f"group.chain[{i}]") for v in member]))
            except GroupError as e:
                raise ConfigError(f"group.chain[{i}]", str(e)) from None
        for i, (a, b) in enumerate(zip(chain, chain[1:])):
            if not a.issubset(b):
                raise ConfigError(f"group.chain[{i + 1}]", "chain is not increasing")

    sup = raw.get("support", {})
    kval = sup.get("K", "H")
    if kval == "H":
        k_set = list(h.elements)
    else:
        k_set = _elems(g, kval, "support.K")
        if len(set(k_set)) != len(k_set):
            raise ConfigError("support.K", "duplicate points")

    win = raw.get("window", {})
    kind = win.get("kind", "steinhaus")
    if kind not in ("steinhaus", "gaussian"):
        raise ConfigError("window.kind", f"unknown window {kind!r}")
    coeffs = win.get("coeffs", "default")
    if coeffs != "default":
        if not isinstance(coeffs, dict):
            raise ConfigError("window.coeffs", "expected 'default' or a table")
        try:
            coeffs = CoeffProfile({tuple(int(c) for c in k.split(",")): v for k, v in coeffs.items()})
        except ValueError as e:
            raise ConfigError("window.coeffs", str(e)) from None
    if kind == "steinhaus" and not g.cyclic_axes():
        raise ConfigError("window.kind", "steinhaus windows need a cyclic factor carrying H")

    samp = raw.get("sampling", {})
    lam_mode = samp.get("lambda", "auto-select" if kind == "gaussian" else "auto-section")
    if isinstance(lam_mode, list):
        lam_mode = _elems(g, lam_mode, "sampling.lambda")
    elif lam_mode not in ("auto-section", "auto-select"):
        raise ConfigError("sampling.lambda", f"unknown mode {lam_mode!r}")
    gam_mode = samp.get("gamma", "auto-greedy" if kind == "gaussian" else "auto-section")
    if isinstance(gam_mode, list):
        gam_mode = _elems(g.dual(), gam_mode, "sampling.gamma")
    elif gam_mode not in ("auto-section", "auto-greedy", "auto-chain"):
        raise ConfigError("sampling.gamma", f"unknown mode {gam_mode!r}")
    if gam_mode == "auto-chain" and chain is None:
        raise ConfigError("sampling.gamma", "auto-chain needs group.chain")

    run = raw.get("run", {})
    noise = run.get("noise", [0.0])
    if not isinstance(noise, list) or not all(isinstance(x, (int, float)) and x >= 0 for x in noise):
        raise ConfigError("run.noise", "expected a list of nonnegative numbers")
    lln = raw.get("lln", {})
    return ExperimentConfig(
        raw=raw, group=g, subgroup=h, chain=chain, k_set=k_set, window=kind, coeffs=coeffs,
        radius=int(win.get("radius", 150)), translates=win.get("translates"),
        lambda_mode=lam_mode, gamma_mode=gam_mode, scale=float(raw.get("signal", {}).get("scale", 1.0)),
        seeds=_seeds(run.get("seeds", {"start": 0, "count": 1})), noise=[float(x) for x in noise],
        threshold=float(run.get("threshold", 1e-6)), max_condition=float(run.get("max_condition", 1e6)),
        drop=int(raw.get("verify", {}).get("drop", 0)),
        lln_ns=[int(n) for n in lln.get("ns", [100, 1000, 20000])], lln_cases=lln.get("cases", "all"),
    )


@dataclass
class Setup:
    """Seed-independent parts of an experiment."""

    cfg: ExperimentConfig
    weights: Any
    window_subgroup: SubgroupData | None
    k_minus_k: list
    lam: list
    gam: list
    coeffs: CoeffProfile | None = None
    enumeration: list | None = None
    section: Any = None


def build_setup(cfg: ExperimentConfig) -> Setup:
    g = cfg.group
    weights = haar_weights(g, cfg.subgroup)
    kk = difference_set(g, cfg.k_set)
    st = Setup(cfg, weights, None, kk, [], [])

    if cfg.window == "steinhaus":
        hw = cfg.subgroup
        if cfg.chain is not None:
            try:
                hw = minimal_chain_member(cfg.chain, list(cfg.k_set) + kk)
            except GroupError as e:
                raise ConfigError("group.chain", str(e)) from None
        if not all(hw.contains(t) for t in cfg.k_set):
            raise ConfigError("support.K", "K must lie in the window subgroup H")
        st.window_subgroup = hw
        st.coeffs = cfg.coeffs if cfg.coeffs != "default" else default_coeffs(
            dual_quotient(g, hw).representatives)
        if cfg.lambda_mode == "auto-section":
            try:
                st.section = coset_section(g, hw)
            except GroupError as e:
                raise ConfigError("sampling.lambda", f"{e}; give Lambda explicitly") from None
            st.lam = list(st.section.representatives)
        elif cfg.lambda_mode == "auto-select":
            raise ConfigError("sampling.lambda", "auto-select applies to gaussian windows")
        else:
            st.lam = list(cfg.lambda_mode)
            st.section = st.lam
    else:
        if any(isinstance(f, Torus) for f in g.factors):
            raise ConfigError("window.kind", "gaussian windows need a discrete group")
        enum = spiral_enumeration(g, cfg.radius)
        st.enumeration = enum
        need = set(cfg.k_set) | set(kk)
        n = cfg.translates
        if n is None:
            n = next((i + 1 for i in range(len(enum)) if need <= set(enum[:i + 1])), None)
            if n is None:
                raise ConfigError("window.radius", "enumeration does not cover K and K-K")
        if cfg.lambda_mode == "auto-select":
            try:
                idx = select_translation_indices(g, enum, int(n), enum[:int(n)])
            except ValueError as e:
                raise ConfigError("window.radius", str(e)) from None
            st.lam = [enum[j] for j in idx]
        elif cfg.lambda_mode == "auto-section":
            raise ConfigError("sampling.lambda", "auto-section applies to steinhaus windows")
        else:
            st.lam = list(cfg.lambda_mode)

    gd = g.dual()
    if cfg.gamma_mode == "auto-section":
        hs = st.window_subgroup if st.window_subgroup is not None else cfg.subgroup
        try:
            st.gam = section_uniqueness(gd, annihilator(g, hs))
        except GroupError as e:
            raise ConfigError("sampling.gamma", str(e)) from None
    elif cfg.gamma_mode == "auto-chain":
        try:
            st.gam = chain_uniqueness(cfg.chain, kk)
        except GroupError as e:
            raise ConfigError("sampling.gamma", str(e)) from None
    elif cfg.gamma_mode == "auto-greedy":
        try:
            st.gam = greedy_uniqueness_compact(gd, kk)
        except (GroupError, RuntimeError) as e:
            raise ConfigError("sampling.gamma", str(e)) from None
    else:
        st.gam = list(cfg.gamma_mode)
    if cfg.drop:
        st.gam = st.gam[:-cfg.drop]
    return st


def make_window(st: Setup, seed: int) -> Signal:
    cfg = st.cfg
    if cfg.window == "steinhaus":
        return steinhaus_window(cfg.group, st.window_subgroup, st.section, st.coeffs, seed, st.weights)
    return gaussian_discrete_window(cfg.group, st.enumeration, seed, st.weights)


def make_signal(st: Setup, seed: int) -> Signal:
    """Complex Gaussian test signal on K, seeded independently of the window."""
    rng = np.random.default_rng([int(seed), 1])
    n = len(st.cfg.k_set)
    vals = st.cfg.scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return Signal(st.cfg.group, tuple(st.cfg.k_set), vals, st.weights)


def build_problem(st: Setup, seed: int, noise: float = 0.0) -> RetrievalProblem:
    return RetrievalProblem(make_signal(st, seed), make_window(st, seed), tuple(st.cfg.k_set),
                            tuple(st.lam), tuple(st.gam), noise=noise, noise_seed=int(seed) + 2**20,
                            seed=seed)
