import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lcaphase.groups import (
    GroupError, character_matrix, coset_section, group_sub, parse_group, subgroup_closure,
)
from lcaphase.stft import translate_autocorr_values
from lcaphase.windows import (
    CoeffProfile, a_matrix, column_arguments, default_coeffs, dual_quotient, gaussian_discrete_window,
    lln_average, lln_limit, select_translation_indices, spiral_enumeration, steinhaus_draw,
    steinhaus_window, translate_expansion_coeffs,
)


def test_default_coeffs_examples():
    two = default_coeffs([(0,), (1,)])
    assert two.a == {(0,): 1.0, (1,): 0.5}
    assert default_coeffs([(0,)]).a == {(0,): 1.0}


@given(st.integers(1, 40))
def test_default_coeffs_dominance(m):
    prof = default_coeffs([(k,) for k in range(m)])
    assert prof.a0 ** 2 > sum(v * v for k, v in prof.a.items() if k != (0,))


def test_coeff_profile_validation():
    with pytest.raises(ValueError):
        CoeffProfile({(0,): 1.0, (1,): 1.0})
    with pytest.raises(ValueError):
        CoeffProfile({(1,): 0.1})
    with pytest.raises(ValueError):
        CoeffProfile({(0,): 1.0, (1,): -0.1})
    with pytest.raises(GroupError):
        CoeffProfile({(0,): 1.0}).vector([(0,), (1,)])


def test_dual_quotient_is_characters_of_h(z4z9_h):
    g, h, w = z4z9_h
    chars = dual_quotient(g, h)
    assert len(chars) == len(h)


def _z4z9_window(seed):
    g = parse_group("Z/4 x Z/9")
    h = subgroup_closure(g, [(2, 0), (0, 3)])
    chars = dual_quotient(g, h).representatives
    return g, h, steinhaus_window(g, h, coset_section(g, h), default_coeffs(chars), seed)


def test_steinhaus_support_and_bound():
    g, h, win = _z4z9_window(0)
    assert set(win.support) == set(g.elements())
    assert np.abs(win.values).max() <= sum(default_coeffs(dual_quotient(g, h).representatives).a.values())
    assert win.meta["construction"] == "steinhaus" and win.meta["seed"] == 0


def test_steinhaus_trivial_subgroup_is_unimodular():
    g = parse_group("Z/6")
    h = subgroup_closure(g, [])
    win = steinhaus_window(g, h, coset_section(g, h), default_coeffs([(0,)]), 3)
    np.testing.assert_allclose(np.abs(win.values), 1.0)


def test_steinhaus_determinism():
    a = _z4z9_window(7)[2]
    b = _z4z9_window(7)[2]
    c = _z4z9_window(8)[2]
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values.tobytes() != c.values.tobytes()


def test_steinhaus_draw_counter_layout():
    coeffs = np.array([1.0, 0.5, 0.5])
    short, long = steinhaus_draw(4, coeffs, 5), steinhaus_draw(4, coeffs, 50)
    np.testing.assert_array_equal(short.lam, long.lam[:5])
    np.testing.assert_allclose(np.abs(long.lam), np.broadcast_to(coeffs, (50, 3)))


def test_steinhaus_section_checks():
    g = parse_group("Z/4")
    h = subgroup_closure(g, [(2,)])
    prof = default_coeffs([(0,), (1,)])
    with pytest.raises(GroupError):
        steinhaus_window(g, h, [(0,), (2,)], prof, 0)
    other = coset_section(g, subgroup_closure(g, []))
    with pytest.raises(GroupError):
        steinhaus_window(g, h, other, prof, 0)
    # an explicit non-canonical section is accepted
    win = steinhaus_window(g, h, [(0,), (3,)], prof, 0)
    assert set(win.support) == set(g.elements())


@settings(max_examples=20)
@given(st.integers(0, 10_000), st.sampled_from([(0, 0), (2, 0), (0, 3), (2, 6)]))
def test_translate_expansion(seed, s):
    g, h, win = _z4z9_window(seed)
    chars = dual_quotient(g, h)
    sec = coset_section(g, h)
    draw = steinhaus_draw(seed, default_coeffs(chars.representatives).vector(chars.representatives), len(sec))
    coef = translate_expansion_coeffs(draw, chars, g, s)
    basis = character_matrix(g, h.elements, chars.representatives)  # t in H, eta
    direct = translate_autocorr_values(win, s, sec.representatives, h.elements)
    np.testing.assert_allclose(coef @ basis.T, direct, atol=1e-12)


# ------------------------------------------------------------- discrete case

def test_spiral_enumeration():
    z = parse_group("Z")
    assert spiral_enumeration(z, 3) == [(0,), (1,), (-1,), (2,), (-2,), (3,), (-3,)]
    g = parse_group("Z/2 x Z")
    e = spiral_enumeration(g, 1)
    assert e[0] == (0, 0) and len(e) == 6 == len(set(e))
    assert [max(abs(c) for c in x) for x in e] == sorted(max(abs(c) for c in x) for x in e)
    with pytest.raises(GroupError):
        spiral_enumeration(parse_group("T"), 2)


def _entry_arguments(g, rows, cols, shifts):
    return [[{group_sub(g, yk, y)} | {group_sub(g, group_sub(g, yk, s), y) for s in shifts}
             for yk in rows] for y in cols]


def test_selection_examples():
    z = parse_group("Z")
    enum = spiral_enumeration(z, 150)
    shifts = [(0,), (1,), (-1,)]
    assert select_translation_indices(z, enum, 1, shifts) == [0]
    idx = select_translation_indices(z, enum, 4, shifts)
    assert idx == [0, 11, 12, 23]
    cols = [enum[j] for j in idx]
    per_col = [set().union(*c) for c in _entry_arguments(z, enum[:4], cols, shifts)]
    for a, b in itertools.combinations(per_col, 2):
        assert not a & b


def test_selection_for_retrieval_setup():
    z = parse_group("Z")
    enum = spiral_enumeration(z, 150)
    idx = select_translation_indices(z, enum, 11, enum[:11])
    assert [enum[j][0] for j in idx] == [0, 21, -21, 42, -42, 63, -63, 84, -84, 105, -105]


@settings(max_examples=20)
@given(st.integers(1, 6), st.integers(1, 3))
def test_selection_disjoint_and_inside(n, k):
    z = parse_group("Z")
    enum = spiral_enumeration(z, 120)
    shifts = enum[:k]
    idx = select_translation_indices(z, enum, n, shifts)
    assert len(idx) == n == len(set(idx))
    universe = set(enum)
    args = [column_arguments(z, enum[:n], shifts, enum[j]) for j in idx]
    assert all(a <= universe for a in args)
    for a, b in itertools.combinations(args, 2):
        assert not a & b


def test_selection_errors():
    z = parse_group("Z")
    with pytest.raises(ValueError):
        select_translation_indices(z, spiral_enumeration(z, 3), 5, [(0,)])
    with pytest.raises(ValueError):
        select_translation_indices(z, spiral_enumeration(z, 1), 0, [(0,)])


def test_gaussian_window_real_and_deterministic():
    z = parse_group("Z")
    enum = spiral_enumeration(z, 20)
    a = gaussian_discrete_window(z, enum, 5)
    b = gaussian_discrete_window(z, enum, 5)
    assert a.values.tobytes() == b.values.tobytes()
    assert not np.any(a.values.imag)
    assert a.values.tobytes() != gaussian_discrete_window(z, enum, 6).values.tobytes()


def test_a_matrix_invertible_across_seeds():
    z = parse_group("Z")
    enum = spiral_enumeration(z, 150)
    n = 8
    idx = select_translation_indices(z, enum, n, enum[:n])
    for seed in range(50):
        g = gaussian_discrete_window(z, enum, seed)
        for s in enum[:n]:
            a = a_matrix(g, enum, idx, s, n)
            assert a.shape == (n, n)
            assert np.isfinite(np.linalg.cond(a))
            # entries follow the stated formula for real windows
            k, l = 3, 5
            yk, yl = enum[k], enum[idx[l]]
            expect = g(group_sub(z, yk, yl)) * np.conj(g(group_sub(z, group_sub(z, yk, s), yl)))
            assert a[k, l] == pytest.approx(expect)


# ---------------------------------------------------------------- averages

def test_lln_limits():
    g = parse_group("Z/4 x Z/9")
    h = subgroup_closure(g, [(2, 0), (0, 3)])
    chars = dual_quotient(g, h)
    prof = default_coeffs(chars.representatives)
    reps = chars.representatives
    rest = 1 / (2 * math.sqrt(5))
    assert lln_limit(prof, chars, g, reps[0], reps[0]) == 1.0
    assert lln_limit(prof, chars, g, reps[1], reps[0]) == pytest.approx(rest ** 2)
    assert lln_limit(prof, chars, g, reps[1], reps[2]) == 0.0
    assert lln_limit(prof, chars, g, reps[0], reps[2], reps[2]) == pytest.approx(rest ** 2)
    assert lln_limit(prof, chars, g, reps[1], reps[2], reps[2]) == 0.0


def test_lln_constant_cases_are_exact():
    g = parse_group("Z/4 x Z/9")
    h = subgroup_closure(g, [(2, 0), (0, 3)])
    chars = dual_quotient(g, h)
    prof = default_coeffs(chars.representatives)
    reps = chars.representatives
    draw = steinhaus_draw(1, prof.vector(reps), 20000)
    for mu in reps:
        avg = lln_average(draw, chars, g, mu, reps[0])
        np.testing.assert_allclose(avg, prof.a[mu] ** 2, rtol=1e-12)
    for eta0 in reps[1:]:
        avg = lln_average(draw, chars, g, reps[0], eta0, eta0)
        np.testing.assert_allclose(avg, lln_limit(prof, chars, g, reps[0], eta0, eta0), rtol=1e-12)
    with pytest.raises(ValueError):
        lln_average(draw, chars, g, reps[0], reps[0], reps[0])
    with pytest.raises(ValueError):
        lln_average(draw, chars, g, reps[0], reps[1], ns=(30000,))
