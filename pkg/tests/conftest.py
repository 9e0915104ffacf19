import cmath
import math

import pytest
from hypothesis import strategies as st

from lcaphase.groups import Cyclic, GroupSpec, IntegerLine, all_subgroups, haar_weights, subgroup_closure
from lcaphase.harmonic import Signal


def brute_pairing(g, x, xi):
    """Character value straight from the definition, in floating point."""
    ph = 0.0
    for f, a, b in zip(g.factors, x, xi):
        if isinstance(f, Cyclic):
            ph += a * b / f.order
        else:
            ph += float(a) * float(b)
    return cmath.exp(2j * math.pi * ph)


def random_signal(g, weights, rng, support=None):
    support = g.elements() if support is None else support
    vals = rng.standard_normal(len(support)) + 1j * rng.standard_normal(len(support))
    return Signal(g, tuple(support), vals, weights)


@st.composite
def finite_groups(draw, max_order=48):
    orders = draw(st.lists(st.integers(1, 9), min_size=1, max_size=3))
    while math.prod(orders) > max_order:
        orders.pop()
    return GroupSpec(tuple(Cyclic(n) for n in orders or [1]))


@st.composite
def group_with_subgroup(draw, max_order=36):
    g = draw(finite_groups(max_order))
    subs = all_subgroups(g)
    return g, subs[draw(st.integers(0, len(subs) - 1))]


@st.composite
def elements_of(draw, g, bound=20):
    out = []
    for f in g.factors:
        if isinstance(f, Cyclic):
            out.append(draw(st.integers(0, f.order - 1)))
        elif isinstance(f, IntegerLine):
            out.append(draw(st.integers(-bound, bound)))
    return tuple(out)


@pytest.fixture
def z4():
    return GroupSpec((Cyclic(4),))


@pytest.fixture
def z4_h():
    g = GroupSpec((Cyclic(4),))
    h = subgroup_closure(g, [(2,)])
    return g, h, haar_weights(g, h)


@pytest.fixture
def z4z9_h():
    g = GroupSpec((Cyclic(4), Cyclic(9)))
    h = subgroup_closure(g, [(2, 0), (0, 3)])
    return g, h, haar_weights(g, h)
