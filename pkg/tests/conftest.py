import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from fastnewton.multiindex import DownwardClosedSet, from_indices


def random_dcs(rng, m, max_degree=6, n_gen=None, max_card=None):
    """Downward closure of a few random generators in ``{0..max_degree}^m``."""
    n_gen = int(rng.integers(1, 5)) if n_gen is None else n_gen
    while True:
        gens = rng.integers(0, max_degree + 1, size=(n_gen, m))
        box = np.array(list(itertools.product(*[range(g + 1) for g in gens.max(axis=0)])), dtype=np.int64)
        keep = np.zeros(len(box), dtype=bool)
        for g in gens:
            keep |= np.all(box <= g, axis=1)
        dcs = from_indices(box[keep])
        if max_card is None or len(dcs) <= max_card:
            return dcs
        n_gen = max(1, n_gen - 1)
        max_degree = max(1, max_degree - 1)


def brute_closure(gens):
    pts = set()
    for g in gens:
        pts.update(itertools.product(*[range(v + 1) for v in g]))
    return from_indices(sorted(pts))


@st.composite
def dc_sets(draw, max_m=4, max_degree=5, max_gens=4):
    m = draw(st.integers(1, max_m))
    gens = draw(st.lists(st.tuples(*[st.integers(0, max_degree)] * m), min_size=1, max_size=max_gens))
    return brute_closure(gens)


@st.composite
def nested_pairs(draw, max_m=4, max_degree=5):
    """``(A', A)`` with A' a downward closed subset of A."""
    big = draw(dc_sets(max_m=max_m, max_degree=max_degree))
    elems = list(big)
    picks = draw(st.lists(st.sampled_from(elems), min_size=1, max_size=4))
    return brute_closure(picks), big


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(b))), 1e-300))
