import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fteval import IBUG68, LandmarkScheme, LandmarkSequence, PreconditionError, lmd

from conftest import random_sequence

SMALL = LandmarkScheme("small", 4, (2, 3))


def seq68(rng, T=3):
    return random_sequence(rng, T=T, n=68, width=256, height=256)


def test_identity_is_zero():
    rng = np.random.default_rng(0)
    s = seq68(rng)
    r = lmd(s, s, IBUG68)
    assert r.f_lmd == 0.0 and r.m_lmd == 0.0


def test_uniform_offset_closed_form():
    rng = np.random.default_rng(1)
    gt = seq68(rng)
    gen = LandmarkSequence(gt.coords + np.array([3.0, 0.0]), 256, 256)
    r = lmd(gen, gt, IBUG68)
    assert r.f_lmd == pytest.approx(3.0, abs=1e-9)
    assert r.m_lmd == pytest.approx(3.0, abs=1e-9)


def test_mouth_only_displacement():
    rng = np.random.default_rng(2)
    gt = seq68(rng)
    coords = gt.coords.copy()
    coords[:, list(IBUG68.mouth_indices), 1] += 2.0
    r = lmd(LandmarkSequence(coords, 256, 256), gt, IBUG68)
    assert r.m_lmd == pytest.approx(2.0, abs=1e-9)
    assert r.f_lmd == pytest.approx(2.0 * 20 / 68, abs=1e-9)


def test_scheme_count_mismatch():
    rng = np.random.default_rng(3)
    s = random_sequence(rng, T=2, n=4)
    with pytest.raises(PreconditionError):
        lmd(s, s, IBUG68)


def test_per_frame_means_match_aggregates():
    rng = np.random.default_rng(4)
    a, b = seq68(rng, T=5), seq68(rng, T=5)
    r = lmd(a, b, IBUG68)
    assert r.f_lmd == pytest.approx(np.mean([f for f, _ in r.per_frame]), rel=1e-12)
    assert r.m_lmd == pytest.approx(np.mean([m for _, m in r.per_frame]), rel=1e-12)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_symmetry(salt):
    rng = np.random.default_rng(salt)
    a = random_sequence(rng, T=3, n=4)
    b = random_sequence(rng, T=3, n=4)
    ra, rb = lmd(a, b, SMALL), lmd(b, a, SMALL)
    assert ra.f_lmd == rb.f_lmd and ra.m_lmd == rb.m_lmd


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_triangle_bound(salt):
    rng = np.random.default_rng(salt)
    a = random_sequence(rng, T=2, n=4)
    b = random_sequence(rng, T=2, n=4)
    c = random_sequence(rng, T=2, n=4)
    ac = lmd(a, c, SMALL).f_lmd
    ab = lmd(a, b, SMALL).f_lmd
    bc = lmd(b, c, SMALL).f_lmd
    assert ac <= ab + bc + 1e-9


@given(st.integers(0, 10 ** 6),
       st.floats(-20, 20, allow_nan=False), st.floats(-20, 20, allow_nan=False))
@settings(max_examples=40, deadline=None)
def test_uniform_offset_law(salt, dx, dy):
    rng = np.random.default_rng(salt)
    gt = random_sequence(rng, T=3, n=4)
    gen = LandmarkSequence(gt.coords + np.array([dx, dy]), gt.width, gt.height)
    r = lmd(gen, gt, SMALL)
    expected = np.hypot(dx, dy)
    assert r.f_lmd == pytest.approx(expected, abs=1e-9)
    assert r.m_lmd == pytest.approx(expected, abs=1e-9)
