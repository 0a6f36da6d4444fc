import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wptrace import diagram as D
from wptrace import geolen as G
from wptrace import hypgeom as hg
from wptrace import kernels


@pytest.fixture(scope="module")
def eight():
    return D.catalog("figure-eight")


def test_y_lengths_figure_eight(eight):
    p = G.CoordPoint.from_arrays([1.0], [2.5, 0.7])
    ys = G.y_lengths(eight, p)
    assert (ys["A"], ys["B"]) == (0.7, 2.5)
    zero = G.CoordPoint.from_arrays([1.0], [0.0, 0.0])
    assert set(G.y_lengths(eight, zero).values()) == {0.0}


def test_y_lengths_multiset_sum():
    d = D.catalog("three-bar")
    p = G.CoordPoint.from_arrays([1, 1, 1], [1.0, 10.0, 2.0, 20.0, 3.0, 30.0])
    ys = G.y_lengths(d, p)
    assert ys == {"A": 10.0, "B": 20.0, "C": 30.0, "D": 6.0}


def test_r1_matches_closed_form(eight):
    for x in [(2.0, 2.0, 2.0), (0.5, 4.0, 1.0), (6.0, 0.7, 3.3)]:
        p = G.figure_eight_point(*x)
        assert G.cosh_half_expansion(eight, p) == pytest.approx(hg.eight_cosh_half(*x), rel=1e-12)


def test_zero_theta_is_identity(eight):
    p = G.CoordPoint.from_arrays([1.7], [0.0, 0.0])
    assert G.cosh_half_trace(eight, p) == pytest.approx(1.0, abs=1e-15)
    assert G.cosh_half_expansion(eight, p) == pytest.approx(1.0, abs=1e-15)


def test_sign_pattern_count():
    for m in range(1, 9):
        delta, rho = kernels.sign_patterns(m)
        assert delta.shape == (2 ** (m - 1), m)
        assert np.all(delta.prod(axis=1) == 1)
        assert np.all(rho[:, 0] == 1)


@pytest.mark.parametrize("name", ["figure-eight", "once-holed-torus", "chain-2", "three-bar", "chain-4"])
def test_trace_matches_move_product(name, rng):
    d = D.catalog(name)
    for p in G.random_points(d, 20, rng):
        theta, s = G.sequence(d, p)
        moves = [m for t, x in zip(theta, s) for m in (("a", x), ("w", t))]
        ref = 0.5 * hg.product(moves).trace()
        assert G.cosh_half_trace(d, p) == pytest.approx(ref, rel=1e-12)


def test_six_move_product_matches_trace_oracle(rng):
    d = D.catalog("three-bar")
    for _ in range(50):
        p = G.random_points(d, 1, rng)[0]
        theta, s = G.sequence(d, p)
        m = hg.product([mv for t, x in zip(theta, s) for mv in (("a", x), ("w", t))])
        if abs(m.trace()) <= 2:
            continue
        assert hg.trace_to_cosh_half_length(m) == pytest.approx(abs(G.cosh_half_trace(d, p)), rel=1e-12)


@settings(max_examples=50)
@given(st.integers(0, 2 ** 31))
def test_expansion_at_least_one_when_hyperbolic(seed):
    d = D.catalog("three-bar")
    rng = np.random.default_rng(seed)
    p = G.random_points(d, 1, rng, theta_range=(0.05, 5.0))[0]
    assert all(y > 0 for y in G.y_lengths(d, p).values())
    v = G.cosh_half_expansion(d, p)
    if abs(G.cosh_half_trace(d, p)) > 1:
        assert abs(v) >= 1 - 1e-12


def test_log_domain_switch(eight):
    # moderate: log forms agree with the direct ones
    theta, s = np.array([3.0, -2.0, 1.5, 4.0]), np.array([1.0, -2.0, 0.5, -0.5])
    direct = kernels.expansion(theta[None], s[None])[0]
    lv, sg = G.log_expansion(theta, s)
    assert sg * math.exp(lv) == pytest.approx(direct, rel=1e-12)
    lv2, sg2 = G.log_trace_half(theta, s)
    assert sg2 * math.exp(lv2) == pytest.approx(direct, rel=1e-12)
    # huge: both log evaluators agree
    big_t, big_s = theta * 200, s * 200
    a, b = G.log_expansion(big_t, big_s), G.log_trace_half(big_t, big_s)
    assert a[1] == b[1]
    assert a[0] == pytest.approx(b[0], rel=1e-12)
    p = G.CoordPoint.from_arrays([400.0], [700.0, 900.0])
    assert G.cosh_half_trace(eight, p) == math.inf
    assert G.cosh_half_expansion(eight, p) == math.inf


def test_expansion_refuses_large_r():
    with pytest.raises(ValueError, match="trace evaluator"):
        G.log_expansion(np.ones(18), np.ones(18))


def test_oracle_report_fields():
    rec = G.oracle_report(D.catalog("chain-2"), 50, seed=3)
    assert set(rec) == {"diagram_id", "samples", "max_rel_err", "seed"}
    assert rec["max_rel_err"] <= 1e-9
    assert json.loads(G.report_json(rec)) == rec


def test_lhs_factor(eight):
    p = G.figure_eight_point(2.0, 2.0, 2.0)
    dv = G.wp_density(eight, p, (2.0, 2.0, 2.0))
    assert dv.lhs_factor == pytest.approx(8 * math.sinh(1) ** 3, rel=1e-15)


def test_density_domain_flag(eight):
    p = G.CoordPoint.from_arrays([1.0], [-0.5, 1.0])
    with pytest.raises(hg.DomainError):
        G.wp_density(eight, p, (1.0, 1.0, 1.0))


@pytest.mark.parametrize("x", [(2.0, 2.0, 2.0), (1.0, 3.0, 2.0)])
def test_jacobian_examples(x):
    rep = G.jacobian_fd_check_r1(*x, step=1e-4)
    assert rep["rel_err"] <= 1e-6


def test_density_constant_small_sample(eight):
    rep = G.density_check_r1(eight, 10, seed=1)
    assert rep["rel_spread"] <= 1e-6
    assert rep["power_of_two"] == 2


def test_coordpoint_validation():
    with pytest.raises(ValueError):
        G.CoordPoint.from_arrays([0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        G.CoordPoint.from_arrays([1.0], [1.0])


def test_geodesic_length(eight):
    x = (1.0, 2.0, 3.0)
    assert G.geodesic_length(eight, G.figure_eight_point(*x)) == pytest.approx(hg.eight_length(*x), rel=1e-12)
