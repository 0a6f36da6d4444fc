import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wptrace import graphlab as gl

K4 = gl.RegularGraph(4, tuple(itertools.combinations(range(4), 2)), d=3)


def _cycle(n):
    return gl.RegularGraph(n, tuple((i, (i + 1) % n) for i in range(n)), d=2)


def test_k4_examples():
    assert gl.closed_walk_count(K4, 3) == 24
    assert gl.irreducible_loop_count(K4, 3) == 24
    rep = gl.spectral_bound_check(K4, 3)
    assert (rep["lhs"], rep["rhs"], rep["slack"]) == (3, 4.0, 1.0)
    assert rep["holds"] and rep["connected"] and not rep["bipartite"]
    sp = gl.spectrum(K4)
    np.testing.assert_allclose(sp.eigenvalues, [3, -1, -1, -1], atol=1e-12)
    assert sp.lambda_plus == pytest.approx(1.0)


def test_small_lengths():
    G = gl.random_regular(20, 3, seed=1)
    assert gl.closed_walk_count(G, 1) == 0 and gl.irreducible_loop_count(G, 1) == 0
    assert gl.closed_walk_count(G, 2) == 20 * 3
    assert gl.irreducible_loop_count(G, 2) == 0


@pytest.mark.parametrize("n", [3, 5, 6, 9])
def test_cycle_graph(n):
    counts = gl.irreducible_loop_counts(_cycle(n), 2 * n + 1)
    assert counts[0] == 2 * n  # l = 0: one empty walk per directed edge
    for ell in range(1, 2 * n + 2):
        want = 2 * n if ell % n == 0 else 0
        assert counts[ell] == want, ell


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 10), st.floats(0.2, 0.8), st.integers(0, 10 ** 6))
def test_counts_match_enumeration(n, p, seed):
    G = gl.random_graph(n, p, seed)
    walks = gl.closed_walk_counts(G, 6)
    nb = gl.irreducible_loop_counts(G, 6)
    for ell in range(1, 7):
        assert walks[ell] == gl.enumerate_closed_walks(G, ell)
        assert nb[ell] == gl.enumerate_closed_walks(G, ell, non_backtracking=True)


@pytest.mark.parametrize("n, d, seed", [(30, 4, 0), (16, 3, 5), (12, 5, 2)])
def test_ihara_identity(n, d, seed):
    G = gl.random_regular(n, d, seed)
    assert list(gl.ihara_traces(G, 10)) == list(gl.irreducible_loop_counts(G, 10))


def test_big_integers_do_not_overflow():
    G = gl.random_regular(12, 5, seed=3)
    counts = gl.irreducible_loop_counts(G, 34)
    assert list(counts) == list(gl.ihara_traces(G, 34))
    assert counts[-1] > 2 ** 63


def test_bipartite_detection():
    even, odd = _cycle(8), _cycle(7)
    assert gl.is_bipartite(even) and not gl.is_bipartite(odd)
    for G in (even, odd, K4, gl.random_regular(14, 3, 4)):
        lam_n = gl.spectrum(G).eigenvalues[-1]
        assert gl.is_bipartite(G) == math.isclose(lam_n, -G.d, abs_tol=1e-9)


def test_bound_rejects_irregular():
    with pytest.raises(gl.GraphError, match="regular"):
        gl.spectral_bound_check(gl.Graph(3, ((0, 1), (1, 2))), 3)


def test_graph_validation():
    with pytest.raises(gl.GraphError):
        gl.Graph(3, ((0, 0),))
    with pytest.raises(gl.GraphError):
        gl.Graph(3, ((0, 1), (1, 0)))
    with pytest.raises(gl.GraphError):
        gl.Graph(3, ((0, 3),))
    with pytest.raises(gl.GraphError):
        gl.RegularGraph(3, ((0, 1),), d=1)


def test_random_regular_deterministic_and_regular():
    a, b = gl.random_regular(50, 3, seed=7), gl.random_regular(50, 3, seed=7)
    assert a == b
    assert np.all(a.degrees == 3) and a.m == 75
    assert a != gl.random_regular(50, 3, seed=8)
    with pytest.raises(ValueError):
        gl.random_regular(5, 3)


def test_rejection_budget():
    with pytest.raises(gl.RejectionBudgetExceeded):
        gl.random_regular(8, 7, seed=0, max_tries=1)


def test_edgelist_round_trip():
    G = gl.random_regular(16, 3, seed=2)
    text = G.to_edgelist()
    assert text.startswith("# n=16 m=24 d=3")
    H = gl.Graph.from_edgelist(text)
    assert H.n == G.n and H.edges == G.edges


def test_spectrum_json():
    d = gl.spectrum(K4).to_json_dict()
    assert set(d) >= {"eigenvalues", "lambda_plus"}


def _model(d, ells):
    return (1 + 0.3 * ells + 0.01 * ells ** 2) * (d - 1.0) ** ells


@pytest.mark.parametrize("d", [3, 4])
def test_ramanujan_residual_exact_data(d):
    ells = np.arange(1, 15)
    rep = gl.ramanujan_residual(dict(zip(ells, _model(d, ells))), d, 2)
    assert rep["bounded"] and rep["residual_log_slope"] == 0.0
    np.testing.assert_allclose(rep["coefficients"], [1, 0.3, 0.01], rtol=1e-9)


@pytest.mark.parametrize("d", [3, 4])
def test_ramanujan_residual_flags_violation(d):
    ells = np.arange(1, 15)
    bad = _model(d, ells) + (d - 1.0) ** (0.75 * ells)
    rep = gl.ramanujan_residual(dict(zip(ells, bad)), d, 2)
    assert not rep["bounded"]
    assert rep["residual_log_slope"] > 0.2


def test_ramanujan_residual_noise_aware():
    ells = np.arange(1, 15)
    rng = np.random.default_rng(0)
    se = 0.5 * 2.0 ** (0.6 * ells)
    noisy = _model(3, ells) + se * rng.uniform(-1, 1, len(ells))
    stderr = dict(zip(ells, se))
    rep = gl.ramanujan_residual(dict(zip(ells, noisy)), 3, 2, stderr=stderr)
    assert rep["bounded"] and rep["max_abs_z"] <= 4
    bad = _model(3, ells) + 2.0 ** (0.75 * ells) * 20
    assert not gl.ramanujan_residual(dict(zip(ells, bad)), 3, 2, stderr=stderr)["bounded"]
    with pytest.raises(ValueError):
        gl.ramanujan_residual({1: 1.0, 2: 2.0}, 3, 2)


@pytest.mark.slow
def test_mc_stderr_shrinks():
    a = gl.mc_expected_irreducible(200, 3, 8, trials=20, seed=1)
    b = gl.mc_expected_irreducible(200, 3, 8, trials=80, seed=1)
    ratio = b.stderr[-1] / a.stderr[-1]
    assert 0.5 / 3 <= ratio <= 0.5 * 3


def test_mc_jobs_independent_and_csv():
    a = gl.mc_expected_irreducible(60, 3, 6, trials=6, seed=3)
    b = gl.mc_expected_irreducible(60, 3, 6, trials=6, seed=3, jobs=2)
    assert a.to_csv() == b.to_csv()
    lines = a.to_csv().splitlines()
    assert lines[0] == "ell,mean_count,stderr,n,d,trials,seed"
    assert len(lines) == 7
    one = gl.mc_expected_irreducible(20, 3, 3, trials=1, seed=0)
    assert np.all(np.isnan(one.stderr))


def test_log_slope():
    ells = np.arange(1, 13)
    assert gl.log_slope(ells, 2.0 ** ells, 6, 12) == pytest.approx(math.log(2), rel=1e-12)


@pytest.mark.parametrize("G", [gl.random_regular(12, 3, seed=s) for s in range(3)]
                         + [gl.random_graph(12, 0.3, seed=s) for s in range(3)],
                         ids=lambda G: f"n{G.n}m{G.m}")
def test_counts_match_enumeration_to_length_eight(G):
    walks, nb = gl.closed_walk_counts(G, 8), gl.irreducible_loop_counts(G, 8)
    for ell in (7, 8):
        assert walks[ell] == gl.enumerate_closed_walks(G, ell)
        assert nb[ell] == gl.enumerate_closed_walks(G, ell, non_backtracking=True)


@pytest.mark.parametrize("n, d", [(10, 3), (16, 4), (40, 3), (24, 5)])
def test_spectral_bound_always_holds(n, d):
    for seed in range(5):
        G = gl.random_regular(n, d, seed)
        for ell in range(1, 11):
            rep = gl.spectral_bound_check(G, ell)
            assert rep["holds"], rep
