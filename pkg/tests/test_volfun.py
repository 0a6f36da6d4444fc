import itertools
import math
from collections import Counter

import numpy as np
import pytest

from wptrace import hypgeom as hg
from wptrace import volfun as vf
from wptrace.diagram import FillingSignature
from wptrace.pipoly import VolumeTable

PI2 = math.pi ** 2


def _brute_realizations(sig, g):
    """Every labelling of boundaries by block index and every genus tuple, filtered."""
    n = sig.n
    budget = (2 * g - 2) - (2 * sig.g - 2 + n)
    seen = Counter()
    for q in range(1, n + 1):
        for assign in itertools.product(range(q), repeat=n):
            if set(assign) != set(range(q)):
                continue
            blocks = [tuple(j + 1 for j in range(n) if assign[j] == b) for b in range(q)]
            for genera in itertools.product(range(g + 1), repeat=q):
                ok = all(2 * gi - 2 + len(b) > 0 or (gi, len(b)) == (0, 2) for gi, b in zip(genera, blocks))
                if not ok or sum(2 * gi - 2 + len(b) for gi, b in zip(genera, blocks)) != budget:
                    continue
                key = tuple(sorted(zip(blocks, genera)))
                seen[key] += 1
    # each unordered realization was produced q! times (block relabelling)
    return Counter({k: 1 for k in seen})


@pytest.mark.parametrize("sig", [(0, 2), (0, 3)])
@pytest.mark.parametrize("g", [2, 3, 4, 5, 6])
def test_enumeration_complete(sig, g):
    S = FillingSignature(*sig)
    got = Counter(tuple(sorted(zip(r.blocks, r.genera))) for r in vf.enumerate_realizations(S, g))
    assert got == _brute_realizations(S, g)


def test_cylinder_count_is_g():
    for g in range(2, 9):
        assert len(vf.enumerate_realizations(FillingSignature(0, 2), g)) == g


def test_infeasible_budget_is_empty():
    assert vf.enumerate_realizations(FillingSignature(3, 2), 2) == []
    with pytest.raises(ValueError):
        vf.enumerate_realizations(FillingSignature(0, 2), 1)


def _v12(a, b):
    s = a * a + b * b
    return (4 * PI2 + s) * (12 * PI2 + s) / 192


def _v11(x):
    return (x * x + 4 * PI2) / 48


def test_v_simple_genus_two(table):
    for ell in (0.5, 3.0, 7.0):
        ref = ell * _v12(ell, ell) + ell * _v11(ell) ** 2
        assert vf.v_simple(table, 2, ell) == pytest.approx(ref, rel=1e-13)
        assert vf.v_simple_from_phi(table, 2, ell) == pytest.approx(ref, rel=1e-13)


def test_v_simple_vanishes_at_zero(table):
    vals = vf.v_simple(table, 2, np.array([1e-3, 1e-6, 1e-9]))
    assert np.all(np.diff(vals) < 0) and vals[-1] < 1e-6


def test_missing_entries_listed(table):
    with pytest.raises(vf.MissingEntries) as info:
        vf.v_simple(table, 4, 1.0)
    assert (3, 2) in info.value.missing


def test_phi_dirac_structure(table):
    phi = vf.phi_S(table, FillingSignature(0, 3), 2)
    groups = phi.dirac_groups()
    assert sorted(groups) == [((1, 2),), ((1, 3),), ((2, 3),)]
    # cylinder groups carry V(1,1) on the remaining boundary, prefactor excluded
    for pairs, Q in groups.items():
        (a, b), = pairs
        k = ({1, 2, 3} - {a, b}).pop()
        x = [1.0, 2.0, 3.0]
        assert Q(*x) == pytest.approx(_v11(x[k - 1]), rel=1e-13)


@pytest.fixture(scope="module")
def pop_values(table):
    out = {}
    for g in (2, 3):
        for ell in (5.0, 8.0):
            out[g, ell] = {form: vf.v_pop_type(table, g, ell, form=form) for form in ("primary", "alternate")}
            out[g, ell]["half"] = vf.v_pop_type(table, g, ell, half=True)
    return out


def test_pop_forms_agree(pop_values):
    for key, vals in pop_values.items():
        ref = vals["primary"].value
        assert vals["alternate"].value == pytest.approx(ref, rel=1e-10)
        assert vals["half"].value == pytest.approx(ref, rel=1e-10)


def test_pop_positive_and_increasing(pop_values):
    for g in (2, 3):
        assert 0 < pop_values[g, 5.0]["primary"].value < pop_values[g, 8.0]["primary"].value


def test_pop_convergence(table):
    coarse = vf.v_pop_type(table, 2, 6.0, tol=1e-6)
    fine = vf.v_pop_type(table, 2, 6.0, tol=1e-10)
    assert abs(coarse.value - fine.value) <= max(coarse.err, 1e-9 * abs(fine.value))


def test_pop_near_threshold(table):
    ell0 = 2 * math.acosh(3)
    small = vf.v_pop_type(table, 2, ell0 + 1e-3).value
    assert 0 < small < 1e-2 * vf.v_pop_type(table, 2, ell0 + 1.0).value
    with pytest.raises(hg.DomainError):
        vf.v_pop_type(table, 2, ell0 - 0.1)


def test_pop_symmetry_factor(table):
    a = vf.v_pop_type(table, 2, 5.0).value
    b = vf.v_pop_type(table, 2, 5.0, n_T=4).value
    assert b == pytest.approx(a / 4, rel=1e-14)
    with pytest.raises(ValueError):
        vf.v_pop_type(table, 2, 5.0, n_T=0)


def test_expansion_fit_recovers_model():
    grid = np.linspace(1, 10, 7)
    f0, f1, f2 = np.sin(grid), grid ** 2, np.exp(-grid)
    samples = {g: f0 + f1 / g + f2 / g ** 2 for g in range(2, 12)}
    fit = vf.expansion_fit(samples, K=2)
    np.testing.assert_allclose(fit.coefficients[0], f0, atol=1e-8)
    np.testing.assert_allclose(fit.coefficients[1], f1, atol=1e-8)
    np.testing.assert_allclose(fit.coefficients[2], f2, atol=1e-8)


def test_expansion_fit_constant():
    fit = vf.expansion_fit({g: [3.5, 3.5] for g in range(2, 8)}, K=2)
    np.testing.assert_allclose(fit.coefficients[0], 3.5, atol=1e-10)
    np.testing.assert_allclose(fit.coefficients[1], 0, atol=1e-9)
    np.testing.assert_allclose(fit.coefficients[2], 0, atol=1e-9)


def test_expansion_fit_rejects_bad_systems():
    with pytest.raises(ValueError, match="at least"):
        vf.expansion_fit({2: [1.0], 3: [1.0]}, K=2)
    with pytest.raises(vf.FitError) as info:
        vf.expansion_fit({g: [1.0] for g in range(1000, 1010)}, K=6)
    assert info.value.cond > 1e12


def test_rows_to_csv():
    text = vf.rows_to_csv([(1.0, 2.5, 0.0, 2, "simple")])
    assert text.splitlines() == ["ell,value,err_estimate,g,type", "1.0,2.5,0.0,2,simple"]


def test_realization_strings():
    r = vf.Realization(((1, 2), (3,)), (1, 1))
    assert str(r) == "V(1,2)[x1,x2]*V(1,1)[x3]"
    assert r.q == 2


def test_empty_table_reports_everything():
    with pytest.raises(vf.MissingEntries):
        vf.v_simple(VolumeTable(), 2, 1.0)
