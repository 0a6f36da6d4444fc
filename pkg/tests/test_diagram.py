import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wptrace import diagram as D


@st.composite
def layouts(draw, max_r=5):
    r = draw(st.integers(1, max_r))
    k = draw(st.integers(1, 2 * r))
    tokens = [f"o{j}R" for j in range(1, r + 1)] + [f"t{j}L" for j in range(1, r + 1)]
    tokens = draw(st.permutations(tokens))
    # cut into k non-empty cyclic lists
    cuts = sorted(draw(st.sets(st.integers(1, 2 * r - 1), min_size=k - 1, max_size=k - 1))) if k > 1 else []
    bounds = [0] + cuts + [2 * r]
    layout = {chr(65 + i): list(tokens[a:b]) for i, (a, b) in enumerate(zip(bounds, bounds[1:]))}
    return r, layout


def test_figure_eight():
    d = D.catalog("figure-eight")
    assert D.relabel(d, (1, 1)) == [(1, 1), (1, -1)]
    assert D.filling_signature(d) == D.FillingSignature(0, 3)
    assert len(d.components) == 2


def test_once_holed_torus():
    d = D.catalog("once-holed-torus")
    assert D.filling_signature(d) == D.FillingSignature(1, 1)
    assert d.num_loops == 2


def test_three_bar_sigma_cycle():
    d = D.catalog("three-bar")
    assert d.cycles() == [[(1, 1), (2, -1), (2, 1), (3, -1), (3, 1), (1, -1)]]
    assert [q for q, _ in zip(D.loop_labels(d), range(6))] == d.cycles()[0]


def test_simple_loop_is_cylinder():
    assert D.filling_signature(D.catalog("simple-loop")) == D.FillingSignature(0, 2)


def test_catalog_signatures():
    want = {"chain-2": (0, 4), "three-bar": (0, 5), "chain-4": (0, 6)}
    for name, sig in want.items():
        assert tuple(D.filling_signature(D.catalog(name))) == sig


def test_duplicate_sign_rejected():
    d = D.catalog("figure-eight")
    bad = D.Diagram(1, d.components, d.sigma, {(1, 1): 1, (1, -1): 1})
    with pytest.raises(D.DiagramError, match="sign imbalance"):
        D.validate(bad)


def test_duplicate_endpoint_rejected():
    with pytest.raises(D.DiagramError, match="appears twice"):
        D.build(1, {"A": ["o1R"], "B": ["o1R", "t1L"]})


def test_missing_endpoint_rejected():
    with pytest.raises(D.DiagramError, match="missing"):
        D.build(2, {"A": ["o1R"], "B": ["t1L", "o2R"]})


def test_broken_sigma_rejected():
    d = D.catalog("chain-2")
    sigma = dict(d.sigma)
    a, b = (1, 1), (2, 1)
    sigma[a], sigma[b] = sigma[b], sigma[a]
    with pytest.raises(D.DiagramError, match="broken cycle"):
        D.validate(D.Diagram(2, d.components, sigma))


def test_disconnected_rejected():
    with pytest.raises(D.DiagramError, match="disconnected"):
        D.build(2, {"A": ["o1R"], "B": ["o2R"], "C": ["t1L"], "D": ["t2L"]})


def test_bar_out_of_range():
    with pytest.raises(D.DiagramError, match="outside"):
        D.build(1, {"A": ["o1R"], "B": ["t2L"]})


def test_unvalidated_rejected():
    raw = D.Diagram(1, D.catalog("figure-eight").components)
    with pytest.raises(D.DiagramError, match="validated"):
        D.relabel(raw)


def test_theta_support():
    d = D.catalog("three-bar")
    assert D.theta_support(d, "D") == [(1, 1), (2, 1), (3, 1)]
    assert D.theta_support(d, "A") == [(1, -1)]


def test_serialization_round_trip(tmp_path):
    for name in D.CATALOG:
        d = D.catalog(name)
        text = D.dumps(d)
        again = D.loads(text)
        assert again == d
        path = tmp_path / f"{name}.json"
        path.write_text(text)
        assert D.read(path) == d


def test_parse_error_location():
    with pytest.raises(D.DiagramError, match="line 1 column"):
        D.loads('{"r": 1,, }')


def test_sigma_in_document_checked():
    doc = D.to_dict(D.catalog("chain-2"))
    doc["sigma"] = [["1+", "2-", "2+", "1-"]]
    with pytest.raises(D.DiagramError, match="broken cycle"):
        D.from_dict(doc)
    doc = json.loads(D.dumps(D.catalog("chain-2")))
    assert D.from_dict(doc) == D.catalog("chain-2")


@given(layouts())
def test_random_diagrams(data):
    r, layout = data
    try:
        d = D.build(r, layout)
    except D.DiagramError as exc:
        assert "disconnected" in str(exc)
        return
    sig = D.filling_signature(d)
    assert 2 * sig.g - 2 + sig.n == r
    cycles, _ = D.boundary_cycles(d)
    visited = [x for c in cycles for x in c]
    assert len(visited) == len(set(visited)) == 2 * r
    # sigma is a permutation; cycles partition the labels
    labels = [q for c in d.cycles() for q in c]
    assert sorted(labels) == sorted(D.all_labels(r))
    # relabelling from any label walks its own cycle
    for cyc in d.cycles():
        walk = D.loop_labels(d, cyc[0])
        assert walk == cyc
        k = len(cyc) // 2 if len(cyc) > 1 else 0
        rotated = D.loop_labels(d, cyc[k])
        assert rotated == cyc[k:] + cyc[:k]
