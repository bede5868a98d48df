import json

import pytest

from oracles import bar_coefficient
from whitehead_f2 import bar_algebra, whitehead_maps
from whitehead_f2.free_dl import Element, enumerate_generators, format_gen, parse_element
from whitehead_f2.whitehead_maps import (BASES, Certificate, CheckRecord, MalformedGenerator,
                                         alpha_star, alpha_star_split, d_star, delta_e0, delta_star,
                                         e0_matrix, homotopy_matrix, mixed_adem_pair, verify)

el = parse_element


@pytest.mark.parametrize("r,s,expected", [
    (4, 2, [(5, 1), (6, 0), (8, -2)]),
    (1, 1, [(3, -1)]),
    (2, 3, [(7, -2)]),
])
def test_mixed_adem_examples(r, s, expected):
    assert mixed_adem_pair(r, s, -2) == expected
    assert [(r + s - t, t) for t in range(s, -3, -1) if bar_coefficient(r, s, t)] == expected


def test_d_examples():
    assert d_star(0, el("s^1 bQ^2 i")) == el("Q^2 i")
    assert d_star(0, el("Q^7 s^1 bQ^2 i")) == el("Q^4 i * Q^4 i")
    assert d_star(1, el("s^2 bQ^3 bQ^1 i")) == el("Q^3 s^1 bQ^1 i")
    # a product maps to the product of images
    x = el("s^1 bQ^2 i * s^1 bQ^3 i")
    assert d_star(0, x) == el("Q^2 i") * el("Q^3 i")


def test_d_on_Q4_wreath_Q1():
    # e_2(Q^4 w Q^1) = Q^4 w Q^1 + Q^3 w Q^2; the second term gives the square (s^1 bQ^2 i)^2
    assert d_star(1, el("s^2 bQ^4 bQ^1 i")) == el("Q^4 s^1 bQ^1 i") + el("Q^3 s^1 bQ^2 i")


def test_delta_examples():
    assert delta_star(0, el("i")) == Element()
    assert delta_star(0, el("Q^2 i")) == el("s^1 bQ^2 i")
    assert delta_star(0, el("Q^4 Q^2 i")) == el("Q^5 s^1 bQ^1 i + Q^4 s^1 bQ^2 i")
    assert delta_star(1, el("Q^4 s^1 bQ^1 i")) == el("s^2 bQ^4 bQ^1 i")


def test_delta_rejects_products_and_wrong_k():
    with pytest.raises(MalformedGenerator):
        delta_star(0, el("Q^2 i * Q^2 i"))
    with pytest.raises(MalformedGenerator):
        delta_star(1, el("Q^2 i"))
    with pytest.raises(MalformedGenerator):
        d_star(0, el("Q^2 i"))


def test_delta_e0_is_multiplicative():
    a, b = el("Q^2 i"), el("Q^3 i")
    assert delta_e0(0, a * b) == delta_e0(0, a) * delta_e0(0, b)
    assert delta_e0(0, a) == delta_star(0, a)


def test_alpha_examples():
    assert alpha_star(1, 4, (1,)) == {(4, 1)}
    assert alpha_star(1, 4, (2,)) == {(5, 1)}
    assert alpha_star_split(1, 4, (1,)) == {(4, 1)}
    assert alpha_star_split(1, 4, (2,)) == {(5, 1)}


@pytest.mark.parametrize("k", [0, 1, 2])
def test_degree_and_weight_exact_on_generators(k):
    for d in range(1, 17):
        for g in enumerate_generators(k, d):
            for m in delta_star(k, g):
                assert sum(h.degree for h in m) == d
                assert sum(h.weight for h in m) == g.weight
            if k >= 1:
                for m in d_star(k - 1, g):
                    assert sum(h.degree for h in m) == d
                    assert sum(h.weight for h in m) == g.weight


def labels(e0):
    return [format_gen(g) for g in e0.source], [format_gen(g) for g in e0.target]


def test_e0_examples():
    e = e0_matrix("d", 0, 3, 2)
    assert labels(e) == (["s^1 bQ^2 i"], ["Q^2 i"]) and e.matrix.to_lists() == [[1]]
    e = e0_matrix("delta", 0, 3, 2)
    assert labels(e) == (["Q^2 i"], ["s^1 bQ^2 i"]) and e.matrix.to_lists() == [[1]]
    # on indecomposables the decomposable output (Q^2 i)^2 is dropped
    e = e0_matrix("d", 0, 6, 4, "indecomposable")
    assert labels(e) == (["Q^4 s^1 bQ^1 i"], []) and e.matrix.is_zero()
    # on primitives it is the square Q^3 Q^2 i
    e = e0_matrix("d", 0, 6, 4)
    assert labels(e) == (["Q^4 s^1 bQ^1 i", "Q^3 s^1 bQ^2 i"], ["Q^3 Q^2 i"])
    assert e.matrix.to_lists() == [[1], [1]]


def test_homotopy_examples():
    m = homotopy_matrix(1, 3, 2)
    assert m.is_identity()
    m = homotopy_matrix(1, 6, 4)
    assert [format_gen(g) for g in m.row_labels] == ["Q^4 s^1 bQ^1 i", "Q^3 s^1 bQ^2 i"]
    assert m.is_identity()


def test_indecomposable_basis_breaks_homotopy():
    # d_0(s^1 bQ^1 i) = iota^2 is invisible on indecomposables, so M_1 is singular there
    m = homotopy_matrix(1, 2, 2, "indecomposable")
    assert m.to_lists() == [[0]]
    assert homotopy_matrix(1, 2, 2).to_lists() == [[1]]


def test_checks_pass_small_range():
    for check in whitehead_maps.CHECKS:
        cert = verify(check, max_k=2, max_degree=14)
        assert cert.verdict == "pass", cert.failures()
        assert cert.records


def test_chain_records_nonvacuous():
    cert = verify("chain", max_k=2, max_degree=16)
    assert any(r.dim > 0 for r in cert.records if r.k == 1)


def test_certificate_document():
    cert = Certificate("chain", {"max_k": 1, "check": "chain"},
                       [CheckRecord("chain", 0, 5, 4, 0, 1, True)])
    doc = cert.as_dict()
    assert list(doc) == ["version", "parameters", "checks", "verdict"]
    assert list(doc["parameters"]) == ["check", "max_k"]
    assert doc["checks"][0]["pass"] is True
    assert doc["verdict"] == "pass"
    cert.records.append(CheckRecord("chain", 0, 6, 4, 1, 1, False, "x"))
    assert cert.as_dict()["verdict"] == "fail"
    assert json.loads(json.dumps(cert.as_dict())) == cert.as_dict()


def test_exhaustion_is_reported_separately(monkeypatch):
    def boom(task):
        raise bar_algebra.NormalizationError((1, 2), 0)
    monkeypatch.setattr(whitehead_maps, "run_task", boom)
    cert = verify("chain", max_k=1, max_degree=8)
    assert cert.verdict == "exhausted"
    assert "NormalizationError" in cert.as_dict()["error"]


def test_parallel_matches_serial():
    a = verify("homotopy", max_k=2, max_degree=16).as_dict()
    b = verify("homotopy", max_k=2, max_degree=16, jobs=2).as_dict()
    assert a == b


@pytest.mark.parametrize("basis", BASES)
def test_e0_rejects_unknown(basis):
    with pytest.raises(ValueError):
        e0_matrix("dd", 0, 3, 2, basis)
    with pytest.raises(ValueError):
        e0_matrix("d", 0, 3, 2, basis + "x")
