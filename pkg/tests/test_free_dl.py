import pytest
from hypothesis import given, settings, strategies as st

from oracles import dl_coefficient
from whitehead_f2.free_dl import (IOTA, Base, Element, Gen, ParseError, apply_Q, as_allowable,
                                  dl_adem_pair, enumerate_generators, enumerate_primitives,
                                  format_element, indecomposables, is_admissible, is_generator,
                                  make_gen, parse_element, primitive_part, product)

iota = Element.base(IOTA)


def el(text):
    return parse_element(text)


@pytest.mark.parametrize("r,s,expected", [(7, 2, [(5, 4)]), (4, 1, [(3, 2)]), (3, 1, [])])
def test_dl_adem_examples(r, s, expected):
    assert dl_adem_pair(r, s) == expected
    # scan every i, keeping admissible pairs with nonzero coefficient
    oracle = [(r + s - i, i) for i in range(0, r + 1)
              if dl_coefficient(r, s, i) and r + s - i <= 2 * i and i <= r - s - 1]
    assert oracle == expected


def test_dl_adem_rejects_admissible():
    with pytest.raises(ValueError, match="already admissible"):
        dl_adem_pair(4, 2)


@given(st.integers(1, 60), st.integers(0, 30))
def test_dl_adem_outputs_admissible(r, s):
    if r > 2 * s:
        for a, b in dl_adem_pair(r, s):
            assert a + b == r + s and a <= 2 * b


def test_apply_Q_examples():
    assert apply_Q((1,), iota) == iota * iota
    assert apply_Q((0,), iota) == Element()
    q4 = apply_Q((4,), iota)
    assert apply_Q((7, 2), iota) == q4 * q4
    assert format_element(apply_Q((7, 2), iota)) == "Q^4 i * Q^4 i"


def test_square_rule_on_squares():
    q2 = apply_Q((2,), iota)
    sq = q2 * q2
    assert apply_Q((7,), sq) == Element()                       # odd index on a square
    assert apply_Q((6,), sq) == apply_Q((3,), q2) * apply_Q((3,), q2)


def test_product_examples():
    q2 = apply_Q((2,), iota)
    x = q2 + iota * iota
    assert product(x, Element.unit()) == x
    assert product(q2, q2) == q2 * q2
    assert product(q2, apply_Q((1,), iota)) == q2 * iota * iota
    assert x * x == q2 * q2 + iota * iota * iota * iota


@pytest.mark.parametrize("k,d,expected", [
    (0, 1, ["i"]),
    (1, 3, ["s^1 bQ^2 i"]),
    (1, 6, ["s^1 bQ^5 i", "Q^4 s^1 bQ^1 i"]),
])
def test_enumerate_generators(k, d, expected):
    got = [format_element(Element.gen(g)) for g in enumerate_generators(k, d)]
    assert sorted(got) == sorted(expected)


def test_primitives_add_squares():
    prims = [format_element(Element.gen(g)) for g in enumerate_primitives(1, 6)]
    assert sorted(prims) == sorted(["s^1 bQ^5 i", "Q^4 s^1 bQ^1 i", "Q^3 s^1 bQ^2 i"])


def brute_generators(k, degree):
    """Every (J, base) of the right degree, filtered by the generator conditions."""
    from whitehead_f2.bar_algebra import enumerate_bar_basis
    out = []
    for bdeg in range(1, degree + 1):
        for w in enumerate_bar_basis(k, bdeg - k):
            left = degree - bdeg
            stack = [()]
            while stack:
                ops = stack.pop()
                if sum(ops) == left:
                    g = Gen(ops, Base(k, w))
                    if is_generator(g):
                        out.append(g)
                    continue
                for j in range(1, left - sum(ops) + 1):
                    stack.append(ops + (j,))
    return sorted(out)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_generators_against_brute_force(k):
    for d in range(1, 17):
        assert sorted(enumerate_generators(k, d)) == brute_generators(k, d)


def test_generators_survive_normalization():
    for k in range(3):
        for d in range(1, 18):
            for g in enumerate_generators(k, d):
                assert make_gen(g.ops, g.k, g.base.bar) == Element.gen(g)


def test_indecomposables_examples():
    q4 = apply_Q((4,), iota)
    assert indecomposables(q4 * q4) == frozenset()
    q2 = apply_Q((2,), iota)
    assert indecomposables(q2 + iota * iota) == {Gen((2,), IOTA)}
    s = el("s^1 bQ^2 i")
    assert indecomposables(s) == {Gen((), Base(1, (2,)))}


def test_as_allowable():
    g = Gen((), Base(1, (2,)))
    assert as_allowable((g, g)) == Gen((3,), Base(1, (2,)))
    assert as_allowable((g,) * 4) == Gen((6, 3), Base(1, (2,)))
    assert as_allowable((g,) * 3) is None
    h = Gen((), Base(1, (1,)))
    assert as_allowable((g, h)) is None
    # the allowable form evaluates back to the power
    for m in [(g, g), (g,) * 4]:
        p = as_allowable(m)
        assert apply_Q(p.ops, Element.base(p.base)) == Element([m])
    assert primitive_part(Element([(g, g), (g, h)])) == {Gen((3,), Base(1, (2,)))}


ops_seqs = st.lists(st.integers(0, 12), min_size=0, max_size=3)
bases = st.sampled_from([IOTA, Base(1, (1,)), Base(1, (2,)), Base(1, (3,)), Base(2, (3, 1))])


@settings(max_examples=200)
@given(ops_seqs, bases)
def test_apply_Q_bookkeeping(ops, base):
    x = apply_Q(ops, Element.base(base))
    for m in x:
        assert sum(g.degree for g in m) == sum(ops) + base.degree
        assert sum(g.weight for g in m) == base.weight << len(ops)
        for g in m:
            assert is_generator(g)
    # re-normalizing leaves a normalized element alone
    again = Element()
    for m in x:
        term = Element.unit()
        for g in m:
            term = term * apply_Q(g.ops, Element.base(g.base))
        again += term
    assert again == x


elements = st.lists(st.tuples(ops_seqs, bases), min_size=0, max_size=3).map(
    lambda items: sum((apply_Q(o, Element.base(b)) for o, b in items), Element()))


@settings(max_examples=100)
@given(elements, elements, elements)
def test_product_commutative_associative(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=200)
@given(elements, elements)
def test_text_round_trip(a, b):
    for x in (a, b, a * b + a):
        assert parse_element(format_element(x)) == x


def test_parse_examples():
    x = el("Q^4 s^1 bQ^1 i + Q^5 s^1 bQ^1 i * s^1 bQ^2 i")
    assert len(x) == 2
    assert el("0") == Element()
    assert el("1") == Element.unit()
    assert el("Q^1 i") == iota * iota
    assert el("s^2 bQ^4 bQ^2 i") == el("s^2 bQ^5 bQ^1 i")
    assert is_admissible((3, 2)) and not is_admissible((5, 2))


@pytest.mark.parametrize("text", ["Q^", "Q^x i", "s^1 bQ^2", "i +", "* i", "Q^2 s^-1 i", "i i"])
def test_parse_errors(text):
    with pytest.raises(ParseError) as err:
        parse_element(text)
    assert err.value.position >= 0
