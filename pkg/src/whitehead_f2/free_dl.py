"""Free allowable algebras over the mod 2 Dyer-Lashof algebra.

The algebra A_k is polynomial on generators Q^J sigma^k Qbar^I iota_1 where
I is a normal bar word of length k and J = (j_1, ..., j_l) is admissible
(j_s <= 2 j_{s+1}) with excess j_1 - (j_2 + ... + j_l) > |sigma^k Qbar^I iota_1|.
Operations are upper-indexed; Q^j x = 0 for j < |x| and Q^{|x|} x = x^2.

Weights: w(sigma^k Qbar^I iota_1) = 2^k, w(Q^j x) = 2 w(x), w(xy) = w(x) + w(y).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

from . import bar_algebra
from .f2core import binom2


class Base(NamedTuple):
    """sigma^k Qbar^I iota_1 with I normal of length k."""

    k: int
    bar: tuple[int, ...]

    @property
    def degree(self) -> int:
        return self.k + bar_algebra.degree(self.bar, 1)

    @property
    def weight(self) -> int:
        return 1 << self.k


class Gen(NamedTuple):
    """Q^J applied to a base class; J admissible in any normalized output."""

    ops: tuple[int, ...]
    base: Base

    @property
    def degree(self) -> int:
        return sum(self.ops) + self.base.degree

    @property
    def weight(self) -> int:
        return self.base.weight << len(self.ops)

    @property
    def k(self) -> int:
        return self.base.k

    def key(self):
        return (self.degree, self.weight, self.base.k, self.base.bar, self.ops)


IOTA = Base(0, ())


def excess(ops: Sequence[int]) -> int:
    if not ops:
        return 10**9
    return ops[0] - sum(ops[1:])


def is_admissible(ops: Sequence[int]) -> bool:
    return all(a <= 2 * b for a, b in zip(ops, ops[1:]))


def is_generator(g: Gen) -> bool:
    if not bar_algebra.is_normal(g.base.bar, 1) or len(g.base.bar) != g.base.k:
        return False
    if g.base.k > 0 and g.base.bar[-1] < 1:
        return False
    return is_admissible(g.ops) and (not g.ops or excess(g.ops) > g.base.degree)


def _mono(gens: Iterable[Gen]) -> tuple[Gen, ...]:
    return tuple(sorted(gens, key=Gen.key))


class Element:
    """A homogeneous-or-not element of A_k: an F2 sum of monomials.

    A monomial is a sorted tuple of ``Gen`` (squares repeat a factor); the
    empty tuple is the unit.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[Gen, ...]] = ()):
        acc: set = set()
        for t in terms:
            acc ^= {t}
        self.terms = frozenset(acc)

    @classmethod
    def gen(cls, g: Gen) -> Element:
        return cls([(g,)])

    @classmethod
    def base(cls, b: Base) -> Element:
        return cls([(Gen((), b),)])

    @classmethod
    def unit(cls) -> Element:
        return cls([()])

    @classmethod
    def zero(cls) -> Element:
        return cls()

    def __add__(self, other: Element) -> Element:
        return Element._raw(self.terms ^ other.terms)

    @classmethod
    def _raw(cls, terms: frozenset) -> Element:
        e = cls.__new__(cls)
        e.terms = terms
        return e

    def __mul__(self, other: Element) -> Element:
        return product(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Element) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self) -> Iterator[tuple[Gen, ...]]:
        return iter(sorted(self.terms, key=monomial_key))

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"Element({format_element(self)!r})"

    def __str__(self) -> str:
        return format_element(self)

    def degrees(self) -> set[int]:
        return {monomial_degree(m) for m in self.terms}

    def weights(self) -> set[int]:
        return {monomial_weight(m) for m in self.terms}


def monomial_degree(m: tuple[Gen, ...]) -> int:
    return sum(g.degree for g in m)


def monomial_weight(m: tuple[Gen, ...]) -> int:
    return sum(g.weight for g in m)


def monomial_key(m: tuple[Gen, ...]):
    return (monomial_degree(m), monomial_weight(m), len(m), tuple(g.key() for g in m))


def dl_adem_pair(r: int, s: int) -> list[tuple[int, int]]:
    """Admissible pairs in Q^r Q^s = sum_i binom(i-s-1, 2i-r) Q^{r+s-i} Q^i, r > 2s."""
    if r <= 2 * s:
        raise ValueError(f"already admissible: ({r}, {s})")
    return [(r + s - i, i) for i in range((r + 1) // 2, r - s)
            if binom2(i - s - 1, 2 * i - r)]


def product(a: Element, b: Element) -> Element:
    out: set = set()
    for x in a.terms:
        for y in b.terms:
            out ^= {_mono(x + y)}
    return Element._raw(frozenset(out))


@lru_cache(maxsize=None)
def _q_gen(j: int, g: Gen) -> frozenset:
    d = g.degree
    if j < d:
        return frozenset()
    if j == d:
        return frozenset([(g, g)])
    if not g.ops or j <= 2 * g.ops[0]:
        return frozenset([(Gen((j,) + g.ops, g.base),)])
    inner = Gen(g.ops[1:], g.base)
    out: set = set()
    for a, b in dl_adem_pair(j, g.ops[0]):
        out ^= _q_terms(a, _q_gen(b, inner))
    return frozenset(out)


@lru_cache(maxsize=None)
def _q_mono(j: int, m: tuple[Gen, ...]) -> frozenset:
    if not m:
        return frozenset([()]) if j == 0 else frozenset()
    if len(m) == 1:
        return _q_gen(j, m[0])
    # Cartan formula, split off the first factor.
    first, rest = m[0], m[1:]
    rest_deg = monomial_degree(rest)
    out: set = set()
    for a in range(first.degree, j - rest_deg + 1):
        left = _q_gen(a, first)
        if not left:
            continue
        right = _q_mono(j - a, rest)
        for x in left:
            for y in right:
                out ^= {_mono(x + y)}
    return frozenset(out)


def _q_terms(j: int, terms: Iterable[tuple[Gen, ...]]) -> frozenset:
    out: set = set()
    for m in terms:
        out ^= _q_mono(j, m)
    return frozenset(out)


def apply_Q(ops: Sequence[int], x: Element) -> Element:
    """Q^{j_1} ... Q^{j_l} x, evaluated right to left and fully normalized."""
    terms = x.terms
    for j in reversed(tuple(ops)):
        terms = _q_terms(j, terms)
    return Element._raw(frozenset(terms))


def make_gen(ops: Sequence[int], k: int, bar: Sequence[int]) -> Element:
    """Evaluate Q^J sigma^k Qbar^I iota_1 for arbitrary integer J, I."""
    out = Element()
    for w in bar_algebra.normalize_bar(tuple(bar), 1):
        out += apply_Q(ops, Element.base(Base(k, w)))
    return out


def indecomposables(x: Element) -> frozenset:
    """Single-factor terms of ``x``, as a set of ``Gen``."""
    return frozenset(m[0] for m in x.terms if len(m) == 1)


@lru_cache(maxsize=None)
def _bases(k: int, degree: int) -> tuple[Base, ...]:
    # base degree = k + bar degree
    return tuple(Base(k, w) for w in bar_algebra.enumerate_bar_basis(k, degree - k, 1))


def _op_sequences(total: int, d: int, strict: bool = True) -> Iterator[tuple[int, ...]]:
    """Admissible J with sum ``total`` and excess > d (>= d if not strict)."""
    floor = d + 1 if strict else d

    def grow(seq: tuple[int, ...], left: int, cur: int):
        if left == 0:
            if excess(seq) >= floor:
                yield seq
            return
        # each new leftmost operation is at least the degree it acts on
        for j in range(cur, left + 1):
            if seq and j > 2 * seq[0]:
                break
            yield from grow((j,) + seq, left - j, cur + j)

    yield from grow((), total, d)


@lru_cache(maxsize=None)
def _allowable(k: int, degree: int, strict: bool) -> tuple[Gen, ...]:
    out = []
    for bdeg in range(1, degree + 1):
        for b in _bases(k, bdeg):
            for ops in _op_sequences(degree - bdeg, bdeg, strict):
                out.append(Gen(ops, b))
    return tuple(sorted(out, key=Gen.key))


def enumerate_generators(k: int, degree: int, weight: int | None = None) -> list[Gen]:
    """Algebra generators of A_k in the given degree (and weight), sorted."""
    if k < 0 or degree < 1:
        return []
    gens = _allowable(k, degree, True)
    if weight is not None:
        gens = tuple(g for g in gens if g.weight == weight)
    return list(gens)


def enumerate_primitives(k: int, degree: int, weight: int | None = None) -> list[Gen]:
    """Basis Q^J v (J admissible, excess >= |v|) of the primitives of A_k.

    Excess equal to |v| gives iterated squares g^(2^m) of generators; they
    are kept here as ``Gen`` with the squaring operations written out.
    """
    if k < 0 or degree < 1:
        return []
    gens = _allowable(k, degree, False)
    if weight is not None:
        gens = tuple(g for g in gens if g.weight == weight)
    return list(gens)


def generator_weights(k: int, degree: int) -> list[int]:
    if k < 0 or degree < 1:
        return []
    return sorted({g.weight for g in _allowable(k, degree, False)})


def as_allowable(m: tuple[Gen, ...]) -> Gen | None:
    """Rewrite g^(2^m) as Q^{...} g; None for any other monomial."""
    if not m or any(g != m[0] for g in m):
        return None
    n = len(m)
    if n & (n - 1):
        return None
    g = m[0]
    ops = g.ops
    while n > 1:
        ops = (sum(ops) + g.base.degree,) + ops
        n //= 2
    return Gen(ops, g.base)


def primitive_part(x: Element) -> frozenset:
    """Terms of ``x`` that are primitive basis elements, in allowable form."""
    out = set()
    for m in x.terms:
        p = as_allowable(m)
        if p is not None:
            out ^= {p}
    return frozenset(out)


# --- text syntax -----------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def format_gen(g: Gen) -> str:
    parts = [f"Q^{j}" for j in g.ops]
    if g.base.k:
        parts.append(f"s^{g.base.k}")
    parts += [f"bQ^{i}" for i in g.base.bar]
    parts.append("i")
    return " ".join(parts)


def format_monomial(m: tuple[Gen, ...]) -> str:
    return " * ".join(format_gen(g) for g in m) if m else "1"


def format_element(x: Element) -> str:
    if not x:
        return "0"
    return " + ".join(format_monomial(m) for m in x)


def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "+*":
            out.append((c, i))
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "+*":
                j += 1
            out.append((text[i:j], i))
            i = j
    return out


def _parse_index(tok: str, prefix: str, pos: int) -> int:
    try:
        return int(tok[len(prefix):])
    except ValueError:
        raise ParseError(f"bad index in {tok!r}", pos) from None


def _parse_factor(toks: list[tuple[str, int]], pos: int) -> Element:
    if len(toks) == 1 and toks[0][0] in ("0", "1"):
        return Element.unit() if toks[0][0] == "1" else Element.zero()
    if not toks:
        raise ParseError("empty factor", pos)
    ops: list[int] = []
    bar: list[int] = []
    k = 0
    stage = 0  # 0: Q's, 1: after s^k, 2: bar Q's
    for n, (tok, p) in enumerate(toks):
        if tok == "i":
            if n != len(toks) - 1:
                raise ParseError("'i' must end a factor", p)
            break
        if tok.startswith("Q^") and stage == 0:
            ops.append(_parse_index(tok, "Q^", p))
        elif tok.startswith("s^") and stage == 0:
            k = _parse_index(tok, "s^", p)
            stage = 1
        elif tok.startswith("bQ^"):
            bar.append(_parse_index(tok, "bQ^", p))
            stage = 2
        else:
            raise ParseError(f"unexpected token {tok!r}", p)
    else:
        raise ParseError("factor must end with 'i'", toks[-1][1] + len(toks[-1][0]))
    if len(bar) != k:
        raise ParseError(f"s^{k} needs exactly {k} barred operations", toks[0][1])
    return make_gen(ops, k, bar)


def parse_element(text: str) -> Element:
    """Parse the shared element grammar into a normalized element."""
    toks = _tokens(text)
    if not toks:
        raise ParseError("empty input", 0)
    total = Element()
    current: Element | None = None
    factor: list[tuple[str, int]] = []
    end = len(text)

    def close_factor(at: int):
        nonlocal current, factor
        f = _parse_factor(factor, at)
        current = f if current is None else current * f
        factor = []

    for tok, p in toks:
        if tok == "*":
            close_factor(p)
        elif tok == "+":
            close_factor(p)
            total += current
            current = None
        else:
            factor.append((tok, p))
    close_factor(end)
    total += current
    return total
