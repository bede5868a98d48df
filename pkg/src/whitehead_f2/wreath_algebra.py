"""Wreath words Q^{i_1} w ... w Q^{i_k} iota_1, the operators T_s and the idempotents e_k.

A wreath word is a tuple ``(i_1, ..., i_k)``; it is valid when
i_s >= i_{s+1} + ... + i_k + 1 for every s, and invalid words are zero.
Its degree is i_1 + ... + i_k + 1, which is also the degree of the
suspended class sigma^k Qbar^I iota_1 it maps to.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

from . import bar_algebra
from .bar_algebra import adem_coefficient, is_killed, normalize_bar
from .f2core import F2Matrix, bits, fsum

DEFAULT_FUEL = 256

# Optional persistent store for e_k matrices: an object with
# ``load(k, degree, basis) -> rows | None`` and ``save(k, degree, basis, rows)``.
_store = None


def set_matrix_store(store) -> None:
    """Install (or remove, with None) the persistent e_k store."""
    global _store
    _store = store
    _e_matrix.cache_clear()


class StabilizationError(RuntimeError):
    """Iterating the composite of the T_s did not reach a fixed point."""


def degree(word: Sequence[int]) -> int:
    return sum(word) + 1


def is_valid(word: Sequence[int]) -> bool:
    return not is_killed(tuple(word), 1)


@lru_cache(maxsize=None)
def _valid_words(k: int, total: int) -> tuple[tuple[int, ...], ...]:
    if k == 0:
        return ((),) if total == 0 else ()
    out = []
    for rest_total in range(total):
        first = total - rest_total
        if first < rest_total + 1:
            continue
        for rest in _valid_words(k - 1, rest_total):
            out.append((first,) + rest)
    return tuple(out)


def wreath_basis(k: int, degree: int) -> list[tuple[int, ...]]:
    """Valid wreath words of length k and degree ``degree``, sorted."""
    return sorted(_valid_words(k, degree - 1), key=bar_algebra.word_key) if k >= 0 else []


def T_s(s: int, word: Sequence[int]) -> frozenset:
    """The operator T_s on positions (s, s+1), 1-based.

    Sums c(i_s, i_{s+1}, t) Q^{i_s+i_{s+1}-t} w Q^t over every t giving a
    valid word.  When i_s > 2 i_{s+1} terms with t > i_{s+1} do occur, e.g.
    T_1(Q^4 w Q^1) = Q^4 w Q^1 + Q^3 w Q^2.
    """
    word = tuple(word)
    if not 1 <= s <= len(word) - 1:
        raise ValueError(f"T_{s} undefined on a word of length {len(word)}")
    if not is_valid(word):
        return frozenset()
    p = s - 1
    r, q = word[p], word[p + 1]
    head, rest = word[:p], word[p + 2:]
    lo = sum(rest) + 1
    hi = (r + q - lo) // 2
    out = []
    for t in range(hi, lo - 1, -1):
        if adem_coefficient(r, q, t):
            new = head + (r + q - t, t) + rest
            if is_valid(new):
                out.append(new)
    return fsum(out)


def _operator_matrix(f, basis) -> F2Matrix:
    index = {w: i for i, w in enumerate(basis)}
    rows = []
    for w in basis:
        v = 0
        for x in f(w):
            v ^= 1 << index[x]
        rows.append(v)
    return F2Matrix(tuple(rows), len(basis), tuple(basis), tuple(basis))


def composite_order(k: int) -> tuple[int, ...]:
    """Order in which the T_s are applied within one sweep: T_1 first."""
    return tuple(range(1, k))


def e_matrix(k: int, degree: int, order: tuple[int, ...] | None = None,
             fuel: int | None = None) -> F2Matrix:
    """Matrix of e_k on the degree-``degree`` wreath basis (row per source word).

    e_k is the limit of powers of the sweep T_{order[0]}, T_{order[1]}, ...;
    iteration stops at the first power equal to its successor.
    """
    return _e_matrix(k, degree, order, DEFAULT_FUEL if fuel is None else fuel)


@lru_cache(maxsize=None)
def _e_matrix(k, degree, order, fuel):
    basis = wreath_basis(k, degree)
    stored = order is None and _store is not None
    if stored:
        rows = _store.load(k, degree, basis)
        if rows is not None:
            return F2Matrix(tuple(rows), len(basis), tuple(basis), tuple(basis))
    if order is None:
        order = composite_order(k)
    sweep = F2Matrix.identity(len(basis), tuple(basis))
    for s in order:
        sweep = sweep @ _operator_matrix(lambda w, s=s: T_s(s, w), basis)
    power = sweep
    for _ in range(fuel):
        nxt = power @ sweep
        if nxt == power:
            if stored:
                _store.save(k, degree, basis, power.rows)
            return F2Matrix(power.rows, power.ncols, tuple(basis), tuple(basis))
        power = nxt
    raise StabilizationError(f"e_{k} did not stabilize in degree {degree} after {fuel} sweeps")


def e_k(k: int, word: Sequence[int]) -> frozenset:
    word = tuple(word)
    if len(word) != k:
        raise ValueError(f"e_{k} applied to a word of length {len(word)}")
    if not is_valid(word):
        return frozenset()
    if k <= 1:
        return frozenset([word])
    m = e_matrix(k, degree(word))
    i = m.row_labels.index(word)
    return frozenset(m.col_labels[j] for j in bits(m.rows[i]))


def apply_linear(f, words: Iterable) -> frozenset:
    out: set = set()
    for w in words:
        out ^= f(w)
    return frozenset(out)


def nu_k(word: Sequence[int]) -> frozenset:
    """The canonical surjection onto the bar algebra: Q^i -> Qbar^i, then normalize."""
    return normalize_bar(tuple(word), 1)


def iota_star(k: int, bar_word: Sequence[int]) -> frozenset:
    """(iota_k)_*: sigma^k Qbar^I iota_1 -> e_k(Q^I iota_1)."""
    bar_word = tuple(bar_word)
    if not bar_algebra.is_normal(bar_word, 1) or len(bar_word) != k:
        raise ValueError(f"iota_star expects a normal bar word of length {k}: {bar_word}")
    return e_k(k, bar_word)


def p_star(k: int, word: Sequence[int]) -> frozenset:
    """(p_k)_*: Q^I iota_1 -> sigma^k Qbar^I iota_1, as a sum of normal bar words.

    The suspension sigma^k is implicit: the result lives in length-k words.
    """
    word = tuple(word)
    if len(word) != k:
        raise ValueError(f"p_star({k}) applied to a word of length {len(word)}")
    return nu_k(word)


def format_wreath(word: Sequence[int]) -> str:
    return " w ".join(f"Q^{i}" for i in word) + (" i" if word else "i")


def parse_wreath(text: str) -> tuple[int, ...]:
    """Parse ``Q^3 w Q^1 i`` into (3, 1)."""
    toks = text.split()
    if not toks or toks[-1] != "i":
        raise ValueError(f"wreath word must end with 'i': {text!r}")
    ops = [t for t in toks[:-1] if t != "w"]
    out = []
    for tok in ops:
        if not tok.startswith("Q^"):
            raise ValueError(f"expected Q^<int>, got {tok!r}")
        out.append(int(tok[2:]))
    return tuple(out)
