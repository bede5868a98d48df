"""The algebra of barred operations Qbar^j acting on iota_n.

A bar word is a tuple of integers ``(i_1, ..., i_k)`` standing for
Qbar^{i_1} ... Qbar^{i_k} iota_n.  Formal sums of bar words are frozensets.
Relations:

* Adem:  Qbar^r Qbar^s = sum_t c(r, s, t) Qbar^{r+s-t} Qbar^t,
  c(r, s, t) = binom(s-r+t, s-t) + binom(s-r+t, 2t-r)
* excess: a word (j_1, ..., j_k) is zero if j_1 < j_2 + ... + j_k + n;
  since the relations form a two-sided ideal this applies to every suffix.

Normal words satisfy i_s >= 2 i_{s+1} + 1 and i_k >= n.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator

from .f2core import binom2

DEFAULT_FUEL = 10**6


class NormalizationError(RuntimeError):
    """Rewriting ran out of fuel; ``word`` is the word being rewritten."""

    def __init__(self, word, steps):
        super().__init__(f"no normal form for {word} within {steps} rewrite steps")
        self.word = word
        self.steps = steps


def adem_coefficient(r: int, s: int, t: int) -> int:
    """Coefficient of X^{r+s-t} X^t in X^r X^s (barred and mixed relations)."""
    return binom2(s - r + t, s - t) ^ binom2(s - r + t, 2 * t - r)


def bar_adem_pair(r: int, s: int, t_min: int) -> list[tuple[int, int]]:
    """Pairs (r+s-t, t) with odd coefficient in Qbar^r Qbar^s, for t_min <= t <= s.

    The coefficient vanishes for t > s; the sum is infinite downwards, so the
    caller supplies the smallest ``t`` that can survive.
    """
    if r >= 2 * s + 1:
        raise ValueError(f"already normal: ({r}, {s})")
    return [(r + s - t, t) for t in range(s, t_min - 1, -1) if adem_coefficient(r, s, t)]


def degree(word: tuple[int, ...], n: int = 1) -> int:
    return sum(word) - len(word) + n


def is_normal(word: tuple[int, ...], n: int = 1) -> bool:
    if word and word[-1] < n:
        return False
    return all(a >= 2 * b + 1 for a, b in zip(word, word[1:]))


def is_killed(word: tuple[int, ...], n: int = 1) -> bool:
    """True if some suffix violates the excess relation."""
    tail = n
    for i in reversed(word):
        if i < tail:
            return True
        tail += i
    return False


def _suffix_min(word: tuple[int, ...], n: int) -> list[int]:
    """``mins[p]`` = n + sum(word[p:]); position p-1 must be at least this."""
    mins = [n] * (len(word) + 1)
    for p in range(len(word) - 1, -1, -1):
        mins[p] = mins[p + 1] + word[p]
    return mins


def _rewrite_at(word: tuple[int, ...], p: int, n: int) -> Iterator[tuple[int, ...]]:
    """Adem rewrite of positions (p, p+1); yields only surviving words."""
    r, s = word[p], word[p + 1]
    rest = word[p + 2:]
    lo = sum(rest) + n
    head = word[:p]
    for a, t in bar_adem_pair(r, s, lo):
        new = head + (a, t) + rest
        if not is_killed(new, n):
            yield new


def _find_pair(word, leftmost):
    positions = range(len(word) - 1)
    if not leftmost:
        positions = reversed(positions)
    for p in positions:
        if word[p] <= 2 * word[p + 1]:
            return p
    return None


def normalize_bar(word: Iterable[int], n: int = 1, *, leftmost: bool = True,
                  fuel: int | None = None) -> frozenset:
    """Rewrite a bar word to a sum of normal words.

    ``leftmost`` picks which inadmissible pair is rewritten first; both
    strategies terminate with the same answer.  ``fuel`` bounds the number
    of rewrite steps (default: the module-level ``DEFAULT_FUEL``).
    """
    word = tuple(word)
    if leftmost and fuel is None:
        return _normalize_cached(word, n, DEFAULT_FUEL)
    return _normalize(word, n, leftmost, DEFAULT_FUEL if fuel is None else fuel)


@lru_cache(maxsize=None)
def _normalize_cached(word, n, fuel):
    return _normalize(word, n, True, fuel)


def _normalize(word, n, leftmost, fuel):
    if is_killed(word, n):
        return frozenset()
    todo = {word: 1}
    done: set = set()
    steps = 0
    while todo:
        w = next(iter(todo))
        del todo[w]
        p = _find_pair(w, leftmost)
        if p is None:
            done ^= {w}
            continue
        steps += 1
        if steps > fuel:
            raise NormalizationError(word, fuel)
        for new in _rewrite_at(w, p, n):
            if new in todo:
                del todo[new]
            else:
                todo[new] = 1
    return frozenset(done)


def normalize_sum(words: Iterable[tuple[int, ...]], n: int = 1) -> frozenset:
    out: set = set()
    for w in words:
        out ^= normalize_bar(w, n)
    return frozenset(out)


def word_key(word: tuple[int, ...]):
    """Global order on words of a fixed length: by degree, then indices."""
    return (len(word), sum(word), word)


@lru_cache(maxsize=None)
def _normal_words(k: int, total: int, bound: int, n: int) -> tuple[tuple[int, ...], ...]:
    # normal words of length k, index sum ``total``, first index <= bound
    if k == 0:
        return ((),) if total == 0 else ()
    out = []
    for first in range(min(bound, total), 0, -1):
        if first < n and k == 1:
            continue
        for rest in _normal_words(k - 1, total - first, (first - 1) // 2, n):
            if k == 1 or rest:
                out.append((first,) + rest)
    return tuple(out)


def enumerate_bar_basis(k: int, degree: int, n: int = 1) -> list[tuple[int, ...]]:
    """Normal words of length k and (unsuspended) degree ``degree``, sorted."""
    if k < 0 or degree < 0:
        return []
    if k == 0:
        return [()] if degree == n else []
    total = degree + k - n
    words = [w for w in _normal_words(k, total, total, n) if w[-1] >= n]
    return sorted(words, key=word_key)


def format_bar(word: tuple[int, ...]) -> str:
    return " ".join([f"bQ^{i}" for i in word] + ["i"])


def parse_bar(text: str) -> tuple[int, ...]:
    """Parse ``bQ^5 bQ^2 i`` into (5, 2)."""
    toks = text.split()
    if not toks or toks[-1] != "i":
        raise ValueError(f"bar word must end with 'i': {text!r}")
    out = []
    for tok in toks[:-1]:
        if not tok.startswith("bQ^"):
            raise ValueError(f"expected bQ^<int>, got {tok!r}")
        out.append(int(tok[3:]))
    return tuple(out)
