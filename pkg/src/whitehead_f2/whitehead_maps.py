"""The maps (d_k)_*, (delta_k)_*, (alpha_k)_* and their E_0 matrices.

    A_k = H_*(B^k D_{2^k}(S^1)),   d_k: A_{k+1} -> A_k,   delta_k: A_k -> A_{k+1}

Matrices use the row convention of ``f2core``: one row per source
generator, so the composite "first f, then g" is ``F @ G``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from . import bar_algebra, wreath_algebra
from .bar_algebra import adem_coefficient
from .f2core import F2Matrix, left_kernel, rank, reduce_rows, same_span
from .free_dl import (Base, Element, Gen, apply_Q, as_allowable, enumerate_generators,
                      enumerate_primitives, generator_weights, is_generator,
                      product)

log = logging.getLogger(__name__)

CERTIFICATE_VERSION = 1


class MalformedGenerator(ValueError):
    pass


class ResourceExhausted(RuntimeError):
    """A rewriting or fixpoint computation exceeded its budget."""


def mixed_adem_pair(r: int, s: int, t_min: int) -> list[tuple[int, int]]:
    """Pairs (r+s-t, t) in Qbar^r Q^s = sum_t c Q^{r+s-t} Qbar^t, t_min <= t <= s."""
    return [(r + s - t, t) for t in range(s, t_min - 1, -1) if adem_coefficient(r, s, t)]


def _check_gen(g: Gen, k: int):
    if not isinstance(g, Gen) or g.base.k != k or not is_generator(g):
        raise MalformedGenerator(f"not a generator of A_{k}: {g!r}")


@lru_cache(maxsize=None)
def _d_gen(k: int, g: Gen) -> Element:
    out = Element()
    for word in wreath_algebra.e_k(k + 1, g.base.bar):
        for w in bar_algebra.normalize_bar(word[1:], 1):
            out += apply_Q(g.ops + (word[0],), Element.base(Base(k, w)))
    return out


def d_star(k: int, x: Gen | Element) -> Element:
    """(d_k)_*: A_{k+1} -> A_k, an algebra map."""
    if isinstance(x, Gen):
        _check_gen(x, k + 1)
        return _d_gen(k, x)
    out = Element()
    for m in x.terms:
        term = Element.unit()
        for g in m:
            _check_gen(g, k + 1)
            term = product(term, _d_gen(k, g))
        out += term
    return out


def _transport(r: int, suffix: tuple[int, ...], floor: int) -> dict:
    """Move Qbar^r rightwards past Q^{suffix}; return {(new Q's, t): 1}.

    ``floor`` is the least barred index that survives on reaching the base.
    Each created Q index must be positive, which bounds t from below.
    """
    states = {((), r): 1}
    for n, q in enumerate(suffix):
        slack = sum(x - 1 for x in suffix[n + 1:])
        lo = floor - slack
        nxt: dict = {}
        for (made, t) in states:
            for a, t2 in mixed_adem_pair(t, q, lo):
                if a < 1:
                    continue
                key = (made + (a,), t2)
                if key in nxt:
                    del nxt[key]
                else:
                    nxt[key] = 1
        states = nxt
    return states


@lru_cache(maxsize=None)
def _delta_gen(k: int, g: Gen) -> Element:
    out = Element()
    ops, base = g.ops, g.base
    floor = sum(base.bar) + 1
    for s in range(len(ops)):
        prefix, r, suffix = ops[:s], ops[s], ops[s + 1:]
        for made, t in _transport(r, suffix, floor):
            for w in bar_algebra.normalize_bar((t,) + base.bar, 1):
                out += apply_Q(prefix + made, Element.base(Base(k + 1, w)))
    return out


def delta_star(k: int, x: Gen | Element) -> Element:
    """(delta_k)_*: A_k -> A_{k+1} on generators (extended linearly).

    Not multiplicative; use ``delta_e0`` for products.
    """
    if isinstance(x, Gen):
        _check_gen(x, k)
        return _delta_gen(k, x)
    out = Element()
    for m in x.terms:
        if len(m) != 1:
            raise MalformedGenerator(f"delta_star is only defined on generators; got a product in A_{k}")
        _check_gen(m[0], k)
        out += _delta_gen(k, m[0])
    return out


def _weight_part(x: Element, weight: int) -> Element:
    return Element(m for m in x.terms if sum(g.weight for g in m) == weight)


def delta_e0(k: int, x: Element) -> Element:
    """Associated graded of (delta_k)_*, extended multiplicatively."""
    out = Element()
    for m in x.terms:
        term = Element.unit()
        for g in m:
            _check_gen(g, k)
            term = product(term, _weight_part(_delta_gen(k, g), g.weight))
        out += term
    return out


def alpha_star(k: int, j: int, bar: Sequence[int]) -> frozenset:
    """(alpha_k)_* Q^j sigma^k Qbar^I iota_1 = sigma^{k+1} Qbar^j Qbar^I iota_1 (normal words)."""
    return bar_algebra.normalize_bar((j,) + tuple(bar), 1)


def alpha_star_split(k: int, j: int, bar: Sequence[int]) -> frozenset:
    """Same map computed as (p_{k+1})_* (Q^j wr (iota_k)_*(...))."""
    out: set = set()
    for word in wreath_algebra.iota_star(k, tuple(bar)):
        out ^= wreath_algebra.p_star(k + 1, (j,) + word)
    return frozenset(out)


# --- E_0 matrices ----------------------------------------------------------

@dataclass(frozen=True)
class E0Matrix:
    tag: str
    source_k: int
    target_k: int
    degree: int
    weight: int
    matrix: F2Matrix

    @property
    def source(self) -> tuple:
        return self.matrix.row_labels

    @property
    def target(self) -> tuple:
        return self.matrix.col_labels


BASES = ("primitive", "indecomposable")


def _basis(basis: str, k: int, degree: int, weight: int) -> list[Gen]:
    if basis == "primitive":
        return enumerate_primitives(k, degree, weight)
    if basis == "indecomposable":
        return enumerate_generators(k, degree, weight)
    raise ValueError(f"unknown basis {basis!r}")


def _coordinates(x: Element, basis: str, weight: int) -> set[Gen]:
    out: set = set()
    for m in x.terms:
        if sum(g.weight for g in m) != weight:
            continue
        if basis == "indecomposable":
            if len(m) == 1:
                out ^= {m[0]}
            continue
        p = as_allowable(m)
        if p is None:
            raise ValueError(f"non-primitive term {m} in the image of a primitive")
        out ^= {p}
    return out


def _matrix(source: list[Gen], target: list[Gen], f, weight: int, basis: str) -> F2Matrix:
    index = {g: i for i, g in enumerate(target)}
    rows = []
    for g in source:
        v = 0
        for h in _coordinates(f(g), basis, weight):
            v ^= 1 << index[h]
        rows.append(v)
    return F2Matrix(tuple(rows), len(target), tuple(source), tuple(target))


@lru_cache(maxsize=None)
def e0_matrix(which: str, k: int, degree: int, weight: int,
              basis: str = "primitive") -> E0Matrix:
    """E_0 of d_k (A_{k+1} -> A_k) or delta_k (A_k -> A_{k+1}) in one bidegree.

    ``basis="primitive"`` uses the classes Q^J v with excess >= |v| (squares
    included); ``"indecomposable"`` uses algebra generators modulo products.
    """
    if which == "d":
        src, tgt = _basis(basis, k + 1, degree, weight), _basis(basis, k, degree, weight)
        m = _matrix(src, tgt, lambda g: _d_gen(k, g), weight, basis)
        return E0Matrix("d", k + 1, k, degree, weight, m)
    if which == "delta":
        src, tgt = _basis(basis, k, degree, weight), _basis(basis, k + 1, degree, weight)
        m = _matrix(src, tgt, lambda g: _delta_gen(k, g), weight, basis)
        return E0Matrix("delta", k, k + 1, degree, weight, m)
    raise ValueError(f"unknown map {which!r}")


def homotopy_matrix(k: int, degree: int, weight: int, basis: str = "primitive") -> F2Matrix:
    """M_k = E0(d_k) E0(delta_k) + E0(delta_{k-1}) E0(d_{k-1}) on A_k."""
    gens = _basis(basis, k, degree, weight)
    up = e0_matrix("delta", k, degree, weight, basis).matrix @ e0_matrix("d", k, degree, weight, basis).matrix
    if k > 0:
        down = (e0_matrix("d", k - 1, degree, weight, basis).matrix
                @ e0_matrix("delta", k - 1, degree, weight, basis).matrix)
        up = up + down
    return F2Matrix(up.rows, up.ncols, tuple(gens), tuple(gens))


# --- verification ----------------------------------------------------------

@dataclass
class CheckRecord:
    check: str
    k: int
    degree: int
    weight: int
    rank: int
    dim: int
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        if not d["note"]:
            del d["note"]
        return d


@dataclass
class Certificate:
    check: str
    parameters: dict
    records: list[CheckRecord] = field(default_factory=list)
    error: str | None = None

    @property
    def verdict(self) -> str:
        if self.error is not None:
            return "exhausted"
        return "pass" if all(r.passed for r in self.records) else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def as_dict(self) -> dict:
        out = {
            "version": CERTIFICATE_VERSION,
            "parameters": dict(sorted(self.parameters.items())),
            "checks": [r.as_dict() for r in self.records],
            "verdict": self.verdict,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def bidegrees(k: int, max_degree: int, max_weight: int | None = None) -> list[tuple[int, int]]:
    """(degree, weight) pairs where A_k has nonzero primitives."""
    out = []
    for d in range(1, max_degree + 1):
        for w in generator_weights(k, d):
            if max_weight is None or w <= max_weight:
                out.append((d, w))
    return out


def _union_bidegrees(ks: Iterable[int], max_degree: int, max_weight: int | None):
    seen = set()
    for k in ks:
        if k >= 0:
            seen.update(bidegrees(k, max_degree, max_weight))
    return sorted(seen)


def check_chain(k: int, degree: int, weight: int) -> CheckRecord:
    """E0(d_k) o E0(d_{k+1}) = 0: A_{k+2} -> A_k."""
    m = e0_matrix("d", k + 1, degree, weight).matrix @ e0_matrix("d", k, degree, weight).matrix
    return CheckRecord("chain", k, degree, weight, rank(m), m.nrows, m.is_zero())


def check_homotopy(k: int, degree: int, weight: int) -> CheckRecord:
    gens = enumerate_primitives(k, degree, weight)
    if k == 0:
        d0 = e0_matrix("d", 0, degree, weight).matrix
        r = rank(d0)
        coker = len(gens) - r
        expected = 1 if (degree, weight) == (1, 1) else 0
        return CheckRecord("homotopy", 0, degree, weight, r, len(gens), coker == expected,
                           f"coker={coker}")
    m = homotopy_matrix(k, degree, weight)
    r = rank(m)
    note = "identity" if m.is_identity() else ("unitriangular" if m.is_unitriangular() else "")
    return CheckRecord("homotopy", k, degree, weight, r, len(gens), r == len(gens), note)


def check_exactness(k: int, degree: int, weight: int) -> CheckRecord:
    """im E0(d_k) = ker E0(d_{k-1}) inside the primitives of A_k."""
    dk = e0_matrix("d", k, degree, weight).matrix       # rows A_{k+1}, cols A_k
    dk1 = e0_matrix("d", k - 1, degree, weight).matrix  # rows A_k, cols A_{k-1}
    im = reduce_rows(dk.rows)[0]
    ker = left_kernel(dk1)
    ok = same_span(im, ker)
    return CheckRecord("exactness", k, degree, weight, len(im), dk1.nrows, ok, f"dim ker={len(ker)}")


def check_idempotent(k: int, degree: int) -> CheckRecord:
    """e_k^2 = e_k, nu T_s = nu, nu e_k = nu, p o iota = id and rank e_k = basis count."""
    basis = wreath_algebra.wreath_basis(k, degree)
    normal = bar_algebra.enumerate_bar_basis(k, degree - k, 1)
    problems = []
    if k >= 1:
        e = wreath_algebra.e_matrix(k, degree) if k >= 2 else F2Matrix.identity(len(basis), tuple(basis))
        if e @ e != e:
            problems.append("e^2")
        if rank(e) != len(normal):
            problems.append("rank")
        for w in basis:
            nu = wreath_algebra.nu_k(w)
            for s in range(1, k):
                if wreath_algebra.apply_linear(wreath_algebra.nu_k, wreath_algebra.T_s(s, w)) != nu:
                    problems.append(f"nu T_{s} at {w}")
            if wreath_algebra.apply_linear(wreath_algebra.nu_k, wreath_algebra.e_k(k, w)) != nu:
                problems.append(f"nu e at {w}")
        for w in normal:
            back = wreath_algebra.apply_linear(lambda x: wreath_algebra.p_star(k, x),
                                               wreath_algebra.iota_star(k, w))
            if back != frozenset([w]):
                problems.append(f"p iota at {w}")
        r = rank(e)
    else:
        r = len(normal)
    return CheckRecord("idempotent", k, degree, 0, r, len(normal), not problems, "; ".join(problems[:5]))


def check_alpha(k: int, degree: int) -> CheckRecord:
    """alpha_star = alpha_star_split on every Q^j sigma^k Qbar^I iota_1 of this degree."""
    bad = []
    count = 0
    for bdeg in range(1, degree + 1):
        for bar in bar_algebra.enumerate_bar_basis(k, bdeg - k, 1):
            j = degree - bdeg
            count += 1
            if alpha_star(k, j, bar) != alpha_star_split(k, j, bar):
                bad.append((j, bar))
    return CheckRecord("alpha", k, degree, 0, count - len(bad), count, not bad,
                       "; ".join(str(b) for b in bad[:5]))


def _tasks(check: str, max_k: int, max_degree: int, max_weight: int | None):
    if check == "chain":
        for k in range(max_k):
            for d, w in _union_bidegrees([k + 2], max_degree, max_weight):
                yield (check, k, d, w)
    elif check == "homotopy":
        for k in range(max_k + 1):
            for d, w in _union_bidegrees([k], max_degree, max_weight):
                yield (check, k, d, w)
    elif check == "exactness":
        for k in range(1, max_k + 1):
            for d, w in _union_bidegrees([k], max_degree, max_weight):
                yield (check, k, d, w)
    elif check == "idempotent":
        for k in range(1, max_k + 1):
            for d in range(1, max_degree + 1):
                yield (check, k, d, 0)
    elif check == "alpha":
        for k in range(max_k + 1):
            for d in range(1, max_degree + 1):
                yield (check, k, d, 0)
    else:
        raise ValueError(f"unknown check {check!r}")


def run_task(task) -> CheckRecord:
    check, k, d, w = task
    if check == "chain":
        return check_chain(k, d, w)
    if check == "homotopy":
        return check_homotopy(k, d, w)
    if check == "exactness":
        return check_exactness(k, d, w)
    if check == "idempotent":
        return check_idempotent(k, d)
    return check_alpha(k, d)


CHECKS = ("chain", "homotopy", "exactness", "idempotent", "alpha")


def verify(check: str, max_k: int = 2, max_degree: int = 20, max_weight: int | None = None,
           jobs: int = 1) -> Certificate:
    """Run one family of checks over every bidegree in range."""
    params = {"check": check, "max_k": max_k, "max_degree": max_degree, "max_weight": max_weight}
    cert = Certificate(check, params)
    tasks = list(_tasks(check, max_k, max_degree, max_weight))
    try:
        if jobs > 1 and len(tasks) > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                cert.records = list(pool.map(run_task, tasks, chunksize=4))
        else:
            cert.records = [run_task(t) for t in tasks]
    except (bar_algebra.NormalizationError, wreath_algebra.StabilizationError,
            RecursionError, MemoryError) as exc:
        cert.error = f"{type(exc).__name__}: {exc}"
    for r in cert.records:
        if not r.passed:
            log.warning("%s failed at k=%d degree=%d weight=%d (%s)", r.check, r.k, r.degree, r.weight, r.note)
    return cert
