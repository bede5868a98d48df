"""Command-line front end: tables, E_0 matrices, element maps and certificates.

Exit codes: 0 pass, 1 verification failure, 2 usage or parse error,
3 resource exhaustion, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from . import bar_algebra, wreath_algebra, whitehead_maps
from .bar_algebra import format_bar
from .free_dl import ParseError, format_element, format_gen, parse_element
from .wreath_algebra import format_wreath

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_EXHAUSTED, EXIT_IO = 0, 1, 2, 3, 4

EXHAUSTION = (bar_algebra.NormalizationError, wreath_algebra.StabilizationError,
              RecursionError, MemoryError)


def code_version() -> str:
    """sha256 over the package sources; any edit invalidates cached matrices."""
    h = hashlib.sha256()
    here = Path(__file__).parent
    for path in sorted(here.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()


class MatrixCache:
    """On-disk JSON store of e_k matrices, one file per (k, degree).

    Each entry records the code version and the wreath basis it was computed
    on; a mismatch in either is treated as a miss and the entry is rewritten.
    """

    def __init__(self, directory: str | os.PathLike, version: str | None = None):
        self.dir = Path(directory)
        self.version = version or code_version()
        self.hits = 0
        self.misses = 0

    def path(self, k: int, degree: int) -> Path:
        return self.dir / f"e{k}_d{degree}.json"

    def load(self, k, degree, basis):
        try:
            doc = json.loads(self.path(k, degree).read_text())
        except (OSError, ValueError):
            self.misses += 1
            return None
        if (doc.get("version") != self.version or doc.get("k") != k or doc.get("degree") != degree
                or [tuple(w) for w in doc.get("basis", [])] != list(basis)):
            self.misses += 1
            return None
        self.hits += 1
        return [sum(1 << j for j in cols) for cols in doc["rows"]]

    def save(self, k, degree, basis, rows):
        doc = {
            "k": k,
            "degree": degree,
            "version": self.version,
            "basis": [list(w) for w in basis],
            "rows": [_bit_list(r) for r in rows],
        }
        self.dir.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".e", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh, indent=1)
            os.replace(tmp, self.path(k, degree))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise


def _bit_list(v: int) -> list[int]:
    return [j for j in range(v.bit_length()) if (v >> j) & 1]


# --- output ------------------------------------------------------------------

def emit(rows: list[dict], fmt: str, out=None) -> None:
    """Write a list of flat records as text columns, CSV or JSON."""
    out = out or sys.stdout
    if fmt == "json":
        json.dump(rows, out, indent=2)
        out.write("\n")
        return
    if not rows:
        return
    fields = list(rows[0])
    if fmt == "csv":
        w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
        return
    cells = [[_cell(r[f]) for f in fields] for r in rows]
    widths = [max(len(f), *(len(c[i]) for c in cells)) for i, f in enumerate(fields)]
    out.write("  ".join(f.ljust(n) for f, n in zip(fields, widths)).rstrip() + "\n")
    for c in cells:
        out.write("  ".join(x.ljust(n) for x, n in zip(c, widths)).rstrip() + "\n")


def _cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return "; ".join(str(x) for x in v)
    return str(v)


def _suspended(k: int, word) -> str:
    if k == 0:
        return "i"
    return f"s^{k} " + format_bar(word)


# --- commands ----------------------------------------------------------------

def cmd_basis(args) -> int:
    rows = []
    for d in range(1, args.max_degree + 1):
        words = bar_algebra.enumerate_bar_basis(args.k, d - args.k, 1)
        rows.append({"degree": d, "count": len(words),
                     "basis": [_suspended(args.k, w) for w in words]})
    emit(rows, args.format)
    return EXIT_PASS


def poincare_series(k: int, max_degree: int) -> list[int]:
    """Dimension of the degree-d part of the sigma^k Qbar^I iota_1 span, d = 1..max_degree."""
    return [len(bar_algebra.enumerate_bar_basis(k, d - k, 1)) for d in range(1, max_degree + 1)]


def cmd_poincare(args) -> int:
    series = poincare_series(args.k, args.max_degree)
    if args.format == "text":
        print(" ".join(str(c) for c in series))
    else:
        emit([{"degree": d, "count": c} for d, c in enumerate(series, 1)], args.format)
    return EXIT_PASS


def cmd_idempotent(args) -> int:
    basis = wreath_algebra.wreath_basis(args.k, args.degree)
    rows = []
    for w in basis:
        image = sorted(wreath_algebra.e_k(args.k, w), key=bar_algebra.word_key)
        rows.append({"word": format_wreath(w),
                     "image": " + ".join(format_wreath(x) for x in image) or "0"})
    emit(rows, args.format)
    return EXIT_PASS


def cmd_map(args) -> int:
    e0 = whitehead_maps.e0_matrix(args.which, args.k, args.degree, args.weight, args.basis)
    m = e0.matrix
    if args.format == "json":
        doc = {"map": e0.tag, "source_k": e0.source_k, "target_k": e0.target_k,
               "degree": e0.degree, "weight": e0.weight,
               "source": [format_gen(g) for g in e0.source],
               "target": [format_gen(g) for g in e0.target],
               "rows": m.to_lists()}
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return EXIT_PASS
    rows = []
    for g, r in zip(e0.source, m.rows):
        image = [format_gen(e0.target[j]) for j in range(m.ncols) if (r >> j) & 1]
        rows.append({"source": format_gen(g), "image": " + ".join(image) or "0"})
    emit(rows, args.format)
    return EXIT_PASS


def apply_text(which: str, k: int, text: str, e0: bool = False) -> str:
    """Parse ``text``, apply d_k or delta_k, and print the result in the same grammar."""
    x = parse_element(text)
    if len(x.degrees()) > 1:
        raise ParseError("element is not homogeneous", 0)
    if which == "d":
        return format_element(whitehead_maps.d_star(k, x))
    if e0:
        return format_element(whitehead_maps.delta_e0(k, x))
    return format_element(whitehead_maps.delta_star(k, x))


def cmd_apply(args) -> int:
    try:
        print(apply_text(args.which, args.k, args.element, args.e0))
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except whitehead_maps.MalformedGenerator as exc:
        hint = "" if args.which == "d" or args.e0 else " (use --e0 for products)"
        print(f"error: {exc}{hint}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_PASS


def _stamp(doc: dict, enabled: bool) -> dict:
    if enabled:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return doc


def _write_doc(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".cert", suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, target)


def _summary(cert: whitehead_maps.Certificate, out) -> None:
    n = len(cert.records)
    bad = cert.failures()
    line = f"{cert.check}: {cert.verdict} ({n - len(bad)}/{n} bidegrees)"
    if cert.error:
        line += f" [{cert.error}]"
    print(line, file=out)
    for r in bad[:10]:
        print(f"  failed k={r.k} degree={r.degree} weight={r.weight} {r.note}".rstrip(), file=out)


def _exit_for(verdicts: list[str]) -> int:
    if "exhausted" in verdicts:
        return EXIT_EXHAUSTED
    return EXIT_FAIL if "fail" in verdicts else EXIT_PASS


def _run(check: str, args) -> whitehead_maps.Certificate:
    return whitehead_maps.verify(check, args.max_k, args.max_degree, args.max_weight, args.jobs)


def cmd_verify(args) -> int:
    cert = _run(args.check, args)
    doc = _stamp(cert.as_dict(), args.timestamp)
    try:
        if args.output:
            _write_doc(doc, args.output)
        elif args.format == "json":
            _write_doc(doc, None)
    except OSError as exc:
        print(f"cannot write certificate: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.format != "json" or args.output:
        _summary(cert, sys.stdout if args.format != "json" else sys.stderr)
    return _exit_for([cert.verdict])


def cmd_certify(args) -> int:
    """Every check family in one document."""
    certs = [_run(c, args) for c in whitehead_maps.CHECKS]
    verdicts = [c.verdict for c in certs]
    overall = "exhausted" if "exhausted" in verdicts else ("fail" if "fail" in verdicts else "pass")
    doc = {
        "version": whitehead_maps.CERTIFICATE_VERSION,
        "parameters": {"max_degree": args.max_degree, "max_k": args.max_k,
                       "max_weight": args.max_weight},
        "code_version": code_version(),
        "certificates": [c.as_dict() for c in certs],
        "verdict": overall,
    }
    try:
        _write_doc(_stamp(doc, args.timestamp), args.output)
    except OSError as exc:
        print(f"cannot write certificate: {exc}", file=sys.stderr)
        return EXIT_IO
    for c in certs:
        _summary(c, sys.stderr)
    return _exit_for(verdicts)


# --- argument parsing ----------------------------------------------------------

def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--cache-dir", help="persistent store for e_k matrices")
    common.add_argument("--fuel", type=_positive,
                        help="step budget for each rewriting or fixpoint loop")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="whitehead-f2", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("basis", parents=[common], help="normal bar words per degree")
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--max-degree", type=_positive, default=20)
    s.set_defaults(func=cmd_basis)

    s = sub.add_parser("poincare", parents=[common], help="basis counts per degree")
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--max-degree", type=_positive, default=20)
    s.set_defaults(func=cmd_poincare)

    s = sub.add_parser("idempotent", parents=[common], help="e_k on the wreath basis")
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--degree", type=_positive, required=True)
    s.set_defaults(func=cmd_idempotent)

    s = sub.add_parser("map", parents=[common], help="E_0 matrix of d_k or delta_k")
    s.add_argument("--which", choices=("d", "delta"), required=True)
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--degree", type=_positive, required=True)
    s.add_argument("--weight", type=_positive, required=True)
    s.add_argument("--basis", choices=whitehead_maps.BASES, default="primitive")
    s.set_defaults(func=cmd_map)

    s = sub.add_parser("apply", parents=[common], help="apply d_k or delta_k to an element")
    s.add_argument("--which", choices=("d", "delta"), required=True)
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--e0", action="store_true", help="multiplicative associated-graded delta")
    s.add_argument("element")
    s.set_defaults(func=cmd_apply)

    for name, func in (("verify", cmd_verify), ("certify", cmd_certify)):
        s = sub.add_parser(name, parents=[common],
                           help="run one check family" if name == "verify" else "run every check family")
        if name == "verify":
            s.add_argument("--check", choices=whitehead_maps.CHECKS, required=True)
        s.add_argument("--max-k", type=_nonneg, default=2)
        s.add_argument("--max-degree", type=_positive, default=20)
        s.add_argument("--max-weight", type=_positive)
        s.add_argument("--jobs", type=_positive, default=1)
        s.add_argument("--output", "-o", help="certificate path ('-' for stdout)")
        s.add_argument("--timestamp", action="store_true",
                       help="add a 'timestamp' field (the only non-deterministic field)")
        s.set_defaults(func=func)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.fuel is not None:
        bar_algebra.DEFAULT_FUEL = args.fuel
        wreath_algebra.DEFAULT_FUEL = args.fuel
    if args.cache_dir:
        wreath_algebra.set_matrix_store(MatrixCache(args.cache_dir))
    try:
        return args.func(args)
    except EXHAUSTION as exc:
        print(f"resource exhausted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if args.cache_dir:
            wreath_algebra.set_matrix_store(None)


if __name__ == "__main__":
    sys.exit(main())
