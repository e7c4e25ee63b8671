"""Command-line front end.

    cyclic-billiards invariants --m 3 --n 4..8
    cyclic-billiards cohomology --m 3 --n 5 --check-auxiliary
    cyclic-billiards find-orbits --body ellipsoid --axes 1,1.1,1.2,1.3 --n 2
    cyclic-billiards verify-sphere --m 3 --n 7

Reports are JSON (``schema: 1``) or a flat CSV projection. Exit codes:
0 success or warning, 1 verification failure, 2 usage error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import invariants as inv
from .billiard_core import Ellipsoid, length, sphere
from .cohomology import (DEFAULT_CAP, ResourceLimitError, auxiliary_complex_dims,
                         verify_cohomology)
from .orbit_finder import (FinderDiagnostics, SearchSettings, count_distinct_orbits,
                           find_orbits, morse_data)
from .sphere_oracle import SphereOrbitSpec, family_table, make_regular_orbit

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class Report:
    command: str
    inputs: dict
    results: list = field(default_factory=list)
    status: str = "PASS"
    summary: str = ""
    seed: int | None = None
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_json(self, deterministic: bool) -> str:
        doc = {
            "schema": 1,
            "tool": "cyclic-billiards",
            "version": __version__,
            "command": self.command,
            "input": self.inputs,
            "status": self.status,
            "summary": self.summary,
            "seed": self.seed,
            "results": self.results,
        }
        doc.update(self.extra)
        if not deterministic:
            doc["timings"] = self.timings
        return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        rows = [_flatten(r) for r in self.results]
        cols = sorted({k for r in rows for k in r})
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()

    @property
    def exit_code(self) -> int:
        return EXIT_FAIL if self.status == "FAIL" else EXIT_OK


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _flatten(row: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in row.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = json.dumps(_plain(v))
        else:
            out[key] = v
    return out


# -- argument parsing helpers --------------------------------------------------

def parse_range(text: str) -> list[int]:
    """'5', '4..8' (inclusive) or '3,5,7'."""
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split(".."))
            values = list(range(lo, hi + 1))
        else:
            values = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return values


def parse_axes(text: str) -> list[float]:
    try:
        axes = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid axes {text!r}") from None
    return axes


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


# -- commands ------------------------------------------------------------------

def _poly(p: inv.PoincarePolynomial) -> list[int]:
    return list(p.coefficients)


def cmd_invariants(args) -> Report:
    rep = Report("invariants", {"m": args.m, "n": args.n, "quotient": args.quotient})
    for m in args.m:
        for n in args.n:
            if args.quotient:
                try:
                    inv._check_equivariant(m, n)
                except inv.UnsupportedParameters as exc:
                    raise UsageError(str(exc)) from None
            row = {
                "m": m, "n": n,
                "poincare_euclidean": _poly(inv.poincare_cyclic_euclidean(m, n)),
                "poincare_sphere": _poly(inv.poincare_cyclic_sphere(m, n)),
                "betti_sum_sphere": inv.poincare_cyclic_sphere(m, n).betti_sum(),
                "cup_length_sphere": inv.cup_length_sphere(m, n),
                "poincare_quotient": None, "betti_sum_quotient": None,
                "cup_length_quotient": None, "ls_bound": None, "morse_bound": None,
            }
            if m >= 3 and n % 2 == 1 and n >= 3:
                q = inv.poincare_quotient(m, n)
                b = inv.orbit_bounds(m, n)
                row.update(poincare_quotient=_poly(q), betti_sum_quotient=q.betti_sum(),
                           cup_length_quotient=b.cup_length_quotient,
                           ls_bound=b.ls_bound, morse_bound=b.morse_bound)
            rep.results.append(row)
    rep.summary = f"{len(rep.results)} rows"
    return rep


def _expected_aux(n, m):
    return {m: 1}, {n * (m - 1): 1, n * (m - 1) + m: 1}


def cmd_cohomology(args) -> Report:
    rep = Report("cohomology", {"m": args.m, "n": args.n, "check_auxiliary": args.check_auxiliary,
                                "cap": args.cap})
    ok = True
    for m in args.m:
        for n in args.n:
            chk = verify_cohomology(n, m, args.cap)
            row = {
                "m": m, "n": n,
                "dims": [list(t) for t in chk.dims.as_triples()],
                "computed": _poly(chk.computed),
                "expected": _poly(chk.expected),
                "support_ok": chk.support_ok,
                "passed": chk.passed,
            }
            ok &= chk.passed
            if args.check_auxiliary:
                want_d, want_delta = _expected_aux(n, m)
                got_d = auxiliary_complex_dims(n, m, "dA")
                got_delta = auxiliary_complex_dims(n, m, "deltaA")
                row["dA"] = {str(k): v for k, v in sorted(got_d.items())}
                row["deltaA"] = {str(k): v for k, v in sorted(got_delta.items())}
                row["auxiliary_passed"] = got_d == want_d and got_delta == want_delta
                ok &= row["auxiliary_passed"]
            rep.results.append(row)
    rep.status = "PASS" if ok else "FAIL"
    rep.summary = f"{rep.status}: {sum(r['passed'] for r in rep.results)}/{len(rep.results)} match the closed formula"
    return rep


def _make_body(args):
    if args.body == "sphere":
        if args.m is None:
            raise UsageError("--m is required for --body sphere")
        if args.axes is not None:
            raise UsageError("--axes applies to --body ellipsoid only")
        return sphere(args.m)
    if args.axes is None:
        raise UsageError("--axes is required for --body ellipsoid")
    if len(args.axes) < 2 or any(not a > 0 for a in args.axes):
        raise UsageError("semi-axes must be at least two positive numbers")
    if args.m is not None and args.m != len(args.axes) - 1:
        raise UsageError("--m disagrees with the number of semi-axes")
    return Ellipsoid(args.axes)


def cmd_find_orbits(args) -> Report:
    body = _make_body(args)
    m = body.dim
    n = args.n
    if n < 2:
        raise UsageError("n must be >= 2")
    settings = SearchSettings(starts=args.starts, rng_seed=args.seed, threads=args.threads,
                              max_iterations=args.max_iterations)
    rep = Report("find-orbits", {"body": args.body, "axes": body.axes.tolist(), "m": m, "n": n,
                                 "starts": args.starts, "max_iterations": args.max_iterations},
                 seed=args.seed)
    diag = FinderDiagnostics()
    t0 = time.perf_counter()
    records = find_orbits(body, n, settings, diag)
    rep.timings["search_seconds"] = time.perf_counter() - t0
    count = count_distinct_orbits(records, settings.dedupe_tolerance)
    rep.results = [r.as_dict() for r in records]
    rep.extra["diagnostics"] = diag.as_dict()
    rep.extra["families"] = [vars(f) for f in count.families]

    try:
        bounds = inv.orbit_bounds(m, n)
    except inv.UnsupportedParameters:
        bounds = None
    if body.is_round:
        want = (n - 1) // 2 if n % 2 == 1 and n >= 3 else None
        rep.status = "PASS" if want is None or count.count == want else "WARN"
        what = "families"
    else:
        rep.status = "PASS" if bounds is None or count.count >= bounds.ls_bound else "WARN"
        what = "distinct D_n-orbits"
    if body.is_round:
        bound_text = f"expected {want} families" if want is not None else "no family table for even n"
        if bounds is not None:
            rep.extra["bounds"] = bounds.as_dict()
    elif n == 2:
        bound_text = f"lower bound: {m + 1} diameters"
        if count.count < m + 1:
            rep.status = "WARN"
    elif bounds is not None:
        bound_text = f"lower bounds: LS={bounds.ls_bound}, Morse={bounds.morse_bound}"
        rep.extra["bounds"] = bounds.as_dict()
    else:
        bound_text = "lower bounds: n/a"
    rep.summary = f"found {count.count} {what}; {bound_text}"
    if rep.status == "WARN":
        rep.summary += " (WARN: fewer than guaranteed; a sampler may miss orbits)"
    return rep


def cmd_verify_sphere(args) -> Report:
    m, n = args.m, args.n
    if n % 2 == 0 or n < 3:
        raise UsageError(f"verify-sphere needs odd n >= 3, got n={n}")
    if m < 2:
        raise UsageError("verify-sphere needs m >= 2")
    rep = Report("verify-sphere", {"m": m, "n": n})
    body = sphere(m)
    t0 = time.perf_counter()
    ok = True
    prev = -np.inf
    for row in family_table(m, n):
        cfg = make_regular_orbit(SphereOrbitSpec(m, n, row.r))
        val = length(cfg)
        idx, nul = morse_data(body, cfg)
        passed = (abs(val - row.length) <= 1e-12 and idx == row.index and nul == row.nullity
                  and row.length > prev)
        prev = row.length
        ok &= passed
        rep.results.append({"p": row.p, "r": row.r, "length": val, "expected_length": row.length,
                            "index": idx, "expected_index": row.index, "nullity": nul,
                            "expected_nullity": row.nullity, "passed": passed})
    perfect = m >= 3 and inv.perfect_bott_sum(m, n) == inv.poincare_cyclic_sphere(m, n)
    if m >= 3:
        ok &= perfect
    rep.extra["perfectness_identity"] = perfect if m >= 3 else None
    rep.timings["seconds"] = time.perf_counter() - t0
    rep.status = "PASS" if ok else "FAIL"
    good = sum(r["passed"] for r in rep.results)
    rep.summary = f"{good}/{len(rep.results)} families {rep.status}"
    return rep


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--out", help="write the report to this file instead of stdout")
    shared.add_argument("--format", choices=("json", "csv"), default="json")
    shared.add_argument("--seed", type=_seed, default=0)
    shared.add_argument("--deterministic", action="store_true",
                        help="omit timings so reports are byte-identical across runs")
    shared.add_argument("--threads", type=int, default=1)

    p = argparse.ArgumentParser(prog="cyclic-billiards", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("invariants", parents=[shared], help="Poincare polynomials and orbit bounds")
    s.add_argument("--m", type=parse_range, required=True)
    s.add_argument("--n", type=parse_range, required=True)
    s.add_argument("--quotient", action="store_true",
                   help="require the equivariant (quotient) data for every row")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("cohomology", parents=[shared], help="brute-force GF(2) cohomology check")
    s.add_argument("--m", type=parse_range, required=True)
    s.add_argument("--n", type=parse_range, required=True)
    s.add_argument("--check-auxiliary", action="store_true")
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.set_defaults(func=cmd_cohomology)

    s = sub.add_parser("find-orbits", parents=[shared], help="multistart periodic orbit search")
    s.add_argument("--body", choices=("sphere", "ellipsoid"), required=True)
    s.add_argument("--axes", type=parse_axes)
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--starts", type=int, default=2000)
    s.add_argument("--max-iterations", type=int, default=200)
    s.set_defaults(func=cmd_find_orbits)

    s = sub.add_parser("verify-sphere", parents=[shared], help="oracle check on the round sphere")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_verify_sphere)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        rep = args.func(args)
    except (UsageError, inv.UnsupportedParameters, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    text = rep.to_json(args.deterministic) if args.format == "json" else rep.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(rep.summary, file=sys.stderr)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
