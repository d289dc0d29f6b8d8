"""Command-line entry point: solve, verify, stats, oracle, render."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional
from xml.sax.saxutils import quoteattr

from .automaton import (MAX_K, ResourceError, automaton_stats, build_automaton,
                        cycle_to_pattern)
from .core import (BarPattern, PatternParseError, SearchBudgetError,
                   brute_force_min_density, parse_pattern, pattern_density,
                   verify_periodic_pattern, verify_window_oracle)
from .mcm import (ArithmeticWidthError, certify_lambda, default_window,
                  extract_min_cycle, karp_mcm)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4

HUGE_K = 6


class InternalConsistencyError(RuntimeError):
    pass


@dataclass
class SolveOutput:
    k: int
    density: Fraction
    pattern: BarPattern
    cycle_length: int
    stats: dict
    seconds: float
    verified: bool
    certified: Optional[bool] = None
    timings: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        return {
            "k": self.k,
            "density": {"num": self.density.numerator, "den": self.density.denominator},
            "pattern": self.pattern.rows(),
            "cycle_length": self.cycle_length,
            "n": self.stats["n"],
            "m": self.stats["m"],
            "seconds": round(self.seconds, 3),
            "verified": self.verified,
            "certified": self.certified,
            "stats": self.stats,
        }


def format_density(d: Fraction) -> str:
    return f"{d.numerator}/{d.denominator} ({float(d):.6f})"


class _Progress:
    def __init__(self, every: float = 30.0):
        self.every = every
        self.last = time.monotonic()

    def __call__(self, label: str, done: int, total: int):
        now = time.monotonic()
        if now - self.last >= self.every or done >= total:
            self.last = now
            print(f"[{time.strftime('%H:%M:%S')}] {label} {done}/{total}", file=sys.stderr, flush=True)


def cmd_solve(k: int, threads: Optional[int] = None, window: Optional[int] = None,
              certify: bool = False, huge: bool = False, progress=None) -> SolveOutput:
    """Minimum-density periodic identifying code of the strip with ``k`` rows."""
    if not 1 <= k <= MAX_K:
        raise ResourceError(f"k={k} outside the hard cap 1..{MAX_K}")
    if k >= HUGE_K and not huge:
        raise ResourceError(f"k={k} needs --huge: up to 2^{4 * k} vertices and 2^{5 * k} edges")
    t0 = time.perf_counter()
    timings = {}
    H = build_automaton(k, threads=threads)
    stats = automaton_stats(H).as_dict()
    timings["build"] = time.perf_counter() - t0
    G = H.to_digraph()
    w = window if window else default_window(k)
    result = karp_mcm(G, window=w, threads=threads, progress=progress)
    timings["karp"] = time.perf_counter() - t0 - timings["build"]
    sol = extract_min_cycle(G, result, window=w, threads=threads, progress=progress)
    pattern = cycle_to_pattern(H, sol.cycle)
    density = pattern_density(pattern)
    periodic = verify_periodic_pattern(pattern)
    direct = verify_window_oracle(pattern)
    if not (periodic.valid and direct.valid) or density != result.lambda_star / k:
        raise InternalConsistencyError(
            f"k={k}: extracted pattern failed verification "
            f"(windows={periodic.valid}, direct={direct.valid}, density={density}, "
            f"lambda*={result.lambda_star})\n{pattern}\n"
            f"violations: {periodic.violations[:5]} {direct.violations[:5]}")
    certified = None
    if certify:
        t1 = time.perf_counter()
        try:
            certified = certify_lambda(G, result.lambda_star).tight
        except ArithmeticWidthError:
            certified = None
        timings["certify"] = time.perf_counter() - t1
        if certified is False:
            raise InternalConsistencyError(f"k={k}: feasibility oracle rejects lambda*={result.lambda_star}")
    return SolveOutput(k, density, pattern, sol.length, stats, time.perf_counter() - t0,
                       True, certified, timings)


def _read_pattern(path: str) -> BarPattern:
    if path == "-":
        return parse_pattern(sys.stdin.read())
    with open(path) as fh:
        return parse_pattern(fh.read())


def render_ascii(p: BarPattern, periods: int = 3) -> str:
    return "\n".join("|".join([row] * periods) for row in p.rows()) + "\n"


def render_svg(p: BarPattern, periods: int = 3, cell: int = 16) -> str:
    l, k = p.length, p.k
    width, height = cell * l * periods, cell * k
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width + 2}" height="{height + 2}" '
        f'viewBox="-1 -1 {width + 2} {height + 2}">',
        f"<title>{k}x{l} periodic pattern, density {pattern_density(p)}</title>",
    ]
    for rep in range(periods):
        for j in range(l):
            for i in range(k):
                fill = "#222" if p.contains((j, i)) else "#fff"
                x = (rep * l + j) * cell
                out.append(f'<rect class="cell" x="{x}" y="{i * cell}" width="{cell}" height="{cell}" '
                           f'fill={quoteattr(fill)} stroke="#999" stroke-width="1"/>')
    for rep in range(1, periods):
        x = rep * l * cell
        out.append(f'<line x1="{x}" y1="0" x2="{x}" y2="{height}" stroke="#c00" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _print_solve(out: SolveOutput, fmt: str):
    if fmt == "json":
        print(json.dumps(out.as_json(), indent=2))
        return
    print(f"k = {out.k}")
    print(f"density = {format_density(out.density)}")
    print(f"pattern length = {out.cycle_length}")
    print(out.pattern.to_text(), end="")
    s = out.stats
    print(f"automaton: n={s['n']} m={s['m']} strongly_connected={s['strongly_connected']}")
    print("verified: periodic windows and direct oracle agree (valid)")
    cert = {None: "not run", True: "tight", False: "FAILED"}[out.certified]
    print(f"certified: {cert}")
    print(f"time: {out.seconds:.2f} s")


def _run_solve(args) -> int:
    progress = _Progress() if args.progress else None
    out = cmd_solve(args.k, threads=args.threads, window=args.window, certify=args.certify,
                    huge=args.huge, progress=progress)
    if args.pattern_out:
        with open(args.pattern_out, "w") as fh:
            fh.write(out.pattern.to_text())
    _print_solve(out, args.format)
    return EXIT_OK


def _run_verify(args) -> int:
    p = _read_pattern(args.file)
    periodic = verify_periodic_pattern(p)
    direct = verify_window_oracle(p)
    density = pattern_density(p)
    if args.format == "json":
        print(json.dumps({
            "k": p.k, "length": p.length, "valid": periodic.valid and direct.valid,
            "density": {"num": density.numerator, "den": density.denominator},
            "violations": [{"kind": v.kind, "vertices": v.vertices} for v in direct.violations],
        }, indent=2))
    else:
        print(f"k = {p.k}, length = {p.length}")
        print(f"density = {format_density(density)}")
        print(f"periodic windows: {'valid' if periodic.valid else 'invalid'}")
        print(f"direct oracle:    {'valid' if direct.valid else 'invalid'}")
        for v in direct.violations[:20]:
            print(f"  {v.kind}: {' '.join(map(str, v.vertices))}")
        if len(direct.violations) > 20:
            print(f"  ... {len(direct.violations) - 20} more")
    if periodic.valid != direct.valid:
        print("error: verifiers disagree", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK if periodic.valid else EXIT_INVALID


def _run_stats(args) -> int:
    if args.k >= HUGE_K and not args.huge:
        raise ResourceError(f"k={args.k} needs --huge")
    H = build_automaton(args.k, threads=args.threads)
    if args.dump:
        with open(args.dump, "w") as fh:
            H.dump(fh)
    print(json.dumps(automaton_stats(H).as_dict(), indent=2))
    return EXIT_OK


def _run_oracle(args) -> int:
    found = brute_force_min_density(args.k, args.lmax)
    if found is None:
        print(f"infeasible: no valid pattern of length <= {args.lmax}")
        return EXIT_INVALID
    d, p = found
    if args.format == "json":
        print(json.dumps({"k": args.k, "lmax": args.lmax,
                          "density": {"num": d.numerator, "den": d.denominator},
                          "pattern": p.rows(), "length": p.length}, indent=2))
    else:
        print(f"density = {format_density(d)}")
        print(f"pattern length = {p.length}")
        print(p.to_text(), end="")
    return EXIT_OK


def _run_render(args) -> int:
    p = _read_pattern(args.file)
    if args.style == "svg":
        sys.stdout.write(render_svg(p, args.periods))
    else:
        sys.stdout.write(render_ascii(p, args.periods))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="strip-idcode",
        description="Minimum-density periodic identifying codes in grid strips.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="find a minimum-density periodic code")
    s.add_argument("--k", type=int, required=True, help="number of rows")
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--window", type=int, default=None,
                   help="rounds of back references kept for cycle extraction")
    s.add_argument("--certify", action="store_true",
                   help="also confirm the minimum with a negative-cycle oracle")
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--huge", action="store_true", help=f"allow k >= {HUGE_K}")
    s.add_argument("--pattern-out", metavar="FILE", help="write the pattern in text format")
    s.add_argument("--progress", action="store_true", help="report DP progress on stderr")
    s.set_defaults(run=_run_solve)

    v = sub.add_parser("verify", help="check a pattern file")
    v.add_argument("file")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.set_defaults(run=_run_verify)

    st = sub.add_parser("stats", help="automaton statistics as JSON")
    st.add_argument("--k", type=int, required=True)
    st.add_argument("--threads", type=int, default=None)
    st.add_argument("--huge", action="store_true")
    st.add_argument("--dump", metavar="FILE", help="write edges as 'src dst weight mask_hex'")
    st.set_defaults(run=_run_stats)

    o = sub.add_parser("oracle", help="exhaustive search over short patterns")
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--lmax", type=int, required=True)
    o.add_argument("--format", choices=("text", "json"), default="text")
    o.set_defaults(run=_run_oracle)

    r = sub.add_parser("render", help="draw a pattern file")
    r.add_argument("file")
    r.add_argument("--style", choices=("ascii", "svg"), default="ascii")
    r.add_argument("--periods", type=int, default=3)
    r.set_defaults(run=_run_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except PatternParseError as e:
        print(f"{getattr(args, 'file', '')}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, SearchBudgetError, ArithmeticWidthError, MemoryError) as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InternalConsistencyError, AssertionError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
