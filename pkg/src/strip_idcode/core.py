"""Strip geometry, identifying-code predicates and pattern verification.

Coordinates inside a bar are ``(col, row)`` with row 0 at the top.  A column
of the code is an int bitmask (bit ``i`` = row ``i``).  A whole bar packs
into one int: column ``j`` occupies bits ``j*k .. j*k + k - 1``, so column 0
is least significant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

ColumnMask = int
Vertex = tuple[int, int]

# Densities are exact fractions, reduced on construction.
RationalDensity = Fraction

EMPTY_NEIGHBORHOOD = "empty-neighborhood"
TWIN_PAIR = "twin-pair"

CODE_CHAR = "#"
EMPTY_CHAR = "."


class PatternParseError(ValueError):
    """Malformed pattern text; carries 1-based line/column of the problem."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class SearchBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class BarPattern:
    """Code restriction to an ``l``-bar of the strip with ``k`` rows."""

    k: int
    columns: tuple[ColumnMask, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        cols = tuple(int(c) for c in self.columns)
        if not cols:
            raise ValueError("a bar pattern needs at least one column")
        for j, c in enumerate(cols):
            if c < 0 or c >> self.k:
                raise ValueError(f"column {j} mask {c:#x} does not fit in {self.k} rows")
        object.__setattr__(self, "columns", cols)

    @property
    def length(self) -> int:
        return len(self.columns)

    def __len__(self) -> int:
        return len(self.columns)

    @classmethod
    def decode(cls, k: int, length: int, bits: int) -> "BarPattern":
        full = (1 << k) - 1
        return cls(k, tuple((bits >> (j * k)) & full for j in range(length)))

    def encode(self) -> int:
        bits = 0
        for j, c in enumerate(self.columns):
            bits |= c << (j * self.k)
        return bits

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "BarPattern":
        return parse_pattern("\n".join(rows))

    def rows(self) -> list[str]:
        return [
            "".join(CODE_CHAR if (c >> i) & 1 else EMPTY_CHAR for c in self.columns)
            for i in range(self.k)
        ]

    def to_text(self) -> str:
        return "\n".join(self.rows()) + "\n"

    def code_size(self) -> int:
        return sum(_popcount(c) for c in self.columns)

    def contains(self, v: Vertex) -> bool:
        col, row = v
        return bool((self.columns[col] >> row) & 1)

    def cyclic_window(self, start: int, length: int) -> "BarPattern":
        l = self.length
        return BarPattern(self.k, tuple(self.columns[(start + j) % l] for j in range(length)))

    def repeat(self, times: int) -> "BarPattern":
        return BarPattern(self.k, self.columns * times)

    def mirror_columns(self) -> "BarPattern":
        return BarPattern(self.k, self.columns[::-1])

    def mirror_rows(self) -> "BarPattern":
        k = self.k
        return BarPattern(k, tuple(
            sum(((c >> i) & 1) << (k - 1 - i) for i in range(k)) for c in self.columns))

    def with_vertex(self, v: Vertex) -> "BarPattern":
        col, row = v
        cols = list(self.columns)
        cols[col] |= 1 << row
        return BarPattern(self.k, tuple(cols))

    def __str__(self) -> str:
        return "\n".join(self.rows())


def parse_pattern(text: str) -> BarPattern:
    """Parse ``k`` lines of ``#``/``.``; rejects ragged lines and other characters."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]
    if not lines:
        raise PatternParseError("empty pattern")
    width = len(lines[0])
    if width == 0:
        raise PatternParseError("empty row", 1, 1)
    cols = [0] * width
    for i, line in enumerate(lines):
        if len(line) != width:
            raise PatternParseError(
                f"row has {len(line)} characters, expected {width}", i + 1, min(len(line), width) + 1)
        for j, ch in enumerate(line):
            if ch == CODE_CHAR:
                cols[j] |= 1 << i
            elif ch != EMPTY_CHAR:
                raise PatternParseError(f"unexpected character {ch!r}", i + 1, j + 1)
    return BarPattern(len(lines), tuple(cols))


@dataclass(frozen=True)
class Violation:
    kind: str
    vertices: tuple[Vertex, ...]


@dataclass
class VerifyReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def closed_neighborhood(k: int, l: int, v: Vertex) -> frozenset[Vertex]:
    """``N[v]`` inside a ``k`` x ``l`` bar, truncated at the bar's borders."""
    col, row = v
    if not (0 <= col < l and 0 <= row < k):
        raise ValueError(f"vertex {v} outside a {l}-bar with {k} rows")
    out = {v}
    for dc, dr in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        c, r = col + dc, row + dr
        if 0 <= c < l and 0 <= r < k:
            out.add((c, r))
    return frozenset(out)


def neighborhood_mask(k: int, l: int, v: Vertex) -> int:
    bits = 0
    for c, r in closed_neighborhood(k, l, v):
        bits |= 1 << (c * k + r)
    return bits


def middle_masks(k: int, l: int) -> list[int]:
    """Packed ``N[v]`` for every vertex of the middle columns ``1 .. l-2``."""
    return [neighborhood_mask(k, l, (c, r)) for c in range(1, l - 1) for r in range(k)]


def is_barcode(p: BarPattern) -> bool:
    """Whether ``p`` identifies every vertex of its middle columns.

    All pairs of middle vertices are compared, not only nearby ones.
    """
    if p.length < 3:
        raise ValueError(f"barcode needs a bar of length >= 3, got {p.length}")
    bits = p.encode()
    seen = set()
    for m in middle_masks(p.k, p.length):
        x = m & bits
        if not x or x in seen:
            return False
        seen.add(x)
    return True


def _window_violations(k: int, window: BarPattern) -> Iterator[tuple[str, list[Vertex]]]:
    # Violations inside one window, in window-local coordinates.
    bits = window.encode()
    l = window.length
    middle = [(c, r) for c in range(1, l - 1) for r in range(k)]
    inter = {v: neighborhood_mask(k, l, v) & bits for v in middle}
    for v in middle:
        if not inter[v]:
            yield EMPTY_NEIGHBORHOOD, [v]
    for i, u in enumerate(middle):
        for v in middle[i + 1:]:
            if inter[u] and inter[u] == inter[v]:
                yield TWIN_PAIR, [u, v]


def _witness(vertices: Sequence[Vertex], offset: int, period: int) -> tuple[Vertex, ...]:
    # First vertex column reduced mod period; later ones keep their offset from it.
    c0 = vertices[0][0] + offset
    base = c0 % period
    return tuple((base + (c - vertices[0][0]), r) for c, r in vertices)


def verify_periodic_pattern(p: BarPattern) -> VerifyReport:
    """Check that every cyclic 5-column window of the repeated pattern is a barcode."""
    found = set()
    for j in range(p.length):
        window = p.cyclic_window(j, 5)
        if is_barcode(window):
            continue
        for kind, vs in _window_violations(p.k, window):
            found.add(Violation(kind, _witness(vs, j, p.length)))
    return VerifyReport(sorted(found, key=lambda v: (v.kind, v.vertices)))


def verify_window_oracle(p: BarPattern) -> VerifyReport:
    """Check the identifying-code conditions directly on one period of the strip.

    The pattern is unrolled to a period ``L >= 5`` (a multiple of its length) and
    the strip is treated as a cylinder of circumference ``L``; with ``L >= 5`` no
    neighborhood of two vertices within distance 2 wraps onto itself.
    """
    k, l = p.k, p.length
    reps = -(-5 // l) if l < 5 else 1
    L = l * reps

    def coded(c: int, r: int) -> bool:
        return bool((p.columns[c % l] >> r) & 1)

    def code_nbhd(c: int, r: int) -> frozenset[Vertex]:
        out = set()
        for dc, dr in ((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)):
            cc, rr = c + dc, r + dr
            if 0 <= rr < k and coded(cc, rr):
                out.add((cc % L, rr))
        return frozenset(out)

    found = set()
    for c in range(L):
        for r in range(k):
            if not code_nbhd(c, r):
                found.add(Violation(EMPTY_NEIGHBORHOOD, ((c % l, r),)))
    for c in range(L):
        for r in range(k):
            mine = code_nbhd(c, r)
            for dc in range(0, 3):
                for dr in range(-2, 3):
                    if abs(dc) + abs(dr) > 2 or (dc, dr) <= (0, 0):
                        continue
                    c2, r2 = c + dc, r + dr
                    if not 0 <= r2 < k:
                        continue
                    if mine and mine == code_nbhd(c2, r2):
                        found.add(Violation(TWIN_PAIR, ((c % l, r), (c % l + dc, r2))))
    return VerifyReport(sorted(found, key=lambda v: (v.kind, v.vertices)))


def pattern_density(p: BarPattern) -> RationalDensity:
    return Fraction(p.code_size(), p.length * p.k)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def brute_force_min_density(
    k: int, lmax: int, budget: int = 1 << 22
) -> Optional[tuple[RationalDensity, BarPattern]]:
    """Exhaustive minimum density over all periodic patterns of length <= ``lmax``.

    Ties go to the shorter pattern, then to the smaller packed encoding.
    Returns ``None`` if no pattern up to ``lmax`` is valid.
    """
    if k < 1 or lmax < 1:
        raise ValueError("k and lmax must be positive")
    space = sum(1 << (k * l) for l in range(1, lmax + 1))
    if space > budget:
        raise SearchBudgetError(
            f"search space of {space} patterns (k={k}, lmax={lmax}) exceeds budget {budget}")
    best: Optional[tuple[Fraction, BarPattern]] = None
    for l in range(1, lmax + 1):
        cells = k * l
        for bits in range(1 << cells):
            d = Fraction(_popcount(bits), cells)
            if best is not None and d >= best[0]:
                continue
            p = BarPattern.decode(k, l, bits)
            if verify_window_oracle(p).valid:
                best = (d, p)
    return best


def iter_patterns(k: int, l: int) -> Iterable[BarPattern]:
    for bits in range(1 << (k * l)):
        yield BarPattern.decode(k, l, bits)
