"""Point sequences, their density statistics, and the example generators.

A :class:`PointSeq` is a finite truncation of a conceptually infinite
sequence: every "for all n" statistic downstream is reported up to the
truncation horizon, and the reports say so.  Entries may repeat (the
sequence is a multiset) and keep their original indices as labels even
after consumers re-sort them by norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

from .errors import ResourceLimitError
from .geometry import Point, max_norm
from .ratmath import dyadic_floor_root_int, frac_ceil, frac_floor, iroot_floor

APPROX_SLACK = Fraction(1, 10 ** 9)

DEFAULT_POINT_CAP = 10 ** 6


@dataclass(frozen=True)
class PointSeq:
    """Indexed multiset of points in R^m with exact rational coordinates.

    ``approx`` marks sequences whose coordinates are rational stand-ins for
    irrational values (error below 1e-12 per coordinate); downstream strict
    comparisons then allow a 1e-9 slack.
    """

    m: int
    entries: tuple[Point, ...]
    labels: tuple[int, ...] = ()
    approx: bool = False

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("point dimension must be positive")
        for p in self.entries:
            if len(p) != self.m:
                raise ValueError("entry dimension mismatch")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(self.entries))))
        elif len(self.labels) != len(self.entries):
            raise ValueError("one label per entry required")

    def __len__(self) -> int:
        return len(self.entries)

    def norms(self) -> list[Fraction]:
        return [max_norm(p) for p in self.entries]

    def sorted_by_norm(self) -> "PointSeq":
        order = sorted(range(len(self.entries)), key=lambda i: (max_norm(self.entries[i]), self.labels[i]))
        return PointSeq(
            self.m,
            tuple(self.entries[i] for i in order),
            tuple(self.labels[i] for i in order),
            self.approx,
        )


@dataclass(frozen=True)
class DensityReport:
    """Counting function N(n), the ratios N(n)/n^d, and their running sup."""

    d: int
    n_max: int
    counts: tuple[int, ...]
    ratios: tuple[Fraction, ...]
    sup_ratios: tuple[Fraction, ...]
    horizon: Fraction
    approx: bool

    @property
    def sup_ratio(self) -> Fraction:
        return self.sup_ratios[-1]


def counting_function(seq: PointSeq, d: int, n_max: int) -> DensityReport:
    """Exact N(n) = #{i : |x_i| <= n} and rational ratios for n = 1..n_max."""
    if n_max < 1 or d < 1:
        raise ValueError("need n_max >= 1 and d >= 1")
    slack = APPROX_SLACK if seq.approx else Fraction(0)
    norms = sorted(seq.norms())
    counts = []
    idx = 0
    for n in range(1, n_max + 1):
        while idx < len(norms) and norms[idx] <= n + slack:
            idx += 1
        counts.append(idx)
    ratios = tuple(Fraction(c, n ** d) for n, c in enumerate(counts, start=1))
    sups = []
    best = Fraction(0)
    for r in ratios:
        best = max(best, r)
        sups.append(best)
    horizon = max(norms) if norms else Fraction(0)
    return DensityReport(d, n_max, tuple(counts), ratios, tuple(sups), horizon, seq.approx)


def local_count(seq: PointSeq, x: Sequence[Fraction], alpha: Fraction) -> int:
    """Number of entries with strict max-norm distance < alpha from x."""
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if seq.approx:
        alpha = alpha + APPROX_SLACK
    x = tuple(Fraction(c) for c in x)
    count = 0
    for p in seq.entries:
        if max(abs(a - b) for a, b in zip(p, x)) < alpha:
            count += 1
    return count


def gen_lattice(m: int, R: int) -> PointSeq:
    """All integer points of Z^m with |x| <= R, in lexicographic order."""
    if m < 1 or R < 0:
        raise ValueError("need m >= 1 and R >= 0")
    pts = tuple(
        tuple(Fraction(c) for c in combo)
        for combo in product(range(-R, R + 1), repeat=m)
    )
    return PointSeq(m, pts)


def gen_pow2(d: int, K: int, cap: int = DEFAULT_POINT_CAP) -> PointSeq:
    """One-dimensional sequence with k * 2^(k d) copies of 2^k, k = 1..K."""
    if d < 1 or K < 1:
        raise ValueError("need d >= 1 and K >= 1")
    total = sum(k * 2 ** (k * d) for k in range(1, K + 1))
    if total > cap:
        raise ResourceLimitError(f"pow2 sequence would hold {total} points (cap {cap})")
    entries = []
    for k in range(1, K + 1):
        entries.extend([(Fraction(2 ** k),)] * (k * 2 ** (k * d)))
    return PointSeq(1, tuple(entries))


APPROX_BITS = 48  # 2^-48 < 1e-14, comfortably below the 1e-12 contract


def _power_value(n: int, c: Fraction) -> tuple[Fraction, bool]:
    """n**c as an exact rational when it is one, else a dyadic approximation.

    Returns (value, exact_flag); the approximation error is below 2^-48.
    """
    p, q = c.numerator, c.denominator
    t = n ** p
    if q == 1:
        return Fraction(t), True
    r = iroot_floor(t, q)
    if r ** q == t:
        return Fraction(r), True
    return dyadic_floor_root_int(t, q, APPROX_BITS), False


def gen_grid(
    m: int,
    spacing: Fraction,
    window: tuple[Sequence[Fraction], Sequence[Fraction]] | Fraction,
    cap: int = DEFAULT_POINT_CAP,
) -> PointSeq:
    """All points of spacing * Z^m inside a window.

    The window is either a radius R (the max-norm ball, i.e. [-R, R]^m) or an
    explicit (lo, hi) corner pair.  Coordinate objects are interned so large
    grids stay compact.
    """
    spacing = Fraction(spacing)
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if isinstance(window, (tuple, list)) and len(window) == 2 and not isinstance(
        window[0], (int, Fraction)
    ):
        lo = tuple(Fraction(c) for c in window[0])
        hi = tuple(Fraction(c) for c in window[1])
    else:
        R = Fraction(window)
        lo = tuple(-R for _ in range(m))
        hi = tuple(R for _ in range(m))
    axes = []
    total = 1
    for a, b in zip(lo, hi):
        k_lo = frac_ceil(a / spacing)
        k_hi = frac_floor(b / spacing)
        vals = [k * spacing for k in range(k_lo, k_hi + 1)]
        axes.append(vals)
        total *= len(vals)
        if total > cap:
            raise ResourceLimitError(f"grid would hold over {cap} points")
    pts = tuple(product(*axes))
    return PointSeq(m, pts)


def gen_power_grid(m: int, c: Fraction, R: Fraction, cap: int = DEFAULT_POINT_CAP) -> PointSeq:
    """All points (n_1^c, ..., n_m^c), n_k natural, with |x| <= R."""
    c = Fraction(c)
    R = Fraction(R)
    if c <= 0 or m < 1:
        raise ValueError("need c > 0 and m >= 1")
    values: list[Fraction] = []
    any_approx = False
    n = 1
    while True:
        val, exact = _power_value(n, c)
        if val > R + (APPROX_SLACK if not exact else 0):
            break
        values.append(val)
        any_approx = any_approx or not exact
        n += 1
        if len(values) ** m > cap:
            raise ResourceLimitError(f"power grid exceeds cap {cap}")
    pts = tuple(tuple(combo) for combo in product(values, repeat=m))
    return PointSeq(m, pts, approx=any_approx)


def remark_cutoffs(
    m: int,
    d: int,
    f_growth: Callable[[Fraction], Fraction | int],
    levels: int,
) -> list[int]:
    """Increasing powers of two c_i > 4 with f(x) > 2^(m(i+2)+d) for x >= c_i - 2.

    The growth function must be nondecreasing and tend to infinity; levels+1
    cutoffs are produced so the last shell has an upper edge.
    """
    cutoffs: list[int] = []
    c = 8
    for i in range(1, levels + 2):
        threshold = 2 ** (m * (i + 2) + d)
        while not (c > 4 and Fraction(f_growth(Fraction(c - 2))) > threshold):
            c *= 2
            if c > 2 ** 60:
                raise ResourceLimitError("growth function too slow for requested levels")
        cutoffs.append(c)
        c *= 2
    return cutoffs


def gen_remark_A(
    m: int,
    d: int,
    f_growth: Callable[[Fraction], Fraction | int],
    levels: int,
    cap: int = DEFAULT_POINT_CAP,
) -> PointSeq:
    """Shells of dyadic grid points, each anchor blown up into ceil(|x|^(d-m))
    nearby points, spaced along the first coordinate inside its 2^-i cube."""
    if m > d:
        raise ValueError("construction requires m <= d")
    cutoffs = remark_cutoffs(m, d, f_growth, levels)
    entries: list[Point] = []
    for i in range(1, levels + 1):
        c_lo, c_hi = cutoffs[i - 1], cutoffs[i]
        step = Fraction(1, 2 ** i)
        span = c_hi * 2 ** i  # anchor coordinates are k * step with |k| <= span
        for combo in product(range(-span, span + 1), repeat=m):
            anchor = tuple(k * step for k in combo)
            norm = max_norm(anchor)
            if not (c_lo <= norm < c_hi):
                continue
            q = frac_ceil(norm ** (d - m))
            for t in range(q):
                delta = -step + 2 * step * Fraction(t + 1, q + 1)
                entries.append((anchor[0] + delta,) + anchor[1:])
                if len(entries) > cap:
                    raise ResourceLimitError(f"remark-A set exceeds cap {cap}")
    return PointSeq(m, tuple(entries))


def seq_to_lines(seq: PointSeq) -> list[str]:
    lines = [f"seq m={seq.m} count={len(seq)} approx={int(seq.approx)}"]
    for p in seq.entries:
        lines.append(" ".join(str(c) for c in p))
    return lines


def seq_from_lines(lines: Sequence[str]) -> PointSeq:
    header = lines[0].split()
    if not header or header[0] != "seq":
        raise ValueError("not a sequence record")
    fields = dict(part.split("=", 1) for part in header[1:])
    m = int(fields["m"])
    count = int(fields["count"])
    approx = bool(int(fields.get("approx", "0")))
    entries = []
    for raw in lines[1:1 + count]:
        vals = tuple(Fraction(tok) for tok in raw.split())
        if len(vals) != m:
            raise ValueError(f"point record needs {m} rationals")
        entries.append(vals)
    return PointSeq(m, tuple(entries), approx=approx)
