"""Feasible-set propagation: evading functions and the exact control oracle.

Given pairs (x_i, y_i), the set of values a Lipschitz path can take at radius
t_i while staying at max-norm distance >= 1 from every y_j (j <= i) is a box
union.  Propagating these sets exactly gives two things:

* an evader construction: pick a start value, expand by the Lipschitz rate,
  remove the open unit cube around each y_i, and backtrack a witness path;
* a decision procedure for "does this pair set control every j-Lipschitz
  function with |f(0)| <= j on [0, n]": the answer is CONTROLLED exactly when
  the propagated set dies.

Inputs with m > 1 are radialized: the path is built over the radii |x_i| and
lifted via f(x) = g(|x|), which preserves the Lipschitz constant in the max
norm.  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateInputError, InternalConsistencyError
from .geometry import (
    DEFAULT_BOX_LIMIT,
    Box,
    Point,
    Region,
    intersect_cube,
    max_norm,
    measure,
    minkowski_expand,
    pick_point,
    subtract_cube,
)
from .ratmath import dyadic_upper_root

BETA_BITS = 40


@dataclass(frozen=True)
class ControlPair:
    """One (x, y) pair together with the sequence index it consumes."""

    index: int
    x: Point
    y: Point

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(Fraction(c) for c in self.x))
        object.__setattr__(self, "y", tuple(Fraction(c) for c in self.y))

    @property
    def radius(self) -> Fraction:
        return max_norm(self.x)


@dataclass(frozen=True)
class EvaderParams:
    """Density statistic alpha and the dyadic Lipschitz budget beta >= 2 alpha^(1/d)."""

    alpha: Fraction
    beta: Fraction
    d: int
    k0: int


@dataclass(frozen=True)
class FeasTrace:
    """Radii t_0=0 <= t_1 <= ... with the surviving value sets D_i and their measures."""

    params: EvaderParams
    start: Point
    pairs: tuple[ControlPair, ...]  # positive-radius pairs, sorted by radius
    radii: tuple[Fraction, ...]     # length len(pairs)+1, leading 0
    regions: tuple[Region, ...]     # D_0 .. D_N
    measures: tuple[Fraction, ...]

    @property
    def final_region(self) -> Region:
        return self.regions[-1]

    def any_empty(self) -> bool:
        return any(r.is_empty for r in self.regions)


@dataclass(frozen=True)
class RadialPLFunction:
    """Piecewise-linear path t -> g(t) in R^d with a declared Lipschitz bound.

    Evaluation interpolates linearly between breakpoints and extends
    constantly beyond them.  Points of R^m evaluate through the radial lift
    f(x) = g(|x|).
    """

    breakpoints: tuple[Fraction, ...]
    values: tuple[Point, ...]
    bound: Fraction

    def __post_init__(self) -> None:
        if len(self.breakpoints) != len(self.values) or not self.breakpoints:
            raise ValueError("need one value per breakpoint")
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            if a >= b:
                raise ValueError("breakpoints must increase strictly")

    @property
    def d(self) -> int:
        return len(self.values[0])

    def eval(self, t: Fraction) -> Point:
        t = Fraction(t)
        bp = self.breakpoints
        if t <= bp[0]:
            return self.values[0]
        if t >= bp[-1]:
            return self.values[-1]
        # linear scan is fine at the trace sizes this package handles
        for k in range(len(bp) - 1):
            if bp[k] <= t <= bp[k + 1]:
                w = (t - bp[k]) / (bp[k + 1] - bp[k])
                return tuple(
                    a + (b - a) * w
                    for a, b in zip(self.values[k], self.values[k + 1])
                )
        raise AssertionError("unreachable")

    def eval_point(self, x: Sequence[Fraction]) -> Point:
        return self.eval(max_norm(x))

    def eval_point_float(self, x: Sequence[float]) -> tuple[float, ...]:
        t = max(abs(float(c)) for c in x)
        bp = self.breakpoints
        if t <= bp[0]:
            return tuple(float(v) for v in self.values[0])
        if t >= bp[-1]:
            return tuple(float(v) for v in self.values[-1])
        for k in range(len(bp) - 1):
            if t <= bp[k + 1]:
                w = (t - float(bp[k])) / float(bp[k + 1] - bp[k])
                return tuple(
                    float(a) + (float(b) - float(a)) * w
                    for a, b in zip(self.values[k], self.values[k + 1])
                )
        raise AssertionError("unreachable")

    def max_slope(self) -> Fraction:
        worst = Fraction(0)
        for k in range(len(self.breakpoints) - 1):
            dt = self.breakpoints[k + 1] - self.breakpoints[k]
            for a, b in zip(self.values[k], self.values[k + 1]):
                worst = max(worst, abs(b - a) / dt)
        return worst


def sort_pairs(pairs: Sequence[ControlPair]) -> list[ControlPair]:
    return sorted(pairs, key=lambda p: (p.radius, p.index))


def compute_params(pairs: Sequence[ControlPair], d: int) -> EvaderParams:
    """alpha = max over sorted positive-radius pairs of rank/|x|^d, exactly;
    beta is the smallest q/2^40 at or above 2 alpha^(1/d)."""
    spairs = sort_pairs(pairs)
    k0 = sum(1 for p in spairs if p.radius == 0)
    positives = [p for p in spairs if p.radius > 0]
    if not positives:
        raise DegenerateInputError("all pairs sit at radius zero")
    alpha = Fraction(0)
    for rank, p in enumerate(positives, start=1):
        alpha = max(alpha, Fraction(rank) / p.radius ** d)
    beta = dyadic_upper_root(alpha * 2 ** d, d, BETA_BITS)
    # beta must overshoot 2 alpha^(1/d) by at most a relative 1e-9
    budget = Fraction(10 ** 9 + 1, 10 ** 9)
    if beta ** d > alpha * 2 ** d * budget ** d:
        raise InternalConsistencyError("dyadic beta overshoots its tolerance")
    return EvaderParams(alpha=alpha, beta=beta, d=d, k0=k0)


def start_point(zero_pairs: Sequence[ControlPair], d: int) -> Point:
    """A value with |y - y_j| > 1 for every pair at radius zero: push the
    first coordinate past every such y_j by 2, keep the rest at 0."""
    if not zero_pairs:
        return tuple(Fraction(0) for _ in range(d))
    first = max(p.y[0] for p in zero_pairs) + 2
    return (first,) + tuple(Fraction(0) for _ in range(d - 1))


def evader_trace(
    pairs: Sequence[ControlPair],
    d: int,
    params: EvaderParams | None = None,
    box_limit: int = DEFAULT_BOX_LIMIT,
) -> FeasTrace:
    """Propagate D_{i+1} = expand(D_i, beta * dt) minus the open unit cube at y_{i+1}.

    Pairs at equal radius are subtracted consecutively with zero expansion
    in between.  The trace records exact measures at every step.
    """
    spairs = sort_pairs(pairs)
    zero_pairs = [p for p in spairs if p.radius == 0]
    positives = [p for p in spairs if p.radius > 0]
    if params is None:
        if positives:
            params = compute_params(spairs, d)
        else:
            params = EvaderParams(Fraction(0), Fraction(0), d, len(zero_pairs))
    start = start_point(zero_pairs, d)
    region = Region(d, (Box(start, start),))
    radii = [Fraction(0)]
    regions = [region]
    measures = [Fraction(0)]
    prev_t = Fraction(0)
    for p in positives:
        t = p.radius
        region = minkowski_expand(region, params.beta * (t - prev_t), box_limit)
        region = subtract_cube(region, p.y, 1, open_cube=True, box_limit=box_limit)
        radii.append(t)
        regions.append(region)
        measures.append(measure(region))
        prev_t = t
    return FeasTrace(
        params=params,
        start=start,
        pairs=tuple(positives),
        radii=tuple(radii),
        regions=tuple(regions),
        measures=tuple(measures),
    )


@dataclass(frozen=True)
class Claim21Row:
    i: int
    t: Fraction
    box_count: int
    measure: Fraction
    bound: Fraction
    margin: Fraction


@dataclass(frozen=True)
class Claim21Report:
    rows: tuple[Claim21Row, ...]
    ok: bool
    first_failure: int | None


def check_claim21(trace: FeasTrace) -> Claim21Report:
    """Assert mu(D_i) >= 2^(d+1) alpha t_i^d - 2^d i as an exact inequality.

    The bound uses the exact alpha even though the trace expanded with the
    dyadic beta; a larger expansion only grows the sets, so the inequality
    must still hold.  A failure signals an implementation bug.
    """
    d = trace.params.d
    alpha = trace.params.alpha
    rows = []
    first_failure = None
    for i, (t, region, mu) in enumerate(zip(trace.radii, trace.regions, trace.measures)):
        bound = 2 ** (d + 1) * alpha * t ** d - 2 ** d * i
        margin = mu - bound
        rows.append(Claim21Row(i, t, region.box_count(), mu, bound, margin))
        if margin < 0 and first_failure is None:
            first_failure = i
    return Claim21Report(tuple(rows), first_failure is None, first_failure)


def _backtrack(
    regions: Sequence[Region],
    radii: Sequence[Fraction],
    rate: Fraction,
) -> list[Point]:
    """Pick a point of the last set and walk it back through the trace."""
    last = pick_point(regions[-1])
    if last is None:
        raise InternalConsistencyError("cannot backtrack from an empty set")
    points = [last]
    for k in range(len(regions) - 2, -1, -1):
        dt = radii[k + 1] - radii[k]
        reachable = intersect_cube(regions[k], points[-1], rate * dt)
        prev = pick_point(reachable)
        if prev is None:
            raise InternalConsistencyError(
                f"backtracking hit an empty intersection at step {k}"
            )
        points.append(prev)
    points.reverse()
    return points


def _compress_breakpoints(
    radii: Sequence[Fraction],
    points: Sequence[Point],
) -> tuple[tuple[Fraction, ...], tuple[Point, ...]]:
    """Merge duplicate radii (zero-expansion steps share their value)."""
    bps: list[Fraction] = []
    vals: list[Point] = []
    for t, p in zip(radii, points):
        if bps and bps[-1] == t:
            if vals[-1] != p:
                raise InternalConsistencyError("conflicting values at equal radii")
            continue
        bps.append(t)
        vals.append(p)
    return tuple(bps), tuple(vals)


def reconstruct_evader(trace: FeasTrace) -> RadialPLFunction:
    """Backtrack a witness path through a trace with no empty step.

    The result is beta-Lipschitz per segment and satisfies
    |g(t_i) - y_i| >= 1 for every pair, both checked exactly here.
    """
    if trace.any_empty():
        raise InternalConsistencyError("trace contains an empty feasible set")
    rate = trace.params.beta
    points = _backtrack(trace.regions, trace.radii, rate)
    bps, vals = _compress_breakpoints(trace.radii, points)
    if len(bps) == 1:
        fn = RadialPLFunction((bps[0],), (vals[0],), rate)
    else:
        fn = RadialPLFunction(bps, vals, rate)
    if fn.max_slope() > rate:
        raise InternalConsistencyError("reconstructed path exceeds its Lipschitz budget")
    for p in trace.pairs:
        if max_norm(tuple(a - b for a, b in zip(fn.eval(p.radius), p.y))) < 1:
            raise InternalConsistencyError(f"reconstructed path is controlled by pair {p.index}")
    return fn


def evasion_margins(fn: RadialPLFunction, pairs: Sequence[ControlPair]) -> list[Fraction]:
    """Exact |g(|x_i|) - y_i| for every pair."""
    return [
        max_norm(tuple(a - b for a, b in zip(fn.eval(p.radius), p.y)))
        for p in pairs
    ]


@dataclass(frozen=True)
class ControlVerdict:
    """Outcome of the exact control-game oracle for one Lipschitz class."""

    controlled: bool
    empty_step: int | None
    witness: RadialPLFunction | None
    steps: int


def feasible_control_check(
    pairs: Sequence[ControlPair],
    j: int,
    d: int,
    n: Fraction | int,
    box_limit: int = DEFAULT_BOX_LIMIT,
) -> ControlVerdict:
    """Decide whether every j-Lipschitz f with |f(0)| <= j on [0, n] is controlled.

    The value sets start from the cube of radius j (the allowed values at 0),
    expand at rate j between consecutive pair locations, and lose the open
    unit cube around each y_i.  An empty set at some step means CONTROLLED;
    otherwise a witness evader is reconstructed and returned.
    """
    n = Fraction(n)
    spairs = sort_pairs(pairs)
    for p in spairs:
        if len(p.x) != 1:
            raise ValueError("the exact oracle requires m = 1")
        if p.x[0] < 0 or p.x[0] > n:
            raise ValueError(f"pair {p.index} lies outside [0, {n}]")
    region = Region.cube(tuple(Fraction(0) for _ in range(d)), j)
    radii = [Fraction(0)]
    regions = [region]
    prev_t = Fraction(0)
    for step, p in enumerate(spairs, start=1):
        t = p.x[0]
        region = minkowski_expand(region, Fraction(j) * (t - prev_t), box_limit)
        region = subtract_cube(region, p.y, 1, open_cube=True, box_limit=box_limit)
        radii.append(t)
        regions.append(region)
        prev_t = t
        if region.is_empty:
            return ControlVerdict(True, step, None, step)
    points = _backtrack(regions, radii, Fraction(j))
    bps, vals = _compress_breakpoints(radii, points)
    witness = RadialPLFunction(bps, vals, Fraction(j))
    if witness.max_slope() > j:
        raise InternalConsistencyError("witness exceeds its Lipschitz budget")
    if max_norm(witness.eval(Fraction(0))) > j:
        raise InternalConsistencyError("witness start value violates |f(0)| <= j")
    for p in spairs:
        if max_norm(tuple(a - b for a, b in zip(witness.eval(p.x[0]), p.y))) < 1:
            raise InternalConsistencyError(f"witness is controlled by pair {p.index}")
    return ControlVerdict(False, None, witness, len(spairs))


def trace_to_lines(trace: FeasTrace) -> list[str]:
    """Delimiter-separated per-step records, suitable for plotting."""
    report = check_claim21(trace)
    lines = ["# schema=evader-trace-v1", "i,t,boxes,measure,bound,margin"]
    for row in report.rows:
        lines.append(
            f"{row.i},{row.t},{row.box_count},{row.measure},{row.bound},{row.margin}"
        )
    return lines


def pairs_to_lines(pairs: Sequence[ControlPair], m: int, d: int) -> list[str]:
    lines = [f"pairs m={m} d={d} count={len(pairs)}"]
    for p in pairs:
        coords = [str(c) for c in p.x] + [str(c) for c in p.y]
        lines.append(f"{p.index} " + " ".join(coords))
    return lines


def pairs_from_lines(lines: Sequence[str]) -> tuple[list[ControlPair], int, int]:
    header = lines[0].split()
    if not header or header[0] != "pairs":
        raise ValueError("not a pairs record")
    fields = dict(part.split("=", 1) for part in header[1:])
    m = int(fields["m"])
    d = int(fields["d"])
    count = int(fields["count"])
    pairs = []
    for raw in lines[1:1 + count]:
        toks = raw.split()
        if len(toks) != 1 + m + d:
            raise ValueError(f"pair record needs index plus {m + d} rationals")
        idx = int(toks[0])
        x = tuple(Fraction(t) for t in toks[1:1 + m])
        y = tuple(Fraction(t) for t in toks[1 + m:])
        pairs.append(ControlPair(idx, x, y))
    return pairs, m, d


def plfn_to_lines(fn: RadialPLFunction) -> list[str]:
    lines = [f"plfn d={fn.d} bound={fn.bound} points={len(fn.breakpoints)}"]
    for t, v in zip(fn.breakpoints, fn.values):
        lines.append(f"{t} " + " ".join(str(c) for c in v))
    return lines


def plfn_from_lines(lines: Sequence[str]) -> RadialPLFunction:
    header = lines[0].split()
    if not header or header[0] != "plfn":
        raise ValueError("not a plfn record")
    fields = dict(part.split("=", 1) for part in header[1:])
    d = int(fields["d"])
    bound = Fraction(fields["bound"])
    count = int(fields["points"])
    bps, vals = [], []
    for raw in lines[1:1 + count]:
        toks = raw.split()
        bps.append(Fraction(toks[0]))
        vals.append(tuple(Fraction(t) for t in toks[1:]))
        if len(vals[-1]) != d:
            raise ValueError(f"value record needs {d} rationals")
    return RadialPLFunction(tuple(bps), tuple(vals), bound)
