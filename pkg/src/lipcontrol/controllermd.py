"""Covering controller for Lipschitz maps R^m -> R^d with m <= d.

The domain splits as R^(m-1) x R with the last coordinate read as time.
For a budget j the construction fixes

* eps = 1/(8j+8) and the smallest integer c with c^m > 4d / eps^(d-m),
* a start time t0 > j+1 and sphere radius l = floor(j t0 + j) + 1,
* an end time t1 > t0,

covers D x J = (radius-t0 ball in R^(m-1)) x [t0, t1] by internally disjoint
eps-cubes, attaches radius-1/2 cubes along each facet of the sphere |y| = l
(covering the slab of facet points whose image under the linear section map
lands in the cube's spatial shadow), and covers the whole radius-l ball by
(2l)^d more radius-1/2 cubes for the far time slab.  Every 1/2-cube consumes
one distinct sequence point strictly inside its eps-cube; the cube centers
become the assigned values.

The density hypothesis is operationalized as a per-eps-cube quota: each cube
of the cover must hold at least 4d(2l)^(d-m) points strictly inside, and the
cubes meeting the t = t1 slab need (2l)^d more.  That per-cube form is what
the assignment actually consumes, and unlike a pointwise condition over R^m
it is finitely checkable.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .errors import InsufficientPointsError, NotDenseEnoughError
from .feasibility import ControlPair
from .geometry import Box, Point
from .ratmath import frac_ceil, frac_floor
from .sequences import PointSeq


@dataclass(frozen=True)
class MdParams:
    """Derived parameters of one budget-j construction."""

    j: int
    m: int
    d: int
    epsilon: Fraction
    c: int
    alpha: Fraction
    t0: Fraction
    t1: Fraction
    l: int

    def __post_init__(self) -> None:
        if not (1 <= self.m <= self.d):
            raise ValueError("construction requires 1 <= m <= d")
        if self.epsilon != Fraction(1, 8 * self.j + 8):
            raise ValueError("epsilon must equal 1/(8j+8)")
        if not self.c ** self.m * self.epsilon ** (self.d - self.m) > 4 * self.d:
            raise ValueError("c fails c^m > 4d / eps^(d-m)")
        if self.alpha != self.epsilon / self.c:
            raise ValueError("alpha must equal eps / c")
        if not self.t0 > self.j + 1:
            raise ValueError("t0 must exceed j + 1")
        if self.l != frac_floor(self.j * self.t0 + self.j) + 1:
            raise ValueError("l must equal floor(j t0 + j) + 1")
        if not self.l < (self.j + 1) * self.t0:
            raise ValueError("l must stay below (j+1) t0")
        if not self.t1 > self.t0:
            raise ValueError("t1 must exceed t0")
        if not 8 * self.l * self.epsilon <= self.t0:
            raise ValueError("facet confinement bound 8 l eps / t0 <= 1 fails")

    @property
    def quota_half(self) -> int:
        return 4 * self.d * (2 * self.l) ** (self.d - self.m)

    @property
    def quota_new(self) -> int:
        return (2 * self.l) ** self.d


def _cover_boxes(m: int, epsilon: Fraction, t0: Fraction, t1: Fraction) -> list[Box]:
    side = 2 * epsilon
    spatial = max(1, frac_ceil(2 * t0 / side))
    temporal = max(1, frac_ceil((t1 - t0) / side))
    boxes = []
    for combo in product(*(range(spatial) for _ in range(m - 1)), range(temporal)):
        lo = tuple(-t0 + side * i for i in combo[: m - 1]) + (t0 + side * combo[-1],)
        hi = tuple(c + side for c in lo)
        boxes.append(Box(lo, hi))
    return boxes


def epsilon_cover(p: MdParams) -> list[Box]:
    """Internally disjoint eps-cubes tiling D x J, anchored at the corner
    (-t0, ..., -t0, t0); the outermost layer may overhang.  Lexicographic order."""
    return _cover_boxes(p.m, p.epsilon, p.t0, p.t1)


def linear_map_g(y: Sequence[Fraction], p: MdParams) -> Point:
    """The section map (t0 / 2l) (y_1 - y_m, ..., y_{m-1} - y_m)."""
    y = tuple(Fraction(c) for c in y)
    scale = p.t0 / (2 * p.l)
    return tuple(scale * (y[k] - y[p.m - 1]) for k in range(p.m - 1))


def _interval_intersect(
    lo_a: Fraction, hi_a: Fraction, lo_b: Fraction, hi_b: Fraction
) -> tuple[Fraction, Fraction] | None:
    lo, hi = max(lo_a, lo_b), min(hi_a, hi_b)
    if lo > hi:
        return None
    return lo, hi


def _unit_tiles(l: int) -> list[Fraction]:
    """Centers of the 2l unit cells tiling [-l, l]."""
    return [Fraction(-l) + Fraction(1, 2) + u for u in range(2 * l)]


def half_balls_for(Z: Box, p: MdParams) -> list[Point]:
    """Centers of the radius-1/2 cubes covering, facet by facet, the sphere
    points whose section image lands in Z's spatial shadow.

    Facets pinning one of the first m coordinates confine all m coupled
    coordinates to intervals of length at most 8 l eps / t0 <= 1 and tile the
    d-m free coordinates; facets pinning a free coordinate partition the
    m-th coordinate into 4l half-unit intervals first.  The total never
    exceeds 4d(2l)^(d-m).
    """
    l = Fraction(p.l)
    scale = 2 * p.l / p.t0
    # y_k - y_m must land in [diff[k][0], diff[k][1]] for the image to hit Z's shadow
    diff = [(scale * Z.lo[k], scale * Z.hi[k]) for k in range(p.m - 1)]
    centers: list[Point] = []

    def emit(confined: dict[int, tuple[Fraction, Fraction]], free: list[int]) -> None:
        for axis, (lo, hi) in confined.items():
            if hi - lo > 1:
                raise AssertionError("confined interval exceeds the 1/2-ball span")
        base = {axis: (lo + hi) / 2 for axis, (lo, hi) in confined.items()}
        for combo in product(_unit_tiles(p.l), repeat=len(free)):
            center = [Fraction(0)] * p.d
            for axis, val in base.items():
                center[axis] = val
            for axis, val in zip(free, combo):
                center[axis] = val
            centers.append(tuple(center))

    def coupled_ranges(
        ym: tuple[Fraction, Fraction]
    ) -> dict[int, tuple[Fraction, Fraction]] | None:
        out = {}
        for k in range(p.m - 1):
            rng = _interval_intersect(ym[0] + diff[k][0], ym[1] + diff[k][1], -l, l)
            if rng is None:
                return None
            out[k] = rng
        return out

    for a in range(p.d):
        for s in (1, -1):
            pin = s * l
            if a < p.m - 1:
                # facet pins one coupled spatial coordinate
                ym = _interval_intersect(pin - diff[a][1], pin - diff[a][0], -l, l)
                if ym is None:
                    continue
                coupled = coupled_ranges(ym)
                if coupled is None:
                    continue
                confined = dict(coupled)
                confined[a] = (pin, pin)
                confined[p.m - 1] = ym
                emit(confined, list(range(p.m, p.d)))
            elif a == p.m - 1:
                # facet pins the time-image coordinate y_m
                coupled = coupled_ranges((pin, pin))
                if coupled is None:
                    continue
                confined = dict(coupled)
                confined[a] = (pin, pin)
                emit(confined, list(range(p.m, p.d)))
            else:
                # facet pins a free coordinate: partition y_m into 4l intervals
                for u in range(4 * p.l):
                    ym = (-l + Fraction(u, 2), -l + Fraction(u + 1, 2))
                    coupled = coupled_ranges(ym)
                    if coupled is None:
                        continue
                    confined = dict(coupled)
                    confined[a] = (pin, pin)
                    confined[p.m - 1] = ym
                    emit(confined, [ax for ax in range(p.m, p.d) if ax != a])

    unique = sorted(set(centers))
    if len(unique) > p.quota_half:
        raise AssertionError("half-ball count exceeds 4d(2l)^(d-m)")
    return unique


def new_ball_centers(p: MdParams) -> list[Point]:
    """Centers of the (2l)^d radius-1/2 cubes tiling the radius-l ball."""
    return [tuple(combo) for combo in product(_unit_tiles(p.l), repeat=p.d)]


class _PointIndex:
    """Bucketed lookup of sequence points for strict-interior box queries."""

    def __init__(self, seq: PointSeq, cell: Fraction):
        self.cell = cell
        self.seq = seq
        self.buckets: dict[tuple[int, ...], list[int]] = defaultdict(list)
        for i, pt in enumerate(seq.entries):
            key = tuple(frac_floor(c / cell) for c in pt)
            self.buckets[key].append(i)

    def interior_indices(self, box: Box, skip: set[int]) -> list[int]:
        ranges = [
            range(frac_floor(lo / self.cell), frac_floor(hi / self.cell) + 1)
            for lo, hi in zip(box.lo, box.hi)
        ]
        found = []
        for key in product(*ranges):
            for i in self.buckets.get(key, ()):
                if i in skip:
                    continue
                if box.contains(self.seq.entries[i], strict=True):
                    found.append(i)
        found.sort()
        return found

    def interior_count(self, box: Box) -> int:
        return len(self.interior_indices(box, set()))


def _base_params(j: int, m: int, d: int) -> tuple[Fraction, int, Fraction]:
    epsilon = Fraction(1, 8 * j + 8)
    c = 1
    while not c ** m * epsilon ** (d - m) > 4 * d:
        c += 1
    return epsilon, c, epsilon / c


def derive_params(
    seq: PointSeq,
    j: int,
    d: int,
    t_step: Fraction = Fraction(1, 4),
    horizon: Fraction | None = None,
) -> MdParams:
    """Search the smallest t0 then the smallest t1 on a t_step grid such that
    every eps-cube of the induced cover meets its point quota.

    l depends on t0, so each candidate recomputes it.  Failure reports the
    first deficient cube encountered.
    """
    m = seq.m
    if m > d:
        raise ValueError("construction requires m <= d")
    t_step = Fraction(t_step)
    epsilon, c, alpha = _base_params(j, m, d)
    if horizon is None:
        horizon = max(seq.norms(), default=Fraction(0))
    index = _PointIndex(seq, 2 * epsilon)

    def first_deficient(
        t0: Fraction, t1: Fraction, l: int, include_far: bool
    ) -> tuple[Box, int, int] | None:
        quota_half = 4 * d * (2 * l) ** (d - m)
        quota_new = (2 * l) ** d
        for Z in _cover_boxes(m, epsilon, t0, t1):
            quota = quota_half
            if include_far and Z.lo[m - 1] <= t1 <= Z.hi[m - 1]:
                quota += quota_new
            have = index.interior_count(Z)
            if have < quota:
                return Z, have, quota
        return None

    deficiency: tuple[Box, int, int] | None = None
    k = 1
    while True:
        t0 = j + 1 + t_step * k
        if t0 >= horizon:
            break
        k += 1
        l = frac_floor(j * t0 + j) + 1
        # phase 1: the first time layer alone must meet the half-ball quota
        bad = first_deficient(t0, t0 + 2 * epsilon, l, include_far=False)
        if bad is not None:
            deficiency = bad
            continue
        # phase 2: grow t1 until the full cover passes, far slab included
        kk = 1
        while True:
            t1 = t0 + t_step * kk
            if t1 > horizon:
                break
            kk += 1
            bad = first_deficient(t0, t1, l, include_far=True)
            if bad is None:
                return MdParams(j, m, d, epsilon, c, alpha, t0, t1, l)
            deficiency = bad
    if deficiency is not None:
        Z, have, quota = deficiency
        raise NotDenseEnoughError(
            f"no admissible (t0, t1) within horizon {horizon}: cube "
            f"[{tuple(map(str, Z.lo))} .. {tuple(map(str, Z.hi))}] holds "
            f"{have} points, quota {quota}"
        )
    raise NotDenseEnoughError(
        f"no admissible t0 within horizon {horizon}: sequence too short"
    )


@dataclass(frozen=True)
class ZRecord:
    """One eps-cube with its 1/2-ball centers and the consumed points."""

    ball: Box
    centers: tuple[Point, ...]
    indices: tuple[int, ...]   # positions within the sequence
    labels: tuple[int, ...]    # original sequence labels
    points: tuple[Point, ...]


@dataclass(frozen=True)
class BallAssignment:
    params: MdParams
    records: tuple[ZRecord, ...]
    far_records: tuple[ZRecord, ...]

    def pairs(self) -> list[ControlPair]:
        out = []
        for rec in self.records + self.far_records:
            for center, label, pt in zip(rec.centers, rec.labels, rec.points):
                out.append(ControlPair(label, pt, center))
        return out


def build_md(
    seq: PointSeq,
    j: int,
    d: int,
    params: MdParams | None = None,
) -> BallAssignment:
    """Assign one distinct sequence index per (eps-cube, 1/2-ball) pair.

    Indices for an eps-cube come from its strict interior, smallest position
    first; the cubes meeting the t = t1 slab additionally consume one index
    per new ball.  Runs after derive_params, so a shortage here is a bug.
    """
    if params is None:
        params = derive_params(seq, j, d)
    cover = epsilon_cover(params)
    index = _PointIndex(seq, 2 * params.epsilon)
    consumed: set[int] = set()

    def reserve(Z: Box, count: int) -> list[int]:
        available = index.interior_indices(Z, consumed)
        if len(available) < count:
            raise InsufficientPointsError(
                f"cube [{tuple(map(str, Z.lo))} .. {tuple(map(str, Z.hi))}] can "
                f"supply {len(available)} of {count} indices; derive_params "
                "should have rejected this input"
            )
        taken = available[:count]
        consumed.update(taken)
        return taken

    def make_record(Z: Box, centers: Sequence[Point]) -> ZRecord:
        taken = reserve(Z, len(centers))
        return ZRecord(
            ball=Z,
            centers=tuple(centers),
            indices=tuple(taken),
            labels=tuple(seq.labels[i] for i in taken),
            points=tuple(seq.entries[i] for i in taken),
        )

    records = [make_record(Z, half_balls_for(Z, params)) for Z in cover]
    new_centers = new_ball_centers(params)
    far_records = [
        make_record(Z, new_centers)
        for Z in cover
        if Z.lo[params.m - 1] <= params.t1 <= Z.hi[params.m - 1]
    ]
    return BallAssignment(params, tuple(records), tuple(far_records))


def assignment_to_lines(assignment: BallAssignment) -> list[str]:
    p = assignment.params
    lines = [
        "# schema=ball-assignment-v1",
        f"params j={p.j} m={p.m} d={p.d} epsilon={p.epsilon} c={p.c} "
        f"alpha={p.alpha} t0={p.t0} t1={p.t1} l={p.l}",
    ]

    def dump(tag: str, recs: Iterable[ZRecord]) -> None:
        for rec in recs:
            lo = " ".join(str(c) for c in rec.ball.lo)
            hi = " ".join(str(c) for c in rec.ball.hi)
            lines.append(f"{tag} lo {lo} hi {hi} count={len(rec.centers)}")
            for center, label, pt in zip(rec.centers, rec.labels, rec.points):
                x = " ".join(str(c) for c in pt)
                y = " ".join(str(c) for c in center)
                lines.append(f"  pair index={label} x {x} y {y}")

    dump("Z", assignment.records)
    dump("Zfar", assignment.far_records)
    return lines
