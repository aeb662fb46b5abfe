"""Randomized test subjects and end-to-end control games.

The canonical Lipschitz family here is grid-sampled: values at the nodes of a
regular lattice, multilinear interpolation in between, constant extension
outside the sampled window.  Node values are rationals, so evaluation at a
rational point is exact; a cached float path serves the search-heavy callers.

A multilinear patch is max-norm Lipschitz with constant equal to the largest
corner-wise sum of incident edge slopes, not the largest single edge slope.
The sampler therefore draws adjacent-node differences within j*h/m (j*h when
m = 1), which certifies the interpolant as a genuine member of the
j-Lipschitz class; ``audit_max_norm`` checks exactly that corner criterion.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .feasibility import ControlPair
from .geometry import Point, max_norm
from .ratmath import frac_floor

RAND_BITS = 20  # node draws use dyadic rationals with 2^20 denominators
FLOAT_SLACK = 1e-6  # float prefilter safety margin, far above eval error


class SampledLipschitz:
    """Grid-interpolated j-Lipschitz function R^m -> R^d."""

    def __init__(
        self,
        m: int,
        d: int,
        j: Fraction,
        lo: Point,
        h: Fraction,
        shape: tuple[int, ...],
        values: tuple[Point, ...],
    ):
        if len(lo) != m or len(shape) != m:
            raise ValueError("domain corner and shape must have length m")
        total = 1
        for n in shape:
            if n < 1:
                raise ValueError("each axis needs at least one node")
            total *= n
        if len(values) != total:
            raise ValueError(f"need {total} node values, got {len(values)}")
        self.m = m
        self.d = d
        self.j = Fraction(j)
        self.lo = tuple(Fraction(c) for c in lo)
        self.h = Fraction(h)
        self.shape = tuple(shape)
        self.values = tuple(tuple(Fraction(c) for c in v) for v in values)
        self._strides = []
        acc = 1
        for n in reversed(self.shape):
            self._strides.append(acc)
            acc *= n
        self._strides.reverse()
        self._float_cache: np.ndarray | None = None

    @property
    def hi(self) -> Point:
        return tuple(l + (n - 1) * self.h for l, n in zip(self.lo, self.shape))

    def flat(self, idx: Sequence[int]) -> int:
        return sum(i * s for i, s in zip(idx, self._strides))

    def node_value(self, idx: Sequence[int]) -> Point:
        return self.values[self.flat(idx)]

    def node_point(self, idx: Sequence[int]) -> Point:
        return tuple(l + i * self.h for l, i in zip(self.lo, idx))

    def _locate(self, x: Sequence[Fraction]) -> tuple[list[int], list[Fraction]]:
        base: list[int] = []
        weights: list[Fraction] = []
        for k in range(self.m):
            xk = min(max(Fraction(x[k]), self.lo[k]), self.hi[k])
            u = (xk - self.lo[k]) / self.h
            if self.shape[k] == 1:
                base.append(0)
                weights.append(Fraction(0))
                continue
            b = min(frac_floor(u), self.shape[k] - 2)
            base.append(b)
            weights.append(u - b)
        return base, weights

    def eval_point(self, x: Sequence[Fraction]) -> Point:
        """Exact multilinear interpolation (constant beyond the window)."""
        base, w = self._locate(x)
        out = [Fraction(0)] * self.d
        for bits in product((0, 1), repeat=self.m):
            weight = Fraction(1)
            idx = []
            for k, bit in enumerate(bits):
                if self.shape[k] == 1:
                    if bit:
                        weight = Fraction(0)
                        break
                    idx.append(0)
                    continue
                weight *= w[k] if bit else 1 - w[k]
                idx.append(base[k] + bit)
            if weight == 0:
                continue
            val = self.values[self.flat(idx)]
            for c in range(self.d):
                out[c] += weight * val[c]
        return tuple(out)

    def _float_values(self) -> np.ndarray:
        if self._float_cache is None:
            arr = np.array(
                [[float(c) for c in v] for v in self.values], dtype=float
            )
            self._float_cache = arr.reshape(self.shape + (self.d,))
        return self._float_cache

    def eval_points_float(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float interpolation at an array of shape (P, m)."""
        vals = self._float_values()
        pts = np.asarray(points, dtype=float)
        lo = np.array([float(c) for c in self.lo])
        hi = np.array([float(c) for c in self.hi])
        u = (np.clip(pts, lo, hi) - lo) / float(self.h)
        shape = np.array(self.shape)
        base = np.clip(np.floor(u).astype(int), 0, np.maximum(shape - 2, 0))
        w = np.clip(u - base, 0.0, 1.0)
        w[:, shape == 1] = 0.0
        out = np.zeros((pts.shape[0], self.d))
        for bits in product((0, 1), repeat=self.m):
            weight = np.ones(pts.shape[0])
            idx = []
            for k, bit in enumerate(bits):
                if self.shape[k] == 1:
                    idx.append(np.zeros(pts.shape[0], dtype=int))
                    if bit:
                        weight = weight * 0.0
                    continue
                weight = weight * (w[:, k] if bit else 1.0 - w[:, k])
                idx.append(base[:, k] + bit)
            out += weight[:, None] * vals[tuple(idx)]
        return out

    def eval_point_float(self, x: Sequence[float]) -> tuple[float, ...]:
        vals = self._float_values()
        base = []
        weights = []
        for k in range(self.m):
            xk = min(max(float(x[k]), float(self.lo[k])), float(self.hi[k]))
            if self.shape[k] == 1:
                base.append(0)
                weights.append(0.0)
                continue
            u = (xk - float(self.lo[k])) / float(self.h)
            b = min(int(u), self.shape[k] - 2)
            base.append(b)
            weights.append(min(max(u - b, 0.0), 1.0))
        out = [0.0] * self.d
        for bits in product((0, 1), repeat=self.m):
            weight = 1.0
            idx = []
            for k, bit in enumerate(bits):
                if self.shape[k] == 1:
                    if bit:
                        weight = 0.0
                    idx.append(0)
                    continue
                weight *= weights[k] if bit else 1.0 - weights[k]
                idx.append(base[k] + bit)
            if weight == 0.0:
                continue
            corner = vals[tuple(idx)]
            for c in range(self.d):
                out[c] += weight * corner[c]
        return tuple(out)

    def edges(self):
        """Yield (idx_a, idx_b, value_a, value_b) over all grid edges."""
        for idx in product(*(range(n) for n in self.shape)):
            for k in range(self.m):
                if idx[k] + 1 < self.shape[k]:
                    other = idx[:k] + (idx[k] + 1,) + idx[k + 1:]
                    yield idx, other, self.node_value(idx), self.node_value(other)


def audit_edges(fn: SampledLipschitz, j: Fraction | None = None) -> bool:
    """Every grid edge moves each output coordinate by at most j*h, exactly."""
    j = fn.j if j is None else Fraction(j)
    bound = j * fn.h
    for _, _, va, vb in fn.edges():
        if any(abs(a - b) > bound for a, b in zip(va, vb)):
            return False
    return True


def audit_max_norm(fn: SampledLipschitz, j: Fraction | None = None) -> bool:
    """Corner criterion certifying the interpolant as j-Lipschitz in the max
    norm: at every cell corner the incident edge differences sum to <= j*h
    per output coordinate."""
    j = fn.j if j is None else Fraction(j)
    bound = j * fn.h
    cell_ranges = [range(max(1, n - 1)) for n in fn.shape]
    for cell in product(*cell_ranges):
        for corner_bits in product((0, 1), repeat=fn.m):
            corner = tuple(
                min(c + b, fn.shape[k] - 1) for k, (c, b) in enumerate(zip(cell, corner_bits))
            )
            v0 = fn.node_value(corner)
            sums = [Fraction(0)] * fn.d
            for k in range(fn.m):
                if fn.shape[k] == 1:
                    continue
                flipped = list(corner)
                flipped[k] = cell[k] + (1 - corner_bits[k])
                v1 = fn.node_value(tuple(flipped))
                for c in range(fn.d):
                    sums[c] += abs(v0[c] - v1[c])
            if any(s > bound for s in sums):
                return False
    return True


def sample_lipschitz(
    m: int,
    d: int,
    j: Fraction,
    domain: tuple[Sequence[Fraction], Sequence[Fraction]],
    h: Fraction,
    seed: int,
) -> SampledLipschitz:
    """Random-walk node assignment, deterministic per seed.

    Nodes are visited in lexicographic order; each value is uniform in the
    intersection of the step-bound cubes around the already-assigned
    neighbors.  The step bound is j*h/m (j*h when m = 1) so the interpolant
    is certifiably j-Lipschitz in the max norm.  When the grid has a node at
    the origin, the walk is then shifted rigidly so that node's value is a
    uniform draw from the radius-j cube, making the sample a class member
    with |f(0)| <= j.
    """
    j = Fraction(j)
    h = Fraction(h)
    lo = tuple(Fraction(c) for c in domain[0])
    hi = tuple(Fraction(c) for c in domain[1])
    if h <= 0:
        raise ValueError("grid step must be positive")
    shape = []
    for a, b in zip(lo, hi):
        span = (b - a) / h
        if span.denominator != 1 or span < 0:
            raise ValueError("domain must be an integer number of steps")
        shape.append(int(span) + 1)
    shape = tuple(shape)
    origin_idx: tuple[int, ...] | None = tuple(
        int((Fraction(0) - a) / h) if (a <= 0 <= b and ((-a) / h).denominator == 1) else -1
        for a, b in zip(lo, hi)
    )
    if any(i < 0 or i >= n for i, n in zip(origin_idx, shape)):
        origin_idx = None

    step = j * h if m == 1 else j * h / m
    rng = random.Random(seed)
    values: dict[tuple[int, ...], Point] = {}
    denom = 2 ** RAND_BITS

    def draw(lo_w: Fraction, hi_w: Fraction) -> Fraction:
        return lo_w + (hi_w - lo_w) * Fraction(rng.randint(0, denom), denom)

    for idx in product(*(range(n) for n in shape)):
        out = []
        for c in range(d):
            lo_w, hi_w = None, None
            for k in range(m):
                if idx[k] == 0:
                    continue
                prev = idx[:k] + (idx[k] - 1,) + idx[k + 1:]
                v = values[prev][c]
                lo_w = v - step if lo_w is None else max(lo_w, v - step)
                hi_w = v + step if hi_w is None else min(hi_w, v + step)
            if lo_w is None:
                lo_w, hi_w = -j, j
            if lo_w > hi_w:
                raise AssertionError("sampler window collapsed; this is a bug")
            out.append(draw(lo_w, hi_w))
        values[idx] = tuple(out)

    if origin_idx is not None:
        # recenter rigidly so the origin value is a fresh uniform draw from
        # the radius-j cube; a constant shift preserves every edge difference
        target = tuple(draw(-j, j) for _ in range(d))
        shift = tuple(
            t - v for t, v in zip(target, values[origin_idx])
        )
        values = {
            idx: tuple(v + s for v, s in zip(val, shift))
            for idx, val in values.items()
        }

    flat = tuple(values[idx] for idx in product(*(range(n) for n in shape)))
    return SampledLipschitz(m, d, j, lo, h, shape, flat)


def lattice_counterexample(pairs: Sequence[ControlPair]) -> SampledLipschitz:
    """A 2-Lipschitz tent function over the integer lattice that evades every
    given pair by margin >= 1.

    The sign at each lattice point is +1 when the assigned value is <= 0 and
    -1 otherwise, which forces |sign - y| >= 1; half-integer nodes are 0, so
    the function is realized exactly on a step-1/2 grid.
    """
    if not pairs:
        raise ValueError("need at least one pair")
    m = len(pairs[0].x)
    signs: dict[Point, int] = {}
    by_x: dict[Point, list[Fraction]] = {}
    for p in pairs:
        if len(p.y) != 1:
            raise ValueError("the lattice counterexample targets d = 1")
        if any(c.denominator != 1 for c in p.x):
            raise ValueError("pair locations must be integer lattice points")
        by_x.setdefault(p.x, []).append(p.y[0])
    for x, ys in by_x.items():
        chosen = None
        for cand in (1, -1):
            if all(abs(cand - y) >= 1 for y in ys):
                chosen = cand
                break
        if chosen is None:
            raise ValueError(f"no admissible sign at {x}: values {ys}")
        signs[x] = chosen

    h = Fraction(1, 2)
    lo = tuple(min(p.x[k] for p in pairs) - 1 for k in range(m))
    hi = tuple(max(p.x[k] for p in pairs) + 1 for k in range(m))
    shape = tuple(int((b - a) / h) + 1 for a, b in zip(lo, hi))
    values = []
    for idx in product(*(range(n) for n in shape)):
        pt = tuple(a + i * h for a, i in zip(lo, idx))
        if all(c.denominator == 1 for c in pt):
            values.append((Fraction(signs.get(pt, 1)),))
        else:
            values.append((Fraction(0),))
    return SampledLipschitz(m, 1, Fraction(2), lo, h, shape, tuple(values))


@dataclass(frozen=True)
class FunctionOutcome:
    controlled: bool
    index: int | None      # controlling / minimizing pair index
    margin: Fraction | None  # exact min over pairs of |f(x_i) - y_i|


@dataclass(frozen=True)
class GameReport:
    outcomes: tuple[FunctionOutcome, ...]
    controlled_fraction: Fraction
    worst_margin: Fraction | None

    @property
    def all_controlled(self) -> bool:
        return all(o.controlled for o in self.outcomes)


def _exact_margin(fn, pair: ControlPair) -> Fraction:
    val = fn.eval_point(pair.x)
    return max_norm(tuple(a - b for a, b in zip(val, pair.y)))


def game_run(pairs: Sequence[ControlPair], functions: Sequence) -> GameReport:
    """Exact control margins for each function against the pair set.

    A float prefilter orders the pairs; verdicts are certified exactly.  A
    controlled verdict exact-evaluates the float-minimal candidates (their
    separation far exceeds float evaluation error at desk scale); an
    uncontrolled verdict exact-evaluates every pair.
    """
    outcomes = []
    pair_xs = (
        np.array([[float(c) for c in p.x] for p in pairs]) if pairs else None
    )
    pair_ys = (
        np.array([[float(c) for c in p.y] for p in pairs]) if pairs else None
    )
    for fn in functions:
        if not pairs:
            outcomes.append(FunctionOutcome(False, None, None))
            continue
        if hasattr(fn, "eval_points_float"):
            vals = fn.eval_points_float(pair_xs)
        else:
            vals = np.array([list(fn.eval_point_float(x)) for x in pair_xs])
        float_margins = np.max(np.abs(vals - pair_ys), axis=1)
        cutoff = float(np.min(float_margins)) + FLOAT_SLACK
        candidates = [i for i, fm in enumerate(float_margins) if fm <= cutoff]
        exact = {i: _exact_margin(fn, pairs[i]) for i in candidates}
        best_i = min(exact, key=lambda i: (exact[i], pairs[i].index))
        if exact[best_i] < 1:
            outcomes.append(FunctionOutcome(True, pairs[best_i].index, exact[best_i]))
            continue
        # tentative evasion: certify by evaluating every pair exactly
        for i in range(len(pairs)):
            if i not in exact:
                exact[i] = _exact_margin(fn, pairs[i])
        best_i = min(exact, key=lambda i: (exact[i], pairs[i].index))
        outcomes.append(
            FunctionOutcome(exact[best_i] < 1, pairs[best_i].index, exact[best_i])
        )
    total = len(outcomes)
    controlled = sum(1 for o in outcomes if o.controlled)
    fraction = Fraction(controlled, total) if total else Fraction(0)
    margins = [o.margin for o in outcomes if o.margin is not None]
    worst = max(margins) if len(margins) == total and total else None
    return GameReport(tuple(outcomes), fraction, worst)


def report_to_lines(report: GameReport) -> list[str]:
    lines = ["# schema=game-report-v1"]
    for i, o in enumerate(report.outcomes):
        idx = "-" if o.index is None else str(o.index)
        margin = "-" if o.margin is None else str(o.margin)
        lines.append(
            f"fn={i} controlled={int(o.controlled)} index={idx} margin={margin}"
        )
    worst = "-" if report.worst_margin is None else str(report.worst_margin)
    lines.append(
        f"aggregate fraction={report.controlled_fraction} worst={worst}"
    )
    return lines


def map_to_lines(fn: SampledLipschitz) -> list[str]:
    lines = [
        f"samplemap m={fn.m} d={fn.d} j={fn.j} h={fn.h}",
        "lo " + " ".join(str(c) for c in fn.lo),
        "shape " + " ".join(str(n) for n in fn.shape),
    ]
    for v in fn.values:
        lines.append(" ".join(str(c) for c in v))
    return lines


def map_from_lines(lines: Sequence[str]) -> SampledLipschitz:
    header = lines[0].split()
    if not header or header[0] != "samplemap":
        raise ValueError("not a sampled-map record")
    fields = dict(part.split("=", 1) for part in header[1:])
    m, d = int(fields["m"]), int(fields["d"])
    j, h = Fraction(fields["j"]), Fraction(fields["h"])
    lo_line = lines[1].split()
    shape_line = lines[2].split()
    if lo_line[0] != "lo" or shape_line[0] != "shape":
        raise ValueError("malformed sampled-map header")
    lo = tuple(Fraction(t) for t in lo_line[1:])
    shape = tuple(int(t) for t in shape_line[1:])
    count = 1
    for n in shape:
        count *= n
    values = []
    for raw in lines[3:3 + count]:
        values.append(tuple(Fraction(t) for t in raw.split()))
    return SampledLipschitz(m, d, j, lo, h, shape, tuple(values))
