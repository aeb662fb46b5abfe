"""Explicit controlling blocks for Lipschitz paths R -> R^d.

A block for budget j and horizon n tiles the cube of radius r = j(n+1) by
k = (j(n+1)+1)^d cubes of radius r' = r/(r+1) < 1, indexes the tile centers
in decreasing lexicographic order, and slides each center down by the drift
j(n - x_i) along the all-ones direction.  Matching the i-th smallest support
point with the i-th largest center makes the k pairs control every
j-Lipschitz f with |f(0)| <= j whose support points sit in [0, n].

Blocks for j = 1, 2, ... over pairwise disjoint index sets control every
Lipschitz function; ``build_schedule`` plans that consumption.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import count, product
from typing import Sequence

from .errors import InsufficientPointsError
from .feasibility import ControlPair
from .geometry import Point
from .ratmath import frac_ceil
from .sequences import PointSeq


def block_size(j: int, n: int, d: int) -> int:
    """k(j, n) = (j(n+1)+1)^d, the number of pairs one block consumes."""
    return (j * (n + 1) + 1) ** d


def tile_centers(j: int, n: int, d: int) -> list[Point]:
    """Centers of the k cubes of radius r' tiling the radius-r cube,
    in decreasing lexicographic order."""
    r = j * (n + 1)
    r_prime = Fraction(r, r + 1)
    per_axis = [-r + r_prime * (2 * t + 1) for t in range(r + 1)]
    return sorted(product(per_axis, repeat=d), reverse=True)


def build_block(
    j: int,
    n: int,
    d: int,
    xs: Sequence[Fraction],
) -> list[ControlPair]:
    """The k pairs (x_i, z_i - j(n - x_i) * ones) for the first k support points."""
    if j < 1 or n < 0 or d < 1:
        raise ValueError("need j >= 1, n >= 0, d >= 1")
    k = block_size(j, n, d)
    xs = [Fraction(x) for x in xs]
    if len(xs) < k:
        raise InsufficientPointsError(
            f"block (j={j}, n={n}, d={d}) needs {k} points, got {len(xs)}"
        )
    xs = xs[:k]
    for a, b in zip(xs, xs[1:]):
        if a > b:
            raise ValueError("support points must be sorted nondecreasing")
    if xs[0] < 0 or xs[-1] > n:
        raise ValueError("support points must lie in [0, n]")
    centers = tile_centers(j, n, d)
    pairs = []
    for i, (x, z) in enumerate(zip(xs, centers)):
        drift = j * (n - x)
        y = tuple(c - drift for c in z)
        pairs.append(ControlPair(i, (x,), y))
    return pairs


@dataclass(frozen=True)
class ScheduledBlock:
    j: int
    n: int
    pairs: tuple[ControlPair, ...]


def schedule_blocks(seq: PointSeq, d: int, J: int) -> list[ScheduledBlock]:
    """Plan blocks for j = 1..J over pairwise disjoint index sets.

    For each j the smallest horizon n with at least k(j, n) yet-unused points
    at x <= n wins; the block consumes the smallest such points first.
    Negative support points are rejected: callers split by sign beforehand.
    """
    if seq.m != 1:
        raise ValueError("scheduling requires a one-dimensional sequence")
    if J < 0:
        raise ValueError("J must be nonnegative")
    unused = sorted(
        ((p[0], label) for p, label in zip(seq.entries, seq.labels)),
        key=lambda t: (t[0], t[1]),
    )
    for x, _ in unused:
        if x < 0:
            raise ValueError("negative support points: split the sequence by sign first")
    blocks = []
    for j in range(1, J + 1):
        if not unused:
            raise InsufficientPointsError(f"no points left for block j={j}")
        n_sat = frac_ceil(max(x for x, _ in unused))
        chosen_n = None
        for n in range(0, n_sat + 1):
            k = block_size(j, n, d)
            avail = sum(1 for x, _ in unused if x <= n)
            if avail >= k:
                chosen_n = n
                break
        if chosen_n is None:
            k = block_size(j, n_sat, d)
            avail = len(unused)
            raise InsufficientPointsError(
                f"block j={j} needs {k} points at x <= {n_sat}, only {avail} remain"
            )
        k = block_size(j, chosen_n, d)
        # unused is sorted by (x, label), so the eligible points are a prefix
        take, unused = unused[:k], unused[k:]
        raw = build_block(j, chosen_n, d, [x for x, _ in take])
        pairs = tuple(
            ControlPair(label, p.x, p.y)
            for (x, label), p in zip(take, raw)
        )
        blocks.append(ScheduledBlock(j, chosen_n, pairs))
    return blocks


def build_schedule(seq: PointSeq, d: int, J: int) -> list[ControlPair]:
    """Flattened pair list of the blocks for j = 1..J."""
    pairs: list[ControlPair] = []
    for block in schedule_blocks(seq, d, J):
        pairs.extend(block.pairs)
    return pairs


def dense_cluster_pairs(
    x_star: Fraction,
    count_pairs: int,
    d: int,
    side: Fraction,
) -> list[ControlPair]:
    """Pairs all at x_star whose values refine the radius-`side` cube dyadically.

    Level 0 is the origin; level L contributes every point whose coordinates
    are odd multiples of side/2^L inside the cube, in increasing lexicographic
    order.  Once the refinement is finer than 2, any f with
    |f(x_star)| <= side - 1 is within 1 of some listed value.
    """
    if count_pairs < 1:
        raise ValueError("need at least one pair")
    x_star = Fraction(x_star)
    side = Fraction(side)
    values: list[Point] = [tuple(Fraction(0) for _ in range(d))]
    for level in count(1):
        if len(values) >= count_pairs:
            break
        unit = side / 2 ** level
        odds = [Fraction(k) * unit for k in range(-(2 ** level) + 1, 2 ** level, 2)]
        for combo in sorted(product(odds, repeat=d)):
            values.append(combo)
            if len(values) >= count_pairs:
                break
    return [
        ControlPair(i, (x_star,), v) for i, v in enumerate(values[:count_pairs])
    ]
