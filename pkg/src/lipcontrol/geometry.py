"""Exact axis-aligned box-union algebra in the maximum norm.

Every coordinate is an arbitrary-precision rational (``fractions.Fraction``);
nothing in this module rounds.  A :class:`Region` is a finite union of closed
boxes whose interiors are pairwise disjoint.  Degenerate (zero-thickness)
boxes are legal members: a boundary point left over after removing an open
cube is still a usable value, so it must stay representable.

The operations are pure functions over immutable values and are safe to use
from multiple threads without coordination.

Subtraction semantics:

* removing an *open* cube keeps the cube's boundary, so the result is the
  exact set difference (boundary faces survive as zero-thickness boxes);
* removing a *closed* cube returns the closure of the set difference, which
  is the best a closed-box representation can do; its measure is still exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ResourceLimitError

Scalar = Fraction
Point = tuple[Fraction, ...]

DEFAULT_BOX_LIMIT = 10 ** 6


def scalar(value: int | str | Fraction) -> Fraction:
    """Coerce an int, a ``"num/den"`` string, or a Fraction to a Scalar."""
    return Fraction(value)


def point(*coords: int | str | Fraction) -> Point:
    return tuple(Fraction(c) for c in coords)


def max_norm(p: Sequence[Fraction]) -> Fraction:
    """The maximum norm |p|; every "ball" in this package is a cube under it."""
    return max((abs(Fraction(c)) for c in p), default=Fraction(0))


def cube_bounds(center: Sequence[Fraction], rad: Fraction) -> tuple[Point, Point]:
    lo = tuple(Fraction(c) - rad for c in center)
    hi = tuple(Fraction(c) + rad for c in center)
    return lo, hi


@dataclass(frozen=True)
class Box:
    """A closed axis-aligned box given by its two corners, lo <= hi."""

    lo: Point
    hi: Point

    def __post_init__(self) -> None:
        if not self.lo or len(self.lo) != len(self.hi):
            raise ValueError("box corners must share a positive dimension")
        for a, b in zip(self.lo, self.hi):
            if a > b:
                raise ValueError(f"box has lo > hi: {self.lo} / {self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> Fraction:
        v = Fraction(1)
        for a, b in zip(self.lo, self.hi):
            v *= b - a
        return v

    @property
    def is_degenerate(self) -> bool:
        return any(a == b for a, b in zip(self.lo, self.hi))

    @property
    def center(self) -> Point:
        return tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))

    def contains(self, p: Sequence[Fraction], strict: bool = False) -> bool:
        if strict:
            return all(a < x < b for a, x, b in zip(self.lo, p, self.hi))
        return all(a <= x <= b for a, x, b in zip(self.lo, p, self.hi))

    def contains_box(self, other: "Box") -> bool:
        return all(
            a <= c and d <= b
            for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def intersect(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, c) for a, c in zip(self.lo, other.lo))
        hi = tuple(min(b, d) for b, d in zip(self.hi, other.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def expand(self, r: Fraction) -> "Box":
        return Box(tuple(a - r for a in self.lo), tuple(b + r for b in self.hi))

    def _key(self) -> tuple:
        return (self.lo, self.hi)


def _open_overlap(box: Box, sub_lo: Point, sub_hi: Point) -> bool:
    """True iff the box meets the *open* box (sub_lo, sub_hi)."""
    return all(
        h > sl and l < sh
        for l, h, sl, sh in zip(box.lo, box.hi, sub_lo, sub_hi)
    )


def _closed_overlap(box: Box, sub_lo: Point, sub_hi: Point) -> bool:
    return all(
        h >= sl and l <= sh
        for l, h, sl, sh in zip(box.lo, box.hi, sub_lo, sub_hi)
    )


def _subtract_box(box: Box, sub_lo: Point, sub_hi: Point, open_mode: bool) -> list[Box]:
    """Guillotine decomposition of ``box`` minus a box.

    open_mode=True removes the open box and returns the exact difference,
    retaining boundary faces as degenerate boxes where the input's boundary
    coincides with the subtrahend's.  open_mode=False removes the closed box
    and returns the closure of the difference (side slabs only).
    """
    if open_mode:
        if not _open_overlap(box, sub_lo, sub_hi):
            return [box]
    else:
        if not _closed_overlap(box, sub_lo, sub_hi):
            return [box]

    pieces: list[Box] = []
    cur_lo = list(box.lo)
    cur_hi = list(box.hi)
    slab_lo = [False] * box.dim
    slab_hi = [False] * box.dim
    for k in range(box.dim):
        if cur_lo[k] < sub_lo[k]:
            hi2 = cur_hi.copy()
            hi2[k] = sub_lo[k]
            pieces.append(Box(tuple(cur_lo), tuple(hi2)))
            cur_lo[k] = sub_lo[k]
            slab_lo[k] = True
        if cur_hi[k] > sub_hi[k]:
            lo2 = cur_lo.copy()
            lo2[k] = sub_hi[k]
            pieces.append(Box(tuple(lo2), tuple(cur_hi)))
            cur_hi[k] = sub_hi[k]
            slab_hi[k] = True
    if open_mode:
        # Boundary faces not already covered by a side slab: these occur
        # exactly where the box's own face lies on the open cube's boundary.
        for k in range(box.dim):
            if not slab_lo[k] and cur_lo[k] == sub_lo[k]:
                hi2 = cur_hi.copy()
                hi2[k] = cur_lo[k]
                pieces.append(Box(tuple(cur_lo), tuple(hi2)))
            if not slab_hi[k] and cur_hi[k] == sub_hi[k]:
                lo2 = cur_lo.copy()
                lo2[k] = cur_hi[k]
                pieces.append(Box(tuple(lo2), tuple(cur_hi)))
    return pieces


def _dedupe_sorted(boxes: list[Box]) -> list[Box]:
    out: list[Box] = []
    for b in boxes:
        if not out or out[-1] != b:
            out.append(b)
    return out


def _drop_covered_degenerates(boxes: list[Box]) -> list[Box]:
    # Only degenerate boxes can be contained in another member of an
    # interior-disjoint family, so the scan is restricted to them.
    out: list[Box] = []
    for i, b in enumerate(boxes):
        if b.is_degenerate and any(
            j != i and other.contains_box(b) for j, other in enumerate(boxes)
        ):
            continue
        out.append(b)
    return out


def _merge_once(boxes: list[Box], dim: int) -> tuple[list[Box], bool]:
    changed = False
    for k in range(dim):
        groups: dict[tuple, list[Box]] = {}
        for b in boxes:
            key = (b.lo[:k], b.lo[k + 1:], b.hi[:k], b.hi[k + 1:])
            groups.setdefault(key, []).append(b)
        merged: list[Box] = []
        for group in groups.values():
            group.sort(key=lambda b: (b.lo[k], b.hi[k]))
            cur = group[0]
            for b in group[1:]:
                if b.lo[k] <= cur.hi[k]:
                    if b.hi[k] > cur.hi[k]:
                        hi2 = list(cur.hi)
                        hi2[k] = b.hi[k]
                        cur = Box(cur.lo, tuple(hi2))
                    changed = True
                else:
                    merged.append(cur)
                    cur = b
            merged.append(cur)
        boxes = merged
    return boxes, changed


def _normalize(boxes: Iterable[Box], dim: int) -> tuple[Box, ...]:
    """Canonical form: facet-merged, covered degenerates dropped, sorted."""
    work = sorted(boxes, key=Box._key)
    work = _dedupe_sorted(work)
    for _ in range(64):  # each pass strictly shrinks the list or stops
        work, changed = _merge_once(work, dim)
        work.sort(key=Box._key)
        work = _dedupe_sorted(work)
        cleaned = _drop_covered_degenerates(work)
        if len(cleaned) != len(work):
            changed = True
        work = cleaned
        if not changed:
            break
    return tuple(work)


@dataclass(frozen=True)
class Region:
    """A finite union of closed boxes with pairwise disjoint interiors."""

    dim: int
    boxes: tuple[Box, ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        for b in self.boxes:
            if b.dim != self.dim:
                raise ValueError("box dimension mismatch")

    @staticmethod
    def empty(dim: int) -> "Region":
        return Region(dim, ())

    @staticmethod
    def cube(center: Sequence[Fraction], rad: int | str | Fraction) -> "Region":
        rad = Fraction(rad)
        if rad < 0:
            raise ValueError("cube radius must be nonnegative")
        lo, hi = cube_bounds(center, rad)
        return Region(len(lo), (Box(lo, hi),))

    @staticmethod
    def from_disjoint_boxes(dim: int, boxes: Iterable[Box]) -> "Region":
        """Build from boxes already known to be interior-disjoint."""
        return Region(dim, _normalize(boxes, dim))

    @staticmethod
    def from_union(
        dim: int,
        boxes: Iterable[Box],
        box_limit: int = DEFAULT_BOX_LIMIT,
    ) -> "Region":
        """Build from an arbitrary (possibly overlapping) collection of boxes."""
        return Region(dim, _normalize(_disjointify(boxes, box_limit), dim))

    @property
    def is_empty(self) -> bool:
        return not self.boxes

    def contains(self, p: Sequence[Fraction]) -> bool:
        return any(b.contains(p) for b in self.boxes)

    def box_count(self) -> int:
        return len(self.boxes)


def _disjointify(boxes: Iterable[Box], box_limit: int) -> list[Box]:
    result: list[Box] = []
    for new in sorted(boxes, key=Box._key):
        pieces = [new]
        for existing in result:
            if existing.is_degenerate:
                continue  # cannot shadow interior volume; cleanup handles it
            nxt: list[Box] = []
            for p in pieces:
                nxt.extend(_subtract_box(p, existing.lo, existing.hi, open_mode=False))
            pieces = nxt
            if not pieces:
                break
        result.extend(pieces)
        if len(result) > box_limit:
            raise ResourceLimitError(
                f"box count {len(result)} exceeds limit {box_limit}"
            )
    return result


def measure(region: Region) -> Fraction:
    """Exact Lebesgue measure: the sum of box volumes (boxes are disjoint)."""
    total = Fraction(0)
    for b in region.boxes:
        total += b.volume
    return total


def minkowski_expand(
    region: Region,
    r: int | str | Fraction,
    box_limit: int = DEFAULT_BOX_LIMIT,
) -> Region:
    """Minkowski sum with the closed cube of radius r about the origin."""
    r = Fraction(r)
    if r < 0:
        raise ValueError("expansion radius must be nonnegative")
    if r == 0 or region.is_empty:
        return region
    expanded = [b.expand(r) for b in region.boxes]
    return Region(region.dim, _normalize(_disjointify(expanded, box_limit), region.dim))


def subtract_cube(
    region: Region,
    center: Sequence[Fraction],
    rad: int | str | Fraction,
    open_cube: bool = True,
    box_limit: int = DEFAULT_BOX_LIMIT,
) -> Region:
    """Remove the open (default) or closed cube of radius rad about center."""
    rad = Fraction(rad)
    if rad <= 0:
        raise ValueError("subtracted cube must have positive radius")
    if len(center) != region.dim:
        raise ValueError("center dimension mismatch")
    sub_lo, sub_hi = cube_bounds(center, rad)
    pieces: list[Box] = []
    for b in region.boxes:
        pieces.extend(_subtract_box(b, sub_lo, sub_hi, open_mode=open_cube))
        if len(pieces) > box_limit:
            raise ResourceLimitError(
                f"box count {len(pieces)} exceeds limit {box_limit}"
            )
    return Region(region.dim, _normalize(pieces, region.dim))


def intersect_cube(
    region: Region,
    center: Sequence[Fraction],
    rad: int | str | Fraction,
) -> Region:
    """Exact intersection with the closed cube of radius rad about center."""
    rad = Fraction(rad)
    if rad < 0:
        raise ValueError("cube radius must be nonnegative")
    lo, hi = cube_bounds(center, rad)
    cube = Box(lo, hi)
    pieces = [p for b in region.boxes if (p := b.intersect(cube)) is not None]
    return Region(region.dim, _normalize(pieces, region.dim))


def pick_point(region: Region) -> Point | None:
    """Center of the largest-volume box; ties go to the lexicographically
    smallest lo corner.  None iff the region is empty."""
    if region.is_empty:
        return None
    best = region.boxes[0]  # boxes are kept sorted by (lo, hi)
    best_vol = best.volume
    for b in region.boxes[1:]:
        v = b.volume
        if v > best_vol:
            best, best_vol = b, v
    return best.center


def validate_region(region: Region) -> None:
    """Check the pairwise interior-disjointness invariant (used by tests)."""
    boxes = region.boxes
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            a, b = boxes[i], boxes[j]
            if all(
                max(al, bl) < min(ah, bh)
                for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi)
            ):
                raise AssertionError(f"boxes {i} and {j} have overlapping interiors")


def region_to_lines(region: Region) -> list[str]:
    """Line-delimited text form; rationals appear as num/den strings."""
    lines = [f"region dim={region.dim} boxes={len(region.boxes)}"]
    for b in region.boxes:
        coords = [str(c) for c in b.lo] + [str(c) for c in b.hi]
        lines.append(" ".join(coords))
    return lines


def region_from_lines(lines: Sequence[str]) -> Region:
    header = lines[0].split()
    if not header or header[0] != "region":
        raise ValueError("not a region record")
    fields = dict(part.split("=", 1) for part in header[1:])
    dim = int(fields["dim"])
    count = int(fields["boxes"])
    boxes = []
    for raw in lines[1:1 + count]:
        vals = [Fraction(tok) for tok in raw.split()]
        if len(vals) != 2 * dim:
            raise ValueError(f"box record needs {2 * dim} rationals")
        boxes.append(Box(tuple(vals[:dim]), tuple(vals[dim:])))
    return Region(dim, tuple(boxes))
