import random
from fractions import Fraction

import pytest

from lipcontrol.errors import ResourceLimitError
from lipcontrol.geometry import (
    Box,
    Region,
    intersect_cube,
    max_norm,
    measure,
    minkowski_expand,
    pick_point,
    point,
    region_from_lines,
    region_to_lines,
    subtract_cube,
    validate_region,
)
from oracles import random_rational_point, random_region, raster_measure, union_measure_sweep

F = Fraction


def interval_region(*pairs):
    return Region(1, tuple(Box((F(a),), (F(b),)) for a, b in pairs))


class TestMinkowskiExpand:
    def test_zero_radius_is_identity(self):
        r = interval_region((-1, 1))
        assert minkowski_expand(r, 0) == r

    def test_single_interval(self):
        r = minkowski_expand(interval_region((-1, 1)), 1)
        assert r.boxes == (Box((F(-2),), (F(2),)),)

    def test_two_squares_touch_after_expansion(self):
        r = Region(
            2,
            (
                Box(point(0, 0), point(1, 1)),
                Box(point(3, 0), point(4, 1)),
            ),
        )
        out = minkowski_expand(r, 1)
        assert measure(out) == 18
        validate_region(out)
        # rasterize on a 1/4-step grid: every covered cell is accounted for
        assert raster_measure(out, F(1, 4), point(-2, -2), point(6, 3)) == 18

    def test_expansion_measure_never_shrinks(self):
        rng = random.Random(7)
        for _ in range(20):
            region, _ = random_region(rng, 2, 4)
            r = F(rng.randint(0, 8), 4)
            out = minkowski_expand(region, r)
            assert measure(out) >= measure(region)
            validate_region(out)

    def test_expansion_membership_oracle(self):
        # p is in the expansion iff some original box is within max-dist r
        rng = random.Random(11)
        for _ in range(10):
            region, _ = random_region(rng, 2, 3)
            r = F(rng.randint(1, 6), 4)
            out = minkowski_expand(region, r)
            for _ in range(100):
                p = random_rational_point(rng, 2 * [-10], 2 * [10])
                dist_ok = any(
                    all(lo - r <= c <= hi + r for lo, c, hi in zip(b.lo, p, b.hi))
                    for b in region.boxes
                )
                assert out.contains(p) == dist_ok


class TestSubtractCube:
    def test_open_interval_subtraction(self):
        r = subtract_cube(interval_region((-2, 2)), point(0), 1)
        assert r.boxes == (Box((F(-2),), (F(-1),)), Box((F(1),), (F(2),)))
        assert measure(r) == 2

    def test_disjoint_subtrahend_is_noop(self):
        r = interval_region((0, 1))
        assert subtract_cube(r, point(5), 1) == r

    def test_square_minus_center_cube(self):
        r = Region(2, (Box(point(0, 0), point(4, 4)),))
        out = subtract_cube(r, point(2, 2), 1)
        assert measure(out) == 12
        assert measure(out) == union_measure_sweep(out.boxes, 2)
        validate_region(out)

    def test_open_subtraction_keeps_boundary(self):
        r = interval_region((1, 3))
        out = subtract_cube(r, point(2), 1)  # open cube is exactly (1, 3)
        assert out.contains(point(1)) and out.contains(point(3))
        assert not out.contains(point(2))
        assert measure(out) == 0

    def test_closed_subtraction_drops_boundary_remnants(self):
        r = interval_region((1, 3))
        out = subtract_cube(r, point(2), 1, open_cube=False)
        assert out.is_empty

    def test_measure_lower_bound(self):
        rng = random.Random(13)
        for _ in range(20):
            region, _ = random_region(rng, 2, 4)
            c = random_rational_point(rng, 2 * [-8], 2 * [8], denom=4)
            rad = F(rng.randint(1, 8), 4)
            out = subtract_cube(region, c, rad)
            assert measure(out) >= measure(region) - (2 * rad) ** 2
            validate_region(out)

    def test_idempotent(self):
        rng = random.Random(17)
        for _ in range(20):
            region, _ = random_region(rng, 2, 4)
            c = random_rational_point(rng, 2 * [-8], 2 * [8], denom=4)
            once = subtract_cube(region, c, 1)
            twice = subtract_cube(once, c, 1)
            assert once == twice

    def test_membership_oracle(self):
        # exact difference: p survives iff p was in R and p is not in the open cube
        rng = random.Random(19)
        for _ in range(10):
            region, _ = random_region(rng, 2, 4)
            c = random_rational_point(rng, 2 * [-8], 2 * [8], denom=4)
            rad = F(rng.randint(1, 8), 4)
            out = subtract_cube(region, c, rad)
            for _ in range(100):
                p = random_rational_point(rng, 2 * [-10], 2 * [10])
                in_open = all(cc - rad < pc < cc + rad for cc, pc in zip(c, p))
                assert out.contains(p) == (region.contains(p) and not in_open)

    def test_dim3_membership_oracle(self):
        rng = random.Random(23)
        region, _ = random_region(rng, 3, 3, span=4)
        c = random_rational_point(rng, 3 * [-4], 3 * [4], denom=4)
        out = subtract_cube(region, c, 1)
        validate_region(out)
        for _ in range(200):
            p = random_rational_point(rng, 3 * [-5], 3 * [5])
            in_open = all(cc - 1 < pc < cc + 1 for cc, pc in zip(c, p))
            assert out.contains(p) == (region.contains(p) and not in_open)


class TestMeasure:
    def test_empty(self):
        assert measure(Region.empty(2)) == 0

    def test_two_intervals(self):
        assert measure(interval_region((-2, -1), (1, 2))) == 2

    def test_unit_cube_measure_is_2_to_d(self):
        for d in (1, 2, 3):
            r = Region.cube(tuple(F(0) for _ in range(d)), 1)
            assert measure(r) == 2 ** d

    def test_sweep_oracle_agreement(self):
        rng = random.Random(29)
        for dim in (1, 2, 3):
            for _ in range(8):
                region, raw = random_region(rng, dim, 5 if dim < 3 else 3, span=5)
                assert measure(region) == union_measure_sweep(raw, dim)
                validate_region(region)


class TestPickPoint:
    def test_tie_broken_lexicographically(self):
        r = interval_region((-2, -1), (1, 2))
        assert pick_point(r) == (F(-3, 2),)

    def test_empty_region(self):
        assert pick_point(Region.empty(1)) is None

    def test_degenerate_point_box(self):
        r = Region(1, (Box((F(0),), (F(0),)),))
        assert pick_point(r) == (F(0),)

    def test_picked_point_is_member(self):
        rng = random.Random(31)
        for _ in range(20):
            region, _ = random_region(rng, 2, 4)
            p = pick_point(region)
            if p is None:
                assert region.is_empty
            else:
                assert region.contains(p)


class TestIntersectCube:
    def test_two_intervals(self):
        r = interval_region((-2, -1), (1, 2))
        out = intersect_cube(r, point(0), F(3, 2))
        assert out.boxes == (
            Box((F(-3, 2),), (F(-1),)),
            Box((F(1),), (F(3, 2),)),
        )

    def test_zero_radius_gives_point_or_empty(self):
        r = interval_region((-2, -1), (1, 2))
        hit = intersect_cube(r, point(1), 0)
        assert hit.boxes == (Box((F(1),), (F(1),)),)
        miss = intersect_cube(r, point(0), 0)
        assert miss.is_empty

    def test_degenerate_corner(self):
        r = Region(2, (Box(point(0, 0), point(4, 4)),))
        out = intersect_cube(r, point(5, 5), 1)
        assert out.boxes == (Box(point(4, 4), point(4, 4)),)


class TestInvariants:
    def test_random_operation_sequences_stay_disjoint(self):
        rng = random.Random(37)
        for trial in range(10):
            region, _ = random_region(rng, 2, 3)
            for _ in range(6):
                op = rng.choice(["expand", "subtract", "intersect"])
                if op == "expand":
                    region = minkowski_expand(region, F(rng.randint(0, 4), 4))
                elif op == "subtract":
                    c = random_rational_point(rng, 2 * [-8], 2 * [8], denom=4)
                    region = subtract_cube(region, c, F(rng.randint(1, 6), 4))
                else:
                    c = random_rational_point(rng, 2 * [-8], 2 * [8], denom=4)
                    region = intersect_cube(region, c, F(rng.randint(0, 10), 4))
                validate_region(region)
                assert measure(region) == union_measure_sweep(region.boxes, 2)

    def test_box_count_guard(self):
        region = Region(1, tuple(Box((F(3 * i),), (F(3 * i + 1),)) for i in range(20)))
        with pytest.raises(ResourceLimitError):
            subtract_cube(region, point(30), F(1, 2), box_limit=10)


class TestSerialization:
    def test_round_trip_exact(self):
        rng = random.Random(41)
        region, _ = random_region(rng, 2, 5)
        lines = region_to_lines(region)
        back = region_from_lines(lines)
        assert back == region

    def test_rationals_as_num_den(self):
        r = Region(1, (Box((F(-1, 3),), (F(2, 7),)),))
        lines = region_to_lines(r)
        assert lines[1] == "-1/3 2/7"


def test_max_norm():
    assert max_norm(point(-3, 2)) == 3
    assert max_norm(()) == 0
