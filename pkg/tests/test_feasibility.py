import random
from fractions import Fraction

import pytest

from lipcontrol.errors import DegenerateInputError
from lipcontrol.feasibility import (
    ControlPair,
    RadialPLFunction,
    check_claim21,
    compute_params,
    evader_trace,
    evasion_margins,
    feasible_control_check,
    pairs_from_lines,
    pairs_to_lines,
    plfn_from_lines,
    plfn_to_lines,
    reconstruct_evader,
    start_point,
    trace_to_lines,
)
from lipcontrol.geometry import Box, max_norm, minkowski_expand

F = Fraction


def pairs_1d(*xy):
    return [ControlPair(i, (F(x),), (F(y),)) for i, (x, y) in enumerate(xy)]


class TestComputeParams:
    def test_increasing_radii(self):
        p = compute_params(pairs_1d((1, 0), (2, 0), (3, 0)), d=1)
        assert p.alpha == 1
        assert p.beta == 2  # dyadic rounding is exact here

    def test_repeated_radius(self):
        p = compute_params(pairs_1d((1, 0), (1, 0), (1, 0)), d=1)
        assert p.alpha == 3
        assert p.beta == 6

    def test_perfect_square(self):
        p = compute_params([ControlPair(0, (F(2),), (F(0), F(0)))], d=2)
        assert p.alpha == F(1, 4)
        assert p.beta == 1

    def test_beta_is_tight_dyadic_upper_bound(self):
        # alpha = 2, d = 2: beta must be the least q/2^40 >= 2*sqrt(2)
        pairs = pairs_1d((1, 0), (1, 0))
        p = compute_params(
            [ControlPair(i, q.x, (F(0), F(0))) for i, q in enumerate(pairs)], d=2
        )
        assert p.beta ** 2 >= 8
        assert (p.beta - F(1, 2 ** 40)) ** 2 < 8

    def test_all_zero_radii_rejected(self):
        with pytest.raises(DegenerateInputError):
            compute_params(pairs_1d((0, 5)), d=1)

    def test_k0_counts_zero_entries(self):
        p = compute_params(pairs_1d((0, 5), (0, -1), (2, 0)), d=1)
        assert p.k0 == 2


class TestStartPoint:
    def test_no_zero_pairs(self):
        assert start_point([], 2) == (F(0), F(0))

    def test_dim1(self):
        zp = pairs_1d((0, 0), (0, 3))
        assert start_point(zp, 1) == (F(5),)

    def test_dim2(self):
        zp = [ControlPair(0, (F(0),), (F(0), F(0)))]
        assert start_point(zp, 2) == (F(2), F(0))

    def test_margin_exceeds_one(self):
        zp = pairs_1d((0, -7), (0, 2), (0, 3))
        y = start_point(zp, 1)
        for p in zp:
            assert max_norm(tuple(a - b for a, b in zip(y, p.y))) > 1


class TestEvaderTrace:
    def test_three_pair_worked_instance(self):
        pairs = pairs_1d((1, 0), (2, 0), (3, 0))
        trace = evader_trace(pairs, d=1)
        assert trace.params.beta == 2
        assert trace.measures == (F(0), F(2), F(6), F(10))
        # D_1 = [-2,-1] u [1,2]
        assert trace.regions[1].boxes == (
            Box((F(-2),), (F(-1),)),
            Box((F(1),), (F(2),)),
        )

    def test_single_pair_formula(self):
        pairs = [ControlPair(0, (F(5),), (F(0),))]
        trace = evader_trace(pairs, d=1)
        beta = trace.params.beta
        assert trace.measures[1] == 10 * beta - 2

    def test_no_pairs(self):
        trace = evader_trace([], d=2)
        assert trace.measures == (F(0),)
        assert trace.regions[0].contains((F(0), F(0)))

    def test_monotone_containment(self):
        rng = random.Random(43)
        pairs = _random_increasing_pairs(rng, d=2, count=12)
        trace = evader_trace(pairs, d=2)
        beta = trace.params.beta
        for k in range(len(trace.regions) - 1):
            dt = trace.radii[k + 1] - trace.radii[k]
            grown = minkowski_expand(trace.regions[k], beta * dt)
            for b in trace.regions[k + 1].boxes:
                assert all(grown.contains(c) for c in (b.lo, b.hi, b.center))


def _random_increasing_pairs(rng, d, count, max_step=3):
    pairs = []
    t = F(0)
    for i in range(count):
        t += F(rng.randint(1, 4 * max_step), 4)
        y = tuple(
            F(rng.randint(-4 * int(2 * t + 2), 4 * int(2 * t + 2)), 4)
            for _ in range(d)
        )
        pairs.append(ControlPair(i, (t,), y))
    return pairs


class TestClaim21:
    def test_step_zero_bound_is_zero(self):
        trace = evader_trace(pairs_1d((1, 0)), d=1)
        report = check_claim21(trace)
        assert report.rows[0].bound == 0
        assert report.rows[0].margin == 0

    def test_three_pair_margins(self):
        trace = evader_trace(pairs_1d((1, 0), (2, 0), (3, 0)), d=1)
        report = check_claim21(trace)
        assert report.ok
        # bound at i=1 is 2^2*1*1 - 2*1 = 2: tight
        assert report.rows[1].bound == 2
        assert report.rows[1].margin == 0

    @pytest.mark.parametrize("d", [1, 2])
    def test_random_sequences_nonnegative_margins(self, d):
        rng = random.Random(100 + d)
        for _ in range(5):
            pairs = _random_increasing_pairs(rng, d=d, count=20 if d == 1 else 10)
            report = check_claim21(evader_trace(pairs, d=d))
            assert report.ok, f"violation at step {report.first_failure}"


class TestReconstructEvader:
    def test_three_pair_instance(self):
        pairs = pairs_1d((1, 0), (2, 0), (3, 0))
        trace = evader_trace(pairs, d=1)
        fn = reconstruct_evader(trace)
        assert fn.max_slope() <= trace.params.beta
        for margin in evasion_margins(fn, pairs):
            assert margin >= 1

    def test_no_pairs_constant_at_start(self):
        trace = evader_trace([], d=2)
        fn = reconstruct_evader(trace)
        assert fn.eval(F(7)) == trace.start

    def test_zero_pairs_respected_through_lift(self):
        pairs = pairs_1d((0, 0), (1, 2), (2, -1))
        trace = evader_trace(pairs, d=1)
        fn = reconstruct_evader(trace)
        # the start value must dodge the radius-zero pair as well
        assert abs(fn.eval(F(0))[0] - 0) > 1

    @pytest.mark.parametrize("d", [1, 2])
    def test_random_instances_valid(self, d):
        rng = random.Random(200 + d)
        for _ in range(5):
            pairs = _random_increasing_pairs(rng, d=d, count=15 if d == 1 else 8)
            trace = evader_trace(pairs, d=d)
            fn = reconstruct_evader(trace)
            assert fn.max_slope() <= trace.params.beta
            for margin in evasion_margins(fn, pairs):
                assert margin >= 1

    def test_equal_radii_collapse_consistently(self):
        pairs = pairs_1d((1, 0), (1, 3), (2, 1))
        trace = evader_trace(pairs, d=1)
        fn = reconstruct_evader(trace)
        for margin in evasion_margins(fn, pairs):
            assert margin >= 1


class TestFeasibleControlCheck:
    def test_no_pairs_gives_constant_zero_witness(self):
        verdict = feasible_control_check([], j=1, d=1, n=1)
        assert not verdict.controlled
        assert verdict.witness.eval(F(0)) == (F(0),)

    def test_hand_worked_block_is_controlled(self):
        # pairs from the j=1, n=1, d=1 tiling: (0,1/3), (1/2,-1/2), (1,-4/3)
        pairs = pairs_1d((0, F(1, 3)), (F(1, 2), F(-1, 2)), (1, F(-4, 3)))
        verdict = feasible_control_check(pairs, j=1, d=1, n=1)
        assert verdict.controlled
        assert verdict.empty_step == 3

    def test_deleting_a_pair_yields_witness(self):
        pairs = pairs_1d((0, F(1, 3)), (F(1, 2), F(-1, 2)), (1, F(-4, 3)))
        for skip in range(3):
            subset = [p for i, p in enumerate(pairs) if i != skip]
            verdict = feasible_control_check(subset, j=1, d=1, n=1)
            assert not verdict.controlled
            fn = verdict.witness
            assert fn.max_slope() <= 1
            assert max_norm(fn.eval(F(0))) <= 1
            for margin in evasion_margins(fn, subset):
                assert margin >= 1

    def test_pair_outside_horizon_rejected(self):
        with pytest.raises(ValueError):
            feasible_control_check(pairs_1d((2, 0)), j=1, d=1, n=1)

    def test_boundary_value_survives_open_subtraction(self):
        # a value at distance exactly 1 from y is a legal evader value
        pairs = pairs_1d((0, 0))
        verdict = feasible_control_check(pairs, j=1, d=1, n=0)
        assert not verdict.controlled
        assert abs(verdict.witness.eval(F(0))[0]) == 1


class TestBruteForceDuality:
    """The exact oracle agrees with exhaustive search over quarter-step
    value sequences on small instances."""

    @staticmethod
    def brute_force_has_evader(pairs, j, n):
        xs = sorted({F(0)} | {p.x[0] for p in pairs})
        by_x = {}
        for p in pairs:
            by_x.setdefault(p.x[0], []).append(p.y[0])
        lo, hi = -j - j * n - 2, j + j * n + 2
        grid = [F(k, 4) for k in range(int(4 * lo), int(4 * hi) + 1)]

        def extend(k, prev_val):
            if k == len(xs):
                return True
            x = xs[k]
            for v in grid:
                if k == 0:
                    if abs(v) > j:
                        continue
                else:
                    if abs(v - prev_val) > j * (x - xs[k - 1]):
                        continue
                if any(abs(v - y) < 1 for y in by_x.get(x, ())):
                    continue
                if extend(k + 1, v):
                    return True
            return False

        return extend(0, None)

    def test_duality_on_seeded_instances(self):
        rng = random.Random(77)
        agree = 0
        for _ in range(40):
            n = rng.randint(1, 2)
            j = 1
            count = rng.randint(1, 4)
            pairs = []
            for i in range(count):
                x = F(rng.randint(0, 4 * n), 4)
                y = F(rng.randint(-4 * (j * n + j + 1), 4 * (j * n + j + 1)), 4)
                pairs.append(ControlPair(i, (x,), (y,)))
            verdict = feasible_control_check(pairs, j=j, d=1, n=n)
            brute = self.brute_force_has_evader(pairs, j, n)
            assert verdict.controlled == (not brute)
            agree += 1
        assert agree == 40


class TestSerialization:
    def test_pairs_round_trip(self):
        pairs = pairs_1d((0, F(1, 3)), (F(1, 2), F(-1, 2)))
        back, m, d = pairs_from_lines(pairs_to_lines(pairs, 1, 1))
        assert back == pairs
        assert (m, d) == (1, 1)

    def test_plfn_round_trip(self):
        fn = RadialPLFunction(
            (F(0), F(1)), ((F(1, 3), F(0)), (F(-2), F(5, 7))), F(3)
        )
        back = plfn_from_lines(plfn_to_lines(fn))
        assert back == fn

    def test_trace_lines_schema(self):
        trace = evader_trace(pairs_1d((1, 0), (2, 0)), d=1)
        lines = trace_to_lines(trace)
        assert lines[0] == "# schema=evader-trace-v1"
        assert lines[1] == "i,t,boxes,measure,bound,margin"
        assert len(lines) == 2 + 3
