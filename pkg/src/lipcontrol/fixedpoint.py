"""Approximate boundary-crossing search for continuously moving sets.

Given a continuous family f(z, t) on D x [t0, t1] that starts strictly inside
the radius-l ball B and ends outside it, together with a section map
g: B -> D, some point of D must cross the sphere |y| = l at a time where the
section map returns it to itself.  The witness is an approximate fixed point
of the retracted self-map

    hbar(y, t) = retract(f(g(y), t), t - |f(g(y), t)| + l)

on B x [t0, t1], found by a coarse grid scan over the displacement followed
by local subdivision around the best candidates.

This is the one module that works with tolerances: crossing points are
generally irrational, so it certifies approximate crossings only and says so
in its results.  The certificate re-evaluates both residuals directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

from .errors import CrossingNotFoundError, HypothesisViolationError


def retract(
    y: Sequence,
    t,
    l,
    t0,
    t1,
) -> tuple[tuple, object]:
    """Coordinate-wise retraction onto (radius-l ball) x [t0, t1].

    Exact on rational inputs, hence idempotent and the identity on the
    product whenever the inputs already lie in it.
    """
    norm = max((abs(c) for c in y), default=0)
    if norm > l:
        scale = l / norm
        y = tuple(c * scale for c in y)
    else:
        y = tuple(y)
    t = min(t1, max(t0, t))
    return y, t


@dataclass(frozen=True)
class MovingMap:
    """Evaluation contract for the crossing search.

    ``f(z, t)`` maps a point of D (a ball of radius d_radius in R^(m-1),
    the empty tuple when m = 1) and a time in [t0, t1] to R^d.  ``g`` is the
    section map from the radius-l ball back to D.
    """

    f: Callable[[tuple[float, ...], float], tuple[float, ...]]
    g: Callable[[Sequence[float]], tuple[float, ...]]
    m: int
    d: int
    l: float
    t0: float
    t1: float
    d_radius: float
    lipschitz: float = 1.0


@dataclass(frozen=True)
class Crossing:
    """An approximate crossing with its independently re-evaluated residuals."""

    z: tuple[float, ...]
    t: float
    value: tuple[float, ...]
    residual_sphere: float
    residual_section: float
    displacement: float


def _axis_samples(lo: float, hi: float, n: int) -> list[float]:
    if n <= 1:
        return [(lo + hi) / 2.0]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _check_hypotheses(mm: MovingMap, samples_per_axis: int = 9) -> None:
    axes = [
        _axis_samples(-mm.d_radius, mm.d_radius, samples_per_axis)
        for _ in range(mm.m - 1)
    ]
    for z in product(*axes) if axes else [()]:
        start = max(abs(c) for c in mm.f(tuple(z), mm.t0))
        if start >= mm.l:
            raise HypothesisViolationError(
                f"f(z, t0) must lie strictly inside the ball; |f| = {start} at z = {z}"
            )
        end = max(abs(c) for c in mm.f(tuple(z), mm.t1))
        if end <= mm.l:
            raise HypothesisViolationError(
                f"f(z, t1) must lie outside the ball; |f| = {end} at z = {z}"
            )


def find_crossing(
    mm: MovingMap,
    grid_step: float | None = None,
    tol: float | None = None,
    max_levels: int = 12,
    top_k: int = 6,
) -> Crossing:
    """Search for (z, t) with |f(z, t)| close to l and g(f(z, t)) close to z.

    The boundary hypotheses are checked on a coarse grid first; a violation
    raises.  The search scans the displacement of the retracted self-map on a
    grid over B x J, then repeatedly subdivides windows around the best
    candidates.  Every evaluation also tries the direct certificate, so the
    function returns as soon as both residuals drop to tol.
    """
    if tol is None:
        tol = 1e-6 * mm.l
    if grid_step is None:
        grid_step = (mm.t1 - mm.t0) / 64.0
    _check_hypotheses(mm)

    def evaluate(y: tuple[float, ...], t: float) -> tuple[float, Crossing]:
        z = mm.g(y)
        val = mm.f(z, t)
        norm = max(abs(c) for c in val)
        t_next = t - norm + mm.l
        y_ret, t_ret = retract(val, t_next, mm.l, mm.t0, mm.t1)
        disp = max(
            max(abs(a - b) for a, b in zip(y_ret, y)),
            abs(t_ret - t),
        )
        res_sphere = abs(norm - mm.l)
        res_section = max(
            (abs(a - b) for a, b in zip(mm.g(val), z)), default=0.0
        )
        return disp, Crossing(tuple(z), t, tuple(val), res_sphere, res_section, disp)

    def certified(c: Crossing) -> bool:
        return c.residual_sphere <= tol and c.residual_section <= tol and mm.t0 < c.t < mm.t1

    n_t = max(5, min(65, round((mm.t1 - mm.t0) / grid_step) + 1))
    n_y = max(5, min(17, round(2 * mm.l / grid_step) + 1))
    y_axes = [_axis_samples(-mm.l, mm.l, n_y) for _ in range(mm.d)]
    t_axis = _axis_samples(mm.t0, mm.t1, n_t)

    scored: list[tuple[float, tuple[float, ...], float]] = []
    best: Crossing | None = None
    for y in product(*y_axes):
        for t in t_axis:
            disp, cand = evaluate(y, t)
            if certified(cand):
                return cand
            if best is None or cand.displacement < best.displacement:
                best = cand
            scored.append((disp, y, t))
    scored.sort(key=lambda item: item[0])

    y_win = 2 * mm.l / max(1, n_y - 1)
    t_win = (mm.t1 - mm.t0) / max(1, n_t - 1)
    for _, y0, t0 in scored[:top_k]:
        wy, wt = y_win, t_win
        cy, ct = y0, t0
        for _ in range(max_levels):
            local_best = None
            for y in product(*(
                _axis_samples(max(-mm.l, c - wy), min(mm.l, c + wy), 7) for c in cy
            )):
                for t in _axis_samples(max(mm.t0, ct - wt), min(mm.t1, ct + wt), 7):
                    disp, cand = evaluate(y, t)
                    if certified(cand):
                        return cand
                    if best is None or cand.displacement < best.displacement:
                        best = cand
                    if local_best is None or disp < local_best[0]:
                        local_best = (disp, y, t)
            if local_best is None:
                break
            _, cy, ct = local_best
            wy /= 2.0
            wt /= 2.0
    raise CrossingNotFoundError(
        f"no crossing certified at tol {tol}; best displacement "
        f"{best.displacement if best else float('inf')}",
        best_displacement=best.displacement if best else None,
    )
