"""Fixed points, periods, scaling fits, and analytic-versus-numeric audits.

The quantitative experiments of the package live here: locating the
attracting fixed point of the averaged x return map h2, the period of the
associated periodic orbit and its logarithmic growth as mu -> 0, the
high-frequency collapse of the forced return map onto the averaged one,
and side-by-side comparison of the analytic maps with direct integration.
All fits are ordinary least squares on (log-transformed) deterministic
data, reported with r^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    GridEmpty,
    InsufficientData,
    NoPositiveFixedPoint,
    NonConvergence,
)
from .integrator import IntegratorConfig, integrate, numerical_return_map, EventSpec
from .maps import compose_return, h2_scalar, h3_coefficients, reduced_h
from .model import Forcing, Params, circle_distance, sine_forcing
from .sections import (
    SectionId,
    SectionPoint,
    rescale_epsilon,
    rescale_epsilon_inverse,
    rescale_params,
)

__all__ = [
    "FitResult",
    "FixedPointResult",
    "PeriodScan",
    "GridSpec",
    "ConvergenceReport",
    "ComparisonRow",
    "MapComparison",
    "CalibrationResult",
    "linear_fit",
    "find_fixed_point_h2",
    "fixed_point_w",
    "periodic_orbit_period",
    "period_scan",
    "convergence_study",
    "analytic_vs_numeric",
    "calibrate_a",
]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    n: int


def linear_fit(x, y) -> FitResult:
    """Ordinary least squares y = slope*x + intercept with r^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2 or np.unique(x).size < 2:
        raise InsufficientData(f"need >= 2 distinct abscissae, got {np.unique(x).size}")
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), r2, int(x.size))


@dataclass(frozen=True)
class FixedPointResult:
    x: float
    derivative: float
    residual: float
    iterations: int
    method: str


def find_fixed_point_h2(p: Params, tol: float = 1e-15, max_iter: int = 100) -> FixedPointResult:
    """Attracting fixed point of the averaged x return map h2 near 0.

    Exists exactly when h2(0) = mu (a - 1/(alpha-beta)) > 0; it is of order
    mu and its multiplier h2' is < 1 (the map contracts onto it). At mu = 0
    the fixed point is 0 itself with derivative 0 (the saddle value squared
    exceeds 1). Newton from the seed h2(0), with a damped fixed-point
    fallback; derivative estimated by central differences.
    """
    if p.mu == 0.0:
        return FixedPointResult(0.0, 0.0, 0.0, 0, "exact-zero")
    g0 = h2_scalar(0.0, p)
    if g0 <= 0.0:
        raise NoPositiveFixedPoint(
            f"h2(0) = mu (a - 1/(alpha-beta)) = {g0:g} <= 0: the perturbed map "
            "has no order-mu fixed point (a too small)"
        )

    def F(x: float) -> float:
        return h2_scalar(x, p) - x

    def dh2(x: float) -> float:
        h = max(1e-9, 1e-6 * x)
        lo, hi = max(0.0, x - h), min(1.0, x + h)
        return (h2_scalar(hi, p) - h2_scalar(lo, p)) / (hi - lo)

    x = g0
    for it in range(1, max_iter + 1):
        fx = F(x)
        if abs(fx) < tol:
            return FixedPointResult(x, dh2(x), abs(fx), it, "newton")
        d = dh2(x) - 1.0
        if d == 0.0:
            break
        step = fx / d
        x_new = x - step
        if not (0.0 < x_new <= 0.5):
            break
        if abs(step) < 1e-17 * max(1.0, x):
            return FixedPointResult(x_new, dh2(x_new), abs(F(x_new)), it, "newton")
        x = x_new
    # damped fixed-point iteration; h2 contracts near the target
    x = g0
    for it in range(1, 100 * max_iter + 1):
        fx = F(x)
        if abs(fx) < tol:
            return FixedPointResult(x, dh2(x), abs(fx), it, "iteration")
        x = min(max(x + 0.7 * fx, 0.0), 0.5)
    raise NonConvergence(f"fixed-point search stalled at x = {x:g}, residual {F(x):g}")


def fixed_point_w(p: Params, x_star: float | None = None) -> float:
    """w* = C1/(1 - C2) at the fixed point: the affine w map's limit.

    As mu -> 0, C2 -> 0 and C1 -> -1, so w* -> -1 (the orbit hugs the
    sphere)."""
    if x_star is None:
        x_star = find_fixed_point_h2(p).x
    if x_star == 0.0:
        return -1.0
    c1, c2 = h3_coefficients(x_star, p)
    return c1 / (1.0 - c2)


def periodic_orbit_period(p: Params) -> float:
    """Return time of the averaged map's periodic orbit, h1(s, x*, w*) - s.

    Independent of the starting phase s; grows like
    (1+delta)/(alpha+beta) * ln(1/mu) as mu -> 0, and is +inf at mu = 0
    (the orbit collapses onto the network).
    """
    x_star = find_fixed_point_h2(p).x
    if x_star == 0.0:
        return math.inf
    h1, _, _ = reduced_h(0.0, x_star, 0.0, p)
    return h1


@dataclass(frozen=True)
class PeriodScan:
    mus: tuple[float, ...]
    x_stars: tuple[float, ...]
    periods: tuple[float, ...]
    fit: FitResult  # period against ln(1/mu)


def period_scan(p: Params, mus) -> PeriodScan:
    """Periods and fixed points over a mu sweep, with the P ~ ln(1/mu) fit."""
    mus = tuple(float(m) for m in mus)
    if any(m <= 0.0 for m in mus):
        raise DomainError("period scan needs mu > 0 everywhere (P is infinite at mu = 0)")
    xs, ps = [], []
    for m in mus:
        pm = p.with_(mu=m)
        xs.append(find_fixed_point_h2(pm).x)
        ps.append(periodic_orbit_period(pm))
    fit = linear_fit(np.log(1.0 / np.array(mus)), np.array(ps))
    return PeriodScan(mus, tuple(xs), tuple(ps), fit)


@dataclass(frozen=True)
class GridSpec:
    """Sample grid on the In(v-) chart, phases given as fractions of the
    forcing period so the grid adapts to omega."""

    phase_fractions: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75)
    x2_values: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7)
    w2_values: tuple[float, ...] = (-0.5, 0.0, 0.5)

    def points(self, period_t: float) -> list[SectionPoint]:
        pts = [
            SectionPoint(SectionId.IN_VMINUS, x2, w2, frac * period_t)
            for frac in self.phase_fractions
            for x2 in self.x2_values
            for w2 in self.w2_values
        ]
        if not pts:
            raise GridEmpty("empty sample grid")
        return pts


@dataclass(frozen=True)
class ConvergenceReport:
    omegas: tuple[float, ...]
    sup_distances: tuple[float, ...]
    fit: FitResult | None  # log sup-distance against log omega
    grid_size: int


def _return_distance(a, b, period_t: float) -> float:
    """max norm of (phase on its circle, x, w) differences between two
    analytic returns started from the same point."""
    return max(
        circle_distance(a.point.s, b.point.s, period_t),
        abs(a.point.c1 - b.point.c1),
        abs(a.point.c2 - b.point.c2),
    )


def convergence_study(
    p: Params,
    f: Forcing,
    omegas,
    grid: GridSpec | None = None,
) -> ConvergenceReport:
    """Sup-grid distance between the forced and the averaged return maps,
    per omega, with the log-log decay fit.

    The forcing integrals' oscillatory parts decay like 1/(2 omega), so the
    sup distance should fit a slope near -1. With nu = 0 every distance is
    exactly 0 and no fit is attempted.
    """
    grid = grid or GridSpec()
    omegas = tuple(float(w) for w in omegas)
    if not omegas:
        raise GridEmpty("no omega values")
    p_avg = p.with_(nu=0.0)
    sups = []
    grid_n = 0
    for w in omegas:
        pw = p.with_(omega=w)
        pw_avg = p_avg.with_(omega=w)
        period_t = f.period_in_t(w)
        pts = grid.points(period_t)
        grid_n = len(pts)
        dist = 0.0
        for pt in pts:
            ra = compose_return(pt, pw, f)
            rb = compose_return(pt, pw_avg, f)
            dist = max(dist, _return_distance(ra, rb, period_t))
        sups.append(dist)
    fit = None
    if p.nu > 0.0 and len(omegas) >= 2:
        fit = linear_fit(np.log(omegas), np.log(np.maximum(sups, 1e-300)))
    return ConvergenceReport(omegas, tuple(sups), fit, grid_n)


@dataclass(frozen=True)
class ComparisonRow:
    """One In(v-) start, both routes, and their discrepancies (physical
    chart units; relative values use the numerical route as reference)."""

    start: SectionPoint
    x_numeric: float
    x_analytic: float
    w_numeric: float
    w_analytic: float
    time_numeric: float
    time_analytic: float
    abs_dx: float
    rel_dx: float
    abs_dw: float
    abs_dt: float


@dataclass(frozen=True)
class MapComparison:
    rows: tuple[ComparisonRow, ...]
    max_rel_dx: float
    max_abs_dt: float


def analytic_vs_numeric(
    p: Params,
    f: Forcing,
    pts,
    cfg: IntegratorConfig | None = None,
) -> MapComparison:
    """Run the return map both ways (direct integration vs analytic
    composition on the rescaled chart) from each physical In(v-) point."""
    pts = list(pts)
    if not pts:
        raise GridEmpty("no comparison points")
    cfg = cfg or IntegratorConfig()
    p_unit = rescale_params(p)
    rows = []
    for pt in pts:
        num = numerical_return_map(pt, p, f, cfg)
        ana = compose_return(rescale_epsilon(pt, p), p_unit, f)
        ana_pt = rescale_epsilon_inverse(ana.point, p)
        x_n, x_a = num.point.c1, ana_pt.c1
        w_n, w_a = num.point.c2, ana_pt.c2
        rows.append(
            ComparisonRow(
                start=pt,
                x_numeric=x_n,
                x_analytic=x_a,
                w_numeric=w_n,
                w_analytic=w_a,
                time_numeric=num.return_time,
                time_analytic=ana.return_time,
                abs_dx=abs(x_a - x_n),
                rel_dx=abs(x_a - x_n) / abs(x_n) if x_n != 0.0 else math.inf,
                abs_dw=abs(w_a - w_n),
                abs_dt=abs(ana.return_time - num.return_time),
            )
        )
    return MapComparison(
        rows=tuple(rows),
        max_rel_dx=max(r.rel_dx for r in rows),
        max_abs_dt=max(r.abs_dt for r in rows),
    )


@dataclass(frozen=True)
class CalibrationResult:
    a: float
    intercept: float
    r2: float
    mus: tuple[float, ...]
    offsets: tuple[float, ...]


def calibrate_a(
    p: Params,
    f: Forcing | None = None,
    cfg: IntegratorConfig | None = None,
    mus=(1e-4, 1e-3, 1e-2),
    x1h_values=(1e-8, 1e-7, 1e-6),
) -> CalibrationResult:
    """Effective affine offset of the v+ -> v- transition, fitted from the
    integrated flow.

    Starts just off the connecting orbit on Out(v+) (tiny x, on the sphere)
    and regresses the arrival x2 - x1h on In(v-) against mu. The fitted
    slope is the offset coefficient the modeled global map calls a; the
    intercept absorbs the multiplicative distortion of the tiny start.
    nu is forced to 0: the oscillatory part plays no role in the mean
    offset. Needs at least two distinct mu values (mu = 0 alone gives
    degenerate, all-zero offsets).
    """
    f = f or sine_forcing()
    cfg = cfg or IntegratorConfig()
    mus = tuple(float(m) for m in mus)
    if len(mus) < 2 or len(set(mus)) < 2:
        raise InsufficientData("need >= 2 distinct mu values to fit the offset")
    eps = p.epsilon
    # the arrival offset scales like a*mu and can land outside the chart
    # square, so accept the whole v- half of the wall (the z window only
    # has to tell the two saddles apart)
    sec = SectionId.IN_VMINUS
    stop_spec = EventSpec(
        axis=sec.wall_axis,
        value=eps,
        sigma=sec.sigma,
        direction=sec.crossing_direction,
        window=0.5,
        section=sec,
    )
    mu_col, offsets = [], []
    for m in mus:
        pm = p.with_(mu=m, nu=0.0)
        for x1h in x1h_values:
            z0 = math.sqrt(max(1.0 - eps * eps - x1h * x1h, 0.0))
            u0 = np.array([x1h, eps, z0, 0.0])
            traj = integrate(u0, pm, f, events=[stop_spec], cfg=cfg, stop_on=0)
            arrived = traj.stopped_by
            assert arrived is not None
            mu_col.append(m)
            offsets.append(float(arrived.state[0]) - x1h)
    fit = linear_fit(np.array(mu_col), np.array(offsets))
    return CalibrationResult(fit.slope, fit.intercept, fit.r2, tuple(mu_col), tuple(offsets))
