"""Analytic local and global transition maps on the unit chart.

Everything here lives on the epsilon-rescaled chart: coordinates in (0, 1),
nu and mu already divided by epsilon (see sections.rescale_params);
p.epsilon plays no role in this module. Inside each box the flow is modeled
by its linearization at the saddle, with the forcing kept in the x equation:

    at v-:  x' = (alpha+beta) x + (nu f(2 omega t) + mu),  y' = (beta-alpha) y,
    at v+:  x' = (beta-alpha) x + (nu f(2 omega t) + mu),  y' = (alpha+beta) y,

and w' = -2 w for the distance w = z - sigma from the pole. The variation
of constants integral along each transit is the forcing integral

    K_box(c1, s) = integral_s^T exp(-c (tau - s)) (nu f(2 omega tau) + mu) dtau,

with c = beta - alpha, T = T1 for the v+ box and c = alpha + beta, T = T2(0,0)
for the v- box. Both split as K = nu*H_nu + mu*H_mu; H_nu has closed form for
f = sin and decays like 1/(2 omega), which drives every high-frequency limit
in the package. Flight times through the boxes are taken to first order in
(nu, mu): T1 is exact (the v+ transit ends when the unforced y reaches 1) and
T2 = T2(0,0) + K2/(alpha+beta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import (
    DomainError,
    IntermediateEscape,
    NonPositiveExit,
    QuadratureFailure,
    UnsupportedForcing,
)
from .model import Forcing, Params, wrap_phase
from .sections import SectionId, SectionPoint

__all__ = [
    "KIntegral",
    "ForcingIntegrals",
    "FlightTimes",
    "AnalyticReturn",
    "sine_kernel",
    "mu_kernel",
    "K1_closed_form",
    "K2_closed_form",
    "K_quadrature",
    "flight_time_T1",
    "flight_times",
    "local_map_vplus",
    "local_map_vminus",
    "global_map_plus_to_minus",
    "global_map_minus_to_plus",
    "compose_return",
    "reduced_h",
    "h2_scalar",
    "h3_coefficients",
    "contraction_coefficient",
    "linear_exit_time_vminus",
]

_QUAD_KW = dict(epsabs=1e-13, epsrel=1e-13, limit=500)


@dataclass(frozen=True)
class KIntegral:
    """One box's forcing integral K = nu*h_nu + mu*h_mu."""

    value: float
    h_nu: float
    h_mu: float


@dataclass(frozen=True)
class ForcingIntegrals:
    """Both boxes' forcing integrals for one return, with their (nu, mu)
    decomposition K_i = nu*H_i_nu + mu*H_i_mu."""

    K1: float
    K2: float
    H1_nu: float
    H1_mu: float
    H2_nu: float
    H2_mu: float

    @classmethod
    def from_slices(cls, k1: KIntegral, k2: KIntegral) -> "ForcingIntegrals":
        return cls(k1.value, k2.value, k1.h_nu, k1.h_mu, k2.h_nu, k2.h_mu)


@dataclass(frozen=True)
class FlightTimes:
    """Transit durations for one return starting on In(v-).

    T2_zero_minus_s is the unforced v- transit -ln(x2)/(alpha+beta);
    T2_minus_s adds the first-order forcing correction K2/(alpha+beta);
    T1_minus_s is the (exact, forcing-free) v+ transit that follows.
    """

    T1_minus_s: float
    T2_minus_s: float
    T2_zero_minus_s: float


@dataclass(frozen=True)
class AnalyticReturn:
    """Result of one full analytic return In(v-) -> In(v-).

    point carries the phase wrapped to [0, T_f); return_time is the
    unwrapped elapsed time (the h1 component minus the starting phase).
    """

    point: SectionPoint
    return_time: float
    k1: KIntegral
    k2: KIntegral
    period_t: float

    @property
    def integrals(self) -> ForcingIntegrals:
        return ForcingIntegrals.from_slices(self.k1, self.k2)


def sine_kernel(c: float, s: float, t: float, omega: float) -> float:
    """integral_s^t exp(-c (tau - s)) sin(2 omega tau) dtau in closed form.

    Antiderivative of e^{-c u} sin(2 w (u+s)) is
    e^{-c u} (-c sin(2 w (u+s)) - 2 w cos(2 w (u+s))) / (c^2 + 4 w^2).
    """
    den = c * c + 4.0 * omega * omega
    top = math.exp(-c * (t - s)) * (-c * math.sin(2 * omega * t) - 2 * omega * math.cos(2 * omega * t))
    bot = -c * math.sin(2 * omega * s) - 2 * omega * math.cos(2 * omega * s)
    return (top - bot) / den


def mu_kernel(c: float, s: float, t: float) -> float:
    """integral_s^t exp(-c (tau - s)) dtau = (1 - exp(-c (t - s)))/c."""
    return (1.0 - math.exp(-c * (t - s))) / c


def _require_chart(c1: float, c2: float, what: str) -> None:
    if not (0.0 < c1 < 1.0):
        raise DomainError(f"{what}: need c1 in (0, 1), got {c1:g}")
    if not (abs(c2) < 1.0):
        raise DomainError(f"{what}: need |c2| < 1, got {c2:g}")


def _box_constants(which: str, p: Params) -> float:
    # decay rate c of the variation-of-constants weight in each box
    if which == "vplus":
        return p.beta - p.alpha
    if which == "vminus":
        return p.alpha + p.beta
    raise DomainError(f"which must be 'vplus' or 'vminus', got {which!r}")


def K1_closed_form(y1: float, s: float, p: Params, f: Forcing) -> KIntegral:
    """Forcing integral over the v+ transit, f = sin only.

    Weight c = beta - alpha; upper limit T1 = s - ln(y1)/(alpha+beta), so
    exp(-c (T1 - s)) = y1^{-delta} and the mu part is
    (y1^{-delta} - 1)/(alpha - beta).
    """
    if f.kind != "sine":
        raise UnsupportedForcing(f"closed form requires f = sin, got kind={f.kind!r}")
    if not (0.0 < y1 < 1.0):
        raise DomainError(f"need y1 in (0, 1), got {y1:g}")
    c = p.beta - p.alpha
    T1 = s - math.log(y1) / (p.alpha + p.beta)
    h_nu = sine_kernel(c, s, T1, p.omega)
    h_mu = (y1 ** (-p.delta) - 1.0) / (p.alpha - p.beta)
    return KIntegral(p.nu * h_nu + p.mu * h_mu, h_nu, h_mu)


def K2_closed_form(x2: float, s: float, p: Params, f: Forcing) -> KIntegral:
    """Forcing integral over the v- transit, f = sin only.

    Weight c = alpha + beta; upper limit T2(0,0) = s - ln(x2)/(alpha+beta),
    so exp(-c (T2(0,0) - s)) = x2 and the mu part is (1 - x2)/(alpha+beta).
    """
    if f.kind != "sine":
        raise UnsupportedForcing(f"closed form requires f = sin, got kind={f.kind!r}")
    if not (0.0 < x2 < 1.0):
        raise DomainError(f"need x2 in (0, 1), got {x2:g}")
    c = p.alpha + p.beta
    T2z = s - math.log(x2) / c
    h_nu = sine_kernel(c, s, T2z, p.omega)
    h_mu = (1.0 - x2) / c
    return KIntegral(p.nu * h_nu + p.mu * h_mu, h_nu, h_mu)


def K_quadrature(which: str, c1: float, s: float, p: Params, f: Forcing) -> float:
    """Same defining integral as the closed forms, by adaptive quadrature.

    Independent verification route: for f = sin the oscillatory nu part uses
    a sine-weighted rule, otherwise the full integrand is integrated
    directly. Works for any forcing.
    """
    if not (0.0 < c1 < 1.0):
        raise DomainError(f"need chart coordinate in (0, 1), got {c1:g}")
    c = _box_constants(which, p)
    T = s - math.log(c1) / (p.alpha + p.beta)

    def _check(val_err):
        val, err = val_err
        if err > max(1e-10, 1e-8 * abs(val)):
            raise QuadratureFailure(f"quadrature error {err:g} too large for K ({which})")
        return val

    if f.kind == "sine":
        nu_part = _check(
            quad(lambda tau: math.exp(-c * (tau - s)), s, T, weight="sin", wvar=2.0 * p.omega, **_QUAD_KW)
        )
    else:
        nu_part = _check(
            quad(lambda tau: math.exp(-c * (tau - s)) * float(f(2.0 * p.omega * tau)), s, T, **_QUAD_KW)
        )
    mu_part = _check(quad(lambda tau: math.exp(-c * (tau - s)), s, T, **_QUAD_KW))
    return p.nu * nu_part + p.mu * mu_part


def _K1(y1: float, s: float, p: Params, f: Forcing) -> KIntegral:
    # closed form when available, quadrature nu part otherwise
    if f.kind == "sine":
        return K1_closed_form(y1, s, p, f)
    c = p.beta - p.alpha
    T1 = s - math.log(y1) / (p.alpha + p.beta)
    h_nu, err = quad(lambda tau: math.exp(-c * (tau - s)) * float(f(2.0 * p.omega * tau)), s, T1, **_QUAD_KW)
    if err > max(1e-10, 1e-8 * abs(h_nu)):
        raise QuadratureFailure(f"quadrature error {err:g} too large for K1")
    h_mu = (y1 ** (-p.delta) - 1.0) / (p.alpha - p.beta)
    return KIntegral(p.nu * h_nu + p.mu * h_mu, h_nu, h_mu)


def _K2(x2: float, s: float, p: Params, f: Forcing) -> KIntegral:
    if f.kind == "sine":
        return K2_closed_form(x2, s, p, f)
    c = p.alpha + p.beta
    T2z = s - math.log(x2) / c
    h_nu, err = quad(lambda tau: math.exp(-c * (tau - s)) * float(f(2.0 * p.omega * tau)), s, T2z, **_QUAD_KW)
    if err > max(1e-10, 1e-8 * abs(h_nu)):
        raise QuadratureFailure(f"quadrature error {err:g} too large for K2")
    h_mu = (1.0 - x2) / c
    return KIntegral(p.nu * h_nu + p.mu * h_mu, h_nu, h_mu)


def flight_time_T1(y1: float, s: float, p: Params) -> float:
    """Exit time of the v+ box entered at phase s with chart coordinate y1.

    Exact for the linear model: the expanding coordinate is unforced, so
    T1 = s - ln(y1)/(alpha+beta) regardless of (nu, mu, omega).
    """
    if not (0.0 < y1 < 1.0):
        raise DomainError(f"need y1 in (0, 1), got {y1:g}")
    return s - math.log(y1) / (p.alpha + p.beta)


def flight_times(pt: SectionPoint, p: Params, f: Forcing) -> FlightTimes:
    """Transit durations of the return starting at pt on In(v-)."""
    _expect_section(pt, SectionId.IN_VMINUS)
    _require_chart(pt.c1, pt.c2, "flight_times")
    d = p.alpha + p.beta
    t2z = -math.log(pt.c1) / d
    k2 = _K2(pt.c1, pt.s, p, f)
    t2 = t2z + k2.value / d
    y1 = pt.c1 ** p.delta * math.exp(-p.delta * k2.value)
    t1 = -math.log(y1) / d
    return FlightTimes(T1_minus_s=t1, T2_minus_s=t2, T2_zero_minus_s=t2z)


def _expect_section(pt: SectionPoint, sec: SectionId) -> None:
    if pt.section is not sec:
        raise DomainError(f"expected a point on {sec.value}, got {pt.section.value}")
    if pt.on_stable_manifold or pt.c1 <= 0.0:
        raise DomainError("point lies on the local stable manifold; the transit never ends")


def _vplus_transit(pt: SectionPoint, p: Params, f: Forcing) -> tuple[SectionPoint, KIntegral]:
    _expect_section(pt, SectionId.IN_VPLUS)
    _require_chart(pt.c1, pt.c2, "local_map_vplus")
    k1 = _K1(pt.c1, pt.s, p, f)
    if 1.0 - k1.value <= 0.0:
        raise NonPositiveExit(
            f"K1 = {k1.value:g} >= 1: forcing pushes the orbit across the stable manifold"
        )
    t1 = flight_time_T1(pt.c1, pt.s, p)
    x1h = pt.c1 ** p.delta * (1.0 - k1.value)
    w1h = (pt.c2 + 1.0) * pt.c1 ** (2.0 / (p.alpha + p.beta)) - 1.0
    if x1h >= 1.0:
        raise IntermediateEscape(f"v+ exit coordinate {x1h:g} >= 1 leaves the chart")
    return SectionPoint(SectionId.OUT_VPLUS, x1h, w1h, t1), k1


def _vminus_transit(pt: SectionPoint, p: Params, f: Forcing) -> tuple[SectionPoint, KIntegral]:
    _expect_section(pt, SectionId.IN_VMINUS)
    _require_chart(pt.c1, pt.c2, "local_map_vminus")
    d = p.alpha + p.beta
    k2 = _K2(pt.c1, pt.s, p, f)
    t2 = pt.s - math.log(pt.c1) / d + k2.value / d
    y2h = pt.c1 ** p.delta * math.exp(-p.delta * k2.value)
    w2h = 1.0 + (pt.c2 - 1.0) * pt.c1 ** (2.0 / d) * math.exp(-2.0 * k2.value / d)
    if y2h >= 1.0 or abs(w2h) >= 1.0:
        raise IntermediateEscape(
            f"v- exit point ({y2h:g}, {w2h:g}) leaves the chart (strong forcing or x2 near 1)"
        )
    return SectionPoint(SectionId.OUT_VMINUS, y2h, w2h, t2), k2


def local_map_vplus(pt: SectionPoint, p: Params, f: Forcing) -> SectionPoint:
    """Transit map through the v+ box, In(v+) -> Out(v+).

    (s, y1, w1) -> (T1, y1^delta (1 - K1), (w1 + 1) y1^{2/(alpha+beta)} - 1)
    with T1 = s - ln(y1)/(alpha+beta). The returned phase is unwrapped
    (reduce mod the forcing period when a circle representative is needed).
    """
    return _vplus_transit(pt, p, f)[0]


def local_map_vminus(pt: SectionPoint, p: Params, f: Forcing) -> SectionPoint:
    """Transit map through the v- box, In(v-) -> Out(v-).

    (s, x2, w2) -> (T2, x2^delta e^{-delta K2},
                    1 + (w2 - 1) x2^{2/(alpha+beta)} e^{-2 K2/(alpha+beta)})
    with T2 = s - ln(x2)/(alpha+beta) + K2/(alpha+beta), first order in
    (nu, mu). Phase returned unwrapped.
    """
    return _vminus_transit(pt, p, f)[0]


def global_map_minus_to_plus(pt: SectionPoint, p: Params) -> SectionPoint:
    """Modeled transition along the former v- -> v+ connection: identity in
    chart coordinates (the connection survives on the invariant plane y = 0
    only in the averaged sense; deviations are absorbed into the model)."""
    _expect_section(pt, SectionId.OUT_VMINUS)
    return SectionPoint(SectionId.IN_VPLUS, pt.c1, pt.c2, pt.s)


def global_map_plus_to_minus(pt: SectionPoint, p: Params) -> SectionPoint:
    """Modeled transition along the former v+ -> v- connection: affine
    offset x -> x + a mu carrying the mean forcing's push off the plane."""
    _expect_section(pt, SectionId.OUT_VPLUS)
    x2 = pt.c1 + p.a * p.mu
    if x2 >= 1.0:
        raise IntermediateEscape(f"global offset lands at x2 = {x2:g} >= 1")
    return SectionPoint(SectionId.IN_VMINUS, x2, pt.c2, pt.s)


def compose_return(pt: SectionPoint, p: Params, f: Forcing) -> AnalyticReturn:
    """Full analytic first return In(v-) -> In(v-).

    Composition local v- transit, then the two modeled global legs and the
    v+ transit. Raises NonPositiveExit / IntermediateEscape when a partial
    image leaves the charts.
    """
    _expect_section(pt, SectionId.IN_VMINUS)
    out_minus, k2 = _vminus_transit(pt, p, f)
    in_plus = global_map_minus_to_plus(out_minus, p)
    out_plus, k1 = _vplus_transit(in_plus, p, f)
    back = global_map_plus_to_minus(out_plus, p)
    period_t = f.period_in_t(p.omega)
    wrapped = back.with_(s=wrap_phase(back.s, period_t))
    return AnalyticReturn(
        point=wrapped,
        return_time=back.s - pt.s,
        k1=k1,
        k2=k2,
        period_t=period_t,
    )


def reduced_h(s: float, x2: float, w2: float, p: Params) -> tuple[float, float, float]:
    """Return map of the averaged system (nu = 0) in closed form.

    With K2 = mu (1 - x2)/(alpha+beta) and delta the saddle value:

        h1 = s - (1+delta) ln(x2)/(alpha+beta) + (1+delta) K2/(alpha+beta)
        h2 = x2^{delta^2} e^{-delta^2 K2} (1 + mu/(alpha-beta))
             - mu/(alpha-beta) + a mu
        h3 = [2 + (w2-1) x2^{2/(alpha+beta)} e^{-2K2/(alpha+beta)}]
             * [x2^delta e^{-delta K2}]^{2/(alpha+beta)} - 1

    h1 is unwrapped; h2, h3 do not depend on s. Agrees with compose_return
    at nu = 0 to rounding.
    """
    if not (0.0 < x2 < 1.0):
        raise DomainError(f"need x2 in (0, 1), got {x2:g}")
    if not (abs(w2) < 1.0):
        raise DomainError(f"need |w2| < 1, got {w2:g}")
    d = p.alpha + p.beta
    dl = p.delta
    k2 = p.mu * (1.0 - x2) / d
    h1 = s - (1.0 + dl) * math.log(x2) / d + (1.0 + dl) * k2 / d
    core = x2 ** (dl * dl) * math.exp(-dl * dl * k2)
    h2 = core * (1.0 + p.mu / (p.alpha - p.beta)) - p.mu / (p.alpha - p.beta) + p.a * p.mu
    inner = 2.0 + (w2 - 1.0) * x2 ** (2.0 / d) * math.exp(-2.0 * k2 / d)
    h3 = inner * (x2 ** dl * math.exp(-dl * k2)) ** (2.0 / d) - 1.0
    return h1, h2, h3


def h2_scalar(x2: float, p: Params) -> float:
    """The x component of the averaged return map (h2 above) as a scalar
    function, for fixed-point work. Defined on [0, 1]: the closed form
    extends continuously to the endpoints."""
    if not (0.0 <= x2 <= 1.0):
        raise DomainError(f"need x2 in [0, 1], got {x2:g}")
    d = p.alpha + p.beta
    dl = p.delta
    k2 = p.mu * (1.0 - x2) / d
    core = x2 ** (dl * dl) * math.exp(-dl * dl * k2) if x2 > 0.0 else 0.0
    return core * (1.0 + p.mu / (p.alpha - p.beta)) - p.mu / (p.alpha - p.beta) + p.a * p.mu


def h3_coefficients(x2: float, p: Params) -> tuple[float, float]:
    """h3 is affine in w2: h3 = C1 + C2 w2. Returns (C1, C2).

    C2 = x2^{(2+2 delta)/(alpha+beta)} e^{-2 K2 (1+delta)/(alpha+beta)} is
    the contraction factor of the w fibre over one return; C2(0+) = 0 and
    C1(0+) = -1, so the fibre collapses onto w* = -1 as mu -> 0.
    """
    if not (0.0 < x2 < 1.0):
        raise DomainError(f"need x2 in (0, 1), got {x2:g}")
    d = p.alpha + p.beta
    dl = p.delta
    k2 = p.mu * (1.0 - x2) / d
    A = x2 ** (2.0 / d) * math.exp(-2.0 * k2 / d)
    B = (x2 ** dl * math.exp(-dl * k2)) ** (2.0 / d)
    return (2.0 - A) * B - 1.0, A * B


def contraction_coefficient(x2: float, p: Params) -> float:
    """C2(x2), the w-fibre contraction factor of the averaged return."""
    return h3_coefficients(x2, p)[1]


def linear_exit_time_vminus(x2: float, s: float, p: Params, f: Forcing) -> float:
    """Exact exit time of the forced linear v- model, by root finding.

    Solves x(T) = 1 for x(t) = e^{(alpha+beta)(t-s)} (x2 - J(t)),
    J(t) = integral_s^t e^{-(alpha+beta)(tau-s)} (nu f(2 omega tau) + mu) dtau.
    The first-order formula T2(0,0) + K2/(alpha+beta) approximates this root;
    their difference is the flight-time remainder.
    """
    if not (0.0 < x2 < 1.0):
        raise DomainError(f"need x2 in (0, 1), got {x2:g}")
    d = p.alpha + p.beta

    if f.kind == "sine":
        def J(t: float) -> float:
            return p.nu * sine_kernel(d, s, t, p.omega) + p.mu * mu_kernel(d, s, t)
    else:
        def J(t: float) -> float:
            val, err = quad(
                lambda tau: math.exp(-d * (tau - s)) * (p.nu * float(f(2.0 * p.omega * tau)) + p.mu),
                s, t, **_QUAD_KW,
            )
            if err > max(1e-10, 1e-8 * abs(val)):
                raise QuadratureFailure(f"quadrature error {err:g} too large in exit-time search")
            return val

    def phi(t: float) -> float:
        return math.exp(d * (t - s)) * (x2 - J(t)) - 1.0

    t2z = s - math.log(x2) / d
    hi = s + 3.0 * (t2z - s) + 10.0
    grid = np.linspace(s, hi, 2048)
    jg = np.array([J(t) for t in grid])
    vals = np.exp(d * (grid - s)) * (x2 - jg) - 1.0
    idx = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    drained = np.nonzero(x2 - jg <= 0.0)[0]
    if idx.size == 0 or (drained.size > 0 and drained[0] <= idx[0]):
        # forcing drains the expanding coordinate before it can exit
        raise NonPositiveExit("forcing pushes the linear orbit across the stable manifold")
    lo, up = grid[idx[0]], grid[idx[0] + 1]
    return float(brentq(phi, lo, up, xtol=1e-14, rtol=8.9e-16))
