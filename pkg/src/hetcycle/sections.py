"""Cross-section walls of the cubic neighbourhoods V+ and V- and their charts.

Each saddle v_sigma = (0, 0, sigma) gets a cube of half-width epsilon. The
flow enters along the local stable axis and leaves along the unstable one,
so four walls matter:

    In(v+)  = {x = eps}, chart (y1, w1), w1 = z - 1   (arrive at v+)
    Out(v+) = {y = eps}, chart (x1h, w1h)             (leave v+)
    In(v-)  = {y = eps}, chart (x2, w2), w2 = z + 1   (arrive at v-)
    Out(v-) = {x = eps}, chart (y2h, w2h)             (leave v-)

Chart coordinates satisfy |c1| < eps, |c2| < eps; the cycle under study stays
in the branch c1 >= 0, with c1 = 0 the local stable manifold (the orbit then
limits onto the saddle and never leaves). Rescaling by eps maps each chart
onto the unit square, where the analytic transition maps live; nu and mu
scale along with the coordinates.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, InvariantViolation, NotOnSection
from .model import Params

__all__ = [
    "SectionId",
    "SectionPoint",
    "to_ambient",
    "from_ambient",
    "rescale_epsilon",
    "rescale_epsilon_inverse",
    "rescale_params",
    "validate_section_point",
]

_ON_SECTION_ATOL = 1e-9


class SectionId(enum.Enum):
    IN_VPLUS = "in_vplus"
    OUT_VPLUS = "out_vplus"
    IN_VMINUS = "in_vminus"
    OUT_VMINUS = "out_vminus"

    @property
    def wall_axis(self) -> int:
        """Ambient axis held at +epsilon on this wall (0 = x, 1 = y)."""
        return {"in_vplus": 0, "out_vplus": 1, "in_vminus": 1, "out_vminus": 0}[self.value]

    @property
    def chart_axis(self) -> int:
        """Ambient axis carrying the c1 chart coordinate."""
        return 1 - self.wall_axis

    @property
    def sigma(self) -> int:
        """Which saddle the wall belongs to (+1 or -1)."""
        return +1 if self.value.endswith("vplus") else -1

    @property
    def crossing_direction(self) -> int:
        """Sign of d(wall coordinate)/dt at a legitimate crossing:
        -1 entering the cube (In walls), +1 leaving it (Out walls)."""
        return -1 if self.value.startswith("in") else +1


@dataclass(frozen=True)
class SectionPoint:
    """Point on a section wall in chart coordinates plus forcing phase.

    c1 is the coordinate along the orbit's transverse progress (y1, x1h, x2,
    or y2h depending on the wall); c2 is the distance w from the sphere's
    pole, z - sigma. on_stable_manifold marks c1 = 0 arrivals, which are
    valid data but leave every forward map undefined.
    """

    section: SectionId
    c1: float
    c2: float
    s: float
    on_stable_manifold: bool = False

    def with_(self, **kw) -> "SectionPoint":
        return replace(self, **kw)


def validate_section_point(pt: SectionPoint, p: Params) -> None:
    """Check chart bounds |c1| < eps, |c2| < eps and the branch sign."""
    eps = p.epsilon
    if not (abs(pt.c1) < eps and abs(pt.c2) < eps):
        raise InvariantViolation(
            f"chart point ({pt.c1:g}, {pt.c2:g}) outside the open square of half-width {eps:g}"
        )
    if pt.c1 < 0.0:
        raise InvariantViolation(
            f"c1 = {pt.c1:g} < 0 leaves the branch containing the cycle ({pt.section.value})"
        )
    if not np.isfinite(pt.s):
        raise InvariantViolation(f"non-finite phase {pt.s}")


def to_ambient(pt: SectionPoint, p: Params) -> np.ndarray:
    """Embed a chart point into the suspended ambient space (x, y, z, s)."""
    validate_section_point(pt, p)
    u = np.empty(4)
    u[pt.section.wall_axis] = p.epsilon
    u[pt.section.chart_axis] = pt.c1
    u[2] = pt.section.sigma + pt.c2
    u[3] = pt.s
    return u


def from_ambient(u, section: SectionId, p: Params, f=None) -> SectionPoint:
    """Read chart coordinates off an ambient point lying on the given wall.

    The phase is normalized modulo the forcing period (pi/omega for the
    default sine forcing; pass f for another waveform), so the round trip
    with to_ambient is the identity on canonical phases s in [0, T_f).
    A point with c1 = 0 (to rounding) sits on the local stable manifold and
    is returned flagged rather than rejected; c1 < 0 is outside the branch
    and raises.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (4,):
        raise DomainError(f"expected a suspended 4-vector, got shape {u.shape}")
    if abs(u[section.wall_axis] - p.epsilon) > _ON_SECTION_ATOL:
        raise NotOnSection(
            f"{section.value} wall sits at {p.epsilon:g}, point has "
            f"{u[section.wall_axis]:.12g} there"
        )
    c1 = float(u[section.chart_axis])
    c2 = float(u[2] - section.sigma)
    on_ws = False
    if c1 < 0.0:
        if c1 < -1e-12:
            raise InvariantViolation(f"c1 = {c1:g} < 0 leaves the branch ({section.value})")
        c1 = 0.0
    if c1 <= 1e-14:
        c1, on_ws = 0.0, True
    period_t = (math.pi / p.omega) if f is None else f.period_in_t(p.omega)
    pt = SectionPoint(section, c1, c2, float(np.mod(u[3], period_t)), on_stable_manifold=on_ws)
    if not (abs(pt.c1) < p.epsilon and abs(pt.c2) < p.epsilon):
        raise InvariantViolation(
            f"chart point ({pt.c1:g}, {pt.c2:g}) outside the open square of half-width {p.epsilon:g}"
        )
    return pt


def rescale_epsilon(pt: SectionPoint, p: Params) -> SectionPoint:
    """Map chart coordinates to the unit square (divide by eps); phase kept."""
    return pt.with_(c1=pt.c1 / p.epsilon, c2=pt.c2 / p.epsilon)


def rescale_epsilon_inverse(pt: SectionPoint, p: Params) -> SectionPoint:
    """Undo rescale_epsilon (multiply chart coordinates by eps)."""
    return pt.with_(c1=pt.c1 * p.epsilon, c2=pt.c2 * p.epsilon)


def rescale_params(p: Params) -> Params:
    """Parameters as seen from the unit square: nu and mu scale like the
    coordinates (both enter the x equation additively), epsilon becomes 1."""
    return p.with_(nu=p.nu / p.epsilon, mu=p.mu / p.epsilon, epsilon=1.0)
