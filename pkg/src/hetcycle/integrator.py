"""Event-aware integration of the suspended flow and the numerical return map.

The integrator is an embedded Runge-Kutta 5(4) pair (Dormand-Prince) with
adaptive steps, dense output for event refinement, and root-polished event
times. Section crossings are detected on the smooth level functions
u[axis] - epsilon and then filtered by crossing direction, by the box window
(the other chart coordinate and z - sigma within epsilon), and by a
transversality threshold, so only genuine wall passages of the intended
cube survive.

The numerical return map starts on In(v-), integrates until the orbit
returns there, and checks that the crossings arrive in the cyclic order
Out(v-) -> In(v+) -> Out(v+) -> In(v-); anything else is a sequence
violation (the orbit strayed into another branch of the network).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, MaxTimeExceeded, SequenceViolation, StepFailure
from .model import Forcing, Params, eval_field, sine_forcing
from .sections import SectionId, SectionPoint, from_ambient, to_ambient, validate_section_point

__all__ = [
    "IntegratorConfig",
    "EventSpec",
    "EventHit",
    "Trajectory",
    "NumericalReturn",
    "default_max_time",
    "section_events",
    "integrate",
    "numerical_return_map",
]

_NEAR_CONNECTION_FLOOR = 1e-8
_START_SKIP = 1e-9


def default_max_time(p: Params) -> float:
    """Time budget scaled to the slowest admissible return: fifty transits
    at the near-connection floor, -ln(1e-8)/(alpha+beta) each."""
    return 50.0 * (-math.log(_NEAR_CONNECTION_FLOOR)) / (p.alpha + p.beta)


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and budgets for the adaptive integrator.

    event_tol is the accepted residual of the level function at a refined
    event time (the root polish lands far below it); transversality_tol
    drops tangential grazes; chunk_time bounds the span of one solver call
    so long waits for an event do not buffer the whole budget.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_time: float | None = None
    event_tol: float = 1e-10
    transversality_tol: float = 1e-6
    chunk_time: float = 25.0

    def resolved_max_time(self, p: Params) -> float:
        return default_max_time(p) if self.max_time is None else self.max_time


@dataclass(frozen=True)
class EventSpec:
    """A wall-crossing detector: level surface u[axis] = value, crossing
    sign, and the cube window (|chart coordinate| < eps, |z - sigma| < eps)
    a genuine hit must satisfy."""

    axis: int
    value: float
    sigma: int
    direction: int
    window: float
    section: SectionId | None = None

    @classmethod
    def for_section(cls, sec: SectionId, p: Params) -> "EventSpec":
        return cls(
            axis=sec.wall_axis,
            value=p.epsilon,
            sigma=sec.sigma,
            direction=sec.crossing_direction,
            window=p.epsilon,
            section=sec,
        )

    def make_event(self):
        def g(t, u, _axis=self.axis, _value=self.value):
            return u[_axis] - _value

        g.direction = float(self.direction)
        g.terminal = False
        return g

    def accepts(self, u: np.ndarray) -> bool:
        chart_axis = 1 - self.axis
        return bool(abs(u[chart_axis]) < self.window and abs(u[2] - self.sigma) < self.window)


@dataclass(frozen=True)
class EventHit:
    index: int
    section: SectionId | None
    t: float
    state: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution plus the filtered event hits, in time order."""

    t: np.ndarray
    states: np.ndarray  # shape (n, 4)
    hits: tuple[EventHit, ...] = field(default_factory=tuple)
    stopped_by: EventHit | None = None
    reached_max_time: bool = False

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class NumericalReturn:
    """One numerically integrated return to In(v-); phase wrapped, elapsed
    time unwrapped, with the intermediate wall crossings kept for audit."""

    point: SectionPoint
    return_time: float
    hits: tuple[EventHit, ...]


def section_events(p: Params) -> list[EventSpec]:
    """The four standard wall detectors, in cycle order from In(v-)."""
    order = [SectionId.OUT_VMINUS, SectionId.IN_VPLUS, SectionId.OUT_VPLUS, SectionId.IN_VMINUS]
    return [EventSpec.for_section(sec, p) for sec in order]


def integrate(
    u0,
    p: Params,
    f: Forcing | None = None,
    *,
    t_end: float | None = None,
    events: list[EventSpec] | tuple[EventSpec, ...] = (),
    cfg: IntegratorConfig | None = None,
    stop_on: int | None = None,
) -> Trajectory:
    """Integrate the suspended flow from u0 = (x, y, z, s).

    Runs in chunks of cfg.chunk_time, collecting filtered event hits. With
    stop_on = i the trajectory is truncated at the first accepted hit of
    events[i] (MaxTimeExceeded if none arrives before the time budget);
    otherwise the full span [0, t_end] is returned.
    """
    cfg = cfg or IntegratorConfig()
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (4,):
        raise DomainError(f"expected a suspended 4-vector start state, got shape {u0.shape}")
    if stop_on is not None and not (0 <= stop_on < len(events)):
        raise DomainError(f"stop_on = {stop_on} does not index the {len(events)} events")
    horizon = cfg.resolved_max_time(p) if t_end is None else t_end

    def rhs(t, u):
        return eval_field(u, p, f)

    event_funcs = [spec.make_event() for spec in events]
    ts: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    hits: list[EventHit] = []
    t_cursor, state = 0.0, u0
    stopped: EventHit | None = None

    while t_cursor < horizon and stopped is None:
        chunk_end = min(t_cursor + cfg.chunk_time, horizon)
        sol = solve_ivp(
            rhs,
            (t_cursor, chunk_end),
            state,
            method="RK45",
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
            events=event_funcs or None,
            dense_output=bool(event_funcs),
        )
        if sol.status == -1:
            raise StepFailure(f"integration failed at t = {sol.t[-1]:.6g}: {sol.message}")

        chunk_hits: list[EventHit] = []
        for i, spec in enumerate(events):
            for te, ue in zip(sol.t_events[i], sol.y_events[i]):
                if te <= _START_SKIP:
                    continue  # the start state may sit exactly on a wall
                if not spec.accepts(ue):
                    continue
                speed = eval_field(ue, p, f)[spec.axis]
                if abs(speed) <= cfg.transversality_tol:
                    continue  # tangential graze, not a passage
                chunk_hits.append(EventHit(i, spec.section, float(te), np.array(ue)))
        chunk_hits.sort(key=lambda h: h.t)

        if stop_on is not None:
            for h in chunk_hits:
                if h.index == stop_on:
                    stopped = h
                    break
        if stopped is not None:
            chunk_hits = [h for h in chunk_hits if h.t <= stopped.t]
            keep = sol.t <= stopped.t
            ts.append(sol.t[keep])
            ys.append(sol.y[:, keep])
            ts.append(np.array([stopped.t]))
            ys.append(stopped.state.reshape(4, 1))
        else:
            ts.append(sol.t)
            ys.append(sol.y)
        hits.extend(chunk_hits)
        state = sol.y[:, -1]
        t_cursor = chunk_end

    t_all = np.concatenate(ts)
    y_all = np.concatenate(ys, axis=1).T
    # chunk seams duplicate their junction point
    keep = np.ones(t_all.size, dtype=bool)
    keep[1:] = np.diff(t_all) > 0
    traj = Trajectory(
        t=t_all[keep],
        states=y_all[keep],
        hits=tuple(hits),
        stopped_by=stopped,
        reached_max_time=stopped is None,
    )
    if stop_on is not None and stopped is None:
        raise MaxTimeExceeded(
            f"no accepted hit of event {stop_on} within t = {horizon:g}"
        )
    return traj


_CYCLE_ORDER = (
    SectionId.OUT_VMINUS,
    SectionId.IN_VPLUS,
    SectionId.OUT_VPLUS,
    SectionId.IN_VMINUS,
)


def numerical_return_map(
    pt: SectionPoint,
    p: Params,
    f: Forcing | None = None,
    cfg: IntegratorConfig | None = None,
) -> NumericalReturn:
    """First return to In(v-) by direct integration of the full flow.

    Rejects starts within 1e-8 (of the wall half-width) of the stable
    manifold immediately: their transit time exceeds any budget, and at
    x2 = 0 the orbit never returns at all.
    """
    if pt.section is not SectionId.IN_VMINUS:
        raise DomainError(f"expected a point on in_vminus, got {pt.section.value}")
    f = f or sine_forcing()
    validate_section_point(pt, p)
    if pt.on_stable_manifold or pt.c1 / p.epsilon < _NEAR_CONNECTION_FLOOR:
        raise MaxTimeExceeded(
            f"x2 = {pt.c1:g} is within {_NEAR_CONNECTION_FLOOR:g} of the stable manifold; "
            "the predicted flight time exceeds any budget (never returns at x2 = 0)"
        )
    cfg = cfg or IntegratorConfig()
    events = section_events(p)
    u0 = to_ambient(pt, p)
    traj = integrate(u0, p, f, events=events, cfg=cfg, stop_on=3)

    observed = [h.section for h in traj.hits]
    expected = [_CYCLE_ORDER[i % 4] for i in range(len(observed))]
    if observed != expected or len(observed) % 4 != 0:
        raise SequenceViolation(
            "wall crossings out of cyclic order: "
            + " -> ".join(sec.value for sec in observed)
        )

    hit = traj.stopped_by
    assert hit is not None
    arrived = from_ambient(hit.state, SectionId.IN_VMINUS, p, f)
    return NumericalReturn(
        point=arrived,
        return_time=float(hit.t),
        hits=traj.hits,
    )
