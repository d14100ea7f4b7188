"""Vector field, parameters, symmetries, and forcing for a periodically
driven heteroclinic network in R^3.

The autonomous part has two saddles v+ = (0,0,1), v- = (0,0,-1) on the
invariant unit sphere, joined by connecting orbits inside the invariant
planes {x=0} and {y=0}. A small time-periodic term acts on the x equation
only:

    dx/dt = x (1 - r^2) - alpha x z + beta x z^2 + (1 - x)(nu f(2 omega t) + mu)
    dy/dt = y (1 - r^2) + alpha y z + beta y z^2
    dz/dt = z (1 - r^2) - alpha (y^2 - x^2) - beta z (x^2 + y^2)

with r^2 = x^2 + y^2 + z^2, beta < 0 < alpha, |beta| < alpha, nu, mu >= 0,
omega > 0, and f smooth, non-constant, with zero mean. Time enters only
through the phase, so the suspended state (x, y, z, s) with ds/dt = 1 makes
the system autonomous on R^3 x S^1; the phase lives on a circle of
circumference equal to the minimal period of t -> f(2 omega t).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, QuadratureFailure

__all__ = [
    "Params",
    "State",
    "Forcing",
    "sine_forcing",
    "custom_forcing",
    "eval_field",
    "jacobian_at_equilibrium",
    "apply_symmetry",
    "lie_derivative_g",
    "saddle_value",
    "equilibrium",
    "wrap_phase",
    "circle_distance",
]


@dataclass(frozen=True)
class Params:
    """Model parameters.

    alpha, beta control the saddle eigenvalues (beta < 0 < alpha, |beta| <
    alpha, so alpha + beta > 0); nu, mu >= 0 scale the oscillating and the
    constant part of the forcing; omega > 0 is the (half) forcing frequency;
    a > 0 is the affine offset coefficient of the modeled global transition;
    epsilon in (0, 1] is the half-width of the cubic neighbourhoods whose
    walls carry the cross-sections (1 only for the rescaled unit chart).
    """

    alpha: float = 1.0
    beta: float = -0.2
    nu: float = 0.0
    mu: float = 0.0
    omega: float = 1.0
    a: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        if not (self.beta < 0.0 < self.alpha):
            raise DomainError(f"need beta < 0 < alpha, got alpha={self.alpha}, beta={self.beta}")
        if not (abs(self.beta) < self.alpha):
            raise DomainError(f"need |beta| < alpha, got alpha={self.alpha}, beta={self.beta}")
        if self.nu < 0.0 or self.mu < 0.0:
            raise DomainError(f"need nu, mu >= 0, got nu={self.nu}, mu={self.mu}")
        if self.omega <= 0.0:
            raise DomainError(f"need omega > 0, got {self.omega}")
        if self.a <= 0.0:
            raise DomainError(f"need a > 0, got {self.a}")
        if not (0.0 < self.epsilon <= 1.0):
            raise DomainError(f"need 0 < epsilon <= 1, got {self.epsilon}")
        if self.nu + self.mu > 0.1 * self.epsilon:
            warnings.warn(
                f"nu + mu = {self.nu + self.mu:g} exceeds 0.1*epsilon = "
                f"{0.1 * self.epsilon:g}; perturbative formulas degrade",
                stacklevel=2,
            )

    @property
    def delta(self) -> float:
        """Saddle value (alpha - beta)/(alpha + beta); > 1 means attraction."""
        return (self.alpha - self.beta) / (self.alpha + self.beta)

    def with_(self, **kw) -> "Params":
        return replace(self, **kw)


@dataclass(frozen=True)
class State:
    """Suspended state: ambient point (x, y, z) plus forcing phase s."""

    x: float
    y: float
    z: float
    s: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.s], dtype=float)

    @classmethod
    def from_array(cls, u) -> "State":
        x, y, z, s = np.asarray(u, dtype=float)
        return cls(float(x), float(y), float(z), float(s))

    @property
    def r2(self) -> float:
        return self.x * self.x + self.y * self.y + self.z * self.z


@dataclass(frozen=True)
class Forcing:
    """Periodic waveform u -> func(u); the dynamics evaluate func(2*omega*t).

    kind is "sine" for f = sin (closed-form forcing integrals available) or
    "custom" (quadrature only). period_u is the waveform's period in its own
    argument, so the period in t is period_u / (2*omega).
    """

    kind: str
    func: Callable[[float], float]
    period_u: float

    def period_in_t(self, omega: float) -> float:
        """Minimal period of t -> func(2*omega*t)."""
        return self.period_u / (2.0 * omega)

    def __call__(self, u):
        return self.func(u)


def sine_forcing() -> Forcing:
    """The default forcing f = sin; t -> sin(2*omega*t) has period pi/omega."""
    return Forcing(kind="sine", func=np.sin, period_u=2.0 * math.pi)


def custom_forcing(func: Callable[[float], float], period_u: float) -> Forcing:
    """Wrap an arbitrary smooth waveform, checking zero mean and
    non-constancy over one period."""
    if period_u <= 0.0:
        raise DomainError(f"need period_u > 0, got {period_u}")
    try:
        mean, err = quad(func, 0.0, period_u, limit=200)
    except Exception as exc:  # pragma: no cover - scipy raises rarely here
        raise QuadratureFailure(f"could not integrate forcing over one period: {exc}") from exc
    if err > 1e-8 * max(1.0, abs(mean)):
        raise QuadratureFailure(f"forcing mean uncertain: estimate {mean:g} +- {err:g}")
    if abs(mean) / period_u > 1e-9:
        raise DomainError(f"forcing must have zero mean; got mean {mean / period_u:g}")
    samples = np.array([func(u) for u in np.linspace(0.0, period_u, 33)])
    if samples.max() - samples.min() < 1e-12:
        raise DomainError("forcing must be non-constant")
    return Forcing(kind="custom", func=func, period_u=float(period_u))


def _coerce(u) -> np.ndarray:
    arr = u.as_array() if isinstance(u, State) else np.asarray(u, dtype=float)
    if arr.shape != (4,):
        raise DomainError(f"expected a 4-vector (x, y, z, s), got shape {arr.shape}")
    return arr


def eval_field(u, p: Params, f: Forcing | None = None) -> np.ndarray:
    """Right-hand side of the suspended system at state u = (x, y, z, s).

    With nu = 0 the forcing reduces to the constant mu and f may be None.
    """
    x, y, z, s = _coerce(u)
    r2 = x * x + y * y + z * z
    drive = p.mu
    if p.nu != 0.0:
        if f is None:
            raise DomainError("nu > 0 requires a Forcing")
        drive = p.nu * float(f(2.0 * p.omega * s)) + p.mu
    return np.array(
        [
            x * (1.0 - r2) - p.alpha * x * z + p.beta * x * z * z + (1.0 - x) * drive,
            y * (1.0 - r2) + p.alpha * y * z + p.beta * y * z * z,
            z * (1.0 - r2) - p.alpha * (y * y - x * x) - p.beta * z * (x * x + y * y),
            1.0,
        ]
    )


def equilibrium(sigma: int) -> np.ndarray:
    """The saddle v_sigma = (0, 0, sigma), sigma = +1 or -1."""
    if sigma not in (+1, -1):
        raise DomainError(f"sigma must be +1 or -1, got {sigma}")
    return np.array([0.0, 0.0, float(sigma)])


def jacobian_at_equilibrium(p: Params, sigma: int) -> np.ndarray:
    """Jacobian of the unperturbed ambient field at v_sigma.

    Diagonal by symmetry: diag(beta - sigma*alpha, beta + sigma*alpha, -2).
    At v+ the x direction contracts and y expands; at v- the roles swap.
    """
    if sigma not in (+1, -1):
        raise DomainError(f"sigma must be +1 or -1, got {sigma}")
    return np.diag([p.beta - sigma * p.alpha, p.beta + sigma * p.alpha, -2.0])


def apply_symmetry(u, which: str) -> np.ndarray:
    """Apply kappa1: (x,y,z) -> (-y,x,-z) or kappa2: (x,y,z) -> (x,-y,z).

    Accepts a 3-vector or a suspended 4-vector (phase untouched). kappa1
    generates a cyclic group of order 4 mapping the network's connections
    onto each other; kappa2 is the reflection fixing the {y=0} plane.
    """
    arr = np.asarray(u.as_array() if isinstance(u, State) else u, dtype=float).copy()
    if arr.shape not in ((3,), (4,)):
        raise DomainError(f"expected a 3- or 4-vector, got shape {arr.shape}")
    x, y, z = arr[0], arr[1], arr[2]
    if which == "kappa1":
        arr[0], arr[1], arr[2] = -y, x, -z
    elif which == "kappa2":
        arr[1] = -y
    else:
        raise DomainError(f"unknown symmetry {which!r}; expected 'kappa1' or 'kappa2'")
    return arr


def lie_derivative_g(u, p: Params) -> float:
    """Derivative of g = (x - y)^2 + z^2 along the unperturbed field.

    Equals 2 (1 - r^2) g - 4 beta x y z^2, so g's zero set (the plane
    diagonal joining the connections) is invariant on the sphere exactly
    when beta = 0.
    """
    arr = _coerce(u) if (isinstance(u, State) or np.asarray(u).shape == (4,)) else None
    if arr is None:
        x, y, z = np.asarray(u, dtype=float)
        arr = np.array([x, y, z, 0.0])
    x, y, z = arr[0], arr[1], arr[2]
    fx, fy, fz, _ = eval_field(arr, p.with_(nu=0.0, mu=0.0))
    return float(2.0 * (x - y) * (fx - fy) + 2.0 * z * fz)


def saddle_value(p: Params) -> float:
    """delta = (alpha - beta)/(alpha + beta), ratio of contraction to
    expansion at the saddles; the network attracts when delta > 1."""
    return p.delta


def wrap_phase(s: float, period: float) -> float:
    """Reduce a phase to [0, period)."""
    return float(np.mod(s, period))


def circle_distance(s1: float, s2: float, period: float) -> float:
    """Distance between phases on a circle of the given circumference."""
    d = abs(wrap_phase(s1, period) - wrap_phase(s2, period))
    return float(min(d, period - d))
