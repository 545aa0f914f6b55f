"""Dimensionless two-fixed-center Hamiltonian with harmonic-like springs.

The particle sits in the plane with centers at ``(-1, 0)`` and ``(+1, 0)``;
each center pulls with a unit-stiffness spring of rest length ``a``::

    H = (px**2 + py**2) / 2 + U(x, y)
    U = ((r1 - a)**2 + (r2 - a)**2) / 2

with ``r1 = |(x + 1, y)|`` and ``r2 = |(x - 1, y)|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DegenerateParameter, DomainError, SingularCenter

#: distance to a center below which the force is considered undefined
SINGULAR_DISTANCE = 1e-12
#: |Re(lambda)| < tol * (1 + |lambda|) counts as purely imaginary
IMAGINARY_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """The single parameter ``a`` and the constants derived from it."""

    a: float

    def __post_init__(self):
        a = float(self.a)
        if not math.isfinite(a) or a < 0:
            raise DomainError(f"a must be finite and >= 0, got {self.a!r}")
        object.__setattr__(self, "a", a)

    @property
    def g(self) -> float:
        """``sqrt(a**2 - 1)``; only defined for ``a > 1``."""
        if self.a <= 1:
            raise DomainError(f"g = sqrt(a^2 - 1) needs a > 1, got a={self.a}")
        return math.sqrt(self.a * self.a - 1.0)

    @property
    def E_s(self) -> float:
        """Potential at the origin, ``(a - 1)**2``."""
        return (self.a - 1.0) ** 2

    @property
    def omega_x(self) -> float:
        if self.a == 0:
            raise DomainError("omega_x = sqrt(2)/a is undefined at a=0")
        return math.sqrt(2.0) / self.a

    @property
    def omega_y(self) -> float:
        return math.sqrt(2.0) * self.g / self.a


@dataclass(frozen=True)
class PhaseState:
    """A point ``(x, y, px, py)`` of the four-dimensional phase space."""

    x: float
    y: float
    px: float
    py: float

    def __post_init__(self):
        for name in ("x", "y", "px", "py"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.px, self.py])

    @classmethod
    def from_array(cls, arr) -> "PhaseState":
        x, y, px, py = (float(v) for v in np.asarray(arr, dtype=float).reshape(4))
        return cls(x, y, px, py)

    def __iter__(self):
        return iter((self.x, self.y, self.px, self.py))

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "px": self.px, "py": self.py}


StateLike = Union[PhaseState, Sequence[float], np.ndarray]


def as_vector(s: StateLike) -> np.ndarray:
    """Return ``s`` as a float array of shape ``(4,)``."""
    if isinstance(s, PhaseState):
        return s.as_array()
    v = np.asarray(s, dtype=float)
    if v.shape != (4,):
        raise DomainError(f"phase state must have 4 components, got shape {v.shape}")
    return v


class EquilibriumKind(str, Enum):
    LINEAR_CENTER = "linear-center"
    SADDLE_CENTER = "saddle-center"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class EquilibriumPoint:
    state: PhaseState
    eigenvalues: tuple
    kind: EquilibriumKind


@dataclass(frozen=True)
class Trajectory:
    """Sampled flow plus the maximum energy excursion seen along it.

    ``energy_drift`` is taken over every accepted integrator step, not only
    over the returned samples.
    """

    times: np.ndarray
    states: np.ndarray
    energy_drift: float
    n_steps: int = 0
    params: ModelParams | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) == 0):
            raise ValueError("times must be strictly monotone")

    @property
    def final(self) -> PhaseState:
        return PhaseState.from_array(self.states[-1])


def _distances(x: float, y: float) -> tuple[float, float]:
    return math.hypot(x + 1.0, y), math.hypot(x - 1.0, y)


def _check_regular(p: ModelParams, r1: float, r2: float) -> None:
    # at a=0 the center terms vanish identically, so nothing is singular
    if p.a != 0 and (r1 <= SINGULAR_DISTANCE or r2 <= SINGULAR_DISTANCE):
        raise SingularCenter(f"state at a fixed center (r1={r1:.3e}, r2={r2:.3e})")


def potential(p: ModelParams, x: float, y: float) -> float:
    r1, r2 = _distances(x, y)
    return 0.5 * ((r1 - p.a) ** 2 + (r2 - p.a) ** 2)


def hamiltonian(p: ModelParams, s: StateLike) -> float:
    x, y, px, py = as_vector(s)
    return 0.5 * (px * px + py * py) + potential(p, x, y)


def potential_gradient(p: ModelParams, x: float, y: float) -> np.ndarray:
    r1, r2 = _distances(x, y)
    _check_regular(p, r1, r2)
    a = p.a
    if a == 0:
        return np.array([2.0 * x, 2.0 * y])
    ux = 2.0 * x - a * ((x + 1.0) / r1 + (x - 1.0) / r2)
    uy = 2.0 * y - a * y * (1.0 / r1 + 1.0 / r2)
    return np.array([ux, uy])


def potential_hessian(p: ModelParams, x: float, y: float) -> np.ndarray:
    r1, r2 = _distances(x, y)
    _check_regular(p, r1, r2)
    a = p.a
    if a == 0:
        return np.diag([2.0, 2.0])
    uxx = uyy = uxy = 0.0
    for dx, r in ((x + 1.0, r1), (x - 1.0, r2)):
        r3 = r * r * r
        uxx += 1.0 - a / r + a * dx * dx / r3
        uyy += 1.0 - a / r + a * y * y / r3
        uxy += a * dx * y / r3
    return np.array([[uxx, uxy], [uxy, uyy]])


def vector_field(p: ModelParams, s: StateLike) -> np.ndarray:
    """Hamilton's equations ``(dx/dt, dy/dt, dpx/dt, dpy/dt)``.

    Raises
    ------
    SingularCenter
        If the state lies within ``SINGULAR_DISTANCE`` of a center (``a > 0``).
    """
    x, y, px, py = as_vector(s)
    ux, uy = potential_gradient(p, x, y)
    return np.array([px, py, -ux, -uy])


def jacobian_vf(p: ModelParams, s: StateLike) -> np.ndarray:
    """Analytic 4x4 Jacobian of :func:`vector_field`."""
    x, y, _, _ = as_vector(s)
    K = potential_hessian(p, x, y)
    J = np.zeros((4, 4))
    J[0, 2] = J[1, 3] = 1.0
    J[2:, :2] = -K
    return J


def linear_spectrum(p: ModelParams, s: StateLike) -> tuple:
    """Eigenvalues of :func:`jacobian_vf`, exactly paired as ``+-lambda``.

    The Jacobian has the block form ``[[0, I], [-K, 0]]``, so its
    characteristic polynomial is ``l**4 + tr(K) l**2 + det(K)``; the quadratic
    in ``l**2`` is solved directly.
    """
    x, y, _, _ = as_vector(s)
    K = potential_hessian(p, x, y)
    tr = K[0, 0] + K[1, 1]
    det = K[0, 0] * K[1, 1] - K[0, 1] * K[1, 0]
    # discriminant of a symmetric 2x2 is (uxx - uyy)^2 + 4 uxy^2 >= 0
    disc = math.sqrt((K[0, 0] - K[1, 1]) ** 2 + 4.0 * K[0, 1] ** 2)
    mu1 = -0.5 * (tr + disc) if tr >= 0 else -0.5 * (tr - disc)
    mu2 = det / mu1 if mu1 != 0 else -tr - mu1
    lams = []
    for mu in sorted((mu1, mu2)):
        lam = complex(np.sqrt(complex(mu)))
        lams.extend([lam, -lam])
    return tuple(lams)


def _classify(eigs) -> EquilibriumKind:
    imag = [abs(l.real) < IMAGINARY_TOL * (1.0 + abs(l)) for l in eigs]
    if any(abs(l) < IMAGINARY_TOL for l in eigs):
        return EquilibriumKind.DEGENERATE
    if all(imag):
        return EquilibriumKind.LINEAR_CENTER
    if sum(imag) == 2:
        return EquilibriumKind.SADDLE_CENTER
    return EquilibriumKind.DEGENERATE


def equilibria(p: ModelParams) -> list[EquilibriumPoint]:
    """All equilibrium points with their linear spectra.

    Five points for ``a > 1``; only the origin for ``0 <= a < 1``.
    """
    a = p.a
    if a == 1.0:
        raise DegenerateParameter("a = 1 is the pitchfork transition; Hessian degenerate")
    pts = [(0.0, 0.0)]
    if a > 1:
        g = p.g
        pts += [(0.0, g), (0.0, -g), (a, 0.0), (-a, 0.0)]
    out = []
    for x, y in pts:
        st = PhaseState(x, y, 0.0, 0.0)
        eigs = linear_spectrum(p, st)
        out.append(EquilibriumPoint(st, eigs, _classify(eigs)))
    return out


SYMMETRIES = {
    "S1": np.array([-1.0, 1.0, -1.0, 1.0]),
    "S2": np.array([1.0, -1.0, 1.0, -1.0]),
    "S1S2": np.array([-1.0, -1.0, -1.0, -1.0]),
}


def apply_symmetry(sym: str, s: StateLike) -> PhaseState:
    """Apply one of the discrete symmetries ``S1``, ``S2`` or ``S1S2``."""
    try:
        d = SYMMETRIES[sym]
    except KeyError:
        raise DomainError(f"unknown symmetry {sym!r}; expected one of {sorted(SYMMETRIES)}")
    return PhaseState.from_array(d * as_vector(s))


def potential_grid(p: ModelParams, xs: Iterable[float], ys: Iterable[float]) -> np.ndarray:
    """Vectorised ``U`` on the tensor grid ``ys x xs`` (rows indexed by y)."""
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float))
    r1 = np.hypot(X + 1.0, Y)
    r2 = np.hypot(X - 1.0, Y)
    return 0.5 * ((r1 - p.a) ** 2 + (r2 - p.a) ** 2)
