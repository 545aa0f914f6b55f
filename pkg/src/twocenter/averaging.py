"""First-order averaging around the equilibrium ``(0, sqrt(a^2 - 1), 0, 0)``.

Near the equilibrium the flow, restricted to the energy level
``H = eps**2 h`` and written in amplitude/phase variables ``(rho, s)`` with a
fast angle ``theta``, reads ``d(rho, s)/dtheta = eps F(theta, rho, s) + O(eps^2)``.
The period average ``f(rho, s)`` over ``T = sqrt(2) a pi`` has closed forms;
its simple zeros give initial conditions of periodic orbits::

    (eps r, g + eps rho cos(k s), 0, -eps k rho sin(k s)),   k = sqrt(2) g / a
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, InvalidBranch, ResonantParameter
from .model import ModelParams, PhaseState, apply_symmetry, as_vector

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)
RESONANCE_TOL = 1e-12
EPSILON_CAP = 0.1


@dataclass(frozen=True)
class AveragingQuery:
    params: ModelParams
    h: float = 1.0
    epsilon: float = 1e-2

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("h must be positive")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        check_applicable(self.params)


@dataclass(frozen=True)
class AveragingResult:
    n: int
    s_tilde: float
    rho_tilde: float
    r_tilde: float
    detA: float
    valid: bool
    refined_shift: float = 0.0
    notes: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {"n": self.n, "s_tilde": self.s_tilde, "rho_tilde": self.rho_tilde,
                "r_tilde": self.r_tilde, "detA": self.detA, "valid": self.valid}


def period(p: ModelParams) -> float:
    """Averaging period ``sqrt(2) pi a`` (one linear x-oscillation)."""
    return SQRT2 * math.pi * p.a


def is_sqrt5(p: ModelParams) -> bool:
    return abs(p.a - SQRT5) < RESONANCE_TOL


def resonance_order(p: ModelParams) -> int | None:
    """``N`` if ``a = sqrt(N^2 + 1)`` within tolerance, else ``None``."""
    if p.a <= 1:
        return None
    top = math.ceil(p.g) + 1
    for N in range(1, top + 1):
        if abs(p.a - math.sqrt(N * N + 1)) < RESONANCE_TOL:
            return N
    return None


def check_applicable(p: ModelParams) -> None:
    """Raise unless averaging at the off-axis equilibrium is informative for ``a``.

    ``a = sqrt(5)`` passes: it has its own closed form.
    """
    if p.a <= 1:
        raise DomainError(f"averaging requires a > 1, got a={p.a}")
    if is_sqrt5(p):
        return
    N = resonance_order(p)
    if N is not None:
        raise ResonantParameter(
            f"a = sqrt({N}^2 + 1): the averaged function vanishes for all rho and s")


def reduced_rhs(p: ModelParams, h: float, theta, rho, s):
    """Order-eps coefficients ``(F11, F12)`` of ``d(rho, s)/dtheta``.

    Vectorised over ``theta``.
    """
    if np.any(np.asarray(rho) <= 0):
        raise DomainError("rho must be positive")
    a = p.a
    a2 = a * a
    g = p.g
    phase = SQRT2 * g * (np.asarray(theta) + s) / a
    fast = SQRT2 * np.asarray(theta) / a
    rho2 = rho * rho
    F11 = np.sin(phase) / (SQRT2 * a ** 3) * (
        (a2 - 3) * (a2 * (h - rho2) + rho2) * np.cos(fast) ** 2
        + 3 * rho2 * np.cos(phase) ** 2)
    F12 = np.cos(phase) / (4 * a2 * g * rho) * (
        (a2 - 3) * (a2 * (h - 3 * rho2) + 3 * rho2) * np.cos(2 * fast)
        + (a2 - 3) * a2 * h - 3 * (a2 * a2 - 4 * a2 + 2) * rho2
        + 3 * rho2 * np.cos(2 * phase))
    return F11, F12


def _averaged_generic(a: float, h: float, rho: float, s: float) -> tuple[float, float]:
    # no applicability guard: used directly by the resonance checks
    a2 = a * a
    g = math.sqrt(a2 - 1)
    pi = math.pi
    k = SQRT2 * g / a
    osc = (math.cos(2 * k * s) + math.cos(2 * g * (pi * a + SQRT2 * s) / a)
           + math.cos(2 * g * (2 * pi * a + SQRT2 * s) / a))
    c2 = math.cos(2 * pi * g)
    arg = g * (pi * a + SQRT2 * s) / a
    sg = math.sin(pi * g)
    base = 2 * a2 * (a2 - 3) ** 2 * h
    f1 = sg * math.sin(arg) / (2 * SQRT2 * pi * a ** 3 * (a2 - 5) * g) * (
        base + (a2 - 5) * rho * rho * (osc + c2) - 2 * (a2 ** 3 - 7 * a2 ** 2 + 14 * a2 - 4) * rho * rho)
    f2 = sg * math.cos(arg) / (4 * pi * a2 * (a2 - 5) * (a2 - 1) * rho) * (
        base + (a2 - 5) * rho * rho * (osc - c2) + 2 * (-3 * a2 ** 3 + 21 * a2 ** 2 - 43 * a2 + 17) * rho * rho)
    return f1, f2


_K5 = 2.0 * math.sqrt(2.0 / 5.0)


def _averaged_sqrt5(h: float, rho: float, s: float) -> tuple[float, float]:
    f1 = (5 * h - 4 * rho * rho) * math.sin(_K5 * s) / (10 * math.sqrt(10.0))
    f2 = (5 * h - 12 * rho * rho) * math.cos(_K5 * s) / (40 * rho)
    return f1, f2


def averaged_f(p: ModelParams, h: float, rho: float, s: float) -> tuple[float, float]:
    """Closed-form averaged function ``(f1, f2)``.

    Raises
    ------
    ResonantParameter
        For ``a = sqrt(N^2 + 1)`` other than ``sqrt(5)``.
    DomainError
        For ``rho <= 0`` or ``a <= 1``.
    """
    check_applicable(p)
    if not rho > 0:
        raise DomainError("rho must be positive")
    if is_sqrt5(p):
        return _averaged_sqrt5(h, rho, s)
    return _averaged_generic(p.a, h, rho, s)


def s_period(p: ModelParams) -> float:
    """Period of the averaged function in ``s``."""
    if is_sqrt5(p):
        return math.pi / _K5
    return SQRT2 * math.pi * p.a / p.g


def reduce_s(p: ModelParams, s: float) -> float | None:
    """Shift ``s`` by whole periods into ``[-2 pi, 2 pi)``; ``None`` if impossible."""
    P = s_period(p)
    lo, hi = -2 * math.pi, 2 * math.pi
    if lo <= s < hi:
        return s
    k = math.floor((s - lo) / P)
    s2 = s - k * P
    return s2 if lo <= s2 < hi else None


def det_closed_form(a: float, h: float) -> float:
    a2 = a * a
    g = math.sqrt(a2 - 1)
    pref = (a2 - 3) ** 2 * h * math.sin(math.pi * g) ** 2 / (
        math.pi ** 2 * a2 * a2 * (a2 - 5) ** 2 * (a2 - 1))
    return pref * (2 * a2 ** 3 - 14 * a2 ** 2 + 29 * a2 + (a2 - 5) * math.cos(2 * math.pi * g) - 13)


def det_jacobian(p: ModelParams, h: float, res: AveragingResult | None = None) -> float:
    """Determinant of ``d(f1, f2)/d(rho, s)`` at a closed-form zero.

    The generic value depends on ``a`` and ``h`` only. For ``a = sqrt(5)``
    the exact derivative of the special closed form at ``res`` is used.
    """
    if p.a <= 1:
        raise DomainError("a must exceed 1")
    if is_sqrt5(p):
        if res is None:
            raise DomainError("a = sqrt(5) needs the zero to evaluate the determinant")
        rho, s = res.rho_tilde, res.s_tilde
        d1s = (5 * h - 4 * rho ** 2) * _K5 * math.cos(_K5 * s) / (10 * math.sqrt(10.0))
        d1r = -8 * rho * math.sin(_K5 * s) / (10 * math.sqrt(10.0))
        d2r = (-12 * rho ** 2 - 5 * h) / (40 * rho ** 2) * math.cos(_K5 * s)
        d2s = -(5 * h - 12 * rho ** 2) * _K5 * math.sin(_K5 * s) / (40 * rho)
        return d1r * d2s - d1s * d2r
    N = resonance_order(p)
    if N is not None:
        raise ResonantParameter(f"a = sqrt({N}^2 + 1): determinant vanishes identically")
    return det_closed_form(p.a, h)


def _fd_jacobian(p, h, rho, s, step=1e-6):
    J = np.empty((2, 2))
    for j, (dr, ds) in enumerate(((step, 0.0), (0.0, step))):
        fp = averaged_f(p, h, rho + dr, s + ds)
        fm = averaged_f(p, h, rho - dr, s - ds)
        J[:, j] = (np.array(fp) - np.array(fm)) / (2 * step)
    return J


def _newton_check(p, h, rho, s, iters=2):
    # closed-form zeros are refined on f as a self-check; returns the shift
    z = np.array([rho, s])
    for _ in range(iters):
        F = np.array(averaged_f(p, h, z[0], z[1]))
        J = _fd_jacobian(p, h, z[0], z[1])
        try:
            z = z - np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            return math.inf
    return float(np.max(np.abs(z - [rho, s])))


def candidate_zero(p: ModelParams, h: float, n: int) -> AveragingResult:
    """Closed-form zero for branch ``n`` (generic ``a``).

    Raises
    ------
    ResonantParameter
        For ``a = sqrt(N^2 + 1)``.
    DomainError
        For ``a = sqrt(5)`` (use :func:`solve_zeros_sqrt5`), ``a = sqrt(3)``
        or ``h <= 0``.
    InvalidBranch
        If the amplitudes are not real and positive.
    """
    check_applicable(p)
    if is_sqrt5(p):
        raise DomainError("a = sqrt(5) has its own zeros; use solve_zeros_sqrt5")
    if not h > 0:
        raise DomainError("h must be positive")
    a = p.a
    a2 = a * a
    g = p.g
    if abs(a2 - 3) < RESONANCE_TOL:
        raise DomainError("a = sqrt(3) is excluded: the zero collapses onto rho = 0")
    D = 6 * a2 ** 3 - 42 * a2 ** 2 + 85 * a2 - (a2 - 5) * math.cos(2 * math.pi * g) - 29
    if D <= 0:
        raise InvalidBranch(f"no real rho for a={a}: denominator {D:.3g} <= 0")
    rho = a * math.sqrt(2 * (a2 - 3) ** 2 * h / D)
    r2 = a2 * (h - rho * rho) + rho * rho
    if r2 <= 0:
        raise InvalidBranch(f"r^2 = {r2:.3g} <= 0 for a={a}, h={h}")
    r = math.sqrt(r2)
    s_raw = math.pi * a * (n - g) / (SQRT2 * g)
    s = reduce_s(p, s_raw)
    notes = []
    valid = True
    if s is None:
        valid = False
        s = s_raw
        notes.append("s outside [-2pi, 2pi) after period reduction")
    detA = det_jacobian(p, h)
    if detA == 0:
        valid = False
    shift = _newton_check(p, h, rho, s)
    if not shift < 1e-9:
        valid = False
        notes.append(f"Newton self-check moved the zero by {shift:.2e}")
    return AveragingResult(n=n, s_tilde=s, rho_tilde=rho, r_tilde=r, detA=detA,
                           valid=valid, refined_shift=shift, notes=tuple(notes))


def solve_zeros_sqrt5(h: float) -> list[AveragingResult]:
    """Zeros of the ``a = sqrt(5)`` averaged function with ``s`` in ``[-2 pi, 2 pi)``.

    Only the ``rho^2 = 5h/12`` family is admissible; the other factor gives
    ``r = 0``. Results are ordered by ``s``; ``n`` counts half-periods of
    ``sin(2 sqrt(2/5) s)`` from ``s = 0``.
    """
    if not h > 0:
        raise DomainError("h must be positive")
    p = ModelParams(SQRT5)
    rho = math.sqrt(5 * h / 12)
    r = math.sqrt(5 * (h - rho * rho) + rho * rho)
    step = math.pi / _K5
    out = []
    kmin = math.ceil(-2 * math.pi / step)
    kmax = math.floor(2 * math.pi / step)
    for k in range(kmin, kmax + 1):
        s = k * step
        if not (-2 * math.pi <= s < 2 * math.pi):
            continue
        proto = AveragingResult(n=k, s_tilde=s, rho_tilde=rho, r_tilde=r, detA=0.0, valid=False)
        detA = det_jacobian(p, h, proto)
        fd = float(np.linalg.det(_fd_jacobian(p, h, rho, s)))
        f = averaged_f(p, h, rho, s)
        ok = max(abs(f[0]), abs(f[1])) < 1e-10 and detA != 0 and abs(fd - detA) <= 1e-6 * abs(detA)
        out.append(AveragingResult(n=k, s_tilde=s, rho_tilde=rho, r_tilde=r, detA=detA,
                                   valid=ok, refined_shift=_newton_check(p, h, rho, s)))
    return out


def zeros(p: ModelParams, h: float, branches=(0, 1)) -> list[AveragingResult]:
    """Zeros for the requested branches, routing ``sqrt(5)`` to its own solver."""
    if is_sqrt5(p):
        return solve_zeros_sqrt5(h)
    return [candidate_zero(p, h, n) for n in branches]


def initial_conditions(q: AveragingQuery, res: AveragingResult) -> PhaseState:
    """Phase-space initial condition of the orbit seeded by ``res``."""
    if not res.valid:
        raise DomainError("initial conditions need a valid averaging result")
    if q.epsilon > EPSILON_CAP:
        warnings.warn(f"epsilon={q.epsilon} exceeds {EPSILON_CAP}; the O(eps^2) error may be large",
                      stacklevel=2)
    p = q.params
    eps = q.epsilon
    k = SQRT2 * p.g / p.a
    phase = k * res.s_tilde
    return PhaseState(eps * res.r_tilde,
                      p.g + eps * res.rho_tilde * math.cos(phase),
                      0.0,
                      -eps * k * res.rho_tilde * math.sin(phase))


@dataclass(frozen=True)
class FamilyMember:
    state: PhaseState
    symmetry: str
    neighbor: int  # +1 near (0, +g), -1 near (0, -g)

    def to_dict(self) -> dict:
        return {"symmetry": self.symmetry, "neighbor": self.neighbor, **self.state.to_dict()}


def symmetry_family(ic, tol: float = 1e-12) -> list[FamilyMember]:
    """Distinct symmetric images ``{ic, S1 ic, S2 ic, S1S2 ic}``."""
    base = PhaseState.from_array(as_vector(ic))
    cands = [("id", base)] + [(name, apply_symmetry(name, base)) for name in ("S1", "S2", "S1S2")]
    out: list[FamilyMember] = []
    for name, st in cands:
        v = st.as_array()
        if any(np.max(np.abs(v - m.state.as_array())) <= tol for m in out):
            continue
        out.append(FamilyMember(st, name, 1 if st.y >= 0 else -1))
    return out


def frequency_ratio(p: ModelParams, max_den: int = 64, tol: float = 1e-9):
    """Linear frequencies at the off-axis minimum and, if rational, ``l/j = 1/g``.

    Returns ``(omega_x, omega_y, (l, j) or None)``.
    """
    if p.a <= 1:
        raise DomainError("frequency ratio needs a > 1")
    inv_g = 1.0 / p.g
    frac = Fraction(inv_g).limit_denominator(max_den)
    ratio = (frac.numerator, frac.denominator) if abs(inv_g - float(frac)) < tol else None
    return p.omega_x, p.omega_y, ratio


def a_for_ratio(l: int, j: int) -> ModelParams:
    """Parameter with ``omega_x / omega_y = l / j``, i.e. ``a = sqrt((j/l)^2 + 1)``."""
    if l == 0:
        raise DomainError("l must be nonzero")
    if l < 0 or j <= 0:
        raise DomainError("l and j must be positive")
    if math.gcd(l, j) != 1:
        raise DomainError(f"l={l} and j={j} are not coprime")
    p = ModelParams(math.sqrt((j / l) ** 2 + 1))
    if resonance_order(p) is not None and not is_sqrt5(p):
        warnings.warn(f"a = {p.a!r} is an excluded resonant parameter for averaging", stacklevel=2)
    return p
