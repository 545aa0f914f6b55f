"""Periodic-orbit shooting, monodromy matrices and the multiplier test.

For an autonomous Hamiltonian flow every periodic orbit carries two unit
multipliers (time translation and energy). If the other pair is not unit on
some periodic orbit, there is no second first integral whose differential is
independent of ``dH`` along that orbit, which witnesses non-integrability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InsufficientEvidence, NoConvergence, SingularShooting
from .integrator import IntegratorConfig, flow_map, integrate, integrate_variational
from .model import ModelParams, PhaseState, StateLike, as_vector, hamiltonian, potential_gradient, vector_field

#: tighter than the global default: closure targets sit at 1e-10
ORBIT_CONFIG = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, max_step=0.1)
CLOSURE_TOL = 1e-10
PRECONDITION_CLOSURE = 1e-8
TAU_UNIT = 1e-3
MAX_ITER = 25


@dataclass(frozen=True)
class OrbitCandidate:
    ic: PhaseState
    period_guess: float
    source: dict = field(default_factory=dict)
    h: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if not self.period_guess > 0:
            raise DomainError("period_guess must be positive")


class RefinedOrbit(NamedTuple):
    ic: PhaseState
    period: float
    closure: float
    iterations: int = 0


class Verdict(str, Enum):
    ALL_UNIT = "multipliers-all-unit"
    NON_UNIT = "multipliers-non-unit"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class MonodromyReport:
    ic: PhaseState
    period: float
    M: np.ndarray
    multipliers: tuple
    det_residual: float
    trivial_residual: float
    closure_residual: float
    verdict: Verdict

    @property
    def nontrivial(self) -> tuple:
        return self.multipliers[2:]

    @property
    def max_deviation(self) -> float:
        """Largest ``|mu - 1|`` among the two nontrivial multipliers."""
        return max(abs(m - 1) for m in self.nontrivial)

    def to_dict(self) -> dict:
        return {
            "ic": self.ic.to_dict(),
            "T": self.period,
            "closure": self.closure_residual,
            "multipliers": [{"re": m.real, "im": m.imag} for m in self.multipliers],
            "det_residual": self.det_residual,
            "trivial_residual": self.trivial_residual,
            "verdict": self.verdict.value,
        }


@dataclass(frozen=True)
class ProbeResult:
    witness: bool
    verdict: str
    max_deviation: float
    n_reports: int

    def to_dict(self) -> dict:
        return {"witness": self.witness, "verdict": self.verdict,
                "max_deviation": self.max_deviation, "n_reports": self.n_reports}


def _closure(p, ic, T, cfg) -> float:
    return float(np.linalg.norm(flow_map(p, ic, T, cfg).as_array() - as_vector(ic)))


def _shoot(p, z, T, H0, cfg):
    """Gauss-Newton on (x, y, py, T) with px and energy pinned."""
    best = (z.copy(), T, math.inf)
    for it in range(MAX_ITER + 1):
        fT, M = integrate_variational(p, z, T, cfg)
        R = fT.as_array() - z
        res = np.concatenate([R, [hamiltonian(p, z) - H0]])
        norm = float(np.linalg.norm(R))
        if norm < best[2]:
            best = (z.copy(), T, norm)
        if norm < CLOSURE_TOL and abs(res[4]) < CLOSURE_TOL:
            return z, T, it
        if it == MAX_ITER:
            break
        A = np.zeros((5, 4))
        A[:4, :3] = (M - np.eye(4))[:, [0, 1, 3]]
        A[:4, 3] = vector_field(p, fT)
        ux, uy = potential_gradient(p, z[0], z[1])
        A[4, :3] = (ux, uy, z[3])
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] <= 1e-14 * sv[0]:
            raise SingularShooting(f"shooting Jacobian rank-deficient (cond={sv[0] / max(sv[-1], 1e-300):.2e})")
        step = np.linalg.lstsq(A, -res, rcond=None)[0]
        # backtrack if the full step increases the residual
        lam = 1.0
        for _ in range(8):
            z_try = z.copy()
            z_try[[0, 1, 3]] += lam * step[:3]
            T_try = T + lam * step[3]
            if T_try > 0:
                r_try = flow_map(p, z_try, T_try, cfg).as_array() - z_try
                e_try = hamiltonian(p, z_try) - H0
                if np.hypot(np.linalg.norm(r_try), e_try) < np.linalg.norm(res) or lam < 0.01:
                    break
            lam *= 0.5
        z, T = z_try, T_try
    bz, bT, bn = best
    raise NoConvergence(f"shooting stalled at closure {bn:.3e}", ic=PhaseState.from_array(bz),
                        period=bT, closure=bn)


def refine_orbit(p: ModelParams, cand: OrbitCandidate, cfg: IntegratorConfig = ORBIT_CONFIG,
                 subharmonic_check: int = 6) -> RefinedOrbit:
    """Newton shooting for a periodic orbit near ``cand``.

    Energy is held at ``H(cand.ic)`` and ``px`` at its initial value (the
    section anchor); the unknowns are ``(x, y, py, T)``. After convergence
    the fractions ``T/k`` for ``k = 2..subharmonic_check`` are tried and the
    shortest closing one is kept.

    Raises
    ------
    NoConvergence
        Best iterate and its closure are attached to the exception.
    SingularShooting
        If the gauged shooting Jacobian is rank-deficient.
    """
    z0 = as_vector(cand.ic).copy()
    H0 = hamiltonian(p, z0)
    z, T, its = _shoot(p, z0, float(cand.period_guess), H0, cfg)
    for k in range(subharmonic_check, 1, -1):
        if _closure(p, z, T / k, cfg) < 1e-6:
            z, T, more = _shoot(p, z, T / k, H0, cfg)
            its += more
            break
    return RefinedOrbit(PhaseState.from_array(z), T, _closure(p, z, T, cfg), its)


def _sort_multipliers(mu) -> tuple:
    return tuple(sorted((complex(m) for m in mu), key=lambda m: (abs(m - 1), m.imag)))


def monodromy(p: ModelParams, ic: StateLike, T: float, cfg: IntegratorConfig = ORBIT_CONFIG,
              tau_unit: float = TAU_UNIT) -> MonodromyReport:
    """Monodromy matrix and multipliers of a (refined) periodic orbit."""
    _, M = integrate_variational(p, ic, T, cfg)
    mults = _sort_multipliers(np.linalg.eigvals(M))
    dev = [abs(m - 1) for m in mults]
    closure = _closure(p, ic, T, cfg)
    if closure >= PRECONDITION_CLOSURE:
        verdict = Verdict.INCONCLUSIVE
    elif max(dev[2:]) > tau_unit:
        verdict = Verdict.NON_UNIT
    else:
        verdict = Verdict.ALL_UNIT
    return MonodromyReport(
        ic=PhaseState.from_array(as_vector(ic)), period=float(T), M=M, multipliers=mults,
        det_residual=abs(float(np.linalg.det(M)) - 1.0), trivial_residual=max(dev[:2]),
        closure_residual=closure, verdict=verdict)


def reciprocal_pair_residual(report: MonodromyReport) -> float:
    """``max |mu mu' - 1|`` over the trivial and the nontrivial pair."""
    m = report.multipliers
    return max(abs(m[0] * m[1] - 1), abs(m[2] * m[3] - 1))


def integrability_probe(p: ModelParams, reports: Sequence[MonodromyReport],
                        tau_unit: float = TAU_UNIT) -> ProbeResult:
    """Poincare's multiplier test over a collection of periodic orbits.

    It can only ever find a witness of non-integrability; all-unit
    multipliers leave the question open.
    """
    usable = [r for r in reports if r.closure_residual < PRECONDITION_CLOSURE]
    if not usable:
        raise InsufficientEvidence("no report has closure below 1e-8")
    worst = max(r.max_deviation for r in usable)
    if worst > tau_unit:
        return ProbeResult(True, "non-integrability witness found: a nontrivial multiplier differs from 1",
                           worst, len(usable))
    return ProbeResult(False, "consistent with integrability (all multipliers unit): inconclusive",
                       worst, len(usable))


def oscillation_counts(p: ModelParams, ic: StateLike, T: float, cfg: IntegratorConfig = ORBIT_CONFIG,
                       samples: int = 4000) -> tuple[int, int]:
    """Number of x- and y-oscillations over one period.

    Sign changes of ``px`` and ``py`` are counted cyclically on a uniform
    grid of mid-sample times, so each full oscillation contributes two.
    """
    t = (np.arange(samples) + 0.5) * (T / samples)
    tr = integrate(p, ic, (0.0, T), cfg, t_eval=t)
    counts = []
    for col in (2, 3):
        v = np.sign(tr.states[:, col])
        v = v[v != 0]
        changes = int(np.count_nonzero(v != np.roll(v, 1)))
        counts.append(changes // 2)
    return counts[0], counts[1]
