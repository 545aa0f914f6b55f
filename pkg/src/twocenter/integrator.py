"""Adaptive integration of the flow, section events and variational equations.

All routines share one compiled DOP853 driver (8th-order propagation with an
embedded 5(3) error estimate, PI step control and 7th-order dense output).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, SingularCenter, StepSizeUnderflow
from .model import ModelParams, PhaseState, StateLike, Trajectory, as_vector

_EMPTY = np.empty(0)


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1
    dense_output: bool = False
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if not self.max_step > 0:
            raise DomainError("max_step must be positive")

    def to_dict(self) -> dict:
        return {"rel_tol": self.rel_tol, "abs_tol": self.abs_tol, "max_step": self.max_step}


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class EventSpec:
    """Crossings of ``x = 0``; ``direction`` is the required sign of ``dx/dt``."""

    direction: int = 1

    def __post_init__(self):
        if self.direction not in (-1, 0, 1):
            raise DomainError("direction must be -1, 0 or +1")

    @staticmethod
    def surface(s: StateLike) -> float:
        return float(as_vector(s)[0])


def _run(mode, p, y0, t0, t1, cfg, t_eval=_EMPTY, record=False, event_dir=0, events=False):
    if not (np.isfinite(t0) and np.isfinite(t1)):
        raise DomainError("time span must be finite")
    out = _kernels.solve(
        mode, float(p.a), np.ascontiguousarray(y0, dtype=float), float(t0), float(t1),
        float(cfg.rel_tol), float(cfg.abs_tol), float(cfg.max_step),
        np.ascontiguousarray(t_eval, dtype=float), bool(record), int(event_dir), bool(events),
        int(cfg.max_steps),
    )
    status = out[0]
    if status == _kernels.SINGULAR:
        raise SingularCenter("trajectory reached a fixed center")
    if status in (_kernels.UNDERFLOW, _kernels.MAX_STEPS):
        raise StepSizeUnderflow("step-size controller stalled")
    return out


def _check_ic(p: ModelParams, ic) -> np.ndarray:
    y0 = as_vector(ic)
    r1 = np.hypot(y0[0] + 1, y0[1])
    r2 = np.hypot(y0[0] - 1, y0[1])
    if p.a != 0 and min(r1, r2) <= _kernels.SINGULAR_DISTANCE:
        raise SingularCenter("initial condition at a fixed center")
    return y0


def integrate(p: ModelParams, ic: StateLike, t_span, cfg: IntegratorConfig = DEFAULT_CONFIG,
              t_eval=None) -> Trajectory:
    """Integrate the flow over ``t_span``.

    Without ``t_eval`` every accepted step is returned; with it, the dense
    interpolant is sampled at the requested (monotone, in-span) times.
    """
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise DomainError("t_span must satisfy t1 > t0")
    y0 = _check_ic(p, ic)
    if t_eval is None:
        out = _run(0, p, y0, t0, t1, cfg, record=True)
        times, states = out[3], out[4]
    else:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval.ndim != 1 or np.any(np.diff(t_eval) <= 0):
            raise DomainError("t_eval must be strictly increasing")
        if t_eval.size and (t_eval[0] < t0 or t_eval[-1] > t1):
            raise DomainError("t_eval outside t_span")
        out = _run(0, p, y0, t0, t1, cfg, t_eval=t_eval)
        times, states = t_eval, out[2]
    return Trajectory(times=np.array(times), states=np.array(states),
                      energy_drift=float(out[7]), n_steps=int(out[8]), params=p)


def flow_map(p: ModelParams, ic: StateLike, T: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> PhaseState:
    """State at time ``T`` (which may be negative); ``T = 0`` returns ``ic``."""
    y0 = _check_ic(p, ic)
    if T == 0:
        return PhaseState.from_array(y0)
    out = _run(0, p, y0, 0.0, float(T), cfg)
    return PhaseState.from_array(out[1])


def integrate_events(p: ModelParams, ic: StateLike, t_span, cfg: IntegratorConfig = DEFAULT_CONFIG,
                     ev: EventSpec = EventSpec()) -> list[tuple[float, PhaseState]]:
    """All oriented crossings of ``x = 0`` in time order."""
    times, states, _ = integrate_events_arrays(p, ic, t_span, cfg, ev)
    return [(float(t), PhaseState.from_array(s)) for t, s in zip(times, states)]


def integrate_events_arrays(p: ModelParams, ic: StateLike, t_span,
                            cfg: IntegratorConfig = DEFAULT_CONFIG, ev: EventSpec = EventSpec()):
    """Array form of :func:`integrate_events`: ``(times, states, energy_drift)``."""
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise DomainError("t_span must satisfy t1 > t0")
    y0 = _check_ic(p, ic)
    out = _run(0, p, y0, t0, t1, cfg, event_dir=ev.direction, events=True)
    return np.array(out[5]), np.array(out[6]), float(out[7])


def integrate_variational(p: ModelParams, ic: StateLike, T: float,
                          cfg: IntegratorConfig = DEFAULT_CONFIG) -> tuple[PhaseState, np.ndarray]:
    """Integrate state and variational matrix together; ``M(0) = I``.

    State and matrix form one 20-dimensional system, so both follow the same
    step sequence.
    """
    y0 = _check_ic(p, ic)
    z = np.concatenate([y0, np.eye(4).ravel()])
    if T == 0:
        return PhaseState.from_array(y0), np.eye(4)
    out = _run(1, p, z, 0.0, float(T), cfg)
    zf = out[1]
    return PhaseState.from_array(zf[:4]), zf[4:].reshape(4, 4).copy()


def integrate_tangent(p: ModelParams, y: np.ndarray, v: np.ndarray, T: float,
                      cfg: IntegratorConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, np.ndarray]:
    """Carry a single tangent vector ``v`` along the flow for time ``T``."""
    out = _run(2, p, np.concatenate([y, v]), 0.0, float(T), cfg)
    zf = out[1]
    return zf[:4].copy(), zf[4:].copy()
