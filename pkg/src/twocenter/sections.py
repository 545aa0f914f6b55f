"""Oriented Poincare sections on ``x = 0`` with energy-shell sampling."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptyRegion, RejectionStall, TwoCenterError
from .integrator import DEFAULT_CONFIG, EventSpec, IntegratorConfig, integrate_events_arrays
from .model import ModelParams, PhaseState, hamiltonian, potential

THREADS_ENV = "TWOCENTER_THREADS"
MIN_ACCEPTANCE = 1e-6


def ic_stream(seed: int, index: int, purpose: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, index, purpose)``; independent of scheduling."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))


def resolve_threads(threads: int | None = None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return max(1, int(threads or 1))


def map_ordered(fn, items, threads: int | None = None) -> list:
    """``[fn(i, item) ...]`` in input order, optionally over a thread pool."""
    n = resolve_threads(threads)
    items = list(items)
    if n == 1 or len(items) < 2:
        return [fn(i, it) for i, it in enumerate(items)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        futs = [pool.submit(fn, i, it) for i, it in enumerate(items)]
        return [f.result() for f in futs]


def section_potential(p: ModelParams, y):
    """``U(0, y) = (sqrt(1 + y^2) - a)^2``."""
    return (np.sqrt(1.0 + np.square(y)) - p.a) ** 2


def section_min_potential(p: ModelParams) -> float:
    return 0.0 if p.a >= 1 else (1.0 - p.a) ** 2


def y_extent(p: ModelParams, E: float) -> float:
    """Largest ``|y|`` with ``U(0, y) <= E``."""
    # U(0, y) <= E  <=>  sqrt(1 + y^2) <= a + sqrt(E)
    rmax = p.a + math.sqrt(E)
    return math.sqrt(max(rmax * rmax - 1.0, 0.0))


def y_gap(p: ModelParams, E: float) -> float:
    """Half-width of the forbidden band around ``y = 0`` (zero when ``E >= E_s``)."""
    if p.a <= 1 or E >= p.E_s:
        return 0.0
    rmin = p.a - math.sqrt(E)
    return math.sqrt(max(rmin * rmin - 1.0, 0.0))


def accessible_margin(p: ModelParams, E: float, y, py):
    """``2 (E - U(0, y)) - py^2``; nonnegative on the accessible region."""
    return 2.0 * (E - section_potential(p, y)) - np.square(py)


def _sample_one(p: ModelParams, E: float, seed: int, index: int, max_tries: int) -> PhaseState:
    rng = ic_stream(seed, index)
    ymax = y_extent(p, E)
    pmax = math.sqrt(2.0 * E)
    batch = 256
    tried = 0
    while tried < max_tries:
        ys = rng.uniform(-ymax, ymax, batch)
        ps = rng.uniform(-pmax, pmax, batch)
        tried += batch
        ok = np.flatnonzero(accessible_margin(p, E, ys, ps) > 0.0)
        if ok.size:
            y = float(ys[ok[0]])
            py = float(ps[ok[0]])
            px = math.sqrt(2.0 * (E - potential(p, 0.0, y)) - py * py)
            return PhaseState(0.0, y, px, py)
    raise RejectionStall(f"no accepted sample in {tried} draws for ic {index}")


def sample_ics(p: ModelParams, E: float, n: int, seed: int) -> list[PhaseState]:
    """``n`` states on ``x = 0`` with ``H = E`` and ``px > 0``.

    ``(y, py)`` is uniform on the accessible region of the section; each state
    ``i`` uses its own stream, so the list does not depend on ``n`` beyond
    truncation.
    """
    if not E > section_min_potential(p):
        raise EmptyRegion(f"E={E} is not above the section minimum {section_min_potential(p)}")
    if n < 0:
        raise DomainError("n must be >= 0")
    return [_sample_one(p, E, seed, i, int(1 / MIN_ACCEPTANCE)) for i in range(n)]


@dataclass(frozen=True)
class SectionPoint:
    y: float
    py: float
    t: float
    ic_index: int


@dataclass
class SectionRun:
    params: ModelParams
    energy: float
    seed: int | None
    n_ic: int
    t_max: float
    points: list[SectionPoint]
    ics: list[PhaseState]
    drifts: list[float] = field(default_factory=list)
    failures: dict[int, str] = field(default_factory=dict)
    direction: int = 1

    def as_array(self) -> np.ndarray:
        """Points as an ``(n, 4)`` array with columns ``ic_index, t, y, py``."""
        if not self.points:
            return np.empty((0, 4))
        return np.array([(q.ic_index, q.t, q.y, q.py) for q in self.points], dtype=float)


def _section_one(p, ics, t_max, cfg, ev):
    def run(i, ic):
        try:
            times, states, drift = integrate_events_arrays(p, ic, (0.0, t_max), cfg, ev)
        except TwoCenterError as exc:
            return i, None, None, float("nan"), f"{type(exc).__name__}: {exc}"
        return i, times, states, drift, None
    return run


def poincare_section(p: ModelParams, E: float, ics, t_max: float,
                     cfg: IntegratorConfig = DEFAULT_CONFIG, direction: int = 1,
                     seed: int | None = None, threads: int | None = None) -> SectionRun:
    """Collect oriented crossings of ``x = 0`` for every initial condition.

    Integration failures are recorded per initial condition in
    ``SectionRun.failures`` and do not abort the batch.
    """
    ics = [PhaseState.from_array(np.asarray(tuple(s), float)) for s in ics]
    ev = EventSpec(direction)
    results = map_ordered(_section_one(p, ics, t_max, cfg, ev), ics, threads)
    points: list[SectionPoint] = []
    drifts: list[float] = []
    failures: dict[int, str] = {}
    for i, times, states, drift, err in results:
        drifts.append(drift)
        if err is not None:
            failures[i] = err
            continue
        for t, s in zip(times, states):
            points.append(SectionPoint(y=float(s[1]), py=float(s[3]), t=float(t), ic_index=i))
    return SectionRun(params=p, energy=float(E), seed=seed, n_ic=len(ics), t_max=float(t_max),
                      points=points, ics=ics, drifts=drifts, failures=failures, direction=direction)


def energy_from_units(p: ModelParams, energy: float | None = None, in_Es: float | None = None) -> float:
    """Absolute energy from either an absolute value or a multiple of ``E_s``."""
    if (energy is None) == (in_Es is None):
        raise DomainError("give exactly one of energy or in_Es")
    return float(energy) if energy is not None else float(in_Es) * p.E_s


def energy_check(p: ModelParams, ics, E: float) -> float:
    return max((abs(hamiltonian(p, s) - E) for s in ics), default=0.0)
