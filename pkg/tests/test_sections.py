import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from twocenter.errors import DomainError, EmptyRegion
from twocenter.model import ModelParams, PhaseState, hamiltonian, potential
from twocenter.sections import (THREADS_ENV, accessible_margin, energy_check, energy_from_units, ic_stream,
                                map_ordered, poincare_section, resolve_threads, sample_ics, section_potential,
                                y_extent, y_gap)


def test_stream_is_keyed_and_reproducible():
    a = ic_stream(3, 5).random(4)
    assert np.array_equal(a, ic_stream(3, 5).random(4))
    assert not np.array_equal(a, ic_stream(3, 6).random(4))
    assert not np.array_equal(a, ic_stream(4, 5).random(4))
    assert not np.array_equal(a, ic_stream(3, 5, purpose=1).random(4))


def test_section_potential_matches_model():
    p = ModelParams(1.7)
    for y in (-2.0, 0.0, 0.4, 3.0):
        assert section_potential(p, y) == pytest.approx(potential(p, 0.0, y))


@given(st.floats(1.1, 5.0), st.floats(0.05, 5.0))
def test_extent_and_gap_against_root_finding(a, units):
    p = ModelParams(a)
    E = units * p.E_s
    f = lambda y: section_potential(p, y) - E
    ymax = y_extent(p, E)
    assert f(ymax) == pytest.approx(0.0, abs=1e-9 * max(1, E))
    assert ymax == pytest.approx(brentq(f, p.g, 100.0, xtol=1e-14), abs=1e-9)
    gap = y_gap(p, E)
    if E < p.E_s:
        assert gap == pytest.approx(brentq(f, 0.0, p.g, xtol=1e-14), abs=1e-9)
    else:
        assert gap == 0.0


@given(st.floats(0.0, 5.0).filter(lambda a: abs(a - 1) > 1e-3), st.floats(0.1, 5.0), st.integers(0, 1000))
def test_samples_lie_on_the_shell(a, units, seed):
    p = ModelParams(a)
    E = units * max(p.E_s, 0.05) + (0.0 if a > 1 else p.E_s)
    ics = sample_ics(p, E, 6, seed)
    for s in ics:
        assert s.x == 0.0 and s.px > 0
        assert hamiltonian(p, s) == pytest.approx(E, rel=1e-12, abs=1e-12)
        assert accessible_margin(p, E, s.y, s.py) > 0
    assert energy_check(p, ics, E) < 1e-12


def test_samples_prefix_stable():
    p = ModelParams(2.0)
    assert sample_ics(p, 1.0, 5, 9) == sample_ics(p, 1.0, 12, 9)[:5]


def test_samples_cover_region_uniformly():
    # area fractions: the |y| < 1 strip versus its share of the region
    p = ModelParams(0.0)
    E = 4.0
    ics = sample_ics(p, E, 4000, 1)
    ys = np.array([s.y for s in ics])
    grid = np.linspace(-y_extent(p, E), y_extent(p, E), 20001)
    width = 2 * np.sqrt(np.clip(2 * (E - section_potential(p, grid)), 0, None))
    frac = trapezoid(width * (np.abs(grid) < 1), grid) / trapezoid(width, grid)
    assert np.mean(np.abs(ys) < 1) == pytest.approx(frac, abs=0.03)


@pytest.mark.parametrize("a,E", [(2.0, 0.0), (0.5, 0.2), (0.5, 0.25)])
def test_empty_region(a, E):
    with pytest.raises(EmptyRegion):
        sample_ics(ModelParams(a), E, 3, 0)


def test_section_points_respect_region_and_gap():
    p = ModelParams(1.5)
    E = 0.5 * p.E_s
    run = poincare_section(p, E, sample_ics(p, E, 8, 7), 500.0, seed=7)
    assert not run.failures
    arr = run.as_array()
    assert arr.shape[1] == 4 and len(arr) > 50
    assert np.all(accessible_margin(p, E, arr[:, 2], arr[:, 3]) >= -1e-8)
    assert np.all(np.abs(arr[:, 2]) >= y_gap(p, E) - 1e-9)
    assert max(run.drifts) < 1e-9
    # points grouped by ic in input order, time-ordered within each ic
    assert np.all(np.diff(arr[:, 0]) >= 0)
    for i in range(8):
        t = arr[arr[:, 0] == i, 1]
        assert np.all(np.diff(t) > 0)


def test_section_thread_independence():
    p = ModelParams(2.0)
    E = 0.99 * p.E_s
    ics = sample_ics(p, E, 10, 3)
    r1 = poincare_section(p, E, ics, 300.0, threads=1)
    r4 = poincare_section(p, E, ics, 300.0, threads=4)
    assert np.array_equal(r1.as_array(), r4.as_array())


def test_section_records_failures_without_aborting():
    p = ModelParams(2.0)
    good = sample_ics(p, 1.0, 2, 0)
    bad = PhaseState(1.0, 0.0, 0.0, 0.0)
    run = poincare_section(p, 1.0, [good[0], bad, good[1]], 100.0)
    assert list(run.failures) == [1]
    assert "SingularCenter" in run.failures[1]
    assert {q.ic_index for q in run.points} == {0, 2}


def test_map_ordered_keeps_order():
    out = map_ordered(lambda i, x: (i, x * x), range(20), threads=4)
    assert out == [(i, i * i) for i in range(20)]


def test_thread_env_override(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_threads(8) == 3
    monkeypatch.delenv(THREADS_ENV)
    assert resolve_threads(None) == 1
    assert resolve_threads(5) == 5


def test_energy_units():
    p = ModelParams(3.0)
    assert energy_from_units(p, in_Es=0.5) == 2.0
    assert energy_from_units(p, energy=1.25) == 1.25
    with pytest.raises(DomainError):
        energy_from_units(p)
    with pytest.raises(DomainError):
        energy_from_units(p, 1.0, 1.0)
