"""Compiled right-hand sides and an adaptive DOP853 driver.

Everything here works on flat float arrays so numba can compile it with
``nogil=True``; the public wrappers live in :mod:`twocenter.integrator`.

State layouts (``mode``):

* 0 -- ``(x, y, px, py)``
* 1 -- state followed by the 4x4 variational matrix, row-major (20 values)
* 2 -- state followed by one tangent vector (8 values)
"""

import math

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

SINGULAR_DISTANCE = 1e-12

N_STAGES = _dop.N_STAGES  # 12
A = np.ascontiguousarray(_dop.A, dtype=np.float64)
B = np.ascontiguousarray(_dop.B, dtype=np.float64)
C = np.ascontiguousarray(_dop.C, dtype=np.float64)
E3 = np.ascontiguousarray(_dop.E3, dtype=np.float64)
E5 = np.ascontiguousarray(_dop.E5, dtype=np.float64)
D = np.ascontiguousarray(_dop.D, dtype=np.float64)
INTERP_POWER = _dop.INTERPOLATOR_POWER  # 7

OK = 0
SINGULAR = 1
UNDERFLOW = 2
MAX_STEPS = 3

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
# PI controller exponents for an 8th-order pair
BETA = 0.04
ALPHA = 1.0 / 8.0 - 0.75 * BETA


@njit(cache=True, nogil=True)
def hessian(a, x, y):
    """Potential Hessian entries ``(uxx, uxy, uyy)`` at a non-singular point."""
    if a == 0.0:
        return 2.0, 0.0, 2.0
    r1 = math.hypot(x + 1.0, y)
    r2 = math.hypot(x - 1.0, y)
    p1 = a / (r1 * r1 * r1)
    p2 = a / (r2 * r2 * r2)
    d1 = x + 1.0
    d2 = x - 1.0
    uxx = 2.0 - a / r1 - a / r2 + p1 * d1 * d1 + p2 * d2 * d2
    uyy = 2.0 - a / r1 - a / r2 + (p1 + p2) * y * y
    uxy = (p1 * d1 + p2 * d2) * y
    return uxx, uxy, uyy


@njit(cache=True, nogil=True)
def rhs(mode, a, y, out):
    """Evaluate the vector field for the given layout; False on a singular state."""
    x = y[0]
    yy = y[1]
    r1 = math.hypot(x + 1.0, yy)
    r2 = math.hypot(x - 1.0, yy)
    if a != 0.0 and (r1 <= SINGULAR_DISTANCE or r2 <= SINGULAR_DISTANCE):
        return False
    out[0] = y[2]
    out[1] = y[3]
    if a == 0.0:
        out[2] = -2.0 * x
        out[3] = -2.0 * yy
    else:
        out[2] = -2.0 * x + a * ((x + 1.0) / r1 + (x - 1.0) / r2)
        out[3] = -2.0 * yy + a * yy * (1.0 / r1 + 1.0 / r2)
    if mode == 0:
        return True
    kxx, kxy, kyy = hessian(a, x, yy)
    if mode == 1:
        # dM/dt = J M with J = [[0, I], [-K, 0]]
        for j in range(4):
            m0 = y[4 + j]
            m1 = y[8 + j]
            out[4 + j] = y[12 + j]
            out[8 + j] = y[16 + j]
            out[12 + j] = -(kxx * m0 + kxy * m1)
            out[16 + j] = -(kxy * m0 + kyy * m1)
    else:
        out[4] = y[6]
        out[5] = y[7]
        out[6] = -(kxx * y[4] + kxy * y[5])
        out[7] = -(kxy * y[4] + kyy * y[5])
    return True


@njit(cache=True, nogil=True)
def energy(a, y):
    r1 = math.hypot(y[0] + 1.0, y[1])
    r2 = math.hypot(y[0] - 1.0, y[1])
    return 0.5 * (y[2] * y[2] + y[3] * y[3]) + 0.5 * ((r1 - a) ** 2 + (r2 - a) ** 2)


@njit(cache=True, nogil=True)
def _step(mode, a, t, y, f, h, rtol, atol, K, y_new, f_new):
    """One DOP853 step. Returns (ok, error_norm)."""
    n = y.shape[0]
    K[0, :] = f
    tmp = np.empty(n)
    for s in range(1, N_STAGES):
        for i in range(n):
            acc = 0.0
            for j in range(s):
                acc += A[s, j] * K[j, i]
            tmp[i] = y[i] + h * acc
        if not rhs(mode, a, tmp, K[s]):
            return False, 0.0
    for i in range(n):
        acc = 0.0
        for j in range(N_STAGES):
            acc += B[j] * K[j, i]
        y_new[i] = y[i] + h * acc
    if not rhs(mode, a, y_new, f_new):
        return False, 0.0
    K[N_STAGES, :] = f_new
    e5 = 0.0
    e3 = 0.0
    for i in range(n):
        sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
        a5 = 0.0
        a3 = 0.0
        for j in range(N_STAGES + 1):
            a5 += E5[j] * K[j, i]
            a3 += E3[j] * K[j, i]
        e5 += (a5 / sc) ** 2
        e3 += (a3 / sc) ** 2
    if e5 == 0.0 and e3 == 0.0:
        return True, 0.0
    err = abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * n)
    return True, err


@njit(cache=True, nogil=True)
def _dense_coeffs(mode, a, t, y, y_new, f_new, h, K, F):
    """Fill the 7 x n interpolation coefficients for the last step."""
    n = y.shape[0]
    tmp = np.empty(n)
    for s in range(N_STAGES + 1, A.shape[0]):
        for i in range(n):
            acc = 0.0
            for j in range(s):
                acc += A[s, j] * K[j, i]
            tmp[i] = y[i] + h * acc
        rhs(mode, a, tmp, K[s])
    for i in range(n):
        dy = y_new[i] - y[i]
        F[0, i] = dy
        F[1, i] = h * K[0, i] - dy
        F[2, i] = 2.0 * dy - h * (f_new[i] + K[0, i])
        for r in range(4):
            acc = 0.0
            for j in range(A.shape[0]):
                acc += D[r, j] * K[j, i]
            F[3 + r, i] = h * acc


@njit(cache=True, nogil=True)
def _dense_eval(theta, y, F, out):
    n = y.shape[0]
    for i in range(n):
        v = 0.0
        for k in range(INTERP_POWER):
            v += F[INTERP_POWER - 1 - k, i]
            if k % 2 == 0:
                v *= theta
            else:
                v *= 1.0 - theta
        out[i] = v + y[i]


@njit(cache=True, nogil=True)
def _dense_x(theta, y, F):
    v = 0.0
    for k in range(INTERP_POWER):
        v += F[INTERP_POWER - 1 - k, 0]
        if k % 2 == 0:
            v *= theta
        else:
            v *= 1.0 - theta
    return v + y[0]


@njit(cache=True, nogil=True)
def _initial_step(mode, a, t0, y0, f0, direction, rtol, atol, max_step):
    n = y0.shape[0]
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + abs(y0[i]) * rtol
        d0 += (y0[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = math.sqrt(d0 / n)
    d1 = math.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + direction * h0 * f0
    f1 = np.empty(n)
    if not rhs(mode, a, y1, f1):
        return min(h0, max_step)
    d2 = 0.0
    for i in range(n):
        sc = atol + abs(y0[i]) * rtol
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = math.sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1, max_step)


@njit(cache=True, nogil=True)
def _grow(arr, n_used):
    new = np.empty((max(2 * arr.shape[0], 16), arr.shape[1]))
    new[:n_used] = arr[:n_used]
    return new


@njit(cache=True, nogil=True)
def solve(mode, a, y0, t0, t1, rtol, atol, max_step, t_eval, record_steps,
          event_dir, detect_events, max_steps):
    """Integrate from ``t0`` to ``t1`` (either direction).

    Returns
    -------
    status, y_final, eval_states, step_times, step_states, event_times,
    event_states, energy_drift, n_steps
    """
    n = y0.shape[0]
    direction = 1.0 if t1 >= t0 else -1.0
    y = y0.copy()
    f = np.empty(n)
    y_new = np.empty(n)
    f_new = np.empty(n)
    K = np.empty((A.shape[0], n))
    F = np.empty((INTERP_POWER, n))
    work = np.empty(n)

    eval_states = np.empty((t_eval.shape[0], n))
    n_eval = 0
    step_times = np.empty((16, 1))
    step_states = np.empty((16, 4))
    n_rec = 0
    ev_times = np.empty((16, 1))
    ev_states = np.empty((16, n))
    n_ev = 0

    e0 = energy(a, y)
    drift = 0.0
    n_steps = 0
    status = OK

    # samples sitting exactly at t0
    while n_eval < t_eval.shape[0] and t_eval[n_eval] == t0:
        eval_states[n_eval] = y
        n_eval += 1
    if record_steps:
        step_times[0, 0] = t0
        step_states[0] = y[:4]
        n_rec = 1

    if t1 == t0:
        return (status, y, eval_states[:n_eval], step_times[:n_rec, 0], step_states[:n_rec],
                ev_times[:n_ev, 0], ev_states[:n_ev], drift, n_steps)

    if not rhs(mode, a, y, f):
        return (SINGULAR, y, eval_states[:n_eval], step_times[:n_rec, 0], step_states[:n_rec],
                ev_times[:n_ev, 0], ev_states[:n_ev], drift, n_steps)

    h = _initial_step(mode, a, t0, y, f, direction, rtol, atol, max_step)
    err_old = 1e-4
    t = t0
    span = abs(t1 - t0)
    while direction * (t1 - t) > 0.0:
        if n_steps >= max_steps:
            status = MAX_STEPS
            break
        h = min(h, max_step)
        min_h = 10.0 * np.spacing(max(abs(t), span))
        if h < min_h:
            status = UNDERFLOW
            break
        last = False
        if h >= direction * (t1 - t):
            h = direction * (t1 - t)
            last = True
        hs = direction * h
        ok, err = _step(mode, a, t, y, f, hs, rtol, atol, K, y_new, f_new)
        if not ok:
            # a stage landed on a center: retry smaller, unless already tiny
            h *= 0.25
            if h < min_h:
                status = SINGULAR
                break
            continue
        if err > 1.0:
            h *= max(MIN_FACTOR, SAFETY * err ** (-ALPHA))
            continue
        # accepted
        t_new = t1 if last else t + hs
        n_steps += 1
        dense_ready = False
        if detect_events:
            g0 = y[0]
            g1 = y_new[0]
            crossed = False
            if event_dir >= 0 and g0 < 0.0 and g1 >= 0.0:
                crossed = True
            if event_dir <= 0 and g0 > 0.0 and g1 <= 0.0:
                crossed = True
            if crossed:
                _dense_coeffs(mode, a, t, y, y_new, f_new, hs, K, F)
                dense_ready = True
                lo = 0.0
                hi = 1.0
                glo = g0
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    if mid <= lo or mid >= hi:
                        break
                    gm = _dense_x(mid, y, F)
                    if gm == 0.0:
                        lo = mid
                        hi = mid
                        break
                    if (gm < 0.0) == (glo < 0.0):
                        lo = mid
                        glo = gm
                    else:
                        hi = mid
                    if abs(hs) * (hi - lo) < 1e-15:
                        break
                glo_v = _dense_x(lo, y, F)
                ghi_v = _dense_x(hi, y, F)
                th = lo if abs(glo_v) <= abs(ghi_v) else hi
                _dense_eval(th, y, F, work)
                # discard tangential contacts
                if work[2] != 0.0 and (event_dir == 0 or work[2] * event_dir > 0.0):
                    if n_ev >= ev_times.shape[0]:
                        ev_times = _grow(ev_times, n_ev)
                        ev_states = _grow(ev_states, n_ev)
                    ev_times[n_ev, 0] = t + th * hs
                    ev_states[n_ev] = work
                    n_ev += 1
        while n_eval < t_eval.shape[0] and direction * (t_eval[n_eval] - t_new) <= 0.0:
            if not dense_ready:
                _dense_coeffs(mode, a, t, y, y_new, f_new, hs, K, F)
                dense_ready = True
            te = t_eval[n_eval]
            if te == t_new:
                eval_states[n_eval] = y_new
            else:
                _dense_eval((te - t) / hs, y, F, eval_states[n_eval])
            n_eval += 1

        # PI step-size update
        if err == 0.0:
            fac = MAX_FACTOR
        else:
            fac = SAFETY * err ** (-ALPHA) * err_old ** BETA
            fac = min(MAX_FACTOR, max(MIN_FACTOR, fac))
        err_old = max(err, 1e-4)
        h = h * fac
        t = t_new
        y[:] = y_new
        f[:] = f_new
        de = abs(energy(a, y) - e0)
        if de > drift:
            drift = de
        if record_steps:
            if n_rec >= step_times.shape[0]:
                step_times = _grow(step_times, n_rec)
                step_states = _grow(step_states, n_rec)
            step_times[n_rec, 0] = t
            step_states[n_rec] = y[:4]
            n_rec += 1

    return (status, y, eval_states[:n_eval], step_times[:n_rec, 0], step_states[:n_rec],
            ev_times[:n_ev, 0], ev_states[:n_ev], drift, n_steps)
