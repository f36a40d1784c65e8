"""Adaptive Dormand-Prince 8(5,3) stepper for ``y' = (A + k(t) B) y``.

The stepper and its dense output follow Hairer's DOP853 (the same scheme
as ``scipy.integrate.DOP853``); the tableau is taken from scipy. Everything
runs inside one jitted loop because the Python-level overhead of
``solve_ivp`` dominates for a 9-dimensional state.
"""
import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _coef

N_STAGES = _coef.N_STAGES
A = np.ascontiguousarray(_coef.A, dtype=np.float64)
B = np.ascontiguousarray(_coef.B, dtype=np.float64)
C = np.ascontiguousarray(_coef.C, dtype=np.float64)
E3 = np.ascontiguousarray(_coef.E3, dtype=np.float64)
E5 = np.ascontiguousarray(_coef.E5, dtype=np.float64)
D = np.ascontiguousarray(_coef.D, dtype=np.float64)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERROR_EXPONENT = -1.0 / 8.0

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_NORM_DRIFT = 2


@njit(cache=True, nogil=True, error_model="numpy")
def _rhs(static, coupling, k0, amp, omega, t, y, out):
    k = k0 * (1.0 + amp * np.sin(omega * t))
    n = y.shape[0]
    for i in range(n):
        acc = 0j
        for j in range(n):
            acc += (static[i, j] + k * coupling[i, j]) * y[j]
        out[i] = acc


@njit(cache=True, nogil=True, error_model="numpy")
def _rms(v, scale):
    acc = 0.0
    for i in range(v.shape[0]):
        r = abs(v[i]) / scale[i]
        acc += r * r
    return np.sqrt(acc / v.shape[0])


@njit(cache=True, nogil=True, error_model="numpy")
def integrate(static, coupling, k0, amp, omega, y0, times, rtol, atol,
              max_step, drift_limit, out):
    """Integrate from ``times[0]`` through every entry of ``times``.

    ``static`` and ``coupling`` already carry the ``-i`` factor. ``times``
    must be strictly monotone in either direction. Results land in ``out``
    (``len(times) x n``). Returns ``(status, index, t_fail, n_steps,
    n_rejected)``; ``index`` is the first sample that was not written.
    """
    n = y0.shape[0]
    n_t = times.shape[0]
    for i in range(n):
        out[0, i] = y0[i]
    if n_t == 1:
        return STATUS_OK, n_t, times[0], 0, 0

    direction = 1.0 if times[n_t - 1] > times[0] else -1.0
    t_end = times[n_t - 1]
    eps = np.finfo(np.float64).eps

    K = np.zeros((16, n), dtype=np.complex128)
    y = y0.copy()
    y_new = np.empty(n, dtype=np.complex128)
    y_tmp = np.empty(n, dtype=np.complex128)
    f = np.empty(n, dtype=np.complex128)
    f1 = np.empty(n, dtype=np.complex128)
    scale = np.empty(n, dtype=np.float64)
    err5 = np.empty(n, dtype=np.complex128)
    err3 = np.empty(n, dtype=np.complex128)
    F = np.empty((7, n), dtype=np.complex128)

    t = times[0]
    _rhs(static, coupling, k0, amp, omega, t, y, f)

    # initial step (Hairer, Norsett & Wanner, II.4)
    for i in range(n):
        scale[i] = atol + abs(y[i]) * rtol
    d0 = _rms(y, scale)
    d1 = _rms(f, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(n):
        y_tmp[i] = y[i] + h0 * direction * f[i]
    _rhs(static, coupling, k0, amp, omega, t + h0 * direction, y_tmp, f1)
    for i in range(n):
        err5[i] = f1[i] - f[i]
    d2 = _rms(err5, scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    h_abs = min(100.0 * h0, h1, abs(t_end - t), max_step)

    next_sample = 1
    n_steps = 0
    n_rejected = 0
    while next_sample < n_t:
        rejected = False
        while True:
            min_step = 10.0 * eps * max(abs(t), 1e-300)
            if h_abs > max_step:
                h_abs = max_step
            if not h_abs >= min_step:  # also catches a NaN step
                return STATUS_STEP_UNDERFLOW, next_sample, t, n_steps, n_rejected
            h = h_abs * direction
            t_new = t + h
            if direction * (t_new - t_end) > 0.0:
                t_new = t_end
            h = t_new - t
            h_abs = abs(h)

            for i in range(n):
                K[0, i] = f[i]
            for s in range(1, N_STAGES):
                for i in range(n):
                    acc = 0j
                    for j in range(s):
                        acc += A[s, j] * K[j, i]
                    y_tmp[i] = y[i] + h * acc
                _rhs(static, coupling, k0, amp, omega, t + C[s] * h, y_tmp, K[s])
            for i in range(n):
                acc = 0j
                for j in range(N_STAGES):
                    acc += B[j] * K[j, i]
                y_new[i] = y[i] + h * acc
            _rhs(static, coupling, k0, amp, omega, t_new, y_new, K[N_STAGES])

            for i in range(n):
                scale[i] = atol + max(abs(y[i]), abs(y_new[i])) * rtol
                a5 = 0j
                a3 = 0j
                for j in range(N_STAGES + 1):
                    a5 += E5[j] * K[j, i]
                    a3 += E3[j] * K[j, i]
                err5[i] = a5 / scale[i]
                err3[i] = a3 / scale[i]
            e5 = 0.0
            e3 = 0.0
            for i in range(n):
                e5 += err5[i].real ** 2 + err5[i].imag ** 2
                e3 += err3[i].real ** 2 + err3[i].imag ** 2
            if e5 == 0.0 and e3 == 0.0:
                err = 0.0
            else:
                err = h_abs * e5 / np.sqrt((e5 + 0.01 * e3) * n)

            if err < 1.0:
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * err ** ERROR_EXPONENT)
                if rejected:
                    factor = min(1.0, factor)
                h_next = h_abs * factor
                break
            if np.isfinite(err):
                h_abs *= max(MIN_FACTOR, SAFETY * err ** ERROR_EXPONENT)
            else:
                # overflow in the stages: shrink hard, the underflow check ends the run
                h_abs *= MIN_FACTOR
            rejected = True
            n_rejected += 1

        n_steps += 1
        dense_ready = False
        while next_sample < n_t and direction * (times[next_sample] - t_new) <= 0.0:
            ts = times[next_sample]
            if ts == t_new:
                for i in range(n):
                    out[next_sample, i] = y_new[i]
            else:
                if not dense_ready:
                    for s in range(N_STAGES + 1, 16):
                        for i in range(n):
                            acc = 0j
                            for j in range(s):
                                acc += A[s, j] * K[j, i]
                            y_tmp[i] = y[i] + h * acc
                        _rhs(static, coupling, k0, amp, omega, t + C[s] * h, y_tmp, K[s])
                    for i in range(n):
                        dy = y_new[i] - y[i]
                        F[0, i] = dy
                        F[1, i] = h * f[i] - dy
                        F[2, i] = 2.0 * dy - h * (K[N_STAGES, i] + f[i])
                        for r in range(4):
                            acc = 0j
                            for j in range(16):
                                acc += D[r, j] * K[j, i]
                            F[3 + r, i] = h * acc
                    dense_ready = True
                x = (ts - t) / h
                for i in range(n):
                    v = 0j
                    for r in range(7):
                        v += F[6 - r, i]
                        if r % 2 == 0:
                            v *= x
                        else:
                            v *= 1.0 - x
                    out[next_sample, i] = v + y[i]
            nrm = 0.0
            for i in range(n):
                nrm += out[next_sample, i].real ** 2 + out[next_sample, i].imag ** 2
            if abs(np.sqrt(nrm) - 1.0) > drift_limit:
                return STATUS_NORM_DRIFT, next_sample, ts, n_steps, n_rejected
            next_sample += 1

        t = t_new
        for i in range(n):
            y[i] = y_new[i]
            f[i] = K[N_STAGES, i]
        h_abs = h_next

    return STATUS_OK, n_t, t, n_steps, n_rejected
