"""Closed-form and semi-analytic solutions of the single-excitation system.

With one excitation and no pump photon the amplitudes ``(q1, f1, q2, f2)``
of ``|1000>, |0100>, |0010>, |0001>`` obey ``i x' = M x`` with

    M = [[0, lam, 0,   0],
         [lam, 0, 0,   J],
         [0,   0, 0, lam],
         [0,   J, lam, 0]]

(interaction picture; the free energy is a common phase). Three routes are
provided: hyperbolic closed forms for ``x(0) = |1000>``, exact
diagonalisation for any ``x(0)``, and the rational Laplace images.

Sign convention of the Laplace images: ``laplace_image`` returns the four
rational functions in their conventional textbook form, and those equal
the *negated* transform, ``-int_0^inf exp(-s t) x(t) dt``. This is settled symbolically
(solving ``s X - x(0) = -i M X``) and numerically by
``quadrature_laplace_check``; use ``laplace_transform`` for the standard
sign.
"""
from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import NumericalError, PoleError, SmallCouplingError, ValidationError

SMALL_J = 1e-6


class XiPair(NamedTuple):
    xi_plus: complex
    xi_minus: complex


class FourAmplitudes(NamedTuple):
    q1: complex
    f1: complex
    q2: complex
    f2: complex

    def probabilities(self) -> np.ndarray:
        return np.abs(np.asarray(self, dtype=complex)) ** 2


def coupling_matrix(J: float, lam: float) -> np.ndarray:
    return np.array(
        [[0, lam, 0, 0], [lam, 0, 0, J], [0, 0, 0, lam], [0, J, lam, 0]], dtype=float
    )


def xi_pm(J: float, lam: float) -> XiPair:
    if J < 0 or lam < 0:
        raise ValidationError("J and lambda must be >= 0")
    inner = np.sqrt(J**4 + 4 * J**2 * lam**2)
    minus_sq = -(J**2) - 2 * lam**2 - inner
    # xi_plus^2 * xi_minus^2 = 4 lam^4, which sidesteps the cancellation in
    # -J^2 - 2 lam^2 + inner when lam << J
    plus_sq = 4 * lam**4 / minus_sq if minus_sq != 0 else 0.0
    return XiPair(np.sqrt(complex(plus_sq)), np.sqrt(complex(minus_sq)))


def closed_form_probs(t, J: float, lam: float, xi: XiPair | None = None) -> np.ndarray:
    """``(|q1|^2, |f1|^2, |q2|^2, |f2|^2)`` at ``t`` for ``x(0) = |1000>``.

    ``t`` may be an array, giving shape ``(4, len(t))``. ``xi`` overrides
    the principal roots (the result does not depend on their signs).
    """
    if J <= 0 or J < SMALL_J * lam:
        raise SmallCouplingError(
            f"closed forms are singular for J={J!r} (J < {SMALL_J:g} lambda); use eigen_solve"
        )
    xp, xm = xi if xi is not None else xi_pm(J, lam)
    a = np.asarray(t, dtype=float) / np.sqrt(2)
    ch_p, ch_m = np.cosh(a * xp), np.cosh(a * xm)
    sh_p, sh_m = np.sinh(a * xp), np.sinh(a * xm)
    l2 = lam**2
    s = J**2 + 4 * l2
    q1 = ((xp**2 + 2 * l2) * ch_m - (xm**2 + 2 * l2) * ch_p) ** 2 / (4 * (J**4 + 4 * l2 * J**2))
    q2 = (xp * sh_m - xm * sh_p) ** 2 / (2 * s)
    f1 = (l2 * (sh_m**2 + sh_p**2) - xm * xp * sh_p * sh_m) / s
    f2 = l2 * (ch_m - ch_p) ** 2 / s
    return np.abs(np.array([q1, f1, q2, f2]))


def eigen_solve(t, J: float, lam: float, init) -> np.ndarray:
    """``exp(-i M t) x(0)``: complex amplitudes, shape ``(4,)`` or ``(4, len(t))``."""
    x0 = np.asarray(init, dtype=complex)
    evals, vecs = np.linalg.eigh(coupling_matrix(J, lam))
    coeffs = vecs.T @ x0
    tt = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.outer(evals, np.atleast_1d(tt)))
    out = vecs @ (coeffs[:, None] * phases)
    return out[:, 0] if tt.ndim == 0 else out


def _denominator(s, J, lam):
    return J**2 * s**2 + lam**4 + 2 * lam**2 * s**2 + s**4


def laplace_image(s: complex, J: float, lam: float, init) -> np.ndarray:
    """The four rational images ``(Q1, F1, Q2, F2)(s)``; equal to minus the transform."""
    q1, f1, q2, f2 = np.asarray(init, dtype=complex)
    den = _denominator(s, J, lam)
    if abs(den) < 1e-12:
        raise PoleError(f"s={s!r} is a pole of the Laplace images")
    l2 = lam**2
    Q1 = (-1j * J * l2 * q2 + J * lam * f2 * s + 1j * lam * f1 * (l2 + s**2)) / den \
        - q1 * s * (J**2 + l2 + s**2) / den
    F1 = (J * lam * q2 * s + 1j * J * f2 * s**2 + 1j * lam * q1 * (l2 + s**2)) / den \
        - f1 * s * (l2 + s**2) / den
    Q2 = (-1j * J * l2 * q1 + J * lam * f1 * s + 1j * lam * f2 * (l2 + s**2)) / den \
        - q2 * s * (J**2 + l2 + s**2) / den
    F2 = (J * lam * q1 * s + 1j * J * f1 * s**2 + 1j * lam * q2 * (l2 + s**2)) / den \
        - f2 * s * (l2 + s**2) / den
    return np.array([Q1, F1, Q2, F2])


def laplace_transform(s: complex, J: float, lam: float, init) -> np.ndarray:
    """Standard-sign transform ``int_0^inf exp(-s t) x(t) dt``."""
    return -laplace_image(s, J, lam, init)


def quadrature_laplace_check(J, lam, init, s_list, T=None) -> float:
    """Max relative deviation between quadrature of ``exp(-s t) x(t)`` and the images.

    ``x(t)`` comes from ``eigen_solve``; relative means divided by the
    largest image component at that ``s``.
    """
    worst = 0.0
    for s in s_list:
        s = complex(s)
        if s.real <= 0:
            raise ValidationError(f"quadrature needs Re(s) > 0, got {s!r}")
        horizon = T if T is not None else 12 * np.log(10) / s.real
        if np.exp(-s.real * horizon) > 1e-12:
            raise ValidationError(f"T={horizon!r} too short for Re(s)={s.real!r}")
        expected = laplace_transform(s, J, lam, init)
        # split at the oscillation scale so quad sees smooth pieces
        freq = max(np.abs(np.linalg.eigvalsh(coupling_matrix(J, lam))).max(), abs(s.imag), 1.0)
        n_pieces = int(np.ceil(horizon * freq / np.pi)) + 1
        edges = np.linspace(0.0, horizon, n_pieces + 1)
        got = np.zeros(4, dtype=complex)
        for comp in range(4):
            def integrand(t, comp=comp):
                return np.exp(-s * t) * eigen_solve(t, J, lam, init)[comp]
            total = 0j
            for lo, hi in zip(edges[:-1], edges[1:]):
                with warnings.catch_warnings():
                    warnings.simplefilter("error", integrate.IntegrationWarning)
                    try:
                        val, _ = integrate.quad(integrand, lo, hi, complex_func=True,
                                                epsabs=1e-13, epsrel=1e-12, limit=200)
                    except integrate.IntegrationWarning as exc:
                        raise NumericalError(f"quadrature did not converge: {exc}") from exc
                total += val
            got[comp] = total
        scale = np.abs(expected).max()
        worst = max(worst, float(np.abs(got - expected).max() / scale))
    return worst
