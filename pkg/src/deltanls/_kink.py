"""Derivative-jump handling at the origin.

Fields tied to the delta interaction are smooth on each half-line but carry
jumps (of the value or of derivatives) at x = 0.  A plain FFT sees such a jump
as O(dx^2) error.  The remedy used throughout is a carrier: a known function

    K(x) = sum_m c_m * sgn(x)/2 * x^m * exp(-x^2 / (2 sigma^2))

with the same one-sided Taylor jumps, whose transform is available in closed
form through Dawson's integral.  Subtracting K leaves a remainder that the FFT
handles to high order.
"""
from __future__ import annotations

from math import factorial

import numpy as np
from scipy.special import dawsn

from .core import ft, reflect

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def taylor_onesided(v: np.ndarray, dx: float, deg: int, npts: int) -> np.ndarray:
    """Taylor coefficients at v[0] of samples v[0], v[1], ... spaced by dx.

    Least squares on a Vandermonde matrix in the scaled abscissa s in [0, 1]
    (unscaled matrices are hopeless beyond degree ~10).
    """
    h = (npts - 1) * dx
    s = np.arange(npts) / (npts - 1.0)
    V = np.vander(s, deg + 1, increasing=True)
    coef = np.linalg.lstsq(V, v[:npts], rcond=None)[0]
    return coef / h ** np.arange(deg + 1)


def jumps(f: np.ndarray, j0: int, dx: float, M: int, deg: int = 16, npts: int = 24,
          left0=None, right0=None) -> np.ndarray:
    """Jumps f^(k)(0+) - f^(k)(0-) for k = 0..M from one-sided fits.

    ``left0``/``right0`` override the sample at the origin when it belongs to
    only one side (e.g. for 1_+ f the left limit is 0 and the right limit is f(0)).
    """
    right = np.array(f[j0 : j0 + npts], dtype=complex)
    left = np.array(f[j0 - npts + 1 : j0 + 1][::-1], dtype=complex)
    if right0 is not None:
        right[0] = right0
    if left0 is not None:
        left[0] = left0
    dR = taylor_onesided(right, dx, deg, npts)
    dL = taylor_onesided(left, dx, deg, npts)
    k = np.arange(deg + 1)
    fac = np.array([factorial(i) for i in k], float)
    return (dR * fac - dL * fac * (-1.0) ** k)[: M + 1]


def carrier_coeffs(J: np.ndarray, sigma: float) -> np.ndarray:
    """Coefficients c_m so that the carrier has derivative jumps J[k] at 0."""
    M = len(J) - 1
    c = np.zeros(M + 1, complex)
    for k in range(M + 1):
        acc = 0.0
        for m in range(k % 2, k, 2):
            j = (k - m) // 2
            acc += c[m] * factorial(k) * (-1) ** j / ((2 * sigma**2) ** j * factorial(j))
        c[k] = (J[k] - acc) / factorial(k)
    return c


def carrier_eval(x: np.ndarray, c: np.ndarray, sigma: float) -> np.ndarray:
    x = np.asarray(x, float)
    out = np.zeros(x.shape, complex)
    # the envelope underflows beyond ~39 sigma
    near = np.abs(x) < 40 * sigma
    xs = x[near]
    acc = np.zeros(xs.shape, complex)
    for cm in c[::-1]:
        acc = acc * xs + cm
    out[near] = 0.5 * np.sign(xs) * acc * np.exp(-(xs**2) / (2 * sigma**2))
    return out


def carrier_ft(xi: np.ndarray, c: np.ndarray, sigma: float) -> np.ndarray:
    """Exact unitary Fourier transform of :func:`carrier_eval`.

    Uses D' = 1 - 2zD and D^(k+1) = -2z D^(k) - 2k D^(k-1) for Dawson's D.
    """
    z = sigma * np.asarray(xi, float) / np.sqrt(2.0)
    M = len(c) - 1
    D = [dawsn(z)]
    if M >= 1:
        D.append(1 - 2 * z * D[0])
    for k in range(1, M):
        D.append(-2 * z * D[k] - 2 * k * D[k - 1])
    out = np.zeros(z.shape, complex)
    pref = -2j * sigma / np.sqrt(np.pi)
    for m, cm in enumerate(c):
        if cm != 0:
            out += cm * 0.5 * (1j) ** m * pref * (sigma / np.sqrt(2.0)) ** m * D[m]
    return out


class KinkSplit:
    """f = remainder + carrier, with the remainder smooth through the origin."""

    def __init__(self, f: np.ndarray, x: np.ndarray, dx: float, M: int = 7, sigma: float | None = None,
                 left0=None, right0=None, deg: int = 16, npts: int = 24):
        j0 = len(f) // 2
        self.sigma = sigma if sigma is not None else 4 * dx
        self.c = carrier_coeffs(jumps(f, j0, dx, M, deg, npts, left0, right0), self.sigma)
        self.remainder = np.asarray(f, complex) - carrier_eval(x, self.c, self.sigma)
        if left0 is not None or right0 is not None:
            a = f[j0] if left0 is None else left0
            b = f[j0] if right0 is None else right0
            # the carrier vanishes at 0, so the remainder takes the two-sided mean
            self.remainder[j0] = 0.5 * (a + b)

    def ft(self, xi: np.ndarray, dx: float, reflected: bool = False) -> np.ndarray:
        """Transform at xi (or at -xi when ``reflected``)."""
        R = ft(self.remainder, dx)
        if reflected:
            return reflect(R) + carrier_ft(-xi, self.c, self.sigma)
        return R + carrier_ft(xi, self.c, self.sigma)


def ft_kink(f: np.ndarray, x: np.ndarray, dx: float, xi: np.ndarray, M: int = 7, **kw) -> np.ndarray:
    """Fourier transform of a field with jumps at the origin."""
    return KinkSplit(f, x, dx, M, **kw).ft(xi, dx)


def cell_integrals_left(c: np.ndarray, sigma: float, q: float, x: np.ndarray, dx: float,
                        jlo: int, j0: int) -> np.ndarray:
    """int_{x_j}^{x_j+dx} exp(q(x_j - y)) K(y) dy for jlo <= j < j0, by Gauss-Legendre."""
    xj = x[jlo:j0]
    yy = xj[:, None] + 0.5 * dx * (GL_NODES[None, :] + 1)
    K = carrier_eval(yy.ravel(), c, sigma).reshape(yy.shape)
    return (K * np.exp(q * (xj[:, None] - yy)) * GL_WEIGHTS[None, :]).sum(1) * 0.5 * dx

