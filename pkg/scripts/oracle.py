"""Reference values by adaptive quadrature, independent of the package.

Prints the numbers frozen into tests/test_oracles.py.  Everything here is built
from the closed-form generalized eigenfunctions; no FFTs, no lattice.
"""
import numpy as np
from scipy.integrate import quad


def coeffs(xi, q):
    d = 1j * xi - q
    return 1j * xi / d, q / d


def f_plus(x, xi, q):
    t, r = coeffs(xi, q)
    if x >= 0:
        return np.exp(1j * x * xi)
    return np.exp(1j * x * xi) / t + r / t * np.exp(-1j * x * xi)


def psi(x, xi, q):
    if xi >= 0:
        return coeffs(xi, q)[0] * f_plus(x, xi, q)
    return coeffs(-xi, q)[0] * f_plus(-x, -xi, q)


def cquad(fn, a, b):
    re = quad(lambda y: fn(y).real, a, b, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    im = quad(lambda y: fn(y).imag, a, b, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    return re + 1j * im


def forward(phi, xi, q):
    k = lambda y: psi(y, -xi, q) * phi(y) / np.sqrt(2 * np.pi)
    return cquad(k, -30, 0) + cquad(k, 0, 30)


def evolve_point(phi, x, t, q):
    """exp(-itH_q) phi at x via the spectral integral of the generalized eigenfunctions."""
    k = lambda xi: psi(x, xi, q) * np.exp(-0.5j * t * xi * xi) * forward(phi, xi, q) / np.sqrt(2 * np.pi)
    return cquad(k, -12, 0) + cquad(k, 0, 12)


def main():
    phi = lambda y: np.exp(-((y - 1.0) ** 2) / 2)
    print("forward, gaussian centred at 1, q = 1")
    for xi in (-2.0, -0.5, 0.5, 2.0):
        v = forward(phi, xi, 1.0)
        print(f"    ({xi}, {v.real!r}, {v.imag!r}),")
    print("evolved, t = 0.5, q = 1")
    for x in (-1.0, 0.0, 1.5):
        v = evolve_point(phi, x, 0.5, 1.0)
        print(f"    ({x}, {v.real!r}, {v.imag!r}),")


if __name__ == "__main__":
    main()
