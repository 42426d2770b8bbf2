"""Independent reference computations used by the tests.

Nothing here imports otto_lab: each oracle is a separate route to the
quantity under test (closed forms, dense linear algebra, finite differences,
Gaussian algebra, arbitrary precision).
"""

import mpmath
import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import quad
from scipy.optimize import fsolve

# ---------------------------------------------------------------------------
# spectra by dense diagonalization


def fourier_diff_matrix(n, length=2 * np.pi):
    """Dense first-derivative matrix of trigonometric interpolation on n points.

    Built column by column from the derivative of the band-limited
    interpolant of each unit vector, with the Nyquist mode dropped.
    """
    k = (2 * np.pi / length) * np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    D = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        D[:, j] = np.fft.ifft(1j * k * np.fft.fft(e)).real
    return D


def fourier_second_matrix(n, length=2 * np.pi):
    """Dense second-derivative matrix (Nyquist mode kept) of trigonometric interpolation."""
    k = (2 * np.pi / length) * np.fft.fftfreq(n, 1.0 / n)
    D2 = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        D2[:, j] = np.fft.ifft(-(k**2) * np.fft.fft(e)).real
    return D2


def ou_generator_matrix(n):
    """Dense matrix of f -> f'' - x f' acting on polynomial interpolants at Hermite nodes.

    Uses the Lagrange basis through barycentric differentiation matrices,
    independent of any Hermite-function recurrence.
    """
    x, _ = hermegauss(n)
    c = np.array([1.0 / np.prod(x[j] - np.delete(x, j)) for j in range(n)])
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = (c[j] / c[i]) / (x[i] - x[j])
        D[i, i] = -np.sum(D[i])
    return x, D @ D - np.diag(x) @ D


# ---------------------------------------------------------------------------
# finite differences


def periodic_fd_first(f, h):
    return (np.roll(f, -1) - np.roll(f, 1)) / (2 * h)


def periodic_fd_second(f, h):
    return (np.roll(f, -1) - 2 * f + np.roll(f, 1)) / h**2


def heat_by_quadrature(func, theta, t, terms=60):
    """P_t func on the unit circle from the Fourier series of func (by scipy quad)."""
    out = np.zeros_like(theta, dtype=float)
    for k in range(terms):
        ck = quad(lambda s: func(s) * np.cos(k * s), 0, 2 * np.pi, limit=200)[0] / np.pi
        sk = quad(lambda s: func(s) * np.sin(k * s), 0, 2 * np.pi, limit=200)[0] / np.pi
        if k == 0:
            ck /= 2
        out += np.exp(-k * k * t) * (ck * np.cos(k * theta) + sk * np.sin(k * theta))
    return out


def mehler_expectation(func, y, t, nodes=200):
    """E func(e^{-t} y + sqrt(1 - e^{-2t}) Z), Z standard normal, by Gauss-Hermite."""
    z, w = hermegauss(nodes)
    w = w / w.sum()
    e = np.exp(-t)
    s = np.sqrt(1 - e * e)
    return np.array([np.sum(w * func(e * yy + s * z)) for yy in np.atleast_1d(y)])


# ---------------------------------------------------------------------------
# toy model closed forms


def quadratic_path(rho0, x, y, T, t):
    """Solution of X'' = rho0^2 X with X(0) = x, X(T) = y, and its velocity."""
    A = (y - x * np.exp(-rho0 * T)) / (2 * np.sinh(rho0 * T))
    B = x - A
    X = A * np.exp(rho0 * t) + B * np.exp(-rho0 * t)
    V = rho0 * (A * np.exp(rho0 * t) - B * np.exp(-rho0 * t))
    return X, V


# ---------------------------------------------------------------------------
# Gaussian Schrodinger bridge on the OU line


def mehler_quadratic(a, b, t):
    """P_t exp(a x^2 + b x) = exp(a' x^2 + b' x + c') for the OU semigroup."""
    s2 = -np.expm1(-2 * t)
    e = np.exp(-t)
    den = 1 - 2 * a * s2
    return a * e * e / den, b * e / den, -0.5 * np.log(den) + b * b * s2 / (2 * den)


def gaussian_bridge_potentials(m0, v0, m1, v1, T):
    """Exponents (a1, b1, a2, b2) of f = exp(a1 x^2 + b1 x), g = exp(a2 x^2 + b2 x).

    The marginals N(m, v) have density exp(A x^2 + B x + const) relative to
    the standard Gaussian with A = 1/2 - 1/(2v), B = m / v.
    """
    A0, B0 = 0.5 - 1 / (2 * v0), m0 / v0
    A1, B1 = 0.5 - 1 / (2 * v1), m1 / v1

    def equations(p):
        a1, b1, a2, b2 = p
        ag, bg, _ = mehler_quadratic(a2, b2, T)
        af, bf, _ = mehler_quadratic(a1, b1, T)
        return [a1 + ag - A0, b1 + bg - B0, a2 + af - A1, b2 + bf - B1]

    return tuple(fsolve(equations, [A0 / 2, B0 / 2, A1 / 2, B1 / 2], xtol=1e-13))


def gaussian_velocity_cost(p, T, t):
    """4 int Gamma(P_{T-t} g)/P_{T-t} g dmu_t for the Gaussian bridge, in closed form."""
    a1, b1, a2, b2 = p
    Aa, Ba, _ = mehler_quadratic(a1, b1, t)
    Ab, Bb, _ = mehler_quadratic(a2, b2, T - t)
    v = 1 / (1 - 2 * (Aa + Ab))
    m = (Ba + Bb) * v
    return 4 * ((2 * Ab * m + Bb) ** 2 + 4 * Ab * Ab * v)


def gaussian_entropy(m, v):
    """Entropy of N(m, v) relative to the standard Gaussian."""
    return -0.5 + (v + m * m) / 2 - 0.5 * np.log(v)


def gaussian_bridge_cost(m0, v0, m1, v1, T):
    """(Lambda, C_T) for the Gaussian bridge by adaptive quadrature of the velocity cost."""
    p = gaussian_bridge_potentials(m0, v0, m1, v1, T)
    lam = quad(lambda t: gaussian_velocity_cost(p, T, t), 0, T, epsabs=1e-13, epsrel=1e-13)[0]
    return lam, lam - 2 * (gaussian_entropy(m1, v1) - gaussian_entropy(m0, v0))


def gaussian_bridge_energy(m0, v0, m1, v1, T):
    """E_T = 4 int L(P_T g) f for the Gaussian bridge.

    With P_T g = exp(A x^2 + B x + c), L(P_T g)/P_T g = 2A + (2Ax + B)^2 - x(2Ax + B),
    and f P_T g is the first marginal N(m0, v0).
    """
    p = gaussian_bridge_potentials(m0, v0, m1, v1, T)
    A, B, _ = mehler_quadratic(p[2], p[3], T)
    ex2 = v0 + m0 * m0
    return 4 * (2 * A + 4 * A * A * ex2 + 4 * A * B * m0 + B * B - 2 * A * ex2 - B * m0)


def gaussian_mass(a, b):
    """int exp(a x^2 + b x) dgamma for a < 1/2."""
    return (1 - 2 * a) ** -0.5 * np.exp(b * b / (2 * (1 - 2 * a)))


# ---------------------------------------------------------------------------
# high precision


def decay_coefficient_mp(rho, T, dps=50):
    """(1 - exp(-2 rho T)) / (2 rho) in arbitrary precision (T at rho = 0)."""
    with mpmath.workdps(dps):
        rho = mpmath.mpf(rho)
        T = mpmath.mpf(T)
        if rho == 0:
            return float(T)
        return float(-mpmath.expm1(-2 * rho * T) / (2 * rho))


def growth_coefficient_mp(rho, T, dps=50):
    """(exp(2 rho T) - 1) / (2 rho) in arbitrary precision (T at rho = 0)."""
    with mpmath.workdps(dps):
        rho = mpmath.mpf(rho)
        T = mpmath.mpf(T)
        if rho == 0:
            return float(T)
        return float(mpmath.expm1(2 * rho * T) / (2 * rho))


# ---------------------------------------------------------------------------
# SplitMix64 reference


SPLITMIX64_SEED0 = (0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F)
