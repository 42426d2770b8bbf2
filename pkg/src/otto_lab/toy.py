"""Finite-dimensional toy model: F-interpolations and their diagnostics.

For a potential F on R^d the cost of a curve X on [0, T] is
``int (|X'|^2 + |F'(X)|^2) dt`` and minimizers solve Newton's equation
``X'' = F''(X) F'(X)``.  Along a minimizer ``E = |X'|^2 - |F'(X)|^2`` is
constant, and ``lambda(t) = int_0^t |X' + F'(X)|^2`` carries the convexity
information used by the inequalities checked here.

The two-point problem is solved by Chebyshev collocation written for the
unknown acceleration Z = X''.  Positions and velocities are obtained from Z
with a spectral integration matrix, which keeps the Newton system well
conditioned.  The solution is then resampled on a uniform time grid, where
all quadratures use composite Simpson rules.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import BarycentricInterpolator

from .coefficients import (
    decay_coefficient,
    growth_coefficient,
    literal_decay_coefficient,
    literal_growth_coefficient,
)
from .errors import CurvatureRefusal, DomainError, SolverError
from .modes import RHO_INF, Mode
from .reports import make_report

CONVEXITY_TOL = 1e-10


@dataclass(frozen=True)
class FModel:
    """A potential F with gradient and Hessian.

    Evaluators act on arrays of states with trailing axis of length ``dim``:
    ``value`` returns shape (...), ``grad`` (..., d), ``hess`` (..., d, d) and
    ``domain`` a boolean array of shape (...).  ``force_jacobian`` optionally
    gives the Jacobian of X -> F''(X) F'(X); otherwise it is approximated by
    central differences.
    """

    name: str
    dim: int
    value: Callable
    grad: Callable
    hess: Callable
    domain: Callable = lambda X: np.ones(np.shape(X)[:-1], dtype=bool)
    force_jacobian: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def force(self, X):
        return np.einsum("...ab,...b->...a", self.hess(X), self.grad(X))

    def jacobian(self, X):
        if self.force_jacobian is not None:
            return self.force_jacobian(X)
        X = np.asarray(X, dtype=float)
        J = np.empty(X.shape + (self.dim,))
        for b in range(self.dim):
            h = 1e-6 * np.maximum(1.0, np.abs(X[..., b]))
            e = np.zeros_like(X)
            e[..., b] = h
            J[..., :, b] = (self.force(X + e) - self.force(X - e)) / (2.0 * h[..., None])
        return J


def zero_model(dim=1):
    """F = 0: free motion along straight lines."""
    return FModel(
        name="zero",
        dim=dim,
        value=lambda X: np.zeros(np.shape(X)[:-1]),
        grad=lambda X: np.zeros(np.shape(X)),
        hess=lambda X: np.zeros(np.shape(X) + (dim,)),
        force_jacobian=lambda X: np.zeros(np.shape(X) + (dim,)),
    )


def quadratic_model(rho0=1.0, dim=1):
    """F(x) = rho0 |x|^2 / 2, which is (rho0, infinity)-convex with equality."""
    eye = np.eye(dim)
    return FModel(
        name="quadratic",
        dim=dim,
        value=lambda X: 0.5 * rho0 * np.sum(np.asarray(X) ** 2, axis=-1),
        grad=lambda X: rho0 * np.asarray(X, dtype=float),
        hess=lambda X: rho0 * np.broadcast_to(eye, np.shape(X) + (dim,)).copy(),
        force_jacobian=lambda X: rho0**2 * np.broadcast_to(eye, np.shape(X) + (dim,)).copy(),
        params={"rho0": rho0},
    )


def neg_log_model(n0=1.0):
    """F(x) = -n0 log x on x > 0, which is (0, n0)-convex with equality."""
    return FModel(
        name="neg_log",
        dim=1,
        value=lambda X: -n0 * np.log(np.asarray(X)[..., 0]),
        grad=lambda X: -n0 / np.asarray(X, dtype=float),
        hess=lambda X: (n0 / np.asarray(X, dtype=float) ** 2)[..., None],
        domain=lambda X: np.asarray(X)[..., 0] > 0,
        force_jacobian=lambda X: (3.0 * n0**2 / np.asarray(X, dtype=float) ** 4)[..., None],
        params={"n0": n0},
    )


@dataclass(frozen=True)
class ToyPath:
    """Curve sampled on the uniform grid t_j = j T / m."""

    T: float
    t: np.ndarray
    X: np.ndarray
    V: np.ndarray
    A: Optional[np.ndarray] = None
    residual: float = 0.0
    iterations: int = 0

    @property
    def m(self):
        return len(self.t) - 1


@dataclass(frozen=True)
class ToyDiagnostics:
    t: np.ndarray
    X: np.ndarray
    V: np.ndarray
    cost: float
    energy: np.ndarray
    lam: np.ndarray
    phi: np.ndarray
    dlam: np.ndarray

    @property
    def energy_mean(self):
        return float(np.mean(self.energy))

    def table(self):
        """Column names and rows for CSV export."""
        d = self.X.shape[1]
        names = ["t"] + [f"X_{i + 1}" for i in range(d)] + [f"Xdot_{i + 1}" for i in range(d)]
        names += ["E", "lambda", "Phi", "lambda_prime"]
        cols = np.column_stack([self.t, self.X, self.V, self.energy, self.lam, self.phi, self.dlam])
        return names, cols


def _states(F, X):
    X = np.atleast_1d(np.asarray(X, dtype=float))
    if X.shape[-1] != F.dim:
        raise DomainError(f"state has dimension {X.shape[-1]}, model {F.name} has {F.dim}")
    return X


def certify_convexity(F, rho, n, samples):
    """Smallest eigenvalue of F'' - rho I - F' F'^T / n over the samples.

    Passes when that minimum is >= -1e-10.  ``n`` may be ``np.inf``.
    """
    S = _states(F, samples).reshape(-1, F.dim)
    inside = F.domain(S)
    if not np.all(inside):
        i = int(np.flatnonzero(~inside)[0])
        raise DomainError(f"sample {i} ({S[i]}) is outside the domain of {F.name}")
    H = F.hess(S) - rho * np.eye(F.dim)
    if np.isfinite(n):
        g = F.grad(S)
        H = H - np.einsum("ka,kb->kab", g, g) / n
    low = np.linalg.eigvalsh(H)[:, 0]
    k = int(np.argmin(low))
    return make_report(
        "convexity-certificate",
        0.0,
        low[k],
        CONVEXITY_TOL,
        point=k,
        metadata={"model": F.name, "rho": rho, "n": n},
    )


def chebyshev_nodes(N, T):
    """Chebyshev-Lobatto points on [0, T] (increasing) and the differentiation matrix."""
    k = np.arange(N + 1)
    t = 0.5 * T * (1.0 - np.cos(np.pi * k / N))
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** k
    dt = t[:, None] - t[None, :]
    D = np.outer(c, 1.0 / c) / (dt + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return t, D


def chebyshev_barycentric_weights(N):
    """Closed-form barycentric weights (-1)^k, halved at both ends, of the Lobatto points.

    Passing them to the interpolator avoids its own weight computation, which
    permutes the nodes at random and so is not bit-reproducible.
    """
    w = (-1.0) ** np.arange(N + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def solve_newton_bvp(F, x, y, T, m=256, nodes=64, tol=1e-10, max_iter=50):
    """Solve X'' = F''(X) F'(X), X(0) = x, X(T) = y, by damped Newton.

    Returns a ToyPath on the uniform grid with m + 1 points.  The reported
    residual is the sup norm of Z - F''(X)F'(X) at the collocation nodes.
    """
    x = _states(F, x)
    y = _states(F, y)
    if not T > 0:
        raise DomainError(f"horizon must be positive, got T={T}")
    if m < 32:
        raise DomainError(f"time grid too coarse: m={m}, need m >= 32")
    for name, p in (("x", x), ("y", y)):
        if not F.domain(p[None, :])[0]:
            raise DomainError(f"endpoint {name}={p} is outside the domain of {F.name}")

    N = int(nodes)
    tc, D = chebyshev_nodes(N, T)
    Q = np.zeros((N + 1, N + 1))
    Q[1:, 1:] = np.linalg.inv(D[1:, 1:])
    QQ = Q @ Q
    q1 = Q.sum(axis=1)
    A = QQ - np.outer(q1, QQ[-1]) / q1[-1]
    base = x[None, :] + np.outer(q1 / q1[-1], y - x)

    def positions(Z):
        return base + A @ Z

    def residual(Z):
        return Z - F.force(positions(Z))

    Z = np.zeros((N + 1, F.dim))
    R = residual(Z)
    r = float(np.max(np.abs(R)))
    history = [r]
    size = (N + 1) * F.dim
    it = 0
    while r > 1e-3 * tol and it < max_iter:
        it += 1
        JG = F.jacobian(positions(Z))
        J = np.eye(size) - np.einsum("jab,jl->jalb", JG, A).reshape(size, size)
        step = np.linalg.solve(J, R.ravel()).reshape(Z.shape)
        lam, accepted, left_domain = 1.0, False, False
        while lam > 1e-6:
            Zn = Z - lam * step
            if not np.all(F.domain(positions(Zn))):
                left_domain = True
                lam *= 0.5
                continue
            Rn = residual(Zn)
            rn = float(np.max(np.abs(Rn)))
            if rn < r or rn <= 1e-3 * tol:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if r <= tol:
                break
            if left_domain:
                raise DomainError(f"Newton iterate left the domain of {F.name} at iteration {it}")
            raise SolverError(f"Newton stalled at iteration {it}, residual {r:.3e}", history)
        Z, R, r = Zn, Rn, rn
        history.append(r)
    if r > tol:
        raise SolverError(f"Newton did not converge in {max_iter} iterations, residual {r:.3e}", history)

    Xc = positions(Z)
    c = (y - x - QQ[-1] @ Z) / q1[-1]
    Vc = c[None, :] + Q @ Z
    tu = np.linspace(0.0, T, m + 1)
    wi = chebyshev_barycentric_weights(N)
    X = BarycentricInterpolator(tc, Xc, wi=wi)(tu)
    V = BarycentricInterpolator(tc, Vc, wi=wi)(tu)
    Acc = BarycentricInterpolator(tc, Z, wi=wi)(tu)
    X[0], X[-1] = Xc[0], Xc[-1]
    if not np.all(F.domain(X)):
        raise DomainError(f"resampled path leaves the domain of {F.name}")
    return ToyPath(T=float(T), t=tu, X=X, V=V, A=Acc, residual=r, iterations=it)


def straight_path(x, y, T, m=256):
    """Constant-speed segment from x to y, useful as a non-optimal comparison."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    t = np.linspace(0.0, T, m + 1)
    X = x[None, :] + np.outer(t / T, y - x)
    V = np.broadcast_to((y - x) / T, X.shape).copy()
    return ToyPath(T=float(T), t=t, X=X, V=V, A=np.zeros_like(X))


def path_cost(F, path):
    """Simpson quadrature of |X'|^2 + |F'(X)|^2 over [0, T]."""
    integrand = np.sum(path.V**2, axis=1) + np.sum(F.grad(path.X) ** 2, axis=1)
    return float(simpson(integrand, x=path.t))


def energy_samples(F, path):
    return np.sum(path.V**2, axis=1) - np.sum(F.grad(path.X) ** 2, axis=1)


def path_energy(F, path):
    """Mean of E(t_j) = |X'|^2 - |F'(X)|^2 and its max deviation from the mean."""
    E = energy_samples(F, path)
    mean = float(np.mean(E))
    return mean, float(np.max(np.abs(E - mean)))


def lambda_curve(F, path):
    """lambda(t), Phi(t) = lambda(t) - t E and lambda'(t) on the path's grid."""
    dlam = np.sum((path.V + F.grad(path.X)) ** 2, axis=1)
    lam = cumulative_simpson(dlam, x=path.t, initial=0.0)
    E = energy_samples(F, path)
    return ToyDiagnostics(
        t=path.t,
        X=path.X,
        V=path.V,
        cost=path_cost(F, path),
        energy=E,
        lam=lam,
        phi=lam - path.t * float(np.mean(E)),
        dlam=dlam,
    )


def second_derivative(dlam, h):
    """lambda'' at nodes 2..m-2 by fourth-order central differences of lambda'."""
    d = dlam
    return (-d[4:] + 8.0 * d[3:-1] - 8.0 * d[1:-3] + d[:-4]) / (12.0 * h)


def perturbed_costs(F, path, rng, count=20, amplitude=0.05, modes=4):
    """Costs of `count` random smooth perturbations with the same endpoints."""
    T, t = path.T, path.t
    k = np.arange(1, modes + 1)
    costs = []
    for _ in range(count):
        a = rng.uniform_array((modes, F.dim), -amplitude, amplitude) / k[:, None]
        s = np.sin(np.pi * np.outer(t, k) / T)
        ds = (np.pi * k / T) * np.cos(np.pi * np.outer(t, k) / T)
        X = path.X + s @ a
        if not np.all(F.domain(X)):
            raise DomainError("perturbation left the admissible domain; lower the amplitude")
        costs.append(path_cost(F, ToyPath(T=T, t=t, X=X, V=path.V + ds @ a)))
    return np.array(costs)


def check_toy_inequalities(F, path, mode, tol=1e-6):
    """Evaluate the toy-model inequalities for the given curvature mode.

    Refuses (CurvatureRefusal) unless F is certified convex in that mode along
    the path.  Reports marked ``gating=False`` are the literal variants printed
    next to the derivation-consistent ones and do not decide pass or fail.
    """
    rho = mode.rho if mode.kind == RHO_INF else 0.0
    cert = certify_convexity(F, rho, mode.n, path.X)
    if not cert.passed:
        raise CurvatureRefusal(
            f"{F.name} is not certified {mode.describe()}-convex along the path "
            f"(smallest eigenvalue {cert.rhs:.3e})",
            cert,
        )
    T = path.T
    diag = lambda_curve(F, path)
    x, y = path.X[0], path.X[-1]
    Lam = diag.cost + 2.0 * float(F.value(y) - F.value(x))
    A0, AT = float(diag.dlam[0]), float(diag.dlam[-1])
    E = diag.energy_mean
    meta = {"T": T, "rho": rho, "n": mode.n, "model": F.name}

    def rep(name, lhs, rhs, gating=True, **extra):
        tol_k = tol * max(1.0, abs(lhs), abs(rhs))
        return make_report(name, lhs, rhs, tol_k, metadata={**meta, **extra}, gating=gating)

    h = T / path.m
    d2 = second_derivative(diag.dlam, h)
    inner = diag.dlam[2:-2]
    reports = [cert]
    if mode.kind == RHO_INF:
        reports += [
            rep("toy-endpoint-contraction", A0, np.exp(-2.0 * rho * T) * AT),
            rep("toy-cost-upper", Lam, decay_coefficient(rho, T) * AT),
            rep("toy-cost-upper-literal", Lam, literal_decay_coefficient(rho, T) * AT, gating=False),
            rep("toy-cost-lower", growth_coefficient(rho, T) * A0, Lam),
            rep("toy-cost-lower-literal", literal_growth_coefficient(rho, T) * A0, Lam, gating=False),
        ]
        lhs, rhs = 2.0 * rho * inner, d2
        scale = np.maximum(1.0, np.abs(inner))
        name = "toy-lambda-convexity"
    else:
        n = mode.n
        Z = (Lam - T * E) / (2.0 * n)
        reports += [
            rep("toy-dim-upper", np.exp(Z), 1.0 + T / (2.0 * n) * (AT - E)),
            rep("toy-dim-lower", np.exp(-Z), 1.0 - T / (2.0 * n) * (A0 - E)),
            rep("toy-energy-upper", E, 2.0 * n / T + AT),
            rep("toy-energy-upper-literal", E, 2.0 * n / T + A0, gating=False),
            rep("toy-energy-lower", -2.0 * n / T + A0, E),
            rep("toy-energy-lower-literal", -2.0 * n / T + AT, E, gating=False),
        ]
        dphi = inner - E
        lhs, rhs = dphi**2 / (2.0 * n), d2
        scale = np.maximum(1.0, np.abs(lhs))
        name = "toy-exp-phi-concavity"
        hexp = np.exp(-diag.phi / (2.0 * n))
        sd = hexp[2:] - 2.0 * hexp[1:-1] + hexp[:-2]
        k = int(np.argmax(sd / np.maximum(1.0, hexp[1:-1])))
        reports.append(
            make_report(
                "toy-exp-phi-second-difference",
                sd[k],
                0.0,
                tol * h * h * max(1.0, hexp[k + 1]),
                point=k + 1,
                metadata=meta,
            )
        )
    k = int(np.argmin((rhs - lhs) / scale))
    reports.append(make_report(name, lhs[k], rhs[k], tol * scale[k], point=k + 2, metadata=meta))
    return reports
