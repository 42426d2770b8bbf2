"""Entropic interpolation between two densities on a GridManifold.

The interpolation at time t has density a_t b_t with a_t = P_t f and
b_t = P_{T-t} g, where the positive potentials (f, g) solve

    f P_T g = mu,    g P_T f = nu.

Quantities along the path:

* velocity cost   |mu_t' + grad F|^2 = 4 int Gamma(b_t)/b_t a_t
* kinetic energy  int Gamma(log(b_t/a_t)) a_t b_t  (velocity grad log(b_t/a_t))
* Fisher term     int Gamma(log(a_t b_t)) a_t b_t
* energy          E(t) = kinetic - Fisher, constant in t and equal to
                  E_T = 4 int L(P_T g) f
* cost            C_T = Lambda - 2 (Ent(nu) - Ent(mu)) with
                  Lambda = int_0^T velocity cost dt
                         = 4 int [P_T(g log g) - P_T g log P_T g] f

All integrals of nonlinear quantities use the trusted points of the manifold
(every point on the periodic spaces).  Potentials carry the mass
int f P_T g, so an unnormalized pair (f, g) describes the normalized path.
"""

import functools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .coefficients import decay_coefficient, growth_coefficient
from .errors import DomainError, NumericalError, SolverError
from .grid import (
    Density,
    apply_generator,
    as_field,
    entropy,
    gamma,
    gradient,
    heat_apply,
    heat_kernel_column,
    integrate,
)
from .modes import RHO_INF, require_mode
from .reports import make_report

log = logging.getLogger(__name__)

NORMALIZATION = "integral of f equals integral of g"


@dataclass(frozen=True, eq=False)
class SchrodingerPotentials:
    manifold: object
    T: float
    f: np.ndarray
    g: np.ndarray
    mass: float = 1.0
    normalization: str = NORMALIZATION
    iterations: int = 0
    residuals: tuple = ()


SIGNIFICANCE = 1e-12


def _tint(M, h, density=None):
    """Integral over the trusted points where `density` is significant.

    Points where the path density is below SIGNIFICANCE times its maximum hold
    a negligible share of the mass, but ratios such as Gamma(b)/b evaluated
    there amplify roundoff by 1/b.  They are left out of the sum.
    """
    h = np.asarray(h, dtype=float).reshape(M.shape)
    if density is not None:
        density = np.asarray(density, dtype=float).reshape(M.shape)
        peak = np.max(np.where(M.trusted, density, 0.0))
        h = np.where(density >= SIGNIFICANCE * peak, h, 0.0)
    return integrate(M, h, trusted=True)


def _untrusted_ok(func):
    """Silence floating-point warnings from points outside the trusted window.

    Values there are discarded by `_tint`; overflow or NaN at trusted points
    is still caught by the finiteness check of the integral.
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
            return func(*args, **kwargs)

    return wrapper


def _require_positive(name, v):
    if np.any(v <= 0):
        i = int(np.flatnonzero(np.asarray(v).ravel() <= 0)[0])
        raise DomainError(f"{name} must be strictly positive; value at point {i} is {np.ravel(v)[i]!r}")


def _positive_heat(M, t, h, what, iteration=None):
    out = heat_apply(M, t, h)
    if np.any(out <= 0) or not np.all(np.isfinite(out)):
        where = f" at iteration {iteration}" if iteration is not None else ""
        raise NumericalError(f"zero or invalid denominator P_T {what}{where}")
    return out


@_untrusted_ok
def ipfp_solve(M, T, mu, nu, tol=1e-12, max_iter=500):
    """Solve the Schrodinger system by alternating marginal fitting.

    Each sweep sets f = mu / P_T g and then g = nu / P_T f.  If the sup-norm
    residual of the mu-marginal would increase, the f-update is damped in the
    log domain by successive factors 0.5, so the recorded residuals never
    increase.  The constant multiple is fixed by int f = int g.
    """
    if not T > 0:
        raise DomainError(f"horizon must be positive, got T={T}")
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got tol={tol}")
    rm, rn = mu.values, nu.values
    _require_positive("mu", rm)
    _require_positive("nu", rn)

    def complete(f, it):
        Pf = _positive_heat(M, T, f, "f", it)
        g = rn / Pf
        Pg = heat_apply(M, T, g)
        return g, float(np.max(np.abs(f * Pg - rm))), float(np.max(np.abs(g * Pf - rn)))

    f = rm / _positive_heat(M, T, np.ones(M.shape), "g", 1)
    g, r_mu, r_nu = complete(f, 1)
    history = [(r_mu, r_nu)]
    it = 1
    while max(r_mu, r_nu) > tol:
        if it >= max_iter:
            raise SolverError(
                f"IPFP did not converge in {max_iter} iterations; residuals mu={r_mu:.3e}, nu={r_nu:.3e}",
                history,
            )
        it += 1
        f_full = rm / _positive_heat(M, T, g, "g", it)
        theta = 1.0
        while True:
            f_try = f_full if theta == 1.0 else np.exp((1 - theta) * np.log(f) + theta * np.log(f_full))
            g_try, a, b = complete(f_try, it)
            if max(a, b) <= max(r_mu, r_nu):
                break
            theta *= 0.5
            if theta < 2.0**-30:
                raise SolverError(f"IPFP stalled at iteration {it}; residual {max(r_mu, r_nu):.3e}", history)
            log.debug("ipfp iteration %d: damping to %.3g", it, theta)
        f, g, r_mu, r_nu = f_try, g_try, a, b
        history.append((r_mu, r_nu))
    c = np.sqrt(_tint(M, g) / _tint(M, f))
    f, g = f * c, g / c
    mass = _tint(M, f * heat_apply(M, T, g))
    return SchrodingerPotentials(M, float(T), f, g, mass, NORMALIZATION, it, tuple(history))


def _check_time(pots, t):
    if not (0.0 <= t <= pots.T * (1 + 1e-14)):
        raise DomainError(f"time t={t} outside [0, {pots.T}]")
    return min(float(t), pots.T)


def _log_gradients(M, a, b):
    """grad log a and grad log b, computed as grad a / a and grad b / b.

    Differentiating log a spectrally would propagate the kink that log a has
    where a sits at its roundoff floor; the ratio keeps errors local.
    """
    return [d / a for d in gradient(M, a)], [d / b for d in gradient(M, b)]


def _factors(M, pots, t):
    t = _check_time(pots, t)
    return heat_apply(M, t, pots.f), heat_apply(M, pots.T - t, pots.g)


@_untrusted_ok
def interpolate(M, pots, t):
    """Density of the entropic interpolation at time t, renormalized to unit mass."""
    a, b = _factors(M, pots, t)
    rho = a * b / pots.mass
    mass = _tint(M, rho)
    if abs(mass - 1.0) > 0:
        log.debug("interpolate: mass drift %.3e at t=%g", mass - 1.0, t)
    return Density(M, rho / mass)


@_untrusted_ok
def velocity_cost_sample(M, pots, t, form="identity"):
    """|mu_t' + grad Ent|^2 at time t.

    ``form="identity"`` evaluates 4 int Gamma(b)/b a.  ``form="direct"``
    builds the velocity grad log(b/a) and the entropy gradient grad log(ab)
    separately and integrates the squared norm of their sum against ab.
    """
    a, b = _factors(M, pots, t)
    if form == "identity":
        return 4.0 * _tint(M, gamma(M, b) / b * a, a * b) / pots.mass
    if form == "direct":
        ga, gb = _log_gradients(M, a, b)
        total = sum(((vb - va) + (va + vb)) ** 2 for va, vb in zip(ga, gb))
        return _tint(M, total * a * b, a * b) / pots.mass
    raise ValueError(f"unknown form {form!r}")


@_untrusted_ok
def kinetic_and_fisher(M, pots, t):
    """(int Gamma(log b/a) ab, int Gamma(log ab) ab) at time t."""
    a, b = _factors(M, pots, t)
    ga, gb = _log_gradients(M, a, b)
    w = a * b / pots.mass
    kinetic = sum((vb - va) ** 2 for va, vb in zip(ga, gb))
    fisher = sum((va + vb) ** 2 for va, vb in zip(ga, gb))
    return _tint(M, kinetic * w, w), _tint(M, fisher * w, w)


def energy_sample(M, pots, t):
    kin, fis = kinetic_and_fisher(M, pots, t)
    return kin - fis


@_untrusted_ok
def energy_cross(M, pots, t):
    """-4 int Gamma(P_{T-t} g, P_t f), another expression for the energy."""
    a, b = _factors(M, pots, t)
    return -4.0 * _tint(M, gamma(M, a, b), a * b) / pots.mass


@_untrusted_ok
def conserved_energy(M, pots, samples=11):
    """(E_T = 4 int L(P_T g) f, max over sampled t of |E(t) - E_T|)."""
    Pg = heat_apply(M, pots.T, pots.g)
    ET = 4.0 * _tint(M, apply_generator(M, Pg) * pots.f, pots.f * Pg) / pots.mass
    ts = np.linspace(0.0, pots.T, samples)
    dev = max(abs(energy_sample(M, pots, t) - ET) for t in ts)
    return float(ET), float(dev)


@dataclass(frozen=True)
class CostQuadrature:
    value: float
    nodes: int
    times: np.ndarray
    samples: np.ndarray
    change: float


def lambda_quadrature(M, pots, nodes=33, tol=1e-7, max_nodes=8193):
    """Simpson integral of the velocity cost over [0, T], doubled until stable.

    Refinement stops once doubling the number of intervals changes the value
    by less than ``tol``.
    """
    ts = np.linspace(0.0, pots.T, nodes)
    vals = np.array([velocity_cost_sample(M, pots, t) for t in ts])
    value = simpson(vals, x=ts)
    while True:
        mid = 0.5 * (ts[1:] + ts[:-1])
        mvals = np.array([velocity_cost_sample(M, pots, t) for t in mid])
        ts2 = np.empty(2 * len(ts) - 1)
        vals2 = np.empty_like(ts2)
        ts2[0::2], ts2[1::2] = ts, mid
        vals2[0::2], vals2[1::2] = vals, mvals
        value2 = simpson(vals2, x=ts2)
        change = abs(value2 - value)
        ts, vals, value = ts2, vals2, value2
        if change < tol:
            return CostQuadrature(float(value), len(ts), ts, vals, float(change))
        if len(ts) >= max_nodes:
            raise SolverError(f"cost quadrature not converged at {len(ts)} nodes; last change {change:.3e}")


@_untrusted_ok
def lambda_closed_form(M, pots):
    """4 int [P_T(g log g) - P_T g log P_T g] f."""
    g = pots.g
    Pg = heat_apply(M, pots.T, g)
    bracket = heat_apply(M, pots.T, g * np.log(g)) - Pg * np.log(Pg)
    return 4.0 * _tint(M, bracket * pots.f, pots.f * Pg) / pots.mass


def entropic_cost(M, pots, mu, nu, nodes=33, tol=1e-7):
    """(C_T from time quadrature, C_T from the closed-form expression)."""
    shift = 2.0 * (entropy(M, nu) - entropy(M, mu))
    quad = lambda_quadrature(M, pots, nodes, tol)
    return quad.value - shift, lambda_closed_form(M, pots) - shift


def check_bridge_inequalities(M, mode, pots, mu, nu, tol=1e-6, lam=None, energy=None):
    """Evaluate the bridge inequalities for a curvature mode.

    Endpoint quantities come from ``velocity_cost_sample`` at t = 0 and
    t = T.  ``lam`` (Lambda from the time quadrature) and ``energy`` (E_T) are
    recomputed when not supplied.  Raises CurvatureRefusal if the manifold
    does not satisfy the mode.
    """
    require_mode(M, mode)
    T = pots.T
    A0 = velocity_cost_sample(M, pots, 0.0)
    AT = velocity_cost_sample(M, pots, T)
    if lam is None:
        lam = lambda_quadrature(M, pots).value
    if energy is None:
        energy = conserved_energy(M, pots)[0]
    E = energy
    meta = {"T": T, "rho": mode.rho, "n": mode.n, "label": M.label}

    def rep(name, lhs, rhs):
        return make_report(name, lhs, rhs, tol * max(1.0, abs(lhs), abs(rhs)), metadata=meta)

    if mode.kind == RHO_INF:
        rho = mode.rho
        return [
            rep("bridge-endpoint-contraction", A0, np.exp(-2.0 * rho * T) * AT),
            rep("bridge-cost-upper", lam, decay_coefficient(rho, T) * AT),
            rep("bridge-cost-lower", growth_coefficient(rho, T) * A0, lam),
        ]
    n = mode.n
    Z = (lam - T * E) / (2.0 * n)
    return [
        rep("bridge-dim-upper", np.exp(Z), 1.0 + T / (2.0 * n) * (AT - E)),
        rep("bridge-dim-lower", np.exp(-Z), 1.0 - T / (2.0 * n) * (A0 - E)),
        rep("bridge-energy-upper", E, 2.0 * n / T + AT),
        rep("bridge-variational-li-yau", -2.0 * n / T + A0, E),
    ]


@dataclass(frozen=True)
class BridgeDiagnostics:
    scenario: str
    T: float
    cost_quadrature: float
    cost_closed_form: float
    energy: float
    energy_deviation: float
    entropy_mu: float
    entropy_nu: float
    quadrature_nodes: int
    times: np.ndarray
    masses: np.ndarray
    velocity_costs: np.ndarray
    energy_samples: np.ndarray
    reports: list = field(default_factory=list)

    @property
    def cost_gap(self):
        """Relative difference between the two cost estimates."""
        return abs(self.cost_quadrature - self.cost_closed_form) / max(1.0, abs(self.cost_closed_form))

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "T": self.T,
            "cost": [self.cost_quadrature, self.cost_closed_form],
            "energy": [self.energy, self.energy_deviation],
            "entropy": [self.entropy_mu, self.entropy_nu],
            "quadrature_nodes": self.quadrature_nodes,
            "inequalities": [
                {"name": r.name, "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack, "pass": r.passed}
                for r in self.reports
            ],
        }

    def sample_table(self):
        names = ["t", "mass", "velocity_cost", "energy_sample"]
        return names, np.column_stack([self.times, self.masses, self.velocity_costs, self.energy_samples])


@_untrusted_ok
def bridge_diagnostics(M, pots, mu, nu, mode, scenario="", samples=11, nodes=33, tol=1e-7):
    """Run the full set of bridge computations for one pair of potentials."""
    Fm, Fn = entropy(M, mu), entropy(M, nu)
    quad = lambda_quadrature(M, pots, nodes, tol)
    closed = lambda_closed_form(M, pots)
    ET, dev = conserved_energy(M, pots, samples)
    ts = np.linspace(0.0, pots.T, samples)
    masses = np.array([_tint(M, np.multiply(*_factors(M, pots, t))) / pots.mass for t in ts])
    vcs = np.array([velocity_cost_sample(M, pots, t) for t in ts])
    es = np.array([energy_sample(M, pots, t) for t in ts])
    reports = check_bridge_inequalities(M, mode, pots, mu, nu, lam=quad.value, energy=ET)
    shift = 2.0 * (Fn - Fm)
    return BridgeDiagnostics(
        scenario=scenario,
        T=pots.T,
        cost_quadrature=quad.value - shift,
        cost_closed_form=closed - shift,
        energy=ET,
        energy_deviation=dev,
        entropy_mu=Fm,
        entropy_nu=Fn,
        quadrature_nodes=quad.nodes,
        times=ts,
        masses=masses,
        velocity_costs=vcs,
        energy_samples=es,
        reports=reports,
    )


@dataclass(frozen=True, eq=False)
class ProductPath:
    """t -> P_t f P_{T-t} g / int f P_T g for arbitrary positive (f, g)."""

    potentials: SchrodingerPotentials

    @property
    def normalization(self):
        return self.potentials.mass

    def __call__(self, t):
        return interpolate(self.potentials.manifold, self.potentials, t)


def product_path(M, f, g, T):
    f = as_field(M, f)
    g = as_field(M, g)
    _require_positive("f", f)
    _require_positive("g", g)
    if not T > 0:
        raise DomainError(f"horizon must be positive, got T={T}")
    mass = _tint(M, f * heat_apply(M, T, g))
    return ProductPath(SchrodingerPotentials(M, float(T), f, g, mass, "unnormalized product", 0, ()))


@dataclass(frozen=True, eq=False)
class DiracPath:
    """t -> p_t^y P_{T-t}(nu / p_T^y), the interpolation started from a point mass."""

    manifold: object
    index: int
    T: float
    g: np.ndarray

    def __call__(self, t):
        M = self.manifold
        if not (0.0 <= t <= self.T * (1 + 1e-14)):
            raise DomainError(f"time t={t} outside [0, {self.T}]")
        if t == 0:
            delta = np.zeros(M.size)
            delta[self.index] = 1.0 / M.weights.ravel()[self.index]
            return Density.from_values(M, delta.reshape(M.shape))
        t = min(float(t), self.T)
        rho = heat_kernel_column(M, self.index, t) * heat_apply(M, self.T - t, self.g)
        return Density.from_values(M, rho, normalize=True)


def dirac_bridge(M, y, nu, T):
    """Entropic interpolation from the point mass at flat grid index y to nu."""
    if not T > 0:
        raise DomainError(f"horizon must be positive, got T={T}")
    _require_positive("nu", nu.values)
    pT = heat_kernel_column(M, y, T)
    if np.any(pT[M.trusted] <= 0):
        raise NumericalError("heat kernel column vanishes; the point mass cannot be bridged")
    return DiracPath(M, int(y), float(T), nu.values / pT)
