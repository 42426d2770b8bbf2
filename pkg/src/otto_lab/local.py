"""Pointwise local inequalities for the heat semigroup and their delta limits.

Every evaluator takes a strictly positive field g and a horizon T and
compares two grid functions point by point on the manifold's interior.  The
result is a PointwiseCheck whose slack is rhs - lhs.

The delta-limit experiment integrates the bridge form of an inequality
against shrinking bumps f centred at a grid point y.  Both sides come from
the product path t -> P_t f P_{T-t} g.  It records how each side approaches
the local value at y.
"""

from dataclasses import dataclass

import numpy as np

from .bridge import lambda_quadrature, product_path, velocity_cost_sample
from .coefficients import decay_coefficient, growth_coefficient
from .errors import DomainError, OttoLabError
from .grid import apply_generator, as_field, gamma, heat_apply, integrate, windowed
from .modes import Mode, require_mode
from .reports import pointwise_check

DEFAULT_RTOL = 1e-8
MIN_BUMP_POINTS = 6
RESTORED_BRACKET = "P_T(g log g) - P_T g log P_T g - T L P_T g, with L the generator"

LOCAL_NAMES = (
    "gradient-commutation",
    "local-lsi",
    "reverse-local-lsi",
    "dimensional-local-lsi",
    "dimensional-laplacian-bound",
    "dimensional-reverse-local-lsi",
    "li-yau",
    "li-yau-literal",
)
DELTA_PAIRS = ("gradient-commutation", "local-lsi", "reverse-local-lsi")


class ResolutionRefusal(OttoLabError):
    """A bump is too narrow for the grid to resolve."""

    exit_code = 2


@dataclass(frozen=True, eq=False)
class SemigroupTerms:
    """The grid functions shared by all local inequalities for one (g, T).

    P = P_T g, LP = L P_T g, grad_ratio = Gamma(P_T g) / P_T g,
    smoothed_ratio = P_T(Gamma(g) / g), bracket = P_T(g log g) - P_T g log P_T g.
    """

    T: float
    P: np.ndarray
    LP: np.ndarray
    grad_ratio: np.ndarray
    smoothed_ratio: np.ndarray
    bracket: np.ndarray


def semigroup_terms(M, g, T):
    """Compute the semigroup quantities entering the local inequalities."""
    g = as_field(M, g)
    if np.any(g <= 0):
        i = int(np.flatnonzero(g.ravel() <= 0)[0])
        raise DomainError(f"g must be strictly positive; value at point {i} is {g.ravel()[i]!r}")
    if not (np.isfinite(T) and T > 0):
        raise DomainError(f"horizon must be positive, got T={T}")
    P = heat_apply(M, T, g)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        bracket = heat_apply(M, T, g * np.log(g)) - P * np.log(P)
    return SemigroupTerms(
        T=float(T),
        P=P,
        LP=apply_generator(M, P),
        grad_ratio=gamma(M, P) / P,
        smoothed_ratio=heat_apply(M, T, windowed(M, gamma(M, g) / g)),
        bracket=bracket,
    )


def _meta(M, T, rho, n, **extra):
    meta = {"T": float(T), "rho": float(rho), "n": float(n), "label": M.label, "kind": M.kind}
    meta.update(extra)
    return meta


def _check(M, name, lhs, rhs, meta, rtol, gating=True):
    return pointwise_check(name, lhs, rhs, M.interior, rtol, metadata=meta, gating=gating)


def eval_grad_commutation(M, rho, g, T, rtol=DEFAULT_RTOL):
    """Gamma(P_T g)/P_T g <= exp(-2 rho T) P_T(Gamma(g)/g) pointwise."""
    require_mode(M, Mode.rho_inf(rho))
    s = semigroup_terms(M, g, T)
    return _check(
        M,
        "gradient-commutation",
        s.grad_ratio,
        np.exp(-2.0 * rho * T) * s.smoothed_ratio,
        _meta(M, T, rho, np.inf),
        rtol,
    )


def eval_local_lsi(M, rho, g, T, rtol=DEFAULT_RTOL):
    """P_T(g log g) - P_T g log P_T g <= (1 - exp(-2 rho T))/(2 rho) P_T(Gamma(g)/g)."""
    require_mode(M, Mode.rho_inf(rho))
    s = semigroup_terms(M, g, T)
    return _check(
        M,
        "local-lsi",
        s.bracket,
        decay_coefficient(rho, T) * s.smoothed_ratio,
        _meta(M, T, rho, np.inf),
        rtol,
    )


def eval_reverse_lsi(M, rho, g, T, rtol=DEFAULT_RTOL):
    """(exp(2 rho T) - 1)/(2 rho) Gamma(P_T g)/P_T g <= P_T(g log g) - P_T g log P_T g."""
    require_mode(M, Mode.rho_inf(rho))
    s = semigroup_terms(M, g, T)
    return _check(
        M,
        "reverse-local-lsi",
        growth_coefficient(rho, T) * s.grad_ratio,
        s.bracket,
        _meta(M, T, rho, np.inf),
        rtol,
    )


def _dimensional_exponent(s, n):
    return 2.0 / (n * s.P) * (s.bracket - s.T * s.LP)


def eval_dim_lsi(M, n, g, T, rtol=DEFAULT_RTOL):
    """Local log-Sobolev inequality under CD(0, n) and its Laplacian bound.

    Returns two checks.  The first compares
    (n/2T) P exp[(2/(nP)) (bracket - T L P)] with P_T(Gamma(g)/g) - L P + (n/2T) P,
    where P = P_T g and the bracket is the restored reading recorded in the
    metadata.  The second is L P / P - P_T(Gamma(g)/g) / P <= n/(2T).
    """
    require_mode(M, Mode.zero_n(n))
    s = semigroup_terms(M, g, T)
    c = n / (2.0 * T)
    meta = _meta(M, T, 0.0, n, bracket=RESTORED_BRACKET, restored_bracket=True)
    with np.errstate(over="raise"):
        lhs = c * s.P * np.exp(_dimensional_exponent(s, n))
    main = _check(M, "dimensional-local-lsi", lhs, s.smoothed_ratio - s.LP + c * s.P, meta, rtol)
    bound = _check(
        M,
        "dimensional-laplacian-bound",
        (s.LP - s.smoothed_ratio) / s.P,
        np.full(M.shape, c),
        _meta(M, T, 0.0, n),
        rtol,
    )
    return [main, bound]


def eval_dim_reverse_liyau(M, n, g, T, rtol=DEFAULT_RTOL):
    """Reverse local log-Sobolev inequality under CD(0, n) and the Li-Yau bound.

    Returns three checks: the reverse inequality
    (n/2T) P exp[-(2/(nP)) (bracket - T L P)] <= -Gamma(P)/P + L P + (n/2T) P,
    the normalized Li-Yau bound Gamma(P)/P^2 - L P / P <= n/(2T), and the
    unnormalized variant Gamma(P)/P^2 - L P <= n/(2T), which is reported but
    not gating.
    """
    require_mode(M, Mode.zero_n(n))
    s = semigroup_terms(M, g, T)
    c = n / (2.0 * T)
    meta = _meta(M, T, 0.0, n, bracket=RESTORED_BRACKET, restored_bracket=True)
    with np.errstate(over="raise"):
        lhs = c * s.P * np.exp(-_dimensional_exponent(s, n))
    reverse = _check(
        M, "dimensional-reverse-local-lsi", lhs, -s.grad_ratio + s.LP + c * s.P, meta, rtol
    )
    bound = np.full(M.shape, c)
    base = s.grad_ratio / s.P
    li_yau = _check(M, "li-yau", base - s.LP / s.P, bound, _meta(M, T, 0.0, n), rtol)
    literal = _check(
        M,
        "li-yau-literal",
        base - s.LP,
        bound,
        _meta(M, T, 0.0, n, form="Laplacian term not divided by P_T g"),
        rtol,
        gating=False,
    )
    return [reverse, li_yau, literal]


def local_suite(M, mode, g, T, rtol=DEFAULT_RTOL):
    """All local checks implied by a curvature mode.

    CD(0, n) implies CD(0, inf), so a dimensional mode runs the rho = 0
    checks as well as the dimensional ones.
    """
    rho = mode.rho if mode.kind == "rho_inf" else 0.0
    checks = [
        eval_grad_commutation(M, rho, g, T, rtol),
        eval_local_lsi(M, rho, g, T, rtol),
        eval_reverse_lsi(M, rho, g, T, rtol),
    ]
    if mode.kind == "rho_inf":
        return checks
    return checks + eval_dim_lsi(M, mode.n, g, T, rtol) + eval_dim_reverse_liyau(M, mode.n, g, T, rtol)


# ---------------------------------------------------------------------------
# delta limit


@dataclass(frozen=True, eq=False)
class DeltaLimitRecord:
    """Bridge-side integrals against shrinking bumps next to the local values at y."""

    inequality: str
    index: int
    T: float
    widths: np.ndarray
    bridge_lhs: np.ndarray
    bridge_rhs: np.ndarray
    local_lhs: float
    local_rhs: float
    taylor_lhs: np.ndarray
    taylor_rhs: np.ndarray

    @property
    def gap_lhs(self):
        return np.abs(self.bridge_lhs - self.local_lhs)

    @property
    def gap_rhs(self):
        return np.abs(self.bridge_rhs - self.local_rhs)

    def table(self):
        names = ["width", "bridge_lhs", "bridge_rhs", "local_lhs", "local_rhs", "gap_lhs", "gap_rhs"]
        k = len(self.widths)
        data = np.column_stack(
            [
                self.widths,
                self.bridge_lhs,
                self.bridge_rhs,
                np.full(k, self.local_lhs),
                np.full(k, self.local_rhs),
                self.gap_lhs,
                self.gap_rhs,
            ]
        )
        return names, data

    def monotone(self):
        """True when both gaps are nonincreasing as the width shrinks."""
        return bool(np.all(np.diff(self.gap_lhs) <= 0) and np.all(np.diff(self.gap_rhs) <= 0))

    def to_dict(self):
        return {
            "inequality": self.inequality,
            "index": self.index,
            "T": self.T,
            "widths": self.widths.tolist(),
            "bridge_lhs": self.bridge_lhs.tolist(),
            "bridge_rhs": self.bridge_rhs.tolist(),
            "local_lhs": self.local_lhs,
            "local_rhs": self.local_rhs,
            "gap_lhs": self.gap_lhs.tolist(),
            "gap_rhs": self.gap_rhs.tolist(),
            "taylor_lhs": self.taylor_lhs.tolist(),
            "taylor_rhs": self.taylor_rhs.tolist(),
            "monotone": self.monotone(),
        }


def _offsets(M, index):
    """Periodic coordinate offsets x - y, wrapped to [-L/2, L/2), one array per axis."""
    y = np.unravel_index(index, M.shape)
    out = []
    for axis, X in enumerate(M.mesh()):
        d = X - M.x[y[axis]]
        out.append((d + M.length / 2) % M.length - M.length / 2)
    return out


def bump_density(M, index, width):
    """Unit-mass periodic bump exp((cos(2 pi d / L) - 1) / w^2) around a grid point.

    The angular distance is measured in radians of the period, so on the
    unit circle this is the von Mises profile with concentration 1/w^2.
    """
    if not M.periodic:
        raise DomainError("delta limits are only available on periodic spaces")
    h = M.length / M.n
    scale = 2.0 * np.pi / M.length
    if 2.0 * width / scale < MIN_BUMP_POINTS * h:
        raise ResolutionRefusal(
            f"bump width {width} is under-resolved: fewer than {MIN_BUMP_POINTS} grid points across "
            f"(spacing {h:.4g}); increase n or the width"
        )
    expo = sum(np.cos(scale * d) - 1.0 for d in _offsets(M, index)) / width**2
    f = np.exp(np.maximum(expo, -700.0))
    return f / integrate(M, f)


def _second_moment_model(M, index, field, f):
    """Second-order Taylor estimate of |int field f - field(y)| for a symmetric bump."""
    d = _offsets(M, index)
    total = 0.0
    for axis in range(M.dim):
        second = _axis_second_derivative(M, field, axis).ravel()[index]
        total += second * integrate(M, d[axis] ** 2 * f)
    return 0.5 * abs(total)


def _axis_second_derivative(M, field, axis):
    """Spectral second derivative along one axis of a periodic grid."""
    k = (2.0 * np.pi / M.length) * np.fft.fftfreq(M.n, 1.0 / M.n)
    shape = [1] * M.dim
    shape[axis] = M.n
    spec = np.fft.fft(field, axis=axis)
    return np.real(np.fft.ifft(-(k**2).reshape(shape) * spec, axis=axis))


def _local_sides(M, inequality, rho, s):
    if inequality == "gradient-commutation":
        return s.grad_ratio, np.exp(-2.0 * rho * s.T) * s.smoothed_ratio
    if inequality == "local-lsi":
        return s.bracket, decay_coefficient(rho, s.T) * s.smoothed_ratio
    return growth_coefficient(rho, s.T) * s.grad_ratio, s.bracket


def _bridge_sides(M, inequality, rho, g, f, T, nodes, tol):
    """Integrated sides from the product path, rescaled by its mass / 4."""
    path = product_path(M, f, g, T)
    pots = path.potentials
    scale = pots.mass / 4.0
    if inequality == "gradient-commutation":
        a0 = velocity_cost_sample(M, pots, 0.0)
        aT = velocity_cost_sample(M, pots, T)
        return scale * a0, scale * np.exp(-2.0 * rho * T) * aT
    lam = lambda_quadrature(M, pots, nodes, tol).value
    if inequality == "local-lsi":
        aT = velocity_cost_sample(M, pots, T)
        return scale * lam, scale * decay_coefficient(rho, T) * aT
    a0 = velocity_cost_sample(M, pots, 0.0)
    return scale * growth_coefficient(rho, T) * a0, scale * lam


def delta_limit_bridge_vs_local(M, inequality, g, y, T, widths, rho=None, nodes=33, tol=1e-10):
    """Compare integrated bridge inequalities against bumps with the local values at y.

    ``inequality`` is one of DELTA_PAIRS and ``y`` a flat grid index.  For
    each width the normalized bump f gives the bridge-side values
    int lhs_local f and int rhs_local f, computed through the product path
    (endpoint velocity costs and the Lambda quadrature).  The Taylor columns
    hold the second-order model 1/2 |h''(y)| int (x - y)^2 f of each gap.
    """
    if inequality not in DELTA_PAIRS:
        raise DomainError(f"unknown delta-limit inequality {inequality!r}; choose from {DELTA_PAIRS}")
    widths = np.asarray(widths, dtype=float)
    if widths.ndim != 1 or widths.size == 0 or np.any(widths <= 0) or np.any(np.diff(widths) >= 0):
        raise DomainError("widths must be positive and strictly decreasing")
    rho = M.rho_ref if rho is None else float(rho)
    require_mode(M, Mode.rho_inf(rho))
    y = int(y)
    if not 0 <= y < M.size:
        raise DomainError(f"grid index y={y} outside 0..{M.size - 1}")
    g = as_field(M, g)
    s = semigroup_terms(M, g, T)
    lhs_field, rhs_field = _local_sides(M, inequality, rho, s)
    bl, br, tl, tr = [], [], [], []
    for w in widths:
        f = bump_density(M, y, w)
        lo, hi = _bridge_sides(M, inequality, rho, g, f, T, nodes, tol)
        bl.append(lo)
        br.append(hi)
        tl.append(_second_moment_model(M, y, lhs_field, f))
        tr.append(_second_moment_model(M, y, rhs_field, f))
    return DeltaLimitRecord(
        inequality=inequality,
        index=y,
        T=float(T),
        widths=widths,
        bridge_lhs=np.array(bl),
        bridge_rhs=np.array(br),
        local_lhs=float(lhs_field.ravel()[y]),
        local_rhs=float(rhs_field.ravel()[y]),
        taylor_lhs=np.array(tl),
        taylor_rhs=np.array(tr),
    )
