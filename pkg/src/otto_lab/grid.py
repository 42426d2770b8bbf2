"""Discretized model spaces with a spectrally exact heat semigroup.

Three spaces are supported:

* ``circle``   periodic interval of length L, Laplacian d^2/dx^2, Fourier basis.
* ``torus2d``  flat square torus [0, L)^2, Laplacian, 2D Fourier basis.
* ``ou_line``  real line with the Ornstein-Uhlenbeck generator f'' - x f',
  reversible for the standard Gaussian measure, discretized by collocation at
  probabilists' Gauss-Hermite nodes with normalized Hermite eigenfunctions.

Fields are numpy arrays whose shape equals ``M.shape``.  On ``ou_line`` all
functions, including densities, are taken relative to the Gaussian reference
measure, so ``integrate`` sums against Gaussian quadrature weights and the
semigroup is symmetric for those weights.

Spectral evaluation of a positive function at the outermost Hermite nodes is
dominated by roundoff, which is amplified by roughly exp(x^2/4).  On
``ou_line`` the manifold therefore carries a trusted window |x| <= R; nonlinear
functionals (entropy, Fisher information, bridge integrals) only sum over it.
On the periodic spaces every point is trusted.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .errors import ConstructionError, DomainError
from .reports import pointwise_check

log = logging.getLogger(__name__)

KINDS = ("circle", "torus2d", "ou_line")
MIN_POINTS = 8
MAX_OU_POINTS = 320
UNDERSHOOT = 1e-12
# Spectral derivatives on the OU line stay accurate somewhat beyond the trusted
# radius; nonlinear integrands are kept up to this multiple of R.
WINDOW_FACTOR = 1.5
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class GridManifold:
    """A discretized space together with the spectral data of its generator.

    Attributes
    ----------
    kind : one of KINDS.
    n : points per axis.
    length : period L (circle, torus2d) or None.
    radius : trusted half-width R (ou_line) or None.
    x : 1D array of axis coordinates.
    weights : quadrature weights, shape ``shape``.
    eigenvalues : generator eigenvalues in spectral layout.
    trusted : points where nonlinear quantities are reliable.
    interior : points used for pointwise checks.
    rho_ref, n_ref : curvature-dimension parameters of the space.
    """

    kind: str
    n: int
    length: float
    radius: float
    x: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray
    trusted: np.ndarray
    interior: np.ndarray
    rho_ref: float
    n_ref: float
    dim: int
    basis: np.ndarray = None
    wavenumbers: tuple = ()

    @property
    def shape(self):
        return self.weights.shape

    @property
    def size(self):
        return self.weights.size

    @property
    def periodic(self):
        return self.kind != "ou_line"

    @property
    def volume(self):
        return float(self.weights.sum())

    @property
    def label(self):
        """Report label: results on the Gaussian line are an extension."""
        return "extension" if self.kind == "ou_line" else "model"

    def mesh(self):
        """Coordinate arrays of shape ``shape``, one per axis."""
        if self.kind == "torus2d":
            return np.meshgrid(self.x, self.x, indexing="ij")
        return [self.x]


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ConstructionError(f"n must be an integer, got {n!r}")
    if n < MIN_POINTS:
        raise ConstructionError(f"n too small: n={n}, need n >= {MIN_POINTS}")


def _check_positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and np.isfinite(value)):
        raise ConstructionError(f"{name} must be a finite number, got {value!r}")
    if value <= 0:
        raise ConstructionError(f"{name} must be positive, got {value!r}")


def build_grid(kind, n, **geometry):
    """Build a GridManifold.

    Geometry keywords: ``length`` (circle, torus2d; default 2*pi) and
    ``radius`` (ou_line trusted half-width; default 6).
    """
    if kind not in KINDS:
        raise ConstructionError(f"unknown manifold kind {kind!r}; expected one of {KINDS}")
    _check_n(n)
    n = int(n)
    allowed = {"radius"} if kind == "ou_line" else {"length"}
    extra = set(geometry) - allowed
    if extra:
        raise ConstructionError(f"unexpected geometry parameter(s) for {kind}: {sorted(extra)}")
    if kind == "ou_line":
        radius = geometry.get("radius", 6.0)
        _check_positive("radius", radius)
        return _build_ou(n, float(radius))
    length = geometry.get("length", 2.0 * np.pi)
    _check_positive("length", length)
    return _build_periodic(kind, n, float(length))


def _build_periodic(kind, n, length):
    x = np.arange(n) * (length / n)
    k = (2.0 * np.pi / length) * np.fft.fftfreq(n, 1.0 / n)
    kd = k.copy()
    if n % 2 == 0:
        kd[n // 2] = 0.0  # the Nyquist mode has no real first derivative
    if kind == "circle":
        weights = np.full(n, length / n)
        eig = -(k**2)
        dim, n_ref = 1, 1.0
    else:
        weights = np.full((n, n), (length / n) ** 2)
        eig = -(k[:, None] ** 2 + k[None, :] ** 2)
        dim, n_ref = 2, 2.0
    mask = np.ones(weights.shape, dtype=bool)
    return GridManifold(
        kind=kind,
        n=n,
        length=length,
        radius=None,
        x=_frozen(x),
        weights=_frozen(weights),
        eigenvalues=_frozen(eig),
        trusted=_frozen(mask),
        interior=_frozen(mask.copy()),
        rho_ref=0.0,
        n_ref=n_ref,
        dim=dim,
        wavenumbers=(_frozen(kd),),
    )


def hermite_basis(x, n):
    """Normalized probabilists' Hermite functions He_k/sqrt(k!) at x, k < n."""
    V = np.empty((len(x), n))
    V[:, 0] = 1.0
    if n > 1:
        V[:, 1] = x
    for k in range(1, n - 1):
        V[:, k + 1] = (x * V[:, k] - np.sqrt(k) * V[:, k - 1]) / np.sqrt(k + 1)
    return V


def _build_ou(n, radius):
    if n > MAX_OU_POINTS:
        raise ConstructionError(
            f"n too large for ou_line: n={n}, Gauss-Hermite weights underflow beyond {MAX_OU_POINTS}"
        )
    x, w = hermegauss(n)
    w = w / w.sum()
    if not np.all(w > 0):
        raise ConstructionError(f"non-positive Gauss-Hermite weight at n={n}")
    V = hermite_basis(x, n)
    trusted = np.abs(x) <= radius
    if trusted.sum() < MIN_POINTS:
        raise ConstructionError(f"radius={radius} leaves fewer than {MIN_POINTS} trusted points")
    cut = int(math.ceil(0.1 * n))
    idx = np.arange(n)
    interior = trusted & (idx >= cut) & (idx < n - cut)
    return GridManifold(
        kind="ou_line",
        n=n,
        length=None,
        radius=radius,
        x=_frozen(x),
        weights=_frozen(w),
        eigenvalues=_frozen(-np.arange(n, dtype=float)),
        trusted=_frozen(trusted),
        interior=_frozen(interior),
        rho_ref=1.0,
        n_ref=np.inf,
        dim=1,
        basis=_frozen(V),
    )


# ---------------------------------------------------------------------------
# fields and spectral transforms


def as_field(M, f):
    """Validate `f` as a field on M and return it as a float array of shape M.shape."""
    a = np.asarray(f, dtype=float)
    if a.shape != M.shape:
        if a.size != M.size:
            raise DomainError(f"field has {a.size} values, manifold has {M.size} points")
        a = a.reshape(M.shape)
    if not np.all(np.isfinite(a)):
        bad = int(np.flatnonzero(~np.isfinite(a.ravel()))[0])
        raise DomainError(f"field has a non-finite value at point {bad}")
    return a


def _is_constant(f):
    flat = f.ravel()
    return bool(np.all(flat == flat[0]))


def spectral_coefficients(M, f):
    """Coefficients of f in the eigenbasis of the generator."""
    f = as_field(M, f)
    if M.periodic:
        return np.fft.fftn(f)
    return M.basis.T @ (M.weights * f)


def from_coefficients(M, c):
    """Grid values of the expansion with coefficients c."""
    if M.periodic:
        return np.fft.ifftn(c).real
    return M.basis @ c


def gradient(M, f):
    """Partial derivatives of f by spectral differentiation, one array per axis."""
    f = as_field(M, f)
    if _is_constant(f):
        return [np.zeros(M.shape) for _ in range(M.dim)]
    c = spectral_coefficients(M, f)
    if M.kind == "circle":
        return [np.fft.ifft(1j * M.wavenumbers[0] * c).real]
    if M.kind == "torus2d":
        k = M.wavenumbers[0]
        return [
            np.fft.ifft2(1j * k[:, None] * c).real,
            np.fft.ifft2(1j * k[None, :] * c).real,
        ]
    return [M.basis @ _hermite_derivative(c)]


def _hermite_derivative(c):
    """Coefficients of f' from those of f in the normalized Hermite basis."""
    dc = np.zeros_like(c)
    dc[:-1] = np.sqrt(np.arange(1, c.size)) * c[1:]
    return dc


def _noise_floor(M, f, c, decay):
    """Roundoff bound for the synthesized values of P_t f at each point."""
    fmax = float(np.max(np.abs(f)))
    if M.periodic:
        N = M.size
        bound = (np.sum(np.abs(c * decay)) + fmax * np.sum(decay)) / N
        return np.full(M.shape, 16.0 * _EPS * math.log2(N) * bound)
    absV = np.abs(M.basis)
    return 16.0 * _EPS * math.sqrt(M.n) * (absV @ np.abs(c * decay) + fmax * (absV @ decay))


def heat_apply_clamped(M, t, f):
    """Return (P_t f, clamp) where clamp is the largest positivity correction made.

    For nonnegative input the output is kept strictly positive: values below
    the roundoff floor of the spectral synthesis are raised to that floor.  A
    trusted-point value more negative than the floor by more than 1e-12
    (relative to max|f|) signals a broken setup and raises DomainError.
    """
    if not np.isfinite(t) or t < 0:
        raise DomainError(f"heat semigroup time must be >= 0, got t={t}")
    f = as_field(M, f)
    if t == 0 or _is_constant(f):
        return f.copy(), 0.0
    c = spectral_coefficients(M, f)
    decay = np.exp(M.eigenvalues * t)
    out = from_coefficients(M, c * decay)
    if f.min() < 0:
        return out, 0.0
    floor = _noise_floor(M, f, c, decay)
    low = out < floor
    if not np.any(low):
        return out, 0.0
    limit = floor + UNDERSHOOT * max(1.0, float(np.max(f)))
    broken = low & M.trusted & (out < -limit)
    if np.any(broken):
        i = int(np.flatnonzero(broken.ravel())[0])
        raise DomainError(
            f"heat_apply undershoot {out.ravel()[i]:.3e} at point {i} exceeds the clamp limit"
        )
    clamp = float(np.max((floor - out)[low]))
    out = np.where(low, floor, out)
    log.debug("heat_apply clamped %d values, magnitude %.3e", int(low.sum()), clamp)
    return out, clamp


def heat_apply(M, t, f):
    """P_t f, computed by multiplying spectral coefficients by exp(lambda_k t)."""
    return heat_apply_clamped(M, t, f)[0]


def apply_generator(M, f):
    """Laplacian (circle, torus2d) or OU generator (ou_line) of f."""
    f = as_field(M, f)
    if _is_constant(f):
        return np.zeros(M.shape)
    return from_coefficients(M, M.eigenvalues * spectral_coefficients(M, f))


def gamma(M, f, g=None):
    """Carre du champ: grad f . grad g, or |grad f|^2 when g is omitted."""
    df = gradient(M, f)
    if g is None:
        return sum(d * d for d in df)
    dg = gradient(M, g)
    return sum(a * b for a, b in zip(df, dg))


def gamma2(M, f):
    """Iterated carre du champ 1/2 L Gamma(f) - Gamma(f, L f).

    On periodic grids the formula is applied as written.  On the OU line the
    product Gamma(f) is not resolved by the Hermite basis at the outer
    nodes, so L Gamma(f) is expanded by the Leibniz rule
    L(u^2) = 2 u L u + 2 Gamma(u) with u = f'; every spectral operation
    then acts on f's own coefficients.
    """
    f = as_field(M, f)
    if _is_constant(f):
        return np.zeros(M.shape)
    if M.periodic:
        Lf = apply_generator(M, f)
        return 0.5 * apply_generator(M, gamma(M, f)) - gamma(M, f, Lf)
    c = spectral_coefficients(M, f)
    k = -M.eigenvalues
    d1 = _hermite_derivative(c)
    d2 = _hermite_derivative(d1)
    u = M.basis @ d1
    Lu = M.basis @ (-k * d1)
    dLf = M.basis @ _hermite_derivative(-k * c)
    return u * Lu + (M.basis @ d2) ** 2 - u * dLf


def check_cd(M, rho, n, trial_fields, rtol=1e-9):
    """Test Gamma2(f) >= rho Gamma(f) + (Lf)^2 / n on the interior points.

    Returns the report at the worst point over all trial fields.  ``n`` may be
    ``np.inf``.
    """
    trial_fields = list(trial_fields)
    if not trial_fields:
        raise DomainError("check_cd needs at least one trial field")
    if not n > 0:
        raise DomainError(f"dimension parameter must be positive, got n={n}")
    worst = None
    for i, f in enumerate(trial_fields):
        f = as_field(M, f)
        Lf = apply_generator(M, f)
        lhs = rho * gamma(M, f)
        if np.isfinite(n):
            lhs = lhs + Lf**2 / n
        check = pointwise_check(
            "curvature-dimension",
            lhs,
            gamma2(M, f),
            M.interior,
            rtol,
            metadata={"rho": rho, "n": n, "field": i, "label": M.label},
        )
        rep = check.worst
        if worst is None or rep.slack / rep.tolerance < worst.slack / worst.tolerance:
            worst = rep
    return worst


def windowed(M, h):
    """Zero a derived field outside the region where spectral derivatives are reliable.

    Periodic grids are returned unchanged.  On the OU line, values computed
    from spectral derivatives degrade quickly past the trusted radius R and
    grow without bound at the outermost nodes; before such a field is fed to
    the semigroup it is cut to |x| <= WINDOW_FACTOR * R.  From interior
    points the Mehler kernel gives the discarded region negligible weight.
    """
    h = np.asarray(h, dtype=float)
    if M.periodic:
        return h
    keep = np.abs(M.x) <= WINDOW_FACTOR * M.radius
    with np.errstate(invalid="ignore"):
        return np.where(keep, h, 0.0)


def integrate(M, f, trusted=False):
    """Quadrature sum of w_i f_i, optionally restricted to the trusted points."""
    if trusted:
        f = np.asarray(f, dtype=float)
        if f.size == M.size:
            f = np.where(M.trusted, f.reshape(M.shape), 0.0)
    return float(np.sum(M.weights * as_field(M, f)))


def heat_kernel_column(M, index, t):
    """Density of P_t^* applied to the grid Dirac mass at flat point `index`."""
    delta = np.zeros(M.size)
    delta[index] = 1.0 / M.weights.ravel()[index]
    return heat_apply(M, t, delta.reshape(M.shape))


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative field with unit quadrature mass (relative to the reference measure)."""

    manifold: GridManifold
    values: np.ndarray

    @classmethod
    def from_values(cls, M, values, normalize=False, atol=1e-12):
        v = as_field(M, values).copy()
        if np.any(v < 0):
            i = int(np.flatnonzero(v.ravel() < 0)[0])
            raise DomainError(f"density is negative at point {i}")
        mass = integrate(M, v)
        if normalize:
            if not mass > 0:
                raise DomainError("density has zero mass")
            v /= mass
        elif abs(mass - 1.0) > atol:
            raise DomainError(f"density mass {mass!r} differs from 1")
        return cls(M, _frozen(v))

    @property
    def mass(self):
        return integrate(self.manifold, self.values)


def dual_apply(M, t, mu):
    """Evolve a density by the dual semigroup; mass is conserved."""
    return Density(M, _frozen(heat_apply(M, t, mu.values)))


def entropy(M, mu):
    """Entropy of the density: sum of w rho log rho, with 0 log 0 = 0."""
    rho = mu.values
    safe = np.where(rho > 0, rho, 1.0)
    return integrate(M, np.where(rho > 0, rho * np.log(safe), 0.0), trusted=True)


def fisher_info(M, mu):
    """Fisher information: integral of Gamma(log rho) against the density."""
    rho = mu.values
    if np.any(rho <= 0):
        i = int(np.flatnonzero(rho.ravel() <= 0)[0])
        raise DomainError(f"Fisher information needs a positive density; value at point {i} is {rho.ravel()[i]!r}")
    return integrate(M, gamma(M, np.log(rho)) * rho, trusted=True)


def spectrum_table(M):
    """Rows (index, eigenvalue) in storage order of the spectral layout."""
    eig = M.eigenvalues.ravel()
    return np.arange(eig.size), eig.copy()
