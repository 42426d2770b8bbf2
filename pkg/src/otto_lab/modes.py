"""Curvature modes: (rho, infinity) or (0, n)."""

from dataclasses import dataclass

import numpy as np

from .errors import CurvatureRefusal

RHO_INF = "rho_inf"
ZERO_N = "zero_n"


@dataclass(frozen=True)
class Mode:
    """A curvature-dimension claim CD(rho, n).

    ``kind`` is ``"rho_inf"`` (any rho, n infinite) or ``"zero_n"`` (rho = 0,
    finite n > 0).
    """

    kind: str
    rho: float = 0.0
    n: float = np.inf

    @classmethod
    def rho_inf(cls, rho):
        return cls(RHO_INF, float(rho), np.inf)

    @classmethod
    def zero_n(cls, n):
        n = float(n)
        if not (np.isfinite(n) and n > 0):
            raise ValueError(f"dimension n must be finite and positive, got {n}")
        return cls(ZERO_N, 0.0, n)

    def __post_init__(self):
        if self.kind not in (RHO_INF, ZERO_N):
            raise ValueError(f"unknown mode kind {self.kind!r}")

    def describe(self):
        if self.kind == RHO_INF:
            return f"CD({self.rho:g}, inf)"
        return f"CD(0, {self.n:g})"

    def as_dict(self):
        return {"kind": self.kind, "rho": self.rho, "n": self.n}


def require_mode(M, mode):
    """Refuse a mode that the manifold's curvature does not certify.

    Valid claims are CD(rho, inf) with rho <= rho_ref, and CD(0, n) with
    rho_ref >= 0 and n >= n_ref.
    """
    if mode.kind == RHO_INF:
        if mode.rho > M.rho_ref:
            raise CurvatureRefusal(
                f"{M.kind} satisfies CD({M.rho_ref:g}, {M.n_ref:g}); it does not satisfy "
                f"{mode.describe()} because rho={mode.rho:g} exceeds {M.rho_ref:g}"
            )
        return
    if M.rho_ref < 0 or mode.n < M.n_ref:
        raise CurvatureRefusal(
            f"{M.kind} satisfies CD({M.rho_ref:g}, {M.n_ref:g}); it does not satisfy "
            f"{mode.describe()} (dimension must be at least {M.n_ref:g})"
        )
