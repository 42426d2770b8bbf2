"""Inequality reports: one named comparison lhs <= rhs with its slack.

Slack is always oriented as rhs - lhs, so a nonnegative slack means the
inequality holds.  A report passes when slack >= -tolerance.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError

INTEGRATED = "integrated"


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    tolerance: float
    passed: bool
    point: object = INTEGRATED
    metadata: dict = field(default_factory=dict)
    gating: bool = True

    def to_dict(self):
        return {
            "name": self.name,
            "point": self.point,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "gating": self.gating,
            "metadata": dict(self.metadata),
        }


def make_report(name, lhs, rhs, tolerance, point=INTEGRATED, metadata=None, gating=True):
    """Build a report for the claim lhs <= rhs."""
    lhs = float(lhs)
    rhs = float(rhs)
    if not (np.isfinite(lhs) and np.isfinite(rhs)):
        raise NumericalError(f"{name}: non-finite value (lhs={lhs}, rhs={rhs})")
    slack = rhs - lhs
    return InequalityReport(
        name=name,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        tolerance=float(tolerance),
        passed=bool(slack >= -tolerance),
        point=point,
        metadata=dict(metadata or {}),
        gating=gating,
    )


@dataclass(frozen=True)
class PointwiseCheck:
    """A pointwise inequality lhs(x) <= rhs(x) evaluated on a set of grid points.

    `lhs` and `rhs` hold the values at the evaluated points, `indices` the flat
    grid indices of those points.  The tolerance at each point is
    ``rtol * max(1, |lhs|, |rhs|)``.
    """

    name: str
    lhs: np.ndarray
    rhs: np.ndarray
    indices: np.ndarray
    rtol: float
    metadata: dict = field(default_factory=dict)
    gating: bool = True

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def tolerances(self):
        return self.rtol * np.maximum(1.0, np.maximum(np.abs(self.lhs), np.abs(self.rhs)))

    @property
    def passed(self):
        return bool(np.all(self.slack >= -self.tolerances))

    def report_at(self, k):
        """Report for the k-th evaluated point."""
        return make_report(
            self.name,
            self.lhs[k],
            self.rhs[k],
            self.tolerances[k],
            point=int(self.indices[k]),
            metadata=self.metadata,
            gating=self.gating,
        )

    @property
    def worst(self):
        """Report at the point with the smallest tolerance-normalized slack."""
        k = int(np.argmin(self.slack / self.tolerances))
        return self.report_at(k)

    def reports(self):
        return [self.report_at(k) for k in range(len(self.indices))]


def pointwise_check(name, lhs, rhs, mask, rtol, metadata=None, gating=True):
    """Restrict full-grid arrays to `mask` and wrap them in a PointwiseCheck."""
    lhs = np.asarray(lhs, dtype=float).ravel()
    rhs = np.asarray(rhs, dtype=float).ravel()
    idx = np.flatnonzero(np.asarray(mask).ravel())
    lv, rv = lhs[idx], rhs[idx]
    if not (np.all(np.isfinite(lv)) and np.all(np.isfinite(rv))):
        raise NumericalError(f"{name}: non-finite pointwise values")
    return PointwiseCheck(name, lv, rv, idx, float(rtol), dict(metadata or {}), gating)
