"""Scenario runner: execute the configured suites and write the run artifacts.

Each run writes into ``<output root>/<scenario id>/``:

* ``report.json``: schema version, config echo, inequality reports,
  consistency diagnostics, the series map used by the plot command and the
  exit status.
* CSV tables for the per-time and per-point data of each suite.
* ``FAILED`` when the run stopped on an error, holding the error message.

Output files contain no timings or paths, so repeated runs of one config
are byte-identical.  Timings are kept on the in-memory RunReport.
"""

import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bridge, local, toy
from .config import build_density, build_field, build_manifold
from .errors import CurvatureRefusal, OttoLabError
from .formatting import write_csv, write_json
from .modes import RHO_INF, require_mode
from .reports import make_report
from .rng import SplitMix64

SCHEMA_VERSION = 1
OUT_ENV = "OTTO_LAB_OUT"
DEFAULT_ROOT = "otto-lab-out"
FAILED_MARKER = "FAILED"

COST_GAP_LIMIT = 1e-6
ENERGY_DEVIATION_LIMIT = 1e-7
TOY_LIMIT = 1e-8
TAYLOR_FACTOR = 10.0


@dataclass(frozen=True)
class Diagnostic:
    """A consistency quantity with its limit: value <= limit (or >= for kind "min")."""

    name: str
    value: float
    limit: float
    kind: str = "max"

    @property
    def passed(self):
        if self.kind == "min":
            return bool(self.value >= self.limit)
        return bool(self.value <= self.limit)

    def to_dict(self):
        return {"name": self.name, "value": self.value, "limit": self.limit, "kind": self.kind, "pass": self.passed}


@dataclass
class RunReport:
    scenario: str
    config: dict
    label: str = "model"
    reports: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    exit_status: int = 0
    status: str = "pass"
    error: str = None
    timings: dict = field(default_factory=dict)
    outdir: Path = None

    def evaluate(self):
        """Set exit status from the gating reports and diagnostics."""
        ok = all(r["pass"] for r in self.reports if r["gating"]) and all(d.passed for d in self.diagnostics)
        self.exit_status = 0 if ok else 1
        self.status = "pass" if ok else "fail"

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "status": self.status,
            "exit_status": self.exit_status,
            "error": self.error,
            "label": self.label,
            "config": self.config,
            "reports": self.reports,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "results": self.extras,
            "series": self.series,
        }


def output_root(cfg=None, root=None):
    """OTTO_LAB_OUT, then an explicit root, then the config's output key, then ./otto-lab-out."""
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    if root:
        return Path(root)
    if cfg is not None and cfg.output:
        return Path(cfg.output)
    return Path(DEFAULT_ROOT)


# ---------------------------------------------------------------------------
# suites


def _toy_model(spec):
    if spec.model == "zero":
        return toy.zero_model(spec.dim)
    if spec.model == "quadratic":
        return toy.quadratic_model(spec.rho0, spec.dim)
    if spec.dim != 1:
        raise OttoLabError("the neg_log model is one-dimensional")
    return toy.neg_log_model(spec.n0)


def _run_toy(cfg, run, outdir):
    spec = cfg.toy
    s = cfg.solver
    F = _toy_model(spec)
    path = toy.solve_newton_bvp(F, spec.x, spec.y, cfg.T, m=s["bvp_m"], nodes=s["bvp_nodes"], tol=s["bvp_tol"])
    diag = toy.lambda_curve(F, path)
    _, deviation = toy.path_energy(F, path)
    x, y = path.X[0], path.X[-1]
    identity = abs(diag.lam[-1] - (diag.cost + 2.0 * float(F.value(y) - F.value(x))))
    reports = toy.check_toy_inequalities(F, path, cfg.mode, tol=s["inequality_tol"])
    run.reports += [r.to_dict() for r in reports]
    run.diagnostics += [
        Diagnostic("toy-bvp-residual", float(path.residual), s["bvp_tol"]),
        Diagnostic("toy-energy-deviation", deviation, TOY_LIMIT),
        Diagnostic("toy-lambda-identity", float(identity), TOY_LIMIT),
    ]
    if spec.perturbations > 0:
        costs = toy.perturbed_costs(F, path, SplitMix64(cfg.seed), spec.perturbations, spec.amplitude)
        run.diagnostics.append(Diagnostic("toy-perturbation-margin", float(np.min(costs) - diag.cost), -TOY_LIMIT, "min"))
    run.extras["toy"] = {
        "model": F.name,
        "cost": diag.cost,
        "energy": diag.energy_mean,
        "energy_deviation": deviation,
        "lambda_T": float(diag.lam[-1]),
        "iterations": path.iterations,
    }
    names, data = diag.table()
    write_csv(outdir / "toy_path.csv", names, data)
    run.series["lambda"] = {"file": "toy_path.csv", "columns": ["t", "lambda"]}
    run.series["phi"] = {"file": "toy_path.csv", "columns": ["t", "Phi"]}
    run.series["toy-energy"] = {"file": "toy_path.csv", "columns": ["t", "E"]}


def _run_bridge(cfg, M, run, outdir):
    s = cfg.solver
    mu = build_density(M, cfg.mu)
    nu = build_density(M, cfg.nu)
    pots = bridge.ipfp_solve(M, cfg.T, mu, nu, tol=s["ipfp_tol"], max_iter=s["ipfp_max_iter"])
    d = bridge.bridge_diagnostics(
        M, pots, mu, nu, cfg.mode, cfg.scenario, s["energy_samples"], s["quadrature_nodes"], s["quadrature_tol"]
    )
    run.reports += [r.to_dict() for r in d.reports]
    worst = [max(r) for r in pots.residuals]
    run.diagnostics += [
        Diagnostic("ipfp-residual", worst[-1], s["ipfp_tol"]),
        Diagnostic("ipfp-residual-increase", float(max(np.diff(worst), default=0.0)), 0.0),
        Diagnostic("cost-gap", d.cost_gap, COST_GAP_LIMIT),
        Diagnostic("energy-deviation", d.energy_deviation, ENERGY_DEVIATION_LIMIT),
    ]
    run.extras["bridge"] = {**d.to_dict(), "ipfp_iterations": pots.iterations, "normalization": pots.normalization}
    names, data = d.sample_table()
    write_csv(outdir / "bridge_samples.csv", names, data)
    run.series["energy"] = {"file": "bridge_samples.csv", "columns": ["t", "energy_sample"]}
    run.series["velocity-cost"] = {"file": "bridge_samples.csv", "columns": ["t", "velocity_cost"]}


def _run_local(cfg, M, run, outdir):
    g = build_field(M, cfg.g)
    checks = local.local_suite(M, cfg.mode, g, cfg.T, rtol=cfg.solver["local_rtol"])
    for c in checks:
        rep = c.worst.to_dict()
        rep["metadata"]["points"] = int(len(c.indices))
        rep["metadata"]["all_points_pass"] = c.passed
        run.reports.append(rep)
    idx = checks[0].indices
    coords = [X.ravel()[idx] for X in M.mesh()]
    axes = ["x"] if M.dim == 1 else [f"x{i}" for i in range(M.dim)]
    names = ["index"] + axes + [c.name for c in checks]
    data = np.column_stack([idx.astype(float)] + coords + [c.slack for c in checks])
    write_csv(outdir / "local_slack.csv", names, data)
    run.series["slack-profile"] = {"file": "local_slack.csv", "columns": names[: 1 + len(axes)] + [c.name for c in checks]}


def _run_delta(cfg, M, run, outdir):
    g = build_field(M, cfg.g)
    spec = cfg.delta
    rho = cfg.mode.rho if cfg.mode.kind == RHO_INF else 0.0
    records = {}
    for pair in spec.pairs:
        rec = local.delta_limit_bridge_vs_local(M, pair, g, spec.index, cfg.T, spec.widths, rho=rho)
        records[pair] = rec
        names, data = rec.table()
        write_csv(outdir / f"delta_{pair}.csv", names, data)
        meta = {"T": cfg.T, "rho": rho, "label": M.label}
        for w, lo, hi in zip(rec.widths, rec.bridge_lhs, rec.bridge_rhs):
            tol = cfg.solver["inequality_tol"] * max(1.0, abs(lo), abs(hi))
            r = make_report(f"delta-{pair}", lo, hi, tol, metadata={**meta, "width": float(w)})
            run.reports.append(r.to_dict())
        increase = max(float(np.max(np.diff(rec.gap_lhs))), float(np.max(np.diff(rec.gap_rhs)))) if len(rec.widths) > 1 else 0.0
        run.diagnostics.append(Diagnostic(f"delta-{pair}-gap-increase", increase, 0.0))
        ratio = max(_ratio(rec.gap_lhs[-1], rec.taylor_lhs[-1]), _ratio(rec.gap_rhs[-1], rec.taylor_rhs[-1]))
        run.diagnostics.append(Diagnostic(f"delta-{pair}-taylor-ratio", ratio, TAYLOR_FACTOR))
        run.extras.setdefault("delta", {})[pair] = rec.to_dict()
    first = next(iter(records.values()))
    names = ["width"]
    cols = [first.widths]
    for pair, rec in records.items():
        names += [f"gap_lhs_{pair}", f"gap_rhs_{pair}"]
        cols += [rec.gap_lhs, rec.gap_rhs]
    write_csv(outdir / "delta_gap.csv", names, np.column_stack(cols))
    run.series["delta-gap"] = {"file": "delta_gap.csv", "columns": names}


def _ratio(gap, model):
    if gap == 0:
        return 0.0
    return float(gap / model) if model > 0 else float("inf")


# ---------------------------------------------------------------------------


def run_scenario(cfg, root=None):
    """Run every suite of the config and write its artifacts.

    Returns a RunReport whose exit_status follows the CLI contract: 0 all
    pass, 1 numerical failure, 2 configuration or curvature refusal.  I/O
    errors propagate as OSError.
    """
    outdir = output_root(cfg, root) / cfg.scenario
    outdir.mkdir(parents=True, exist_ok=True)
    marker = outdir / FAILED_MARKER
    if marker.exists():
        marker.unlink()
    run = RunReport(scenario=cfg.scenario, config=cfg.as_dict(), outdir=outdir)
    try:
        M = build_manifold(cfg) if cfg.manifold is not None else None
        if M is not None:
            run.label = M.label
            require_mode(M, cfg.mode)
        for suite in cfg.suites:
            start = time.perf_counter()
            if suite == "toy":
                _run_toy(cfg, run, outdir)
            elif suite == "bridge":
                _run_bridge(cfg, M, run, outdir)
            elif suite == "local":
                _run_local(cfg, M, run, outdir)
            else:
                _run_delta(cfg, M, run, outdir)
            run.timings[suite] = time.perf_counter() - start
        run.evaluate()
    except OttoLabError as exc:
        run.exit_status = exc.exit_code
        run.status = "refused" if isinstance(exc, CurvatureRefusal) else "error"
        run.error = f"{type(exc).__name__}: {exc}"
        marker.write_text(run.error + "\n", encoding="utf-8")
    write_json(outdir / "report.json", run.to_dict())
    return run

