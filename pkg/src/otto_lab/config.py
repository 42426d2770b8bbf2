"""Experiment configuration: a flat ``key = value`` file with bracketed sections.

Sections and keys
-----------------
[scenario]  id, suite (toy | bridge | local | delta-limit | all, or a comma
            list), T, seed, output
[manifold]  kind (circle | torus2d | ou_line), n, length (periodic), radius (ou_line)
[mode]      kind (rho_inf | zero_n), rho, n
[mu], [nu]  marginal densities for the bridge suite (normalized to unit mass)
[g]         positive function for the local and delta-limit suites
[toy]       model (zero | quadratic | neg_log), dim, rho0, n0, x, y,
            perturbations, amplitude
[solver]    ipfp_tol, ipfp_max_iter, quadrature_nodes, quadrature_tol,
            energy_samples, bvp_m, bvp_nodes, bvp_tol, inequality_tol, local_rtol
[delta]     index, widths, pairs

Function sections take ``preset`` plus the parameters of that preset; see
PRESETS.  Unknown sections, keys and preset parameters are rejected.
"""

import configparser
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import Density, build_grid, heat_kernel_column
from .local import DELTA_PAIRS
from .modes import Mode

SUITES = ("toy", "bridge", "local", "delta-limit")
EXP_CLIP = 700.0

# preset -> {parameter: default}
PRESETS = {
    "constant": {"value": 1.0},
    "uniform": {},
    "cosine": {"amplitude": 0.5, "wavenumber": 1.0, "center": 0.0},
    "cosine_bump": {"amplitude": 1.0, "width": 0.5, "center": 0.0, "floor": 0.0},
    "gaussian": {"mean": 0.0, "variance": 1.0},
    "exp_sine": {"amplitude": 0.3, "wavenumber": 1.0, "center": 0.0},
    "heat_kernel": {"index": 0, "time": 0.1},
}
VECTOR_PARAMS = {"center", "mean"}
INT_PARAMS = {"index"}

SOLVER_DEFAULTS = {
    "ipfp_tol": 1e-12,
    "ipfp_max_iter": 500,
    "quadrature_nodes": 33,
    "quadrature_tol": 1e-7,
    "energy_samples": 11,
    "bvp_m": 256,
    "bvp_nodes": 64,
    "bvp_tol": 1e-10,
    "inequality_tol": 1e-6,
    "local_rtol": 1e-8,
}
SOLVER_INTS = {"ipfp_max_iter", "quadrature_nodes", "energy_samples", "bvp_m", "bvp_nodes"}

TOY_DEFAULTS = {
    "model": "quadratic",
    "dim": 1,
    "rho0": 1.0,
    "n0": 1.0,
    "x": "0.0",
    "y": "1.0",
    "perturbations": 20,
    "amplitude": 0.05,
}

SECTION_KEYS = {
    "scenario": {"id", "suite", "T", "seed", "output"},
    "manifold": {"kind", "n", "length", "radius"},
    "mode": {"kind", "rho", "n"},
    "toy": set(TOY_DEFAULTS),
    "solver": set(SOLVER_DEFAULTS),
    "delta": {"index", "widths", "pairs"},
}
FUNCTION_SECTIONS = ("mu", "nu", "g")


@dataclass(frozen=True)
class FieldSpec:
    """A named preset with its parameters."""

    preset: str
    params: dict

    def as_dict(self):
        return {"preset": self.preset, **self.params}


@dataclass(frozen=True)
class ToySpec:
    model: str
    dim: int
    rho0: float
    n0: float
    x: tuple
    y: tuple
    perturbations: int
    amplitude: float


@dataclass(frozen=True)
class DeltaSpec:
    index: int
    widths: tuple
    pairs: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    suites: tuple
    T: float
    seed: int
    output: str
    manifold: dict
    mode: Mode
    mu: FieldSpec = None
    nu: FieldSpec = None
    g: FieldSpec = None
    toy: ToySpec = None
    solver: dict = field(default_factory=lambda: dict(SOLVER_DEFAULTS))
    delta: DeltaSpec = None

    def as_dict(self):
        """Config echo for reports, in a fixed key order."""
        out = {
            "scenario": self.scenario,
            "suites": list(self.suites),
            "T": self.T,
            "seed": self.seed,
            "manifold": dict(self.manifold) if self.manifold else None,
            "mode": self.mode.as_dict(),
        }
        for name in FUNCTION_SECTIONS:
            spec = getattr(self, name)
            if spec is not None:
                out[name] = spec.as_dict()
        if self.toy is not None:
            out["toy"] = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self.toy).items()}
        out["solver"] = dict(self.solver)
        if self.delta is not None:
            out["delta"] = {"index": self.delta.index, "widths": list(self.delta.widths), "pairs": list(self.delta.pairs)}
        return out


# ---------------------------------------------------------------------------
# parsing helpers


def _where(section, key):
    return f"[{section}] {key}"


def _float(section, key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{_where(section, key)}: expected a number, got {text!r}") from None


def _int(section, key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{_where(section, key)}: expected an integer, got {text!r}") from None


def _floats(section, key, text):
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{_where(section, key)}: expected a comma-separated list of numbers")
    return tuple(_float(section, key, p) for p in parts)


def _positive(section, key, value):
    if not value > 0:
        raise ConfigError(f"{_where(section, key)}: must be positive, got {value!r}")
    return value


def _check_keys(section, keys, allowed):
    for key in keys:
        if key not in allowed:
            choices = ", ".join(sorted(allowed))
            raise ConfigError(f"unknown key {key!r} in section [{section}]; allowed keys: {choices}")


def _parse_field(section, items):
    if "preset" not in items:
        raise ConfigError(f"section [{section}] needs a 'preset' key")
    preset = items["preset"]
    if preset not in PRESETS:
        raise ConfigError(f"{_where(section, 'preset')}: unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    defaults = PRESETS[preset]
    rest = {k: v for k, v in items.items() if k != "preset"}
    _check_keys(section, rest, set(defaults) | {"preset"})
    params = {}
    for key, default in defaults.items():
        if key not in rest:
            params[key] = default
        elif key in INT_PARAMS:
            params[key] = _int(section, key, rest[key])
        elif key in VECTOR_PARAMS:
            vals = _floats(section, key, rest[key])
            params[key] = vals[0] if len(vals) == 1 else list(vals)
        else:
            params[key] = _float(section, key, rest[key])
    for key in ("width", "variance", "time"):
        if key in params:
            _positive(section, key, params[key])
    if preset == "constant":
        _positive(section, "value", params["value"])
    return FieldSpec(preset, params)


def parse_config_text(text, source="<string>"):
    """Parse and validate configuration text."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    known = set(SECTION_KEYS) | set(FUNCTION_SECTIONS)
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"{source}: unknown section [{section}]; allowed: {', '.join(sorted(known))}")
        if section in SECTION_KEYS:
            _check_keys(section, cp[section], SECTION_KEYS[section])
    for required in ("scenario", "mode"):
        if not cp.has_section(required):
            raise ConfigError(f"{source}: missing section [{required}]")

    sc = cp["scenario"]
    scenario = sc.get("id", "").strip()
    if not scenario:
        raise ConfigError(f"{_where('scenario', 'id')}: missing scenario id")
    if "T" not in sc:
        raise ConfigError(f"{_where('scenario', 'T')}: missing horizon")
    T = _positive("scenario", "T", _float("scenario", "T", sc["T"]))
    seed = _int("scenario", "seed", sc.get("seed", "0"))
    if seed < 0:
        raise ConfigError(f"{_where('scenario', 'seed')}: must be nonnegative")
    suite_text = sc.get("suite", "all")
    suites = tuple(s.strip() for s in suite_text.split(",") if s.strip())
    if suites == ("all",):
        suites = tuple(s for s in SUITES if _suite_inputs_present(cp, s))
    for s in suites:
        if s not in SUITES:
            raise ConfigError(f"{_where('scenario', 'suite')}: unknown suite {s!r}; choose from {', '.join(SUITES)}, all")
    if not suites:
        raise ConfigError(f"{_where('scenario', 'suite')}: no suite has its inputs configured")

    manifold = None
    if cp.has_section("manifold"):
        manifold = _parse_manifold(cp["manifold"])
    elif set(suites) - {"toy"}:
        raise ConfigError(f"{source}: missing section [manifold]")

    md = cp["mode"]
    mkind = md.get("kind", "")
    if mkind == "rho_inf":
        if "n" in md:
            raise ConfigError(f"{_where('mode', 'n')}: rho_inf mode has infinite dimension; remove n")
        mode = Mode.rho_inf(_float("mode", "rho", md.get("rho", "0")))
    elif mkind in ("zero_n", "0n"):
        if "rho" in md:
            raise ConfigError(f"{_where('mode', 'rho')}: zero_n mode has rho = 0; remove rho")
        if "n" not in md:
            raise ConfigError(f"{_where('mode', 'n')}: zero_n mode needs a dimension n")
        mode = Mode.zero_n(_positive("mode", "n", _float("mode", "n", md["n"])))
    else:
        raise ConfigError(f"{_where('mode', 'kind')}: expected rho_inf or zero_n, got {mkind!r}")

    solver = dict(SOLVER_DEFAULTS)
    if cp.has_section("solver"):
        for key, text in cp["solver"].items():
            value = _int("solver", key, text) if key in SOLVER_INTS else _float("solver", key, text)
            solver[key] = _positive("solver", key, value)

    fields = {name: _parse_field(name, dict(cp[name])) for name in FUNCTION_SECTIONS if cp.has_section(name)}

    toy = None
    if cp.has_section("toy"):
        raw = {**TOY_DEFAULTS, **dict(cp["toy"])}
        model = raw["model"]
        if model not in ("zero", "quadratic", "neg_log"):
            raise ConfigError(f"{_where('toy', 'model')}: unknown model {model!r}")
        dim = _int("toy", "dim", raw["dim"])
        _positive("toy", "dim", dim)
        x = _floats("toy", "x", raw["x"])
        y = _floats("toy", "y", raw["y"])
        for key, v in (("x", x), ("y", y)):
            if len(v) != dim:
                raise ConfigError(f"{_where('toy', key)}: expected {dim} values, got {len(v)}")
        toy = ToySpec(
            model=model,
            dim=dim,
            rho0=_float("toy", "rho0", raw["rho0"]),
            n0=_positive("toy", "n0", _float("toy", "n0", raw["n0"])),
            x=x,
            y=y,
            perturbations=_int("toy", "perturbations", raw["perturbations"]),
            amplitude=_positive("toy", "amplitude", _float("toy", "amplitude", raw["amplitude"])),
        )

    delta = None
    if cp.has_section("delta"):
        dd = cp["delta"]
        widths = _floats("delta", "widths", dd.get("widths", "0.4, 0.2, 0.1, 0.05"))
        if any(w <= 0 for w in widths) or any(b >= a for a, b in zip(widths, widths[1:])):
            raise ConfigError(f"{_where('delta', 'widths')}: widths must be positive and strictly decreasing")
        pairs = tuple(p.strip() for p in dd.get("pairs", "gradient-commutation, local-lsi").split(",") if p.strip())
        for p in pairs:
            if p not in DELTA_PAIRS:
                raise ConfigError(f"{_where('delta', 'pairs')}: unknown pair {p!r}; choose from {', '.join(DELTA_PAIRS)}")
        if not pairs:
            raise ConfigError(f"{_where('delta', 'pairs')}: at least one pair is needed")
        delta = DeltaSpec(_int("delta", "index", dd.get("index", "0")), widths, pairs)

    for s in suites:
        need = {"bridge": ("mu", "nu"), "local": ("g",), "delta-limit": ("g",)}.get(s, ())
        for name in need:
            if name not in fields:
                raise ConfigError(f"suite {s!r} needs a [{name}] section")
        if s == "toy" and toy is None:
            raise ConfigError("suite 'toy' needs a [toy] section")
        if s == "delta-limit" and delta is None:
            raise ConfigError("suite 'delta-limit' needs a [delta] section")

    return ExperimentConfig(
        scenario=scenario,
        suites=suites,
        T=T,
        seed=seed,
        output=sc.get("output", ""),
        manifold=manifold,
        mode=mode,
        mu=fields.get("mu"),
        nu=fields.get("nu"),
        g=fields.get("g"),
        toy=toy,
        solver=solver,
        delta=delta,
    )


def _parse_manifold(mf):
    kind = mf.get("kind", "")
    if kind not in ("circle", "torus2d", "ou_line"):
        raise ConfigError(f"{_where('manifold', 'kind')}: unknown manifold kind {kind!r}")
    if "n" not in mf:
        raise ConfigError(f"{_where('manifold', 'n')}: missing point count")
    manifold = {"kind": kind, "n": _int("manifold", "n", mf["n"])}
    if kind == "ou_line":
        if "length" in mf:
            raise ConfigError(f"{_where('manifold', 'length')}: not a parameter of ou_line (use radius)")
        manifold["radius"] = _positive("manifold", "radius", _float("manifold", "radius", mf.get("radius", "6")))
    else:
        if "radius" in mf:
            raise ConfigError(f"{_where('manifold', 'radius')}: not a parameter of {kind} (use length)")
        manifold["length"] = _positive("manifold", "length", _float("manifold", "length", mf.get("length", repr(2 * np.pi))))
    return manifold


def _suite_inputs_present(cp, suite):
    return {
        "toy": cp.has_section("toy"),
        "bridge": cp.has_section("mu") and cp.has_section("nu"),
        "local": cp.has_section("g"),
        "delta-limit": cp.has_section("delta") and cp.has_section("g"),
    }[suite]


def parse_config(path):
    """Read and validate a configuration file.

    A missing or unreadable file raises OSError; malformed content raises
    ConfigError with section and key context.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, source=str(path))


# ---------------------------------------------------------------------------
# presets


def _axis_params(value, dim):
    v = np.atleast_1d(np.asarray(value, dtype=float))
    if v.size == 1:
        return np.full(dim, v[0])
    if v.size != dim:
        raise ConfigError(f"expected 1 or {dim} values, got {v.size}")
    return v


def _offsets(M, center):
    """Coordinate offsets from the center, wrapped on periodic axes."""
    c = _axis_params(center, M.dim)
    out = []
    for axis, X in enumerate(M.mesh()):
        d = X - c[axis]
        if M.periodic:
            d = (d + M.length / 2) % M.length - M.length / 2
        out.append(d)
    return out


def _clipped_exp(z):
    return np.exp(np.clip(z, -EXP_CLIP, EXP_CLIP))


def build_field(M, spec):
    """Grid values of a preset on the manifold (not normalized)."""
    p = spec.params
    scale = 2.0 * np.pi / M.length if M.periodic else 1.0
    if spec.preset == "constant":
        return np.full(M.shape, p["value"])
    if spec.preset == "uniform":
        return np.ones(M.shape)
    if spec.preset == "cosine":
        d = _offsets(M, p["center"])
        return 1.0 + p["amplitude"] * sum(np.cos(p["wavenumber"] * scale * x) for x in d) / M.dim
    if spec.preset == "cosine_bump":
        d = _offsets(M, p["center"])
        z = sum(np.cos(scale * x) - 1.0 for x in d) / p["width"] ** 2
        return p["floor"] + p["amplitude"] * _clipped_exp(z)
    if spec.preset == "gaussian":
        d = _offsets(M, p["mean"])
        z = -sum(x**2 for x in d) / (2.0 * p["variance"])
        if not M.periodic:
            z = z + M.x**2 / 2.0  # density relative to the standard Gaussian
        return _clipped_exp(z)
    if spec.preset == "exp_sine":
        d = _offsets(M, p["center"])
        return _clipped_exp(p["amplitude"] * sum(np.sin(p["wavenumber"] * scale * x) for x in d))
    if spec.preset == "heat_kernel":
        if not 0 <= p["index"] < M.size:
            raise ConfigError(f"heat_kernel index {p['index']} outside 0..{M.size - 1}")
        return heat_kernel_column(M, p["index"], p["time"])
    raise ConfigError(f"unknown preset {spec.preset!r}")


def build_density(M, spec):
    """Preset normalized to a unit-mass Density."""
    return Density.from_values(M, build_field(M, spec), normalize=True)


def build_manifold(cfg):
    geometry = {k: v for k, v in cfg.manifold.items() if k not in ("kind", "n")}
    return build_grid(cfg.manifold["kind"], cfg.manifold["n"], **geometry)
