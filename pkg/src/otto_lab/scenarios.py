"""Built-in scenarios, stored as configuration text in the runner's format."""

from .config import parse_config_text
from .errors import ConfigError

_UNIFORM_SANITY = """
[scenario]
id = uniform-sanity
suite = toy, bridge, local
T = 0.5

[manifold]
kind = circle
n = 64

[mode]
kind = zero_n
n = 1

[mu]
preset = uniform

[nu]
preset = uniform

[g]
preset = constant
value = 1

[toy]
model = zero
x = 0.5
y = 0.5
"""

_CIRCLE_MARGINALS = """
[mu]
preset = cosine_bump
center = 0.0
width = 0.6
floor = 0.2

[nu]
preset = cosine_bump
center = 2.0
width = 0.8
floor = 0.2
"""

_CIRCLE_BUMP_0N = (
    """
[scenario]
id = circle-bump-0n
suite = bridge
T = 0.5

[manifold]
kind = circle
n = 256

[mode]
kind = zero_n
n = 1
"""
    + _CIRCLE_MARGINALS
)

_CIRCLE_BUMP_RHO0 = (
    """
[scenario]
id = circle-bump-rho0
suite = bridge
T = 0.5

[manifold]
kind = circle
n = 256

[mode]
kind = rho_inf
rho = 0
"""
    + _CIRCLE_MARGINALS
)

_TORUS_BUMP_0N = """
[scenario]
id = torus-bump-0n
suite = bridge
T = 0.5

[manifold]
kind = torus2d
n = 32

[mode]
kind = zero_n
n = 2

[mu]
preset = cosine_bump
center = 1.0, 1.0
width = 0.9
floor = 0.3

[nu]
preset = cosine_bump
center = 4.0, 3.5
width = 1.0
floor = 0.3
"""

_OU_GAUSSIAN = """
[scenario]
id = ou-gaussian-cd1
suite = bridge
T = 1.0

[manifold]
kind = ou_line
n = 256
radius = 6

[mode]
kind = rho_inf
rho = 1

[mu]
preset = gaussian
mean = 0.0
variance = 0.25

[nu]
preset = gaussian
mean = 0.5
variance = 0.25
"""

_TOY_QUADRATIC = """
[scenario]
id = toy-quadratic-rho1
suite = toy
T = 1.0
seed = 0

[mode]
kind = rho_inf
rho = 1

[toy]
model = quadratic
rho0 = 1
x = 0
y = 1
"""

_TOY_LOG = """
[scenario]
id = toy-log-0n
suite = toy
T = 1.0
seed = 0

[mode]
kind = zero_n
n = 1

[toy]
model = neg_log
n0 = 1
x = 1.0
y = 2.0
"""

_CIRCLE_LOCAL = """
[scenario]
id = circle-local
suite = local
T = 0.5

[manifold]
kind = circle
n = 256

[mode]
kind = zero_n
n = 1

[g]
preset = cosine_bump
center = 1.0
width = 0.5
floor = 0.05
"""

_OU_LOCAL = """
[scenario]
id = ou-local-cd1
suite = local
T = 0.5

[manifold]
kind = ou_line
n = 128
radius = 6

[mode]
kind = rho_inf
rho = 1

[g]
preset = exp_sine
amplitude = 0.3
"""

_TORUS_LOCAL = """
[scenario]
id = torus-local-0n
suite = local
T = 0.5

[manifold]
kind = torus2d
n = 64

[mode]
kind = zero_n
n = 2

[g]
preset = cosine_bump
center = 2.0, 3.0
width = 0.7
floor = 0.1
"""

_CIRCLE_LIYAU = """
[scenario]
id = circle-liyau-kernel
suite = local
T = 0.5

[manifold]
kind = circle
n = 256

[mode]
kind = zero_n
n = 1

[g]
preset = heat_kernel
index = 0
time = 0.1
"""

_DELTA_CIRCLE = """
[scenario]
id = delta-limit-circle
suite = delta-limit
T = 0.5

[manifold]
kind = circle
n = 512

[mode]
kind = rho_inf
rho = 0

[g]
preset = exp_sine
amplitude = 0.5

[delta]
index = 37
widths = 0.4, 0.2, 0.1, 0.05
pairs = gradient-commutation, local-lsi
"""

BUILTINS = {
    "uniform-sanity": ("Uniform marginals, constant g, free toy motion: every slack is exact", _UNIFORM_SANITY),
    "circle-bump-0n": ("Bridge between two bumps on the circle under CD(0,1)", _CIRCLE_BUMP_0N),
    "circle-bump-rho0": ("Bridge between two bumps on the circle under CD(0,inf)", _CIRCLE_BUMP_RHO0),
    "torus-bump-0n": ("Bridge between product bumps on the flat torus under CD(0,2)", _TORUS_BUMP_0N),
    "ou-gaussian-cd1": ("Gaussian bridge on the OU line under CD(1,inf), with closed-form oracle", _OU_GAUSSIAN),
    "toy-quadratic-rho1": ("Toy model F = x^2/2, (rho,inf) inequalities with rho = 1", _TOY_QUADRATIC),
    "toy-log-0n": ("Toy model F = -log x, (0,n) inequalities with n = 1", _TOY_LOG),
    "circle-local": ("Local inequalities for a bump on the circle under CD(0,1)", _CIRCLE_LOCAL),
    "ou-local-cd1": ("Local inequalities on the OU line under CD(1,inf)", _OU_LOCAL),
    "torus-local-0n": ("Local inequalities for a product bump on the torus under CD(0,2)", _TORUS_LOCAL),
    "circle-liyau-kernel": ("Li-Yau bound for a heat kernel column on the circle", _CIRCLE_LIYAU),
    "delta-limit-circle": ("Bridge inequalities against shrinking bumps versus local values", _DELTA_CIRCLE),
}


def builtin_ids():
    return list(BUILTINS)


def builtin_config(scenario_id):
    """Parsed configuration of a built-in scenario."""
    if scenario_id not in BUILTINS:
        raise ConfigError(f"unknown built-in scenario {scenario_id!r}; run 'otto-lab list'")
    return parse_config_text(BUILTINS[scenario_id][1], source=f"<builtin {scenario_id}>")


def list_scenarios():
    """One line per built-in scenario: id and description."""
    width = max(len(k) for k in BUILTINS)
    return "\n".join(f"{k:<{width}}  {desc}" for k, (desc, _) in BUILTINS.items()) + "\n"
