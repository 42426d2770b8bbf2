"""otto_lab: heat semigroups, entropic interpolation and local inequalities on model spaces."""

__version__ = "0.1.0"
