"""Reference surfaces used in tests, docs and the CLI (``--surface builtin:<name>``)."""
from __future__ import annotations

from .dsl import SurfaceDef, parse_surface_file

SOURCES = {
    "plane": """\
name = plane
x = u
y = v
z = 0
w = 0
u in [-1, 1] open
v in [-1, 1] open
""",
    "clifford": """\
# Clifford torus, contained in the 3-sphere of radius sqrt(2)
name = clifford
x = cos(u)
y = sin(u)
z = cos(v)
w = sin(v)
u in [0, 2*pi] periodic
v in [0, 2*pi] periodic
""",
    "zsquared": """\
# graph of the complex square w = z^2
name = zsquared
x = u
y = v
z = u^2 - v^2
w = 2*u*v
u in [-1, 1] open
v in [-1, 1] open
""",
    "sphere": """\
# unit 2-sphere in the hyperplane w = 0
name = sphere
x = cos(u)*cos(v)
y = sin(u)*cos(v)
z = sin(v)
w = 0
u in [0, 2*pi] periodic
v in [-1.4, 1.4] open
""",
    "torus": """\
# torus of revolution in R^3
name = torus
x = (R + r*cos(v))*cos(u)
y = (R + r*cos(v))*sin(u)
z = r*sin(v)
w = 0
u in [0, 2*pi] periodic
v in [0, 2*pi] periodic
param R = 2
param r = 1
""",
}

# S1..S5 in the order the fixtures are usually quoted
ORDER = ("plane", "clifford", "zsquared", "sphere", "torus")


def load(name: str) -> SurfaceDef:
    try:
        return parse_surface_file(SOURCES[name])
    except KeyError:
        raise KeyError(f"no builtin surface {name!r}; choose from {', '.join(SOURCES)}") from None


def scaled_clifford(radius: float, ratio: float = 1.0) -> SurfaceDef:
    """Torus cos/sin(u) * a, cos/sin(v) * b with a^2 + b^2 = radius^2, a/b = ratio."""
    b = radius / (1.0 + ratio * ratio) ** 0.5
    a = ratio * b
    src = f"""\
name = clifford-scaled
x = a*cos(u)
y = a*sin(u)
z = b*cos(v)
w = b*sin(v)
u in [0, 2*pi] periodic
v in [0, 2*pi] periodic
param a = {a!r}
param b = {b!r}
"""
    return parse_surface_file(src)
