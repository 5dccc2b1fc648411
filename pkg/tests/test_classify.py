import pytest

from r4curv import fixtures
from r4curv.classify import classify_surface
from r4curv.dsl import parse_surface_file
from r4curv.grid import GridSpec

HSING = parse_surface_file(open(__file__.replace("tests/test_classify.py", "surfaces/h_singular.surf")).read())


@pytest.fixture(scope="module")
def hsing():
    return classify_surface(HSING, GridSpec(24, 24))


def test_isolated_minimal_points(hsing):
    minimal = [p for p in hsing.points if p.kind == "minimal"]
    assert len(minimal) == 2
    origin, other = sorted(minimal, key=lambda p: p.u)
    assert abs(origin.u) < 1e-6 and abs(origin.v) < 1e-6
    assert other.u == pytest.approx(0.38481156, abs=1e-6) and abs(other.v) < 1e-6
    assert origin.index == "1/2" and other.index == "-1/2"
    assert all(p.residual < 1e-7 for p in minimal)


def test_axiumbilic_indices(hsing):
    axi = [p for p in hsing.points if p.kind == "axiumbilic"]
    assert axi
    assert all(p.index in ("1/4", "-1/4") for p in axi)
    assert not hsing.everywhere


def test_points_sorted(hsing):
    order = ["inflection", "minimal", "axiumbilic", "nu-umbilic"]
    keys = [(order.index(p.kind), p.u, p.v) for p in hsing.points]
    assert keys == sorted(keys)


@pytest.mark.parametrize("name,types", [
    ("plane", ("inflection", "minimal", "axiumbilic")),
    ("zsquared", ("minimal", "axiumbilic")),
    ("sphere", ("inflection", "axiumbilic")),
    ("torus", ("inflection",)),
    ("clifford", ()),
])
def test_everywhere_sentinel(name, types):
    c = classify_surface(fixtures.load(name), GridSpec(10, 10))
    assert c.everywhere == types
    if name == "clifford":
        assert not c.points
