import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sps

from robiniso.domains import DomainError, DomainSpec


def ellipse_perimeter(a, b):
    return 4 * a * sps.ellipe(1 - (b / a) ** 2)


def test_disk_geometry():
    d = DomainSpec.disk(2.0)
    th = np.linspace(0, 2 * np.pi, 7)
    np.testing.assert_allclose(d.curvature(th), 0.5, rtol=1e-14)
    assert d.area() == pytest.approx(4 * math.pi, rel=1e-14)
    assert d.perimeter() == pytest.approx(4 * math.pi, rel=1e-12)
    assert d.diameter() == pytest.approx(4.0, rel=1e-6)


@pytest.mark.parametrize("a, b", [(1.5, 1.0), (2.0, 1.0), (3.0, 1.0)])
def test_ellipse_fourier_representation(a, b):
    e = DomainSpec.ellipse(a, b)
    th = np.linspace(0, 2 * np.pi, 1001)
    exact = a * b / np.sqrt((b * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2)
    np.testing.assert_allclose(e.radius(th), exact, rtol=1e-12)
    assert e.area() == pytest.approx(math.pi * a * b, rel=1e-12)
    assert e.perimeter() == pytest.approx(ellipse_perimeter(a, b), rel=1e-10)
    # curvature at the vertex (a, 0) is a / b²
    assert e.curvature(np.array([0.0]))[0] == pytest.approx(a / b**2, rel=1e-9)


def test_normal_is_unit_and_outward():
    s = DomainSpec.star(1.0, (0.0, 0.0, 0.3))
    th = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    nu = s.normal(th)
    np.testing.assert_allclose(np.hypot(*nu.T), 1.0, rtol=1e-13)
    assert np.all(np.sum(nu * s.point(th), axis=1) > 0)


def test_arclength_parameters_are_equidistributed():
    s = DomainSpec.star(1.0, (0.1, 0.15), (0.05,))
    th = s.arclength_parameters(400)
    p = s.point(th)
    seg = np.hypot(*(np.roll(p, -1, axis=0) - p).T)
    assert seg.max() / seg.min() < 1.01


def test_contains():
    sq = DomainSpec.square(2.0, (-1.0, -1.0))
    assert list(sq.contains(np.array([[0.0, 0.0], [1.5, 0.0], [0.99, -0.99]]))) == [True, False, True]
    s = DomainSpec.star(1.0, (0.0, 0.0, 0.3))
    assert list(s.contains(np.array([[0.0, 0.0], [1.29, 0.0], [1.31, 0.0]]))) == [True, True, False]


@pytest.mark.parametrize(
    "build",
    [
        lambda: DomainSpec.star(1.0, (1.5,)),
        lambda: DomainSpec.star(-1.0),
        lambda: DomainSpec.polygon([(0, 0), (0, 1), (1, 0)]),
        lambda: DomainSpec.polygon([(0, 0), (1, 1), (1, 0), (0, 1)]),
        lambda: DomainSpec.polygon([(0, 0), (1, 0)]),
        lambda: DomainSpec("blob"),
    ],
)
def test_invalid_specs(build):
    with pytest.raises(DomainError):
        build()


def test_json_roundtrip():
    for spec in (DomainSpec.star(1.2, (0.1, 0.0, 0.2), (0.05,)), DomainSpec.square(1.0)):
        back = DomainSpec.from_json(spec.to_json())
        assert back == spec


def test_json_layout():
    import json

    d = json.loads(DomainSpec.star(1.0, (0.3,)).to_json())
    assert d == {"kind": "star", "R": 1.0, "cos": [0.3], "sin": []}
    p = json.loads(DomainSpec.square(1.0).to_json())
    assert p["kind"] == "polygon" and len(p["vertices"]) == 4


def test_from_dict_ellipse():
    assert DomainSpec.from_dict({"kind": "ellipse", "a": 2, "b": 1}) == DomainSpec.ellipse(2.0, 1.0)


def test_polygon_area_and_perimeter():
    sq = DomainSpec.square(2.0)
    assert sq.area() == pytest.approx(4.0)
    assert sq.perimeter() == pytest.approx(8.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 2.0), st.lists(st.floats(-0.15, 0.15), min_size=1, max_size=4))
def test_star_area_formula(R, cos):
    # area = ∫ r²/2 dθ = πR²(1 + Σ a_k²/2)
    s = DomainSpec.star(R, cos)
    assert s.area() == pytest.approx(math.pi * R**2 * (1 + 0.5 * sum(c * c for c in cos)), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 2.0), st.lists(st.floats(-0.15, 0.15), min_size=1, max_size=4))
def test_isoperimetric_inequality(R, cos):
    s = DomainSpec.star(R, cos)
    assert s.perimeter() ** 2 >= 4 * math.pi * s.area() * (1 - 1e-12)
