import numpy as np
import pytest

from whiter.analytic_core import (
    AnalyticHandle,
    HalfPlaneFunction,
    LineGrid,
    LineSamples,
    Strip,
    exp_factor,
    norm_on_line,
    pointwise_combine,
    sample,
)
from whiter.errors import DomainError, GridMismatchError, SingularityError


def test_strip_validation():
    s = Strip(-0.5, 1.0)
    assert s.width == 1.5
    assert s.contains(0) and s.contains(-0.5) and not s.contains(1.1)
    with pytest.raises(ValueError):
        Strip(0.1, 1.0)


def test_grid_geometry():
    g = LineGrid(0.25, 10.0, 64)
    assert g.spacing == pytest.approx(20 / 64)
    assert g.x[0] == -10 and g.x[-1] == pytest.approx(10 - g.spacing)
    assert np.all(g.points.imag == 0.25)
    assert g.at(-1).offset == -1 and g.at(-1).n_points == 64
    with pytest.raises(ValueError):
        LineGrid(0, 10, 100)
    with pytest.raises(ValueError):
        LineGrid(0, -1, 64)


def test_samples_are_frozen_and_finite():
    g = LineGrid(0, 1, 8)
    s = LineSamples(g, np.arange(8))
    with pytest.raises(ValueError):
        s.values[0] = 1
    with pytest.raises(ValueError):
        LineSamples(g, np.full(8, np.nan))
    with pytest.raises(ValueError):
        LineSamples(g, np.zeros(4))


def test_arithmetic_and_scalars():
    g = LineGrid(0, 1, 8)
    a = LineSamples(g, np.arange(1, 9))
    assert np.allclose((a + 1).values, np.arange(2, 10))
    assert np.allclose((2 * a).values, 2 * np.arange(1, 9))
    assert np.allclose((1 - a).values, 1 - np.arange(1, 9))
    assert np.allclose((a / a).values, 1)
    assert np.allclose((-a).values, -np.arange(1, 9))


def test_combine_errors():
    g = LineGrid(0, 1, 8)
    a = LineSamples.ones(g)
    with pytest.raises(GridMismatchError):
        a + LineSamples.ones(g.at(0.5))
    with pytest.raises(SingularityError):
        a / LineSamples.zeros(g)
    with pytest.raises(ValueError):
        pointwise_combine("pow", a, a)


def test_norm_trapezoid():
    g = LineGrid(0, 50, 2**12)
    f = sample(lambda z: 1 / (z - 1j), g)
    # int |1/(x - i)|^2 dx = pi, minus the truncated tails 2/X
    assert norm_on_line(f) ** 2 == pytest.approx(np.pi - 2 / 50, rel=1e-4)


def test_handle_domain():
    h = AnalyticHandle(lambda z: 1 / (z - 2j), Strip(-1, 1), "strip", "h")
    g = LineGrid(0, 10, 64)
    assert np.allclose(sample(h, g).values, 1 / (g.points - 2j))
    with pytest.raises(DomainError):
        sample(h, g.at(1.5))
    up = AnalyticHandle(lambda z: 1 / (z + 2j), Strip(-1, 1), "plus")
    assert up.valid_offset(50) and not up.valid_offset(-2)


def test_sample_broadcasts_constants():
    g = LineGrid(0, 1, 8)
    assert np.allclose(sample(lambda z: 3.0, g).values, 3)


def test_exp_factor_modulus():
    g = LineGrid(-0.5, 10, 64)
    e = exp_factor(g, 2.0)
    assert np.allclose(np.abs(e.values), np.exp(1.0))


def test_half_plane_function():
    g = LineGrid(0, 1, 8)
    z = HalfPlaneFunction.zero("plus", g)
    assert z.defining_line is g and z.shifts == (0.0,)
    with pytest.raises(ValueError):
        HalfPlaneFunction("up", LineSamples.zeros(g))
