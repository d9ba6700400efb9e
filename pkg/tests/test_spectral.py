import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvespec.spectral import (
    ContourSamples,
    FourierCoeffs,
    Grid,
    GridError,
    analyze,
    analyze_points,
    differentiate,
    interpolant,
    make_grid,
    parseval_distance,
    smoother_matrix,
    smoother_weight,
    synthesize,
    trig_interpolate,
    trig_interpolate_deriv,
    wrap_angle,
)

from conftest import random_coeffs


def test_grid_n3():
    g = make_grid(3)
    np.testing.assert_allclose(g.theta, [-2 * np.pi / 3, 0.0, 2 * np.pi / 3], atol=1e-15)


def test_grid_n5_first_angle():
    assert make_grid(5).theta[0] == pytest.approx(-4 * np.pi / 5, abs=1e-15)


@pytest.mark.parametrize("n", [4, 1, 2, 0, -3])
def test_grid_rejects_even_or_small(n):
    with pytest.raises(GridError, match="odd"):
        make_grid(n)


def test_grid_spacing_and_range():
    g = make_grid(73)
    d = np.diff(g.theta)
    np.testing.assert_allclose(d, 2 * np.pi / 73, rtol=1e-12)
    assert g.theta[0] > -np.pi and g.theta[-1] <= np.pi
    assert g.max_order == 36


def test_from_angles_recognises_standard_grid():
    g = Grid.from_angles(make_grid(11).theta)
    assert g.standard


def test_wrap_angle_range():
    x = np.linspace(-20, 20, 1001)
    w = wrap_angle(x)
    assert np.all(w >= -np.pi) and np.all(w < np.pi)
    np.testing.assert_allclose(np.cos(w), np.cos(x), atol=1e-12)
    np.testing.assert_allclose(np.sin(w), np.sin(x), atol=1e-12)


def test_circle_coefficients():
    g = make_grid(31)
    pts = np.column_stack([np.cos(g.theta), np.sin(g.theta)])
    c = analyze(ContourSamples(g, pts), 2)
    np.testing.assert_allclose(c.mu, [[0, 0], [1, 0], [0, 0]], atol=1e-14)
    np.testing.assert_allclose(c.nu, [[0, 1], [0, 0]], atol=1e-14)


def test_constant_contour():
    g = make_grid(9)
    pts = np.tile([3.0, -2.0], (9, 1))
    c = analyze(ContourSamples(g, pts), 4)
    np.testing.assert_allclose(c.mu[0], [3, -2], atol=1e-14)
    assert np.abs(c.mu[1:]).max() < 1e-14 and np.abs(c.nu).max() < 1e-14


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 40).map(lambda k: 2 * k + 1), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_round_trip(n, seed, data):
    J = data.draw(st.integers(0, (n - 1) // 2))
    rng = np.random.default_rng(seed)
    c = random_coeffs(rng, J)
    g = make_grid(n)
    back = analyze(ContourSamples(g, synthesize(c, g.theta)), J)
    assert back.allclose(c, atol=1e-12)


def test_synthesize_simple_cases():
    mu = np.zeros((3, 2))
    mu[0] = (1, 2)
    c = FourierCoeffs(mu, np.zeros((2, 2)))
    np.testing.assert_allclose(synthesize(c, np.linspace(-3, 3, 7)), np.tile([1, 2], (7, 1)))
    circle = FourierCoeffs(np.array([[0, 0], [1, 0]]), np.array([[0, 1]]))
    np.testing.assert_allclose(synthesize(circle, 0.0), [1, 0])


def test_analyze_batched_matches_loop(rng):
    g = make_grid(15)
    pts = rng.standard_normal((4, 15, 2))
    mu, nu = analyze_points(pts, g, 5)
    for t in range(4):
        c = analyze(ContourSamples(g, pts[t]), 5)
        np.testing.assert_allclose(mu[t], c.mu, atol=1e-14)
        np.testing.assert_allclose(nu[t], c.nu, atol=1e-14)


def test_order_too_high_warns_and_truncates(caplog):
    g = make_grid(7)
    c = analyze(ContourSamples(g, np.zeros((7, 2))), 5)
    assert c.J == 3
    assert "truncating" in caplog.text


def test_smoother_at_node():
    g = make_grid(31)
    for l in (0, 7, 30):
        assert smoother_weight(g, l, 10, g.theta[l]) == pytest.approx(1 / 31 + 20 / 31, abs=1e-14)


def test_smoother_partition_of_unity(rng):
    g = make_grid(31)
    theta = rng.uniform(-np.pi, np.pi, 50)
    for J in (0, 3, 15):
        np.testing.assert_allclose(smoother_matrix(g, J, theta).sum(axis=1), 1.0, atol=1e-13)


def test_smoother_against_naive_sum():
    g = make_grid(31)
    # zero-based l = 4 is the fifth grid angle
    th_l = -(32) * math.pi / 31 + 2 * math.pi * 5 / 31
    naive = 1 / 31 + 2 / 31 * math.fsum(math.cos(j * (0.3 - th_l)) for j in range(1, 11))
    assert smoother_weight(g, 4, 10, 0.3) == pytest.approx(naive, abs=1e-14)


def test_interpolation_at_nodes_and_constants(rng):
    g = make_grid(21)
    pts = rng.standard_normal((21, 2))
    s = ContourSamples(g, pts)
    np.testing.assert_allclose(trig_interpolate(s, g.theta), pts, atol=1e-12)
    const = ContourSamples(g, np.tile([1.5, -0.5], (21, 1)))
    th = rng.uniform(-np.pi, np.pi, 20)
    np.testing.assert_allclose(trig_interpolate(const, th), np.tile([1.5, -0.5], (20, 1)), atol=1e-13)
    np.testing.assert_allclose(trig_interpolate_deriv(const, th), 0, atol=1e-13)


def test_interpolant_reproduces_band_limited_curve(rng):
    g = make_grid(25)
    c = random_coeffs(rng, 12)
    s = ContourSamples(g, synthesize(c, g.theta))
    th = rng.uniform(-np.pi, np.pi, 1000)
    np.testing.assert_allclose(trig_interpolate(s, th), synthesize(c, th), atol=1e-11)
    assert interpolant(s).allclose(c, atol=1e-12)


def test_interpolant_derivative():
    g = make_grid(31)
    circle = ContourSamples(g, np.column_stack([np.cos(g.theta), np.sin(g.theta)]))
    np.testing.assert_allclose(trig_interpolate_deriv(circle, 0.0), [0, 1], atol=1e-13)


def test_interpolant_derivative_finite_difference(rng):
    g = make_grid(31)
    s = ContourSamples(g, synthesize(random_coeffs(rng, 10), g.theta))
    th = rng.uniform(-np.pi, np.pi, 40)
    h = 1e-5
    fd = (trig_interpolate(s, th + h) - trig_interpolate(s, th - h)) / (2 * h)
    an = trig_interpolate_deriv(s, th)
    assert np.abs(fd - an).max() <= 1e-6 * np.abs(an).max()


def test_differentiate_matches_finite_difference(rng):
    c = random_coeffs(rng, 6)
    th = np.linspace(-3, 3, 17)
    h = 1e-6
    fd = (synthesize(c, th + h) - synthesize(c, th - h)) / (2 * h)
    np.testing.assert_allclose(synthesize(differentiate(c), th), fd, atol=1e-6)


def test_parseval_simple():
    a = FourierCoeffs(np.array([[1.0, 0.0]]), np.zeros((0, 2)))
    assert parseval_distance(a, a) == 0.0
    assert parseval_distance(a, FourierCoeffs.zeros(0)) == pytest.approx(2.0)


def test_parseval_matches_quadrature(rng):
    a, b = random_coeffs(rng, 5), random_coeffs(rng, 8)
    th = -np.pi + 2 * np.pi * np.arange(10_000) / 10_000
    d = synthesize(a, th) - synthesize(b, th)
    quad = np.sum(d**2) * (2 * np.pi / 10_000) / np.pi
    assert parseval_distance(a, b) == pytest.approx(quad, rel=1e-6)


def test_coeffs_serialisation(rng):
    c = random_coeffs(rng, 3)
    assert FourierCoeffs.from_dict(c.to_dict()).allclose(c, atol=0)


def test_contour_samples_validation():
    g = make_grid(5)
    with pytest.raises(ValueError):
        ContourSamples(g, np.zeros((4, 2)))
    bad = np.zeros((5, 2))
    bad[2, 0] = np.nan
    with pytest.raises(ValueError):
        ContourSamples(g, bad)
