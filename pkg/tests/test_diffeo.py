import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvespec.diffeo import (
    DiffeoSpec,
    FlowConfig,
    FlowError,
    basis_deriv_matrix,
    basis_matrix,
    cardinal_basis,
    cardinal_basis_deriv,
    flow,
    flow_sensitivity,
    integrate_flows,
    inverse_flow,
    make_knots,
    velocity,
    velocity_deriv,
)


def dirichlet(K, d):
    # cardinal function of 2m + 1 equispaced knots, in closed form
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.sin(K * d / 2) / (K * np.sin(d / 2))
    return np.where(np.abs(np.sin(d / 2)) < 1e-15, 1.0, v)


def test_knots():
    k = make_knots(2)
    assert k[0] == -np.pi
    np.testing.assert_allclose(np.diff(k), 2 * np.pi / 5)


@pytest.mark.parametrize("m", [1, 2, 4])
def test_cardinal_property(m):
    k = make_knots(m)
    for j in range(2 * m + 1):
        vals = cardinal_basis(k, j, k)
        expected = np.zeros(2 * m + 1)
        expected[j] = 1.0
        np.testing.assert_allclose(vals, expected, atol=1e-14)


def test_product_oracle():
    k = make_knots(2)
    x = 0.7
    num = np.prod([np.sin((x - k[i]) / 2) for i in range(5) if i != 1])
    den = np.prod([np.sin((k[1] - k[i]) / 2) for i in range(5) if i != 1])
    assert cardinal_basis(k, 1, x) == pytest.approx(num / den, abs=1e-14)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_basis_equals_dirichlet_kernel(m):
    k = make_knots(m)
    x = np.linspace(-np.pi, np.pi, 301)
    B = basis_matrix(k, x)
    for j in range(2 * m + 1):
        np.testing.assert_allclose(B[:, j], dirichlet(2 * m + 1, x - k[j]), atol=1e-13)
        np.testing.assert_allclose(B[:, j], cardinal_basis(k, j, x), atol=1e-13)


def test_basis_derivative_finite_difference():
    k = make_knots(3)
    x = np.linspace(-3.0, 3.0, 41)
    h = 1e-6
    D = basis_deriv_matrix(k, x)
    for j in range(7):
        fd = (cardinal_basis(k, j, x + h) - cardinal_basis(k, j, x - h)) / (2 * h)
        an = cardinal_basis_deriv(k, j, x)
        assert np.abs(fd - an).max() <= 1e-6 * np.abs(an).max()
        np.testing.assert_allclose(D[:, j], an, atol=1e-13)


def test_velocity_basics():
    spec0 = DiffeoSpec(2)
    x = np.linspace(-np.pi, np.pi, 11)
    np.testing.assert_array_equal(velocity(spec0, x), 0)
    spec = DiffeoSpec(2, [0.3, -0.2, 0.1, 0.4])
    np.testing.assert_allclose(velocity(spec, spec.knots), spec.full_weights, atol=1e-14)
    assert velocity(spec, np.pi) == pytest.approx(0, abs=1e-14)
    assert velocity(spec, -np.pi) == pytest.approx(0, abs=1e-14)


def test_velocity_odd_symmetry():
    # knots are symmetric about 0 and w_{K-j} = -w_j gives an odd field
    spec = DiffeoSpec(2, [0.3, -0.2, 0.2, -0.3])
    x = np.linspace(0.05, 3.0, 25)
    np.testing.assert_allclose(velocity(spec, -x), -velocity(spec, x), atol=1e-14)
    np.testing.assert_allclose(velocity_deriv(spec, -x), velocity_deriv(spec, x), atol=1e-13)


def test_flow_identity_and_endpoints():
    th = np.linspace(-np.pi, np.pi, 50)
    np.testing.assert_array_equal(flow(DiffeoSpec(2), FlowConfig(), th), th)
    spec = DiffeoSpec(2, [0.4, -0.3, 0.2, 0.1])
    out = flow(spec, FlowConfig(), np.array([-np.pi, np.pi]))
    np.testing.assert_allclose(out, [-np.pi, np.pi], atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4))
def test_inverse_composition(w):
    spec = DiffeoSpec(2, w)
    cfg = FlowConfig(200)
    th = np.linspace(-np.pi, np.pi, 101)
    fwd = flow(spec, cfg, th)
    assert np.all(np.diff(fwd) > 0)
    np.testing.assert_allclose(inverse_flow(spec, cfg, fwd), th, atol=1e-6)


def test_first_order_expansion():
    base = np.array([0.4, -0.3, 0.2, 0.5])
    th = np.linspace(-3, 3, 31)
    errs = []
    for s in (1e-2, 1e-3):
        spec = DiffeoSpec(2, s * base)
        errs.append(np.abs(flow(spec, FlowConfig(), th) - th - velocity(spec, th)).max())
    # second order remainder: shrinking w tenfold shrinks the error about a hundredfold
    assert 60 < errs[0] / errs[1] < 140


def test_rk4_fourth_order():
    spec = DiffeoSpec(2, [1.5, -1.0, 0.8, 1.2])
    th = np.linspace(-3, 3, 21)
    ref = flow(spec, FlowConfig(4000), th)
    e1 = np.abs(flow(spec, FlowConfig(10), th) - ref).max()
    e2 = np.abs(flow(spec, FlowConfig(20), th) - ref).max()
    assert 10 < e1 / e2 < 24


def test_nonmonotone_flow_raises():
    spec = DiffeoSpec(1, [40.0, -40.0])
    with pytest.raises(FlowError, match="steps"):
        flow(spec, FlowConfig(1), np.linspace(-3, 3, 200))


def test_sensitivity_at_zero_weights():
    spec = DiffeoSpec(2)
    th = np.linspace(-3, 3, 25)
    for i in range(1, 5):
        np.testing.assert_allclose(
            flow_sensitivity(spec, FlowConfig(), th, i), -cardinal_basis(spec.knots, i, th), atol=1e-13
        )


def test_sensitivity_finite_difference():
    rng = np.random.default_rng(3)
    cfg = FlowConfig(100)
    th = np.linspace(-3.1, 3.1, 40)
    for _ in range(5):
        w = rng.uniform(-0.5, 0.5, 4)
        spec = DiffeoSpec(2, w)
        for i in range(1, 5):
            h = 1e-5
            e = np.zeros(4)
            e[i - 1] = h
            fd = (inverse_flow(DiffeoSpec(2, w + e), cfg, th) - inverse_flow(DiffeoSpec(2, w - e), cfg, th)) / (2 * h)
            an = flow_sensitivity(spec, cfg, th, i)
            assert np.abs(fd - an).max() <= 1e-5 * np.abs(an).max()


def test_sensitivity_vanishes_at_endpoints():
    spec = DiffeoSpec(2, [0.2, 0.1, -0.3, 0.2])
    s = flow_sensitivity(spec, FlowConfig(), np.array([-np.pi, np.pi]), 2)
    np.testing.assert_allclose(s, 0, atol=1e-14)


def test_batched_flows_match_single():
    rng = np.random.default_rng(0)
    W = rng.uniform(-0.3, 0.3, (3, 4))
    th = np.linspace(-3, 3, 9)
    batch = integrate_flows(W, 2, th)
    for b in range(3):
        np.testing.assert_allclose(batch[b], flow(DiffeoSpec(2, W[b]), FlowConfig(), th), atol=1e-15)


def test_spec_validation_and_round_trip():
    with pytest.raises(ValueError):
        DiffeoSpec(2, [1.0])
    with pytest.raises(ValueError):
        FlowConfig(0)
    with pytest.raises(IndexError):
        flow_sensitivity(DiffeoSpec(1), FlowConfig(), 0.0, 3)
    s = DiffeoSpec(1, [0.1, 0.2])
    np.testing.assert_array_equal(DiffeoSpec.from_dict(s.to_dict()).w, s.w)
