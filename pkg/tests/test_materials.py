import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sersim import (
    MU0,
    BhTable,
    MaterialError,
    ValidationError,
    build_table_material,
    calibrate_saturating_material,
    h_sat,
    make_linear_material,
    make_saturating_material,
    mumetal_like,
    ns4750_like,
    v_permendur_like,
)

SIMPLE_TABLE = BhTable(((0.0, 0.0), (400.0, 0.75), (1000.0, 0.7508)))


# -- BH table validation -------------------------------------------------------


def test_table_rejects_non_monotone_h():
    with pytest.raises(ValidationError, match="row 2"):
        BhTable(((0.0, 0.0), (400.0, 0.5), (300.0, 0.6)))


def test_table_rejects_non_monotone_b():
    with pytest.raises(ValidationError, match="row 2"):
        BhTable(((0.0, 0.0), (400.0, 0.5), (900.0, 0.4)))


def test_table_rejects_subvacuum_slope():
    # 1e-4 T over 1e3 A/m is well below mu0
    with pytest.raises(ValidationError, match="below mu0"):
        BhTable(((0.0, 0.0), (400.0, 0.5), (1400.0, 0.5001)))


def test_table_must_start_at_origin():
    with pytest.raises(ValidationError, match=r"\(0, 0\)"):
        BhTable(((10.0, 0.01), (400.0, 0.5)))


# -- table interpolation --------------------------------------------------------


def test_table_model_hits_knots_exactly():
    # exact up to one rounding of mu0*H + J(H)
    model = build_table_material(SIMPLE_TABLE)
    assert model.b_of_h(400.0) == pytest.approx(0.75, rel=1e-15)
    assert model.b_of_h(1000.0) == pytest.approx(0.7508, rel=1e-15)
    assert model.b_of_h(0.0) == 0.0


def test_table_model_odd_extension():
    model = build_table_material(SIMPLE_TABLE)
    assert model.b_of_h(-400.0) == pytest.approx(-0.75, rel=1e-15)


def test_table_model_mu0_extrapolation():
    model = build_table_material(SIMPLE_TABLE)
    expected = model.b_of_h(1000.0) + MU0 * 1000.0
    assert model.b_of_h(2000.0) == pytest.approx(expected, rel=1e-15)
    assert model.mu_diff(5000.0) == MU0


def test_table_mu_diff_matches_finite_difference_mid_interval():
    model = build_table_material(SIMPLE_TABLE)
    h = 200.0  # mid-interval, away from knots
    step = 1e-3
    fd = (model.b_of_h(h + step) - model.b_of_h(h - step)) / (2.0 * step)
    assert model.mu_diff(h) == pytest.approx(fd, rel=1e-6)


# -- tanh family -----------------------------------------------------------------


def test_tanh_basics():
    model = make_saturating_material(1e4 * MU0, 0.8)
    assert model.b_of_h(0.0) == 0.0
    assert model.mu_diff(0.0) == pytest.approx(1e4 * MU0, rel=1e-12)
    assert model.b_sat == 0.8


def test_tanh_mu_diff_approaches_mu0():
    model = make_saturating_material(1e4 * MU0, 0.8)
    assert model.mu_diff(1e7) == pytest.approx(MU0, rel=1e-12)
    assert model.mu_diff(-1e7) == pytest.approx(MU0, rel=1e-12)


def test_tanh_rejects_subvacuum_initial_permeability():
    with pytest.raises(ValidationError):
        make_saturating_material(0.5 * MU0, 0.8)
    with pytest.raises(ValidationError):
        make_saturating_material(1e4 * MU0, -1.0)


def test_linear_model_value():
    model = make_linear_material(1e4)
    assert model.b_of_h(100.0) == pytest.approx(1e4 * MU0 * 100.0, rel=1e-15)


# -- saturation field -------------------------------------------------------------


def dense_scan_h_sat(model, eps):
    """Independent oracle: first point of a 1e6-point log grid at/below threshold."""
    grid = np.logspace(-2, 8, 1_000_000)
    mu = model.mu_diff(grid)
    below = np.nonzero(mu <= (1.0 + eps) * MU0)[0]
    return grid[below[0]]


def test_h_sat_matches_dense_scan():
    model = make_saturating_material(5e3 * MU0, 1.2)
    eps = 1e-3
    assert h_sat(model, eps) == pytest.approx(dense_scan_h_sat(model, eps), rel=1e-3)


def test_h_sat_table_matches_dense_scan():
    model = build_table_material(SIMPLE_TABLE)
    eps = 1e-3
    assert h_sat(model, eps) == pytest.approx(dense_scan_h_sat(model, eps), rel=1e-3)


@pytest.mark.parametrize(
    "factory, expected",
    [(mumetal_like, 400.0), (ns4750_like, 4.0e4), (v_permendur_like, 3.0e5)],
)
def test_calibrated_materials_hit_saturation_anchors(factory, expected):
    assert factory().h_sat() == pytest.approx(expected, rel=1e-6)


def test_h_sat_linear_raises():
    with pytest.raises(MaterialError, match="does not saturate"):
        h_sat(make_linear_material(1e4))


def test_h_sat_idempotent():
    for model in (mumetal_like(), ns4750_like(), build_table_material(SIMPLE_TABLE)):
        eps = 1e-3
        mu = model.mu_diff(h_sat(model, eps))
        assert MU0 <= mu <= (1.0 + eps) * MU0 * (1.0 + 1e-6)


def test_calibrate_rejects_unreachable_target():
    with pytest.raises(ValidationError):
        calibrate_saturating_material(1e12, 0.1)


# -- property tests ----------------------------------------------------------------


def models_strategy():
    linear = st.floats(1.0, 1e5).map(make_linear_material)
    tanh = st.tuples(
        st.floats(10.0, 3e4), st.floats(0.2, 2.5)
    ).map(lambda t: make_saturating_material(t[0] * MU0, t[1]))

    def build_table(slopes):
        h = 0.0
        b = 0.0
        points = [(0.0, 0.0)]
        for rel_slope, dh in slopes:
            h += dh
            b += rel_slope * MU0 * dh
            points.append((h, b))
        return build_table_material(BhTable(tuple(points)))

    table = st.lists(
        st.tuples(st.floats(1.001, 1e4), st.floats(1.0, 1e3)), min_size=1, max_size=6
    ).map(build_table)
    return st.one_of(linear, tanh, table)


@settings(max_examples=150, deadline=None)
@given(models_strategy(), st.floats(-1e6, 1e6), st.floats(1e-6, 1e5))
def test_b_of_h_strictly_increasing(model, h1, gap):
    assert model.b_of_h(h1) < model.b_of_h(h1 + gap)


@settings(max_examples=150, deadline=None)
@given(models_strategy(), st.floats(-1e6, 1e6))
def test_b_of_h_odd(model, h):
    b = model.b_of_h(h)
    assert abs(model.b_of_h(-h) + b) <= 1e-12 * max(1.0, abs(b))


@settings(max_examples=150, deadline=None)
@given(models_strategy(), st.floats(-1e6, 1e6))
def test_mu_diff_bounded_below_and_even(model, h):
    mu = model.mu_diff(h)
    assert mu >= MU0 * (1.0 - 1e-9)
    assert model.mu_diff(-h) == pytest.approx(mu, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(models_strategy(), st.floats(-1e5, 1e5))
def test_mu_diff_consistent_with_numeric_derivative(model, h):
    # keep away from the knots/extrapolation junction, where B is only C0/C1
    if model.kind == "table":
        knots = model.table.h_values
        if np.min(np.abs(np.abs(h) - knots)) < 1.0:
            h += 2.0
    step = max(abs(h), 1.0) * 1e-7
    fd = (model.b_of_h(h + step) - model.b_of_h(h - step)) / (2.0 * step)
    assert model.mu_diff(h) == pytest.approx(fd, rel=1e-4, abs=1e-4 * MU0)


def test_mu_diff_lower_bound_randomised():
    rng = np.random.default_rng(42)
    models = [mumetal_like(), ns4750_like(), v_permendur_like(),
              build_table_material(SIMPLE_TABLE), make_linear_material(5e4)]
    h = rng.uniform(-1e6, 1e6, size=1000)
    for model in models:
        assert np.all(model.mu_diff(h) >= MU0 * (1.0 - 1e-9))
