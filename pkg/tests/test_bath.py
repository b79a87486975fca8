import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from oqsthermo.bath import (
    CorrelationGrid,
    Kernel,
    Part,
    SpectralModel,
    TransformRequest,
    abel_transform,
    bath_correlation,
    bath_correlation_imag_exact,
    bath_correlation_real_zero_temperature,
    coth_half,
    correlation_grid,
    half_fourier,
    one_sided_transform,
    spectral_density,
    thermal_density,
    transform,
    two_point,
)

WC = 1000.0


@pytest.fixture(scope="module")
def model(footnote):
    return SpectralModel.from_params(footnote)


@pytest.fixture(scope="module")
def cold():
    return SpectralModel(WC, math.inf)


@pytest.fixture(scope="module")
def grid(model):
    return correlation_grid(model)


def operative(p):
    w, x = p.omega_eff, p.ratio
    return [w + x, w - x, x, -(w + x), -(w - x), -x]


def test_spectral_density_values(model):
    assert spectral_density(0.0, model) == 0.0
    assert spectral_density(WC, model) == pytest.approx(WC / math.e, rel=1e-15)
    res = optimize.minimize_scalar(lambda w: -spectral_density(w, model), bounds=(1, 1e4),
                                   method="bounded", options={"xatol": 1e-6})
    assert res.x == pytest.approx(WC, rel=1e-6)
    with pytest.raises(ValueError):
        spectral_density(-1.0, model)


def test_spectral_model_validation():
    with pytest.raises(ValueError):
        SpectralModel(0.0, 1.0)
    with pytest.raises(ValueError):
        SpectralModel(1.0, -1.0)
    with pytest.raises(ValueError):
        SpectralModel(1.0, 1.0, "lorentzian")
    with pytest.raises(ValueError):
        TransformRequest(math.inf, "cos", "real")


def test_coth_small_argument():
    # expm1 form against the series 2/x + x/6 at tiny argument
    x = 1e-7
    assert coth_half(1.0, 2 * x) == pytest.approx(1 / x + x / 3, rel=1e-12)
    assert thermal_density(0.0, SpectralModel(WC, 4.0)) == pytest.approx(0.5)


def test_two_point(model, cold):
    assert two_point(0.0, 1.3, model) == pytest.approx(coth_half(model.beta, 1.3))
    assert two_point(0.7, 1.3, cold) == pytest.approx(np.exp(-1j * 1.3 * 0.7), abs=1e-15)
    with pytest.raises(ValueError):
        two_point(1.0, 0.0, model)


@given(st.floats(-50, 50), st.floats(1e-3, 50))
def test_two_point_conjugate_symmetry(t, w):
    m = SpectralModel(WC, 3.0)
    assert two_point(-t, w, m) == pytest.approx(np.conj(two_point(t, w, m)), rel=1e-14, abs=1e-14)


def test_correlation_limits(model, cold):
    assert bath_correlation(0.0, model).imag == 0.0
    for u in np.linspace(0, 50 / WC, 26):
        g = bath_correlation(u, model)
        im = bath_correlation_imag_exact(u, model)
        assert g.imag == pytest.approx(im, rel=1e-8, abs=1e-8 * WC ** 2 * 1e-6)
        g0 = bath_correlation(u, cold)
        re0 = bath_correlation_real_zero_temperature(u, cold)
        assert g0.real == pytest.approx(re0, rel=1e-8, abs=1e-14 * WC ** 2)
    with pytest.raises(ValueError):
        bath_correlation(-1.0, model)


def test_correlation_finite_temperature_direct(model):
    # Re G at finite beta against a plain quad of J coth cos on a finite window
    u = 2.5
    direct = integrate.quad(lambda w: thermal_density(w, model), 0, 60 * WC, weight="cos", wvar=u, limit=2000)[0]
    assert bath_correlation(u, model).real == pytest.approx(direct, rel=1e-7, abs=1e-9)


def test_transform_trivial_values(model, cold, footnote):
    assert transform(0.0, "sin", "real", model) == 0.0
    assert transform(0.0, "sin", "imag", model) == 0.0
    w = footnote.omega_eff
    assert transform(w, "cos", "real", cold) == pytest.approx(0.5 * math.pi * spectral_density(w, cold), rel=1e-14)
    expected = 0.5 * math.pi * spectral_density(w, model) * coth_half(model.beta, w)
    assert transform(w, "cos", "real", model) == pytest.approx(expected, rel=1e-14)
    assert one_sided_transform(TransformRequest(w, Kernel.COS, Part.REAL), model) == transform(w, "cos", "real", model)


@pytest.mark.parametrize("kernel", list(Kernel))
@pytest.mark.parametrize("part", list(Part))
def test_frequency_route_matches_time_route(kernel, part, model, grid, footnote):
    eps0 = 1e-3 * footnote.omega_eff
    for nu in operative(footnote):
        fr = transform(nu, kernel, part, model)
        tr = abel_transform(TransformRequest(nu, kernel, part), model, eps0, grid)
        assert fr == pytest.approx(tr, rel=1e-8, abs=1e-8), (nu, kernel, part)


def test_time_route_stable_under_eps_halving(model, grid, footnote):
    eps0 = 1e-3 * footnote.omega_eff
    for nu in operative(footnote)[:3]:
        for kernel in Kernel:
            for part in Part:
                req = TransformRequest(nu, kernel, part)
                a = abel_transform(req, model, eps0, grid)
                b = abel_transform(req, model, eps0 / 2, grid)
                assert abs(a - b) <= 1e-6 * max(abs(a), 1e-3)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2), kernel=st.sampled_from(list(Kernel)))
def test_transform_linear_in_part(a, b, kernel, model, grid, footnote):
    # time route on the combined correlation equals the combination of frequency-route values
    nu = footnote.omega_eff + footnote.ratio
    mixed = CorrelationGrid(grid.nodes, grid.weights, a * grid.real + b * grid.imag, np.zeros_like(grid.real))
    lhs = abel_transform(TransformRequest(nu, kernel, Part.REAL), model, 1e-3 * footnote.omega_eff, mixed)
    rhs = a * transform(nu, kernel, "real", model) + b * transform(nu, kernel, "imag", model)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)


def test_half_fourier_rates_detailed_balance(footnote):
    # 2 Re Gamma(-nu) / 2 Re Gamma(nu) = exp(-beta nu) for nu > 0; warm bath so
    # the upward rate does not underflow
    model = SpectralModel(WC, 2.0)
    for nu in operative(footnote)[:3]:
        up, down = half_fourier(-nu, model).real, half_fourier(nu, model).real
        assert math.log(down / up) == pytest.approx(model.beta * nu, rel=1e-10)
