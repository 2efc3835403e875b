import numpy as np
import pytest

from discforge.discs import (
    LiftedDisc,
    ModelDiscParams,
    cauchy_center,
    mobius_a,
    model_disc,
    stationarity_residual,
    weight_series,
)
from discforge.exceptions import ConfigError
from discforge.model import ModelPolynomial
from discforge.perturb import DefiningFunction
from discforge.series import TrigSeries


def _abs_power(d):
    return ModelPolynomial.from_upper(d, d // 2, {d // 2: 1.0})


def _model_d4k3():
    return ModelPolynomial.from_upper(4, 3, {2: 1.0, 3: 0.25})


def test_mobius_a_frozen():
    assert mobius_a(0.0) == 0.0
    assert abs(mobius_a(0.1) - (-0.10102051443364424)) < 1e-15
    # small-b expansion: a = -conj(b) (1 + |b|^2 + O(b^4))
    b = 1e-3 + 2e-3j
    assert abs(mobius_a(b) + np.conj(b) * (1 + abs(b) ** 2)) < 1e-11
    with pytest.raises(ConfigError):
        mobius_a(0.5)


def test_mobius_a_solves_fixed_point():
    # a is the inside root of b a^2 + (1 + 2 Re(a conj(a)) ... ) checked
    # against the quadratic it came from: conj(b) + a (1 + ...) form reduces
    # to b conj(a)^2 + conj(a) + conj(b) = 0 after conjugation.
    for b in (0.3, 0.2 - 0.35j, 0.45j):
        a = mobius_a(b)
        assert abs(a) < 1.0
        assert abs(b * a**2 + a + np.conj(b)) < 1e-14


def test_weight_series_frozen():
    c = weight_series(0.1, 2)
    assert abs(c.coeff(0) - 1.02) < 1e-15
    assert abs(c.coeff(1) - 0.2) < 1e-15
    assert abs(c.coeff(2) - 0.01) < 1e-15
    assert c.is_real(1e-15)


def test_model_disc_zero_b_frozen_g():
    disc = model_disc(_abs_power(4), ModelDiscParams(0.0, 1.0), n_max=32)
    # h = 1 - zeta
    assert abs(disc.h.coeff(0) - 1.0) < 1e-14
    assert abs(disc.h.coeff(1) + 1.0) < 1e-14
    assert disc.h.trimmed(1e-13).n_max == 1
    g = disc.g.trimmed(1e-12)
    assert g.n_max == 2
    np.testing.assert_allclose(
        [g.coeff(0), g.coeff(1), g.coeff(2)], [6.0, -8.0, 2.0], atol=1e-12
    )
    assert disc.center() == (pytest.approx(1.0), pytest.approx(6.0))

    disc2 = model_disc(_abs_power(2), ModelDiscParams(0.0, 1.0), n_max=16)
    g2 = disc2.g.trimmed(1e-12)
    np.testing.assert_allclose([g2.coeff(0), g2.coeff(1)], [2.0, -2.0], atol=1e-13)

    disc3 = model_disc(_model_d4k3(), ModelDiscParams(0.0, 1.0), n_max=32)
    g3 = disc3.g.trimmed(1e-12)
    np.testing.assert_allclose(
        [g3.coeff(n) for n in range(4)], [8.0, -11.5, 4.0, -0.5], atol=1e-12
    )


def test_model_disc_theta_rotates_v():
    base = model_disc(_abs_power(4), ModelDiscParams(0.1, 2.0 - 1.0j), n_max=32)
    rot = model_disc(
        _abs_power(4), ModelDiscParams(0.1, (2.0 - 1.0j) * 1j, theta=-np.pi / 2), n_max=32
    )
    np.testing.assert_allclose(rot.h.coeffs, base.h.coeffs, atol=1e-14)


def test_cauchy_center_frozen():
    disc = model_disc(_abs_power(4), ModelDiscParams(0.0, 1.0), n_max=32)
    r = DefiningFunction.pure(_abs_power(4))
    assert abs(cauchy_center(disc, r) - 6.0) < 1e-10
    disc2 = model_disc(_abs_power(2), ModelDiscParams(0.0, 1.0), n_max=16)
    r2 = DefiningFunction.pure(_abs_power(2))
    assert abs(cauchy_center(disc2, r2) - 2.0) < 1e-10


def test_cauchy_center_matches_g_for_random_params():
    model = _model_d4k3()
    r = DefiningFunction.pure(model)
    disc = model_disc(model, ModelDiscParams(0.25 - 0.1j, 1.0 + 0.5j), n_max=96)
    assert abs(cauchy_center(disc, r) - disc.g.coeff(0)) < 1e-9


def test_model_disc_is_stationary():
    rng = np.random.default_rng(11)
    for model in (_abs_power(2), _abs_power(4), _model_d4k3()):
        r = DefiningFunction.pure(model)
        for _ in range(4):
            b = (rng.uniform(-0.4, 0.4) + 1j * rng.uniform(-0.4, 0.4)) / np.sqrt(2)
            v = rng.normal() + 1j * rng.normal()
            if abs(v) < 0.1:
                v = 1.0
            disc = model_disc(model, ModelDiscParams(b, v), n_max=128)
            res1, res2, res3 = stationarity_residual(disc, r)
            assert res1 < 1e-9
            assert res2 < 1e-12
            assert res3 < 1e-9


def test_residual_detects_center_shift():
    model = _abs_power(4)
    disc = model_disc(model, ModelDiscParams(0.1, 1.0), n_max=64)
    mu = 1e-3
    shifted = LiftedDisc(disc.c, disc.h, disc.g + TrigSeries.constant(mu), validate=False)
    res1, res2, res3 = stationarity_residual(shifted, DefiningFunction.pure(model))
    assert abs(res3 - mu) < 1e-9
    assert res1 < 1e-9  # r_z does not see the w-translation on a model


def test_residual_detects_wrong_weight_exponent():
    model = _abs_power(4)
    disc = model_disc(model, ModelDiscParams(0.0, 1.0), n_max=32)
    res1, _, _ = stationarity_residual(disc, DefiningFunction.pure(model), k0=1)
    assert abs(res1 - 2.0) < 1e-12


def test_lifted_disc_validation():
    model = _abs_power(4)
    disc = model_disc(model, ModelDiscParams(0.1, 1.0), n_max=32)
    with pytest.raises(ConfigError):
        LiftedDisc(TrigSeries.monomial(1, 1.0), disc.h, disc.g)  # weight not real
    with pytest.raises(ConfigError):
        LiftedDisc(disc.c, disc.h.conjugate(), disc.g)  # not analytic
    with pytest.raises(ConfigError):
        LiftedDisc(disc.c, disc.h + TrigSeries.constant(0.1), disc.g)  # unpinned
    with pytest.raises(ConfigError):
        LiftedDisc(TrigSeries.constant(-1.0), disc.h, disc.g)  # weight sign
    LiftedDisc(disc.c, disc.h + TrigSeries.constant(0.1), disc.g, validate=False)


def test_params_validation_and_round_trip():
    with pytest.raises(ConfigError):
        ModelDiscParams(0.6, 1.0)
    with pytest.raises(ConfigError):
        ModelDiscParams(0.1, 0.0)
    p = ModelDiscParams(0.1 - 0.2j, 1.5, theta=0.3)
    assert ModelDiscParams.from_dict(p.to_dict()) == p
    with pytest.raises(ConfigError):
        ModelDiscParams.from_dict({"b": [0.1, 0.0], "v": [1.0, 0.0], "nope": 1})


def test_disc_round_trip_and_samples():
    disc = model_disc(_abs_power(4), ModelDiscParams(0.2j, 1.0), n_max=24)
    back = LiftedDisc.from_dict(disc.to_dict())
    np.testing.assert_allclose(back.g.coeffs, disc.g.coeffs, atol=0)
    rows = disc.boundary_samples(16)
    assert rows.shape == (16,)
    pts = np.exp(1j * rows["angle"])
    np.testing.assert_allclose(rows["h"], disc.h.evaluate(pts), atol=1e-14)
    with pytest.raises(ConfigError):
        LiftedDisc.from_dict({"c": disc.c.to_dict()})
