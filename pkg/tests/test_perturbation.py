import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discforge.exceptions import ConfigError
from discforge.model import ModelPolynomial
from discforge.perturb import (
    BiholoMap,
    DefiningFunction,
    PerturbationTerm,
    compose_disc,
    dilate,
    dilate_map,
    x_norm_distance,
)
from discforge.series import TrigSeries, coeff_distance, multiply


def _abs4():
    return ModelPolynomial.from_upper(4, 2, {2: 1.0})


def _cubic_term(eps):
    # z^3 zbar^2 * eps, plus its mirror
    return PerturbationTerm(3, 2, 0, {(0, 0): eps})


def test_term_validation():
    with pytest.raises(ConfigError):
        PerturbationTerm(3, 2, 0, {(0, 1): 1.0})  # l = 0 cannot see Im w
    with pytest.raises(ConfigError):
        PerturbationTerm(1, 1, 0, {(9, 0): 1.0})  # degree cap
    with pytest.raises(ConfigError):
        DefiningFunction(_abs4(), (PerturbationTerm(2, 2, 0, {(0, 0): 1.0}),))
    with pytest.raises(ConfigError):
        DefiningFunction(_abs4(), (PerturbationTerm(1, 2, 2, {(0, 0): 1.0}),))
    with pytest.raises(ConfigError):
        DefiningFunction(_abs4(), (_cubic_term(1.0), PerturbationTerm(2, 3, 0, {(0, 0): 1.0})))
    with pytest.raises(ConfigError):
        DefiningFunction(_abs4(), theta1={1: 0.5})
    with pytest.raises(ConfigError):
        DefiningFunction(_abs4(), (PerturbationTerm(1, 1, 1, {(0, 0): 1.0}),), theta1={})
    # valid l >= 1 block: i + j = d - l
    DefiningFunction(_abs4(), (PerturbationTerm(2, 1, 1, {(0, 0): 1.0}),))


def test_theta_realized_symmetrically():
    r = DefiningFunction(_abs4(), (_cubic_term(0.25),), theta1={2: 0.125})
    theta = r.theta_mon()
    assert theta[(3, 2, 0)] == 0.25
    assert theta[(2, 3, 0)] == 0.25
    assert theta[(0, 0, 2)] == 0.125
    assert len(theta) == 3
    for (a, b, e), c in theta.items():
        assert theta[(b, a, e)] == np.conj(c)


def test_eval_matches_hand_expansion():
    eps = 1e-3
    r = DefiningFunction(_abs4(), (_cubic_term(eps),))
    rng = np.random.default_rng(7)
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    w = rng.normal(size=8) + 1j * rng.normal(size=8)
    want = -w.real + np.abs(z) ** 4 + 2 * eps * (z**3 * np.conj(z) ** 2).real
    np.testing.assert_allclose(r.eval_r(z, w), want, atol=1e-14)
    # d/dz of the theta block: 3 eps z^2 zbar^2 + 2 eps z zbar^3
    extra = 3 * eps * z**2 * np.conj(z) ** 2 + 2 * eps * z * np.conj(z) ** 3
    pure_z = 2 * z * np.conj(z) ** 2
    np.testing.assert_allclose(r.eval_r_z(z, w), pure_z + extra, atol=1e-13)


def test_wirtinger_derivatives_against_finite_differences():
    r = DefiningFunction(
        _abs4(),
        (_cubic_term(0.2), PerturbationTerm(2, 1, 1, {(1, 0): 0.3 - 0.1j, (0, 1): 0.05})),
        theta1={2: 0.4, 3: -0.1},
    )
    z0, w0 = 0.4 + 0.3j, 0.2 + 0.5j
    h = 1e-6

    def val(z, w):
        return complex(r.eval_r(z, w))

    fd_z = (val(z0 + h, w0) - val(z0 - h, w0)) / (2 * h) - 1j * (
        val(z0 + 1j * h, w0) - val(z0 - 1j * h, w0)
    ) / (2 * h)
    fd_w = (val(z0, w0 + h) - val(z0, w0 - h)) / (2 * h) - 1j * (
        val(z0, w0 + 1j * h) - val(z0, w0 - 1j * h)
    ) / (2 * h)
    assert abs(r.eval_r_z(z0, w0) - fd_z / 2) < 1e-8
    assert abs(r.eval_r_w(z0, w0) - fd_w / 2) < 1e-8
    # second derivatives, by differencing the first ones
    def rz(z, w):
        return complex(r.eval_r_z(z, w))

    fd_zw = (rz(z0, w0 + h) - rz(z0, w0 - h)) / (2 * h) - 1j * (
        rz(z0, w0 + 1j * h) - rz(z0, w0 - 1j * h)
    ) / (2 * h)
    got_zw = _mon_val(r.rzw_mon(), z0, w0)
    assert abs(got_zw - fd_zw / 2) < 1e-8
    got_zz = _mon_val(r.rzz_mon(), z0, w0)
    fd_zz = (rz(z0 + h, w0) - rz(z0 - h, w0)) / (2 * h) - 1j * (
        rz(z0 + 1j * h, w0) - rz(z0 - 1j * h, w0)
    ) / (2 * h)
    assert abs(got_zz - fd_zz / 2) < 1e-8


def _mon_val(mon, z, w):
    u = complex(w).imag
    zb = np.conj(z)
    return sum(c * z**a * zb**b * u**e for (a, b, e), c in mon.items())


def test_pure_model_w_derivatives():
    r = DefiningFunction.pure(_abs4())
    assert r.is_pure
    assert r.rw_mon() == {(0, 0, 0): -0.5}
    assert r.rww_mon() == {}
    assert r.rzzbar_mon() == {(1, 1, 0): 4.0}


def test_dilate_exact_exponents():
    eps = 1e-3
    r = DefiningFunction(
        _abs4(),
        (_cubic_term(eps), PerturbationTerm(2, 1, 1, {(0, 0): 1.0, (1, 1): 1.0})),
        theta1={2: 1.0},
    )
    half = dilate(r, 0.5)
    assert half.terms[0].coeffs[(0, 0)] == eps * 0.5  # l = 0, m = 0: t^1
    assert half.terms[1].coeffs[(0, 0)] == 0.5**3  # l = 1: t^(d-1)
    assert half.terms[1].coeffs[(1, 1)] == 0.5**8  # t^(3 + 1 + 4)
    assert half.theta1[2] == 0.5**4  # t^(2d - d)
    assert dilate(r, 1.0).to_dict() == r.to_dict()
    with pytest.raises(ConfigError):
        dilate(r, 0.0)


def test_dilate_matches_substitution():
    r = DefiningFunction(_abs4(), (_cubic_term(0.3),), theta1={2: 0.2})
    t = 0.375
    rt = dilate(r, t)
    rng = np.random.default_rng(3)
    z = rng.normal(size=6) + 1j * rng.normal(size=6)
    w = rng.normal(size=6) + 1j * rng.normal(size=6)
    want = r.eval_r(t * z, t**4 * w) / t**4
    np.testing.assert_allclose(rt.eval_r(z, w), want, rtol=1e-12, atol=1e-12)


def test_x_norm_distance():
    pure = DefiningFunction.pure(_abs4())
    assert x_norm_distance(pure) == 0.0
    r = DefiningFunction(_abs4(), (_cubic_term(1e-2),), theta1={2: 1e-3})
    values = [x_norm_distance(dilate(r, t)) for t in (1.0, 0.5, 0.25, 0.125)]
    assert values[0] > 0
    for a, b in zip(values, values[1:]):
        assert b < a


def test_defining_function_json_round_trip():
    r = DefiningFunction(
        _abs4(),
        (_cubic_term(0.25 + 0.0j), PerturbationTerm(2, 1, 1, {(1, 0): 0.3 - 0.1j})),
        theta1={2: 0.4},
    )
    back = DefiningFunction.from_dict(r.model, r.to_dict())
    assert back.to_dict() == r.to_dict()
    with pytest.raises(ConfigError):
        DefiningFunction.from_dict(r.model, {"terms": [], "theta1": [], "junk": 1})


def test_biholo_tangency_order():
    ident = BiholoMap.identity(4)
    assert ident.tangency_order() == math.inf
    h = BiholoMap(4, {(1, 0): 1.0, (5, 0): 1e-4}, {(0, 1): 1.0, (0, 2): 1e-4})
    assert h.tangency_order() == 4  # z^5 has weight 5, w^2 has weight 8
    low = BiholoMap(4, {(1, 0): 1.0, (2, 0): 1e-4}, {(0, 1): 1.0})
    assert low.tangency_order() == 1
    with pytest.raises(ConfigError):
        BiholoMap(4, {(0, 0): 1.0, (1, 0): 1.0}, {(0, 1): 1.0})


def test_dilate_map_exponents():
    eps = 1e-4
    h = BiholoMap(4, {(1, 0): 1.0, (5, 0): eps}, {(0, 1): 1.0, (0, 2): eps})
    ht = dilate_map(h, 0.5)
    assert ht.h1[(1, 0)] == 1.0
    assert ht.h2[(0, 1)] == 1.0
    assert ht.h1[(5, 0)] == eps * 0.5**4
    assert ht.h2[(0, 2)] == eps * 0.5**4
    bad = BiholoMap(4, {(1, 0): 1.0}, {(0, 1): 1.0, (2, 0): eps})
    with pytest.raises(ConfigError):
        dilate_map(bad, 0.5)


def test_dilate_map_is_conjugation():
    eps = 1e-3
    h = BiholoMap(4, {(1, 0): 1.0, (3, 1): eps}, {(0, 1): 1.0, (4, 1): eps})
    t = 0.5
    ht = dilate_map(h, t)
    z, w = 0.3 + 0.2j, 0.1 - 0.4j
    a1, a2 = h.apply_numeric(t * z, t**4 * w)
    b1, b2 = ht.apply_numeric(z, w)
    assert abs(b1 - a1 / t) < 1e-14
    assert abs(b2 - a2 / t**4) < 1e-14


def test_biholo_json_round_trip():
    h = BiholoMap(4, {(1, 0): 1.0, (5, 0): 1e-4 + 2e-5j}, {(0, 1): 1.0})
    back = BiholoMap.from_dict(h.to_dict())
    assert back.to_dict() == h.to_dict()
    with pytest.raises(ConfigError):
        BiholoMap.from_dict({"d": 4, "H1": [], "H2": [], "extra": True})


def test_compose_disc():
    om = TrigSeries.from_mode_dict({0: 1.0, 1: -1.0})

    class Disc:
        h = om
        g = multiply(om, om) * 0.5

    disc = Disc()
    h_new, g_new = compose_disc(BiholoMap.identity(4), disc)
    assert coeff_distance(h_new, disc.h) == 0.0
    assert coeff_distance(g_new, disc.g) == 0.0

    phase = np.exp(0.3j)
    rot = BiholoMap(4, {(1, 0): phase}, {(0, 1): 1.0})
    h_new, g_new = compose_disc(rot, disc)
    assert coeff_distance(h_new, disc.h * phase) == 0.0
    assert coeff_distance(g_new, disc.g) == 0.0

    sq = BiholoMap(4, {(1, 0): 1.0, (2, 0): 0.01}, {(0, 1): 1.0})
    h_new, _ = compose_disc(sq, disc)
    assert coeff_distance(h_new, om + multiply(om, om) * 0.01) == 0.0

    tight = BiholoMap(4, {(1, 0): 1.0}, {(0, 1): 1.0}, domain_radius=0.5)
    with pytest.raises(ConfigError):
        compose_disc(tight, disc)


@settings(max_examples=40, deadline=None)
@given(
    s=st.floats(min_value=0.1, max_value=1.0),
    t=st.floats(min_value=0.1, max_value=1.0),
    eps=st.floats(min_value=-1.0, max_value=1.0),
)
def test_dilate_is_multiplicative(s, t, eps):
    r = DefiningFunction(_abs4(), (_cubic_term(eps),), theta1={3: 0.5})
    once = dilate(r, s * t)
    twice = dilate(dilate(r, s), t)
    for a, b in zip(once.terms, twice.terms):
        for key in a.coeffs:
            assert a.coeffs[key] == pytest.approx(b.coeffs[key], rel=1e-12, abs=1e-300)
    for deg in once.theta1:
        assert once.theta1[deg] == pytest.approx(twice.theta1[deg], rel=1e-12)
