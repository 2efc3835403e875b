"""Stationary disc construction and residual diagnostics.

A lifted boundary disc is a triple ``(c, h, g)`` of circle series: a real
nonvanishing weight ``c``, and analytic components ``h`` (the z-coordinate)
and ``g`` (the w-coordinate lift), both pinned to 0 at ``zeta = 1``.  For a
model surface the family is explicit: ``h = v (1 - zeta) / (1 - conj(a) zeta)``
with the Blaschke parameter ``a = mobius_a(b)`` tied to the weight parameter
``b``, and ``g`` recovered from its real boundary part ``P(h, conj h)``.

``stationarity_residual`` measures how far a candidate disc is from
stationarity for a given defining function by plain boundary substitution
into the three defect functionals; it makes no structural assumptions, so it
works as an independent check on discs produced by any code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .model import ModelPolynomial
from .perturb import DefiningFunction
from .series import TrigSeries, analytic_from_real_part

__all__ = [
    "ModelDiscParams",
    "LiftedDisc",
    "mobius_a",
    "model_disc",
    "stationarity_residual",
    "cauchy_center",
    "substitute_boundary",
    "weight_series",
]

PIN_TOL = 1e-12


def mobius_a(b: complex) -> complex:
    """Blaschke parameter of the model disc family.

    The root of ``b a^2 + a + conj(b) = 0`` inside the unit disc, in the
    cancellation-free form ``a = -2 conj(b) / (1 + sqrt(1 - 4 |b|^2))`` (so
    ``a = -conj(b) (1 + |b|^2) + O(|b|^5)`` for small ``b``); requires
    ``|b| < 1/2``.  The geometric ratio of the disc component ``h`` is the
    conjugate ``conj(a)``: that is the value killing the inside pole of
    ``zeta c' conj(h)`` for the weight built from ``b``.
    """
    b = complex(b)
    disc = 1.0 - 4.0 * abs(b) ** 2
    if disc <= 0:
        raise ConfigError("mobius_a requires |b| < 1/2")
    return -2.0 * np.conj(b) / (1.0 + math.sqrt(disc))


@dataclass(frozen=True)
class ModelDiscParams:
    """Parameters of the explicit model disc family."""

    b: complex
    v: complex
    theta: float = 0.0

    def __post_init__(self):
        if abs(self.b) >= 0.5:
            raise ConfigError("model disc parameter needs |b| < 1/2")
        if self.v == 0:
            raise ConfigError("model disc needs v != 0")

    def to_dict(self) -> dict:
        return {
            "b": [self.b.real, self.b.imag],
            "v": [self.v.real, self.v.imag],
            "theta": self.theta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelDiscParams":
        allowed = {"b", "v", "theta"}
        extra = set(data) - allowed
        if extra:
            raise ConfigError(f"unknown disc parameter keys: {sorted(extra)}")
        try:
            b = complex(*data["b"])
            v = complex(*data["v"])
            theta = float(data.get("theta", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed disc parameters: {exc}") from None
        return cls(b, v, theta)


@dataclass(frozen=True)
class LiftedDisc:
    """Boundary disc ``(c, h, g)`` with real weight and pinned components."""

    c: TrigSeries
    h: TrigSeries
    g: TrigSeries

    def __init__(self, c, h, g, validate: bool = True):
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        if not validate:
            return
        if not c.is_real(PIN_TOL):
            raise ConfigError("disc weight c must be real on the circle")
        if not h.is_analytic(PIN_TOL) or not g.is_analytic(PIN_TOL):
            raise ConfigError("disc components h, g must be analytic")
        if abs(h.evaluate(1.0)) > PIN_TOL or abs(g.evaluate(1.0)) > PIN_TOL:
            raise ConfigError("disc components must vanish at zeta = 1")
        samples = c.sample(max(4 * c.n_max + 4, 64)).real
        if samples.min() <= 1e-10:
            raise ConfigError("disc weight c must be strictly positive")

    def center(self) -> tuple[complex, complex]:
        return complex(self.h.coeff(0)), complex(self.g.coeff(0))

    def to_dict(self) -> dict:
        return {"c": self.c.to_dict(), "h": self.h.to_dict(), "g": self.g.to_dict()}

    @classmethod
    def from_dict(cls, data: dict, validate: bool = True) -> "LiftedDisc":
        allowed = {"c", "h", "g"}
        extra = set(data) - allowed
        if extra:
            raise ConfigError(f"unknown disc keys: {sorted(extra)}")
        try:
            return cls(
                TrigSeries.from_dict(data["c"]),
                TrigSeries.from_dict(data["h"]),
                TrigSeries.from_dict(data["g"]),
                validate=validate,
            )
        except KeyError as exc:
            raise ConfigError(f"disc data missing key {exc}") from None

    def boundary_samples(self, num: int) -> np.ndarray:
        """Structured boundary trace on ``num`` equispaced angles."""
        angles = 2.0 * np.pi * np.arange(num) / num
        pts = np.exp(1j * angles)
        out = np.zeros(num, dtype=[("angle", float), ("c", float), ("h", complex), ("g", complex)])
        out["angle"] = angles
        out["c"] = self.c.evaluate(pts).real
        out["h"] = self.h.evaluate(pts)
        out["g"] = self.g.evaluate(pts)
        return out


def weight_series(b: complex, k0: int) -> TrigSeries:
    """The frozen disc weight ``c = (conj(b)/zeta + 1 + b zeta)^k0``."""
    base = TrigSeries.from_mode_dict({-1: np.conj(b), 0: 1.0, 1: b})
    return base.power(k0)


def model_disc(model: ModelPolynomial, params: ModelDiscParams, n_max: int = 128) -> LiftedDisc:
    """Explicit stationary disc of a model surface.

    Truncation leaves ``h(1)`` of size ``|a|^n_max``; the constant is pulled
    back out so the pinning is exact at the stated tolerance.
    """
    if n_max < 4:
        raise ConfigError("disc order must be at least 4")
    ratio = np.conj(mobius_a(params.b))
    v = params.v * np.exp(1j * params.theta)
    geo = TrigSeries.geometric(ratio, n_max) if ratio != 0 else TrigSeries.constant(1.0)
    one_minus = TrigSeries.from_mode_dict({0: 1.0, 1: -1.0})
    h = (geo * one_minus).truncate(n_max) * v
    h = h + TrigSeries.constant(-h.evaluate(1.0))
    c = weight_series(params.b, model.k0)

    hbar = h.conjugate()
    pows_h = {0: TrigSeries.constant(1.0)}
    for j in range(1, model.d + 1):
        pows_h[j] = pows_h[j - 1] * h
    p = TrigSeries.zero(0)
    for j, alpha in model.alpha.items():
        p = p + (pows_h[j] * pows_h[model.d - j].conjugate()) * alpha
    g = analytic_from_real_part(TrigSeries.real_symmetrized(p.coeffs), tol=1e-9)
    return LiftedDisc(c, h, g)


def substitute_boundary(mon: dict, h: TrigSeries, hbar: TrigSeries, img: TrigSeries) -> TrigSeries:
    """Boundary trace of a trivariate polynomial along ``(h, conj h, Im g)``."""
    cache: dict[tuple[str, int], TrigSeries] = {}

    def pow_of(tag, base, n):
        key = (tag, n)
        if key not in cache:
            if n == 0:
                cache[key] = TrigSeries.constant(1.0)
            else:
                cache[key] = pow_of(tag, base, n - 1) * base
        return cache[key]

    total = TrigSeries.zero(0)
    for (a, b, e), coeff in mon.items():
        term = pow_of("h", h, a) * pow_of("hb", hbar, b)
        if e:
            term = term * pow_of("u", img, e)
        total = total + term * coeff
    return total


def stationarity_residual(
    disc: LiftedDisc, defn: DefiningFunction, k0: int | None = None
) -> tuple[float, float, float]:
    """Sup norms of the three stationarity defects by plain substitution.

    The first two are the negative-frequency parts of ``zeta^k0 c r_z(f)``
    and ``zeta^k0 c r_w(f)``, the third is the boundary trace of ``r(f)``
    itself.  ``k0`` defaults to the model's exponent; passing another value
    probes how the defect detects a wrong weight.
    """
    if k0 is None:
        k0 = defn.model.k0
    h = disc.h
    hbar = h.conjugate()
    img = (disc.g - disc.g.conjugate()) * (-0.5j)
    reg = (disc.g + disc.g.conjugate()) * 0.5

    rz = substitute_boundary(defn.rz_mon(), h, hbar, img)
    rw = substitute_boundary(defn.rw_mon(), h, hbar, img)
    big_r = substitute_boundary(defn.big_r_mon(), h, hbar, img)

    weighted_z = (disc.c * rz).shift(k0)
    weighted_w = (disc.c * rw).shift(k0)
    res1 = weighted_z.negative_project().sup_norm()
    res2 = weighted_w.negative_project().sup_norm()
    res3 = (big_r - reg).sup_norm()
    return res1, res2, res3


def cauchy_center(disc: LiftedDisc, defn: DefiningFunction, num: int | None = None) -> complex:
    """Recover ``g(0)`` from the boundary data via a Cauchy-type integral.

    Uses ``g(0) = (1/pi) integral p / (1 - zeta) dtheta`` where ``p`` is the
    boundary trace of the non-harmonic part of the defining function along
    the disc; valid because ``Re g = p`` on the boundary and ``g(1) = 0``.
    The grid is midpoint-shifted so the removable point ``zeta = 1`` is never
    sampled.
    """
    if num is None:
        num = max(1024, 8 * max(disc.h.n_max, disc.g.n_max) + 8)
    angles = 2.0 * np.pi * (np.arange(num) + 0.5) / num
    pts = np.exp(1j * angles)
    hv = disc.h.evaluate(pts)
    gv = disc.g.evaluate(pts)
    p = _eval_trivariate(defn.big_r_mon(), hv, gv.imag)
    integrand = p / (1.0 - pts)
    return complex(np.sum(integrand) * (2.0 / num))


def _eval_trivariate(mon: dict, zv: np.ndarray, uv: np.ndarray) -> np.ndarray:
    total = np.zeros_like(zv, dtype=complex)
    zb = np.conj(zv)
    for (a, b, e), c in mon.items():
        total += c * zv**a * zb**b * uv**e
    return total
