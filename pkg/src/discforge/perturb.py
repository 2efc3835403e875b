"""Polynomial perturbations of the defining function and anisotropic scaling.

A defining function is ``r(z, w) = -Re w + P(z, conj z) + theta`` where the
higher-order block ``theta`` collects terms

    z^i conj(z)^j p(z)                    with i + j = d + 1        (l = 0)
    z^i conj(z)^j (Im w)^l p(z, Im w)     with i + j = d - l, l >= 1
    theta1(Im w)                          vanishing to second order

each stored once per unordered index pair and Hermitian-symmetrized, so ``r``
is real by construction.  Internally everything is flattened to a trivariate
polynomial in ``(z, conj z, Im w)``, which keeps every partial derivative and
the anisotropic dilation ``r_t = t^-d * r o (t z, t^d w)`` exact.

Biholomorphic test maps ``H = (H1, H2)`` of the ambient space are polynomial
and graded by the same weights (z carries weight 1, w carries weight d); the
tangency order of ``H`` is the lowest weighted degree of ``H - Id`` minus 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .model import ModelPolynomial
from .series import TrigSeries, multiply

__all__ = [
    "PerturbationTerm",
    "DefiningFunction",
    "BiholoMap",
    "dilate",
    "dilate_map",
    "compose_disc",
    "x_norm_distance",
    "d_z",
    "d_zbar",
    "d_u",
]

MAX_POLY_DEGREE = 8

# trivariate monomial dictionaries: {(a, b, e): coeff} for z^a zbar^b u^e


def d_z(mon: dict) -> dict:
    return {(a - 1, b, e): a * c for (a, b, e), c in mon.items() if a >= 1}


def d_zbar(mon: dict) -> dict:
    return {(a, b - 1, e): b * c for (a, b, e), c in mon.items() if b >= 1}


def d_u(mon: dict) -> dict:
    return {(a, b, e - 1): e * c for (a, b, e), c in mon.items() if e >= 1}


def _scaled(mon: dict, factor: complex) -> dict:
    return {key: factor * c for key, c in mon.items()}


def _eval_mon(mon: dict, z, zbar, u):
    total = 0.0
    for (a, b, e), c in mon.items():
        total = total + c * z**a * zbar**b * u**e
    return total


@dataclass(frozen=True)
class PerturbationTerm:
    """One stored block ``z^i conj(z)^j (Im w)^l p(z, Im w)``.

    ``coeffs`` maps ``(deg_z, deg_u) -> complex``; for ``l = 0`` the
    polynomial may not depend on ``Im w``.
    """

    i: int
    j: int
    l: int
    coeffs: dict[tuple[int, int], complex] = field(repr=False)

    def __post_init__(self):
        if self.i < 0 or self.j < 0 or self.l < 0:
            raise ConfigError("term indices must be nonnegative")
        clean = {}
        for (m, n), c in self.coeffs.items():
            m, n = int(m), int(n)
            if m > MAX_POLY_DEGREE or n > MAX_POLY_DEGREE:
                raise ConfigError(f"term polynomial degree exceeds {MAX_POLY_DEGREE}")
            if self.l == 0 and n != 0:
                raise ConfigError("l = 0 terms may not depend on Im w")
            if c != 0:
                clean[(m, n)] = complex(c)
        object.__setattr__(self, "coeffs", clean)


def _theta_dict(d: int, terms, theta1) -> dict:
    """Flatten stored blocks plus their Hermitian mirrors into one trivariate dict."""
    out: dict[tuple[int, int, int], complex] = {}

    def add(key, val):
        out[key] = out.get(key, 0.0 + 0.0j) + val
        if out[key] == 0:
            del out[key]

    for term in terms:
        for (m, n), c in term.coeffs.items():
            a, b, e = term.i + m, term.j, term.l + n
            add((a, b, e), c)
            add((b, a, e), np.conj(c))
    for deg, val in theta1.items():
        add((0, 0, deg), complex(val))
    return out


@dataclass(frozen=True)
class DefiningFunction:
    """``r = -Re w + P + theta`` with polynomial higher-order block."""

    model: ModelPolynomial
    terms: tuple[PerturbationTerm, ...] = ()
    theta1: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        d = self.model.d
        seen = set()
        for term in self.terms:
            if term.l == 0:
                if term.i + term.j != d + 1:
                    raise ConfigError("l = 0 terms need i + j = d + 1")
            else:
                if term.l > d - 1:
                    raise ConfigError("terms need 1 <= l <= d - 1")
                if term.i + term.j != d - term.l:
                    raise ConfigError("l >= 1 terms need i + j = d - l")
            if (term.i, term.j, term.l) in seen or (term.j, term.i, term.l) in seen:
                raise ConfigError("store only one of each (i, j)/(j, i) pair")
            seen.add((term.i, term.j, term.l))
        th1 = {}
        for deg, val in self.theta1.items():
            deg = int(deg)
            if deg < 2:
                raise ConfigError("theta1 must vanish to second order in Im w")
            if deg > MAX_POLY_DEGREE:
                raise ConfigError(f"theta1 degree exceeds {MAX_POLY_DEGREE}")
            if abs(complex(val).imag) > 0:
                raise ConfigError("theta1 coefficients must be real")
            if val != 0:
                th1[deg] = float(val)
        object.__setattr__(self, "theta1", th1)
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def pure(cls, model: ModelPolynomial) -> "DefiningFunction":
        return cls(model)

    @property
    def is_pure(self) -> bool:
        return not self.terms and not self.theta1

    # ---- trivariate views -------------------------------------------------

    def theta_mon(self) -> dict:
        return _theta_dict(self.model.d, self.terms, self.theta1)

    def big_r_mon(self) -> dict:
        """Model plus theta: everything except the ``-Re w`` part."""
        out = dict(self.theta_mon())
        for j, a in self.model.alpha.items():
            key = (j, self.model.d - j, 0)
            out[key] = out.get(key, 0.0 + 0.0j) + a
        return out

    # First and second Wirtinger derivatives as trivariate dicts.  With
    # w = s + i u the chain rule gives d/dw = (1/2) d/ds - (i/2) d/du and the
    # ``-Re w`` part contributes the constants.

    def rz_mon(self) -> dict:
        return d_z(self.big_r_mon())

    def rw_mon(self) -> dict:
        out = _scaled(d_u(self.big_r_mon()), -0.5j)
        out[(0, 0, 0)] = out.get((0, 0, 0), 0.0 + 0.0j) - 0.5
        return out

    def rwbar_mon(self) -> dict:
        out = _scaled(d_u(self.big_r_mon()), 0.5j)
        out[(0, 0, 0)] = out.get((0, 0, 0), 0.0 + 0.0j) - 0.5
        return out

    def rzbar_mon(self) -> dict:
        return d_zbar(self.big_r_mon())

    def rzz_mon(self) -> dict:
        return d_z(d_z(self.big_r_mon()))

    def rzzbar_mon(self) -> dict:
        return d_zbar(d_z(self.big_r_mon()))

    def rzw_mon(self) -> dict:
        return _scaled(d_u(d_z(self.big_r_mon())), -0.5j)

    def rzwbar_mon(self) -> dict:
        return _scaled(d_u(d_z(self.big_r_mon())), 0.5j)

    def rwzbar_mon(self) -> dict:
        return _scaled(d_u(d_zbar(self.big_r_mon())), -0.5j)

    def rww_mon(self) -> dict:
        return _scaled(d_u(d_u(self.big_r_mon())), -0.25)

    def rwwbar_mon(self) -> dict:
        return _scaled(d_u(d_u(self.big_r_mon())), 0.25)

    # ---- pointwise evaluation ----------------------------------------------

    def eval_r(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        val = -w.real + _eval_mon(self.big_r_mon(), z, np.conj(z), w.imag)
        return val.real if np.iscomplexobj(val) else val

    def eval_r_z(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return _eval_mon(self.rz_mon(), z, np.conj(z), w.imag)

    def eval_r_w(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return _eval_mon(self.rw_mon(), z, np.conj(z), w.imag)

    # ---- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        terms = []
        for t in self.terms:
            rows = [[m, n, float(c.real), float(c.imag)] for (m, n), c in sorted(t.coeffs.items())]
            terms.append({"i": t.i, "j": t.j, "l": t.l, "coeffs": rows})
        th1 = [[deg, val] for deg, val in sorted(self.theta1.items())]
        return {"terms": terms, "theta1": th1}

    @classmethod
    def from_dict(cls, model: ModelPolynomial, data: dict) -> "DefiningFunction":
        allowed = {"terms", "theta1"}
        extra = set(data) - allowed
        if extra:
            raise ConfigError(f"unknown perturbation keys: {sorted(extra)}")
        terms = []
        for item in data.get("terms", []):
            try:
                coeffs = {(int(m), int(n)): re + 1j * im for m, n, re, im in item["coeffs"]}
                terms.append(
                    PerturbationTerm(int(item["i"]), int(item["j"]), int(item["l"]), coeffs)
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"malformed perturbation term: {exc}") from None
        theta1 = {int(deg): float(val) for deg, val in data.get("theta1", [])}
        return cls(model, tuple(terms), theta1)


def dilate(r: DefiningFunction, t: float) -> DefiningFunction:
    """Exact coefficient form of ``t^-d * r o (t z, t^d w)``.

    The model part is invariant; a stored polynomial coefficient of
    ``z^m (Im w)^n`` in the ``(i, j, l)`` block picks up ``t^(l(d-1)+m+dn)``
    (with ``l = 0`` reading as ``t^(m+1)``), and ``theta1``'s degree-c
    coefficient picks up ``t^(dc-d)``.
    """
    if not (0 < t <= 1):
        raise ConfigError("dilation parameter must lie in (0, 1]")
    d = r.model.d
    new_terms = []
    for term in r.terms:
        scaled = {}
        for (m, n), c in term.coeffs.items():
            if term.l == 0:
                expo = m + 1
            else:
                expo = term.l * (d - 1) + m + d * n
            scaled[(m, n)] = c * t**expo
        new_terms.append(PerturbationTerm(term.i, term.j, term.l, scaled))
    th1 = {deg: val * t ** (d * deg - d) for deg, val in r.theta1.items()}
    return DefiningFunction(r.model, tuple(new_terms), th1)


def _coeff_weight(m: int, k_order: int, radius: float) -> float:
    total = 0.0
    for o in range(min(m, k_order) + 1):
        total += math.perm(m, o) * radius ** (m - o)
    return total


def x_norm_distance(r: DefiningFunction, k_order: int = 4, radius: float = 1.0) -> float:
    """Proxy distance of ``r`` from its model in the perturbation space.

    Max over stored blocks of the weighted coefficient sum (weights carry the
    derivative growth up to ``k_order`` on the disc of ``radius``), plus the
    same for ``theta1``.  Zero exactly when the higher-order block vanishes;
    only relative comparisons are meaningful.
    """
    best = 0.0
    for term in r.terms:
        total = sum(
            abs(c) * _coeff_weight(m, k_order, radius) * _coeff_weight(n, k_order, radius)
            for (m, n), c in term.coeffs.items()
        )
        best = max(best, total)
    th1 = sum(abs(v) * _coeff_weight(deg, k_order, radius) for deg, v in r.theta1.items())
    return best + th1


@dataclass(frozen=True)
class BiholoMap:
    """Polynomial self-map ``H = (H1, H2)`` graded by weights (1, d).

    ``h1`` and ``h2`` map ``(j, l) -> coeff`` of ``z^j w^l``.  The map must
    fix the origin; its tangency order is the smallest weighted degree of
    ``H - Id`` minus one (infinite for the identity).
    """

    d: int
    h1: dict[tuple[int, int], complex] = field(repr=False)
    h2: dict[tuple[int, int], complex] = field(repr=False)
    domain_radius: float = math.inf

    def __post_init__(self):
        for name, mono in (("H1", self.h1), ("H2", self.h2)):
            for (j, l), c in mono.items():
                if j < 0 or l < 0:
                    raise ConfigError("map exponents must be nonnegative")
                if j == 0 and l == 0 and c != 0:
                    raise ConfigError(f"{name} must fix the origin")
        object.__setattr__(self, "h1", {k: complex(v) for k, v in self.h1.items() if v != 0})
        object.__setattr__(self, "h2", {k: complex(v) for k, v in self.h2.items() if v != 0})

    @classmethod
    def identity(cls, d: int) -> "BiholoMap":
        return cls(d, {(1, 0): 1.0}, {(0, 1): 1.0})

    def deviation(self) -> tuple[dict, dict]:
        dev1 = dict(self.h1)
        dev1[(1, 0)] = dev1.get((1, 0), 0.0 + 0.0j) - 1.0
        dev2 = dict(self.h2)
        dev2[(0, 1)] = dev2.get((0, 1), 0.0 + 0.0j) - 1.0
        return (
            {k: v for k, v in dev1.items() if v != 0},
            {k: v for k, v in dev2.items() if v != 0},
        )

    def tangency_order(self) -> float:
        dev1, dev2 = self.deviation()
        degrees = [j + self.d * l for (j, l) in dev1] + [j + self.d * l for (j, l) in dev2]
        if not degrees:
            return math.inf
        return min(degrees) - 1

    def apply_numeric(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        out1 = sum(c * z**j * w**l for (j, l), c in self.h1.items())
        out2 = sum(c * z**j * w**l for (j, l), c in self.h2.items())
        return out1, out2

    def to_dict(self) -> dict:
        def rows(mono):
            return [[j, l, float(c.real), float(c.imag)] for (j, l), c in sorted(mono.items())]

        return {"d": self.d, "H1": rows(self.h1), "H2": rows(self.h2)}

    @classmethod
    def from_dict(cls, data: dict) -> "BiholoMap":
        allowed = {"d", "H1", "H2"}
        extra = set(data) - allowed
        if extra:
            raise ConfigError(f"unknown map keys: {sorted(extra)}")
        try:
            h1 = {(int(j), int(l)): re + 1j * im for j, l, re, im in data["H1"]}
            h2 = {(int(j), int(l)): re + 1j * im for j, l, re, im in data["H2"]}
            return cls(int(data["d"]), h1, h2)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed map data: {exc}") from None


def dilate_map(h: BiholoMap, t: float) -> BiholoMap:
    """Conjugate ``H`` by the anisotropic dilation: ``H_t = phi_t^-1 o H o phi_t``.

    A ``z^j w^l`` coefficient scales by ``t^(j + d l - 1)`` in the first
    component and ``t^(j + d l - d)`` in the second; a negative exponent means
    the map is not admissible for shrinking ``t`` and is rejected.
    """
    if not (0 < t <= 1):
        raise ConfigError("dilation parameter must lie in (0, 1]")
    d = h.d
    new1 = {}
    for (j, l), c in h.h1.items():
        expo = j + d * l - 1
        if expo < 0:
            raise ConfigError(f"H1 monomial z^{j} w^{l} scales by t^{expo} < 0")
        new1[(j, l)] = c * t**expo
    new2 = {}
    for (j, l), c in h.h2.items():
        expo = j + d * l - d
        if expo < 0:
            raise ConfigError(f"H2 monomial z^{j} w^{l} scales by t^{expo} < 0")
        new2[(j, l)] = c * t**expo
    return BiholoMap(d, new1, new2, h.domain_radius)


def compose_disc(h_map: BiholoMap, disc) -> tuple[TrigSeries, TrigSeries]:
    """Exact polynomial composition ``H o (h, g)`` in coefficient space.

    The disc boundary values must stay inside the map's domain polydisc.
    """
    h, g = disc.h, disc.g
    if math.isfinite(h_map.domain_radius):
        bound = max(float(np.max(np.abs(s.sample(512)))) for s in (h, g))
        if bound > h_map.domain_radius:
            raise ConfigError("disc leaves the domain of the map")
    powers: dict[tuple[str, int], TrigSeries] = {}

    def power(tag, base, n):
        key = (tag, n)
        if key not in powers:
            powers[key] = TrigSeries.constant(1.0) if n == 0 else multiply(power(tag, base, n - 1), base)
        return powers[key]

    out = []
    for mono in (h_map.h1, h_map.h2):
        acc = TrigSeries.zero(0)
        for (j, l), c in sorted(mono.items()):
            acc = acc + multiply(power("h", h, j), power("g", g, l)) * c
        out.append(acc.trimmed(0.0))
    return out[0], out[1]
