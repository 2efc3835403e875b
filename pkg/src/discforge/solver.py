"""The reduced stationarity operator: evaluation, linearization, kernel, Newton.

The three defect functionals of a lifted disc ``(c, h, g)`` against a defining
function ``r`` are

    T1 = negative_project( zeta^k0 c r_z(f) / ((1 - zeta)^(d-1) s(zeta)) )
    T2 = negative_project( zeta^k0 c r_w(f) )
    T3 = boundary trace of r(f)

where ``s`` collects the outside roots of the model's curvature polynomial.
The structural zero of order ``d - 1`` at ``zeta = 1`` is cancelled
symbolically: with ``h = (1 - zeta) ht``, ``g = (1 - zeta) gt`` and
``conj(1 - zeta) = -conj(zeta) (1 - zeta)`` every monomial ``z^a zbar^b u^e``
of a derivative of ``r`` contributes a clean power ``(1 - zeta)^(a+b+e)``, so
the quotient is polynomial; only the division by ``s`` is numerical (pointwise
on circle samples, where ``s`` does not vanish).

The linearization is assembled from multiplier series and index shifts, never
from finite differences; a difference quotient appears only in the tests as an
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discs import (
    LiftedDisc,
    ModelDiscParams,
    model_disc,
    stationarity_residual,
    substitute_boundary,
    weight_series,
)
from .exceptions import ConfigError, NumericalError
from .model import QFactorization
from .perturb import DefiningFunction, d_u, x_norm_distance
from .series import (
    TrigSeries,
    analytic_from_real_part,
    divide_one_minus_zeta,
    from_samples,
    multiply,
)

__all__ = [
    "OperatorValue",
    "SolverOptions",
    "LinearizedOperator",
    "KernelBasis",
    "SolveResult",
    "eval_T_prime",
    "linearize_at",
    "kernel_dim_svd",
    "shift_projection_matrix",
    "kernel_basis_p0",
    "binomial_tail",
    "solve_newton",
]

ONE_MINUS = TrigSeries.from_mode_dict({0: 1.0, 1: -1.0})


@dataclass(frozen=True)
class OperatorValue:
    """Value of the three defect functionals at one point."""

    t1: TrigSeries
    t2: TrigSeries
    t3: TrigSeries

    def sup_norms(self) -> tuple[float, float, float]:
        return self.t1.sup_norm(), self.t2.sup_norm(), self.t3.sup_norm()


@dataclass(frozen=True)
class SolverOptions:
    n_max: int = 128
    tol: float = 1e-9
    max_iter: int = 25
    svd_threshold: float = 1e-8
    x_norm_bound: float = 10.0

    def __post_init__(self):
        if self.n_max < 4 or self.max_iter < 1:
            raise ConfigError("solver options out of range")
        if not (0 < self.tol < 1) or not (0 < self.svd_threshold < 1):
            raise ConfigError("solver tolerances must lie in (0, 1)")

    @classmethod
    def from_dict(cls, data: dict) -> "SolverOptions":
        allowed = {"N", "tol", "max_iter", "svd_threshold", "x_norm_bound"}
        extra = set(data) - allowed
        if extra:
            raise ConfigError(f"unknown solver option keys: {sorted(extra)}")
        kwargs = {}
        if "N" in data:
            kwargs["n_max"] = int(data["N"])
        for key in ("tol", "svd_threshold", "x_norm_bound"):
            if key in data:
                kwargs[key] = float(data[key])
        if "max_iter" in data:
            kwargs["max_iter"] = int(data["max_iter"])
        return cls(**kwargs)


# ---- factored substitution ---------------------------------------------------


class _PowerCache:
    def __init__(self):
        self._store: dict[tuple[str, int], TrigSeries] = {}
        self._bases: dict[str, TrigSeries] = {}

    def register(self, tag: str, base: TrigSeries):
        self._bases[tag] = base
        self._store[(tag, 0)] = TrigSeries.constant(1.0)
        self._store[(tag, 1)] = base

    def get(self, tag: str, n: int) -> TrigSeries:
        key = (tag, n)
        if key not in self._store:
            self._store[key] = multiply(self.get(tag, n - 1), self._bases[tag])
        return self._store[key]


def _subst_factored(mon: dict, d: int, cache: _PowerCache, extra: int) -> TrigSeries:
    """Substitute ``z = (1-zeta) ht`` etc. and cancel ``(1-zeta)^(d-1)`` exactly.

    ``extra`` counts additional structural ``(1-zeta)`` factors carried by the
    direction of differentiation (one per first-order direction).
    """
    out = TrigSeries.zero(0)
    for (a, b, e), kappa in sorted(mon.items()):
        expo = a + b + e + extra - (d - 1)
        if expo < 0:
            raise NumericalError("vanishing-order bookkeeping violated")
        term = cache.get("om", expo)
        if a:
            term = multiply(term, cache.get("h", a))
        if b:
            term = multiply(term, cache.get("hb", b))
        if e:
            term = multiply(term, cache.get("u", e))
        coef = kappa * (-1.0) ** b * (-0.5j) ** e
        out = out + term.shift(-b) * coef
    return out


def _factored_cache(htilde: TrigSeries, gtilde: TrigSeries) -> _PowerCache:
    cache = _PowerCache()
    cache.register("om", ONE_MINUS)
    cache.register("h", htilde)
    cache.register("hb", htilde.conjugate())
    cache.register("u", gtilde + gtilde.shift(1).conjugate())
    return cache


def _over_s(series: TrigSeries, qfac: QFactorization, pad: int = 64) -> TrigSeries:
    """Divide by the outside-root polynomial, pointwise on circle samples."""
    if not qfac.roots_outside:
        return series
    n_target = series.n_max + pad
    k = 1 << max(8, int(math.ceil(math.log2(2 * n_target + 2))))
    vals = series.sample(k)
    svals = qfac.s_poly().sample(k)
    out, tail = from_samples(vals / svals, n_target)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if tail > 1e-9 * scale:
        raise NumericalError("sample division by s is under-resolved")
    return out


# ---- evaluation ---------------------------------------------------------------


def _plain_point(defn: DefiningFunction, htilde: TrigSeries, gtilde: TrigSeries):
    h = multiply(ONE_MINUS, htilde)
    g = multiply(ONE_MINUS, gtilde)
    hbar = h.conjugate()
    img = (g - g.conjugate()) * (-0.5j)
    reg = (g + g.conjugate()) * 0.5
    return h, hbar, img, reg


def _operator_value(
    defn: DefiningFunction,
    qfac: QFactorization,
    c: TrigSeries,
    htilde: TrigSeries,
    gtilde: TrigSeries,
) -> OperatorValue:
    k0 = defn.model.k0
    cache = _factored_cache(htilde, gtilde)
    s1 = _subst_factored(defn.rz_mon(), defn.model.d, cache, extra=0)
    t1 = _over_s(multiply(c, s1).shift(k0), qfac).negative_project()

    h, hbar, img, reg = _plain_point(defn, htilde, gtilde)
    rw = substitute_boundary(defn.rw_mon(), h, hbar, img)
    t2 = multiply(c, rw).shift(k0).negative_project()
    t3raw = substitute_boundary(defn.big_r_mon(), h, hbar, img) - reg
    t3 = TrigSeries.real_symmetrized(t3raw.coeffs)
    return OperatorValue(t1, t2, t3)


def eval_T_prime(
    r: DefiningFunction, disc: LiftedDisc, qfac: QFactorization
) -> OperatorValue:
    """Evaluate the reduced operator at a lifted disc."""
    try:
        htilde = divide_one_minus_zeta(disc.h)
        gtilde = divide_one_minus_zeta(disc.g)
    except ValueError as exc:
        raise ConfigError(f"disc components not divisible by 1 - zeta: {exc}") from None
    return _operator_value(r, qfac, disc.c, htilde, gtilde)


# ---- linearization -------------------------------------------------------------


@dataclass(frozen=True)
class LinearizedOperator:
    """Dense real matrix of the derivative of the reduced operator.

    Column layout: optional weight block (symbol degree ``n_weight``; real
    coordinates ``c0, Re c1, Im c1, ...``), then the analytic coefficients of
    ``ht`` and ``gt`` as ``Re/Im`` pairs up to degree ``n_in``.  Row layout:
    the T1 then T2 negative modes ``-1 .. -n_out`` as ``Re/Im`` pairs, then
    the T3 modes ``0 .. n_out`` (mode 0 real).
    """

    matrix: np.ndarray = field(repr=False)
    n_in: int
    n_out: int
    n_weight: int | None

    @property
    def weight_cols(self) -> slice:
        return slice(0, 0 if self.n_weight is None else 2 * self.n_weight + 1)

    @property
    def hg_cols(self) -> slice:
        return slice(self.weight_cols.stop, self.matrix.shape[1])


def _default_n_out(d: int, k0: int, n_in: int) -> int:
    return d * (n_in + 2) + 2 * k0 + 8


def pack_series(htilde: TrigSeries, gtilde: TrigSeries, n_in: int) -> np.ndarray:
    out = np.zeros(4 * (n_in + 1))
    for block, series in enumerate((htilde, gtilde)):
        base = 2 * (n_in + 1) * block
        for n in range(n_in + 1):
            val = series.coeff(n)
            out[base + 2 * n] = val.real
            out[base + 2 * n + 1] = val.imag
    return out


def unpack_series(x: np.ndarray, n_in: int) -> tuple[TrigSeries, TrigSeries]:
    half = 2 * (n_in + 1)
    out = []
    for block in range(2):
        arr = np.zeros(2 * n_in + 1, dtype=complex)
        seg = x[half * block : half * (block + 1)]
        arr[n_in:] = seg[0::2] + 1j * seg[1::2]
        out.append(TrigSeries(arr))
    return out[0], out[1]


def stack_value(val: OperatorValue, n_out: int) -> np.ndarray:
    out = np.zeros(6 * n_out + 1)
    for block, series in enumerate((val.t1, val.t2)):
        seg = out[2 * n_out * block : 2 * n_out * (block + 1)]
        for n in range(1, n_out + 1):
            v = series.coeff(-n)
            seg[2 * n - 2] = v.real
            seg[2 * n - 1] = v.imag
    seg = out[4 * n_out :]
    seg[0] = val.t3.coeff(0).real
    for n in range(1, n_out + 1):
        v = val.t3.coeff(n)
        seg[2 * n - 1] = v.real
        seg[2 * n] = v.imag
    return out


class _RowExtractor:
    def __init__(self, n_out: int, reach: int):
        self.n_out = n_out
        self.pad = n_out + reach + 4
        self.idx_neg = self.pad - np.arange(1, n_out + 1)
        self.idx_sym = self.pad + np.arange(0, n_out + 1)

    def array(self, series: TrigSeries) -> np.ndarray:
        return series.truncate(self.pad).pad_to(self.pad).coeffs

    def neg(self, arr: np.ndarray, shift: int) -> np.ndarray:
        return arr[self.idx_neg - shift]

    def sym(self, arr: np.ndarray, shift: int) -> np.ndarray:
        return arr[self.idx_sym - shift]


def _interleave_neg(v: np.ndarray) -> np.ndarray:
    out = np.zeros(2 * v.size)
    out[0::2] = v.real
    out[1::2] = v.imag
    return out


def _interleave_sym(v: np.ndarray) -> np.ndarray:
    out = np.zeros(2 * v.size - 1)
    out[0] = v[0].real
    out[1::2] = v[1:].real
    out[2::2] = v[1:].imag
    return out


def _linearize(
    defn: DefiningFunction,
    qfac: QFactorization,
    c: TrigSeries,
    htilde: TrigSeries,
    gtilde: TrigSeries,
    n_in: int,
    n_out: int,
    n_weight: int | None,
) -> LinearizedOperator:
    d, k0 = defn.model.d, defn.model.k0
    cache = _factored_cache(htilde, gtilde)

    def fct(mon, extra):
        return _subst_factored(mon, d, cache, extra)

    def weighted(series):
        return multiply(c, series).shift(k0)

    # T1 multipliers carry the exact cancellation and the sample division by s
    m1_hlin = _over_s(weighted(fct(defn.rzz_mon(), 1)), qfac)
    m1_hanti = -_over_s(weighted(fct(defn.rzzbar_mon(), 1)), qfac).shift(-1)
    m1_g = _over_s(weighted(fct(d_u(defn.rz_mon()), 1)), qfac) * (-0.5j)
    m1_glin, m1_ganti = m1_g, m1_g.shift(-1)

    h, hbar, img, _ = _plain_point(defn, htilde, gtilde)

    def plain(mon):
        return substitute_boundary(mon, h, hbar, img)

    m2_hlin = weighted(multiply(plain(defn.rzw_mon()), ONE_MINUS))
    m2_hanti = -weighted(multiply(plain(defn.rwzbar_mon()), ONE_MINUS)).shift(-1)
    m2_g = weighted(multiply(plain(d_u(defn.rw_mon())), ONE_MINUS)) * (-0.5j)
    m2_glin, m2_ganti = m2_g, m2_g.shift(-1)

    s3z = plain(defn.rz_mon())
    s3u = plain(d_u(defn.big_r_mon()))
    m3_hlin = multiply(s3z, ONE_MINUS)
    m3_hanti = -multiply(s3z.conjugate(), ONE_MINUS).shift(-1)
    m3_glin = multiply(s3u * (-0.5j) + TrigSeries.constant(-0.5), ONE_MINUS)
    m3_ganti = multiply(s3u * (-0.5j) + TrigSeries.constant(0.5), ONE_MINUS).shift(-1)

    reach = max(n_in, 0 if n_weight is None else n_weight)
    ex = _RowExtractor(n_out, reach)
    blocks = {
        "h": [
            (ex.array(m1_hlin), ex.array(m1_hanti), ex.neg, _interleave_neg, 0),
            (ex.array(m2_hlin), ex.array(m2_hanti), ex.neg, _interleave_neg, 2 * n_out),
            (ex.array(m3_hlin), ex.array(m3_hanti), ex.sym, _interleave_sym, 4 * n_out),
        ],
        "g": [
            (ex.array(m1_glin), ex.array(m1_ganti), ex.neg, _interleave_neg, 0),
            (ex.array(m2_glin), ex.array(m2_ganti), ex.neg, _interleave_neg, 2 * n_out),
            (ex.array(m3_glin), ex.array(m3_ganti), ex.sym, _interleave_sym, 4 * n_out),
        ],
    }

    n_wcols = 0 if n_weight is None else 2 * n_weight + 1
    ncols = n_wcols + 4 * (n_in + 1)
    a = np.zeros((6 * n_out + 1, ncols))

    if n_weight is not None:
        m1_c = ex.array(_over_s(fct(defn.rz_mon(), 0).shift(k0), qfac))
        m2_c = ex.array(plain(defn.rw_mon()).shift(k0))
        for n in range(n_weight + 1):
            for mult, row0 in ((m1_c, 0), (m2_c, 2 * n_out)):
                up, down = ex.neg(mult, n), ex.neg(mult, -n)
                rows = slice(row0, row0 + 2 * n_out)
                if n == 0:
                    a[rows, 0] += _interleave_neg(up)
                else:
                    a[rows, 2 * n - 1] += _interleave_neg(up + down)
                    a[rows, 2 * n] += _interleave_neg(1j * up - 1j * down)

    for bi, tag in enumerate(("h", "g")):
        base = n_wcols + 2 * (n_in + 1) * bi
        for m_lin, m_anti, extract, inter, row0 in blocks[tag]:
            nrows = 2 * n_out if inter is _interleave_neg else 2 * n_out + 1
            rows = slice(row0, row0 + nrows)
            for n in range(n_in + 1):
                up, down = extract(m_lin, n), extract(m_anti, -n)
                a[rows, base + 2 * n] += inter(up + down)
                a[rows, base + 2 * n + 1] += inter(1j * up - 1j * down)
    return LinearizedOperator(a, n_in, n_out, n_weight)


def linearize_at(
    r: DefiningFunction,
    disc: LiftedDisc,
    qfac: QFactorization,
    n_in: int | None = None,
    n_out: int | None = None,
    n_weight: int | None = None,
) -> LinearizedOperator:
    """Assemble the real derivative matrix of the reduced operator at a disc.

    The weight block is included with symbol degree ``n_weight`` (defaults to
    the series truncation); pass the result to ``kernel_dim_svd`` or slice
    ``hg_cols`` for the frozen-weight subproblem.
    """
    htilde = divide_one_minus_zeta(disc.h)
    gtilde = divide_one_minus_zeta(disc.g)
    if n_in is None:
        n_in = max(htilde.n_max, gtilde.n_max)
    if n_weight is None:
        n_weight = n_in
    if n_out is None:
        n_out = _default_n_out(r.model.d, r.model.k0, n_in)
    return _linearize(r, qfac, disc.c, htilde, gtilde, n_in, n_out, n_weight)


# ---- kernel --------------------------------------------------------------------


def kernel_dim_svd(op, threshold: float = 1e-8) -> int:
    """Number of singular values below ``threshold`` relative to the largest.

    Requires the spectrum to separate cleanly (factor 10 across the cut);
    otherwise the count would be grid noise and the call fails instead.
    """
    matrix = op.matrix if hasattr(op, "matrix") else np.asarray(op)
    sigma = np.linalg.svd(matrix, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0:
        return matrix.shape[1]
    cut = threshold * sigma[0]
    rank = int(np.sum(sigma >= cut))
    if 0 < rank < sigma.size:
        below = sigma[rank]
        if below > 0 and sigma[rank - 1] / below < 10.0:
            raise NumericalError("singular spectrum has no clean gap at the threshold")
    return matrix.shape[1] - rank


def shift_projection_matrix(m: int, n_modes: int) -> np.ndarray:
    """Matrix of ``u -> negative_project(zeta^m u)`` on modes ``-n_modes..0``.

    A toy model of the index bookkeeping: the kernel is spanned by the modes
    ``-m..0``, hence has complex dimension ``m + 1``.
    """
    if m < 0 or n_modes < m:
        raise ConfigError("need 0 <= m <= n_modes")
    rows = n_modes - m
    out = np.zeros((rows, n_modes + 1), dtype=complex)
    for col, mode in enumerate(range(-n_modes, 1)):
        target = mode + m
        if target <= -1:
            out[-target - 1, col] = 1.0
    return out


@dataclass(frozen=True)
class KernelBasis:
    """Explicit kernel of the linearization at the base disc."""

    vectors: tuple[tuple[TrigSeries, TrigSeries, TrigSeries], ...]
    dim: int
    coords: np.ndarray = field(repr=False)
    residuals: tuple[float, ...] = ()


def binomial_tail(root: complex, order: int, n_max: int) -> TrigSeries:
    """Truncation of ``1 / (1 - conj(root) zeta)^(order+1)``."""
    arr = np.zeros(2 * n_max + 1, dtype=complex)
    rbar = np.conj(root)
    for n in range(n_max + 1):
        arr[n_max + n] = math.comb(n + order, order) * rbar**n
    return TrigSeries(arr)


def kernel_basis_p0(
    model, qfac: QFactorization, n_in: int = 64, threshold: float = 1e-8
) -> KernelBasis:
    """Kernel of the linearization at the base point, by explicit construction.

    Weight directions (the constant and ``2 Re zeta^n``, ``-2 Im zeta^n`` up
    to degree ``k0``) each get their induced minimal-norm ``(h, g)``
    correction by least squares; the homogeneous block is the complex span of
    the constant and one truncated binomial tail per inside root and order,
    with the ``g`` component completed through the boundary real-part solve.
    """
    d, k0 = model.d, model.k0
    defn = DefiningFunction.pure(model)
    disc = model_disc(model, ModelDiscParams(0.0, 1.0), n_max=max(8, 2 * d))
    op = linearize_at(defn, disc, qfac, n_in=n_in, n_weight=k0)
    matrix = op.matrix
    hg = matrix[:, op.hg_cols]

    raw = []
    for widx in range(2 * k0 + 1):
        rhs = -matrix[:, widx]
        sol, *_ = np.linalg.lstsq(hg, rhs, rcond=threshold)
        vec = np.zeros(matrix.shape[1])
        vec[widx] = 1.0
        vec[op.hg_cols] = sol
        raw.append(vec)

    htilde0 = divide_one_minus_zeta(disc.h).pad_to(n_in)
    h0, h0bar, img0, _ = _plain_point(defn, htilde0, divide_one_minus_zeta(disc.g))
    rz0 = substitute_boundary(defn.rz_mon(), h0, h0bar, img0)

    hom_shapes = [TrigSeries.constant(1.0).pad_to(n_in)]
    for root, mult in qfac.roots_inside:
        for order in range(mult):
            hom_shapes.append(binomial_tail(root, order, n_in))
    for shape in hom_shapes:
        for phase in (1.0, 1.0j):
            ht = shape * phase
            hprime = multiply(ONE_MINUS, ht)
            prod = multiply(hprime, rz0)
            realpart = prod + prod.conjugate()
            gprime = analytic_from_real_part(TrigSeries.real_symmetrized(realpart.coeffs))
            gt = divide_one_minus_zeta(gprime).truncate(n_in)
            vec = np.zeros(matrix.shape[1])
            vec[op.hg_cols] = pack_series(ht, gt.pad_to(n_in), n_in)
            raw.append(vec)

    coords = np.array([v / np.linalg.norm(v) for v in raw])
    residuals = tuple(float(np.max(np.abs(matrix @ v))) for v in coords)
    bad = [res for res in residuals if res > 1e-9]
    if bad:
        raise NumericalError(f"kernel candidate fails to annihilate: {max(bad):.3e}")
    gram = coords @ coords.T
    if np.linalg.cond(gram) > 1e6:
        raise NumericalError("kernel basis is numerically dependent")

    vectors = []
    for vec in coords:
        cprime = _weight_from_coords(vec[op.weight_cols], k0)
        ht, gt = unpack_series(vec[op.hg_cols], n_in)
        vectors.append((cprime, multiply(ONE_MINUS, ht), multiply(ONE_MINUS, gt)))
    dim = len(vectors)
    expected = 4 * k0 - d + 3
    if dim != expected:
        raise NumericalError(f"kernel basis size {dim} != {expected}")
    return KernelBasis(tuple(vectors), dim, coords, residuals)


def _weight_from_coords(w: np.ndarray, k0: int) -> TrigSeries:
    modes = {0: complex(w[0])}
    for n in range(1, k0 + 1):
        val = w[2 * n - 1] + 1j * w[2 * n]
        modes[n] = val
        modes[-n] = np.conj(val)
    return TrigSeries.from_mode_dict(modes)


# ---- Newton continuation --------------------------------------------------------


@dataclass(frozen=True)
class SolveResult:
    disc: LiftedDisc
    converged: bool
    iterations: int
    history: tuple[float, ...]
    stationarity: tuple[float, float, float]


def solve_newton(
    r: DefiningFunction,
    qfac: QFactorization,
    b: complex,
    init: LiftedDisc,
    opts: SolverOptions = SolverOptions(),
) -> SolveResult:
    """Damped Gauss-Newton continuation with the weight frozen at ``c(b)``.

    Unknowns are the analytic coefficients of ``ht, gt``; steps are
    minimal-norm least-squares solutions, which pins the in-fiber freedom (the
    update never moves along the residual kernel).  Convergence is declared on
    the reduced residual and re-checked with the plain substitution residual.
    """
    model = r.model
    if abs(b) >= 0.5:
        raise ConfigError("solver requires |b| < 1/2")
    if x_norm_distance(r) > opts.x_norm_bound:
        raise NumericalError("defining function too far from its model")
    n_in = opts.n_max
    c = weight_series(b, model.k0)
    htilde = divide_one_minus_zeta(init.h, tol=1e-6).truncate(n_in).pad_to(n_in)
    gtilde = divide_one_minus_zeta(init.g, tol=1e-6).truncate(n_in).pad_to(n_in)
    n_out = _default_n_out(model.d, model.k0, n_in)
    inner_tol = 0.01 * opts.tol

    x = pack_series(htilde, gtilde, n_in)
    val = _operator_value(r, qfac, c, htilde, gtilde)
    f = stack_value(val, n_out)
    history = [float(np.max(np.abs(f)))]
    iterations = 0
    while history[-1] >= inner_tol and iterations < opts.max_iter:
        op = _linearize(r, qfac, c, htilde, gtilde, n_in, n_out, n_weight=None)
        delta, *_ = np.linalg.lstsq(op.matrix, -f, rcond=opts.svd_threshold)
        phi0 = float(f @ f)
        alpha = 1.0
        while True:
            x_try = x + alpha * delta
            ht_try, gt_try = unpack_series(x_try, n_in)
            f_try = stack_value(_operator_value(r, qfac, c, ht_try, gt_try), n_out)
            if float(f_try @ f_try) <= (1.0 - 1e-4 * alpha) * phi0:
                break
            alpha *= 0.5
            if alpha < 1e-10:
                raise NumericalError("line search failed to reduce the residual")
        x, htilde, gtilde, f = x_try, ht_try, gt_try, f_try
        iterations += 1
        history.append(float(np.max(np.abs(f))))

    disc = LiftedDisc(c, multiply(ONE_MINUS, htilde), multiply(ONE_MINUS, gtilde))
    for series in (disc.h, disc.g):
        scale = max(1.0, float(np.max(np.abs(series.coeffs))))
        if series.coeff_decay() > 1e-7 * scale:
            raise NumericalError("series truncation too small: coefficients have not decayed")
    res = stationarity_residual(disc, r)
    converged = history[-1] < inner_tol and max(res) < opts.tol
    if not converged:
        raise NumericalError(
            f"no convergence in {iterations} iterations "
            f"(reduced {history[-1]:.3e}, plain {max(res):.3e})"
        )
    return SolveResult(disc, converged, iterations, tuple(history), res)
