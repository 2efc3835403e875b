"""Acceptance gate: twelve end-to-end checks at their stated tolerances.

Run ``pytest tests/test_acceptance.py -v`` for one pass/fail line per
criterion.  Every check also enforces a wall-clock budget, so a pass
certifies both the numbers and the runtime.
"""

import time
from contextlib import contextmanager

import numpy as np

from discforge.discs import LiftedDisc, ModelDiscParams, model_disc, stationarity_residual
from discforge.jets import determination_experiment, jet_matrix, surjectivity_gap
from discforge.model import ModelPolynomial, compute_Q, factor_Q, random_admissible_model
from discforge.perturb import (
    BiholoMap,
    DefiningFunction,
    PerturbationTerm,
    dilate,
    dilate_map,
    x_norm_distance,
)
from discforge.series import TrigSeries, coeff_distance
from discforge.solver import (
    SolverOptions,
    kernel_basis_p0,
    kernel_dim_svd,
    linearize_at,
    shift_projection_matrix,
    solve_newton,
)


@contextmanager
def _budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"wall-clock budget {seconds}s exceeded: {elapsed:.1f}s"


def _abs_power(d):
    return ModelPolynomial.from_upper(d, d // 2, {d // 2: 1.0})


_KERNEL_CASES = (
    (ModelPolynomial.from_upper(2, 1, {1: 1.0}), 1),
    (ModelPolynomial.from_upper(4, 2, {2: 1.0}), 2),
    (ModelPolynomial.from_upper(4, 3, {3: 0.25, 2: 1.0}), 3),
)


def _random_models(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.choice([2, 4, 6]))
        k0 = int(rng.integers(d // 2, d))
        out.append(random_admissible_model(rng, d, k0))
    return out


def _cubic_perturbation(model, eps):
    return DefiningFunction(model, (PerturbationTerm(3, 2, 0, {(0, 0): eps}),))


def test_criterion_01_q_formula_reproduction():
    with _budget(1.0):
        for d in (2, 4, 6):
            q = compute_Q(_abs_power(d))
            expect = (-1) ** (d // 2 - 1) * d * d / 4.0
            assert coeff_distance(q, TrigSeries.monomial(1, expect)) == 0.0


def test_criterion_02_root_count_law():
    with _budget(30.0):
        for model in _random_models(101, 200):
            qfac = factor_Q(model, circle_margin=1e-8)
            assert qfac.ell0 == qfac.i0 == model.k0 - model.d // 2
            roots = [r for r, _ in qfac.roots_inside] + list(qfac.roots_outside)
            assert all(abs(abs(r) - 1.0) > 1e-8 for r in roots)


def test_criterion_03_explicit_family_stationarity():
    with _budget(10.0):
        rng = np.random.default_rng(7)
        for model in _random_models(11, 50):
            b = (rng.uniform(0, 0.4) * np.exp(1j * rng.uniform(0, 2 * np.pi))).item()
            v = ((0.5 + rng.uniform(0, 1.0)) * np.exp(1j * rng.uniform(0, 2 * np.pi))).item()
            disc = model_disc(model, ModelDiscParams(b, v), n_max=128)
            assert max(stationarity_residual(disc, DefiningFunction.pure(model))) < 1e-9


def test_criterion_04_toeplitz_kernel_law():
    with _budget(5.0):
        for m in range(6):
            mat = shift_projection_matrix(m, 12)
            rank = np.linalg.matrix_rank(mat) if mat.size else 0
            assert mat.shape[1] - rank == m + 1


def test_criterion_05_linearization_kernel_dimension():
    with _budget(60.0):
        for model, k0 in _KERNEL_CASES:
            qfac = factor_Q(model)
            disc = model_disc(model, ModelDiscParams(0.0, 1.0), n_max=max(8, 2 * model.d))
            op = linearize_at(DefiningFunction.pure(model), disc, qfac, n_in=48, n_weight=k0)
            # kernel_dim_svd itself rejects spectra without a factor-10 gap
            assert kernel_dim_svd(op) == 4 * model.k0 - model.d + 3


def test_criterion_06_kernel_basis_exactness():
    with _budget(30.0):
        for model, k0 in _KERNEL_CASES:
            qfac = factor_Q(model)
            basis = kernel_basis_p0(model, qfac)
            assert max(basis.residuals) < 1e-9
            disc = model_disc(model, ModelDiscParams(0.0, 1.0), n_max=max(8, 2 * model.d))
            op = linearize_at(DefiningFunction.pure(model), disc, qfac, n_in=48, n_weight=k0)
            assert basis.dim == kernel_dim_svd(op)


def test_criterion_07_jet_matrix_nonsingularity():
    with _budget(30.0):
        for model in _random_models(101, 200):
            jm = jet_matrix(model, factor_Q(model))
            row_norms = float(np.prod(np.linalg.norm(jm.entries, axis=1)))
            assert abs(jm.determinant) > 1e-12 * row_norms
            if model.k0 == model.d // 2:
                assert abs(abs(jm.determinant) - 2.0) < 1e-12


def test_criterion_08_surjectivity_gap():
    with _budget(20.0):
        rng = np.random.default_rng(23)
        for model in _random_models(31, 50):
            for theta in rng.uniform(0, 2 * np.pi, 16):
                surjectivity_gap(model, float(theta))  # raises beyond 1e-10 disagreement
        quartic = _abs_power(4)
        for theta in np.linspace(0, 2 * np.pi, 16):
            assert abs(surjectivity_gap(quartic, float(theta)) - 36.0) < 1e-10


def test_criterion_09_newton_continuation():
    with _budget(60.0):
        model = _abs_power(4)
        qfac = factor_Q(model)
        for eps in (1e-4, 1e-3):
            r = _cubic_perturbation(model, eps)
            init = model_disc(model, ModelDiscParams(0.0, 1.0), n_max=128)
            result = solve_newton(r, qfac, 0.0, init, SolverOptions(n_max=128))
            assert result.converged and result.iterations <= 10
            assert max(result.stationarity) < 1e-9
        r = _cubic_perturbation(model, 1e-3)
        coarse, fine = (
            solve_newton(
                r, qfac, 0.0, model_disc(model, ModelDiscParams(0.0, 1.0), n_max=n),
                SolverOptions(n_max=n),
            ).disc
            for n in (64, 128)
        )
        assert coeff_distance(coarse.h, fine.h) < 1e-8
        assert coeff_distance(coarse.g, fine.g) < 1e-8


def test_criterion_10_pushforward_invariance():
    with _budget(20.0):
        model = _abs_power(4)
        qfac = factor_Q(model)
        eps = 1e-3
        r = _cubic_perturbation(model, eps)
        init = model_disc(model, ModelDiscParams(0.1, 1.0), n_max=64)
        disc = solve_newton(r, qfac, 0.1, init, SolverOptions(n_max=64)).disc
        # rotation z -> e^{i phi} z preserves |z|^4 and rotates the z^3 zbar^2
        # coefficient by e^{-i phi}
        phi = 0.7
        rotated_r = DefiningFunction(
            model, (PerturbationTerm(3, 2, 0, {(0, 0): eps * np.exp(-1j * phi)}),)
        )
        pushed = LiftedDisc(disc.c, disc.h.scale(np.exp(1j * phi)), disc.g)
        assert max(stationarity_residual(pushed, rotated_r)) < 1e-8
        # anisotropic dilation: (h, g) -> (h/t, g/t^d) attaches to the dilated
        # defining function with the same weight
        t = 0.5
        scaled = LiftedDisc(disc.c, disc.h.scale(1 / t), disc.g.scale(1 / t**model.d))
        assert max(stationarity_residual(scaled, dilate(r, t))) < 1e-8


def test_criterion_11_dilation_laws():
    with _budget(5.0):
        model = _abs_power(4)
        r = DefiningFunction(model, (PerturbationTerm(3, 2, 0, {(0, 0): 0.01}),), {2: 0.1})
        values = [x_norm_distance(dilate(r, t)) for t in (1.0, 0.5, 0.25, 0.125)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 0.2 * values[0]
        assert x_norm_distance(dilate(r, 1e-3)) < 1e-2 * values[0]
        h_map = BiholoMap(
            4,
            {(1, 0): 1.0, (3, 0): 0.5, (1, 1): 0.25},
            {(0, 1): 1.0, (2, 1): 0.125, (0, 2): 1.0},
        )
        t = 0.5
        mapped = dilate_map(h_map, t)
        assert mapped.h1[(1, 0)] == 1.0
        assert mapped.h1[(3, 0)] == 0.5 * t**2
        assert mapped.h1[(1, 1)] == 0.25 * t**4
        assert mapped.h2[(0, 1)] == 1.0
        assert mapped.h2[(2, 1)] == 0.125 * t**2
        assert mapped.h2[(0, 2)] == 1.0 * t**4


def test_criterion_12_determination_mechanism():
    with _budget(120.0):
        model = _abs_power(4)
        r = DefiningFunction.pure(model)
        qfac = factor_Q(model)
        eps = 1e-4
        h_map = BiholoMap(4, {(1, 0): 1.0, (9, 0): eps}, {(0, 1): 1.0, (0, 3): eps})
        report = determination_experiment(
            r, h_map, qfac, SolverOptions(n_max=64), t=0.125, b_values=(0.0,)
        )
        for run in report["runs"]:
            assert run["residual_composed"] < 1e-7
            assert run["disc_distance"] < 1e-6
        ident = determination_experiment(
            r, BiholoMap.identity(4), qfac, SolverOptions(n_max=32), t=0.125, b_values=(0.0, 0.2)
        )
        assert ident["boundary_defect"] == 0.0
        for run in ident["runs"]:
            assert run["disc_distance"] == 0.0
            assert run["jet_distance"] == 0.0
            assert run["aligned_distance"] == 0.0
            assert run["center_distance"] == 0.0
