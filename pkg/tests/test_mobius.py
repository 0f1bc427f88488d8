"""Basis transforms, invariant norms, and distribution invariance."""

import math

import numpy as np
import pytest

from conftest import oracle_rng, random_alpha
from supoly import (
    BasisTransform,
    EnsembleSpec,
    MobiusParameter,
    SUPolynomial,
    build_basis_transform,
    evaluate_normalized,
    expand_shifted_basis,
    invariant_norm,
    invariant_norm_mc,
    sample_trial,
    transform_coefficients,
    trial_stream,
    unitarity_defect,
)
from supoly.ensemble import MEASUREMENT_OFFSET
from supoly.mobius import shifted_value_normalized


def naive_shifted_value(N, zeta, alpha_prime, z):
    """Test-local m=1 oracle for the alternate-basis expansion.

    Evaluates sum_j alpha'_j sqrt(C(N,j)) u^j v^(N-j) with
    u = (z - zeta)/sqrt(1+|zeta|^2) and v = (1 + conj(zeta) z)/sqrt(1+|zeta|^2),
    then normalizes by (1+|z|^2)^(N/2).
    """
    s = math.sqrt(1.0 + abs(zeta) ** 2)
    u = (z - zeta) / s
    v = (1.0 + zeta.conjugate() * z) / s
    total = 0.0 + 0.0j
    for j in range(N + 1):
        total += alpha_prime[j] * math.sqrt(math.comb(N, j)) * u**j * v ** (N - j)
    return total / (1.0 + abs(z) ** 2) ** (N / 2.0)


class TestExpandShiftedBasis:
    def test_zeta_zero_is_identity(self):
        spec = EnsembleSpec(m=2, N=3, seed=0)
        for k in range(spec.dimension):
            row = tuple(int(v) for v in spec.indices()[k])
            vec = expand_shifted_basis(spec, 0.0, row)
            want = np.zeros(spec.dimension, dtype=complex)
            want[k] = 1.0
            assert np.allclose(vec, want, atol=1e-14)

    def test_linear_case_explicit(self):
        spec = EnsembleSpec(m=1, N=1, seed=0)
        zeta = 0.6 - 0.8j
        s = math.sqrt(1.0 + abs(zeta) ** 2)
        vec = expand_shifted_basis(spec, zeta, (1,))
        assert vec[0] == pytest.approx(-zeta / s, rel=1e-14)
        assert vec[1] == pytest.approx(1.0 / s, rel=1e-14)

    def test_degree_overflow_rejected(self):
        spec = EnsembleSpec(m=1, N=2, seed=0)
        with pytest.raises(ValueError):
            expand_shifted_basis(spec, 0.1j, (3,))

    def test_matrix_unitary_to_1e10(self):
        spec = EnsembleSpec(m=1, N=6, seed=0)
        tr = build_basis_transform(spec, 0.7 + 0.2j)
        assert unitarity_defect(tr) < 1e-10


class TestTransform:
    def test_zeta_zero_identity_map(self):
        spec = EnsembleSpec(m=1, N=8, seed=5)
        psi = sample_trial(spec, 0)
        tr = build_basis_transform(spec, 0.0)
        assert np.allclose(transform_coefficients(tr, psi.alpha), psi.alpha, atol=1e-14)

    def test_pointwise_identity_against_naive_oracle(self):
        spec = EnsembleSpec(m=1, N=10, seed=6)
        zeta = 0.3j
        tr = build_basis_transform(spec, zeta)
        rng = oracle_rng(10)
        ap = random_alpha(rng, spec.dimension)
        psi = SUPolynomial(spec, transform_coefficients(tr, ap))
        for _ in range(50):
            zr, zi = rng.uniform(-1.5, 1.5, 2)
            z = complex(zr, zi)
            lhs = evaluate_normalized(psi, z)
            want = naive_shifted_value(10, zeta, ap, z)
            assert abs(lhs - want) <= 1e-8 * max(1.0, abs(want))
            # library closed-form route agrees too
            direct = shifted_value_normalized(spec, zeta, ap, z)
            assert abs(direct - want) <= 1e-10 * max(1.0, abs(want))

    def test_l2_norm_preserved(self):
        rng = oracle_rng(11)
        for k in range(100):
            N = int(rng.integers(1, 21))
            spec = EnsembleSpec(m=1, N=N, seed=0)
            zeta = complex(*rng.uniform(-1, 1, 2))
            tr = build_basis_transform(spec, zeta)
            ap = random_alpha(rng, spec.dimension)
            a = transform_coefficients(tr, ap)
            assert np.linalg.norm(a) == pytest.approx(np.linalg.norm(ap), rel=1e-10)

    def test_group_property_compose_zeta_minus_zeta(self):
        spec = EnsembleSpec(m=1, N=7, seed=0)
        for zeta in (0.3j, 0.7 + 0.2j, -0.4 + 0.9j):
            fwd = build_basis_transform(spec, zeta)
            bwd = build_basis_transform(spec, -zeta)
            comp = bwd.matrix @ fwd.matrix
            scale = comp[0, 0]
            assert abs(abs(scale) - 1.0) < 1e-8
            assert np.abs(comp - scale * np.eye(spec.dimension)).max() < 1e-8

    def test_length_mismatch_rejected(self):
        spec = EnsembleSpec(m=1, N=3, seed=0)
        tr = build_basis_transform(spec, 0.2)
        with pytest.raises(ValueError):
            transform_coefficients(tr, np.ones(3, dtype=complex))

    def test_transform_validation(self):
        spec = EnsembleSpec(m=1, N=2, seed=0)
        with pytest.raises(ValueError):
            BasisTransform(spec=spec, zeta=MobiusParameter(0.1), matrix=np.eye(2, dtype=complex))

    def test_covariance_invariance(self):
        # unitary image of i.i.d. complex Gaussians stays i.i.d.; at 4e4
        # trials the D=6 sample covariance sits well inside Frobenius 0.05
        spec = EnsembleSpec(m=1, N=5, seed=0)
        tr = build_basis_transform(spec, 0.45 - 0.3j)
        rng = oracle_rng(12)
        trials = 40_000
        g = rng.standard_normal((trials, 2 * spec.dimension))
        ap = (g[:, 0::2] + 1j * g[:, 1::2]) * math.sqrt(0.5)
        a = ap @ tr.matrix.T
        cov = (a.conj().T @ a) / trials
        assert np.linalg.norm(cov - np.eye(spec.dimension), "fro") < 0.05


class TestInvariantNorm:
    def test_basis_vectors_have_unit_norm(self):
        spec = EnsembleSpec(m=2, N=4, seed=0)
        for k in (0, 3, spec.dimension - 1):
            alpha = np.zeros(spec.dimension, dtype=complex)
            alpha[k] = 1.0
            assert invariant_norm(SUPolynomial(spec, alpha)) == pytest.approx(1.0, rel=1e-15)

    def test_zero_polynomial(self):
        spec = EnsembleSpec(m=1, N=3, seed=0)
        psi = SUPolynomial(spec, np.zeros(4, dtype=complex))
        assert invariant_norm(psi) == 0.0

    def test_parseval(self):
        psi = sample_trial(EnsembleSpec(m=2, N=6, seed=13), 0)
        assert invariant_norm(psi) == pytest.approx(np.linalg.norm(psi.alpha), rel=1e-15)

    def test_mc_integral_cross_check(self):
        spec = EnsembleSpec(m=1, N=5, seed=14)
        psi = sample_trial(spec, 0)
        exact = invariant_norm(psi)
        mc = invariant_norm_mc(psi, 1_000_000, trial_stream(14, 0, offset=MEASUREMENT_OFFSET))
        assert abs(mc - exact) <= 0.02 * exact

    def test_mc_error_shrinks_with_samples(self):
        spec = EnsembleSpec(m=2, N=4, seed=15)
        psi = sample_trial(spec, 0)
        exact = invariant_norm(psi)
        wins = 0
        for k in range(8):
            coarse = invariant_norm_mc(psi, 1_000, trial_stream(15, k, offset=MEASUREMENT_OFFSET))
            fine = invariant_norm_mc(psi, 100_000, trial_stream(15, 100 + k, offset=MEASUREMENT_OFFSET))
            if abs(fine - exact) < abs(coarse - exact):
                wins += 1
        assert wins >= 6
