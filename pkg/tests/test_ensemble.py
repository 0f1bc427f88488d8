"""Sampling, index bookkeeping, and stable evaluation.

Derived expectations are computed by independent oracles inside each test
(big-integer factorials, naive Horner evaluation, brute-force enumeration)
rather than by the code paths under test.
"""

import math

import numpy as np
import pytest
from scipy import stats

from conftest import oracle_rng, random_alpha
from supoly import (
    ComplexPoint,
    EnsembleSpec,
    MultiIndex,
    SUPolynomial,
    binomial,
    degree_table,
    evaluate_normalized,
    evaluate_normalized_many,
    log_abs,
    log_abs_many,
    multi_index_matrix,
    multinomial_log,
    multinomial_log_table,
    read_coefficient_dump,
    sample_alpha_block,
    sample_polynomial,
    sample_trial,
    trial_stream,
    write_coefficient_dump,
)
from supoly.ensemble import MEASUREMENT_OFFSET, index_position


def exact_multinomial(N, ent):
    """Big-integer oracle: N! / (prod j_k! * (N - |j|)!)."""
    out = math.factorial(N)
    for v in ent:
        out //= math.factorial(v)
    return out // math.factorial(N - sum(ent))


def naive_normalized(alpha, z, N):
    """Horner oracle for m = 1: sum alpha_j sqrt(C(N,j)) z^j, normalized.

    Uses math.comb (exact integers), so the weight path is independent of
    the library's log-gamma tables.
    """
    c = [alpha[j] * math.sqrt(math.comb(N, j)) for j in range(N + 1)]
    acc = 0.0 + 0.0j
    for cj in reversed(c):
        acc = acc * z + cj
    return acc / (1.0 + abs(z) ** 2) ** (N / 2.0)


class TestMultinomialLog:
    def test_small_exact_values(self):
        assert multinomial_log(4, (2,)) == pytest.approx(math.log(6), abs=1e-12)
        assert multinomial_log(2, (1, 1)) == pytest.approx(math.log(2), abs=1e-12)
        assert multinomial_log(10, (3,)) == pytest.approx(math.log(120), rel=1e-12)

    def test_against_factorial_oracle(self):
        for N in (0, 1, 5, 17, 40):
            for row in multi_index_matrix(2, min(N, 12)):
                ent = tuple(int(v) for v in row)
                if sum(ent) > N:
                    continue
                want = math.log(exact_multinomial(N, ent))
                assert multinomial_log(N, ent) == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_table_matches_scalar(self):
        for m, N in ((1, 9), (2, 6), (3, 4)):
            table = multinomial_log_table(m, N)
            for i, row in enumerate(multi_index_matrix(m, N)):
                assert table[i] == pytest.approx(multinomial_log(N, row), rel=1e-12, abs=1e-12)

    def test_large_degree_finite(self):
        val = multinomial_log(10_000, (5_000,))
        assert math.isfinite(val)
        # Stirling cross-check: log C(2n, n) ~ 2n log 2 - 0.5 log(pi n)
        approx = 10_000 * math.log(2) - 0.5 * math.log(math.pi * 5_000)
        assert val == pytest.approx(approx, abs=1e-4)

    def test_degree_overflow_rejected(self):
        with pytest.raises(ValueError):
            multinomial_log(3, (4,))
        with pytest.raises(ValueError):
            multinomial_log(3, (2, 2))
        with pytest.raises(ValueError):
            multinomial_log(3, (-1,))


class TestIndexing:
    def test_coefficient_count_matches_enumeration(self):
        # brute-force enumeration oracle, m <= 4, N <= 50
        for m in range(1, 5):
            for N in (0, 1, 2, 3, 7, 20, 50):
                count = 0
                stack = [(0, 0)]
                while stack:
                    pos, used = stack.pop()
                    if pos == m:
                        count += 1
                        continue
                    for v in range(N - used + 1):
                        stack.append((pos + 1, used + v))
                assert count == binomial(N + m, m)
                assert multi_index_matrix(m, N).shape == (count, m)

    def test_graded_lex_order(self):
        assert multi_index_matrix(1, 3).tolist() == [[0], [1], [2], [3]]
        assert multi_index_matrix(2, 2).tolist() == [
            [0, 0], [0, 1], [1, 0], [0, 2], [1, 1], [2, 0],
        ]
        # degree ascending, lex ascending within each degree
        J = multi_index_matrix(3, 6)
        deg = J.sum(axis=1)
        assert (np.diff(deg) >= 0).all()
        for s in range(7):
            block = [tuple(r) for r in J[deg == s]]
            assert block == sorted(block)

    def test_index_position_roundtrip(self):
        pos = index_position(2, 5)
        J = multi_index_matrix(2, 5)
        for i, row in enumerate(J):
            assert pos[tuple(int(v) for v in row)] == i
        assert (degree_table(2, 5) == J.sum(axis=1)).all()

    def test_multi_index_validation(self):
        assert MultiIndex((2, 0)).degree == 2
        with pytest.raises(ValueError):
            MultiIndex(())
        with pytest.raises(ValueError):
            MultiIndex((1, -2))

    def test_spec_validation(self):
        spec = EnsembleSpec(m=2, N=3, seed=0)
        assert spec.dimension == 10
        with pytest.raises(ValueError):
            EnsembleSpec(m=0, N=3, seed=0)
        with pytest.raises(ValueError):
            EnsembleSpec(m=1, N=-1, seed=0)
        with pytest.raises(ValueError):
            EnsembleSpec(m=1, N=1, seed=2**64)

    def test_complex_point_norm(self):
        p = ComplexPoint.of([1 + 1j, 2.0])
        assert p.norm_sq == pytest.approx(6.0, rel=1e-15)
        assert len(p) == 2


class TestSampling:
    def test_determinism(self):
        spec = EnsembleSpec(m=2, N=4, seed=123)
        a = sample_trial(spec, 7)
        b = sample_trial(spec, 7)
        assert np.array_equal(a.alpha, b.alpha)
        c = sample_polynomial(spec, trial_stream(123, 7))
        assert np.array_equal(a.alpha, c.alpha)

    def test_trials_differ(self):
        spec = EnsembleSpec(m=1, N=6, seed=9)
        assert not np.array_equal(sample_trial(spec, 0).alpha, sample_trial(spec, 1).alpha)
        other = EnsembleSpec(m=1, N=6, seed=10)
        assert not np.array_equal(sample_trial(spec, 0).alpha, sample_trial(other, 0).alpha)

    def test_block_matches_per_trial(self):
        spec = EnsembleSpec(m=1, N=5, seed=77)
        block = sample_alpha_block(spec, 3, 4)
        for i in range(4):
            assert np.array_equal(block[i], sample_trial(spec, 3 + i).alpha)

    def test_measurement_offset_stream_is_disjoint_and_stable(self):
        base = trial_stream(5, 2).standard_normal(8)
        meas1 = trial_stream(5, 2, offset=MEASUREMENT_OFFSET).standard_normal(8)
        meas2 = trial_stream(5, 2, offset=MEASUREMENT_OFFSET).standard_normal(8)
        assert np.array_equal(meas1, meas2)
        assert not np.array_equal(base, meas1)

    def test_single_coefficient_spec(self):
        spec = EnsembleSpec(m=1, N=0, seed=4)
        psi = sample_trial(spec, 0)
        assert psi.alpha.shape == (1,)
        mag2 = np.abs(sample_alpha_block(spec, 0, 10_000)[:, 0]) ** 2
        assert abs(mag2.mean() - 1.0) < 0.05

    def test_unit_second_moment_at_1e6_draws(self):
        # one coefficient is as good as another: draw 1e6 entries as a block
        spec = EnsembleSpec(m=1, N=999, seed=0)
        mag2 = np.abs(sample_alpha_block(spec, 0, 1000)) ** 2
        assert 0.997 <= mag2.mean() <= 1.003

    def test_gaussian_tails_1e6(self):
        spec = EnsembleSpec(m=1, N=999, seed=0)
        mag = np.abs(sample_alpha_block(spec, 0, 1000)).ravel()
        n = mag.size
        assert n == 1_000_000
        for lam in (0.5, 1.0, 2.0):
            target = math.exp(-lam * lam)
            se = math.sqrt(target * (1.0 - target) / n)
            emp = float((mag >= lam).mean())
            assert abs(emp - target) < 3 * se, f"upper tail at lam={lam}: {emp} vs {target}"
            target_le = 1.0 - target
            emp_le = float((mag <= lam).mean())
            assert abs(emp_le - target_le) < 3 * se, f"lower tail at lam={lam}"

    def test_alpha_at(self):
        spec = EnsembleSpec(m=2, N=2, seed=1)
        psi = sample_trial(spec, 0)
        assert psi.alpha_at((0, 0)) == psi.alpha[0]
        assert psi.alpha_at(MultiIndex((1, 1))) == psi.alpha[4]
        with pytest.raises(ValueError):
            psi.alpha_at((3, 0))

    def test_alpha_read_only(self):
        psi = sample_trial(EnsembleSpec(m=1, N=2, seed=0), 0)
        with pytest.raises(ValueError):
            psi.alpha[0] = 0.0


class TestEvaluation:
    def test_constant_polynomial(self):
        spec = EnsembleSpec(m=1, N=8, seed=0)
        alpha = np.zeros(9, dtype=complex)
        alpha[0] = 1.0
        psi = SUPolynomial(spec, alpha)
        for z in (0.0, 0.5 + 0.25j, 2.0 - 1.0j):
            want = (1.0 + abs(z) ** 2) ** (-4.0)
            assert evaluate_normalized(psi, z) == pytest.approx(want, rel=1e-12)

    def test_value_at_origin_is_alpha0(self):
        for m in (1, 2, 3):
            spec = EnsembleSpec(m=m, N=5, seed=3)
            psi = sample_trial(spec, 1)
            z = [0.0] * m if m > 1 else 0.0
            assert evaluate_normalized(psi, z) == pytest.approx(psi.alpha[0], rel=1e-12)

    def test_against_horner_oracle(self):
        rng = oracle_rng(1)
        for k in range(100):
            N = int(rng.integers(1, 21))
            spec = EnsembleSpec(m=1, N=N, seed=50 + k)
            psi = sample_trial(spec, 0)
            zr, zi = rng.uniform(-2, 2, 2)
            z = complex(zr, zi)
            want = naive_normalized(psi.alpha, z, N)
            got = evaluate_normalized(psi, z)
            assert abs(got - want) <= 1e-10 * max(abs(want), 1e-30)

    def test_many_matches_scalar(self):
        spec = EnsembleSpec(m=2, N=6, seed=8)
        psi = sample_trial(spec, 0)
        rng = oracle_rng(2)
        pts = rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2))
        vals = evaluate_normalized_many(psi, pts)
        for i in range(20):
            assert vals[i] == pytest.approx(evaluate_normalized(psi, pts[i]), rel=1e-12)

    def test_no_overflow_at_degree_1000(self):
        spec = EnsembleSpec(m=1, N=1000, seed=1)
        rng = oracle_rng(3)
        for t in range(1000):
            psi = sample_trial(spec, t)
            mag = rng.uniform(0.0, 10.0)
            ang = rng.uniform(0.0, 2.0 * math.pi)
            val = evaluate_normalized(psi, mag * complex(math.cos(ang), math.sin(ang)))
            assert np.isfinite(val)

    def test_log_sum_exp_path_finite(self):
        # degree high enough to force the log-space path over the direct one
        spec = EnsembleSpec(m=1, N=2100, seed=2)
        psi = sample_trial(spec, 0)
        vals = evaluate_normalized_many(psi, np.array([[0.3 + 0.1j], [3.0j], [9.0 + 1.0j]]))
        assert np.isfinite(vals).all()
        assert np.abs(vals).max() > 0

    def test_rotation_symmetry_distribution(self):
        # |psi(e^{i theta} z)| over fresh trials is distributed like |psi(z)|
        spec = EnsembleSpec(m=1, N=12, seed=21)
        z = 0.4 + 0.1j
        w = z * np.exp(2.1j)
        a = np.abs(
            [evaluate_normalized(sample_trial(spec, t), z) for t in range(10_000)]
        )
        b = np.abs(
            [
                evaluate_normalized(sample_trial(spec, t), w)
                for t in range(10_000, 20_000)
            ]
        )
        stat = stats.ks_2samp(a, b).statistic
        crit = 1.628 * math.sqrt(2.0 / 10_000)  # 1% two-sample critical value
        assert stat < crit, f"KS={stat:.5f} >= {crit:.5f}"


class TestLogAbs:
    def test_constant_is_zero(self):
        spec = EnsembleSpec(m=1, N=4, seed=0)
        alpha = np.zeros(5, dtype=complex)
        alpha[0] = 1.0
        assert log_abs(SUPolynomial(spec, alpha), 0.0) == pytest.approx(0.0, abs=1e-14)

    def test_identity_polynomial(self):
        spec = EnsembleSpec(m=1, N=1, seed=0)
        psi = SUPolynomial(spec, np.array([0.0, 1.0], dtype=complex))
        for r in (0.1, 1.0, 7.5):
            assert log_abs(psi, r) == pytest.approx(math.log(r), rel=1e-12)
            assert log_abs(psi, r * 1j) == pytest.approx(math.log(r), rel=1e-12)

    def test_against_naive_oracle(self):
        rng = oracle_rng(4)
        spec = EnsembleSpec(m=1, N=15, seed=31)
        for t in range(50):
            psi = sample_trial(spec, t)
            zr, zi = rng.uniform(-1.5, 1.5, 2)
            z = complex(zr, zi)
            norm = naive_normalized(psi.alpha, z, 15)
            if abs(norm) < 1e-12:  # too close to a zero for either route
                continue
            want = math.log(abs(norm)) + 7.5 * math.log1p(abs(z) ** 2)
            assert log_abs(psi, z) == pytest.approx(want, abs=1e-9)

    def test_exact_zero_gives_minus_inf(self):
        spec = EnsembleSpec(m=1, N=1, seed=0)
        psi = SUPolynomial(spec, np.array([0.0, 1.0], dtype=complex))
        assert log_abs(psi, 0.0) == -math.inf
        vals = log_abs_many(psi, np.array([[0.0 + 0.0j], [1.0 + 0.0j]]))
        assert vals[0] == -math.inf
        assert vals[1] == pytest.approx(0.0, abs=1e-14)


class TestCoefficientDump:
    def test_roundtrip_exact(self, tmp_path):
        spec = EnsembleSpec(m=2, N=3, seed=42)
        psi = sample_trial(spec, 0)
        path = tmp_path / "dump.txt"
        write_coefficient_dump(psi, path)
        back = read_coefficient_dump(path)
        assert back.spec == spec
        assert np.array_equal(back.alpha, psi.alpha)

    def test_format(self, tmp_path):
        spec = EnsembleSpec(m=1, N=2, seed=7)
        psi = sample_trial(spec, 0)
        path = tmp_path / "dump.txt"
        write_coefficient_dump(psi, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "1 2 7"
        assert len(lines) == 1 + spec.dimension
        j, re, im = lines[1].split()
        assert j == "0"
        assert complex(float(re), float(im)) == psi.alpha[0]
