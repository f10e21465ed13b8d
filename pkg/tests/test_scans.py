import math

import numpy as np
import pytest

from antidist import linalg
from antidist.classical import ClassicalEnsemble, Distribution, multivariate_chernoff
from antidist.errors import ResourceLimitError, ValidationError
from antidist.quantum import QuantumEnsemble, quantum_chernoff_pair
from antidist.scans import (classical_scan, commuting_detector, quantum_scan,
                            spectra_in_basis, worker_count)

from helpers import make_rng, random_density, random_probability, random_unitary


def dice_ensemble():
    return ClassicalEnsemble(np.full(3, 1 / 3), [
        Distribution(np.array([0.5, 0.5, 0.0])),
        Distribution(np.array([0.5, 0.0, 0.5])),
        Distribution(np.array([1.0, 1.0, 1.0]) / 3.0),
    ])


class TestClassicalScan:
    def test_dice_rates_and_fit(self):
        report = classical_scan(dice_ensemble(), n_max=8)
        for row in report.rows:
            expected = math.log(3.0) * (row.n + 1) / row.n
            assert float(row.neg_log_rate) == pytest.approx(expected, rel=1e-10)
            assert row.error == pytest.approx(3.0 ** (-(row.n + 1)), rel=1e-12)
        assert float(report.fitted_exponent) == pytest.approx(math.log(3.0), abs=0.08)
        assert report.bounds.commuting_exact.value == pytest.approx(
            math.log(3.0), abs=1e-8)

    def test_identical_dists_flat(self):
        p = Distribution(np.array([0.4, 0.6]))
        ens = ClassicalEnsemble(np.array([0.25, 0.35, 0.4]), [p, p, p])
        report = classical_scan(ens, n_max=5)
        for row in report.rows:
            assert row.error == pytest.approx(0.25, abs=1e-12)
        assert float(report.fitted_exponent) == pytest.approx(0.0, abs=0.3)

    def test_random_matches_divergence(self):
        rng = make_rng(100)
        for _ in range(5):
            dists = [Distribution(random_probability(rng, 4)) for _ in range(3)]
            ens = ClassicalEnsemble(random_probability(rng, 3), dists)
            report = classical_scan(ens, n_max=9)
            target = multivariate_chernoff(dists).value
            assert float(report.fitted_exponent) == pytest.approx(
                target.value, abs=0.15)

    def test_fit_window_in_bounds(self):
        rng = make_rng(101)
        dists = [Distribution(random_probability(rng, 3)) for _ in range(3)]
        ens = ClassicalEnsemble(np.full(3, 1 / 3), dists)
        report = classical_scan(ens, n_max=8)
        margin = 2.0 / 8
        if report.bounds.upper_neg_ln_kappa.is_finite:
            assert float(report.fitted_exponent) <= \
                report.bounds.upper_neg_ln_kappa.value + margin
        assert float(report.fitted_exponent) >= \
            float(report.bounds.lower_pairwise) - margin

    def test_prior_invariance_of_fit(self):
        rng = make_rng(102)
        dists = [Distribution(random_probability(rng, 3)) for _ in range(3)]
        eta1 = random_probability(rng, 3)
        eta2 = random_probability(rng, 3)
        n_max = 8
        f1 = float(classical_scan(ClassicalEnsemble(eta1, dists), n_max).fitted_exponent)
        f2 = float(classical_scan(ClassicalEnsemble(eta2, dists), n_max).fitted_exponent)
        ratio = max(eta1.max(), eta2.max()) / min(eta1.min(), eta2.min())
        assert abs(f1 - f2) <= 2.0 * math.log(ratio) / n_max

    def test_monte_carlo_mode(self):
        ens = dice_ensemble()
        report = classical_scan(ens, n_max=3, mode="monte_carlo",
                                trials=20000, seed=5)
        assert all(row.std_err is not None for row in report.rows)
        again = classical_scan(ens, n_max=3, mode="monte_carlo",
                               trials=20000, seed=5)
        assert [r.error for r in report.rows] == [r.error for r in again.rows]

    def test_rejects_small_n_max(self):
        with pytest.raises(ValidationError):
            classical_scan(dice_ensemble(), n_max=1)


class TestCommutingDetector:
    def test_diagonal_states(self):
        states = [np.diag([0.2, 0.8]).astype(complex),
                  np.diag([0.7, 0.3]).astype(complex)]
        check = commuting_detector(states)
        assert check.commuting
        spectra = spectra_in_basis(states, check.basis)
        got = {tuple(np.round(s.weights, 12)) for s in spectra}
        assert got == {(0.2, 0.8), (0.7, 0.3)}

    def test_rotated_pair_not_commuting(self):
        rng = make_rng(103)
        rho = random_density(rng, 3)
        U = random_unitary(rng, 3)
        check = commuting_detector([rho, U @ rho @ U.conj().T])
        assert not check.commuting
        assert linalg.commutator_norm(rho, U @ rho @ U.conj().T) > 1e-6

    def test_example_triple_spectra(self):
        states = [np.diag([0.5, 0.5, 0.0]).astype(complex),
                  np.diag([0.5, 0.0, 0.5]).astype(complex),
                  np.diag([0.0, 0.5, 0.5]).astype(complex)]
        check = commuting_detector(states)
        assert check.commuting
        for s in spectra_in_basis(states, check.basis):
            assert sorted(np.round(s.weights, 12)) == [0.0, 0.5, 0.5]


class TestQuantumScan:
    def test_commuting_triple_perfect(self):
        ens = QuantumEnsemble(np.full(3, 1 / 3), [
            np.diag([0.5, 0.5, 0.0]).astype(complex),
            np.diag([0.5, 0.0, 0.5]).astype(complex),
            np.diag([0.0, 0.5, 0.5]).astype(complex)])
        report = quantum_scan(ens, n_max=2)
        assert report.rows[0].error <= 1e-12
        assert report.fitted_exponent.infinite
        assert report.rows[0].neg_log_rate.infinite

    def test_identical_states_flat(self):
        rng = make_rng(104)
        rho = random_density(rng, 2)
        ens = QuantumEnsemble(np.full(3, 1 / 3), [rho] * 3)
        report = quantum_scan(ens, n_max=3)
        for row in report.rows:
            assert row.error == pytest.approx(1 / 3, abs=1e-6)
        assert float(report.fitted_exponent) == pytest.approx(0.0, abs=0.05)

    def test_qubit_pair_rows_match_helstrom(self):
        rng = make_rng(105)
        r1, r2 = random_density(rng, 2), random_density(rng, 2)
        ens = QuantumEnsemble(np.array([0.4, 0.6]), [r1, r2])
        report = quantum_scan(ens, n_max=4)
        for row in report.rows:
            a = 0.4 * linalg.tensor_power(r1, row.n)
            b = 0.6 * linalg.tensor_power(r2, row.n)
            truth = 0.5 * (1.0 - linalg.trace_norm(a - b))
            assert row.error == pytest.approx(truth, abs=1e-7)
        # finite-n rates sit above the pair divergence and decrease toward it
        pair = quantum_chernoff_pair(r1, r2).value
        rates = [float(row.neg_log_rate) for row in report.rows]
        assert rates == sorted(rates, reverse=True)
        assert float(report.last_rate) >= pair.value - 1e-6

    def test_cap(self):
        rng = make_rng(106)
        ens = QuantumEnsemble(np.array([0.5, 0.5]),
                              [random_density(rng, 3), random_density(rng, 3)])
        with pytest.raises(ResourceLimitError):
            quantum_scan(ens, n_max=4)  # 81 > 64

    def test_rate_below_upper_bound_with_prior_band(self):
        rng = make_rng(107)
        ens = QuantumEnsemble(np.array([0.3, 0.7]),
                              [random_density(rng, 2), random_density(rng, 2)])
        report = quantum_scan(ens, n_max=4)
        upper = report.bounds.upper_neg_ln_kappa
        if upper.is_finite:
            for row in report.rows:
                band = math.log(1.0 / ens.priors.min()) / row.n
                assert float(row.neg_log_rate) <= upper.value + band + 1e-6


class TestWorkerCount:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("ANTIDIST_THREADS", "2")
        assert worker_count() == 2

    def test_invalid_env(self, monkeypatch):
        monkeypatch.setenv("ANTIDIST_THREADS", "lots")
        with pytest.raises(ValidationError):
            worker_count()
