import math

import numpy as np
import pytest

from depmod import univariate as uv
from depmod.constrained import ConstraintSpec, gamma_sum_dm, gaussian_linsum_dm, trapezoid_constraint
from depmod.core import sample_batch
from depmod.errors import AcceptanceTooLow, InvalidParams, TooFewSamples
from depmod.numerics import RngStream
from depmod.oracles import (
    TestOutcome,
    dirichlet_oracle,
    energy_test,
    ks_2samp_test,
    ks_test,
    mixture_t_sample,
    normal_ratio_cauchy,
    rejection_sample,
    sphere_oracle,
)


# --- rejection sampler ------------------------------------------------------


def test_rejection_trapezoid_acceptance_rate():
    beta = 0.5
    base = [uv.uniform(), uv.uniform()]
    batch = rejection_sample(base, trapezoid_constraint(beta), 0.0, 100_000, 1)
    p = (2 - beta) / 2
    se = math.sqrt(p * (1 - p) / batch.draws)
    assert abs(batch.acceptance - p) <= 3 * se
    x = batch.values
    assert np.all(beta * x[:, 0] + x[:, 1] < 1)


def test_rejection_gamma_band_holds():
    cons = ConstraintSpec("sum_eq", 3.0)
    base = [uv.gamma(1.0), uv.gamma(2.0), uv.gamma(1.5)]
    batch = rejection_sample(base, cons, 0.03, 2000, 2)
    assert batch.n == 2000
    assert np.all(np.abs(batch.values.sum(axis=1) - 3.0) <= 0.03)


def test_rejection_gaussian_band_mean_matches_linsum_model():
    sigmas = np.array([3.0, 5.0, 4.0])
    c = 6.0
    base = [uv.normal(0.0, s * s) for s in sigmas]
    ref = rejection_sample(base, ConstraintSpec("sum_eq", c), 0.01 * c, 20_000, 3).values[:, 0]
    dm = sample_batch(gaussian_linsum_dm(sigmas, c), 200_000, 4).values[:, 0]
    se = math.sqrt(ref.var() / ref.size + dm.var() / dm.size)
    assert abs(ref.mean() - dm.mean()) <= 4 * se
    assert abs(dm.mean() - 1.08) <= 4 * dm.std() / math.sqrt(dm.size)


def test_rejection_aborts_on_tiny_acceptance():
    cons = ConstraintSpec("sum_eq", 40.0)
    with pytest.raises(AcceptanceTooLow):
        rejection_sample([uv.normal(), uv.normal()], cons, 1e-3, 10, 0)


def test_rejection_needs_band_for_equality():
    with pytest.raises(InvalidParams):
        rejection_sample([uv.normal()], ConstraintSpec("sum_eq", 0.0), 0.0, 10, 0)


# --- mixture-t ----------------------------------------------------------------


def test_mixture_t_unit_dof_is_cauchy():
    x = mixture_t_sample(1.0, [0.0], [[1.0]], 100_000, 5).values[:, 0]
    # quantile SE = sqrt(p(1-p)/n) / f(1), f(1) = 1/(2 pi)
    se = math.sqrt(0.75 * 0.25 / x.size) * 2 * math.pi
    assert abs(np.quantile(x, 0.75) - 1.0) <= 4 * se


def test_mixture_t_large_dof_is_gaussian(spd):
    sigma = spd(3, 1)
    a = mixture_t_sample(1e6, np.zeros(3), sigma, 1000, 6)
    b = np.random.default_rng(7).multivariate_normal(np.zeros(3), sigma, 1000)
    assert not energy_test(a, b, rng=8).reject


def test_mixture_t_rejects_bad_dof():
    with pytest.raises(InvalidParams):
        mixture_t_sample(0.0, [0.0], [[1.0]], 10, 0)


# --- sphere and other references ---------------------------------------------


def test_sphere_oracle_on_mode_norm():
    x = sphere_oracle(5, 2.0, "on", 10_000, 9).values
    assert np.max(np.abs((x**2).sum(axis=1) - 2.0)) <= 1e-12


def test_sphere_oracle_second_moment(close_in_se):
    d, c = 4, 3.0
    x = sphere_oracle(d, c, "on", 50_000, 10).values
    assert close_in_se(x[:, 0] ** 2, c / d)


def test_sphere_oracle_in_mode_radial_law(close_in_se):
    x = sphere_oracle(3, 1.0, "in", 50_000, 11).values
    r = np.linalg.norm(x, axis=1)
    assert np.all(r < 1.0)
    assert close_in_se((r <= 0.7).astype(float), 0.7**3)


def test_sphere_oracle_validates():
    with pytest.raises(InvalidParams):
        sphere_oracle(1, 1.0, "on", 10, 0)
    with pytest.raises(InvalidParams):
        sphere_oracle(3, 1.0, "around", 10, 0)


def test_dirichlet_oracle_rows_on_simplex(close_in_se):
    alpha = np.array([1.0, 2.0, 3.0])
    x = dirichlet_oracle(alpha, 20_000, 12).values
    assert np.allclose(x.sum(axis=1), 1.0)
    assert close_in_se(x[:, 2], 0.5)


def test_normal_ratio_cauchy_quartile():
    x = normal_ratio_cauchy(2, 100_000, 13).values
    se = math.sqrt(0.75 * 0.25 / x.shape[0]) * 2 * math.pi
    for k in range(2):
        assert abs(np.quantile(x[:, k], 0.75) - 1.0) <= 4 * se


# --- tests ---------------------------------------------------------------------


def test_ks_rejects_gross_mismatch():
    u = np.random.default_rng(14).random(10_000)
    out = ks_test(u, uv.normal())
    assert out.reject and out.statistic > out.critical_value


def test_ks_accepts_correct_beta():
    x = uv.sample(uv.beta(2, 3), 100_000, 15)
    out = ks_test(x, uv.beta(2, 3))
    assert not out.reject
    assert out.critical_value == pytest.approx(1.6276 / math.sqrt(100_000), rel=1e-3)


def test_ks_accepts_callable_cdf():
    x = np.random.default_rng(16).random(1000)
    assert not ks_test(x, lambda t: np.clip(t, 0, 1)).reject


def test_ks_needs_samples():
    with pytest.raises(TooFewSamples):
        ks_test(np.zeros(50), uv.normal())
    with pytest.raises(TooFewSamples):
        ks_2samp_test(np.zeros(500), np.zeros(50))


def test_energy_identical_batches():
    batch = sample_batch(gamma_sum_dm([1.0, 2.0, 3.0], 1.0, 1.0), 500, 17)
    again = sample_batch(gamma_sum_dm([1.0, 2.0, 3.0], 1.0, 1.0), 500, 17)
    out = energy_test(batch, again)
    assert out.statistic == pytest.approx(0.0, abs=1e-9)
    assert not out.reject


def test_energy_detects_shift():
    gen = np.random.default_rng(18)
    out = energy_test(gen.normal(size=(400, 2)), gen.normal(size=(400, 2)) + 0.5)
    assert out.reject and out.p_value <= 0.01


def test_energy_needs_permutations_and_samples():
    gen = np.random.default_rng(19)
    a, b = gen.normal(size=(200, 2)), gen.normal(size=(200, 2))
    with pytest.raises(InvalidParams):
        energy_test(a, b, n_permutations=50)
    with pytest.raises(TooFewSamples):
        energy_test(a[:20], b)


def test_energy_deterministic_across_threads(monkeypatch):
    gen = np.random.default_rng(20)
    a, b = gen.normal(size=(700, 3)), gen.normal(size=(600, 3))
    monkeypatch.setenv("DEPMOD_THREADS", "1")
    one = energy_test(a, b, rng=RngStream(3), chunk_rows=256)
    monkeypatch.setenv("DEPMOD_THREADS", "4")
    four = energy_test(a, b, rng=RngStream(3), chunk_rows=256)
    assert one == four


def test_outcome_invariant():
    out = TestOutcome(0.3, 0.2, 0.01, True, 100)
    assert out.reject == (out.statistic > out.critical_value)


# --- calibration under the null ----------------------------------------------


@pytest.mark.slow
def test_ks_calibration():
    gen = np.random.default_rng(21)
    law = uv.beta(2, 3)
    rejects = sum(ks_test(uv.sample(law, 500, gen), law).reject for _ in range(200))
    assert rejects <= 1.5 * 0.01 * 200


@pytest.mark.slow
def test_energy_calibration():
    gen = np.random.default_rng(22)
    rejects = 0
    for rep in range(200):
        a = gen.normal(size=(100, 2))
        b = gen.normal(size=(100, 2))
        rejects += energy_test(a, b, rng=rep).reject
    assert rejects <= 1.5 * 0.01 * 200
