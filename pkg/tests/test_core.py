import numpy as np
import pytest
from families import SIGMA3, representative_models
from hypothesis import given, settings
from hypothesis import strategies as st

from depmod import univariate as uv
from depmod.constrained import trapezoid_dm
from depmod.core import (
    DependencyModel,
    DmSpec,
    chain_from_conditionals,
    check_triangular,
    linear_lift,
    push_forward,
    sample_batch,
    sample_inputs,
)
from depmod.elliptical import gaussian_dm
from depmod.errors import (
    DomainError,
    InvalidParams,
    MonotonicityViolation,
    SingularLift,
    UnsupportedFamily,
)
from depmod.oracles import energy_test, ks_2samp_test
from depmod.registry import build_dm
from depmod.simplex import dirichlet_dm

MODELS = representative_models()


# --- DmSpec -----------------------------------------------------------------------


def test_spec_rejects_repeated_index():
    with pytest.raises(InvalidParams):
        DmSpec("gaussian", {}, 0, (1, 1))


def test_spec_rejects_pivot_in_perm():
    with pytest.raises(InvalidParams):
        DmSpec("gaussian", {}, 1, (1, 2))


def test_spec_digest_is_stable():
    a = DmSpec("gaussian", {"sigma": np.eye(2)}, 0, (1,))
    b = DmSpec("gaussian", {"sigma": [[1.0, 0.0], [0.0, 1.0]]}, 0, (1,))
    assert a.digest() == b.digest() and a == b
    assert a.digest() != DmSpec("gaussian", {"sigma": np.eye(2)}, 1, (0,)).digest()


@given(st.integers(2, 7), st.data())
def test_spec_order_is_permutation(d, data):
    pivot = data.draw(st.integers(0, d - 1))
    perm = data.draw(st.permutations([k for k in range(d) if k != pivot]))
    spec = DmSpec("x", {}, pivot, perm)
    assert sorted(spec.order) == list(range(d)) and spec.order[0] == pivot


# --- build_dm ------------------------------------------------------------------


def test_build_gaussian_identity_is_passthrough():
    model = build_dm(DmSpec("gaussian", {"mu": np.zeros(3), "sigma": np.eye(3)}, 1, (2, 0)))
    x_j = np.array([0.3, -1.2])
    z = np.array([[0.5, 2.0], [-0.1, 0.7]])
    assert np.allclose(model.evaluate(x_j, z), z, atol=1e-15)


def test_build_dirichlet_two_dims():
    model = build_dm(DmSpec("dirichlet", {"alpha": [1.0, 1.0, 1.0]}, 0, (1,)))
    assert model.pivot_law == uv.beta(1.0, 2.0)
    assert model.latent_laws == (uv.beta(1.0, 1.0),)
    assert model.evaluate(np.array([0.25]), np.array([[0.4]]))[0, 0] == pytest.approx(0.4 * 0.75)


def test_build_unknown_family():
    with pytest.raises(UnsupportedFamily):
        build_dm(DmSpec("zipf", {}, 0, (1,)))


def test_build_unknown_parameter():
    with pytest.raises(InvalidParams):
        build_dm(DmSpec("dirichlet", {"alpha": [1.0, 1.0, 1.0], "beta": 2}, 0, (1,)))


# --- sampling ------------------------------------------------------------------------


def test_identity_gaussian_covariance():
    batch = sample_batch(gaussian_dm(np.zeros(3), np.eye(3), 2), 1_000_000, 1)
    assert np.max(np.abs(np.cov(batch.values, rowvar=False) - np.eye(3))) <= 0.01


def test_s2_correlations():
    batch = sample_batch(gaussian_dm(np.zeros(3), SIGMA3, 0), 1_000_000, 2)
    corr = np.corrcoef(batch.values, rowvar=False)
    assert np.allclose([corr[0, 1], corr[0, 2], corr[1, 2]], [0.25, 0.5, 0.75], atol=0.01)


def test_dirichlet_rows_sum_below_one():
    x = sample_batch(dirichlet_dm([1.0, 2.0, 3.0, 0.5]), 100_000, 3).values
    assert np.all(x.sum(axis=1) < 1) and np.all(x > 0)


def test_batch_is_in_natural_order():
    sigma = np.diag([1.0, 100.0, 10_000.0])
    batch = sample_batch(gaussian_dm(np.zeros(3), sigma, 2, (1, 0)), 20_000, 4)
    sd = batch.values.std(axis=0)
    assert np.allclose(sd, [1.0, 10.0, 100.0], rtol=0.05)


def test_batch_carries_provenance():
    model = gaussian_dm(np.zeros(2), np.eye(2))
    batch = sample_batch(model, 10, 5)
    assert batch.seed == 5 and batch.spec_digest == model.spec.digest()
    assert batch.n == 10 and batch.d == 2


def test_sampling_independent_of_thread_count(monkeypatch):
    model = gaussian_dm(np.zeros(3), SIGMA3, 1)
    monkeypatch.setenv("DEPMOD_THREADS", "1")
    one = sample_batch(model, 40_000, 6).values
    monkeypatch.setenv("DEPMOD_THREADS", "4")
    four = sample_batch(model, 40_000, 6).values
    assert np.array_equal(one, four)


def test_sample_size_validated():
    with pytest.raises(InvalidParams):
        sample_batch(gaussian_dm(np.zeros(2), np.eye(2)), 0, 0)


@pytest.mark.parametrize("label,model", MODELS, ids=[m[0] for m in MODELS])
def test_every_family_is_triangular(label, model):
    assert check_triangular(model, n=64, rng=7)


@pytest.mark.parametrize("label,model", MODELS, ids=[m[0] for m in MODELS])
def test_every_family_samples_finite_rows(label, model):
    x = sample_batch(model, 2000, 8).values
    assert x.shape == (2000, model.d) and np.all(np.isfinite(x))


def test_perm_does_not_change_joint_law():
    a = sample_batch(gaussian_dm(np.zeros(3), SIGMA3, 0, (1, 2)), 3000, 9)
    b = sample_batch(gaussian_dm(np.zeros(3), SIGMA3, 0, (2, 1)), 3000, 10)
    assert not energy_test(a, b, rng=11).reject


# --- push_forward ----------------------------------------------------------------


def test_push_forward_outside_support():
    model = dirichlet_dm([1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        push_forward(model, 1.0, [0.5])
    with pytest.raises(DomainError):
        push_forward(model, -0.1, [0.5])


def test_push_forward_triangular_in_last_latent():
    model = gaussian_dm(np.zeros(3), SIGMA3, 0)
    a = push_forward(model, 0.7, [0.1, -0.4])
    b = push_forward(model, 0.7, [0.1, 3.0])
    assert a[0] == b[0] and a[1] != b[1]


def test_gaussian_regression_coefficient():
    model = gaussian_dm(np.zeros(3), SIGMA3, 0)
    base = push_forward(model, 0.0, [0.0, 0.0])
    slope = push_forward(model, 1.0, [0.0, 0.0]) - base
    assert slope[0] == pytest.approx(0.25 * 5 / 3, abs=1e-12)


def test_gaussian_central_latents_give_conditional_mean():
    mu = np.array([1.0, -2.0, 0.5])
    model = gaussian_dm(mu, SIGMA3, 1, (0, 2))
    x_j = 3.0
    # latent laws are N(mu_w, Sigma_ww): their centres are mu_w
    out = push_forward(model, x_j, [mu[0], mu[2]])
    # conditional mean of (X1, X3) given X2 = x_j ...
    reg = SIGMA3[[0, 2], 1] / SIGMA3[1, 1] * (x_j - mu[1]) + mu[[0, 2]]
    # ... reached at the first output; the second adds the X1-residual term, zero here
    assert out == pytest.approx(reg, abs=1e-12)


# --- linear lift ------------------------------------------------------------------


def test_lift_identity_keeps_outputs():
    model = gaussian_dm(np.zeros(3), SIGMA3, 0)
    lifted = linear_lift(model, np.eye(3), np.zeros(3))
    x_j, z = sample_inputs(model, 50, 12)
    assert np.allclose(lifted.evaluate(x_j, z), model.evaluate(x_j, z), atol=1e-15)


def test_lift_scalar_case():
    model = DependencyModel(DmSpec("scalar", {}, 0, ()), uv.normal(), (), lambda x, z: np.empty((len(x), 0)))
    lifted = linear_lift(model, [[2.0]], [1.0])
    x = sample_batch(lifted, 50_000, 13).values[:, 0]
    assert abs(x.mean() - 1.0) < 0.05 and abs(x.std() - 2.0) < 0.05


def test_lift_rejects_bad_matrices():
    model = gaussian_dm(np.zeros(2), np.eye(2))
    with pytest.raises(SingularLift):
        linear_lift(model, [[0.0, 0.0], [1.0, 1.0]], [0.0, 0.0])
    with pytest.raises(InvalidParams):
        linear_lift(model, [[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0])


# --- conditional chain ---------------------------------------------------------------


def test_chain_ignoring_conditions_is_independent():
    q = lambda u, x_j, prev: uv.quantile(uv.beta(2, 2), u)  # noqa: E731
    model = chain_from_conditionals(uv.uniform(), [q, q])
    x = sample_batch(model, 50_000, 14).values
    assert np.max(np.abs(np.corrcoef(x, rowvar=False) - np.eye(3))) < 0.02


def test_chain_bivariate_gaussian_matches_model():
    rho = 0.6

    def q(u, x_j, prev):
        return rho * x_j + np.sqrt(1 - rho**2) * uv.quantile(uv.normal(), u)

    chain = chain_from_conditionals(uv.normal(), [q])
    direct = gaussian_dm(np.zeros(2), [[1.0, rho], [rho, 1.0]])
    a = sample_batch(chain, 100_000, 15).values
    b = sample_batch(direct, 100_000, 16).values
    assert not ks_2samp_test(a[:, 1], b[:, 1]).reject
    assert not ks_2samp_test(a[:, 1] - rho * a[:, 0], b[:, 1] - rho * b[:, 0]).reject


def test_chain_trapezoid_matches_closed_form():
    beta = 0.5

    def q(u, x2, prev):
        # X1 | X2 is uniform on (0, min((1 - x2)/beta, 1))
        return u * np.minimum((1 - x2) / beta, 1.0)

    chain = chain_from_conditionals(uv.trapezoidal(beta), [q], pivot=1, perm=(0,))
    closed = trapezoid_dm(beta, "r2")
    x2 = np.array([0.1, 0.6, 0.9])
    z = np.array([[0.3], [0.8], [0.5]])
    assert np.allclose(chain.evaluate(x2, z), closed.evaluate(x2, z), atol=1e-15)


def test_chain_monotonicity_violation():
    with pytest.raises(MonotonicityViolation):
        chain_from_conditionals(uv.uniform(), [lambda u, x_j, prev: 1.0 - u])


@settings(max_examples=20)
@given(st.floats(-0.95, 0.95), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_chain_evaluates_callbacks_in_order(rho, u1, u2):
    seen = []

    def q1(u, x_j, prev):
        seen.append(prev.shape[1])
        return rho * x_j + u

    def q2(u, x_j, prev):
        seen.append(prev.shape[1])
        return prev[:, 0] + u

    model = chain_from_conditionals(uv.normal(), [q1, q2])
    seen.clear()
    out = model.evaluate(np.array([0.5]), np.array([[u1, u2]]))
    assert seen == [0, 1]
    assert out[0, 1] == pytest.approx(rho * 0.5 + u1 + u2)
