import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overcomplete import ConfigError, OptimizerState, TrainerConfig, code_gradient, dict_update, rda_update
from overcomplete.optim import threshold_codes


def cfg(**kw):
    base = dict(lam=1.0, tau=0.0, K=1, eta=0.05)
    base.update(kw)
    return TrainerConfig(**base)


def scalar_rda(grads, lam, eta, nonnegative):
    """Direct transcription of the thresholded dual-averaging step for one coordinate."""
    out = []
    s = G = 0.0
    for t, g in enumerate(grads, 1):
        s += g
        G += g * g
        gbar = s / t
        if abs(gbar) <= lam:
            a = 0.0
        else:
            gamma = -math.copysign(1.0, gbar) * (eta * t / math.sqrt(G)) * (abs(gbar) - lam)
            a = 0.0 if (nonnegative and gamma < 0) else gamma
        out.append(a)
    return out


def adagrad_oracle(grads, eta):
    """AdaGrad-on-the-average with lambda = 0, written out by hand."""
    out, s, G = [], 0.0, 0.0
    for t, g in enumerate(grads, 1):
        s += g
        G += g * g
        gbar = s / t
        out.append(-math.copysign(1.0, gbar) * eta * t * abs(gbar) / math.sqrt(G) if gbar else 0.0)
    return out


def run_rda(grads, **kw):
    config = cfg(**kw)
    state = OptimizerState(1, 1, 1)
    return [float(rda_update(state, 0, np.array([g]), config)[0]) for g in grads], state


def test_code_gradient_at_origin_is_minus_two_x():
    np.testing.assert_array_equal(code_gradient([1.0, 0.0], np.eye(2), [0.0, 0.0]), [-2.0, 0.0])


def test_code_gradient_zero_at_perfect_fit():
    D = np.array([[0.3, -1.0, 2.0], [0.5, 0.1, 0.0]])
    a = np.array([1.0, 2.0, -0.5])
    np.testing.assert_allclose(code_gradient(D @ a, D, a), 0.0, atol=1e-15)


def test_code_gradient_hand_value():
    D = np.array([[1.0, 1.0], [0.0, 1.0]])
    np.testing.assert_array_equal(code_gradient([1.0, 1.0], D, [1.0, 0.0]), [0.0, -2.0])


def test_code_gradient_shape_mismatch():
    with pytest.raises(ConfigError):
        code_gradient([1.0, 2.0, 3.0], np.eye(2), [0.0, 0.0])


def test_code_gradient_finite_differences():
    rng = np.random.default_rng(11)
    for _ in range(20):
        L, K = rng.integers(2, 8), rng.integers(2, 12)
        D, x, a = rng.standard_normal((L, K)), rng.standard_normal(L), rng.standard_normal(K)
        f = lambda v: float(np.sum((x - D @ v) ** 2))
        h = 1e-6
        fd = np.array([(f(a + h * e) - f(a - h * e)) / (2 * h) for e in np.eye(K)])
        g = code_gradient(x, D, a)
        assert np.linalg.norm(g - fd) / np.linalg.norm(fd) <= 1e-6


def test_rda_below_threshold_is_exact_zero():
    vals, state = run_rda([0.5], lam=1.0)
    assert vals == [0.0]
    assert math.copysign(1.0, vals[0]) == 1.0
    assert state.steps[0] == 1 and state.sum_grad[0, 0] == 0.5 and state.sum_sq[0, 0] == 0.25


def test_rda_gamma_hand_value():
    vals, _ = run_rda([2.0], lam=1.0, eta=0.05)
    assert vals[0] == pytest.approx(-0.025, abs=1e-15)


def test_rda_nonnegative_zeroes_negative_gamma():
    vals, _ = run_rda([2.0], lam=1.0, eta=0.05, nonnegative=True)
    assert vals == [0.0]
    vals, _ = run_rda([-2.0], lam=1.0, eta=0.05, nonnegative=True)
    assert vals[0] == pytest.approx(0.025, abs=1e-15)


def test_rda_lambda_zero_matches_adagrad():
    rng = np.random.default_rng(5)
    for _ in range(50):
        g = float(rng.standard_normal())
        grads = [g] * int(rng.integers(1, 30))
        got, _ = run_rda(grads, lam=0.0, eta=0.1)
        np.testing.assert_allclose(got, adagrad_oracle(grads, 0.1), rtol=1e-12, atol=0)


# squares of |g| < 1e-154 underflow to 0; training gradients never get that small
grad_values = st.floats(-5, 5, allow_nan=False).filter(lambda g: g == 0 or abs(g) > 1e-100)


@settings(max_examples=200)
@given(st.lists(grad_values, min_size=1, max_size=25),
       st.floats(0, 3), st.floats(1e-3, 1), st.booleans())
def test_rda_matches_scalar_transcription(grads, lam, eta, nonneg):
    got, _ = run_rda(grads, lam=lam, eta=eta, nonnegative=nonneg)
    want = scalar_rda(grads, lam, eta, nonneg)
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)
    if nonneg:
        assert min(got) >= 0.0


@settings(max_examples=100)
@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=6, max_size=6),
       st.floats(0, 2), st.floats(0, 2))
def test_monotone_thresholding(g, lam1, lam2):
    lo, hi = sorted([lam1, lam2])
    g = np.array(g)
    sq = g * g + 1.0
    z_lo = threshold_codes(g, sq, 3, lo, 0.05) == 0
    z_hi = threshold_codes(g, sq, 3, hi, 0.05) == 0
    assert np.all(z_hi[z_lo])


def test_rda_exact_zero_property_over_sequences():
    rng = np.random.default_rng(0)
    config = cfg(lam=0.4, K=16)
    state = OptimizerState(3, 1, 16)
    for _ in range(200):
        i = int(rng.integers(3))
        a = rda_update(state, i, rng.standard_normal(16), config)
        gbar = state.average_gradient(i)
        small = np.abs(gbar) <= 0.4
        assert np.all(a[small] == 0.0)
        assert not np.any(np.signbit(a[small]))
        assert np.all(a[~small] != 0.0)


def test_state_counts_per_word():
    state = OptimizerState(2, 1, 3)
    config = cfg(K=3, lam=0.0)
    for _ in range(4):
        rda_update(state, 1, np.ones(3), config)
    assert state.steps.tolist() == [0, 4]
    np.testing.assert_array_equal(state.average_gradient(1), np.ones(3))
    assert np.all(state.sum_sq >= 0)


def test_dict_update_zero_code_no_tau_is_noop():
    D = np.array([[1.0, -2.0], [0.5, 3.0]])
    before = D.copy()
    state = OptimizerState(1, 2, 2)
    dict_update(state, D, np.array([1.0, 1.0]), np.zeros(2), cfg(K=2, tau=0.0))
    np.testing.assert_array_equal(D, before)
    assert np.all(state.dict_sq == 0)


def test_dict_update_tau_only_hand_value():
    D = np.array([[1.0]])
    state = OptimizerState(1, 1, 1)
    dict_update(state, D, np.array([0.0]), np.zeros(1), cfg(tau=1e-5, eta=0.05))
    assert state.dict_sq[0, 0] == pytest.approx(4e-10, rel=1e-12)
    assert D[0, 0] == pytest.approx(0.95, abs=1e-12)


def test_dict_update_perfect_reconstruction_is_noop():
    rng = np.random.default_rng(1)
    D = rng.standard_normal((3, 5))
    a = rng.standard_normal(5)
    x = D @ a
    before = D.copy()
    state = OptimizerState(1, 3, 5)
    dict_update(state, D, x, a, cfg(K=5, tau=0.0))
    np.testing.assert_allclose(D, before, atol=1e-12)


def test_dict_update_tau_zero_shortcut_matches_full_adagrad():
    rng = np.random.default_rng(2)
    L, K = 4, 9
    D1 = rng.standard_normal((L, K))
    D2 = D1.copy()
    s1, s2 = OptimizerState(1, L, K), OptimizerState(1, L, K)
    for _ in range(10):
        x = rng.standard_normal(L)
        a = rng.standard_normal(K) * (rng.random(K) < 0.4)
        dict_update(s1, D1, x, a, cfg(K=K, tau=0.0))
        # plain AdaGrad over all entries, skipping those never touched
        g = 2.0 * np.outer(D2 @ a - x, a)
        s2.dict_sq += g * g
        step = np.divide(g, np.sqrt(s2.dict_sq), out=np.zeros_like(g), where=s2.dict_sq > 0)
        D2 -= 0.05 * step
    np.testing.assert_allclose(D1, D2, rtol=0, atol=1e-14)


def test_config_validation():
    for bad in (dict(lam=-1), dict(tau=-1), dict(eta=0), dict(K=0), dict(epochs=0), dict(threads=0),
                dict(regularizer="l2")):
        with pytest.raises(ConfigError):
            cfg(**bad)
    assert TrainerConfig(binarize=True).nonnegative
    assert TrainerConfig(factor=10, K=None).code_length(300) == 3000
