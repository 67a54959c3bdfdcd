import itertools

import numpy as np
import pytest

import slonqs

from slonqs.utils import logcosh


def brute_force_amplitude(s, x):
    """Sum the joint amplitude over all hidden spin configurations."""
    x = np.asarray(x, dtype=float)
    theta = s.W @ x
    total = 0
    for h in itertools.product((-1, 1), repeat=s.n_hidden):
        total += np.exp(s.a @ x + np.dot(h, theta))
    return total


def make_state(L, alpha, seed, scale=0.3):
    rng = np.random.default_rng(seed)
    a = scale * (rng.normal(size=L) + 1j * rng.normal(size=L))
    W = scale * (rng.normal(size=(alpha * L, L)) + 1j * rng.normal(size=(alpha * L, L)))
    return slonqs.RbmState(a, W, alpha)


@pytest.mark.parametrize("seed", range(10))
def test_amplitude_matches_hidden_sum(seed):
    rng = np.random.default_rng(100 + seed)
    L = int(rng.integers(1, 5))
    alpha = int(rng.integers(1, 3))
    s = make_state(L, alpha, seed)
    for x in slonqs.enumerate_configurations(L):
        expected = brute_force_amplitude(s, x)
        got = np.exp(slonqs.log_amplitude(s, x))
        assert abs(got - expected) / abs(expected) < 1e-10


def test_log_amplitude_limits():
    s = slonqs.RbmState(np.zeros(2), np.zeros((10, 2)), 5)
    assert slonqs.log_amplitude(s, (1, -1)) == pytest.approx(10 * np.log(2))

    w = 0.37 - 0.2j
    s = slonqs.RbmState([0], [[w]], 1)
    assert slonqs.log_amplitude(s, (1, )) == pytest.approx(np.log(2 * np.cosh(w)))


def test_log_amplitudes_vectorised(random_state):
    configs = slonqs.enumerate_configurations(4)
    batch = slonqs.log_amplitudes(random_state, configs)
    single = np.array([slonqs.log_amplitude(random_state, x) for x in configs])
    assert np.allclose(np.exp(batch), np.exp(single))


def test_logcosh_is_stable():
    z = np.array([1000.0, -1000.0, 800 + 3j, 0.0])
    out = logcosh(z)
    assert np.all(np.isfinite(out))
    assert out[0].real == pytest.approx(1000.0)
    assert out[1].real == pytest.approx(1000.0)
    assert out[3] == pytest.approx(np.log(2))

    moderate = np.array([0.5 + 0.3j, -2.1 + 1.7j, 3.0 - 2.5j])
    assert np.allclose(np.exp(logcosh(moderate)), 2 * np.cosh(moderate))


def _wrapped(z):
    return z.real + 1j * (np.remainder(z.imag + np.pi, 2 * np.pi) - np.pi)


@pytest.mark.parametrize("seed", range(5))
def test_log_derivatives_finite_differences(seed):
    s = make_state(3, 2, seed)
    x = np.array([1, -1, 1])
    cache = slonqs.ActivationCache.from_state(s, x)
    O = slonqs.log_derivatives(s, cache)
    assert O.shape == (s.n_params, )

    theta = s.parameters
    step = 1e-5
    for k in range(s.n_params):
        dp, dm = theta.copy(), theta.copy()
        dp[k] += step
        dm[k] -= step
        diff = (slonqs.log_amplitude(s.with_parameters(dp), x)
                - slonqs.log_amplitude(s.with_parameters(dm), x))
        fd = _wrapped(np.asarray(diff)) / (2 * step)
        assert abs(fd - O[k]) <= 1e-6 * max(1.0, abs(O[k]))


def test_log_derivatives_limits():
    s = slonqs.RbmState(np.zeros(3), np.zeros((3, 3)), 1)
    x = np.array([1, -1, -1])
    O = slonqs.log_derivatives(s, slonqs.ActivationCache.from_state(s, x))
    assert np.array_equal(O[:3], x)
    assert np.all(O[3:] == 0)

    O_flipped = slonqs.log_derivatives(s, slonqs.ActivationCache.from_state(s, -x))
    assert np.array_equal(O_flipped[:3], -O[:3])


def test_log_derivatives_subset(random_state):
    x = np.array([1, 1, -1, 1])
    cache = slonqs.ActivationCache.from_state(random_state, x)
    full = slonqs.log_derivatives(random_state, cache)
    idx = np.array([0, 3, 4, 9, 35])
    assert np.allclose(slonqs.log_derivatives(random_state, cache, idx), full[idx])


def test_amplitude_ratio(random_state):
    x = np.array([1, -1, -1, 1])
    cache = slonqs.ActivationCache.from_state(random_state, x)
    ratios = slonqs.log_amplitude_ratios(random_state, x[None, :])[0]
    for i in range(4):
        y = x.copy()
        y[i] *= -1
        expected = np.exp(slonqs.log_amplitude(random_state, y)
                          - slonqs.log_amplitude(random_state, x))
        assert slonqs.amplitude_ratio(random_state, cache, i) == pytest.approx(expected)
        assert np.exp(ratios[i]) == pytest.approx(expected)

    with pytest.raises(IndexError):
        slonqs.amplitude_ratio(random_state, cache, 4)


def test_amplitude_ratio_uniform():
    s = slonqs.init_parameters(5, 2, seed=0, scale=0)
    cache = slonqs.ActivationCache.from_state(s, [1, 1, -1, 1, -1])
    assert all(slonqs.amplitude_ratio(s, cache, i) == 1 for i in range(5))


def test_apply_flip_consistency(random_state):
    rng = np.random.default_rng(3)
    cache = slonqs.ActivationCache.from_state(random_state, [1, 1, 1, 1])
    for site in rng.integers(4, size=100_000):
        before = cache.config[site]
        cache = slonqs.apply_flip(cache, random_state, int(site))
        assert cache.config[site] == -before
    assert cache.drift(random_state) < 1e-8


def test_init_parameters():
    s = slonqs.init_parameters(4, 5, seed=7, scale=0.01)
    assert s.W.shape == (20, 4)
    assert np.all(s.a == 0)
    assert np.all(np.abs(s.W) < 0.1)
    assert s == slonqs.init_parameters(4, 5, seed=7, scale=0.01)

    assert slonqs.init_parameters(2, 1, seed=1).n_params == 6

    s0 = slonqs.init_parameters(3, 2, seed=1, scale=0)
    assert np.all(s0.W == 0)
    for x in slonqs.enumerate_configurations(3):
        assert slonqs.log_amplitude(s0, x) == pytest.approx(6 * np.log(2))

    with pytest.raises(ValueError):
        slonqs.init_parameters(3, 2, scale=-1)


def test_state_is_read_only(random_state):
    with pytest.raises(ValueError):
        random_state.W[0, 0] = 1
    theta = random_state.parameters
    theta[0] = 100
    assert random_state.a[0] != 100


def test_state_validation():
    with pytest.raises(slonqs.DimensionError):
        slonqs.RbmState(np.zeros(3), np.zeros((5, 3)), 2)
    s = slonqs.init_parameters(3, 1, seed=0)
    with pytest.raises(slonqs.DimensionError):
        s.with_parameters(np.zeros(5))
    with pytest.raises(slonqs.DimensionError):
        slonqs.log_amplitude(s, (1, 1))


def test_checkpoint(tmp_path, random_state):
    fp = tmp_path / 'state.json'
    random_state.to_file(fp)
    loaded = slonqs.RbmState.from_file(fp)
    assert loaded == random_state
    assert isinstance(random_state.__str__(), str)
    assert random_state.as_dict()['L'] == 4
    assert len(random_state.as_dict()['theta']) == random_state.n_params
