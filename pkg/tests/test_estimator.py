import numpy as np
import pytest

import slonqs


def make_batch(E, O, weights=None):
    E = np.asarray(E, dtype=complex)
    O = np.asarray(O, dtype=complex)
    if O.ndim == 1:
        O = O[:, None]
    return slonqs.SampleBatch(configurations=np.ones((len(E), 2), dtype=np.int8),
                              local_energies=E,
                              log_derivs=O,
                              indices=np.arange(O.shape[1]),
                              weights=weights)


def exact_vector(s):
    return np.exp(slonqs.log_amplitudes(s, slonqs.enumerate_configurations(s.n_visible)))


def test_local_energy_uniform():
    h = slonqs.TimHamiltonian(slonqs.build_lattice(1, 2), J=1, h_x=0.5, h_z=0.5)
    s = slonqs.init_parameters(2, 1, scale=0)
    cache = slonqs.ActivationCache.from_state(s, [1, 1])
    assert slonqs.local_energy(h, s, cache) == pytest.approx(-1)


def test_local_energy_classical(random_state):
    h = slonqs.TimHamiltonian(slonqs.build_lattice(1, 4), J=1, h_x=0, h_z=0.5)
    for x in slonqs.enumerate_configurations(4):
        cache = slonqs.ActivationCache.from_state(random_state, x)
        assert slonqs.local_energy(h, random_state, cache) == slonqs.diagonal_energy(h, x)


def test_local_energies_match_matrix(chain4, random_state):
    psi = exact_vector(random_state)
    H = chain4.to_sparse().toarray()
    expected = (H @ psi) / psi
    configs = slonqs.enumerate_configurations(4)
    assert np.allclose(slonqs.local_energies(chain4, random_state, configs), expected)
    for k in (0, 5, 11):
        cache = slonqs.ActivationCache.from_state(random_state, configs[k])
        assert slonqs.local_energy(chain4, random_state, cache) == pytest.approx(expected[k])


def test_constant_batch():
    batch = make_batch([2.5 + 0.1j] * 7, [[1 + 1j, -0.5]] * 7)
    assert np.all(slonqs.gradient_F(batch) == 0)
    assert np.all(slonqs.covariance_S(batch) == 0)
    est = slonqs.energy_estimate(batch)
    assert est.variance == pytest.approx(0, abs=1e-20)
    assert est.mean == pytest.approx(2.5 + 0.1j)


def test_single_sample():
    est = slonqs.energy_estimate(make_batch([-1.25], [[0.3]]))
    assert est.variance == 0
    assert est.std_error == 0
    assert est.real == -1.25


def test_empty_batch():
    batch = make_batch([], np.zeros((0, 2)))
    for func in (slonqs.gradient_F, slonqs.covariance_S, slonqs.energy_estimate):
        with pytest.raises(slonqs.EstimationError):
            func(batch)


def test_estimates_against_direct_formulas():
    rng = np.random.default_rng(0)
    E = rng.normal(size=50) + 1j * rng.normal(size=50)
    O = rng.normal(size=(50, 3)) + 1j * rng.normal(size=(50, 3))
    batch = make_batch(E, O)

    F = (E[:, None] * O.conj()).mean(0) - E.mean() * O.conj().mean(0)
    S = O.conj().T @ O / 50 - np.outer(O.conj().mean(0), O.mean(0))
    assert np.allclose(slonqs.gradient_F(batch), F)
    assert np.allclose(slonqs.covariance_S(batch), S)
    S_est = slonqs.covariance_S(batch)
    assert np.allclose(S_est, S_est.conj().T)
    assert np.all(np.linalg.eigvalsh(S_est) > -1e-12)

    est = slonqs.energy_estimate(batch)
    assert est.mean == pytest.approx(E.mean())
    assert est.variance == pytest.approx(np.mean(np.abs(E - E.mean()) ** 2))
    assert est.std_error == pytest.approx(np.sqrt(est.variance / 50))


def test_exact_expectations_uniform():
    h = slonqs.TimHamiltonian(slonqs.build_lattice(1, 2), J=1, h_x=0.5, h_z=0.5)
    s = slonqs.init_parameters(2, 1, scale=0)
    energy, F, S = slonqs.exact_expectations(h, s)
    assert energy == pytest.approx(-1)
    assert F.shape == (s.n_params, )
    assert S.shape == (s.n_params, s.n_params)


def test_exact_expectations(chain4, random_state):
    psi = exact_vector(random_state)
    H = chain4.to_sparse().toarray()
    p = np.abs(psi) ** 2
    p /= p.sum()
    energy, F, S = slonqs.exact_expectations(chain4, random_state)
    assert abs(energy - (psi.conj() @ H @ psi) / (psi.conj() @ psi)) < 1e-10

    configs = slonqs.enumerate_configurations(4)
    E_loc = (H @ psi) / psi
    O = slonqs.log_derivatives_batch(random_state, configs)
    F_ref = (p * E_loc) @ O.conj() - (p @ E_loc) * (p @ O.conj())
    S_ref = (O.conj().T * p) @ O - np.outer(p @ O.conj(), p @ O)
    assert np.abs(F - F_ref).max() < 1e-10
    assert np.abs(S - S_ref).max() < 1e-10


def test_monte_carlo_energy(chain4, random_state):
    exact, _, _ = slonqs.exact_expectations(chain4, random_state)
    cfg = slonqs.SamplerConfig(n_samples=20_000, n_thermal=20, seed=9, n_chains=10)
    est = slonqs.energy_estimate(slonqs.run_chain(random_state, cfg, chain4))
    assert abs(est.real - exact.real) < 4 * est.std_error


@pytest.mark.slow
def test_monte_carlo_energy_large(chain4, random_state):
    exact, _, _ = slonqs.exact_expectations(chain4, random_state)
    cfg = slonqs.SamplerConfig(n_samples=100_000, n_thermal=100, seed=2, n_chains=20)
    est = slonqs.energy_estimate(slonqs.run_chain(random_state, cfg, chain4))
    assert abs(est.real - exact.real) < 3 * est.std_error


def neel_vector(L, start=1):
    x = np.array([start * (-1) ** i for i in range(L)])
    vec = np.zeros(2 ** L, dtype=complex)
    vec[slonqs.configuration_index(x)[0]] = 1
    return vec


def test_correlators_neel():
    lat = slonqs.build_lattice(1, 8)
    report = slonqs.correlators(neel_vector(8), lat)
    assert np.allclose(report.antiferro, 1)
    assert np.allclose(report.ferro[1::2], 0)
    assert np.allclose(report.pairs, [(-1) ** (l - 1) for l in range(2, 9)])
    assert report.at(1) == (-1.0, 1.0)


def test_correlators_all_up():
    lat = slonqs.build_lattice(1, 5)
    vec = np.zeros(32)
    vec[0] = 1
    report = slonqs.correlators(vec, lat)
    assert np.allclose(report.ferro, 1)
    assert list(report.distances) == [1, 2, 3, 4]


def test_correlators_from_batch():
    lat = slonqs.build_lattice(1, 4)
    configs = np.array([[1, -1, 1, -1], [-1, 1, -1, 1], [1, 1, 1, 1]], dtype=np.int8)
    batch = slonqs.SampleBatch(configurations=configs,
                               local_energies=np.zeros(3),
                               log_derivs=np.zeros((3, 1)),
                               indices=np.arange(1))
    report = slonqs.correlators(batch, lat)
    assert np.allclose(report.pairs, [-1 / 3, 1, -1 / 3])
    df = report.to_frame()
    assert list(df.columns) == ['d', 'pair', 'ferro', 'antiferro']


def test_correlators_from_configurations():
    lat = slonqs.build_lattice(1, 4)
    configs = np.array([[1, -1, 1, -1], [-1, 1, -1, 1], [1, 1, 1, 1]], dtype=np.int8)
    report = slonqs.correlators(configs, lat)
    assert np.allclose(report.pairs, [-1 / 3, 1, -1 / 3])

    with pytest.raises(slonqs.EstimationError):
        slonqs.correlators(np.empty((0, 4)), lat)
    with pytest.raises(slonqs.DimensionError):
        slonqs.correlators(configs[:, :3], lat)


def test_nearest_neighbour_correlators(random_state):
    # With the alternating sign starting at -1 the d=1 correlators are opposite
    report = slonqs.correlators(exact_vector(random_state), slonqs.build_lattice(1, 4))
    assert report.antiferro[0] == -report.ferro[0]
    assert np.all(np.abs(report.pairs) <= 1 + 1e-12)


def test_correlators_2d():
    with pytest.raises(slonqs.ObservableError):
        slonqs.correlators(np.ones(16), slonqs.build_lattice(2, (2, 2)))


def test_correlators_wrong_vector():
    with pytest.raises(slonqs.DimensionError):
        slonqs.correlators(np.ones(8), slonqs.build_lattice(1, 4))


def test_correlator_error():
    lat = slonqs.build_lattice(1, 6)
    neel = slonqs.correlators(neel_vector(6), lat)
    up = slonqs.correlators(np.eye(64)[0], lat)
    err = slonqs.correlator_error(neel, up)
    assert err['ferro'] == pytest.approx(abs(neel.ferro[-1] - 1))
    assert err['antiferro'] == pytest.approx(abs(1 - up.antiferro[-1]))
    assert slonqs.correlator_error(neel, neel) == {'ferro': 0, 'antiferro': 0}
