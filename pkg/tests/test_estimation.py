import numpy as np
import pytest

from twostage import estimation as est
from twostage.errors import ConfigurationError


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.mark.parametrize("rows,length", [(4, 4), (2, 4), (3, 8), (16, 16)])
def test_pilot_rows_are_orthonormal(rows, length):
    phi = est.make_pilot_matrix(rows, length).entries
    np.testing.assert_allclose(phi @ phi.conj().T, np.eye(rows), atol=1e-12)


def test_pilot_pseudo_inverse_matches_generic_routine():
    pilots = est.make_pilot_matrix(3, 8)
    np.testing.assert_allclose(pilots.pseudo_inverse, np.linalg.pinv(pilots.entries), atol=1e-12)
    np.testing.assert_allclose(pilots.pseudo_inverse, pilots.entries.conj().T, atol=1e-12)


def test_pilot_length_must_cover_rows():
    with pytest.raises(ConfigurationError):
        est.make_pilot_matrix(5, 4)


def test_noiseless_scalar_observation():
    y = est.simulate_pilot_rx(np.array([[0.5 - 2j]]), est.make_pilot_matrix(1, 1), 9.0)
    np.testing.assert_allclose(y, [[3 * (0.5 - 2j)]])


def test_pure_noise_observation_has_unit_variance():
    pilots = est.make_pilot_matrix(2, 50)
    y = est.simulate_pilot_rx(np.zeros((1000, 2)), pilots, 1.0, np.random.default_rng(0))
    assert np.mean(np.abs(y) ** 2) == pytest.approx(1.0, rel=0.02)


def test_uplink_scaling_uses_total_pilot_energy():
    H = np.array([[1.0 + 0j, 2.0], [0.5j, -1.0]])
    res = est.estimate_uplink_full(H, 3.0, 4)
    assert res.pilot_power == 12.0
    y = est.simulate_pilot_rx(H.T, est.make_pilot_matrix(2, 4), res.pilot_power)
    np.testing.assert_allclose(y, np.sqrt(3.0 * 4) * H.T @ est.make_pilot_matrix(2, 4).entries)


def test_downlink_precoded_scaling_is_stream_count():
    B = crandn(np.random.default_rng(1), 5, 3)
    assert est.estimate_downlink_precoded(B).pilot_power == 3


def test_noiseless_estimate_is_exact():
    rng = np.random.default_rng(2)
    M = crandn(rng, 6, 3)
    pilots = est.make_pilot_matrix(3, 7)
    y = est.simulate_pilot_rx(M, pilots, 2.5)
    np.testing.assert_allclose(est.ml_estimate(y, pilots, 2.5).estimate, M, atol=1e-10)


def test_noiseless_phases():
    rng = np.random.default_rng(3)
    H = crandn(rng, 6, 10)
    np.testing.assert_allclose(est.estimate_uplink_full(H, 2.0, 8).estimate, H, atol=1e-10)
    Q = np.eye(6)[:, :3]
    np.testing.assert_allclose(est.estimate_uplink_effective(Q.T @ H, 2.0, 8).estimate, H[:3], atol=1e-10)


def test_estimation_error_second_moment():
    rng = np.random.default_rng(4)
    m, r, length, scale = 5, 3, 6, 4.0
    pilots = est.make_pilot_matrix(r, length)
    M = crandn(rng, m, r)
    trials = 10_000
    y = est.simulate_pilot_rx(np.broadcast_to(M, (trials, m, r)), pilots, scale, rng)
    err = est.ml_estimate(y, pilots, scale).estimate - M
    mse = np.mean(np.sum(np.abs(err) ** 2, axis=(1, 2)))
    assert mse == pytest.approx(m * r / scale, rel=0.05)


def test_projected_noise_matches_white_noise_for_orthonormal_q():
    rng = np.random.default_rng(5)
    Q = np.linalg.qr(crandn(rng, 8, 3))[0]
    D = crandn(rng, 3, 2)
    trials = 10_000
    Ds = np.broadcast_to(D, (trials, 3, 2))
    white = est.estimate_downlink_effective(Ds, rng).estimate - D
    projected = est.estimate_downlink_effective(Ds, rng, first_stage=Q).estimate - D
    cov_w = np.einsum("nij,nkj->ik", white, white.conj()) / trials
    cov_p = np.einsum("nij,nkj->ik", projected, projected.conj()) / trials
    np.testing.assert_allclose(cov_p, cov_w, atol=0.05)
    assert np.real(np.trace(cov_w)) == pytest.approx(3 * 2 / 2, rel=0.05)


def test_shape_mismatch_is_rejected():
    with pytest.raises(ConfigurationError):
        est.simulate_pilot_rx(np.zeros((2, 3)), est.make_pilot_matrix(2, 4), 1.0)
    with pytest.raises(ConfigurationError):
        est.ml_estimate(np.zeros((2, 3)), est.make_pilot_matrix(2, 4), 1.0)
