import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twostage import beamforming as bf
from twostage.channel import ArrayGeometry, assemble_channel, draw_fading, make_cluster_set
from twostage.errors import ConfigurationError, DegenerateChannelError


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def bisect_water_level(g, budget, tol=1e-12):
    """Reference water level by bisection on mu."""
    lo, hi = 0.0, budget + np.max(1.0 / g[g > 0])
    while hi - lo > tol * max(1.0, hi):
        mu = 0.5 * (lo + hi)
        used = np.sum(np.maximum(mu - 1.0 / g[g > 0], 0.0))
        lo, hi = (lo, mu) if used > budget else (mu, hi)
    return 0.5 * (lo + hi)


def principal_angles_deg(A, B):
    qa, qb = np.linalg.qr(A)[0], np.linalg.qr(B)[0]
    s = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    return np.degrees(np.arccos(np.clip(s, 0.0, 1.0)))


def test_truncated_svd_of_diagonal():
    U, s, V = bf.truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(s, [3, 2])
    np.testing.assert_allclose(np.abs(U), np.eye(3)[:, :2], atol=1e-12)
    np.testing.assert_allclose(np.abs(V), np.eye(3)[:, :2], atol=1e-12)


def test_truncated_svd_of_zero_reconstructs():
    U, s, V = bf.truncated_svd(np.zeros((3, 4)), 2)
    np.testing.assert_allclose(s, 0)
    np.testing.assert_allclose(U @ np.diag(s) @ V.conj().T, 0)


def test_truncation_error_is_eckart_young():
    M = crandn(np.random.default_rng(0), 4, 6)
    U, s, V = bf.truncated_svd(M, 2)
    full = np.linalg.svd(M, compute_uv=False)
    err = np.linalg.norm(M - U @ np.diag(s) @ V.conj().T)
    assert err == pytest.approx(np.sqrt(full[2] ** 2 + full[3] ** 2), abs=1e-9)


def test_phase_convention_makes_pivot_real():
    M = crandn(np.random.default_rng(1), 5, 4)
    U, s, V = bf.truncated_svd(M, 3)
    pivot = V[np.argmax(np.abs(V), axis=0), np.arange(3)]
    np.testing.assert_allclose(pivot.imag, 0, atol=1e-14)
    assert np.all(pivot.real > 0)
    np.testing.assert_allclose(M @ V, U * s, atol=1e-12)


def test_water_fill_two_streams():
    p = bf.water_fill([4.0, 1.0], 3.0)
    np.testing.assert_allclose(p, [1.875, 1.125], atol=1e-12)
    assert bisect_water_level(np.array([4.0, 1.0]), 3.0) == pytest.approx(2.125, abs=1e-9)


def test_water_fill_single_stream_takes_everything():
    np.testing.assert_allclose(bf.water_fill([0.3], 7.0), [7.0])


def test_water_fill_equal_gains_split_evenly():
    np.testing.assert_allclose(bf.water_fill([2.0, 2.0, 2.0], 3.0), [1.0, 1.0, 1.0])


def test_water_fill_drops_weak_stream():
    p = bf.water_fill([10.0, 0.01], 1.0)
    np.testing.assert_allclose(p, [1.0, 0.0])


def test_water_fill_zero_gain_gets_no_power():
    p = bf.water_fill([1.0, 0.0, 2.0], 2.0)
    assert p[1] == 0
    assert p.sum() == pytest.approx(2.0)


@pytest.mark.parametrize(
    "gains,budget,error",
    [([], 1.0, ConfigurationError), ([1.0], 0.0, ConfigurationError), ([-1.0, 1.0], 1.0, ConfigurationError),
     ([0.0, 0.0], 1.0, DegenerateChannelError)],
)
def test_water_fill_rejects_bad_input(gains, budget, error):
    with pytest.raises(error):
        bf.water_fill(gains, budget)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=8), st.floats(1e-2, 1e2))
def test_water_fill_properties(gains, budget):
    g = np.array(gains)
    p = bf.water_fill(g, budget)
    assert np.all(p >= 0)
    assert p.sum() == pytest.approx(budget, rel=1e-12)
    mu = bisect_water_level(g, budget)
    np.testing.assert_allclose(p, np.maximum(mu - 1.0 / g, 0.0), atol=1e-6 * max(1.0, budget))
    # stronger channels never get less power
    order = np.argsort(-g, kind="stable")
    assert np.all(np.diff(p[order]) <= 1e-9)


def test_water_fill_batches():
    rng = np.random.default_rng(2)
    g = rng.exponential(size=(5, 4))
    batched = bf.water_fill(g, 2.0)
    for k in range(5):
        np.testing.assert_allclose(batched[k], bf.water_fill(g[k], 2.0))


def test_precoder_from_diagonal_estimate():
    F = bf.design_precoder(np.diag([2.0, 1.0]), 2, 3.0).matrix
    np.testing.assert_allclose(np.abs(F), np.diag(np.sqrt([1.875, 1.125])), atol=1e-12)


def test_single_stream_precoder_is_dominant_direction():
    M = crandn(np.random.default_rng(3), 4, 6)
    F = bf.design_precoder(M, 1, 5.0).matrix
    v = np.linalg.svd(M)[2][0].conj()
    assert np.abs(np.vdot(v, F[:, 0])) == pytest.approx(np.sqrt(5.0), rel=1e-12)
    assert np.linalg.norm(F) == pytest.approx(np.sqrt(5.0))


def test_unitary_estimate_splits_power_evenly():
    U = np.linalg.qr(crandn(np.random.default_rng(4), 4, 4))[0]
    pre = bf.design_precoder(U, 3, 6.0)
    np.testing.assert_allclose(pre.power, [2.0, 2.0, 2.0])


def test_precoder_rejects_too_many_streams():
    with pytest.raises(ConfigurationError):
        bf.design_precoder(np.ones((2, 5)), 3, 1.0)


def test_square_first_stage_is_unitary():
    Q = bf.design_first_stage(crandn(np.random.default_rng(5), 6, 2), 6)
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(6), atol=1e-12)


def test_first_stage_of_diagonal_is_canonical():
    B = np.diag([3.0, 2.0, 1.0, 0.5])[:, :2]
    np.testing.assert_allclose(np.abs(bf.design_first_stage(B, 2)), np.eye(4)[:, :2], atol=1e-12)


def projector(A):
    q = np.linalg.qr(A)[0]
    return q @ q.conj().T


def test_first_stage_spans_dominant_left_subspace():
    B = crandn(np.random.default_rng(6), 8, 3)
    Q = bf.design_first_stage(B, 3)
    ref = np.linalg.svd(B)[0][:, :3]
    # sine of the largest principal angle
    assert np.linalg.norm(projector(Q) - projector(ref), 2) < 1e-8


def test_first_stage_is_frequency_selective():
    B = crandn(np.random.default_rng(11), 4, 8, 2)
    Q = bf.design_first_stage(B, 3)
    assert Q.shape == (4, 8, 3)
    assert np.linalg.norm(projector(Q[0]) - projector(Q[1])) > 1e-3


def test_first_stage_rejects_more_outputs_than_antennas():
    with pytest.raises(ConfigurationError):
        bf.design_first_stage(np.ones((4, 3)), 5)


def test_identity_like_second_stage():
    W = bf.design_second_stage_first_block(4, 3)
    np.testing.assert_array_equal(W, np.eye(4, 3))
    np.testing.assert_array_equal(bf.design_second_stage_first_block(2, 2), np.eye(2))


def test_second_stage_of_diagonal():
    W = bf.design_second_stage(np.diag([2.0, 1.0, 0.1]), 2)
    np.testing.assert_allclose(np.abs(W), np.eye(3)[:, :2], atol=1e-12)


def test_second_stage_is_orthonormal_and_spans_dominant_subspace():
    D = crandn(np.random.default_rng(7), 4, 3)
    W = bf.design_second_stage(D, 2)
    np.testing.assert_allclose(W.conj().T @ W, np.eye(2), atol=1e-12)
    assert np.linalg.norm(projector(W) - projector(np.linalg.svd(D)[0][:, :2]), 2) < 1e-10


def test_proxy_of_real_positive_combiner():
    B = np.ones((1, 4, 1))
    np.testing.assert_allclose(bf.hbf_phase_proxy(B, 1), np.full((4, 1), 0.5), atol=1e-12)


def test_proxy_is_constant_modulus():
    B = crandn(np.random.default_rng(8), 6, 8, 2)
    np.testing.assert_allclose(np.abs(bf.hbf_phase_proxy(B, 3)), 1 / np.sqrt(8), atol=1e-14)


def test_proxy_batches():
    B = crandn(np.random.default_rng(9), 3, 4, 8, 2)
    batched = bf.hbf_phase_proxy(B, 2)
    for k in range(3):
        np.testing.assert_allclose(batched[k], bf.hbf_phase_proxy(B[k], 2))


def test_proxy_stays_close_to_digital_combiner_on_flat_channel():
    rng = np.random.default_rng(10)
    rx, tx = ArrayGeometry(8), ArrayGeometry(16)
    mean_angle, largest = [], []
    for _ in range(100):
        clusters = make_cluster_set(
            rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3), [0.1] * 3, 1,
            los=(rng.uniform(-1, 1), rng.uniform(-1, 1), 1.0),
        )
        H = assemble_channel(rx, tx, clusters, draw_fading(rng, clusters), 4).per_subcarrier
        B = H @ bf.design_precoder(H, 2, 100.0).matrix
        angles = principal_angles_deg(bf.design_first_stage(B, 2)[0], bf.hbf_phase_proxy(B, 2))
        mean_angle.append(angles.mean())
        largest.append(angles.max())
    # regression bounds; see the decisions ledger for the measured values
    assert np.mean(mean_angle) < 10.0
    assert np.mean(largest) < 15.0
