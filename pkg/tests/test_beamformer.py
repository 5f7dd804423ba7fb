import numpy as np
import pytest

from dualwin.beamformer import (
    BeamformerStateError,
    OnlineMcwf,
    apply_filter,
    offline_mcwf,
    woodbury_update,
)


def _random_spectrogram(rng, t, p, f):
    return rng.standard_normal((t, p, f)) + 1j * rng.standard_normal((t, p, f))


class TestWoodburyUpdate:
    def test_scalar_case(self):
        a = 2.5
        y = np.array([0.7 - 0.3j])
        updated = woodbury_update(np.array([[1.0 / a]], dtype=complex), y)
        assert updated[0, 0] == pytest.approx(1.0 / (a + abs(y[0]) ** 2), abs=1e-15)

    def test_zero_vector_is_identity_update(self):
        inv = np.linalg.inv(np.array([[2.0, 0.3j], [-0.3j, 1.0]]))
        updated = woodbury_update(inv, np.zeros(2, complex))
        np.testing.assert_array_equal(updated, inv)

    @pytest.mark.parametrize("p", [1, 2, 6])
    def test_chain_matches_direct_inverse(self, p):
        # 100 rank-1 updates from (eps*I)^-1 against inverting the
        # accumulated loaded covariance directly
        rng = np.random.default_rng(10 + p)
        eps = 1e-6
        inv = np.eye(p, dtype=complex) / eps
        acc = eps * np.eye(p, dtype=complex)
        for _ in range(100):
            y = rng.standard_normal(p) + 1j * rng.standard_normal(p)
            inv = woodbury_update(inv, y)
            acc += np.outer(y, y.conj())
        assert np.max(np.abs(inv - np.linalg.inv(acc))) < 1e-8

    def test_batched_matches_loop(self):
        rng = np.random.default_rng(11)
        inv = np.tile(np.eye(3, dtype=complex) * 0.5, (4, 1, 1))
        y = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        batched = woodbury_update(inv, y)
        for f in range(4):
            np.testing.assert_allclose(
                batched[f], woodbury_update(inv[f], y[f]), atol=1e-14
            )

    def test_lost_definiteness_raises(self):
        inv = -np.eye(2, dtype=complex)
        with pytest.raises(BeamformerStateError):
            woodbury_update(inv, np.array([1.0 + 0j, 0.0]))


class TestApplyFilter:
    def test_one_hot_filter_selects_channel(self):
        rng = np.random.default_rng(12)
        Y = rng.standard_normal((4, 9)) + 1j * rng.standard_normal((4, 9))
        w = np.zeros((9, 4), complex)
        w[:, 2] = 1.0
        np.testing.assert_array_equal(apply_filter(w, Y), Y[2])

    def test_zero_filter_gives_zero_frame(self):
        Y = np.ones((3, 5), complex)
        np.testing.assert_array_equal(apply_filter(np.zeros((5, 3), complex), Y), np.zeros(5))

    def test_matches_per_bin_dot_product(self):
        rng = np.random.default_rng(13)
        Y = rng.standard_normal((5, 17)) + 1j * rng.standard_normal((5, 17))
        w = rng.standard_normal((17, 5)) + 1j * rng.standard_normal((17, 5))
        out = apply_filter(w, Y)
        naive = np.array([np.vdot(w[f], Y[:, f]) for f in range(17)])
        np.testing.assert_allclose(out, naive, atol=1e-12)


class TestOfflineMcwf:
    def test_single_channel_self_projection(self):
        rng = np.random.default_rng(14)
        Y = _random_spectrogram(rng, 16, 1, 7)
        w, out = offline_mcwf(Y, Y[:, 0, :], loading=0.0)
        np.testing.assert_allclose(w, np.ones((7, 1)), atol=1e-12)
        np.testing.assert_allclose(out, Y[:, 0, :], atol=1e-12)

    def test_single_channel_scalar_least_squares(self):
        rng = np.random.default_rng(15)
        Y = _random_spectrogram(rng, 16, 1, 7)
        c = 0.8 - 1.7j
        w, out = offline_mcwf(Y, c * Y[:, 0, :], loading=0.0)
        np.testing.assert_allclose(w, np.full((7, 1), np.conj(c)), atol=1e-12)
        np.testing.assert_allclose(out, c * Y[:, 0, :], atol=1e-12)

    def test_matches_dense_least_squares_oracle(self):
        # steered source in noise, P=2, T=8; compare with a Tikhonov
        # least-squares solve of the projection problem per frequency
        rng = np.random.default_rng(16)
        t_frames, p, f_bins = 8, 2, 5
        eps = 1e-6
        steer = rng.standard_normal((p, f_bins)) + 1j * rng.standard_normal((p, f_bins))
        src = rng.standard_normal((t_frames, f_bins)) + 1j * rng.standard_normal((t_frames, f_bins))
        noise = 0.3 * _random_spectrogram(rng, t_frames, p, f_bins)
        Y = steer[None, :, :] * src[:, None, :] + noise
        target = steer[0][None, :] * src  # target signal at channel 0
        w, out = offline_mcwf(Y, target, loading=eps)

        for f in range(f_bins):
            rows = np.vstack([Y[:, :, f].conj(), np.sqrt(eps) * np.eye(p)])
            rhs = np.concatenate([target[:, f].conj(), np.zeros(p)])
            w_lstsq, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
            np.testing.assert_allclose(w[f], w_lstsq, atol=1e-8)

        # beamforming reduces the error against the target below both raw channels
        err_bf = np.linalg.norm(out - target)
        for ch in range(p):
            assert err_bf < np.linalg.norm(Y[:, ch, :] - target)

    def test_one_hot_optimality_when_estimate_is_a_channel(self):
        rng = np.random.default_rng(17)
        Y = _random_spectrogram(rng, 20, 3, 6)
        q = 1
        w, out = offline_mcwf(Y, Y[:, q, :], loading=1e-6)
        np.testing.assert_allclose(out, Y[:, q, :], atol=1e-5)


class TestOnlineMcwf:
    def test_single_frame_single_channel_formula(self):
        rng = np.random.default_rng(18)
        y = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        s = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        eps = 1e-6
        bf = OnlineMcwf(1, 5, mode="direct", loading=eps)
        w = bf.update(y[None, :], s)
        expected = y * s.conj() / (eps + np.abs(y) ** 2)
        np.testing.assert_allclose(w[:, 0], expected, atol=1e-12)

    def test_zero_estimate_stream_keeps_zero_filter(self):
        rng = np.random.default_rng(19)
        bf = OnlineMcwf(3, 4, mode="woodbury")
        for _ in range(10):
            y = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
            w = bf.update(y, np.zeros(4, complex))
            np.testing.assert_array_equal(w, np.zeros((4, 3)))

    @pytest.mark.parametrize("mode", ["direct", "woodbury"])
    def test_final_filter_matches_offline(self, mode):
        rng = np.random.default_rng(20)
        Y = _random_spectrogram(rng, 50, 4, 9)
        S = rng.standard_normal((50, 9)) + 1j * rng.standard_normal((50, 9))
        bf = OnlineMcwf(4, 9, mode=mode)
        for t in range(50):
            w = bf.update(Y[t], S[t])
        w_offline, _ = offline_mcwf(Y, S)
        assert np.max(np.abs(w - w_offline)) < 1e-8

    def test_covariance_stays_hermitian(self):
        rng = np.random.default_rng(21)
        bf = OnlineMcwf(5, 3, mode="woodbury")
        for _ in range(200):
            y = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
            s = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            bf.update(y, s)
        assert bf.hermitian_residual() < 1e-12

    def test_frequency_permutation_equivariance(self):
        rng = np.random.default_rng(22)
        Y = _random_spectrogram(rng, 12, 2, 8)
        S = rng.standard_normal((12, 8)) + 1j * rng.standard_normal((12, 8))
        perm = rng.permutation(8)
        bf_a = OnlineMcwf(2, 8)
        bf_b = OnlineMcwf(2, 8)
        for t in range(12):
            w_a = bf_a.update(Y[t], S[t])
            w_b = bf_b.update(Y[t][:, perm], S[t][perm])
        np.testing.assert_array_equal(w_a[perm], w_b)

    def test_update_stride_holds_filter_between_updates(self):
        rng = np.random.default_rng(23)
        bf = OnlineMcwf(2, 4, mode="direct", update_stride=3)
        filters = []
        for t in range(7):
            y = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
            s = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            filters.append(bf.update(y, s).copy())
        np.testing.assert_array_equal(filters[1], filters[0])
        np.testing.assert_array_equal(filters[2], filters[0])
        assert not np.array_equal(filters[3], filters[0])
        np.testing.assert_array_equal(filters[4], filters[3])

    def test_forgetting_factor_matches_weighted_batch(self):
        rng = np.random.default_rng(24)
        lam, t_frames, p, f_bins, eps = 0.5, 6, 2, 3, 1e-6
        Y = _random_spectrogram(rng, t_frames, p, f_bins)
        S = rng.standard_normal((t_frames, f_bins)) + 1j * rng.standard_normal((t_frames, f_bins))
        bf = OnlineMcwf(p, f_bins, mode="direct", loading=eps, forgetting=lam)
        for t in range(t_frames):
            w = bf.update(Y[t], S[t])
        for f in range(f_bins):
            phi = lam**t_frames * eps * np.eye(p, dtype=complex)
            rhs = np.zeros(p, complex)
            for t in range(t_frames):
                weight = lam ** (t_frames - 1 - t)
                phi += weight * np.outer(Y[t, :, f], Y[t, :, f].conj())
                rhs += weight * Y[t, :, f] * np.conj(S[t, f])
            np.testing.assert_allclose(w[f], np.linalg.solve(phi, rhs), atol=1e-10)

    def test_woodbury_mode_tracks_direct_mode_with_forgetting(self):
        rng = np.random.default_rng(25)
        kwargs = dict(loading=1e-6, forgetting=0.9)
        bf_d = OnlineMcwf(3, 5, mode="direct", **kwargs)
        bf_w = OnlineMcwf(3, 5, mode="woodbury", **kwargs)
        for _ in range(40):
            y = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
            s = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            w_d = bf_d.update(y, s)
            w_w = bf_w.update(y, s)
        assert np.max(np.abs(w_d - w_w)) < 1e-8

    def test_rejects_non_finite_and_bad_shapes(self):
        bf = OnlineMcwf(2, 3)
        bad = np.full((2, 3), np.nan, dtype=complex)
        with pytest.raises(ValueError, match="non-finite"):
            bf.update(bad, np.zeros(3, complex))
        with pytest.raises(ValueError, match="shape"):
            bf.update(np.zeros((3, 3), complex), np.zeros(3, complex))

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            OnlineMcwf(2, 3, mode="mvdr")
        with pytest.raises(ValueError):
            OnlineMcwf(2, 3, loading=0.0)
        with pytest.raises(ValueError):
            OnlineMcwf(2, 3, update_stride=0)
        with pytest.raises(ValueError):
            OnlineMcwf(2, 3, forgetting=1.5)
