import numpy as np
import pytest

from protective_lab.reconstruct import (BlochVector, TomographyModel, bloch_of,
                                        protective_tomography, reconstruct_density,
                                        tomography_ensemble)

GENERIC = [np.cos(0.5), np.exp(0.5j) * np.sin(0.5)]


def random_ball(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * rng.random() ** (1 / 3)


class TestBloch:
    def test_round_trip(self, rng):
        for _ in range(200):
            v = random_ball(rng)
            np.testing.assert_allclose(bloch_of(reconstruct_density(v)).as_array(), v, atol=1e-12)

    def test_known_states(self):
        np.testing.assert_allclose(reconstruct_density([0, 0, 1]).matrix, [[1, 0], [0, 0]])
        np.testing.assert_allclose(bloch_of(np.full((2, 2), 0.5)).as_array(), [1, 0, 0])

    def test_out_of_ball_rejected_or_clipped(self):
        with pytest.raises(ValueError):
            BlochVector(1.0, 1.0, 0.0)
        b, clipped = BlochVector.clipped([2.0, 0.0, 0.0])
        assert clipped and b.nx == 1.0
        assert reconstruct_density([0, 0, 3]).eigenvalues().min() > -1e-15

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            bloch_of(np.eye(3) / 3)


class TestProtectiveTomography:
    @pytest.mark.parametrize("psi", [[1, 0], [2**-0.5, 2**-0.5], GENERIC])
    def test_ideal_fidelity(self, psi):
        res = protective_tomography(psi, 1.0, 2.0**12)
        assert res.fidelity_true >= 0.999
        assert res.survived and not res.clipped

    def test_generic_infidelity_slope(self):
        from conftest import loglog_slope
        Ts = [2.0**k for k in range(7, 13)]
        infid = [1 - protective_tomography(GENERIC, 1.0, T).fidelity_true for T in Ts]
        assert loglog_slope(Ts, infid) <= -1.5

    def test_bad_mode_and_dimension(self):
        with pytest.raises(ValueError):
            protective_tomography([1, 0], 1.0, 10.0, mode="bogus")
        with pytest.raises(ValueError):
            TomographyModel(np.array([1, 0, 0], dtype=complex), 1.0, 10.0)

    def test_sampled_is_deterministic(self):
        a = protective_tomography(GENERIC, 1.0, 8.0, mode="sampled", seed=4)
        b = protective_tomography(GENERIC, 1.0, 8.0, mode="sampled", seed=4)
        np.testing.assert_array_equal(a.raw_estimate, b.raw_estimate)
        assert len(a.per_axis_records) == 3

    @pytest.mark.slow
    def test_sampled_survival_matches_prediction(self):
        out = tomography_ensemble(GENERIC, 1.0, 8.0, 10000, base_seed=7)
        assert abs(out["freq_survived"] - out["predicted_survival"]) <= 3 * out["binomial_stderr"]
        assert out["predicted_survival"] < 0.99  # the run must actually be disturbing
