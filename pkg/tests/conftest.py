import numpy as np
import pytest

from protective_lab.apparatus import ApparatusSpec


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (a + a.conj().T)


def random_ket(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log10(xs), np.log10(ys), 1)[0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_pointer():
    return ApparatusSpec(d_A=64, p_max=8.0, sigma=1.0)
