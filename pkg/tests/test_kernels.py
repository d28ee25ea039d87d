import numpy as np
import pytest

from complexflow import _fallback, kernels


def _data(M=33, seed=0):
    rng = np.random.default_rng(seed)
    return (rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M)),
            rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M)))


def test_default_backend_is_named():
    assert kernels.BACKEND in ("python", "cython")


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.twisted_convolution(*_data(), 0.1, 0.1, 0.5, backend="fortran")


def test_set_num_threads_validates():
    with pytest.raises(ValueError):
        kernels.set_num_threads(0)
    kernels.set_num_threads(1)


def test_twisted_convolution_delta_is_identity():
    W1, _ = _data(17)
    delta = np.zeros((17, 17), complex)
    delta[8, 8] = 1.0
    d = 0.25
    out = kernels.twisted_convolution(W1, delta, d, d, 0.5, backend="python")
    assert np.abs(out - W1).max() < 1e-12


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
@pytest.mark.parametrize("sign", [1, -1])
def test_twisted_convolution_backends_agree(sign):
    W1, W2 = _data()
    a = kernels.twisted_convolution(W1, W2, 0.2, 0.3, 0.5, sign, backend="python")
    b = kernels.twisted_convolution(W1, W2, 0.2, 0.3, 0.5, sign, backend="cython")
    assert np.abs(a - b).max() <= 1e-12 * np.abs(a).max()


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
def test_coherent_columns_backends_agree():
    rng = np.random.default_rng(2)
    x = np.linspace(-8, 8, 128)
    q, p = rng.uniform(-3, 3, 50), rng.uniform(-3, 3, 50)
    a = kernels.coherent_columns(x, q, p, 0.3 + 1j, 0.8, 0.5, backend="python")
    b = kernels.coherent_columns(x, q, p, 0.3 + 1j, 0.8, 0.5, backend="cython")
    assert np.abs(a - b).max() < 1e-13


def test_coherent_columns_match_states():
    from complexflow.coherent import CoherentLabel, coherent_values

    x = np.linspace(-8, 8, 128)
    cols = kernels.coherent_columns(x, np.array([0.5]), np.array([-0.2]), 1j, 1.0, 0.5, backend="python")
    ref = coherent_values(CoherentLabel.of(0.5, -0.2, 1j), 0.5, x)
    ref = ref / ref[np.argmax(np.abs(ref))] * cols[np.argmax(np.abs(ref)), 0]
    assert np.abs(cols[:, 0] - ref).max() < 1e-12
    assert _fallback.coherent_columns is not None
