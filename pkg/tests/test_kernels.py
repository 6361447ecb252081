"""Kernel lanes against each other and against the brute-force oracles."""

import numpy as np
import pytest

import oracles
from qfairsim import kernels
from qfairsim.rng import StreamRng

try:
    from qfairsim import kernels_numba

    LANES = [kernels, kernels_numba]
except ImportError:  # pragma: no cover
    kernels_numba = None
    LANES = [kernels]


def random_state(rng: StreamRng, n_qubits: int) -> np.ndarray:
    """Random mixed state: convex mixture of a few Haar-ish pure states."""
    dim = 1 << n_qubits
    rho = np.zeros((dim, dim), dtype=complex)
    weights = [rng.random() + 0.05 for _ in range(3)]
    for w in weights:
        v = np.array(
            [complex(rng.random() - 0.5, rng.random() - 0.5) for _ in range(dim)]
        )
        v /= np.linalg.norm(v)
        rho += w * np.outer(v, v.conj())
    return rho / np.trace(rho).real


def test_bell_vectors_orthonormal():
    gram = kernels.BELL_VECTORS @ kernels.BELL_VECTORS.conj().T
    assert np.allclose(gram, np.eye(4), atol=1e-12)


@pytest.mark.parametrize("n_qubits", [2, 3, 4])
def test_bell_probs_match_oracle(n_qubits):
    rng = StreamRng(100 + n_qubits)
    for trial in range(8):
        rho = random_state(rng, n_qubits)
        for pa in range(n_qubits):
            for pb in range(n_qubits):
                if pa == pb:
                    continue
                expected = oracles.probs(rho, pa, pb)
                got = kernels.bell_probs(rho, pa, pb)
                assert np.allclose(got, expected, atol=1e-12)


@pytest.mark.parametrize("n_qubits", [2, 3, 4])
def test_bell_collapse_matches_oracle(n_qubits):
    rng = StreamRng(200 + n_qubits)
    for trial in range(5):
        rho = random_state(rng, n_qubits)
        for k in range(4):
            m, p = kernels.bell_collapse(rho, 0, n_qubits - 1, k)
            assert p == pytest.approx(
                oracles.probs(rho, 0, n_qubits - 1)[k], abs=1e-12
            )
            if n_qubits > 2 and p > 1e-9:
                expected, _ = oracles.collapse_spectators(rho, 0, n_qubits - 1, k)
                assert np.allclose(m / p, expected, atol=1e-10)


def test_ptrace_matches_oracle():
    rng = StreamRng(7)
    for n_qubits in (2, 3, 4):
        rho = random_state(rng, n_qubits)
        for keep_size in range(1, n_qubits):
            keep = tuple(range(keep_size))
            assert np.allclose(
                kernels.ptrace(rho, keep), oracles.ptrace(rho, keep), atol=1e-12
            )


def test_tensor_is_kron():
    rng = StreamRng(9)
    a = random_state(rng, 1)
    b = random_state(rng, 2)
    assert np.allclose(kernels.tensor(a, b), np.kron(a, b), atol=1e-15)


@pytest.mark.skipif(kernels_numba is None, reason="numba not installed")
def test_lanes_agree():
    rng = StreamRng(11)
    for n_qubits in (2, 3, 4):
        rho = random_state(rng, n_qubits)
        for pa, pb in ((0, 1), (n_qubits - 1, 0)):
            if pa == pb:
                continue
            assert np.allclose(
                kernels.bell_probs(rho, pa, pb),
                kernels_numba.bell_probs(rho, pa, pb),
                atol=1e-13,
            )
            for k in range(4):
                m_np, p_np = kernels.bell_collapse(rho, pa, pb, k)
                m_nb, p_nb = kernels_numba.bell_collapse(rho, pa, pb, k)
                assert p_np == pytest.approx(p_nb, abs=1e-13)
                assert np.allclose(m_np, m_nb, atol=1e-13)
        keep = (0,) if n_qubits == 2 else (0, n_qubits - 1)
        assert np.allclose(
            kernels.ptrace(rho, keep), kernels_numba.ptrace(rho, keep), atol=1e-13
        )


def test_backend_env_flag(monkeypatch):
    from qfairsim import backend

    previous = backend.active()
    try:
        backend.use("numpy")
        assert backend.active() == "numpy"
        rho = kernels.tensor(kernels.BELL_RHOS[2], kernels.pure_rho(0.6, 0.8))
        assert np.allclose(backend.bell_probs(rho, 1, 2), [0.25] * 4, atol=1e-12)
    finally:
        backend.use(previous)
