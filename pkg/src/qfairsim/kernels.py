"""Density-matrix kernels, pure-NumPy lane.

Hot numerical routines for the quantum state engine: Bell-basis outcome
probabilities, projective collapse onto a Bell outcome, tensor products and
partial traces.

Conventions:
  * Basis order for two qubits is |00>, |01>, |10>, |11>.
  * Qubit positions follow tensor order: position 0 is the leftmost factor,
    i.e. the most significant bit of a basis index.
  * Density matrices are complex128 arrays of shape (2**n, 2**n), n <= 4.
"""

from __future__ import annotations

import numpy as np

_INV_SQRT2 = 1.0 / np.sqrt(2.0)

# Rows are the four Bell vectors: (|00>+|11>)/sqrt2, (|00>-|11>)/sqrt2,
# (|01>+|10>)/sqrt2, (|01>-|10>)/sqrt2.
BELL_VECTORS = np.array(
    [
        [_INV_SQRT2, 0.0, 0.0, _INV_SQRT2],
        [_INV_SQRT2, 0.0, 0.0, -_INV_SQRT2],
        [0.0, _INV_SQRT2, _INV_SQRT2, 0.0],
        [0.0, _INV_SQRT2, -_INV_SQRT2, 0.0],
    ],
    dtype=np.complex128,
)

BELL_RHOS = np.array([np.outer(v, v.conj()) for v in BELL_VECTORS])

_INDEX_CACHE: dict[tuple[int, int, int], np.ndarray] = {}


def _pair_index_table(n: int, pa: int, pb: int) -> np.ndarray:
    """Return idx[rest, ab] = full basis index with bits of qubits (pa, pb)
    taken from the two-bit value ab and the remaining qubits from rest."""
    key = (n, pa, pb)
    cached = _INDEX_CACHE.get(key)
    if cached is not None:
        return cached
    rest_positions = [p for p in range(n) if p != pa and p != pb]
    n_rest = n - 2
    idx = np.empty((1 << n_rest, 4), dtype=np.intp)
    for r in range(1 << n_rest):
        base = 0
        for k, p in enumerate(rest_positions):
            if (r >> (n_rest - 1 - k)) & 1:
                base |= 1 << (n - 1 - p)
        for ab in range(4):
            full = base
            if ab & 2:
                full |= 1 << (n - 1 - pa)
            if ab & 1:
                full |= 1 << (n - 1 - pb)
            idx[r, ab] = full
    _INDEX_CACHE[key] = idx
    return idx


def bell_probs(rho: np.ndarray, pa: int, pb: int) -> np.ndarray:
    """Probabilities of the four Bell outcomes when measuring qubits
    (pa, pb) of the state rho.  p_k = Tr[(P_k (x) I) rho]."""
    n = rho.shape[0].bit_length() - 1
    idx = _pair_index_table(n, pa, pb)
    # block[x, y] = sum_r rho[i(r, x), i(r, y)]
    block = rho[idx[:, :, None], idx[:, None, :]].sum(axis=0)
    probs = np.einsum("ka,ab,kb->k", BELL_VECTORS.conj(), block, BELL_VECTORS)
    return probs.real.copy()


def bell_collapse(rho: np.ndarray, pa: int, pb: int, k: int) -> tuple[np.ndarray, float]:
    """Project qubits (pa, pb) of rho onto Bell outcome k and trace them out.

    Returns (M, p) where p is the outcome probability and M the unnormalised
    reduced state of the remaining qubits (M / p is the post-measurement
    state; M has shape (2**(n-2), 2**(n-2)) and trace p).
    """
    n = rho.shape[0].bit_length() - 1
    idx = _pair_index_table(n, pa, pb)
    v = BELL_VECTORS[k]
    # sub[r, x, s, y] = rho[i(r, x), i(s, y)]
    sub = rho[idx[:, :, None, None], idx[None, None, :, :]]
    m = np.einsum("x,rxsy,y->rs", v.conj(), sub, v)
    p = float(np.trace(m).real)
    return m, p


def tensor(rho_a: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    """Kronecker product; qubits of rho_a become the leftmost positions."""
    return np.kron(rho_a, rho_b)


def ptrace(rho: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    """Partial trace keeping the given qubit positions (sorted ascending)."""
    n = rho.shape[0].bit_length() - 1
    reshaped = rho.reshape((2,) * (2 * n))
    row_labels = []
    col_labels = []
    out_labels = []
    next_label = 0
    for p in range(n):
        if p in keep:
            row_labels.append(next_label)
            col_labels.append(next_label + n)
            next_label += 1
        else:
            row_labels.append(2 * n + p)
            col_labels.append(2 * n + p)
    out_labels = list(range(len(keep))) + [lbl + n for lbl in range(len(keep))]
    reduced = np.einsum(reshaped, row_labels + col_labels, out_labels)
    dim = 1 << len(keep)
    return np.ascontiguousarray(reduced.reshape(dim, dim))


def pure_rho(alpha: complex, beta: complex) -> np.ndarray:
    """Single-qubit projector |phi><phi| for phi = alpha|0> + beta|1>."""
    v = np.array([alpha, beta], dtype=np.complex128)
    return np.outer(v, v.conj())
