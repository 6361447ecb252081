"""Density-matrix kernels, numba lane.

JIT-compiled mirrors of :mod:`qfairsim.kernels` with identical signatures
and conventions.  Importing this module fails cleanly when numba is not
installed; callers go through :mod:`qfairsim.backend` which falls back to
the pure-NumPy lane.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .kernels import BELL_VECTORS

_BELL = np.ascontiguousarray(BELL_VECTORS)


@njit(cache=True)
def _compose_index(r: int, ab: int, n: int, pa: int, pb: int) -> int:
    full = 0
    k = 0
    for p in range(n):
        if p == pa or p == pb:
            continue
        if (r >> (n - 3 - k)) & 1:
            full |= 1 << (n - 1 - p)
        k += 1
    if ab & 2:
        full |= 1 << (n - 1 - pa)
    if ab & 1:
        full |= 1 << (n - 1 - pb)
    return full


@njit(cache=True)
def _bell_probs(rho, pa, pb, vmat):
    dim = rho.shape[0]
    n = 0
    while (1 << n) < dim:
        n += 1
    n_rest = 1 << (n - 2)
    block = np.zeros((4, 4), dtype=np.complex128)
    for r in range(n_rest):
        for x in range(4):
            ix = _compose_index(r, x, n, pa, pb)
            for y in range(4):
                iy = _compose_index(r, y, n, pa, pb)
                block[x, y] += rho[ix, iy]
    probs = np.empty(4, dtype=np.float64)
    for k in range(4):
        acc = 0.0 + 0.0j
        for x in range(4):
            for y in range(4):
                acc += np.conj(vmat[k, x]) * block[x, y] * vmat[k, y]
        probs[k] = acc.real
    return probs


@njit(cache=True)
def _bell_collapse(rho, pa, pb, k, vmat):
    dim = rho.shape[0]
    n = 0
    while (1 << n) < dim:
        n += 1
    n_rest = 1 << (n - 2)
    m = np.zeros((n_rest, n_rest), dtype=np.complex128)
    for r in range(n_rest):
        for s in range(n_rest):
            acc = 0.0 + 0.0j
            for x in range(4):
                ix = _compose_index(r, x, n, pa, pb)
                for y in range(4):
                    iy = _compose_index(s, y, n, pa, pb)
                    acc += np.conj(vmat[k, x]) * rho[ix, iy] * vmat[k, y]
            m[r, s] = acc
    p = 0.0
    for r in range(n_rest):
        p += m[r, r].real
    return m, p


@njit(cache=True)
def _tensor(rho_a, rho_b):
    da = rho_a.shape[0]
    db = rho_b.shape[0]
    out = np.empty((da * db, da * db), dtype=np.complex128)
    for ia in range(da):
        for ja in range(da):
            val = rho_a[ia, ja]
            for ib in range(db):
                for jb in range(db):
                    out[ia * db + ib, ja * db + jb] = val * rho_b[ib, jb]
    return out


@njit(cache=True)
def _ptrace(rho, keep_mask):
    n = keep_mask.shape[0]
    dim = rho.shape[0]
    n_keep = 0
    for p in range(n):
        if keep_mask[p]:
            n_keep += 1
    dim_keep = 1 << n_keep
    out = np.zeros((dim_keep, dim_keep), dtype=np.complex128)
    for i in range(dim):
        # pack kept bits of i, in position order
        ki = 0
        for p in range(n):
            if keep_mask[p]:
                ki = (ki << 1) | ((i >> (n - 1 - p)) & 1)
        for j in range(dim):
            # traced bits must agree
            ok = True
            kj = 0
            for p in range(n):
                bit_i = (i >> (n - 1 - p)) & 1
                bit_j = (j >> (n - 1 - p)) & 1
                if keep_mask[p]:
                    kj = (kj << 1) | bit_j
                elif bit_i != bit_j:
                    ok = False
                    break
            if ok:
                out[ki, kj] += rho[i, j]
    return out


def bell_probs(rho: np.ndarray, pa: int, pb: int) -> np.ndarray:
    return _bell_probs(rho, pa, pb, _BELL)


def bell_collapse(rho: np.ndarray, pa: int, pb: int, k: int) -> tuple[np.ndarray, float]:
    m, p = _bell_collapse(rho, pa, pb, k, _BELL)
    return m, float(p)


def tensor(rho_a: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    return _tensor(np.ascontiguousarray(rho_a), np.ascontiguousarray(rho_b))


def ptrace(rho: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    n = rho.shape[0].bit_length() - 1
    mask = np.zeros(n, dtype=np.bool_)
    for p in keep:
        mask[p] = True
    return _ptrace(rho, mask)


def pure_rho(alpha: complex, beta: complex) -> np.ndarray:
    v = np.array([alpha, beta], dtype=np.complex128)
    return np.outer(v, v.conj())


def warmup() -> None:
    """Trigger JIT compilation of every kernel on tiny inputs."""
    rho = np.kron(np.outer(_BELL[0], _BELL[0].conj()), pure_rho(1.0, 0.0))
    bell_probs(rho, 0, 1)
    bell_collapse(rho, 0, 1, 0)
    tensor(pure_rho(1.0, 0.0), pure_rho(0.0, 1.0))
    ptrace(rho, (0,))
