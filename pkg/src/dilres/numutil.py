"""Shared small numerics: eigenvalue clustering, residuals, random matrices."""
from __future__ import annotations

import numpy as np

CLUSTER_RTOL = 1e-9


def cluster_values(values: np.ndarray, rtol: float = CLUSTER_RTOL,
                   scale: float = None) -> list[list[int]]:
    """Group indices of nearly equal complex values.

    Two values join the same cluster when their distance is below
    rtol * scale, with scale defaulting to the largest magnitude present
    (or 1 for all-zero input).  Input order is preserved inside clusters;
    clusters are ordered by real part of their mean.
    """
    values = np.asarray(values)
    if scale is None:
        scale = float(np.max(np.abs(values))) if values.size else 1.0
        scale = max(scale, 1.0e-300)
    tol = rtol * max(scale, 1.0)
    order = np.lexsort((values.imag, values.real))
    clusters: list[list[int]] = []
    current: list[int] = []
    for idx in order:
        if current and abs(values[idx] - values[current[-1]]) > tol:
            clusters.append(current)
            current = []
        current.append(int(idx))
    if current:
        clusters.append(current)
    clusters.sort(key=lambda c: np.mean(values[c]).real)
    return clusters


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - m.conj().T))


def unitarity_residual(m: np.ndarray) -> float:
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2.0


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_su2(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(4)
    a, b, c, d = v / np.linalg.norm(v)
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])
