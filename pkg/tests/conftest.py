"""Shared test oracles.

The protocol oracle here is deliberately different from the library path: it
builds projectors as explicit matrices and evaluates the measure/evolve/measure
chain as literal operator sandwiches with traces, instead of multiplying
transition probabilities.
"""

import numpy as np
import pytest


def projector(dim: int, k: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[k, k] = 1.0
    return p


def sandwich_joint2(populations, u_matrix) -> np.ndarray:
    """p(k1, k0) by tracing projector sandwiches around the evolved state."""
    dim = len(populations)
    rho = np.diag(np.asarray(populations, dtype=complex))
    out = np.zeros((dim, dim))
    for k0 in range(dim):
        conditioned = projector(dim, k0) @ rho @ projector(dim, k0)
        evolved = u_matrix @ conditioned @ u_matrix.conj().T
        for k1 in range(dim):
            out[k1, k0] = np.trace(projector(dim, k1) @ evolved).real
    return out


def sandwich_joint3(populations, u10_matrix, u21_matrix) -> np.ndarray:
    """p(k2, k1, k0) via the same literal-sandwich route, middle collapse included."""
    dim = len(populations)
    rho = np.diag(np.asarray(populations, dtype=complex))
    out = np.zeros((dim, dim, dim))
    for k0 in range(dim):
        conditioned = projector(dim, k0) @ rho @ projector(dim, k0)
        evolved1 = u10_matrix @ conditioned @ u10_matrix.conj().T
        for k1 in range(dim):
            collapsed = projector(dim, k1) @ evolved1 @ projector(dim, k1)
            evolved2 = u21_matrix @ collapsed @ u21_matrix.conj().T
            for k2 in range(dim):
                out[k2, k1, k0] = np.trace(projector(dim, k2) @ evolved2).real
    return out


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish unitary from the QR decomposition of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_stochastic_columns(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Column-stochastic matrix with Dirichlet columns (a classical channel)."""
    return rng.dirichlet(np.ones(dim), size=dim).T


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
