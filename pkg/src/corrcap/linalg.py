"""Dense complex linear algebra helpers with strict validation.

Everything downstream (channels, tomography, the conic programs) leans on
the conventions fixed here: eigendecompositions are returned in descending
order with a deterministic phase fix, and vectorization is column-major.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HERMITIAN_ATOL
from .errors import DimMismatchError, NonHermitianError


def require_hermitian(mat: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``mat`` as a complex array, raising if it is not Hermitian.

    Parameters
    ----------
    mat:
        Square matrix to check.
    atol:
        Largest tolerated entrywise deviation between ``mat`` and its
        conjugate transpose.
    """
    arr = np.asarray(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimMismatchError(f"expected a square matrix, got shape {arr.shape}")
    if not np.allclose(arr, arr.conj().T, atol=atol, rtol=0.0):
        gap = np.abs(arr - arr.conj().T).max()
        raise NonHermitianError(f"matrix deviates from Hermitian by {gap:.3e}")
    return arr


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor on the left (slow index)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def frob_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Frobenius inner product tr(a^dagger b), conjugate-linear in ``a``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def vec(mat: np.ndarray) -> np.ndarray:
    """Column-major vectorization of a matrix."""
    return np.asarray(mat, dtype=complex).flatten(order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v, dtype=complex).reshape((rows, cols), order="F")


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    ``values`` are real and sorted in descending order; ``vectors`` holds
    the matching orthonormal eigenvectors as columns. Each column is phased
    so that its first component above 1e-12 in magnitude is positive real,
    which makes the decomposition deterministic for non-degenerate inputs.
    """

    values: np.ndarray
    vectors: np.ndarray


def eigh(mat: np.ndarray, atol: float = HERMITIAN_ATOL) -> EigenDecomposition:
    """Validated Hermitian eigendecomposition.

    Raises
    ------
    NonHermitianError
        If ``mat`` deviates from Hermitian by more than ``atol``.
    """
    arr = require_hermitian(mat, atol)
    values, vectors = np.linalg.eigh(arr)
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nonzero = np.flatnonzero(np.abs(col) > 1e-12)
        if nonzero.size:
            lead = col[nonzero[0]]
            vectors[:, j] = col * (lead.conjugate() / abs(lead))
    return EigenDecomposition(values=values, vectors=vectors)


def nearest_psd(mat: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Project a Hermitian matrix onto the PSD cone in Frobenius norm.

    Negative eigenvalues are clipped to zero in the eigenbasis of ``mat``,
    which is the unique Frobenius-nearest positive semidefinite matrix.
    """
    dec = eigh(mat, atol)
    clipped = np.clip(dec.values, 0.0, None)
    out = (dec.vectors * clipped) @ dec.vectors.conj().T
    return (out + out.conj().T) / 2


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a Haar-random unitary via the QR decomposition trick."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_cptp_kraus(
    dim: int, kraus_count: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Draw Kraus operators of a random CPTP map via a random isometry.

    The stacked operators form an isometry from the system to system x
    environment, so sum_i K_i^dagger K_i = I exactly (up to rounding).
    """
    big = haar_unitary(dim * kraus_count, rng)
    isometry = big[:, :dim]
    return [isometry[i * dim : (i + 1) * dim, :] for i in range(kraus_count)]
