"""Single-qubit tokens, measurement triads, and the two-qubit input grids.

Conventions fixed here and relied on everywhere else:

* Basis order for two qubits is ``|ab>`` with the first party (Alice) as the
  most significant bit, so ``|ab>`` maps to index ``2a + b``.
* Token strings pair a setting letter with an eigenvalue sign, e.g. ``"Y-"``.
* Setting order is ``(X, Y, Z)`` for both the tokens and the triads.
* The full preparation grid runs Alice-major over the per-qubit token order
  ``X+, X-, Y+, Y-, Z+, Z-``; the process-reconstruction grid runs
  Alice-major over ``Z+, Z-, X+, Y+``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TriadError
from .linalg import kron

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

SETTINGS = ("X", "Y", "Z")

_SQ2 = np.sqrt(2.0)

_STATE_VECTORS = {
    "Z+": np.array([1.0, 0.0], dtype=complex),
    "Z-": np.array([0.0, 1.0], dtype=complex),
    "X+": np.array([1.0, 1.0], dtype=complex) / _SQ2,
    "X-": np.array([1.0, -1.0], dtype=complex) / _SQ2,
    "Y+": np.array([1.0, 1.0j], dtype=complex) / _SQ2,
    "Y-": np.array([1.0, -1.0j], dtype=complex) / _SQ2,
}

# Per-qubit token order for the 36-state preparation grid.
FULL_TOKENS = ("X+", "X-", "Y+", "Y-", "Z+", "Z-")

# Per-qubit token order for the 16-state process-reconstruction grid.
QPT_TOKENS = ("Z+", "Z-", "X+", "Y+")

OUTCOME_KEYS = ("++", "+-", "-+", "--")


def state_vector(token: str) -> np.ndarray:
    """Return the qubit state vector for a token such as ``"X+"``."""
    return _STATE_VECTORS[token].copy()


def projector(token: str) -> np.ndarray:
    """Rank-one projector onto the token's state."""
    v = _STATE_VECTORS[token]
    return np.outer(v, v.conj())


def token_parts(token: str) -> tuple[str, int]:
    """Split a token into its setting letter and eigenvalue sign."""
    if len(token) != 2 or token[0] not in SETTINGS or token[1] not in "+-":
        raise KeyError(f"unknown token {token!r}")
    return token[0], 1 if token[1] == "+" else -1


def setting_index(letter: str) -> int:
    """Index of a setting letter in the fixed (X, Y, Z) order."""
    return SETTINGS.index(letter)


@dataclass(frozen=True)
class MeasurementTriad:
    """Three binary observables forming an orthogonal qubit triad.

    Each observable must square to the identity and the three must be
    mutually orthogonal under the trace inner product, which is exactly the
    structure of a rotated Pauli frame.
    """

    observables: np.ndarray
    _projectors: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        obs = np.asarray(self.observables, dtype=complex)
        if obs.shape != (3, 2, 2):
            raise TriadError(f"expected shape (3, 2, 2), got {obs.shape}")
        for k in range(3):
            if not np.allclose(obs[k], obs[k].conj().T, atol=1e-10):
                raise TriadError(f"observable {k} is not Hermitian")
            if not np.allclose(obs[k] @ obs[k], np.eye(2), atol=1e-10):
                raise TriadError(f"observable {k} does not square to identity")
        for k in range(3):
            for l in range(k + 1, 3):
                if abs(np.trace(obs[k] @ obs[l])) > 1e-10:
                    raise TriadError(f"observables {k} and {l} are not orthogonal")
        object.__setattr__(self, "observables", obs)
        projs = np.empty((3, 2, 2, 2), dtype=complex)
        for k in range(3):
            projs[k, 0] = (np.eye(2) + obs[k]) / 2
            projs[k, 1] = (np.eye(2) - obs[k]) / 2
        object.__setattr__(self, "_projectors", projs)

    def observable(self, k: int) -> np.ndarray:
        return self.observables[k].copy()

    def projector(self, k: int, sign: int) -> np.ndarray:
        """Eigenprojector of observable ``k`` for eigenvalue ``sign``."""
        return self._projectors[k, 0 if sign > 0 else 1].copy()


def pauli_triad() -> MeasurementTriad:
    """The standard (X, Y, Z) triad."""
    return MeasurementTriad(np.stack([PAULI_X, PAULI_Y, PAULI_Z]))


def rotation_matrix(phi: float, theta: float) -> np.ndarray:
    """The two-parameter rotation used to tilt a measurement frame.

    Columns are the rotated computational basis states; ``phi`` sets the
    azimuthal phase and ``theta`` the polar angle.
    """
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    em = np.exp(-1j * phi / 2)
    ep = np.exp(1j * phi / 2)
    return np.array([[em * c, em * s], [-ep * s, ep * c]], dtype=complex)


def rotated_triad(phi: float, theta: float) -> MeasurementTriad:
    """Pauli triad conjugated by :func:`rotation_matrix`."""
    u = rotation_matrix(phi, theta)
    obs = np.stack([u @ p @ u.conj().T for p in (PAULI_X, PAULI_Y, PAULI_Z)])
    return MeasurementTriad(obs)


def full_input_labels() -> list[tuple[str, str]]:
    """All 36 product preparations, Alice-major."""
    return [(a, b) for a in FULL_TOKENS for b in FULL_TOKENS]


def qpt_input_labels() -> list[tuple[str, str]]:
    """The 16 product preparations spanning the process input space."""
    return [(a, b) for a in QPT_TOKENS for b in QPT_TOKENS]


def input_state(label: tuple[str, str]) -> np.ndarray:
    """Density matrix of the product preparation named by ``label``."""
    return kron(projector(label[0]), projector(label[1]))
