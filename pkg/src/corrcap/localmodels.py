"""Classical response models as operator decompositions.

A two-qubit state admits a classical model for a fixed pair of local
measurement triads exactly when it decomposes over local frame operators:

* one-sided classical (hidden-state) form: ``sum_mu A_mu (x) sigma_mu`` with
  eight subnormalized states ``sigma_mu``, one per deterministic sign
  strategy of the first party;
* two-sided classical (hidden-variable) form: ``sum_{zeta,eta} w[zeta,eta]
  A_zeta (x) B_eta`` with nonnegative weights over deterministic strategy
  pairs.

The frame operator of a strategy is ``(I + sum_k v_k V_k) / 2``; the three
triad observables plus the identity form an orthogonal operator basis, which
makes both decompositions exact reconstructions rather than approximations.
This module provides the strategy enumeration, the frame operators, the two
decomposition structures with their (operator, variable) coefficient
matrices, and the exact conversions between the model classes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import kron, unvec, vec
from .states import (
    MeasurementTriad,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
)

_PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
_TINY_TRACE = 1e-14


def enumerate_strategies() -> tuple[tuple[int, int, int], ...]:
    """All eight deterministic sign assignments, plus before minus."""
    return tuple(itertools.product((1, -1), repeat=3))


def deterministic_response(strategy: tuple[int, int, int], setting: int) -> int:
    """Sign the strategy answers for a 1-indexed setting."""
    if setting not in (1, 2, 3):
        raise IndexError(f"setting must be 1, 2, or 3, got {setting}")
    return strategy[setting - 1]


def response_operator(
    strategy: tuple[int, int, int], triad: MeasurementTriad
) -> np.ndarray:
    """Frame operator of one strategy: ``(I + sum_k v_k V_k) / 2``.

    Unit trace, Hermitian, not positive; the eight operators of a triad sum
    to ``4 I``.
    """
    op = np.eye(2, dtype=complex)
    for k in range(3):
        op += strategy[k] * triad.observables[k]
    return op / 2


@dataclass(frozen=True)
class LhsStructure:
    """One-sided classical decomposition for a fixed first-party triad.

    ``coefficients`` maps the 32 real hidden-state components (Pauli
    components of the eight subnormalized states, column ``k + 4 * mu``) to
    the column-stacked 4x4 output operator.
    """

    triad: MeasurementTriad
    operators: np.ndarray
    coefficients: np.ndarray

    def output(self, states: np.ndarray) -> np.ndarray:
        """Assemble the output operator from eight hidden states."""
        states = np.asarray(states, dtype=complex)
        total = np.zeros((4, 4), dtype=complex)
        for mu in range(8):
            total += kron(self.operators[mu], states[mu])
        return total

    def output_from_components(self, comps: np.ndarray) -> np.ndarray:
        """Assemble the output operator from the 32 real components."""
        return unvec(self.coefficients @ np.asarray(comps, dtype=float), 4, 4)


def lhs_structure(triad: MeasurementTriad) -> LhsStructure:
    strategies = enumerate_strategies()
    operators = np.stack([response_operator(s, triad) for s in strategies])
    coefficients = np.empty((16, 32), dtype=complex)
    for mu in range(8):
        for k in range(4):
            coefficients[:, k + 4 * mu] = vec(kron(operators[mu], _PAULIS[k] / 2))
    return LhsStructure(triad=triad, operators=operators, coefficients=coefficients)


def components_from_states(states: np.ndarray) -> np.ndarray:
    """Pauli components of eight hidden states, ordered ``k + 4 * mu``."""
    states = np.asarray(states, dtype=complex)
    comps = np.empty(32)
    for mu in range(8):
        for k in range(4):
            comps[k + 4 * mu] = np.trace(_PAULIS[k] @ states[mu]).real
    return comps


def states_from_components(comps: np.ndarray) -> np.ndarray:
    """Inverse of :func:`components_from_states`."""
    comps = np.asarray(comps, dtype=float)
    states = np.zeros((8, 2, 2), dtype=complex)
    for mu in range(8):
        for k in range(4):
            states[mu] += comps[k + 4 * mu] * _PAULIS[k] / 2
    return states


@dataclass(frozen=True)
class LhvStructure:
    """Two-sided classical decomposition for a fixed pair of triads.

    ``coefficients`` maps the 64 nonnegative strategy-pair weights (column
    ``8 * zeta + eta``) to the column-stacked output operator.
    """

    triad_a: MeasurementTriad
    triad_b: MeasurementTriad
    operators_a: np.ndarray
    operators_b: np.ndarray
    coefficients: np.ndarray

    def output(self, weights: np.ndarray) -> np.ndarray:
        """Assemble the output operator from an (8, 8) or flat (64,) table."""
        flat = np.asarray(weights, dtype=float).reshape(64)
        return unvec(self.coefficients @ flat, 4, 4)


def lhv_structure(
    triad_a: MeasurementTriad, triad_b: MeasurementTriad
) -> LhvStructure:
    strategies = enumerate_strategies()
    ops_a = np.stack([response_operator(s, triad_a) for s in strategies])
    ops_b = np.stack([response_operator(s, triad_b) for s in strategies])
    coefficients = np.empty((16, 64), dtype=complex)
    for zeta in range(8):
        for eta in range(8):
            coefficients[:, 8 * zeta + eta] = vec(kron(ops_a[zeta], ops_b[eta]))
    return LhvStructure(
        triad_a=triad_a,
        triad_b=triad_b,
        operators_a=ops_a,
        operators_b=ops_b,
        coefficients=coefficients,
    )


def lhs_to_lhv(states: np.ndarray, triad_b: MeasurementTriad) -> np.ndarray:
    """Embed a one-sided model into strategy-pair weights, exactly.

    Each hidden state is replaced by the product distribution of its own
    outcome probabilities under the second triad. The weighted strategy
    operators then resolve every hidden state exactly, so the embedded model
    reproduces the full output operator, not only its correlations.
    """
    states = np.asarray(states, dtype=complex)
    strategies = enumerate_strategies()
    weights = np.zeros((8, 8))
    for mu in range(8):
        total = np.trace(states[mu]).real
        if total <= _TINY_TRACE:
            continue
        # outcome probabilities q[k, sign] for the second triad
        probs = np.empty((3, 2))
        for k in range(3):
            plus = np.trace(triad_b.projector(k, +1) @ states[mu]).real / total
            probs[k] = (min(max(plus, 0.0), 1.0), 1.0 - min(max(plus, 0.0), 1.0))
        for eta, strategy in enumerate(strategies):
            product = 1.0
            for k in range(3):
                product *= probs[k, 0 if strategy[k] > 0 else 1]
            weights[mu, eta] = total * product
    return weights


def lhv_to_lhs(weights: np.ndarray, triad_b: MeasurementTriad) -> np.ndarray:
    """Marginalize strategy-pair weights into per-strategy operators.

    The result reproduces the same output operator under the one-sided
    structure but is generally not positive, reflecting that two-sided
    classical models form the strictly larger class.
    """
    weights = np.asarray(weights, dtype=float).reshape(8, 8)
    strategies = enumerate_strategies()
    ops_b = np.stack([response_operator(s, triad_b) for s in strategies])
    return np.einsum("ze,eij->zij", weights, ops_b)
