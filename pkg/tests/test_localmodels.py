"""Tests for the classical response-model structures."""
from __future__ import annotations

import itertools

import numpy as np
import pytest

from corrcap import localmodels
from corrcap.linalg import kron, vec
from corrcap.states import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    pauli_triad,
    rotated_triad,
)

PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)


def random_states(rng, count=8):
    """Random subnormalized 2x2 PSD matrices."""
    states = np.empty((count, 2, 2), dtype=complex)
    for i in range(count):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        states[i] = g @ g.conj().T / 4
    return states


def test_enumerate_strategies_order():
    strategies = localmodels.enumerate_strategies()
    assert len(strategies) == 8
    assert strategies[0] == (1, 1, 1)
    assert strategies[1] == (1, 1, -1)
    assert strategies[2] == (1, -1, 1)
    assert strategies[7] == (-1, -1, -1)
    assert len(set(strategies)) == 8
    assert set(strategies) == set(itertools.product((1, -1), repeat=3))


def test_deterministic_response_one_indexed():
    strategy = (1, -1, 1)
    assert localmodels.deterministic_response(strategy, 1) == 1
    assert localmodels.deterministic_response(strategy, 2) == -1
    assert localmodels.deterministic_response(strategy, 3) == 1
    with pytest.raises(IndexError):
        localmodels.deterministic_response(strategy, 0)
    with pytest.raises(IndexError):
        localmodels.deterministic_response(strategy, 4)


def test_response_operator_all_plus():
    op = localmodels.response_operator((1, 1, 1), pauli_triad())
    expected = (PAULI_I + PAULI_X + PAULI_Y + PAULI_Z) / 2
    assert np.allclose(op, expected, atol=1e-12)
    values = np.linalg.eigvalsh(op)
    assert np.allclose(sorted(values), [(1 - np.sqrt(3)) / 2, (1 + np.sqrt(3)) / 2])


def test_response_operators_sum_and_trace():
    for triad in (pauli_triad(), rotated_triad(0.3, 1.1)):
        total = np.zeros((2, 2), dtype=complex)
        for strategy in localmodels.enumerate_strategies():
            op = localmodels.response_operator(strategy, triad)
            assert np.allclose(op, op.conj().T, atol=1e-12)
            assert abs(np.trace(op) - 1.0) < 1e-12
            total += op
        assert np.allclose(total, 4 * np.eye(2), atol=1e-12)


def test_lhs_single_strategy_output():
    struct = localmodels.lhs_structure(pauli_triad())
    states = np.zeros((8, 2, 2), dtype=complex)
    states[0] = np.array([[1, 0], [0, 0]], dtype=complex)
    out = struct.output(states)
    expected = kron((PAULI_I + PAULI_X + PAULI_Y + PAULI_Z) / 2, states[0])
    assert np.allclose(out, expected, atol=1e-12)


def test_lhs_uniform_ensemble_output():
    struct = localmodels.lhs_structure(pauli_triad())
    rho_b = np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]])
    states = np.stack([rho_b / 8] * 8)
    out = struct.output(states)
    assert np.allclose(out, kron(np.eye(2) / 2, rho_b), atol=1e-12)


def test_lhs_trace_identity():
    rng = np.random.default_rng(7)
    struct = localmodels.lhs_structure(pauli_triad())
    states = random_states(rng)
    out = struct.output(states)
    assert abs(np.trace(out) - sum(np.trace(s) for s in states)) < 1e-12


def test_lhs_coefficient_columns():
    triad = rotated_triad(0.5, 0.9)
    struct = localmodels.lhs_structure(triad)
    assert struct.coefficients.shape == (16, 32)
    strategies = localmodels.enumerate_strategies()
    for mu in (0, 3, 7):
        for k in range(4):
            op = kron(
                localmodels.response_operator(strategies[mu], triad), PAULIS[k] / 2
            )
            col = struct.coefficients[:, k + 4 * mu]
            assert np.allclose(col, vec(op), atol=1e-12)


def test_lhs_components_match_states():
    rng = np.random.default_rng(11)
    struct = localmodels.lhs_structure(pauli_triad())
    states = random_states(rng)
    comps = localmodels.components_from_states(states)
    assert comps.shape == (32,)
    assert np.allclose(comps.imag if np.iscomplexobj(comps) else 0.0, 0.0)
    back = localmodels.states_from_components(comps)
    assert np.allclose(back, states, atol=1e-12)
    out_states = struct.output(states)
    out_comps = struct.output_from_components(comps)
    assert np.allclose(out_states, out_comps, atol=1e-12)
    # positivity of each state shows up as the cone inequality
    for mu in range(8):
        block = comps[4 * mu : 4 * mu + 4]
        assert block[0] >= np.linalg.norm(block[1:]) - 1e-12


def test_lhv_uniform_weights():
    struct = localmodels.lhv_structure(pauli_triad(), rotated_triad(0.0, np.pi / 4))
    weights = np.full((8, 8), 1 / 64)
    out = struct.output(weights)
    assert np.allclose(out, np.eye(4) / 4, atol=1e-12)


def test_lhv_coefficient_columns():
    triad_a = pauli_triad()
    triad_b = rotated_triad(0.0, np.pi / 4)
    struct = localmodels.lhv_structure(triad_a, triad_b)
    assert struct.coefficients.shape == (16, 64)
    strategies = localmodels.enumerate_strategies()
    for zeta, eta in ((0, 0), (2, 5), (7, 7)):
        op = kron(
            localmodels.response_operator(strategies[zeta], triad_a),
            localmodels.response_operator(strategies[eta], triad_b),
        )
        col = struct.coefficients[:, 8 * zeta + eta]
        assert np.allclose(col, vec(op), atol=1e-12)


def test_lhv_flat_and_square_weights_agree():
    rng = np.random.default_rng(3)
    struct = localmodels.lhv_structure(pauli_triad(), pauli_triad())
    weights = rng.random((8, 8))
    assert np.allclose(
        struct.output(weights), struct.output(weights.reshape(64)), atol=1e-12
    )
    assert abs(np.trace(struct.output(weights)) - weights.sum()) < 1e-11


def test_lhs_embeds_into_lhv_exactly():
    rng = np.random.default_rng(5)
    for triad_b in (pauli_triad(), rotated_triad(0.0, np.pi / 4)):
        lhs = localmodels.lhs_structure(pauli_triad())
        lhv = localmodels.lhv_structure(pauli_triad(), triad_b)
        states = random_states(rng)
        weights = localmodels.lhs_to_lhv(states, triad_b)
        assert weights.shape == (8, 8)
        assert weights.min() >= 0.0
        assert abs(weights.sum() - sum(np.trace(s).real for s in states)) < 1e-10
        # the embedding reproduces each hidden state exactly, not just the sum
        for mu in range(8):
            resolved = np.zeros((2, 2), dtype=complex)
            for eta, strategy in enumerate(localmodels.enumerate_strategies()):
                resolved += weights[mu, eta] * localmodels.response_operator(
                    strategy, triad_b
                )
            assert np.allclose(resolved, states[mu], atol=1e-10)
        assert np.allclose(lhv.output(weights), lhs.output(states), atol=1e-10)


def test_lhs_to_lhv_zero_state_row():
    states = np.zeros((8, 2, 2), dtype=complex)
    states[2] = np.array([[0.5, 0], [0, 0.5]])
    weights = localmodels.lhs_to_lhv(states, pauli_triad())
    assert np.allclose(weights[0], 0.0)
    assert abs(weights.sum() - 1.0) < 1e-12


def test_lhv_to_lhs_marginalizes():
    rng = np.random.default_rng(9)
    triad_b = rotated_triad(0.2, 0.7)
    weights = rng.random((8, 8)) / 10
    states = localmodels.lhv_to_lhs(weights, triad_b)
    assert states.shape == (8, 2, 2)
    lhs = localmodels.lhs_structure(pauli_triad())
    lhv = localmodels.lhv_structure(pauli_triad(), triad_b)
    assert np.allclose(lhs.output(states), lhv.output(weights), atol=1e-12)


def test_lhs_to_lhv_roundtrip():
    rng = np.random.default_rng(13)
    triad_b = pauli_triad()
    states = random_states(rng)
    weights = localmodels.lhs_to_lhv(states, triad_b)
    back = localmodels.lhv_to_lhs(weights, triad_b)
    assert np.allclose(back, states, atol=1e-10)


def test_output_linearity():
    rng = np.random.default_rng(17)
    struct = localmodels.lhs_structure(pauli_triad())
    s1 = random_states(rng)
    s2 = random_states(rng)
    combined = struct.output(s1 + 2 * s2)
    assert np.allclose(combined, struct.output(s1) + 2 * struct.output(s2), atol=1e-11)
