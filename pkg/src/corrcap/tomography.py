"""State and process reconstruction from measured probabilities.

State reconstruction expands the two-qubit state over the local observable
frames: joint correlators fill the cross terms and setting-averaged
marginals fill the local terms, which makes the output Hermitian with unit
trace by construction (though not necessarily positive for noisy counts).

Process reconstruction recovers the action on each matrix-unit input by
expanding the off-diagonal units over the four spanning preparations per
qubit, stacks the per-unit outputs into the raw process matrix, and then
projects onto the physical (PSD, unit trace) set by eigenvalue clipping.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import ProcessMatrix
from .constants import IO_HERMITIAN_ATOL
from .errors import (
    IncompleteGridError,
    MissingInputError,
    NonHermitianError,
    SchemaError,
    ZeroTraceError,
)
from .linalg import eigh, frob_inner, kron, require_hermitian
from .simulator import CountsRecord, TomographyDataset
from .states import (
    MeasurementTriad,
    OUTCOME_KEYS,
    SETTINGS,
    pauli_triad,
    qpt_input_labels,
    rotated_triad,
)

_SIGNS = np.array([1.0, -1.0])


@dataclass(frozen=True)
class ProbabilityTable:
    """Joint and marginal outcome probabilities for one prepared input.

    ``joints[k, l, a, b]`` is the probability of outcomes ``(a, b)`` (0 for
    +1, 1 for -1) under setting pair ``(k, l)``. Marginals are averaged
    over the other party's three settings.
    """

    joints: np.ndarray
    marg_a: np.ndarray
    marg_b: np.ndarray

    def __post_init__(self) -> None:
        joints = np.asarray(self.joints, dtype=float)
        if joints.shape != (3, 3, 2, 2):
            raise SchemaError(f"joints must have shape (3, 3, 2, 2), got {joints.shape}")
        if joints.min() < -1e-12:
            raise SchemaError("joint probabilities must be nonnegative")
        sums = joints.sum(axis=(2, 3))
        if not np.allclose(sums, 1.0, atol=1e-9):
            raise SchemaError("each setting pair's probabilities must sum to 1")
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "marg_a", np.asarray(self.marg_a, dtype=float))
        object.__setattr__(self, "marg_b", np.asarray(self.marg_b, dtype=float))

    @classmethod
    def from_probabilities(
        cls, mapping: dict[tuple[str, str], np.ndarray]
    ) -> "ProbabilityTable":
        """Build a table from per-setting outcome probability vectors."""
        joints = np.empty((3, 3, 2, 2))
        for k, sa in enumerate(SETTINGS):
            for l, sb in enumerate(SETTINGS):
                if (sa, sb) not in mapping:
                    raise IncompleteGridError(f"missing setting pair {(sa, sb)}")
                probs = np.asarray(mapping[(sa, sb)], dtype=float)
                if probs.shape != (4,):
                    raise SchemaError(f"setting {(sa, sb)} needs 4 probabilities")
                joints[k, l] = probs.reshape(2, 2)
        marg_a = joints.sum(axis=3).mean(axis=1)
        marg_b = joints.sum(axis=2).mean(axis=0)
        return cls(joints=joints, marg_a=marg_a, marg_b=marg_b)

    @classmethod
    def from_counts(cls, records: list[CountsRecord]) -> "ProbabilityTable":
        """Build a table from the nine counts records of one input."""
        mapping = {}
        for rec in records:
            total = sum(rec.counts.values())
            if total <= 0:
                raise SchemaError(f"record {rec.setting} has no counts")
            probs = np.array([rec.counts.get(k, 0) for k in OUTCOME_KEYS], dtype=float)
            mapping[rec.setting] = probs / total
        return cls.from_probabilities(mapping)


def born_table(
    rho: np.ndarray, triad_a: MeasurementTriad, triad_b: MeasurementTriad
) -> ProbabilityTable:
    """Exact outcome table of a state under two local triads."""
    mapping = {}
    for k, sa in enumerate(SETTINGS):
        for l, sb in enumerate(SETTINGS):
            probs = np.empty(4)
            idx = 0
            for siga in (1, -1):
                for sigb in (1, -1):
                    proj = kron(triad_a.projector(k, siga), triad_b.projector(l, sigb))
                    probs[idx] = np.trace(rho @ proj).real
                    idx += 1
            mapping[(sa, sb)] = probs
    return ProbabilityTable.from_probabilities(mapping)


def qst(
    table: ProbabilityTable,
    triad_a: MeasurementTriad,
    triad_b: MeasurementTriad,
) -> np.ndarray:
    """Reconstruct a two-qubit state from a probability table.

    The output always has unit trace and is Hermitian; positivity is only
    guaranteed for exact input data.
    """
    corr = np.einsum("klab,a,b->kl", table.joints, _SIGNS, _SIGNS)
    loc_a = table.marg_a @ _SIGNS
    loc_b = table.marg_b @ _SIGNS
    rho = np.eye(4, dtype=complex)
    for k in range(3):
        rho += loc_a[k] * kron(triad_a.observables[k], np.eye(2))
        rho += loc_b[k] * kron(np.eye(2), triad_b.observables[k])
        for l in range(3):
            rho += corr[k, l] * kron(triad_a.observables[k], triad_b.observables[l])
    return rho / 4


# Expansion of the four one-qubit matrix units |i><j| (flat index i + 2j)
# over the spanning preparations (Z+, Z-, X+, Y+). The off-diagonal units
# need complex weights on the diagonal preparations.
_UNIT_WEIGHTS = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [-(1.0 - 1.0j) / 2, -(1.0 - 1.0j) / 2, 1.0, -1.0j],
        [-(1.0 + 1.0j) / 2, -(1.0 + 1.0j) / 2, 1.0, 1.0j],
        [0.0, 1.0, 0.0, 0.0],
    ],
    dtype=complex,
)


def qpt(outputs: dict[tuple[str, str], np.ndarray]) -> np.ndarray:
    """Assemble the raw process matrix from the 16 reconstructed outputs.

    ``outputs`` maps each spanning preparation label to the reconstructed
    output state. The result is Hermitian for Hermitian inputs but may have
    negative eigenvalues for noisy data; see :func:`physicalize`.
    """
    labels = qpt_input_labels()
    stack = []
    for label in labels:
        if label not in outputs:
            raise MissingInputError(f"missing output for preparation {label}")
        stack.append(np.asarray(outputs[label], dtype=complex))
    out_stack = np.stack(stack)

    chi4 = np.zeros((4, 4, 4, 4), dtype=complex)
    for q in range(16):
        idx, jdx = q % 4, q // 4
        unit_a = (idx >> 1) + 2 * (jdx >> 1)
        unit_b = (idx & 1) + 2 * (jdx & 1)
        weights = np.outer(_UNIT_WEIGHTS[unit_a], _UNIT_WEIGHTS[unit_b]).reshape(16)
        rho_unit = np.tensordot(weights, out_stack, axes=1)
        chi4[idx, :, jdx, :] = rho_unit / 4
    return chi4.reshape(16, 16)


@dataclass(frozen=True)
class QptResult:
    """Raw and physical process matrices with the projection audit trail."""

    chi_raw: np.ndarray
    chi_phys: ProcessMatrix
    ml_distance: float
    method: str = "eigenvalue-clip"


def physicalize(chi_raw: np.ndarray) -> QptResult:
    """Project a raw process matrix onto the physical set.

    Eigenvalues are clipped to zero in the raw matrix's own eigenbasis and
    the result is renormalized to unit trace. ``ml_distance`` records the
    Frobenius distance between the physical and raw matrices.
    """
    chi_raw = require_hermitian(chi_raw, atol=IO_HERMITIAN_ATOL)
    dec = eigh((chi_raw + chi_raw.conj().T) / 2)
    clipped = np.clip(dec.values, 0.0, None)
    total = clipped.sum()
    if total < 1e-12:
        raise ZeroTraceError(
            "no positive spectral weight remains after clipping; cannot renormalize"
        )
    mat = (dec.vectors * (clipped / total)) @ dec.vectors.conj().T
    mat = (mat + mat.conj().T) / 2
    pm = ProcessMatrix(mat, trace_convention=1.0)
    distance = float(np.linalg.norm(pm.chi - chi_raw))
    return QptResult(chi_raw=chi_raw, chi_phys=pm, ml_distance=distance)


def process_fidelity(a: ProcessMatrix, b: ProcessMatrix) -> float:
    """Overlap fidelity between two process matrices."""
    return float(frob_inner(a.chi, b.chi).real)


def reconstruct_process(dataset: TomographyDataset) -> QptResult:
    """Full counts-to-process pipeline for one dataset."""
    dataset.validate()
    triad_a = pauli_triad()
    if dataset.test == "bell":
        triad_b = rotated_triad(*dataset.ur)
    else:
        triad_b = pauli_triad()
    record_map = dataset.record_map()
    outputs = {}
    for label in qpt_input_labels():
        records = [record_map[(label, (sa, sb))] for sa in SETTINGS for sb in SETTINGS]
        table = ProbabilityTable.from_counts(records)
        outputs[label] = qst(table, triad_a, triad_b)
    return physicalize(qpt(outputs))


# ---------------------------------------------------------------------------
# serialization


def _matrix_payload(mat: np.ndarray, trace_convention: float) -> dict:
    entries = [
        [[float(entry.real), float(entry.imag)] for entry in row] for row in mat
    ]
    return {"matrix": entries, "trace_convention": float(trace_convention)}


def _parse_matrix_payload(payload: dict) -> tuple[np.ndarray, float]:
    if not isinstance(payload, dict):
        raise SchemaError("process matrix payload must be an object")
    for key in ("matrix", "trace_convention"):
        if key not in payload:
            raise SchemaError(f"process matrix payload missing field {key!r}")
    rows = payload["matrix"]
    if not isinstance(rows, list) or len(rows) != 16:
        raise SchemaError("matrix must hold 16 rows")
    mat = np.empty((16, 16), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 16:
            raise SchemaError(f"matrix row {i} must hold 16 entries")
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(v, (int, float)) for v in entry)
            ):
                raise SchemaError(
                    f"matrix entry ({i}, {j}) must be a [re, im] pair"
                )
            mat[i, j] = complex(entry[0], entry[1])
    return mat, float(payload["trace_convention"])


def save_process_matrix(pm: ProcessMatrix, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(_matrix_payload(pm.chi, pm.trace_convention), indent=2) + "\n"
    )


def save_hermitian_matrix(
    mat: np.ndarray, trace_convention: float, path: str | Path
) -> None:
    """Store a Hermitian matrix (for example a raw reconstruction)."""
    Path(path).write_text(
        json.dumps(_matrix_payload(np.asarray(mat, dtype=complex), trace_convention), indent=2)
        + "\n"
    )


def load_hermitian_matrix(path: str | Path) -> tuple[np.ndarray, float]:
    """Load a Hermitian matrix payload without positivity checks."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"process matrix file is not valid JSON: {exc}") from exc
    mat, tc = _parse_matrix_payload(payload)
    if not np.allclose(mat, mat.conj().T, atol=IO_HERMITIAN_ATOL, rtol=0.0):
        gap = np.abs(mat - mat.conj().T).max()
        raise NonHermitianError(f"loaded matrix deviates from Hermitian by {gap:.3e}")
    return mat, tc


def load_process_matrix(path: str | Path) -> ProcessMatrix:
    """Load and fully validate a process matrix file."""
    mat, tc = load_hermitian_matrix(path)
    return ProcessMatrix(mat, trace_convention=tc)
