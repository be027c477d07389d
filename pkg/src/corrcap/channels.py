"""Gates, Kraus channels, process matrices, and hardware noise models.

Process matrices use the matrix-unit operator basis: for dimension ``d`` the
basis element ``E_q`` is the unit ``|i><j|`` with ``i = q % d`` and
``j = q // d`` (column-major, matching column-major vectorization), and a
channel acts as ``rho -> d * sum_qr chi[q, r] E_q rho E_r^dagger``. With
this normalization a trace-preserving channel has ``tr(chi) = 1`` and the
identity channel is the rank-one matrix ``v v^dagger / d**2`` whose vector
``v`` is one on the diagonal units.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from itertools import product
from pathlib import Path

import numpy as np

from .constants import HERMITIAN_ATOL, PSD_ATOL
from .errors import (
    DimMismatchError,
    InvalidProbabilityError,
    InvalidTimeError,
    NonPhysicalInputError,
    UnknownGateError,
)
from .linalg import kron, require_hermitian
from .states import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, rotation_matrix

# ---------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class GateUnitary:
    """A named unitary with the parameter values it was built from."""

    name: str
    params: tuple[float, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex)
        dim = mat.shape[0]
        if mat.shape != (dim, dim):
            raise DimMismatchError(f"gate matrix must be square, got {mat.shape}")
        if not np.allclose(mat.conj().T @ mat, np.eye(dim), atol=1e-10):
            raise ValueError(f"gate {self.name!r} is not unitary")
        object.__setattr__(self, "matrix", mat)


def _cphase(lam: float) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * lam)])


def _rx(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-1j * angle / 2), np.exp(1j * angle / 2)])


_FIXED_GATES = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.diag([1.0, 1.0j]),
    "sdg": np.diag([1.0, -1.0j]),
    "x": PAULI_X,
    "y": PAULI_Y,
    "z": PAULI_Z,
    "id": PAULI_I,
}

_PARAM_GATES = {
    "cphase": (1, _cphase),
    "ur": (2, rotation_matrix),
    "rx": (1, _rx),
    "rz": (1, _rz),
}


def gate(name: str, *params: float) -> GateUnitary:
    """Build a gate by name.

    Known names: ``cphase(lam)``, ``ur(phi, theta)``, ``rx(angle)``,
    ``rz(angle)``, and the fixed gates ``h``, ``s``, ``sdg``, ``x``, ``y``,
    ``z``, ``id``.
    """
    if name in _FIXED_GATES:
        if params:
            raise UnknownGateError(f"gate {name!r} takes no parameters")
        return GateUnitary(name, (), _FIXED_GATES[name])
    if name in _PARAM_GATES:
        arity, builder = _PARAM_GATES[name]
        if len(params) != arity:
            raise UnknownGateError(
                f"gate {name!r} takes {arity} parameter(s), got {len(params)}"
            )
        return GateUnitary(name, tuple(float(p) for p in params), builder(*params))
    raise UnknownGateError(f"unknown gate {name!r}")


# ---------------------------------------------------------------------------
# Kraus channels


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive trace-preserving map given by Kraus operators."""

    ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(k, dtype=complex) for k in self.ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise DimMismatchError("Kraus operators must share a square shape")
        total = sum(k.conj().T @ k for k in ops)
        if not np.allclose(total, np.eye(dim), atol=1e-8):
            gap = np.abs(total - np.eye(dim)).max()
            raise ValueError(f"Kraus operators are not trace preserving ({gap:.3e})")
        object.__setattr__(self, "ops", ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]


def unitary_channel(u: np.ndarray | GateUnitary) -> KrausChannel:
    """Wrap a unitary as a single-Kraus channel."""
    mat = u.matrix if isinstance(u, GateUnitary) else np.asarray(u, dtype=complex)
    return KrausChannel((mat,))


def apply_channel(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Apply a Kraus channel to a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for k in ch.ops:
        out += k @ rho @ k.conj().T
    return out


def kraus_compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """Channel running ``first`` and then ``second``."""
    ops = tuple(b @ a for b in second.ops for a in first.ops)
    return KrausChannel(ops)


def kraus_tensor(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """Tensor product channel, ``a`` on the first factor."""
    return KrausChannel(tuple(kron(ka, kb) for ka in a.ops for kb in b.ops))


def lift_single(ch: KrausChannel, qubit: int) -> KrausChannel:
    """Embed a one-qubit channel into the two-qubit space."""
    if ch.dim != 2:
        raise DimMismatchError("lift_single expects a one-qubit channel")
    if qubit == 0:
        return KrausChannel(tuple(kron(k, PAULI_I) for k in ch.ops))
    if qubit == 1:
        return KrausChannel(tuple(kron(PAULI_I, k) for k in ch.ops))
    raise ValueError(f"qubit index must be 0 or 1, got {qubit}")


# ---------------------------------------------------------------------------
# process matrices


@dataclass(frozen=True)
class ProcessMatrix:
    """Validated process matrix in the matrix-unit basis.

    ``trace_convention`` records the trace the matrix is expected to carry
    (1 for trace-preserving processes). Construction rejects matrices that
    are not Hermitian, not positive semidefinite within tolerance, or whose
    trace disagrees with the convention.
    """

    chi: np.ndarray
    trace_convention: float = 1.0

    def __post_init__(self) -> None:
        chi = require_hermitian(self.chi, atol=1e-8)
        chi = (chi + chi.conj().T) / 2
        eigmin = float(np.linalg.eigvalsh(chi).min())
        if eigmin < -PSD_ATOL:
            raise NonPhysicalInputError(
                f"process matrix has negative eigenvalue {eigmin:.3e}"
            )
        tr = np.trace(chi).real
        if abs(tr - self.trace_convention) > 1e-8:
            raise NonPhysicalInputError(
                f"trace {tr!r} does not match trace convention "
                f"{self.trace_convention!r}"
            )
        object.__setattr__(self, "chi", chi)

    @property
    def dim(self) -> int:
        return int(round(math.sqrt(self.chi.shape[0])))


def chi_to_super(chi: np.ndarray) -> np.ndarray:
    """Superoperator matrix acting on column-major vectorized states."""
    chi = np.asarray(chi, dtype=complex)
    d = int(round(math.sqrt(chi.shape[0])))
    return d * chi.reshape(d, d, d, d).transpose(3, 1, 2, 0).reshape(d * d, d * d)


def super_to_chi(sup: np.ndarray) -> np.ndarray:
    """Inverse of :func:`chi_to_super`."""
    sup = np.asarray(sup, dtype=complex)
    d = int(round(math.sqrt(sup.shape[0])))
    return sup.reshape(d, d, d, d).transpose(3, 1, 2, 0).reshape(d * d, d * d) / d


def process_from_kraus(ch: KrausChannel) -> ProcessMatrix:
    """Process matrix of a Kraus channel.

    In the matrix-unit basis the expansion coefficients of an operator are
    its column-major vectorization, so ``chi`` is a sum of outer products of
    vectorized Kraus operators divided by the dimension.
    """
    d = ch.dim
    chi = np.zeros((d * d, d * d), dtype=complex)
    for k in ch.ops:
        v = k.flatten(order="F")
        chi += np.outer(v, v.conj())
    return ProcessMatrix(chi / d)


def apply_process(pm: ProcessMatrix | np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Apply a process matrix to a density matrix."""
    chi = pm.chi if isinstance(pm, ProcessMatrix) else np.asarray(pm, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if chi.shape != (d * d, d * d):
        raise DimMismatchError(
            f"process matrix {chi.shape} does not act on states of dim {d}"
        )
    out = chi_to_super(chi) @ rho.flatten(order="F")
    return out.reshape((d, d), order="F")


def compose(second: ProcessMatrix, first: ProcessMatrix) -> ProcessMatrix:
    """Process matrix of ``first`` followed by ``second``."""
    sup = chi_to_super(second.chi) @ chi_to_super(first.chi)
    chi = super_to_chi(sup)
    tr = float(np.trace(chi).real)
    return ProcessMatrix(chi, trace_convention=tr)


def ideal_process(lam: float) -> ProcessMatrix:
    """Process matrix of the ideal controlled-phase gate at angle ``lam``."""
    return process_from_kraus(unitary_channel(gate("cphase", lam)))


# ---------------------------------------------------------------------------
# noise channels


def amplitude_damping(t: float, t1: float) -> KrausChannel:
    """Amplitude damping after waiting ``t`` with relaxation constant ``t1``.

    Both arguments must use the same time unit; only the ratio enters. The
    decay strength is ``gamma = 1 - exp(-t / t1)`` and the Bloch action is
    ``(x, y, z) -> (x sqrt(1-gamma), y sqrt(1-gamma), z (1-gamma) + gamma)``.
    """
    if t < 0:
        raise InvalidTimeError(f"duration must be nonnegative, got {t}")
    if t1 <= 0:
        raise InvalidTimeError(f"t1 must be positive, got {t1}")
    gamma = -math.expm1(-t / t1)
    k0 = np.diag([1.0, math.sqrt(1.0 - gamma)])
    k1 = np.zeros((2, 2))
    k1[0, 1] = math.sqrt(gamma)
    return KrausChannel((k0, k1))


def phase_damping(t: float, t2: float) -> KrausChannel:
    """Pure dephasing after waiting ``t`` with coherence constant ``t2``.

    The dephasing strength is ``lam = 1 - exp(-2 t / t2)``, shrinking the
    equatorial Bloch components by ``sqrt(1 - lam)`` and leaving z alone.
    """
    if t < 0:
        raise InvalidTimeError(f"duration must be nonnegative, got {t}")
    if t2 <= 0:
        raise InvalidTimeError(f"t2 must be positive, got {t2}")
    lam = -math.expm1(-2.0 * t / t2)
    q = (1.0 - math.sqrt(1.0 - lam)) / 2.0
    return KrausChannel((math.sqrt(1.0 - q) * PAULI_I, math.sqrt(q) * PAULI_Z))


def thermal_relaxation(t: float, t1: float, t2: float) -> KrausChannel:
    """Amplitude damping followed by pure dephasing for the same duration."""
    return kraus_compose(phase_damping(t, t2), amplitude_damping(t, t1))


def depolarizing(p: float, n_qubits: int) -> KrausChannel:
    """Depolarizing channel ``rho -> (1 - p) rho + p I / d`` on ``n_qubits``."""
    if not 0.0 <= p <= 1.0:
        raise InvalidProbabilityError(f"depolarizing strength must be in [0, 1], got {p}")
    d = 2**n_qubits
    ops: list[np.ndarray] = []
    singles = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
    for combo in product(range(4), repeat=n_qubits):
        op = np.array([[1.0 + 0j]])
        for c in combo:
            op = kron(op, singles[c])
        if all(c == 0 for c in combo):
            ops.append(math.sqrt(1.0 - p + p / d**2) * op)
        else:
            ops.append(math.sqrt(p) / d * op)
    return KrausChannel(tuple(ops))


def average_gate_error(ch: KrausChannel) -> float:
    """Average infidelity of a channel relative to the identity.

    Uses the entanglement fidelity ``sum_i |tr K_i|^2 / d^2`` and the
    standard conversion to the Haar-average state fidelity.
    """
    d = ch.dim
    f_pro = sum(abs(np.trace(k)) ** 2 for k in ch.ops) / d**2
    return float(1.0 - (d * f_pro + 1.0) / (d + 1.0))


# ---------------------------------------------------------------------------
# readout


@dataclass(frozen=True)
class ReadoutError:
    """Classical bit-flip confusion for one qubit's readout.

    ``p01`` is the probability of reporting 0 when the true outcome is 1,
    ``p10`` of reporting 1 when the true outcome is 0.
    """

    p01: float
    p10: float

    def __post_init__(self) -> None:
        for name, value in (("p01", self.p01), ("p10", self.p10)):
            if not 0.0 <= value <= 1.0:
                raise InvalidProbabilityError(f"{name} must be in [0, 1], got {value}")

    def confusion(self) -> np.ndarray:
        """Column-stochastic confusion matrix (columns are true outcomes)."""
        return np.array([[1.0 - self.p10, self.p01], [self.p10, 1.0 - self.p01]])


def readout_apply(
    err: ReadoutError | tuple[ReadoutError, ReadoutError], probs: np.ndarray
) -> np.ndarray:
    """Push outcome probabilities through per-qubit readout confusion.

    A length-2 vector takes a single :class:`ReadoutError`; a length-4
    vector takes a pair, first qubit first.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.shape == (2,):
        if not isinstance(err, ReadoutError):
            raise DimMismatchError("single-qubit probabilities need a single error")
        return err.confusion() @ probs
    if probs.shape == (4,):
        try:
            ea, eb = err
        except TypeError:
            raise DimMismatchError(
                "two-qubit probabilities need a pair of readout errors"
            ) from None
        return np.kron(ea.confusion(), eb.confusion()) @ probs
    raise DimMismatchError(f"expected 2 or 4 probabilities, got shape {probs.shape}")


# ---------------------------------------------------------------------------
# noise models


@dataclass(frozen=True)
class NoiseModel:
    """Device calibration snapshot for a two-qubit experiment.

    Index 0 is the first (control) qubit, index 1 the second. Times are in
    the units their field names declare; only ratios of compatible fields
    enter the channels.
    """

    t1_us: tuple[float, float]
    t2_us: tuple[float, float]
    gate_time_1q_ns: float
    gate_time_2q_ns: float
    gate_error_1q: tuple[float, float]
    gate_error_2q: float
    readout: tuple[ReadoutError, ReadoutError]

    def __post_init__(self) -> None:
        object.__setattr__(self, "t1_us", tuple(float(v) for v in self.t1_us))
        object.__setattr__(self, "t2_us", tuple(float(v) for v in self.t2_us))
        object.__setattr__(
            self, "gate_error_1q", tuple(float(v) for v in self.gate_error_1q)
        )
        object.__setattr__(self, "readout", tuple(self.readout))
        for name in ("t1_us", "t2_us", "gate_error_1q"):
            if len(getattr(self, name)) != 2:
                raise DimMismatchError(f"{name} must list exactly two qubits")
        if len(self.readout) != 2:
            raise DimMismatchError("readout must list exactly two qubits")
        for q in range(2):
            t1, t2 = self.t1_us[q], self.t2_us[q]
            if t1 <= 0 or t2 <= 0:
                raise InvalidTimeError(f"qubit {q}: T1 and T2 must be positive")
            if t2 > 2 * t1 * (1 + 1e-12):
                raise InvalidTimeError(
                    f"qubit {q}: T2 = {t2} exceeds 2 * T1 = {2 * t1}"
                )
        if self.gate_time_1q_ns < 0 or self.gate_time_2q_ns < 0:
            raise InvalidTimeError("gate times must be nonnegative")
        for e in (*self.gate_error_1q, self.gate_error_2q):
            if not 0.0 <= e <= 1.0:
                raise InvalidProbabilityError(f"gate error must be in [0, 1], got {e}")

    def to_dict(self) -> dict:
        return {
            "t1_us": list(self.t1_us),
            "t2_us": list(self.t2_us),
            "gate_time_1q_ns": self.gate_time_1q_ns,
            "gate_time_2q_ns": self.gate_time_2q_ns,
            "gate_error_1q": list(self.gate_error_1q),
            "gate_error_2q": self.gate_error_2q,
            "readout": [{"p01": r.p01, "p10": r.p10} for r in self.readout],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "NoiseModel":
        try:
            readout = tuple(
                ReadoutError(p01=float(r["p01"]), p10=float(r["p10"]))
                for r in payload["readout"]
            )
            return cls(
                t1_us=tuple(payload["t1_us"]),
                t2_us=tuple(payload["t2_us"]),
                gate_time_1q_ns=float(payload["gate_time_1q_ns"]),
                gate_time_2q_ns=float(payload["gate_time_2q_ns"]),
                gate_error_1q=tuple(payload["gate_error_1q"]),
                gate_error_2q=float(payload["gate_error_2q"]),
                readout=readout,
            )
        except (KeyError, TypeError) as exc:
            raise DimMismatchError(f"malformed noise model payload: {exc}") from exc


def save_noise_model(model: NoiseModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


def load_noise_model(path: str | Path) -> NoiseModel:
    return NoiseModel.from_dict(json.loads(Path(path).read_text()))


_PRESETS = {"santiago", "aspen9", "aspen_m1"}


def preset_noise_model(name: str) -> NoiseModel:
    """Load one of the shipped device calibration files."""
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
    payload = resources.files("corrcap").joinpath("data", f"{name}.json").read_text()
    return NoiseModel.from_dict(json.loads(payload))


def relaxation_channel(model: NoiseModel, qubit: int, duration_ns: float) -> KrausChannel:
    """Thermal relaxation on one qubit for a duration in nanoseconds."""
    t_us = duration_ns / 1000.0
    return thermal_relaxation(t_us, model.t1_us[qubit], model.t2_us[qubit])


def calibrated_gate_noise(
    model: NoiseModel, gate_kind: str, qubits: tuple[int, ...]
) -> KrausChannel:
    """Depolarizing-plus-relaxation channel matching a reported gate error.

    The depolarizing strength is calibrated so the channel's average gate
    error equals the reported one: with relaxation error ``e_R`` and target
    ``e``, the exact relation ``e(p) = (1 - p) e_R + p (1 - 1/d)`` gives
    ``p = (e - e_R) / (1 - 1/d - e_R)``, clamped to [0, 1]. When relaxation
    alone already exceeds the reported error the clamp makes the channel
    pure relaxation.
    """
    if gate_kind == "1q":
        (q,) = qubits
        relax = relaxation_channel(model, q, model.gate_time_1q_ns)
        target = model.gate_error_1q[q]
        n_qubits = 1
    elif gate_kind == "2q":
        qa, qb = qubits
        relax = kraus_tensor(
            relaxation_channel(model, qa, model.gate_time_2q_ns),
            relaxation_channel(model, qb, model.gate_time_2q_ns),
        )
        target = model.gate_error_2q
        n_qubits = 2
    else:
        raise ValueError(f"gate_kind must be '1q' or '2q', got {gate_kind!r}")
    d = 2**n_qubits
    e_relax = average_gate_error(relax)
    p = (target - e_relax) / (1.0 - 1.0 / d - e_relax)
    p = min(max(p, 0.0), 1.0)
    return kraus_compose(relax, depolarizing(p, n_qubits))
