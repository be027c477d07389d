"""Circuit construction, exact output probabilities, and shot sampling.

Each experiment runs 144 circuits: the 16 product preparations of the
process-reconstruction grid crossed with the 9 pairs of local measurement
settings. A circuit has four unitary stages: token preparation on both
qubits, the controlled-phase process, an optional frame tilt on the second
qubit (Bell test only), and the basis change before a computational-basis
readout.

With a noise model attached, every stage applies its calibrated gate noise
to each qubit it addresses, whether or not the stage's unitary is trivial
for that qubit, and the final probabilities pass through the per-qubit
readout confusion. The initial state preparation to ``|00>`` is ideal.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .channels import (
    GateUnitary,
    KrausChannel,
    NoiseModel,
    apply_channel,
    calibrated_gate_noise,
    gate,
    lift_single,
    readout_apply,
)
from .errors import IncompleteGridError, SchemaError, ShotMismatchError
from .linalg import kron
from .states import (
    OUTCOME_KEYS,
    QPT_TOKENS,
    SETTINGS,
    qpt_input_labels,
    token_parts,
)

DEFAULT_UR = (0.0, np.pi / 4)

# Gate names in application order (first entry acts first).
_PREP_SEQUENCES = {
    "Z+": ("id",),
    "Z-": ("x",),
    "X+": ("h",),
    "X-": ("h", "z"),
    "Y+": ("h", "s"),
    "Y-": ("h", "sdg"),
}

_MEASURE_SEQUENCES = {"X": ("h",), "Y": ("sdg", "h"), "Z": ("id",)}


def _sequence_matrix(names: tuple[str, ...]) -> np.ndarray:
    mat = np.eye(2, dtype=complex)
    for name in names:
        mat = gate(name).matrix @ mat
    return mat


def prep_unitary(token: str) -> np.ndarray:
    """Unitary taking ``|0>`` to the token's state."""
    return _sequence_matrix(_PREP_SEQUENCES[token])


def measure_unitary(letter: str) -> np.ndarray:
    """Unitary rotating the setting's eigenbasis onto the computational one."""
    return _sequence_matrix(_MEASURE_SEQUENCES[letter])


@dataclass(frozen=True)
class Circuit:
    """One prepared-and-measured configuration of the experiment."""

    input_label: tuple[str, str]
    process: GateUnitary
    bell_rotation: tuple[float, float] | None
    setting: tuple[str, str]
    ordinal: int


def build_circuits(
    test: str, lam: float, ur: tuple[float, float] = DEFAULT_UR
) -> list[Circuit]:
    """All 144 circuits of one test, input-major then setting-major.

    The ordinal runs ``9 * input_index + setting_index`` with settings
    ordered first-party-major over (X, Y, Z).
    """
    if test == "steering":
        rotation = None
    elif test == "bell":
        rotation = (float(ur[0]), float(ur[1]))
    else:
        raise ValueError(f"test must be 'steering' or 'bell', got {test!r}")
    process = gate("cphase", lam)
    circuits = []
    ordinal = 0
    for label in qpt_input_labels():
        for sa in SETTINGS:
            for sb in SETTINGS:
                circuits.append(
                    Circuit(
                        input_label=label,
                        process=process,
                        bell_rotation=rotation,
                        setting=(sa, sb),
                        ordinal=ordinal,
                    )
                )
                ordinal += 1
    return circuits


@lru_cache(maxsize=8)
def _stage_noise(model: NoiseModel) -> dict[str, KrausChannel]:
    one_a = lift_single(calibrated_gate_noise(model, "1q", (0,)), 0)
    one_b = lift_single(calibrated_gate_noise(model, "1q", (1,)), 1)
    return {
        "a": one_a,
        "b": one_b,
        "2q": calibrated_gate_noise(model, "2q", (0, 1)),
    }


def exact_probabilities(circuit: Circuit, noise: NoiseModel | None) -> np.ndarray:
    """Outcome probabilities of a circuit, ordered ``++, +-, -+, --``."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    stage_noise = _stage_noise(noise) if noise is not None else None

    def both_qubit_noise() -> None:
        nonlocal rho
        if stage_noise is not None:
            rho = apply_channel(stage_noise["a"], rho)
            rho = apply_channel(stage_noise["b"], rho)

    # token preparation
    prep = kron(prep_unitary(circuit.input_label[0]), prep_unitary(circuit.input_label[1]))
    rho = prep @ rho @ prep.conj().T
    both_qubit_noise()

    # the process under test
    u = circuit.process.matrix
    rho = u @ rho @ u.conj().T
    if stage_noise is not None:
        rho = apply_channel(stage_noise["2q"], rho)

    # frame tilt on the second qubit (Bell test only)
    if circuit.bell_rotation is not None:
        phi, theta = circuit.bell_rotation
        tilt = kron(np.eye(2), gate("ur", phi, theta).matrix.conj().T)
        rho = tilt @ rho @ tilt.conj().T
        if stage_noise is not None:
            rho = apply_channel(stage_noise["b"], rho)

    # basis change before computational readout
    basis = kron(measure_unitary(circuit.setting[0]), measure_unitary(circuit.setting[1]))
    rho = basis @ rho @ basis.conj().T
    both_qubit_noise()

    probs = np.clip(np.diag(rho).real, 0.0, None)
    if noise is not None:
        probs = readout_apply(tuple(noise.readout), probs)
    return probs


@dataclass(frozen=True)
class CountsRecord:
    """Measured counts of one circuit."""

    input_label: tuple[str, str]
    setting: tuple[str, str]
    shots: int
    counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "input": f"{self.input_label[0]} {self.input_label[1]}",
            "setting": f"{self.setting[0]}{self.setting[1]}",
            "counts": {k: int(self.counts.get(k, 0)) for k in OUTCOME_KEYS},
        }

    @classmethod
    def from_dict(cls, payload: dict, shots: int) -> "CountsRecord":
        try:
            input_field = payload["input"]
            setting_field = payload["setting"]
            counts_field = payload["counts"]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"record missing field: {exc}") from exc
        parts = str(input_field).split()
        if len(parts) != 2:
            raise SchemaError(f"input field must hold two tokens, got {input_field!r}")
        for token in parts:
            try:
                token_parts(token)
            except KeyError as exc:
                raise SchemaError(f"bad input token in {input_field!r}") from exc
        setting = str(setting_field)
        if len(setting) != 2 or any(s not in SETTINGS for s in setting):
            raise SchemaError(f"bad setting {setting_field!r}")
        counts: dict[str, int] = {}
        for key in OUTCOME_KEYS:
            value = counts_field.get(key, 0)
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaError(
                    f"count for {key!r} in record {input_field!r} {setting!r} "
                    f"must be an integer, got {value!r}"
                )
            if value < 0:
                raise SchemaError(
                    f"count for {key!r} in record {input_field!r} {setting!r} "
                    f"is negative"
                )
            counts[key] = value
        unknown = set(counts_field) - set(OUTCOME_KEYS)
        if unknown:
            raise SchemaError(f"unknown outcome keys {sorted(unknown)}")
        return cls(
            input_label=(parts[0], parts[1]),
            setting=(setting[0], setting[1]),
            shots=shots,
            counts=counts,
        )


def sample_counts(
    circuit: Circuit, shots: int, seed: int, noise: NoiseModel | None
) -> CountsRecord:
    """Multinomial counts for one circuit.

    The random stream is derived from ``(seed, circuit.ordinal)``, so a
    circuit's counts do not depend on which other circuits are sampled or
    in which order.
    """
    if shots <= 0:
        raise ValueError(f"shots must be positive, got {shots}")
    probs = exact_probabilities(circuit, noise)
    probs = probs / probs.sum()
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), circuit.ordinal]))
    draws = rng.multinomial(shots, probs)
    return CountsRecord(
        input_label=circuit.input_label,
        setting=circuit.setting,
        shots=shots,
        counts={k: int(n) for k, n in zip(OUTCOME_KEYS, draws)},
    )


@dataclass(frozen=True)
class TomographyDataset:
    """Counts for the full input x setting grid of one test."""

    test: str
    lam: float
    shots: int
    ur: tuple[float, float] | None
    records: tuple[CountsRecord, ...]

    def validate(self) -> None:
        if self.test not in ("steering", "bell"):
            raise SchemaError(f"test must be 'steering' or 'bell', got {self.test!r}")
        if self.test == "bell" and self.ur is None:
            raise SchemaError("bell dataset requires the frame tilt angles")
        if self.test == "steering" and self.ur is not None:
            raise SchemaError("steering dataset must not carry frame tilt angles")
        seen: dict[tuple, CountsRecord] = {}
        for rec in self.records:
            key = (rec.input_label, rec.setting)
            if key in seen:
                raise SchemaError(f"duplicate record for {key}")
            seen[key] = rec
            if sum(rec.counts.values()) != self.shots:
                raise ShotMismatchError(
                    f"record {rec.input_label} {rec.setting} sums to "
                    f"{sum(rec.counts.values())}, expected {self.shots}"
                )
            if rec.input_label[0] not in QPT_TOKENS or rec.input_label[1] not in QPT_TOKENS:
                raise SchemaError(
                    f"input {rec.input_label} is not on the reconstruction grid"
                )
        for label in qpt_input_labels():
            for sa in SETTINGS:
                for sb in SETTINGS:
                    if (label, (sa, sb)) not in seen:
                        raise IncompleteGridError(
                            f"missing record for input "
                            f"'{label[0]} {label[1]}' setting '{sa}{sb}'"
                        )

    def record_map(self) -> dict[tuple, CountsRecord]:
        return {(rec.input_label, rec.setting): rec for rec in self.records}

    def to_dict(self) -> dict:
        payload: dict = {
            "test": self.test,
            "lambda": self.lam,
            "shots": self.shots,
        }
        if self.ur is not None:
            payload["ur"] = {"phi": self.ur[0], "theta": self.ur[1]}
        payload["records"] = [rec.to_dict() for rec in self.records]
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "TomographyDataset":
        for key in ("test", "lambda", "shots", "records"):
            if key not in payload:
                raise SchemaError(f"dataset missing field {key!r}")
        shots = payload["shots"]
        if isinstance(shots, bool) or not isinstance(shots, int) or shots <= 0:
            raise SchemaError(f"shots must be a positive integer, got {shots!r}")
        ur = None
        if "ur" in payload:
            block = payload["ur"]
            if not isinstance(block, dict) or set(block) != {"phi", "theta"}:
                raise SchemaError(f"ur block must hold phi and theta, got {block!r}")
            ur = (float(block["phi"]), float(block["theta"]))
        records = tuple(
            CountsRecord.from_dict(rec, shots) for rec in payload["records"]
        )
        return cls(
            test=str(payload["test"]),
            lam=float(payload["lambda"]),
            shots=shots,
            ur=ur,
            records=records,
        )


def simulate_dataset(
    test: str,
    lam: float,
    shots: int,
    seed: int,
    noise: NoiseModel | None,
    ur: tuple[float, float] = DEFAULT_UR,
) -> TomographyDataset:
    """Sample counts for every circuit of one test."""
    circuits = build_circuits(test, lam, ur)
    records = tuple(sample_counts(c, shots, seed, noise) for c in circuits)
    return TomographyDataset(
        test=test,
        lam=float(lam),
        shots=shots,
        ur=circuits[0].bell_rotation,
        records=records,
    )


def save_dataset(ds: TomographyDataset, path: str | Path) -> None:
    Path(path).write_text(json.dumps(ds.to_dict(), indent=2) + "\n")


def load_dataset(path: str | Path) -> TomographyDataset:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"counts file is not valid JSON: {exc}") from exc
    ds = TomographyDataset.from_dict(payload)
    ds.validate()
    return ds
