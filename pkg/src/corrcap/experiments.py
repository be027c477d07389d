"""Sweep harness: from datasets to quantifier tables over a phase grid.

One row of a sweep holds the six capability numbers of a single phase
point: both deficit measures, both robustness measures, and the three
fidelities (reconstructed-versus-ideal plus the two classical-target
ones). Rows serialize to CSV for plotting and to JSON for lossless
roundtrips.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import NoiseModel, ideal_process, load_noise_model
from .errors import CorrcapError, IncompleteGridError, SchemaError
from .quantifiers import quantify
from .simulator import (
    DEFAULT_UR,
    TomographyDataset,
    build_circuits,
    exact_probabilities,
    load_dataset,
    simulate_dataset,
)
from .states import pauli_triad, rotated_triad
from .tomography import (
    ProbabilityTable,
    QptResult,
    physicalize,
    process_fidelity,
    qpt,
    qst,
    reconstruct_process,
)

TESTS = ("steering", "bell")

# Nine evenly spaced phases covering one full period.
DEFAULT_GRID = tuple(float(x) for x in np.linspace(0.0, 2.0 * np.pi, 9))

# Common shot counts for quick, standard, and high-precision runs. These
# are documentation, not a constraint; any positive shot number works.
SHOT_PRESETS = (1024, 8192, 81920)

CSV_HEADER = (
    "lambda,alpha_steer,beta_steer,alpha_bell,beta_bell,"
    "f_expt,f_incapable,f_unable,status,gap"
)

_STATUS_RANK = {"optimal": 0, "inaccurate": 1, "unbounded": 2, "infeasible": 3}

_ROW_FIELDS = (
    "alpha_steer",
    "beta_steer",
    "alpha_bell",
    "beta_bell",
    "f_expt",
    "f_incapable",
    "f_unable",
)


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: which phases and tests, and how counts are produced.

    ``noise`` accepts a loaded :class:`NoiseModel` or a path to its JSON
    file. With ``exact`` set, sampling is skipped and the reconstruction
    runs on exact outcome probabilities (the infinite-shot limit).
    """

    lambdas: tuple[float, ...] = DEFAULT_GRID
    tests: tuple[str, ...] = TESTS
    shots: int = 8192
    seed: int = 0
    noise: NoiseModel | None = None
    exact: bool = False
    ur: tuple[float, float] = DEFAULT_UR

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "lambdas", tuple(float(x) for x in self.lambdas)
        )
        object.__setattr__(self, "tests", tuple(self.tests))
        if not self.lambdas:
            raise ValueError("lambda grid must be nonempty")
        if not self.tests:
            raise ValueError("at least one test kind is required")
        for test in self.tests:
            if test not in TESTS:
                raise ValueError(
                    f"test must be one of {TESTS}, got {test!r}"
                )
        if self.shots < 1:
            raise ValueError(f"shots must be at least 1, got {self.shots}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        if isinstance(self.noise, (str, Path)):
            object.__setattr__(self, "noise", load_noise_model(self.noise))


@dataclass(frozen=True)
class ResultRow:
    """Quantifier values at one phase point.

    ``statuses`` and ``gaps`` are keyed by quantifier field name; the
    reconstructed-fidelity field has no solver behind it and therefore no
    entry. A row whose pipeline raised is kept with NaN values and the
    error message in ``note``.
    """

    lam: float
    alpha_steer: float
    beta_steer: float
    alpha_bell: float
    beta_bell: float
    f_expt: float
    f_incapable: float
    f_unable: float
    statuses: dict[str, str] = field(default_factory=dict)
    gaps: dict[str, float] = field(default_factory=dict)
    provenance: str = "simulated"
    note: str = ""

    def worst_status(self) -> str:
        """Single summary status: the worst across all solves in the row."""
        if self.note or not self.statuses:
            return "error"
        return max(self.statuses.values(), key=lambda s: _STATUS_RANK.get(s, 4))

    def max_gap(self) -> float:
        """Largest certification gap in the row; NaN if nothing solved."""
        return max(self.gaps.values(), default=float("nan"))

    def to_dict(self) -> dict:
        payload: dict = {"lambda": self.lam}
        for name in _ROW_FIELDS:
            value = getattr(self, name)
            payload[name] = None if math.isnan(value) else value
        payload["statuses"] = dict(self.statuses)
        payload["gaps"] = {k: float(v) for k, v in self.gaps.items()}
        payload["provenance"] = self.provenance
        payload["note"] = self.note
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "ResultRow":
        for key in ("lambda", *_ROW_FIELDS, "statuses", "gaps", "provenance"):
            if key not in payload:
                raise SchemaError(f"result row missing field {key!r}")
        values = {
            name: float("nan") if payload[name] is None else float(payload[name])
            for name in _ROW_FIELDS
        }
        return cls(
            lam=float(payload["lambda"]),
            statuses={str(k): str(v) for k, v in payload["statuses"].items()},
            gaps={str(k): float(v) for k, v in payload["gaps"].items()},
            provenance=str(payload["provenance"]),
            note=str(payload.get("note", "")),
            **values,
        )


def dataset_seed(seed: int, row_index: int, test: str) -> int:
    """Per-dataset seed of a sweep, derivable outside the sweep itself.

    Feeding this value to :func:`corrcap.simulator.simulate_dataset`
    regenerates exactly the dataset the sweep used at that row.
    """
    stream = np.random.SeedSequence([seed, row_index, TESTS.index(test)])
    return int(stream.generate_state(1)[0])


def exact_reconstruction(
    test: str,
    lam: float,
    noise: NoiseModel | None,
    ur: tuple[float, float] = DEFAULT_UR,
) -> QptResult:
    """Run the tomography pipeline on exact outcome probabilities.

    The infinite-shot limit of the sampled pipeline: identical circuit
    list and estimators, but no counting noise.
    """
    triad_a = pauli_triad()
    triad_b = rotated_triad(*ur) if test == "bell" else pauli_triad()
    tables: dict[tuple[str, str], dict] = {}
    for circuit in build_circuits(test, lam, ur):
        mapping = tables.setdefault(circuit.input_label, {})
        mapping[circuit.setting] = exact_probabilities(circuit, noise)
    outputs = {
        label: qst(ProbabilityTable.from_probabilities(mapping), triad_a, triad_b)
        for label, mapping in tables.items()
    }
    return physicalize(qpt(outputs))


def _assemble_row(
    lam: float,
    ur: tuple[float, float],
    chi_steer: QptResult | None,
    chi_bell: QptResult | None,
    provenance: str,
) -> ResultRow:
    """Solve all applicable quantifiers for one phase point."""
    target = ideal_process(lam)
    values = {name: float("nan") for name in _ROW_FIELDS}
    statuses: dict[str, str] = {}
    gaps: dict[str, float] = {}

    def record(key: str, report) -> None:
        values[key] = report.value
        statuses[key] = report.status
        if report.gap is not None:
            gaps[key] = float(report.gap)

    if chi_steer is not None:
        values["f_expt"] = process_fidelity(chi_steer.chi_phys, target)
        record("alpha_steer", quantify(chi_steer.chi_phys, "steering", "composition"))
        record("beta_steer", quantify(chi_steer.chi_phys, "steering", "robustness"))
    if chi_bell is not None:
        record(
            "alpha_bell",
            quantify(chi_bell.chi_phys, "bell", "composition", ur=ur),
        )
        record("beta_bell", quantify(chi_bell.chi_phys, "bell", "robustness", ur=ur))
    record("f_incapable", quantify(target, "steering", "fidelity"))
    record("f_unable", quantify(target, "bell", "fidelity", ur=ur))
    return ResultRow(
        lam=float(lam),
        statuses=statuses,
        gaps=gaps,
        provenance=provenance,
        **values,
    )


def row_from_datasets(
    steering: TomographyDataset | None,
    bell: TomographyDataset | None,
    provenance: str = "ingested",
) -> ResultRow:
    """Build one result row from reconstructed counts datasets."""
    if steering is None and bell is None:
        raise ValueError("at least one dataset is required")
    lams = {ds.lam for ds in (steering, bell) if ds is not None}
    if len(lams) != 1:
        raise ValueError(f"datasets disagree on the phase: {sorted(lams)}")
    ur = bell.ur if bell is not None else DEFAULT_UR
    chi_steer = reconstruct_process(steering) if steering is not None else None
    chi_bell = reconstruct_process(bell) if bell is not None else None
    return _assemble_row(lams.pop(), ur, chi_steer, chi_bell, provenance)


def _sweep_row(cfg: SweepConfig, row_index: int, lam: float) -> ResultRow:
    chis = {"steering": None, "bell": None}
    for test in cfg.tests:
        if cfg.exact:
            chis[test] = exact_reconstruction(test, lam, cfg.noise, cfg.ur)
        else:
            dataset = simulate_dataset(
                test,
                lam,
                cfg.shots,
                dataset_seed(cfg.seed, row_index, test),
                cfg.noise,
                cfg.ur,
            )
            chis[test] = reconstruct_process(dataset)
    provenance = "exact" if cfg.exact else "simulated"
    return _assemble_row(lam, cfg.ur, chis["steering"], chis["bell"], provenance)


def run_sweep(cfg: SweepConfig) -> list[ResultRow]:
    """Quantify every phase on the grid; rows come back ordered by phase.

    A row whose pipeline raises a toolkit error is flagged (NaN values,
    message in ``note``) rather than aborting the remaining rows.
    """
    rows = []
    for row_index, lam in enumerate(sorted(cfg.lambdas)):
        try:
            rows.append(_sweep_row(cfg, row_index, lam))
        except CorrcapError as exc:
            rows.append(
                ResultRow(
                    lam=float(lam),
                    provenance="exact" if cfg.exact else "simulated",
                    note=f"{type(exc).__name__}: {exc}",
                    **{name: float("nan") for name in _ROW_FIELDS},
                )
            )
    return rows


def ingest_counts(path: str | Path) -> TomographyDataset:
    """Load and validate a counts file, simulator-made or hand-assembled."""
    try:
        return load_dataset(path)
    except IncompleteGridError as exc:
        raise SchemaError(str(exc)) from exc


def _sig6(value: float) -> str:
    return "%.6g" % value


def export(rows: list[ResultRow], fmt: str, path: str | Path) -> None:
    """Write rows as CSV (collapsed status/gap) or JSON (lossless)."""
    if not rows:
        raise ValueError("refusing to export zero rows")
    path = Path(path)
    if fmt == "csv":
        lines = [CSV_HEADER]
        for row in rows:
            cells = [_sig6(row.lam)]
            cells += [_sig6(getattr(row, name)) for name in _ROW_FIELDS]
            cells.append(row.worst_status())
            cells.append(_sig6(row.max_gap()))
            lines.append(",".join(cells))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        payload = [row.to_dict() for row in rows]
        path.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def read_csv_rows(path: str | Path) -> list[ResultRow]:
    """Read back a CSV rows file written by :func:`export`.

    The CSV carries values at six significant digits and collapses the
    per-quantifier statuses and gaps into one column each, so the rows
    come back with a single ``"row"`` entry in those maps; use the JSON
    format when the full detail matters.
    """
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise SchemaError(f"rows CSV must start with the header {CSV_HEADER!r}")
    rows = []
    for index, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 10:
            raise SchemaError(f"line {index} holds {len(cells)} cells, not 10")
        try:
            numbers = [float(cell) for cell in cells[:8]]
            gap = float(cells[9])
        except ValueError as exc:
            raise SchemaError(f"line {index}: {exc}") from exc
        status = cells[8]
        rows.append(
            ResultRow(
                lam=numbers[0],
                **dict(zip(_ROW_FIELDS, numbers[1:])),
                statuses={} if status == "error" else {"row": status},
                gaps={} if math.isnan(gap) else {"row": gap},
                provenance="csv",
                note="imported row failed upstream" if status == "error" else "",
            )
        )
    return rows


def load_rows(path: str | Path) -> list[ResultRow]:
    """Read back a JSON rows file written by :func:`export`."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"rows file is not valid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise SchemaError("rows file must hold a list of row objects")
    return [ResultRow.from_dict(entry) for entry in payload]


def all_optimal(rows: list[ResultRow]) -> bool:
    """True when every row certified at full solver status."""
    return all(row.worst_status() == "optimal" for row in rows)
