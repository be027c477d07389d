"""Command-line entry point: one verb per pipeline stage.

``simulate`` samples counts, ``tomo`` reconstructs a process matrix from
counts, ``quantify`` and ``fidelity`` run the conic programs, ``sweep``
chains the whole pipeline over a phase grid, and ``report`` renders
figures from saved sweep rows. Counts from real hardware enter the
pipeline at ``tomo`` as long as they match the counts JSON schema.

Exit codes: 0 on success with every solve at full status, 1 on a
pipeline or file error, 2 on bad usage, 3 when everything ran but some
solve finished below full status.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .channels import ideal_process, load_noise_model, preset_noise_model
from .errors import CorrcapError, SchemaError
from .experiments import (
    DEFAULT_GRID,
    SweepConfig,
    all_optimal,
    export,
    ingest_counts,
    load_rows,
    read_csv_rows,
    run_sweep,
)
from .quantifiers import quantify
from .report import render_figures
from .simulator import DEFAULT_UR, simulate_dataset, save_dataset
from .tomography import (
    load_process_matrix,
    process_fidelity,
    reconstruct_process,
    save_hermitian_matrix,
    save_process_matrix,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_NONOPTIMAL = 3


def parse_phase(text: str) -> float:
    """Parse a phase in radians; a trailing ``pi`` scales the prefix.

    Accepted forms: ``1.5708``, ``pi``, ``0.5pi``, ``-0.25pi``.
    """
    cleaned = text.strip().lower().replace(" ", "")
    if cleaned.endswith("pi"):
        head = cleaned[:-2]
        if head in ("", "+"):
            factor = 1.0
        elif head == "-":
            factor = -1.0
        else:
            factor = float(head)
        return factor * math.pi
    return float(cleaned)


def parse_phase_list(text: str) -> list[float]:
    """Parse a comma-separated list of phases."""
    phases = [parse_phase(part) for part in text.split(",") if part.strip()]
    if not phases:
        raise ValueError("phase list is empty")
    return phases


def _resolve_noise(text: str | None):
    if text is None:
        return None
    path = Path(text)
    if path.exists():
        return load_noise_model(path)
    try:
        return preset_noise_model(text)
    except KeyError as exc:
        raise SchemaError(
            f"--noise {text!r} is neither a noise JSON file nor a preset name"
        ) from exc


def _add_frame_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--ur-phi",
        type=parse_phase,
        default=DEFAULT_UR[0],
        help="azimuth of the Bell-test frame tilt (default 0)",
    )
    sub.add_argument(
        "--ur-theta",
        type=parse_phase,
        default=DEFAULT_UR[1],
        help="polar angle of the Bell-test frame tilt (default 0.25pi)",
    )


def _report_exit(statuses: list[str]) -> int:
    return EXIT_OK if all(s == "optimal" for s in statuses) else EXIT_NONOPTIMAL


def _cmd_simulate(args: argparse.Namespace) -> int:
    noise = _resolve_noise(args.noise)
    dataset = simulate_dataset(
        args.test,
        args.lam,
        args.shots,
        args.seed,
        noise,
        (args.ur_phi, args.ur_theta),
    )
    save_dataset(dataset, args.out)
    print(
        f"wrote {args.out}: {len(dataset.records)} records "
        f"at {dataset.shots} shots"
    )
    return EXIT_OK


def _cmd_tomo(args: argparse.Namespace) -> int:
    dataset = ingest_counts(args.infile)
    result = reconstruct_process(dataset)
    save_process_matrix(result.chi_phys, args.out)
    if args.raw_out:
        save_hermitian_matrix(result.chi_raw, 1.0, args.raw_out)
    print(
        f"wrote {args.out} "
        f"(distance from raw estimate {result.ml_distance:.3g})"
    )
    return EXIT_OK


def _quantifier_plan(test: str) -> list[tuple[str, str, str]]:
    plan = []
    if test in ("steering", "both"):
        plan.append(("alpha_steer", "steering", "composition"))
        plan.append(("beta_steer", "steering", "robustness"))
    if test in ("bell", "both"):
        plan.append(("alpha_bell", "bell", "composition"))
        plan.append(("beta_bell", "bell", "robustness"))
    return plan


def _cmd_quantify(args: argparse.Namespace) -> int:
    pm = load_process_matrix(args.infile)
    ur = (args.ur_phi, args.ur_theta)
    payload = {}
    for key, kind, measure in _quantifier_plan(args.test):
        report = quantify(pm, kind, measure, ur=ur)
        payload[key] = report.to_dict()
        print(
            f"{key} = {report.value:.6f} "
            f"({report.status}, gap {report.gap:.3g})"
        )
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return _report_exit([entry["status"] for entry in payload.values()])


def _cmd_fidelity(args: argparse.Namespace) -> int:
    target = ideal_process(args.lam)
    ur = (args.ur_phi, args.ur_theta)
    incapable = quantify(target, "steering", "fidelity")
    unable = quantify(target, "bell", "fidelity", ur=ur)
    payload: dict = {
        "lambda": args.lam,
        "f_incapable": incapable.to_dict(),
        "f_unable": unable.to_dict(),
    }
    print(
        f"f_incapable = {incapable.value:.6f} ({incapable.status}, "
        f"gap {incapable.gap:.3g})"
    )
    print(
        f"f_unable = {unable.value:.6f} ({unable.status}, "
        f"gap {unable.gap:.3g})"
    )
    if args.infile:
        pm = load_process_matrix(args.infile)
        f_expt = process_fidelity(pm, target)
        payload["f_expt"] = f_expt
        print(f"f_expt = {f_expt:.6f}")
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return _report_exit([incapable.status, unable.status])


def _cmd_sweep(args: argparse.Namespace) -> int:
    tests = ("steering", "bell") if args.test == "both" else (args.test,)
    cfg = SweepConfig(
        lambdas=tuple(args.lambdas) if args.lambdas else DEFAULT_GRID,
        tests=tests,
        shots=args.shots,
        seed=args.seed,
        noise=_resolve_noise(args.noise),
        exact=args.exact,
        ur=(args.ur_phi, args.ur_theta),
    )
    rows = run_sweep(cfg)
    export(rows, args.format, args.out)
    for row in rows:
        print(f"lambda = {row.lam / math.pi:.4g}pi: {row.worst_status()}")
    print(f"wrote {args.out}")
    if args.report_dir:
        for path in render_figures(rows, args.report_dir):
            print(f"wrote {path}")
    if any(row.note for row in rows):
        return EXIT_ERROR
    return EXIT_OK if all_optimal(rows) else EXIT_NONOPTIMAL


def _cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.infile)
    rows = load_rows(path) if path.suffix == ".json" else read_csv_rows(path)
    for figure in render_figures(rows, args.out_dir):
        print(f"wrote {figure}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrcap",
        description=(
            "Quantify how strongly a two-qubit process can generate "
            "steering and Bell correlations."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="sample counts for one test")
    simulate.add_argument(
        "--test", choices=("steering", "bell"), required=True
    )
    simulate.add_argument(
        "--lambda", dest="lam", type=parse_phase, required=True,
        help="controlled-phase shift, e.g. 'pi' or '0.5pi'",
    )
    simulate.add_argument("--shots", type=int, default=8192)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument(
        "--noise", default=None, help="noise JSON file or preset name"
    )
    simulate.add_argument("--out", required=True)
    _add_frame_flags(simulate)
    simulate.set_defaults(handler=_cmd_simulate)

    tomo = sub.add_parser("tomo", help="reconstruct a process from counts")
    tomo.add_argument("--in", dest="infile", required=True)
    tomo.add_argument("--out", required=True)
    tomo.add_argument(
        "--raw-out", default=None,
        help="also store the raw linear-inversion estimate",
    )
    tomo.set_defaults(handler=_cmd_tomo)

    quant = sub.add_parser(
        "quantify", help="composition and robustness of a stored process"
    )
    quant.add_argument("--in", dest="infile", required=True)
    quant.add_argument(
        "--test", choices=("steering", "bell", "both"), default="both"
    )
    quant.add_argument("--out", default=None)
    _add_frame_flags(quant)
    quant.set_defaults(handler=_cmd_quantify)

    fidelity = sub.add_parser(
        "fidelity", help="classical-target fidelities of an ideal phase gate"
    )
    fidelity.add_argument(
        "--lambda", dest="lam", type=parse_phase, required=True
    )
    fidelity.add_argument(
        "--in", dest="infile", default=None,
        help="also score this stored process against the target",
    )
    fidelity.add_argument("--out", default=None)
    _add_frame_flags(fidelity)
    fidelity.set_defaults(handler=_cmd_fidelity)

    sweep = sub.add_parser("sweep", help="full pipeline over a phase grid")
    sweep.add_argument(
        "--lambdas", type=parse_phase_list, default=None,
        help="comma-separated phases (default: nine points over one period)",
    )
    sweep.add_argument(
        "--test", choices=("steering", "bell", "both"), default="both"
    )
    sweep.add_argument("--shots", type=int, default=8192)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument(
        "--noise", default=None, help="noise JSON file or preset name"
    )
    sweep.add_argument(
        "--exact", action="store_true",
        help="reconstruct from exact probabilities instead of sampling",
    )
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument(
        "--report-dir", default=None, help="also render figures here"
    )
    _add_frame_flags(sweep)
    sweep.set_defaults(handler=_cmd_sweep)

    report = sub.add_parser("report", help="render figures from saved rows")
    report.add_argument("--in", dest="infile", required=True)
    report.add_argument("--out-dir", required=True)
    report.set_defaults(handler=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CorrcapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
