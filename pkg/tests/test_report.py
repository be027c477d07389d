from __future__ import annotations

import math

import numpy as np
import pytest

from corrcap.experiments import ResultRow, export, read_csv_rows
from corrcap.report import FIGURES, render_figures


def sample_rows(n=9):
    rows = []
    for k in range(n):
        lam = 2.0 * math.pi * k / (n - 1)
        s = math.sin(lam / 2.0) ** 2
        rows.append(
            ResultRow(
                lam=lam,
                alpha_steer=s,
                beta_steer=0.46 * s,
                alpha_bell=s,
                beta_bell=0.17 * s,
                f_expt=1.0 - 0.02 * s,
                f_incapable=1.0 - 0.31 * s,
                f_unable=1.0 - 0.14 * s,
                statuses={"alpha_steer": "optimal"},
                gaps={"alpha_steer": 1e-9},
                provenance="exact",
            )
        )
    return rows


def test_render_writes_three_figures(tmp_path):
    out = tmp_path / "figs"
    paths = render_figures(sample_rows(), out)
    assert [p.name for p in paths] == [f"{name}.png" for name in FIGURES]
    for path in paths:
        assert path.exists()
        assert path.stat().st_size > 1000


def test_render_tolerates_nan_series(tmp_path):
    rows = sample_rows(5)
    rows[2] = ResultRow(
        lam=rows[2].lam,
        alpha_steer=float("nan"),
        beta_steer=float("nan"),
        alpha_bell=float("nan"),
        beta_bell=float("nan"),
        f_expt=float("nan"),
        f_incapable=float("nan"),
        f_unable=float("nan"),
        note="row failed",
    )
    paths = render_figures(rows, tmp_path)
    assert all(p.exists() for p in paths)


def test_render_refuses_empty(tmp_path):
    with pytest.raises(ValueError):
        render_figures([], tmp_path)


def test_csv_rows_read_back(tmp_path):
    rows = sample_rows(4)
    path = tmp_path / "rows.csv"
    export(rows, "csv", path)
    back = read_csv_rows(path)
    assert len(back) == 4
    for row, orig in zip(back, rows):
        assert row.lam == pytest.approx(orig.lam, rel=1e-5)
        assert row.beta_steer == pytest.approx(orig.beta_steer, rel=1e-5)
        assert row.worst_status() == "optimal"
    paths = render_figures(back, tmp_path / "from_csv")
    assert all(p.exists() for p in paths)


def test_csv_rows_reject_wrong_header(tmp_path):
    path = tmp_path / "rows.csv"
    path.write_text("lambda,alpha\n0,1\n")
    from corrcap.errors import SchemaError

    with pytest.raises(SchemaError):
        read_csv_rows(path)
