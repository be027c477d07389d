"""Shared fixtures: a session-scoped cache for conic-program solves."""
from __future__ import annotations

import numpy as np
import pytest

from corrcap import quantifiers
from corrcap.channels import ProcessMatrix


def _chi_key(process: ProcessMatrix) -> bytes:
    return np.ascontiguousarray(np.round(process.chi, 12)).tobytes()


@pytest.fixture(scope="session")
def solve_quantifier():
    """Memoized quantifier evaluation shared across test modules.

    Several modules probe the same process at the same settings; solving
    each (kind, measure, process) combination once keeps the suite fast.
    """
    cache: dict[tuple, quantifiers.QuantifierReport] = {}

    def run(process, kind, measure, ur=(0.0, np.pi / 4)):
        key = (
            kind,
            measure,
            _chi_key(process),
            (round(ur[0], 12), round(ur[1], 12)),
        )
        if key not in cache:
            cache[key] = quantifiers.quantify(process, kind, measure, ur=ur)
        return cache[key]

    return run
