"""Shared fixtures: expensive solves are computed once per session."""

from __future__ import annotations

import json
import time
from importlib import resources

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from beltrami_lab.neumann import neumann_solve, truncate_coefficient
from beltrami_lab.radial import catalog_profile, sample_mu

settings.register_profile("lab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")

#: One line per acceptance criterion, filled by ``test_acceptance.py``.
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


#: Wall-clock seconds of each fixture solve, keyed by ``(catalog_id, n)``.
SOLVE_SECONDS: dict = {}


def solve_catalog(catalog_id, n, beta=None, side=4.0, **params):
    t0 = time.perf_counter()
    prof = catalog_profile(catalog_id, **params)
    field = truncate_coefficient(sample_mu(prof, n, side))
    sol, report = neumann_solve(field, 40, beta=beta)
    SOLVE_SECONDS[(catalog_id, n)] = time.perf_counter() - t0
    return prof, field, sol, report


@pytest.fixture(scope="session")
def radial_rates():
    """Frozen oracle values written by ``scripts/asymptotic_oracle.py``."""
    text = resources.files("beltrami_lab").joinpath("data/radial_rates.json").read_text()
    return json.loads(text)


@pytest.fixture(scope="session")
def k2_256():
    return solve_catalog("power", 256, K=2.0)


@pytest.fixture(scope="session")
def k2_1024():
    return solve_catalog("power", 1024, K=2.0)


@pytest.fixture(scope="session")
def geps_256():
    return solve_catalog("g_eps", 256, beta=0.9, p=1.0, eps=0.5)


@pytest.fixture(scope="session")
def geps_1024():
    return solve_catalog("g_eps", 1024, beta=0.9, p=1.0, eps=0.5)


def smooth_bumps(z, rng, count=4, radius=0.9):
    """Random complex combination of C-infinity bumps supported in ``|z| < radius``."""
    out = np.zeros_like(z)
    for _ in range(count):
        c = rng.uniform(-0.4, 0.4) + 1j * rng.uniform(-0.4, 0.4)
        s = rng.uniform(0.2, radius - abs(c))
        d2 = np.abs(z - c) ** 2 / s**2
        bump = np.zeros(z.shape)
        inside = d2 < 1
        bump[inside] = np.exp(-1.0 / (1.0 - d2[inside]))
        out = out + (rng.normal() + 1j * rng.normal()) * bump
    return out


def mean_zero_bumps(z, rng, count=4):
    """Smooth compactly supported field with zero mean over the grid."""
    f = smooth_bumps(z, rng, count)
    g = smooth_bumps(z, rng, 1)
    return f - g * (f.sum() / g.sum())
