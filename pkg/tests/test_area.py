import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beltrami_lab.area import (
    AreaBoundParams,
    area_decay_fit,
    eh_bound,
    eh_bound_check,
    exp_area_bound_check,
    exp_area_shape,
    image_area,
    qc_set_bound,
    qc_series_set_bounds,
)
from beltrami_lab.grid import ComplexGrid, PixelSet
from beltrami_lab.neumann import SolutionField


@given(m=st.floats(1e-6, math.pi))
def test_eh_bound_identity_case(m):
    assert eh_bound(1.0, m) == pytest.approx(m)


@given(M=st.floats(1.0, 20.0), m=st.floats(1e-8, math.pi))
def test_eh_bound_dominates_area_at_full_disk(M, m):
    # the bound is increasing in |E| and equals M^(1/M) pi at |E| = pi
    assert eh_bound(M, m) <= eh_bound(M, math.pi) + 1e-12
    assert eh_bound(M, math.pi) == pytest.approx(M ** (1 / M) * math.pi)


def test_identity_image_area():
    sol = SolutionField.identity(ComplexGrid.zeros(4.0, 128))
    E = PixelSet.disk(sol.f, 0.5)
    assert image_area(sol, E) == pytest.approx(E.measure)
    with pytest.raises(ValueError):
        eh_bound_check(sol, E, 0.5)


def test_eh_dyadic_disks(k2_256):
    _, _, sol, _ = k2_256
    for j in range(6):
        row = eh_bound_check(sol, PixelSet.disk(sol.f, 2.0**-j), 2.0)
        assert row["pass"] and row["ratio"] <= 1 / math.sqrt(2) + 0.05


def test_area_params():
    with pytest.raises(ValueError):
        AreaBoundParams(1.0, 1.0)
    with pytest.raises(ValueError):
        AreaBoundParams(1.0, 0.75, M=1.0)
    P = AreaBoundParams(1.0, 0.75)
    assert P.delta == pytest.approx(0.25)
    P.check_prop_range()
    with pytest.raises(ValueError):
        AreaBoundParams(1.0, 0.4).check_prop_range()
    assert exp_area_shape(P, 0.0, 10.0) == 0.0


def test_exp_area_bound_table(geps_256):
    _, field, sol, _ = geps_256
    disks = [PixelSet.disk(sol.f, math.exp(-j / 2)) for j in range(6)]
    tab = exp_area_bound_check(sol, field, AreaBoundParams(1.0, 0.75), disks)
    m = tab.column("E_measure")
    assert np.all(np.diff(m) < 0)
    assert tab.meta["A2_star"] == pytest.approx(tab.column("ratio").max())
    assert tab.meta["exp_integral"] > 0 and isinstance(tab.meta["stable"], bool)


def test_area_decay_fit_recovers_line():
    E = np.exp(-np.arange(2, 12.0))
    x = np.log(1 / E) ** 0.5
    fit = area_decay_fit(E, np.exp(-(3.0 * x + 0.5)), 2.0)
    assert fit["slope"] == pytest.approx(3.0) and fit["intercept"] == pytest.approx(0.5)
    assert fit["r2"] == pytest.approx(1.0) and fit["n_points"] == 10


def test_qc_bounds(k2_256):
    assert qc_set_bound(3.0, 0, 1.0) == pytest.approx(math.pi * 4)
    assert qc_set_bound(3.0, 1, 1.0, shifted=True) == pytest.approx(math.pi * 2**4 * 4)
    _, field, sol, _ = k2_256
    tab = qc_series_set_bounds(field, PixelSet.disk(sol.f, 0.5), 2.0, 6)
    assert len(tab) == 7 and all(tab.column("pass"))
    with pytest.raises(ValueError):
        qc_series_set_bounds(field, PixelSet.disk(sol.f, 0.5), 1.0, 2)
