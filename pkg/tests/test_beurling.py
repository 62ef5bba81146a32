import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.exceptions import NotFittedError

from beltrami_lab.beurling import (
    BeurlingTransform,
    CauchyTransform,
    beurling_apply,
    cauchy_apply,
    disk_beurling_reference,
    dz_symbol,
    make_plan,
    nearest_cell_center,
    plane_beurling,
    principal_cauchy,
    pv_quadrature_oracle,
    spectral_dz,
    spectral_dzbar,
)
from beltrami_lab.grid import ComplexGrid, PixelSet, l2_norm, sample
from conftest import mean_zero_bumps, smooth_bumps


def disk(n, side=4.0):
    return sample(lambda z: (np.abs(z) < 1).astype(float), side, n)


def test_symbols_vanish_at_dc_and_nyquist():
    s = dz_symbol(16, 4.0)
    assert s[0, 0] == 0
    assert np.all(s[8, :] == 0) and np.all(s[:, 8] == 0)


def test_spectral_derivatives_exact_on_trig_polynomials():
    L = 4.0
    k = 2 * math.pi / L
    g = sample(lambda z: np.exp(1j * k * (2 * z.real + 3 * z.imag)), L, 32)
    # d = (dx - i dy)/2, dbar = (dx + i dy)/2
    assert np.allclose(spectral_dz(g).values, 0.5 * (2j * k + 3 * k) * g.values, atol=1e-12)
    assert np.allclose(spectral_dzbar(g).values, 0.5 * (2j * k - 3 * k) * g.values, atol=1e-12)


def test_beurling_intertwines_dbar_and_d():
    rng = np.random.default_rng(3)
    F = sample(lambda z: smooth_bumps(z, rng), 4.0, 128)
    plan = make_plan(128, 4.0)
    lhs = beurling_apply(plan, spectral_dzbar(F)).values
    assert np.allclose(lhs, spectral_dz(F).values, atol=1e-10)


@given(seed=st.integers(0, 2**32 - 1))
def test_periodic_isometry_on_mean_zero_fields(seed):
    rng = np.random.default_rng(seed)
    phi = sample(lambda z: mean_zero_bumps(z, rng), 4.0, 64)
    out = beurling_apply(make_plan(64, 4.0), phi)
    assert l2_norm(out) == pytest.approx(l2_norm(phi), rel=1e-10)


def test_mean_is_dropped():
    g = sample(lambda z: 1.0 + 0 * z, 4.0, 16)
    assert np.allclose(beurling_apply(make_plan(16, 4.0), g).values, 0)


def test_periodic_reference_matches_plane_kernel_nearby():
    # far from the images the periodic reference is -1/z^2 plus a small smooth term
    z = np.array([1.3, 1.2j, -1.1 + 0.2j])
    diff = disk_beurling_reference(z, 4.0) - disk_beurling_reference(z)
    assert np.all(np.abs(diff) < 0.3)


def _rms_error(n):
    g = disk(n)
    out = beurling_apply(make_plan(n, 4.0), g).values
    ref = disk_beurling_reference(g.z, 4.0)
    r = np.abs(g.z)
    m = (r < 0.8) | ((r > 1.2) & (r < 1.8))
    return float(np.sqrt(np.mean(np.abs(out[m] - ref[m]) ** 2)))


def test_disk_indicator_first_order_convergence():
    e = [_rms_error(n) for n in (64, 128, 256)]
    orders = np.log2(np.array(e[:-1]) / np.array(e[1:]))
    assert np.all(orders > 0.9)


def test_plane_beurling_disk_indicator():
    g = disk(256)
    out = plane_beurling(make_plan(256, 4.0), g).values
    ref = disk_beurling_reference(g.z)
    r = np.abs(g.z)
    m = (r < 0.8) | ((r > 1.2) & (r < 1.9))
    assert np.sqrt(np.mean(np.abs(out[m] - ref[m]) ** 2)) < 6e-3


def test_principal_cauchy_of_disk_indicator():
    # F = conj(z) inside, 1/z outside
    g = disk(256)
    F = principal_cauchy(make_plan(256, 4.0, "cauchy"), g).values
    z = g.z
    ref = np.where(np.abs(z) < 1, np.conj(z), 1 / z)
    r = np.abs(z)
    fitted = (r < 0.8) | ((r > 1.2) & (r < 1.9))
    assert np.max(np.abs(F - ref)[fitted]) < 2.5e-3
    assert np.max(np.abs(F - ref)) < 1e-2


def test_cauchy_inverts_dbar_off_dc_and_nyquist():
    rng = np.random.default_rng(5)
    w = sample(lambda z: mean_zero_bumps(z, rng), 4.0, 128)
    F = cauchy_apply(make_plan(128, 4.0, "cauchy"), w)
    W = np.fft.fft2(w.values)
    W[0, 0] = 0
    W[64, :] = 0
    W[:, 64] = 0
    assert np.allclose(spectral_dzbar(F).values, np.fft.ifft2(W), atol=1e-12)


@pytest.mark.parametrize("z", [0.3 + 0.2j, -1.4 + 0.1j])
def test_quadrature_oracle_agrees_with_fft(z):
    g = disk(64)
    zc = nearest_cell_center(g, z)
    plan = make_plan(64, 4.0)
    j, k = np.unravel_index(np.argmin(np.abs(g.z - zc)), g.z.shape)
    fft_val = beurling_apply(plan, g).values[j, k]
    assert abs(pv_quadrature_oracle(g, zc, periodic=True) - fft_val) < 2e-2


def test_quadrature_oracle_plane_cauchy():
    g = disk(128)
    zc = nearest_cell_center(g, 1.5 + 0.0j)
    # the pixelated disk carries area D.measure instead of pi
    D = PixelSet.disk(g)
    assert abs(pv_quadrature_oracle(g, zc, "cauchy") - D.measure / math.pi / zc) < 1e-3


def test_quadrature_oracle_rejects_bad_points():
    g = disk(32)
    with pytest.raises(ValueError):
        pv_quadrature_oracle(g, 0.01 + 0.0j)
    with pytest.raises(ValueError):
        pv_quadrature_oracle(g, nearest_cell_center(g, 0.3), "cauchy", periodic=True)
    with pytest.raises(ValueError):
        pv_quadrature_oracle(g, 9.0 + 0j)


def test_plane_correction_refuses_wide_support():
    g = sample(lambda z: np.exp(-np.abs(z) ** 2), 4.0, 64)
    with pytest.raises(ValueError):
        plane_beurling(make_plan(64, 4.0), g)


def test_plan_validation():
    with pytest.raises(ValueError):
        make_plan(64, 4.0, "laplace")
    with pytest.raises(ValueError):
        make_plan(64, 4.0, support_radius=2.5)
    with pytest.raises(ValueError):
        beurling_apply(make_plan(64, 4.0, "cauchy"), disk(64))
    with pytest.raises(ValueError):
        beurling_apply(make_plan(64, 4.0), disk(32))


def test_estimator_api():
    est = BeurlingTransform(plane=True)
    assert est.get_params() == {"plane": True, "correction_degree": 11}
    with pytest.raises(NotFittedError):
        est.transform(disk(64))
    g = disk(128)
    out = est.fit(g).transform(g)
    assert np.allclose(out.values, plane_beurling(make_plan(128, 4.0), g).values)
    c = CauchyTransform().set_params(principal=False)
    assert np.allclose(c.fit_transform(g).values, cauchy_apply(make_plan(128, 4.0, "cauchy"), g).values)


def test_threads_environment(monkeypatch):
    g = disk(64)
    plan = make_plan(64, 4.0)
    a = beurling_apply(plan, g).values
    monkeypatch.setenv("BELTRAMI_LAB_THREADS", "2")
    assert np.allclose(beurling_apply(plan, g).values, a, atol=1e-15)
