"""Beurling and Cauchy transforms as periodic Fourier multipliers.

The Beurling transform ``S phi(z) = -1/pi PV int phi(t) / (z - t)^2 dt`` has
symbol ``conj(xi) / xi`` with ``xi = kx + i ky``; with ``dbar = (dx + i dy)/2``
this is the unique choice making ``S(dbar F) = d F``.  The Cauchy transform
inverts ``dbar`` and has symbol ``1 / (i xi / 2)``.

On the torus the multipliers act on the periodized field and drop the mean.
For fields supported in the unit disk the difference from the operators on
the whole plane is holomorphic on ``|z| < side - 1``; :func:`plane_beurling`
and :func:`principal_cauchy` remove it by matching the known exterior Laurent
series on an annulus.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_grid_shape, check_same_grid
from .grid import ComplexGrid, cell_centers

KINDS = ("beurling", "cauchy")

#: Laurent terms matched on the exterior annulus.
LAURENT_TERMS = 40
#: Degree of the holomorphic image correction.
CORRECTION_DEGREE = 11
#: Annulus samples used for the least-squares fit.
MAX_ANNULUS_SAMPLES = 4096
#: Relative L2 mass allowed outside the support disk before plane corrections refuse.
SUPPORT_TAIL_TOL = 1e-10


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("BELTRAMI_LAB_THREADS", "1")))
    except ValueError:
        return 1


def fft2(a: np.ndarray) -> np.ndarray:
    return scipy.fft.fft2(a, workers=_workers())


def ifft2(a: np.ndarray) -> np.ndarray:
    return scipy.fft.ifft2(a, workers=_workers())


def angular_frequencies(n: int, side: float) -> tuple[np.ndarray, np.ndarray]:
    """``(kx, ky)`` on the DFT lattice laid out like ``fft2`` output."""
    k = 2 * np.pi * np.fft.fftfreq(n, d=side / n)
    return k[None, :], k[:, None]


def _nyquist_mask(n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=bool)
    m[n // 2, :] = True
    m[:, n // 2] = True
    return m


def dz_symbol(n: int, side: float) -> np.ndarray:
    kx, ky = angular_frequencies(n, side)
    sym = (1j * kx + ky) / 2 + 0j * ky
    sym[_nyquist_mask(n)] = 0
    return sym


def dzbar_symbol(n: int, side: float) -> np.ndarray:
    kx, ky = angular_frequencies(n, side)
    sym = (1j * kx - ky) / 2 + 0j * kx
    sym[_nyquist_mask(n)] = 0
    return sym


def _multiplier(n: int, side: float, kind: str) -> np.ndarray:
    kx, ky = angular_frequencies(n, side)
    xi = kx + 1j * ky
    out = np.zeros((n, n), dtype=np.complex128)
    nz = xi != 0
    if kind == "beurling":
        out[nz] = np.conj(xi[nz]) / xi[nz]
    elif kind == "cauchy":
        sym = dzbar_symbol(n, side)
        ok = sym != 0
        out[ok] = 1.0 / sym[ok]
    else:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return out


@dataclass(frozen=True, eq=False)
class _ExteriorFit:
    """Least-squares matching of a periodic result to an exterior Laurent series."""

    n: int
    side: float
    support_radius: float
    degree: int
    terms: int

    @cached_property
    def z(self) -> np.ndarray:
        x = cell_centers(self.n, self.side)
        return x[None, :] + 1j * x[:, None]

    @cached_property
    def support(self) -> np.ndarray:
        return np.abs(self.z) < self.support_radius

    @cached_property
    def z_support(self) -> np.ndarray:
        return self.z[self.support]

    @cached_property
    def radii(self) -> tuple[float, float]:
        gap = self.side / 2 - self.support_radius
        return self.support_radius + 0.4 * gap, self.support_radius + 0.9 * gap

    @cached_property
    def annulus_points(self) -> np.ndarray:
        r_in, r_out = self.radii
        r = np.abs(self.z)
        idx = np.flatnonzero((r > r_in) & (r < r_out))
        stride = max(1, -(-idx.size // MAX_ANNULUS_SAMPLES))
        return idx[::stride]

    @cached_property
    def za(self) -> np.ndarray:
        return self.z.ravel()[self.annulus_points]

    @cached_property
    def pinv(self) -> np.ndarray:
        scale = self.radii[1]
        V = (self.za[:, None] / scale) ** np.arange(self.degree + 1)[None, :]
        return np.linalg.pinv(V)

    def moments(self, values: np.ndarray, cell_area: float) -> np.ndarray:
        """``b_k = int phi(t) t^k dt`` over the support disk, k < terms."""
        phi = values[self.support]
        out = np.empty(self.terms, dtype=np.complex128)
        pw = np.ones_like(phi)
        for k in range(self.terms):
            out[k] = np.sum(phi * pw) * cell_area
            pw = pw * self.z_support
        return out

    def check_support(self, values: np.ndarray) -> None:
        total = np.sum(np.abs(values.ravel()) ** 2)
        if total == 0:
            return
        tail = np.sum(np.abs(values[~self.support]) ** 2)
        if tail > SUPPORT_TAIL_TOL * total:
            raise ValueError(
                f"field is not supported in |z| < {self.support_radius}: "
                f"relative tail mass {np.sqrt(tail / total):.3e}"
            )

    @cached_property
    def _inv_za(self) -> np.ndarray:
        return 1.0 / self.za

    def cauchy_exterior(self, b: np.ndarray) -> np.ndarray:
        """``1/pi sum_k b_k z^(-k-1)`` on the annulus samples."""
        w = self._inv_za
        acc = np.zeros_like(w)
        for k in range(self.terms - 1, -1, -1):
            acc = acc * w + b[k]
        return acc * w / np.pi

    def beurling_exterior(self, b: np.ndarray) -> np.ndarray:
        """``-1/pi sum_k (k+1) b_k z^(-k-2)`` on the annulus samples."""
        w = self._inv_za
        acc = np.zeros_like(w)
        for k in range(self.terms - 1, -1, -1):
            acc = acc * w + (k + 1) * b[k]
        return -acc * w * w / np.pi

    def polynomial(self, residual: np.ndarray) -> np.ndarray:
        """Fit ``P`` on the annulus and evaluate it on the whole grid."""
        c = self.pinv @ residual
        zs = self.z / self.radii[1]
        acc = np.zeros_like(zs)
        for cj in c[::-1]:
            acc = acc * zs + cj
        return acc


@dataclass(frozen=True, eq=False)
class OperatorPlan:
    """Precomputed multiplier table for one grid descriptor and operator kind."""

    n: int
    side: float
    kind: str
    multiplier: np.ndarray = field(repr=False)
    support_radius: float = 1.0
    correction_degree: int = CORRECTION_DEGREE

    @cached_property
    def exterior(self) -> _ExteriorFit:
        return _ExteriorFit(self.n, self.side, self.support_radius, self.correction_degree, LAURENT_TERMS)

    def check(self, g: ComplexGrid) -> None:
        check_same_grid(self, g)


def make_plan(
    n: int,
    side: float,
    kind: str = "beurling",
    *,
    support_radius: float = 1.0,
    correction_degree: int = CORRECTION_DEGREE,
) -> OperatorPlan:
    n, side = check_grid_shape(n, side)
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if not 0 < support_radius < side / 2:
        raise ValueError(f"support_radius must lie in (0, side/2), got {support_radius!r}")
    mult = _multiplier(n, side, kind)
    mult.setflags(write=False)
    return OperatorPlan(n, side, kind, mult, float(support_radius), int(correction_degree))


def plan_for(g: ComplexGrid, kind: str = "beurling") -> OperatorPlan:
    return make_plan(g.n, g.side, kind)


def _apply(plan: OperatorPlan, g: ComplexGrid, kind: str) -> np.ndarray:
    if plan.kind != kind:
        raise ValueError(f"plan is for {plan.kind!r}, not {kind!r}")
    plan.check(g)
    return ifft2(plan.multiplier * fft2(g.values))


def beurling_apply(plan: OperatorPlan, phi: ComplexGrid) -> ComplexGrid:
    """Periodic Beurling transform: FFT, multiply by ``conj(xi)/xi``, inverse FFT."""
    return phi.with_values(_apply(plan, phi, "beurling"))


def cauchy_apply(plan: OperatorPlan, omega: ComplexGrid) -> ComplexGrid:
    """Zero-mean periodic solution ``F`` of ``dbar F = omega - mean(omega)``."""
    return omega.with_values(_apply(plan, omega, "cauchy"))


def plane_beurling(plan: OperatorPlan, phi: ComplexGrid) -> ComplexGrid:
    """Beurling transform on the whole plane for ``phi`` supported in the support disk.

    The periodic result differs from the plane transform by the (holomorphic)
    field of the periodic images; that difference is fitted on the exterior
    annulus against ``-1/pi sum (k+1) b_k z^(-k-2)`` and removed.
    """
    u = _apply(plan, phi, "beurling")
    ext = plan.exterior
    ext.check_support(phi.values)
    b = ext.moments(phi.values, phi.cell_area)
    resid = ext.beurling_exterior(b) - u.ravel()[ext.annulus_points]
    return phi.with_values(u + ext.polynomial(resid))


def plane_beurling_values(plan: OperatorPlan, values: np.ndarray, cell_area: float) -> np.ndarray:
    """Array-level :func:`plane_beurling` without the support check (hot loop)."""
    u = ifft2(plan.multiplier * fft2(values))
    ext = plan.exterior
    b = ext.moments(values, cell_area)
    resid = ext.beurling_exterior(b) - u.ravel()[ext.annulus_points]
    return u + ext.polynomial(resid)


def principal_cauchy(plan: OperatorPlan, omega: ComplexGrid) -> ComplexGrid:
    """Cauchy transform normalized like a principal solution: ``F = O(1/z)`` at infinity.

    Adds back the dropped mean through ``mean * conj(z)`` and fits the
    holomorphic image field on the exterior annulus against
    ``1/pi sum b_k z^(-k-1)``.  The correction is a fit on that annulus; in
    the corners of the square, outside its outer radius, it is extrapolated
    and the result is only accurate to a few times ``1e-3``.
    """
    u = _apply(plan, omega, "cauchy")
    ext = plan.exterior
    ext.check_support(omega.values)
    u = u + omega.values.mean() * np.conj(omega.z)
    b = ext.moments(omega.values, omega.cell_area)
    resid = ext.cauchy_exterior(b) - u.ravel()[ext.annulus_points]
    return omega.with_values(u + ext.polynomial(resid))


def spectral_dz(g: ComplexGrid) -> ComplexGrid:
    return g.with_values(ifft2(dz_symbol(g.n, g.side) * fft2(g.values)))


def spectral_dzbar(g: ComplexGrid) -> ComplexGrid:
    return g.with_values(ifft2(dzbar_symbol(g.n, g.side) * fft2(g.values)))


# -- reference values -------------------------------------------------------


def _row_sum_kernel(w: np.ndarray, side: float, rows: int = 6) -> np.ndarray:
    """``sum_m 1/(w - m)^2`` over the lattice ``side * (Z + iZ)``, rows summed first."""
    L = side
    w = np.asarray(w, dtype=np.complex128)
    # wrap the imaginary part so the truncated row sum converges fast
    w = w - 1j * L * np.round(w.imag / L)
    out = np.zeros_like(w)
    for j in range(-rows, rows + 1):
        out += (np.pi / L) ** 2 / np.sin(np.pi * (w - 1j * j * L) / L) ** 2
    return out


def _kernel_regular_part(side: float, rows: int = 6) -> float:
    """``lim_{w->0} (row-summed lattice kernel - 1/w^2)``."""
    L = side
    s = sum(1.0 / np.sinh(np.pi * j) ** 2 for j in range(1, rows + 1))
    return (np.pi / L) ** 2 * (1.0 / 3.0 - 2.0 * s)


def disk_beurling_reference(z, side: float | None = None) -> np.ndarray:
    """Closed form of ``S chi_D``: 0 inside the unit disk, ``-1/z^2`` outside.

    With ``side`` given, returns the zero-mean periodic version on the torus
    of that edge length (the images' contributions summed in closed form),
    which is what :func:`beurling_apply` converges to.
    """
    z = np.asarray(z, dtype=np.complex128)
    inside = np.abs(z) < 1
    with np.errstate(divide="ignore", invalid="ignore"):
        if side is None:
            return np.where(inside, 0.0, -1.0 / z**2)
        lattice = -_row_sum_kernel(z, side)
        return np.where(inside, lattice + 1.0 / z**2, lattice) + np.pi / side**2


def nearest_cell_center(g: ComplexGrid, z: complex) -> complex:
    """Snap ``z`` to the closest cell center of ``g``."""
    j, k = _cell_index(g, z)
    return complex(g.z[j, k])


def _cell_index(g: ComplexGrid, z: complex) -> tuple[int, int]:
    h = g.h
    half = g.side / 2
    if not (-half <= z.real < half and -half <= z.imag < half):
        raise ValueError(f"point {z!r} lies outside the grid square")
    k = min(g.n - 1, int(np.floor((z.real + half) / h)))
    j = min(g.n - 1, int(np.floor((z.imag + half) / h)))
    return j, k


def pv_quadrature_oracle(phi: ComplexGrid, z: complex, kind: str = "beurling", *, periodic: bool = False) -> complex:
    """Direct O(n^2) summation of the singular kernel at one cell center.

    The cell containing ``z`` is skipped; over a square centered at ``z`` the
    principal value of ``1/w^2`` and of ``1/w`` vanishes by symmetry.  With
    ``periodic=True`` the Beurling kernel is replaced by its zero-mean lattice
    periodization, whose smooth part at the excluded cell is added back.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    z = complex(z)
    j, k = _cell_index(phi, z)
    center = phi.z[j, k]
    if abs(center - z) > 1e-9 * phi.h:
        raise ValueError(f"{z!r} is not a cell center (nearest is {center!r})")
    vals = phi.values.copy()
    vals[j, k] = 0
    w = z - phi.z
    w[j, k] = 1.0
    nz = vals != 0
    if kind == "cauchy":
        if periodic:
            raise ValueError("the periodic oracle is only defined for the Beurling kernel")
        return complex(np.sum(vals[nz] / w[nz]) * phi.cell_area / np.pi)
    if not periodic:
        return complex(-np.sum(vals[nz] / w[nz] ** 2) * phi.cell_area / np.pi)
    L = phi.side
    ker = _row_sum_kernel(w[nz], L) - np.pi / L**2
    own = (_kernel_regular_part(L) - np.pi / L**2) * phi.values[j, k]
    return complex(-(np.sum(vals[nz] * ker) + own) * phi.cell_area / np.pi)


# -- estimator front ends ---------------------------------------------------


class BeurlingTransform(TransformerMixin, BaseEstimator):
    """Beurling transform as a fit/transform estimator.

    ``fit`` reads the grid descriptor and builds the multiplier plan;
    ``transform`` applies it.  With ``plane=True`` the result approximates
    the transform on the whole plane (input must live in the unit disk).
    """

    def __init__(self, plane: bool = False, correction_degree: int = CORRECTION_DEGREE):
        self.plane = plane
        self.correction_degree = correction_degree

    def fit(self, X: ComplexGrid, y=None):
        self.plan_ = make_plan(X.n, X.side, "beurling", correction_degree=self.correction_degree)
        self.n_, self.side_ = X.n, X.side
        return self

    def transform(self, X: ComplexGrid) -> ComplexGrid:
        check_is_fitted(self, "plan_")
        return plane_beurling(self.plan_, X) if self.plane else beurling_apply(self.plan_, X)


class CauchyTransform(TransformerMixin, BaseEstimator):
    """Inverse of ``dbar``; ``principal=True`` gives the ``O(1/z)`` normalization."""

    def __init__(self, principal: bool = True, correction_degree: int = CORRECTION_DEGREE):
        self.principal = principal
        self.correction_degree = correction_degree

    def fit(self, X: ComplexGrid, y=None):
        self.plan_ = make_plan(X.n, X.side, "cauchy", correction_degree=self.correction_degree)
        self.n_, self.side_ = X.n, X.side
        return self

    def transform(self, X: ComplexGrid) -> ComplexGrid:
        check_is_fitted(self, "plan_")
        return principal_cauchy(self.plan_, X) if self.principal else cauchy_apply(self.plan_, X)
