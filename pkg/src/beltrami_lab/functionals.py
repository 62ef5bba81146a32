"""Weighted regularity functionals of two-dimensional solutions.

Includes the real-segment interpolation family ``nu_w``, the eps-sweep of
``int (1-|mu|)^eps |df|^2``, the weight conversion inequality, and the decreasing
rearrangement of the Jacobian with a Hardy-Littlewood-Polya comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from ._validation import check_same_grid
from .grid import ComplexGrid, PixelSet, sample
from .neumann import BeltramiField, SolutionField
from .radial import RadialProfile, weighted_integral
from .tables import Table
from .weights import WeightSpec

#: Largest fraction of disk cells allowed to carry a negative Jacobian.
NEGATIVE_JACOBIAN_LIMIT = 0.005


def weighted_integral_2d(sol: SolutionField, field: BeltramiField, w: WeightSpec, E: PixelSet) -> float:
    """Grid quadrature of the integrand selected by ``w`` over ``E``.

    ``K`` and ``|mu|`` are those of the coefficient that was solved;
    ``|Df| = |df| + |dbar f|``.
    """
    check_same_grid(sol.f, field.mu, E)
    m = E.mask
    if not m.any():
        return 0.0
    vals = w.value(
        K=field.distortion[m],
        abs_df=sol.abs_df[m],
        mu_abs=field.modulus[m],
        abs_dz=np.abs(sol.dz.values[m]),
    )
    return float(np.sum(vals) * E.cell_area)


def family_coefficient(field: BeltramiField, w: float, eps: float) -> BeltramiField:
    """``nu_w = mu/|mu| |mu|^(w+eps)`` for real ``w``; cells with ``mu = 0`` stay 0.

    With ``w + eps = 1`` the result equals ``mu`` cell for cell.
    """
    eps = float(eps)
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps!r}")
    e = float(w) + eps

    def power(g: ComplexGrid) -> ComplexGrid:
        v = g.values
        m = np.abs(v)
        nz = m > 0
        out = np.zeros_like(v)
        out[nz] = v[nz] * m[nz] ** (e - 1.0)
        return g.with_values(out)

    k_cap = min(field.k_cap**e, 1.0 - 1e-16) if e > 0 else 1.0 - 1e-16
    return BeltramiField(power(field.mu), k_cap, power(field.raw_mu))


def family_distortion_excess(field: BeltramiField, eps: float) -> float:
    """``max(K(nu_{1,eps}) - K(mu)/(1+eps/2) - 4)`` over disk cells (<= 0 when the bound holds)."""
    nu = family_coefficient(field, 1.0, eps)
    m = field.disk.mask
    return float(np.max(nu.distortion[m] - field.distortion[m] / (1 + eps / 2) - 4.0))


def ols_loglog(x, y) -> float:
    """OLS slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _sweep_table(eps_list, values, source: str) -> Table:
    eps = np.asarray(eps_list, dtype=float)
    tab = Table(["eps", "I"], meta={"source": source, "fit": "ols log I vs log(1/eps)", "grid": [float(e) for e in eps]})
    for e, v in zip(eps, values):
        tab.append(eps=float(e), I=float(v))
    tab.meta["slope"] = ols_loglog(1.0 / eps, values) if len(eps) >= 2 else float("nan")
    return tab


def _check_eps_list(eps_list):
    eps = np.asarray(eps_list, dtype=float)
    if eps.ndim != 1 or eps.size < 2 or np.any(eps <= 0) or np.any(eps >= 0.5):
        raise ValueError("eps_list needs at least two values in (0, 1/2)")
    return eps


def eps_sweep(sol: SolutionField, field: BeltramiField, eps_list) -> Table:
    """``I(eps) = int_D (1-|mu|)^eps |df|^2`` for one solution and the slope of ``I`` vs ``1/eps``."""
    eps = _check_eps_list(eps_list)
    D = field.disk
    vals = [weighted_integral_2d(sol, field, WeightSpec("eps_power", (e,)), D) for e in eps]
    return _sweep_table(eps, vals, "grid")


def radial_eps_sweep(prof: RadialProfile, eps_list) -> Table:
    """Radial counterpart of :func:`eps_sweep`, by 1D quadrature over the whole disk."""
    eps = _check_eps_list(eps_list)
    vals = [weighted_integral(prof, WeightSpec("eps_power", (e,)), 0.0) for e in eps]
    return _sweep_table(eps, vals, f"radial {prof.label}")


def _as_real_grid(obj, n: int, side: float) -> np.ndarray:
    if isinstance(obj, ComplexGrid):
        return obj.values.real
    if callable(obj):
        return sample(obj, side, n).values.real
    return np.broadcast_to(np.asarray(obj, dtype=float), (n, n))


def weight_conversion_check(
    Wfn,
    hfn,
    alpha: float,
    eps0: float,
    eta_list,
    *,
    n: int = 1024,
    side: float = 4.0,
    eps_grid=None,
    variation_limit: float = 0.2,
) -> Table:
    """Numerical form of the weight conversion inequality on the unit disk.

    Hypothesis: ``int W^eps h <= C eps^-alpha`` for ``eps`` in ``(0, eps0]``;
    ``C`` is measured as ``max eps^alpha int W^eps h`` on ``eps_grid`` and the
    hypothesis is accepted when ``eps^alpha int W^eps h`` at the smallest
    ``eps`` does not exceed its mid-grid value.  Conclusion: ``J(eta) = int h / log^(alpha+eta)(e + 1/W)``
    is tabulated with ``ratio = J(eta) / (1/eta)``.  ``meta['bounded']`` holds
    when the relative spread ``max/min - 1`` of the ratios is at most
    ``variation_limit``.
    """
    W = _as_real_grid(Wfn, n, side)
    h = _as_real_grid(hfn, n, side)
    if np.any(W < 0) or np.any(W > 1) or np.any(h < 0):
        raise ValueError("W must take values in [0, 1] and h must be nonnegative")
    x = -side / 2 + (np.arange(n) + 0.5) * side / n
    disk = (x[None, :] ** 2 + x[:, None] ** 2) < 1.0
    ca = (side / n) ** 2
    Wd, hd = W[disk], h[disk]
    if eps_grid is None:
        eps_grid = eps0 * 2.0 ** -np.arange(8)
    eps_grid = np.asarray(eps_grid, dtype=float)
    with np.errstate(divide="ignore"):
        logW = np.log(Wd)
        hyp = np.array([np.sum(hd * np.exp(e * logW)) * ca for e in eps_grid])
    scaled = eps_grid**alpha * hyp
    C = float(scaled.max())
    order = np.argsort(-eps_grid)
    seq = scaled[order]
    # no growth as eps shrinks: the smallest-eps value stays below the mid-grid value
    hyp_ok = bool(seq[-1] <= seq[len(seq) // 2] * (1 + 1e-9))
    tab = Table(["eta", "conclusion", "ratio"])
    with np.errstate(divide="ignore"):
        log_e_inv = np.logaddexp(1.0, -logW)
    for eta in eta_list:
        eta = float(eta)
        J = float(np.sum(hd * log_e_inv ** (-(alpha + eta))) * ca)
        tab.append(eta=eta, conclusion=J, ratio=J * eta)
    r = tab.column("ratio")
    pos = r[r > 0]
    variation = float(pos.max() / pos.min() - 1.0) if pos.size else 0.0
    tab.meta.update(
        hypothesis_C=C,
        hypothesis_ok=hyp_ok,
        eps_grid=[float(e) for e in eps_grid],
        variation=variation,
        bounded=bool(variation <= variation_limit),
        alpha=alpha,
    )
    return tab


@dataclass(frozen=True, eq=False)
class RearrangementProfile:
    """Decreasing rearrangement ``h`` of ``J_f`` on the disk as a step function.

    ``radii[k]`` is the right end ``(k+1) * cell_area`` of the k-th step.
    """

    radii: np.ndarray
    h: np.ndarray
    cell_area: float
    clipped: int
    total_cells: int
    source_integral: float

    @property
    def negative_fraction(self) -> float:
        return self.clipped / self.total_cells if self.total_cells else 0.0

    @property
    def acceptable(self) -> bool:
        return self.negative_fraction <= NEGATIVE_JACOBIAN_LIMIT

    def integral(self) -> float:
        return float(np.sum(self.h) * self.cell_area)

    def partial_integral(self, x) -> np.ndarray:
        """``int_0^x h`` (exact for the step function)."""
        x = np.asarray(x, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.h) * self.cell_area])
        k = np.clip(np.floor(x / self.cell_area).astype(int), 0, self.h.size)
        frac = x - k * self.cell_area
        nxt = np.where(k < self.h.size, self.h[np.minimum(k, self.h.size - 1)], 0.0)
        return cum[k] + frac * nxt

    def measure_above(self, lam: float) -> float:
        return int(np.count_nonzero(self.h > lam)) * self.cell_area

    def value_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = np.clip(np.ceil(t / self.cell_area).astype(int) - 1, 0, self.h.size - 1)
        return self.h[k]


def decreasing_rearrangement(sol: SolutionField, E: PixelSet | None = None) -> RearrangementProfile:
    """Sort ``J_f`` over the unit disk (or ``E``) in decreasing order.

    Negative Jacobian cells (a discretization artifact) are clipped to 0 and
    counted; see :attr:`RearrangementProfile.acceptable`.
    """
    jac = sol.jac
    if E is None:
        E = PixelSet.disk(jac, 1.0)
    check_same_grid(jac, E)
    vals = jac.values.real[E.mask]
    raw_integral = float(np.sum(vals) * E.cell_area)
    neg = int(np.count_nonzero(vals < 0))
    h = np.sort(np.clip(vals, 0.0, None))[::-1]
    radii = (np.arange(h.size) + 1.0) * E.cell_area
    return RearrangementProfile(radii, h, E.cell_area, neg, int(h.size), raw_integral)


def equimeasurability_errors(sol: SolutionField, profile: RearrangementProfile, n_quantiles: int = 16) -> np.ndarray:
    """``| |{J > lam}| - |{h > lam}| |`` at ``n_quantiles`` levels, in units of cell area."""
    J = np.clip(sol.jac.values.real[PixelSet.disk(sol.jac, 1.0).mask], 0.0, None)
    lams = np.quantile(profile.h, np.linspace(0.02, 0.98, n_quantiles))
    errs = [abs(np.count_nonzero(J > lam) * profile.cell_area - profile.measure_above(lam)) / profile.cell_area for lam in lams]
    return np.asarray(errs)


def h_xlog(x):
    """``x log(e + x)``."""
    return x * np.log(np.e + x)


def h_xexplog(beta: float) -> Callable:
    """``x exp(log^beta(e + x))``."""
    return lambda x: x * np.exp(np.log(np.e + x) ** beta)


def h_identity(x):
    return x


H_CATALOG = {"xlog": h_xlog, "identity": h_identity}


def eh_envelope(M: float):
    """``g(t) = M^(1/M) pi^(1-1/M) t^(1/M)`` and its derivative."""
    c = M ** (1 / M) * math.pi ** (1 - 1 / M)
    g = lambda t: c * np.asarray(t, dtype=float) ** (1 / M)  # noqa: E731
    gp = lambda t: (c / M) * np.asarray(t, dtype=float) ** (1 / M - 1)  # noqa: E731
    return g, gp


@dataclass
class HLPResult:
    hypothesis_ok: bool
    conclusion_ok: bool
    hypothesis_margin: float
    lhs: float
    rhs: float

    @property
    def passed(self) -> bool:
        return self.hypothesis_ok and self.conclusion_ok

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def hlp_check(
    profile: RearrangementProfile,
    gprime: Callable,
    H: Callable,
    *,
    g: Callable | None = None,
    x_grid=None,
    rtol: float = 1e-9,
) -> HLPResult:
    """Hardy-Littlewood-Polya comparison ``int H(J) <= int_0^pi H(g'(t)) dt``.

    The hypothesis ``int_0^x h <= g(x)`` is checked on ``x_grid`` (default 256
    geometric points in ``(cell_area, pi]``); ``g`` defaults to
    ``int_0^x g'`` by quadrature.  A hypothesis failure is reported, and the
    conclusion is still evaluated.
    """
    top = min(math.pi, float(profile.radii[-1]))
    if x_grid is None:
        x_grid = np.geomspace(profile.cell_area, top, 256)
    x_grid = np.asarray(x_grid, dtype=float)
    if g is None:
        G = np.array([quad(lambda t: float(gprime(t)), 0.0, x, limit=200)[0] for x in x_grid])
    else:
        G = np.asarray(g(x_grid), dtype=float)
    lhs_partial = profile.partial_integral(x_grid)
    scale = np.maximum(np.abs(G), 1e-300)
    hyp_margin = float(np.min((G - lhs_partial) / scale))
    lhs = float(np.sum(H(profile.h)) * profile.cell_area)
    rhs = quad(lambda t: float(H(gprime(t))), 0.0, math.pi, limit=400)[0]
    return HLPResult(hyp_margin >= -rtol, lhs <= rhs * (1 + rtol), hyp_margin, lhs, rhs)


def jacobian_lloglbound(sol: SolutionField, field: BeltramiField, eps: float) -> dict:
    """``(int_D |Df|^2, eps^-4 int_D e^{(1+eps)K}, ratio)`` for the solved coefficient."""
    D = field.disk
    check_same_grid(sol.f, D)
    m = D.mask
    df2 = float(np.sum(sol.abs_df[m] ** 2) * D.cell_area)
    K = field.distortion[m]
    expo = (1 + eps) * K
    top = expo.max()
    exp_int = float(np.exp(top) * np.sum(np.exp(expo - top)) * D.cell_area)
    rhs = eps**-4 * exp_int
    return {"eps": float(eps), "df_sq_integral": df2, "exp_term": rhs, "ratio": df2 / rhs}
