"""Image areas ``|f(E)|`` and the area distortion bounds they are tested against."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_same_grid
from .beurling import make_plan, plane_beurling_values
from .grid import PixelSet, integrate_over
from .neumann import BeltramiField, SolutionField, exp_integral
from .tables import Table


def image_area(sol: SolutionField, E: PixelSet) -> float:
    """``|f(E)| = int_E J_f`` by grid quadrature."""
    return integrate_over(sol.jac, E)


def eh_bound(M: float, E_measure: float) -> float:
    """``M^(1/M) pi^(1-1/M) |E|^(1/M)``."""
    return M ** (1 / M) * math.pi ** (1 - 1 / M) * E_measure ** (1 / M)


def eh_bound_check(sol: SolutionField, E: PixelSet, M: float, tolerance: float = 0.0) -> dict:
    """Compare ``|f(E)|`` with the Eremenko-Hamilton bound for an ``M``-quasiconformal map."""
    if not M >= 1:
        raise ValueError(f"M must be >= 1, got {M!r}")
    area = image_area(sol, E)
    bound = eh_bound(M, E.measure)
    return {
        "E_measure": E.measure,
        "image_area": area,
        "bound": bound,
        "ratio": area / bound if bound > 0 else 0.0,
        "pass": bool(area <= bound + tolerance),
    }


@dataclass(frozen=True)
class AreaBoundParams:
    """Exponents of the exponential-distortion area bound; ``delta = p - beta``."""

    p: float
    beta: float
    alpha: float = 1.0
    M: float = 2.0
    A2: float = 1.0

    def __post_init__(self):
        if not self.beta < self.p:
            raise ValueError(f"beta must be < p, got beta={self.beta!r}, p={self.p!r}")
        if not self.M > 1:
            raise ValueError(f"M must be > 1, got {self.M!r}")

    @property
    def delta(self) -> float:
        return self.p - self.beta

    def check_prop_range(self) -> None:
        if not 0.5 < self.beta < self.p < 4:
            raise ValueError(f"need 1/2 < beta < p < 4, got beta={self.beta!r}, p={self.p!r}")


def exp_area_shape(params: AreaBoundParams, E_measure: float, exp_int: float) -> float:
    """``|E|^(delta/24) + delta^(-3 beta) log^(-beta)(e + 1/|E|) (int e^{pK})^(1/2)`` (``A2 = 1``)."""
    d, b = params.delta, params.beta
    if E_measure <= 0:
        return 0.0
    return E_measure ** (d / 24) + d ** (-3 * b) * math.log(math.e + 1 / E_measure) ** (-b) * math.sqrt(exp_int)


def exp_area_bound_check(sol: SolutionField, field: BeltramiField, params: AreaBoundParams, E_list) -> Table:
    """Tabulate ``|f(E)|`` against the shape function over a list of sets.

    ``meta['A2_star']`` is the supremum ratio; the sweep is ``stable`` when
    the supremum over the smaller half of the sets does not exceed the one
    over the larger half by more than 5%.
    """
    params.check_prop_range()
    check_same_grid(sol.f, field.mu)
    I = exp_integral(field, params.p, 1.0)
    tab = Table(["E_measure", "image_area", "shape", "ratio", "log_term", "ratio_log"], meta={"exp_integral": I, "p": params.p, "beta": params.beta})
    for E in sorted(E_list, key=lambda s: -s.measure):
        m = E.measure
        area = image_area(sol, E)
        shape = exp_area_shape(params, m, I)
        log_term = math.log(math.e + 1 / m) ** (-params.beta) if m > 0 else 0.0
        tab.append(
            E_measure=m,
            image_area=area,
            shape=shape,
            ratio=area / shape if shape > 0 else 0.0,
            log_term=log_term,
            ratio_log=area / log_term if log_term > 0 else 0.0,
        )
    r = tab.column("ratio")
    tab.meta["A2_star"] = float(r.max()) if r.size else 0.0
    half = max(1, r.size // 2)
    tab.meta["stable"] = bool(r.size < 2 or r[half:].max() <= 1.05 * r[:half].max())
    return tab


def area_decay_fit(E_measures, areas, alpha: float) -> dict:
    """OLS of ``-log|f(E)|`` on ``log^(1-1/alpha)(1/|E|)`` with ``R^2``."""
    E = np.asarray(E_measures, dtype=float)
    A = np.asarray(areas, dtype=float)
    x = np.log(1.0 / E) ** (1 - 1 / alpha)
    y = -np.log(A)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2, "n_points": int(E.size)}


def qc_set_bound(M: float, n: int, E_measure: float, *, shifted: bool = False) -> float:
    """``pi ((M+1)/(M-1))^(2n [+2]) (M+1)^2/4 |E|^(1/M)``."""
    k = 2 * n + (2 if shifted else 0)
    return math.pi * ((M + 1) / (M - 1)) ** k * (M + 1) ** 2 / 4 * E_measure ** (1 / M)


def qc_series_set_bounds(field: BeltramiField, E: PixelSet, M: float, n_max: int) -> Table:
    """``||chi_E psi_n||^2`` and ``||chi_E S psi_n||^2`` against their qc bounds, ``n <= n_max``."""
    if not M > 1:
        raise ValueError(f"M must be > 1, got {M!r}")
    check_same_grid(field.mu, E)
    mu = field.mu
    plan = make_plan(mu.n, mu.side, "beurling")
    h2 = mu.cell_area
    m = E.mask
    tab = Table(["n", "psi_sq", "bound", "S_psi_sq", "S_bound", "pass"], meta={"M": M, "E_measure": E.measure})
    psi = mu.values.copy()
    for n in range(int(n_max) + 1):
        s_psi = plane_beurling_values(plan, psi, h2)
        a = float(np.sum(np.abs(psi[m]) ** 2) * h2)
        b = float(np.sum(np.abs(s_psi[m]) ** 2) * h2)
        B1 = qc_set_bound(M, n, E.measure)
        B2 = qc_set_bound(M, n, E.measure, shifted=True)
        tab.append(n=n, psi_sq=a, bound=B1, S_psi_sq=b, S_bound=B2, **{"pass": bool(a <= B1 and b <= B2)})
        psi = mu.values * s_psi
    return tab
