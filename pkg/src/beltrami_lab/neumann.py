"""Neumann series for the Beltrami equation and its decay diagnostics.

The principal solution of ``dbar f = mu d f`` is ``f = z + C omega`` with
``omega = mu + mu S mu + mu S mu S mu + ...``.  The terms ``psi_n = (mu S)^n mu``
decay geometrically when ``|mu| <= k < 1``; for degenerate coefficients with
exponentially integrable distortion they decay at the rates
implemented by :func:`decay_bound`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator

from ._validation import check_decay_exponents, check_open_unit, check_positive, check_same_grid
from .beurling import make_plan, plane_beurling_values, principal_cauchy
from .grid import ComplexGrid, PixelSet, l2_norm
from .tables import Table

DEFAULT_K_CAP = 1.0 - 2.0**-10
DEFAULT_N_MAX = 40
DEFAULT_REL_TOL = 1e-12
DIVERGENCE_RUN = 5


class NeumannDivergenceError(RuntimeError):
    """Raised when the series terms keep growing for an (essentially) untruncated coefficient."""


def distortion_from_modulus(m: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return (1.0 + m) / (1.0 - m)


@dataclass(frozen=True, eq=False)
class BeltramiField:
    """A truncated Beltrami coefficient supported in the unit disk.

    Attributes
    ----------
    mu : ComplexGrid
        Coefficient actually used by the solver, ``|mu| <= k_cap``.
    k_cap : float
        Truncation level.
    raw_mu : ComplexGrid
        The coefficient before truncation; bad sets are measured on it.
    """

    mu: ComplexGrid
    k_cap: float
    raw_mu: ComplexGrid

    @cached_property
    def modulus(self) -> np.ndarray:
        return np.abs(self.mu.values)

    @cached_property
    def distortion(self) -> np.ndarray:
        return distortion_from_modulus(self.modulus)

    @cached_property
    def raw_distortion(self) -> np.ndarray:
        return distortion_from_modulus(np.abs(self.raw_mu.values))

    @cached_property
    def disk(self) -> PixelSet:
        return PixelSet.disk(self.mu, 1.0)

    @property
    def clamped(self) -> PixelSet:
        """Cells where the cap is active."""
        return PixelSet.from_grid(self.mu, np.abs(self.raw_mu.values) > self.k_cap)

    @property
    def sup_modulus(self) -> float:
        return float(self.modulus.max())


def truncate_coefficient(mu_raw: ComplexGrid, k_cap: float = DEFAULT_K_CAP) -> BeltramiField:
    """Clamp ``|mu|`` to ``k_cap`` keeping the argument.

    Raises if ``k_cap`` is outside ``(0, 1)``, if ``|mu_raw| > 1`` somewhere,
    or if ``mu_raw`` does not vanish outside the unit disk.
    """
    k_cap = check_open_unit(k_cap, "k_cap")
    vals = mu_raw.values
    m = np.abs(vals)
    if np.any(m > 1.0):
        raise ValueError(f"|mu| must be at most 1, found {m.max():.6g}")
    outside = np.abs(mu_raw.z) >= 1.0
    if np.any(vals[outside] != 0):
        raise ValueError("mu must vanish outside the unit disk")
    scale = np.ones_like(m)
    over = m > k_cap
    scale[over] = k_cap / m[over]
    return BeltramiField(mu_raw.with_values(vals * scale), k_cap, mu_raw)


@dataclass(frozen=True, eq=False)
class SolutionField:
    """Principal solution samples: ``f``, ``d f``, ``dbar f`` and the Jacobian."""

    f: ComplexGrid
    dz: ComplexGrid
    dzbar: ComplexGrid
    terms: tuple = ()

    @cached_property
    def jac(self) -> ComplexGrid:
        j = np.abs(self.dz.values) ** 2 - np.abs(self.dzbar.values) ** 2
        return self.f.with_values(j)

    @cached_property
    def abs_df(self) -> np.ndarray:
        """Operator norm ``|df| + |dbar f|``."""
        return np.abs(self.dz.values) + np.abs(self.dzbar.values)

    @classmethod
    def identity(cls, like: ComplexGrid) -> "SolutionField":
        return cls(like.with_values(like.z), like.with_values(np.ones((like.n, like.n))), like.with_values(np.zeros((like.n, like.n))))


@dataclass
class NeumannDecayReport:
    """Per-term diagnostics of one Neumann solve.

    ``term_norms[n] = ||psi_n||_2``.  ``good_term_norms`` and
    ``bad_set_measures`` are filled when a ``beta`` was supplied.
    """

    term_norms: list
    n_max: int
    residual: float
    k_cap: float
    good_term_norms: list | None = None
    bad_set_measures: list = field(default_factory=list)
    beta: float | None = None
    alpha: float = 1.0

    @property
    def term_norms_sq(self) -> np.ndarray:
        return np.asarray(self.term_norms) ** 2

    @property
    def n_terms(self) -> int:
        return len(self.term_norms)

    def rows(self, params: "DecayBoundParams | None" = None, tolerance=0.0) -> list[dict]:
        tol = np.broadcast_to(np.asarray(tolerance, dtype=float), (self.n_terms,))
        out = []
        for n, t in enumerate(self.term_norms):
            row = {
                "n": n,
                "term_norm_sq": t**2,
                "good_term_norm_sq": None if self.good_term_norms is None else self.good_term_norms[n] ** 2,
                "bad_set_measure": self.bad_set_measures[n] if n < len(self.bad_set_measures) else None,
                "chebyshev_bound": None,
                "decay_bound": None,
                "pass": None,
            }
            if params is not None:
                row["chebyshev_bound"] = chebyshev_bound(params, n)
                row["decay_bound"] = decay_bound(params, n)
                row["pass"] = bool(t**2 <= row["decay_bound"] + tol[n])
            out.append(row)
        return out

    def table(self, params: "DecayBoundParams | None" = None, tolerance=0.0) -> Table:
        cols = ["n", "term_norm_sq", "good_term_norm_sq", "bad_set_measure", "chebyshev_bound", "decay_bound", "pass"]
        return Table(cols, self.rows(params, tolerance))

    def to_csv(self, path, params: "DecayBoundParams | None" = None, tolerance=0.0, extra: dict | None = None) -> None:
        self.table(params, tolerance).to_csv(path, extra)

    def to_json(self, params: "DecayBoundParams | None" = None) -> dict:
        doc = {
            "term_norms": list(map(float, self.term_norms)),
            "good_term_norms": None if self.good_term_norms is None else list(map(float, self.good_term_norms)),
            "bad_set_measures": list(map(float, self.bad_set_measures)),
            "n_max": self.n_max,
            "residual": float(self.residual),
            "k_cap": self.k_cap,
            "beta": self.beta,
            "alpha": self.alpha,
        }
        if params is not None:
            doc["params"] = params.to_dict()
        return doc


# -- solver -----------------------------------------------------------------


def _divergence_guard(norms: list, k_cap: float) -> None:
    if not np.isfinite(norms[-1]):
        raise NeumannDivergenceError(f"term {len(norms) - 1} is not finite")
    if k_cap < 1 - 1e-12 or len(norms) <= DIVERGENCE_RUN:
        return
    tail = norms[-DIVERGENCE_RUN - 1 :]
    if all(b > a for a, b in zip(tail, tail[1:])):
        raise NeumannDivergenceError(f"||psi_n|| increased for {DIVERGENCE_RUN} consecutive terms")


def neumann_solve(
    field: BeltramiField,
    n_max: int = DEFAULT_N_MAX,
    tol: float | None = None,
    *,
    beta: float | None = None,
    alpha: float = 1.0,
    keep_terms: bool = False,
) -> tuple[SolutionField, NeumannDecayReport]:
    """Sum the Neumann series and assemble the principal solution.

    Parameters
    ----------
    field : BeltramiField
    n_max : int
        Last term index; at most ``n_max + 1`` terms are formed.
    tol : float, optional
        Stop once ``||psi_n||_2 <= tol``; default ``1e-12 * ||mu||_2``.
    beta, alpha : float, optional
        When ``beta`` is given, the report also carries the good-term norms
        and the bad-set measures of those exponents.
    keep_terms : bool
        Keep every ``psi_n`` grid on the solution (memory heavy).
    """
    if int(n_max) < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max!r}")
    n_max = int(n_max)
    mu = field.mu
    if tol is None:
        tol = DEFAULT_REL_TOL * l2_norm(mu)
    elif not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")

    plan = make_plan(mu.n, mu.side, "beurling")
    h2 = mu.cell_area
    m = mu.values
    psi = m.copy()
    omega = psi.copy()
    norms = [float(np.sqrt(np.sum(np.abs(psi.ravel()) ** 2) * h2))]
    kept = [mu.with_values(psi)] if keep_terms else []
    for _ in range(n_max):
        if norms[-1] <= tol:
            break
        psi = m * plane_beurling_values(plan, psi, h2)
        norms.append(float(np.sqrt(np.sum(np.abs(psi.ravel()) ** 2) * h2)))
        _divergence_guard(norms, field.k_cap)
        omega += psi
        if keep_terms:
            kept.append(mu.with_values(psi))

    om = mu.with_values(omega)
    dz = 1.0 + plane_beurling_values(plan, omega, h2)
    F = principal_cauchy(make_plan(mu.n, mu.side, "cauchy"), om)
    sol = SolutionField(F + mu.z, mu.with_values(dz), om, tuple(kept))

    report = NeumannDecayReport(norms, n_max, norms[-1], field.k_cap, alpha=float(alpha))
    if beta is not None:
        report.beta = float(beta)
        report.good_term_norms = good_term_iteration(field, beta, alpha, len(norms) - 1)
        report.bad_set_measures = [bad_set_measure(field, n, beta, alpha) for n in range(len(norms))]
    return sol, report


class NeumannBeltramiSolver(BaseEstimator):
    """Estimator front end to :func:`neumann_solve`.

    ``fit`` takes a raw coefficient grid, truncates it and solves; the
    solution and report are stored as ``solution_`` and ``report_``.
    """

    def __init__(self, k_cap: float = DEFAULT_K_CAP, n_max: int = DEFAULT_N_MAX, tol: float | None = None, beta=None, alpha: float = 1.0):
        self.k_cap = k_cap
        self.n_max = n_max
        self.tol = tol
        self.beta = beta
        self.alpha = alpha

    def fit(self, X: ComplexGrid, y=None):
        self.field_ = truncate_coefficient(X, self.k_cap)
        self.solution_, self.report_ = neumann_solve(self.field_, self.n_max, self.tol, beta=self.beta, alpha=self.alpha)
        return self

    def transform(self, X: ComplexGrid | None = None) -> ComplexGrid:
        """The principal solution ``f`` (the input is only checked against the fitted grid)."""
        if X is not None:
            check_same_grid(X, self.solution_.f)
        return self.solution_.f


# -- good terms and bad sets --------------------------------------------------


def bad_set_threshold(n: int, beta: float, alpha: float = 1.0) -> float:
    """Modulus threshold ``1 - 2 beta^(1/a) / ((4n)^(1/a) + beta^(1/a))`` of ``B_n``.

    Equivalently ``B_n = {K > (4n/beta)^(1/alpha)}``.
    """
    b = beta ** (1.0 / alpha)
    return 1.0 - 2.0 * b / ((4.0 * n) ** (1.0 / alpha) + b)


def bad_set(field: BeltramiField, n: int, beta: float, alpha: float = 1.0) -> PixelSet:
    """Cells of the unit disk where the untruncated distortion exceeds ``(4n/beta)^(1/alpha)``."""
    k_thr = (4.0 * n / beta) ** (1.0 / alpha)
    return PixelSet.from_grid(field.mu, field.disk.mask & (field.raw_distortion > k_thr))


def bad_set_measure(field: BeltramiField, n: int, beta: float, alpha: float = 1.0) -> float:
    return bad_set(field, n, beta, alpha).measure


def good_term_iteration(field: BeltramiField, beta: float, alpha: float, n_max: int) -> list[float]:
    """``||g_n||_2`` for ``g_0 = mu``, ``g_n = chi_{G_n} mu S g_{n-1}``, ``G_n = D minus B_n``."""
    mu = field.mu
    plan = make_plan(mu.n, mu.side, "beurling")
    h2 = mu.cell_area
    g = mu.values.copy()
    out = [float(np.sqrt(np.sum(np.abs(g.ravel()) ** 2) * h2))]
    for n in range(1, int(n_max) + 1):
        good = field.disk.mask & ~bad_set(field, n, beta, alpha).mask
        if out[-1] == 0:
            out.append(0.0)
            continue
        g = np.where(good, mu.values * plane_beurling_values(plan, g, h2), 0)
        out.append(float(np.sqrt(np.sum(np.abs(g.ravel()) ** 2) * h2)))
    return out


def good_term_product_bound(n: int, beta: float, alpha: float = 1.0) -> float:
    """``sqrt(pi) * prod_{k<=n}`` of the per-step contraction factors."""
    return math.sqrt(math.pi) * math.prod(bad_set_threshold(k, beta, alpha) for k in range(1, n + 1))


def good_term_bound(n: int, beta: float, alpha: float = 1.0) -> float:
    """Closed-form bound on ``||g_n||_2``; the power law ``((n+1+b/4)/(1+b/4))^(-beta/2)`` at ``alpha = 1``."""
    q = 1.0 + beta / 4.0
    if alpha == 1.0:
        return math.sqrt(math.pi) * ((n + q) / q) ** (-beta / 2)
    s = 1.0 - 1.0 / alpha
    e = 2.0 ** (-1.0 / alpha) * beta ** (1.0 / alpha) * ((n + q) ** s - q**s) / s
    return math.sqrt(math.pi) * math.exp(-e)


# -- constants of the decay bound ---------------------------------------------


def exp_integral(field: BeltramiField, p: float, alpha: float = 1.0, *, raw: bool = True) -> float:
    """``int_D exp(p K^alpha)`` by grid quadrature, accumulated in log space."""
    K = field.raw_distortion if raw else field.distortion
    expo = p * K[field.disk.mask] ** alpha
    if expo.size == 0:
        return 0.0
    return float(np.exp(logsumexp(expo) + math.log(field.mu.cell_area)))


@dataclass(frozen=True)
class DecayBoundParams:
    """Exponents and measured integral entering the Neumann decay bound."""

    p: float
    alpha: float
    beta: float
    exp_integral: float

    def __post_init__(self):
        check_decay_exponents(self.p, self.alpha, self.beta)
        check_positive(self.exp_integral, "exp_integral")

    @classmethod
    def from_field(cls, field: BeltramiField, p: float, alpha: float = 1.0, beta: float | None = None) -> "DecayBoundParams":
        if beta is None:
            beta = 0.75 * p
        return cls(float(p), float(alpha), float(beta), exp_integral(field, p, alpha))

    @property
    def delta(self) -> float:
        p, b = self.p, self.beta
        return (p - b) ** 2 / (b * (p + b))

    @property
    def c_tilde(self) -> float:
        p, b = self.p, self.beta
        return 8 * p / (p - b) * self.exp_integral ** ((p - b) / (2 * p))

    @property
    def b(self) -> float:
        return (self.beta / 2) ** (1.0 / self.alpha)

    @property
    def B(self) -> float:
        if self.alpha == 1.0:
            return float("nan")
        s = 1.0 - 1.0 / self.alpha
        val = self.b / s * ((2 * self.b / self.delta) ** (self.alpha - 1) - (1 + self.beta / 4) ** s)
        return max(val, 0.0)

    @property
    def C(self) -> float:
        if self.alpha == 1.0:
            return float("nan")
        return 4 * self.delta**-2 * self.c_tilde * math.exp(2 * self.B) + 1

    @property
    def C0(self) -> float:
        p, b = self.p, self.beta
        return 12 ** (b + 3) * (p / b - 1) ** (-(5 + 2 * b)) * self.exp_integral ** (0.5 * (1 - b / p))

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("delta", "c_tilde", "b", "B", "C", "C0"):
            v = getattr(self, k)
            d[k] = None if isinstance(v, float) and math.isnan(v) else v
        return d


def decay_shape(n: int, beta: float, alpha: float = 1.0) -> float:
    """The ``n``-dependent factor of the bound; equals 1 at ``n = 0``."""
    q = 1.0 + beta / 4.0
    if alpha == 1.0:
        return ((n + q) / q) ** (-beta)
    s = 1.0 - 1.0 / alpha
    return math.exp(-2 * (beta / 2) ** (1 / alpha) / s * ((n + q) ** s - q**s))


def decay_bound(params: DecayBoundParams, n: int) -> float:
    """Upper bound on ``int |(mu S)^n mu|^2``."""
    lead = params.C0 if params.alpha == 1.0 else params.C
    return lead * decay_shape(n, params.beta, params.alpha)


def chebyshev_bound(params: DecayBoundParams, n: int) -> float:
    """``(int_D e^{p K^alpha}) e^{-4 n p / beta}``."""
    return params.exp_integral * math.exp(-4 * n * params.p / params.beta)


@dataclass
class VerificationRow:
    """Outcome of :func:`verify_decay`."""

    rows: list
    slope: float
    fit_window: tuple
    passed: bool

    @property
    def all_pass(self) -> bool:
        return self.passed


def loglog_slope(n: np.ndarray, y: np.ndarray) -> float:
    """OLS slope of ``log y`` on ``log n``."""
    n = np.asarray(n, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (n > 0) & (y > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(n[keep]), np.log(y[keep]), 1)[0])


def discretization_tolerance(report: NeumannDecayReport, h: float) -> np.ndarray:
    """Additive allowance ``(n + 1) h ||psi_n||^2`` per term.

    Each grid application of the Beurling transform carries a relative
    error of order ``h`` (first order on indicator-like data), and term
    ``n`` has passed through ``n`` of them.
    """
    n = np.arange(report.n_terms)
    return (n + 1) * float(h) * report.term_norms_sq


def verify_decay(report: NeumannDecayReport, params: DecayBoundParams, tolerance=0.0, fit_window: tuple | None = None) -> VerificationRow:
    """Termwise comparison with :func:`decay_bound` plus a log-log slope fit.

    ``tolerance`` is the additive discretization allowance, either a scalar
    or one value per term.  The slope is fitted over ``fit_window`` (default
    ``1..last term``).
    """
    rows = report.rows(params, tolerance)
    last = report.n_terms - 1
    lo, hi = fit_window if fit_window is not None else (1, last)
    ns = np.arange(report.n_terms)
    sel = (ns >= lo) & (ns <= hi)
    slope = loglog_slope(ns[sel], report.term_norms_sq[sel])
    return VerificationRow(rows, slope, (int(lo), int(hi)), all(r["pass"] for r in rows))


def write_params_json(path, report: NeumannDecayReport, params: DecayBoundParams, extra: dict | None = None) -> None:
    doc = report.to_json(params)
    doc.update(extra or {})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
