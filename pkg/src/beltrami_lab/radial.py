"""Radial maps ``f(z) = (z/|z|) phi(|z|)`` in closed form.

For a radial map everything reduces to the profile and the ratio
``a = r phi'/phi``:

    K = max(a, 1/a)        |Df| = (phi/r) max(a, 1)       J = (phi/r)^2 a
    |mu| = |a-1|/(a+1)     mu = (a-1)/(a+1) z/conj(z)     |df| = (phi/r)(1+a)/2

All quadrature runs in ``t = log(1/r)`` (so ``r dr = e^{-2t} dt``) and, past
``t = 1``, in ``u = log t``.  Integrands are formed as logarithms, which
keeps doubly-exponential profiles and divergent weights finite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from ._validation import check_positive
from .grid import DEFAULT_N, DEFAULT_SIDE, ComplexGrid, sample
from .tables import Table
from .weights import WeightSpec

CATALOG = ("power", "g_eps", "alpha_sharp", "custom")

#: Relative tolerance of the one dimensional quadratures.
QUAD_RTOL = 1e-10


def _log_L(t: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``log log(e + e^t)`` as a function of ``t`` and ``u = log t``."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        small = np.log(t + np.log1p(np.exp(1.0 - t)))
        large = u + np.log1p(np.log1p(np.exp(1.0 - t)) / t)
    return np.where(t < 1.0, small, large)


def _log1p_er(t: np.ndarray) -> np.ndarray:
    """``log(1 + e r)`` with ``r = e^{-t}``."""
    return np.log1p(np.exp(1.0 - t))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """An increasing profile ``phi`` on ``(0, 1]`` and its logarithmic data.

    ``log_quantities(u)`` returns ``(log phi, log a)`` at ``t = e^u``; every
    other quantity is derived from that pair.
    """

    catalog_id: str
    params: tuple
    match_constant: float
    log_quantities: Callable = None

    @property
    def label(self) -> str:
        if not self.params:
            return self.catalog_id
        return f"{self.catalog_id}({', '.join(f'{k}={v:g}' for k, v in self.params)})"

    # -- pointwise --------------------------------------------------------

    def _from_r(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            t = -np.log(r)
            u = np.log(t)
        return r, t, self.log_quantities(u)

    def phi(self, r):
        _, _, (lp, _) = self._from_r(r)
        return np.exp(lp)

    def dphi(self, r):
        r, _, (lp, la) = self._from_r(r)
        return np.exp(lp + la) / r

    def a(self, r):
        """``r phi'(r) / phi(r)``."""
        _, _, (_, la) = self._from_r(r)
        return np.exp(la)

    def log_fields_u(self, u) -> dict:
        """Logarithmic field data at ``t = e^u``; ``*_r`` entries are multiplied by ``r``."""
        u = np.asarray(u, dtype=float)
        lp, la = self.log_quantities(u)
        la = np.asarray(la, dtype=float)
        pos = np.maximum(la, 0.0)
        return {
            "log_phi": lp,
            "log_a": la,
            "log_K": np.abs(la),
            "log_df_r": lp + pos,
            "log_dz_r": lp + np.logaddexp(0.0, la) - math.log(2.0),
            "log_1m_mu": math.log(2.0) + np.minimum(la, 0.0) - np.logaddexp(0.0, la),
            "log_jac_r2": 2 * lp + la,
        }


# -- catalog ------------------------------------------------------------------


def _power(K: float) -> RadialProfile:
    K = float(K)
    if not K >= 1:
        raise ValueError(f"power profile needs K >= 1, got {K!r}")

    def logq(u):
        with np.errstate(over="ignore"):
            t = np.exp(u)
        return -t / K, np.full_like(t, -math.log(K))

    return RadialProfile("power", (("K", K),), 1.0, logq)


def _g_eps(p: float, eps: float) -> RadialProfile:
    p = check_positive(p, "p")
    eps = float(eps)
    if not 0 < eps < 1:
        raise ValueError(f"g_eps needs 0 < eps < 1, got {eps!r}")

    def logq(u):
        with np.errstate(over="ignore"):
            t = np.exp(u)
        M = _log_L(t, u)
        log_phi = -0.5 * p * M - 0.5 * eps * np.log(M)
        log_a = -_log1p_er(t) - M + np.log(0.5 * p + 0.5 * eps / M)
        return log_phi, log_a

    c = math.log(math.e + 1) ** (-p / 2) * math.log(math.log(math.e + 1)) ** (-eps / 2)
    return RadialProfile("g_eps", (("p", p), ("eps", eps)), c, logq)


def _alpha_sharp(alpha: float) -> RadialProfile:
    alpha = float(alpha)
    if not alpha > 1:
        raise ValueError(f"alpha_sharp needs alpha > 1, got {alpha!r}")
    s = 1.0 - 1.0 / alpha
    log_c = (2.0 / s) * math.log(math.e + 1) ** s

    def logq(u):
        with np.errstate(over="ignore"):
            t = np.exp(u)
            M = _log_L(t, u)
            log_phi = log_c - (2.0 / s) * np.exp(s * M)
        log_a = math.log(2.0) + (s - 1.0) * M - _log1p_er(t)
        return log_phi, log_a

    return RadialProfile("alpha_sharp", (("alpha", alpha),), 1.0, logq)


def custom_profile(phi: Callable, dphi: Callable, match_constant: float | None = None) -> RadialProfile:
    """Wrap user callables; ``match_constant`` defaults to ``phi(1)``."""

    def logq(u):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            r = np.exp(-np.exp(u))
            ph = np.asarray(phi(r), dtype=float)
            return np.log(ph), np.log(r * np.asarray(dphi(r), dtype=float) / ph)

    c = float(phi(1.0)) if match_constant is None else float(match_constant)
    return RadialProfile("custom", (), c, logq)


def catalog_profile(catalog_id: str, **params) -> RadialProfile:
    """Build a catalog profile: ``power(K)``, ``g_eps(p, eps)`` or ``alpha_sharp(alpha)``."""
    builders = {"power": (_power, ("K",)), "g_eps": (_g_eps, ("p", "eps")), "alpha_sharp": (_alpha_sharp, ("alpha",))}
    if catalog_id not in builders:
        raise ValueError(f"unknown catalog id {catalog_id!r}; choose from {sorted(builders)}")
    fn, names = builders[catalog_id]
    if set(params) != set(names):
        raise ValueError(f"{catalog_id} takes parameters {names}, got {sorted(params)}")
    return fn(**params)


def profile_from_spec(spec: dict) -> RadialProfile:
    """``{"id": "g_eps", "p": 1, "eps": 0.5}`` style mapping (as used in configs)."""
    spec = dict(spec)
    cid = spec.pop("id", None)
    if cid is None:
        raise ValueError("profile spec needs an 'id'")
    return catalog_profile(cid, **spec)


def radial_fields(prof: RadialProfile, r) -> dict:
    """``K``, ``absDf``, ``jac`` and ``mu_abs`` at radii ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    with np.errstate(divide="ignore"):
        u = np.log(-np.log(r))
    q = prof.log_fields_u(u)
    if np.any(~np.isfinite(q["log_phi"])) or np.any(~np.isfinite(q["log_a"])):
        raise ValueError("profile has phi = 0 or phi' <= 0 at a requested radius")
    lr = np.log(r)
    return {
        "K": np.exp(q["log_K"]),
        "absDf": np.exp(q["log_df_r"] - lr),
        "jac": np.exp(q["log_jac_r2"] - 2 * lr),
        "mu_abs": np.abs(np.tanh(0.5 * q["log_a"])),
    }


@dataclass(frozen=True)
class RadialSet:
    """Disjoint ordered open intervals inside ``(0, 1)``."""

    intervals: tuple

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        prev = 0.0
        for a, b in iv:
            if not (0.0 <= a < b <= 1.0):
                raise ValueError(f"interval ({a}, {b}) is not inside (0, 1)")
            if a < prev:
                raise ValueError("intervals must be disjoint and ordered")
            prev = b
        object.__setattr__(self, "intervals", iv)

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    @property
    def area(self) -> float:
        """Area of ``{z : |z| in F}``."""
        return sum(math.pi * (b * b - a * a) for a, b in self.intervals)

    @classmethod
    def disk(cls, r: float) -> "RadialSet":
        return cls(((0.0, r),))


# -- log-space quadrature -------------------------------------------------------


def _logquad(g: Callable, a: float, b: float, rtol: float = QUAD_RTOL) -> float:
    """``log int_a^b exp(g(x)) dx`` for a vectorized log-integrand ``g``.

    Pieces where ``g`` varies by more than 40 are bisected; pieces lying far
    below the running maximum are dropped.
    """
    if not b > a:
        return -math.inf
    xs = np.linspace(a, b, 65)
    gs = g(xs)
    finite = gs[np.isfinite(gs)]
    if finite.size == 0:
        return -math.inf
    floor = finite.max() - 80.0
    return _logquad_rec(g, a, b, rtol, floor, 0)


def _logquad_rec(g, a, b, rtol, floor, depth) -> float:
    xs = np.linspace(a, b, 9)
    gs = g(xs)
    hi = np.max(gs)
    if not np.isfinite(hi) or hi < floor:
        return -math.inf
    lo = np.min(gs)
    if hi - lo > 40.0 and depth < 80 and (b - a) > 1e-13 * max(abs(a), abs(b), 1.0):
        mid = 0.5 * (a + b)
        return float(np.logaddexp(_logquad_rec(g, a, mid, rtol, floor, depth + 1), _logquad_rec(g, mid, b, rtol, floor, depth + 1)))

    def f(x):
        return math.exp(float(g(np.array([x]))[0]) - hi)

    with warnings.catch_warnings():
        # roundoff notices at the requested tolerance are harmless here
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=200)
    return hi + math.log(val) if val > 0 else -math.inf


def _u_breaks(u_lo: float, u_hi: float) -> np.ndarray:
    pts = [u_lo]
    while pts[-1] < u_hi:
        pts.append(min(u_hi, pts[-1] + max(1.0, 0.25 * abs(pts[-1]))))
    return np.asarray(pts)


def _log_integral_t(log_dt: Callable, t_lo: float, t_hi: float, rtol: float = QUAD_RTOL) -> float:
    """``log int_{t_lo}^{t_hi} exp(log_dt(t, u))`` with the change ``t = e^u`` past ``t = 1``."""
    out = -math.inf
    if t_lo < 1.0:
        hi = min(t_hi, 1.0)

        def gt(t):
            with np.errstate(divide="ignore"):
                return log_dt(t, np.log(t))

        out = np.logaddexp(out, _logquad(gt, t_lo, hi, rtol))
    if t_hi > 1.0:
        u_lo = math.log(max(t_lo, 1.0))
        u_hi = math.log(t_hi) if math.isfinite(t_hi) else math.inf

        def gu(u):
            with np.errstate(over="ignore"):
                t = np.exp(u)
            return log_dt(t, u) + u

        if math.isfinite(u_hi):
            br = _u_breaks(u_lo, u_hi)
            for x0, x1 in zip(br[:-1], br[1:]):
                out = np.logaddexp(out, _logquad(gu, x0, x1, rtol))
        else:
            out = _log_integral_to_infinity(gu, u_lo, out, rtol)
    return float(out)


U_MAX = 5000.0
#: Smallest fitted tail exponent ``gamma`` (density ``~ u^-gamma``) accepted as convergent at ``U_MAX``.
TAIL_EXPONENT_MIN = 1.05


_LOG_DBL_MAX = math.log(np.finfo(float).max)


def _late_growth(gu: Callable, u: float, acc: float, rtol: float) -> float:
    """Largest log contribution of ``exp(gu)`` on ``(u, U_MAX)`` if it exceeds the tolerance, else ``-inf``.

    Probe points where the log-integrand overflows to ``nan`` are ignored.
    """
    probe = np.geomspace(max(u, 1.0), U_MAX, 400)
    with np.errstate(all="ignore"):
        g = gu(probe) + np.log(np.maximum(1.0, 0.25 * probe))
    g = g[~np.isnan(g)]
    top = float(np.max(g)) if g.size else -math.inf
    return top if top >= acc + math.log(rtol * 1e-3) else -math.inf


def _power_tail(gu: Callable, u: float) -> float:
    """``log int_u^inf`` of a density ``A v^-gamma`` fitted on ``(u/2, u)``; ``inf`` if ``gamma`` is too small."""
    g1, g2 = gu(np.array([0.5 * u, u]))
    gamma = -(g2 - g1) / math.log(2.0)
    if not gamma >= TAIL_EXPONENT_MIN:
        return math.inf
    return float(g2 + math.log(u) - math.log(gamma - 1.0))


def _log_integral_to_infinity(gu: Callable, u_lo: float, acc: float, rtol: float) -> float:
    """Extend in ``u`` until a segment adds less than ``rtol * 1e-3`` of the total.

    Convergence is accepted after three quiet segments only if no later
    growth is visible on a probe grid up to ``U_MAX``.  Densities that are
    still decaying like a power of ``u`` at ``U_MAX`` get an analytic tail.
    """
    u = u_lo
    quiet = 0
    while u < U_MAX:
        step = max(1.0, 0.25 * abs(u))
        piece = _logquad(gu, u, u + step, rtol)
        acc_new = np.logaddexp(acc, piece)
        small = piece - acc_new < math.log(rtol * 1e-3)
        tail_falling = gu(np.array([u + step]))[0] < gu(np.array([u]))[0]
        acc = acc_new
        u += step
        quiet = quiet + 1 if (small and tail_falling) else 0
        if quiet >= 3:
            late = _late_growth(gu, u, acc, rtol)
            if late == -math.inf:
                return float(acc)
            if late > _LOG_DBL_MAX:
                return math.inf
            quiet = 0
    if not np.isfinite(acc):
        return math.inf
    return float(np.logaddexp(acc, _power_tail(gu, u)))


def _t_of_r0(r0: float) -> float:
    r0 = float(r0)
    if not 0.0 <= r0 < 1.0:
        raise ValueError(f"r0 must lie in [0, 1), got {r0!r}")
    return math.inf if r0 == 0.0 else -math.log(r0)


def _weight_log_dt(prof: RadialProfile, weight: WeightSpec) -> Callable:
    def log_dt(t, u):
        q = prof.log_fields_u(u)
        return weight.log_value(
            log_df=q["log_df_r"], log_K=q["log_K"], log_1m_mu=q["log_1m_mu"], log_dz=q["log_dz_r"], shift=t, log_shift=u
        )

    return log_dt


def log_weighted_integral(prof: RadialProfile, weight: WeightSpec, r0: float, rtol: float = QUAD_RTOL) -> float:
    """``log(2 pi int_{r0}^1 W r dr)``; ``r0 = 0`` integrates over the whole disk."""
    t0 = _t_of_r0(r0)
    return math.log(2 * math.pi) + _log_integral_t(_weight_log_dt(prof, weight), 0.0, t0, rtol)


def weighted_integral(prof: RadialProfile, weight: WeightSpec, r0: float, rtol: float = QUAD_RTOL) -> float:
    """``2 pi int_{r0}^1 W(K, |Df|, ...) r dr`` (``inf`` when divergent with ``r0 = 0``)."""
    return math.exp(log_weighted_integral(prof, weight, r0, rtol))


def truncation_sweep(prof: RadialProfile, weight: WeightSpec, t_points, rtol: float = QUAD_RTOL) -> np.ndarray:
    """Logs of the truncated integrals at ``r0 = e^{-t}`` for increasing ``t`` in ``t_points``.

    The intervals between consecutive points are integrated once and
    accumulated, so a sweep costs one pass over ``(0, max t)``.
    """
    ts = np.asarray(t_points, dtype=float)
    if ts.ndim != 1 or np.any(np.diff(ts) <= 0) or ts[0] <= 0:
        raise ValueError("t_points must be positive and strictly increasing")
    log_dt = _weight_log_dt(prof, weight)
    out = np.empty_like(ts)
    acc = -math.inf
    prev = 0.0
    for i, t in enumerate(ts):
        acc = np.logaddexp(acc, _log_integral_t(log_dt, prev, t, rtol))
        out[i] = acc
        prev = t
    return out + math.log(2 * math.pi)


def log_exp_distortion_integral(prof: RadialProfile, p: float, alpha: float = 1.0, r0: float = 0.0, rtol: float = QUAD_RTOL) -> float:
    t0 = _t_of_r0(r0)

    def log_dt(t, u):
        q = prof.log_fields_u(u)
        return p * np.exp(alpha * q["log_K"]) - 2 * t

    return math.log(2 * math.pi) + _log_integral_t(log_dt, 0.0, t0, rtol)


def exp_distortion_integral(prof: RadialProfile, p: float, alpha: float = 1.0, r0: float = 0.0, rtol: float = QUAD_RTOL) -> float:
    """``2 pi int_{r0}^1 exp(p K^alpha) r dr``, accumulated in log space."""
    lv = log_exp_distortion_integral(prof, p, alpha, r0, rtol)
    return math.exp(lv) if lv < 709 else math.inf


def radial_image_area(prof: RadialProfile, F: RadialSet, rtol: float = 1e-13) -> float:
    """``2 pi int_F phi phi' dr`` by quadrature (``= pi sum (phi(b)^2 - phi(a)^2)``)."""

    def log_dt(t, u):
        q = prof.log_fields_u(u)
        return q["log_jac_r2"]

    total = 0.0
    for a, b in F.intervals:
        t_hi = math.inf if a == 0.0 else -math.log(a)
        t_lo = -math.log(b)
        total += 2 * math.pi * math.exp(_log_integral_t(log_dt, t_lo, t_hi, rtol))
    return total


def radial_image_area_exact(prof: RadialProfile, F: RadialSet) -> float:
    """Antiderivative form ``pi sum (phi(b)^2 - phi(a)^2)``."""
    total = 0.0
    for a, b in F.intervals:
        pa = 0.0 if a == 0.0 else float(prof.phi(a)) ** 2
        total += math.pi * (float(prof.phi(b)) ** 2 - pa)
    return total


def radial_c0(prof: RadialProfile, p: float) -> float:
    """``int_0^1 (e^{p a} + e^{p / a}) r dr`` (the reciprocal pair, without ``2 pi``)."""

    def log_dt(t, u):
        q = prof.log_fields_u(u)
        la = q["log_a"]
        with np.errstate(over="ignore", invalid="ignore"):
            return np.logaddexp(p * np.exp(la), p * np.exp(-la)) - 2 * t

    lv = _log_integral_t(log_dt, 0.0, math.inf)
    return math.exp(lv) if lv < 709 else math.inf


def annuli_profile_bound(prof: RadialProfile, p: float, n_max: int) -> Table:
    """Per-annulus Jensen chain ``phi(e^-n) <= phi(1) exp(-sum_k p/(log C0 + 2k))``.

    Columns: ``n, phi, chain_bound, power_bound, ratio, pass`` where
    ``power_bound = C n^{-p/2}`` with ``C = phi(1) ((log C0 + 2)/2)^{p/2}`` and
    ``ratio = phi(e^-n) n^{p/2}``.
    """
    p = check_positive(p, "p")
    C0 = radial_c0(prof, p)
    if not math.isfinite(C0):
        raise ValueError(f"profile {prof.label} does not satisfy the integrability condition for p={p}")
    c = math.log(C0)
    phi1 = float(prof.phi(1.0))
    C = phi1 * ((c + 2) / 2) ** (p / 2)
    tab = Table(["n", "phi", "chain_bound", "power_bound", "ratio", "pass"], meta={"C0": C0, "C": C, "p": p, "profile": prof.label})
    s = 0.0
    for n in range(1, int(n_max) + 1):
        s += p / (c + 2 * n)
        phin = float(prof.phi(math.exp(-n)))
        chain = phi1 * math.exp(-s)
        power = C * n ** (-p / 2)
        tab.append(n=n, phi=phin, chain_bound=chain, power_bound=power, ratio=phin * n ** (p / 2), **{"pass": phin <= chain * (1 + 1e-12) and chain <= power * (1 + 1e-12)})
    return tab


def radial_area_bound_check(prof: RadialProfile, p: float, r_list) -> Table:
    """``|f(E)|`` for disks ``E = {|z| < r}`` against ``log(1 + 1/|E|)^{-p}``.

    The supremum of ``ratio`` is stored as ``meta['C_empirical']``.
    """
    p = float(p)
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"p must lie in [1, 2], got {p!r}")
    tab = Table(["r", "E_measure", "image_area", "bound_shape", "ratio"], meta={"p": p, "profile": prof.label})
    for r in r_list:
        r = float(r)
        if not 0 < r < 1:
            raise ValueError(f"radius {r!r} outside (0, 1)")
        E = math.pi * r * r
        area = radial_image_area(prof, RadialSet.disk(r))
        shape = math.log1p(1.0 / E) ** (-p)
        tab.append(r=r, E_measure=E, image_area=area, bound_shape=shape, ratio=area / shape)
    tab.meta["C_empirical"] = float(max(tab.column("ratio"))) if len(tab) else 0.0
    return tab


def level_radius(prof: RadialProfile, K_threshold: float) -> float:
    """``r*`` with ``{r < 1 : K(r) > K_threshold} = (0, r*)`` for profiles whose ``K`` decreases in ``r``."""
    ts = np.concatenate([[0.0], np.geomspace(1e-8, 1e8, 801)])
    with np.errstate(divide="ignore"):
        K = np.exp(prof.log_fields_u(np.log(ts))["log_K"])
    above = K > K_threshold
    if above[0]:
        return 1.0
    if not above.any():
        return 0.0
    i = int(np.argmax(above))

    def g(t):
        return float(np.exp(prof.log_fields_u(np.array([math.log(t)]))["log_K"][0])) - K_threshold

    t_star = brentq(g, ts[i - 1] if ts[i - 1] > 0 else 1e-300, ts[i], xtol=1e-15, rtol=1e-14)
    return math.exp(-t_star)


# -- grid samplers -----------------------------------------------------------------


def _grid_log_fields(prof: RadialProfile, z: np.ndarray):
    r = np.abs(z)
    inside = r < 1.0
    rr = np.where(inside, r, 0.5)
    with np.errstate(divide="ignore"):
        u = np.log(-np.log(rr))
    return inside, rr, prof.log_fields_u(u)


def sample_mu(prof: RadialProfile, n: int = DEFAULT_N, side: float = DEFAULT_SIDE) -> ComplexGrid:
    """``mu = (a-1)/(a+1) z/conj(z)`` inside the unit disk, 0 outside."""

    def fn(z):
        inside, rr, q = _grid_log_fields(prof, z)
        ph = (z / np.where(inside, rr, 1.0)) ** 2
        return np.where(inside, np.tanh(0.5 * q["log_a"]) * ph, 0.0)

    return sample(fn, side, n)


def sample_principal_map(prof: RadialProfile, n: int = DEFAULT_N, side: float = DEFAULT_SIDE) -> ComplexGrid:
    """``(z/|z|) phi(|z|)/phi(1)`` inside the disk and ``z`` outside."""
    phi1 = float(prof.phi(1.0))

    def fn(z):
        inside, rr, q = _grid_log_fields(prof, z)
        return np.where(inside, z / rr * np.exp(q["log_phi"]) / phi1, z)

    return sample(fn, side, n)


def sample_derivatives(prof: RadialProfile, n: int = DEFAULT_N, side: float = DEFAULT_SIDE) -> tuple[ComplexGrid, ComplexGrid]:
    """Closed-form ``(df, dbar f)`` of :func:`sample_principal_map`."""
    phi1 = float(prof.phi(1.0))
    x = -side / 2 + (np.arange(n) + 0.5) * side / n
    z = x[None, :] + 1j * x[:, None]
    inside, rr, q = _grid_log_fields(prof, z)
    scale = np.exp(q["log_phi"]) / rr / phi1
    a = np.exp(q["log_a"])
    dz = np.where(inside, scale * (1 + a) / 2, 1.0)
    dzbar = np.where(inside, scale * (a - 1) / 2 * (z / rr) ** 2, 0.0)
    return ComplexGrid(side, n, dz), ComplexGrid(side, n, dzbar)
