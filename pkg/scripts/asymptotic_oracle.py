"""Independent oracle for the radial regression targets.

Recomputes, without importing the package, the quantities the radial tests
and the acceptance suite compare against:

* symbolic limits of the distortion of g_eps as r -> 0 (sympy);
* high precision truncated weighted integrals of g_eps at r0 = e^-k (mpmath,
  with r phi'/phi differentiated symbolically by sympy);
* the leading growth constant of the divergent ``k_log(0.5)`` weight;
* the log-growth function of the ``thm14`` integrand for the alpha map;
* the eps-sweep exponent of the radial g_eps field.

Run ``python3 scripts/asymptotic_oracle.py`` to regenerate
``src/beltrami_lab/data/radial_rates.json``.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import mpmath as mp
import sympy as sp

mp.mp.dps = 30
OUT = Path(__file__).resolve().parents[1] / "src" / "beltrami_lab" / "data" / "radial_rates.json"


_r = sp.symbols("r", positive=True)


def _ratio_fn(phi):
    """mpmath callable ``r -> r phi'(r)/phi(r)`` from a sympy profile."""
    return sp.lambdify(_r, sp.simplify(_r * sp.diff(phi, _r) / phi), modules="mpmath")


def _g_eps_phi(p, eps):
    L = sp.log(sp.E + 1 / _r)
    return L ** (-sp.Rational(p) / 2) * sp.log(L) ** (-sp.Rational(eps) / 2)


def _alpha_phi(alpha):
    s = 1 - sp.Rational(1, alpha)
    c = sp.exp(2 / s * sp.log(sp.E + 1) ** s)
    return c * sp.exp(-2 / s * sp.log(sp.E + 1 / _r) ** s)


G_EPS_A = _ratio_fn(_g_eps_phi(1, sp.Rational(1, 2)))
ALPHA2_A = _ratio_fn(_alpha_phi(2))


def g_eps_symbolic(p, eps):
    r, t = _r, sp.symbols("t", positive=True)
    L = sp.log(sp.E + 1 / r)
    phi = _g_eps_phi(p, eps)
    a = sp.simplify(r * sp.diff(phi, r) / phi)
    K = 1 / a
    # K * p / (2 L) -> 1 with the loglog correction 1/(1 + eps/(p log L)) and the factor (1 + e r)
    ratio = sp.simplify(K * p / (2 * L))
    lim = sp.limit(ratio.subs(r, sp.exp(-t)), t, sp.oo)
    return {"a": str(a), "K_times_p_over_2L_limit": float(lim)}


def g_eps_log_phi_t(t, p, eps):
    L = mp.log(mp.e + mp.exp(t))
    return -(p / 2) * mp.log(L) - (eps / 2) * mp.log(mp.log(L))


def g_eps_integrand(t, p, eps, gamma):
    """2 pi |Df|^2 log^-gamma(e + K) e^{-2t} for g_eps (p = 1, eps = 1/2)."""
    a = G_EPS_A(mp.exp(-t))
    K = max(a, 1 / a)
    lphi = g_eps_log_phi_t(t, p, eps)
    return 2 * mp.pi * mp.exp(2 * lphi) * max(a, 1) ** 2 * mp.log(mp.e + K) ** (-gamma)


def g_eps_truncations(p, eps, gamma, ks):
    vals, acc, prev = [], mp.mpf(0), 0
    for k in ks:
        acc += mp.quad(lambda s: g_eps_integrand(s, p, eps, gamma), mp.linspace(prev, k, 4))
        vals.append(float(acc))
        prev = k
    return vals


def g_eps_leading_growth(p, eps, gamma):
    """Leading law of the integrand: ``A t^-p (log t)^-(eps+gamma)``.

    ``A`` is read off far out (t = 10^10^j), where the lower order
    corrections are below 1e-4.
    """
    expo = eps + gamma
    samples = []
    for j in (2, 3, 4):
        t = mp.mpf(10) ** (10**j)
        samples.append(float(g_eps_integrand(t, p, eps, gamma) * t**p * mp.log(t) ** expo))
    law = "loglog" if (p == 1 and abs(expo - 1) < 1e-12) else ("power_log" if p == 1 and expo < 1 else "convergent")
    return {"log_exponent": expo, "coefficient_samples": samples, "coefficient": samples[-1], "law": law}


def alpha_sharp_log_integrand(t, alpha, beta):
    """log of |Df|^2 exp(log^beta(e+|Df|)) e^{-2t} for the alpha map (alpha = 2)."""
    s = 1 - mp.mpf(1) / alpha
    L = mp.log(mp.e + mp.exp(t))
    log_c = (2 / s) * mp.log(mp.e + 1) ** s
    lphi = log_c - (2 / s) * L**s
    a = ALPHA2_A(mp.exp(-t))
    log_df = lphi + t + mp.log(max(a, 1))
    return 2 * lphi + 2 * mp.log(max(a, 1)) + mp.log(mp.e + mp.exp(log_df)) ** beta


_L = sp.symbols("L", positive=True)
# beyond t = 1e20, e r < 1e-20: L = t and a = -d log phi / dL to working precision
G_EPS_A_FAR = sp.lambdify(
    _L, sp.simplify(-sp.diff(sp.log(_L ** sp.Rational(-1, 2) * sp.log(_L) ** sp.Rational(-1, 4)), _L)), modules="mpmath"
)
U_FAR = 20 * mp.log(10)


def radial_eps_integral(p, eps_g, eps):
    """2 pi int (1-|mu|)^eps |df|^2 r dr over the disk for g_eps (p = 1, eps_g = 1/2)."""

    def f(t, a, log_phi):
        one_m_mu = 2 * min(a, 1) / (1 + a)
        return 2 * mp.pi * mp.exp(2 * log_phi) * (1 + a) ** 2 / 4 * one_m_mu**eps

    def near_u(u):
        t = mp.exp(u)
        return f(t, G_EPS_A(mp.exp(-t)), g_eps_log_phi_t(t, p, eps_g)) * t

    def far_u(u):
        L = mp.exp(u)
        return f(L, G_EPS_A_FAR(L), -mp.log(L) / 2 - mp.log(mp.log(L)) / 4) * L

    # the tail decays like exp(-eps u) in u = log t, so integrate there
    head = mp.quad(lambda t: f(t, G_EPS_A(mp.exp(-t)), g_eps_log_phi_t(t, p, eps_g)), [0, 1])
    mid = mp.quad(near_u, mp.linspace(0, U_FAR, 8))
    # e^{-eps u} with eps >= 0.05 is below 1e-30 past u = 1600
    tail = mp.quad(far_u, [U_FAR, 100, 200, 400, 800, 1600, 3200])
    return float(head + mid + tail)


def g_eps_total(gamma):
    """Whole-disk 2 pi int |Df|^2 log^-gamma(e+K) r dr for g_eps (p = 1, eps = 1/2), gamma > 1/2."""

    def far_u(u):
        L = mp.exp(u)
        a = G_EPS_A_FAR(L)
        K = max(a, 1 / a)
        lphi = -mp.log(L) / 2 - mp.log(mp.log(L)) / 4
        return 2 * mp.pi * mp.exp(2 * lphi) * max(a, 1) ** 2 * mp.log(mp.e + K) ** (-gamma) * L

    head = mp.quad(lambda t: g_eps_integrand(t, 1, 0.5, gamma), [0, 1, 10, 100, 10**4, 10**8, 10**12, 10**16, mp.exp(U_FAR)])
    tail = mp.quad(far_u, [U_FAR, 100, 1000, 10**4, mp.inf])
    return float(head + tail)


def build() -> dict:
    p, eps = 1, sp.Rational(1, 2)
    ks = list(range(2, 41))
    doc = {
        "g_eps(p=1,eps=0.5)": {
            "symbolic": g_eps_symbolic(p, eps),
            "k": ks,
            "k_log(0.5)": g_eps_truncations(1, 0.5, 0.5, ks),
            "k_log(1.5)": g_eps_truncations(1, 0.5, 1.5, ks),
            "growth_k_log(0.5)": g_eps_leading_growth(1, 0.5, 0.5),
            "eps_grid": [0.05 * 2 ** (j / 2) for j in range(7)],
            "total_k_log(1.5)": g_eps_total(1.5),
            "total_k_log(2.5)": g_eps_total(2.5),
        },
        "alpha_sharp(alpha=2)": {},
    }
    doc["g_eps(p=1,eps=0.5)"]["eps_integrals"] = [radial_eps_integral(1, 0.5, e) for e in doc["g_eps(p=1,eps=0.5)"]["eps_grid"]]
    # I(eps) ~ Gamma(1/2) (pi/2) eps^-1/2: u = log t turns the integrand into e^{-eps u} u^{-1/2}
    doc["g_eps(p=1,eps=0.5)"]["eps_sweep_exponent"] = 0.5
    T = [2.0**j for j in range(1, 41)]
    for beta in (0.4, 0.6):
        G = [float(alpha_sharp_log_integrand(mp.mpf(x), 2, beta)) for x in T]
        doc["alpha_sharp(alpha=2)"][f"thm14({beta})"] = {"T": T, "log_integrand": G, "divergent": G[-1] > G[-2]}
    return doc


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args(argv)
    doc = build()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
