"""Weighted integrands of the regularity estimates, evaluated in log space.

Every weight is a function of the distortion ``K``, the operator norm
``|Df|``, ``|mu|`` and ``|df|``.  The evaluator receives logarithms of
``|Df| r`` and ``|df| r`` together with ``shift = log(1/r)`` and returns
``log(W r^2)``; radial quadrature in ``r dr`` then never forms ``1/r``
explicitly. Two-dimensional callers pass ``shift = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = {
    "thm11": ("eps",),
    "thm12": ("p", "eps"),
    "thm13i": ("eps",),
    "thm13ii": ("p", "eps"),
    "thm14": ("beta",),
    "eps_power": ("eps",),
    "k_log": ("gamma",),
    "df_loglog": ("p", "gamma"),
}


def _log_log_e_plus(log_x):
    """``log log(e + x)`` from ``log x``."""
    return np.log(np.logaddexp(1.0, log_x))


def _log_log_shifted(log_xr, shift, log_shift, c: float):
    """``log log(c + x)`` for ``log x = log_xr + shift``.

    When ``shift = e^log_shift`` is not representable the value is
    ``log_shift + log1p(log_xr e^-log_shift)`` to double precision.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.log(np.logaddexp(math.log(c), log_xr + shift))
    if log_shift is None:
        return direct
    with np.errstate(over="ignore", invalid="ignore"):
        far = log_shift + np.log1p(log_xr * np.exp(-np.asarray(log_shift, dtype=float)))
    return np.where(np.isfinite(shift), direct, far)


@dataclass(frozen=True)
class WeightSpec:
    """Selector for one weighted integrand.

    Kinds and integrands (``L_K = log(e+K)``, ``L_D = log(e+|Df|)``,
    ``LL_D = log log(|Df|+10)``):

    ``thm11(eps)``      ``|Df|^2 / L_K^(4+eps)``
    ``thm12(p, eps)``   ``|Df|^2 L_D^(p-1) LL_D^-(1+3p+eps)``
    ``thm13i(eps)``     ``|Df|^2 / L_K^(1+eps)``
    ``thm13ii(p, eps)`` ``|Df|^2 L_D^(p-1) LL_D^-(1+eps)``
    ``thm14(beta)``     ``|Df|^2 exp(L_D^beta)``
    ``eps_power(eps)``  ``(1-|mu|)^eps |df|^2``
    ``k_log(gamma)``    ``|Df|^2 / L_K^gamma``
    ``df_loglog(p, gamma)`` ``|Df|^2 L_D^(p-1) LL_D^-gamma``
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}; choose from {sorted(KINDS)}")
        names = KINDS[self.kind]
        params = tuple(float(v) for v in self.params)
        if len(params) != len(names):
            raise ValueError(f"{self.kind} takes parameters {names}, got {self.params!r}")
        object.__setattr__(self, "params", params)
        if self.kind in ("thm11", "thm12", "thm13i", "thm13ii", "eps_power") and not params[-1] > 0:
            raise ValueError(f"eps must be positive, got {params[-1]!r}")
        if self.kind == "thm14" and not 0 < params[0] < 1:
            raise ValueError(f"beta must lie in (0, 1), got {params[0]!r}")

    @classmethod
    def make(cls, kind: str, **kw) -> "WeightSpec":
        names = KINDS.get(kind)
        if names is None:
            raise ValueError(f"unknown weight kind {kind!r}; choose from {sorted(KINDS)}")
        missing = [n for n in names if n not in kw]
        extra = set(kw) - set(names)
        if missing or extra:
            raise ValueError(f"{kind} takes parameters {names}, got {sorted(kw)}")
        return cls(kind, tuple(kw[n] for n in names))

    @property
    def label(self) -> str:
        return f"{self.kind}({', '.join(f'{v:g}' for v in self.params)})"

    def as_dict(self) -> dict:
        return {"kind": self.kind, **dict(zip(KINDS[self.kind], self.params))}

    def _reduced(self) -> tuple[str, tuple]:
        """Map the named kinds onto the three generic families."""
        k, P = self.kind, self.params
        if k == "thm11":
            return "k_log", (4 + P[0],)
        if k == "thm13i":
            return "k_log", (1 + P[0],)
        if k == "thm12":
            return "df_loglog", (P[0], 1 + 3 * P[0] + P[1])
        if k == "thm13ii":
            return "df_loglog", (P[0], 1 + P[1])
        return k, P

    def log_value(self, *, log_df, log_K, log_1m_mu=None, log_dz=None, shift=0.0, log_shift=None):
        """``log(W r^2)`` where ``log_df = log(|Df| r)``, ``log_dz = log(|df| r)``, ``shift = log(1/r)``.

        ``log_shift = log(shift)`` keeps the ``|Df|`` logarithms finite when
        ``shift`` itself overflows.
        """
        kind, P = self._reduced()
        if kind == "eps_power":
            return P[0] * log_1m_mu + 2 * log_dz
        base = 2 * log_df
        if kind == "k_log":
            return base - P[0] * _log_log_e_plus(log_K)
        lle = _log_log_shifted(log_df, shift, log_shift, math.e)
        if kind == "df_loglog":
            p, g = P
            lld = np.log(_log_log_shifted(log_df, shift, log_shift, 10.0))
            return base + (p - 1) * lle - g * lld
        if kind == "thm14":
            return base + np.exp(P[0] * lle)
        raise AssertionError(kind)

    def value(self, *, K, abs_df, mu_abs=None, abs_dz=None):
        """Plain evaluation on arrays (two-dimensional use)."""
        with np.errstate(divide="ignore"):
            lv = self.log_value(
                log_df=np.log(abs_df),
                log_K=np.log(K),
                log_1m_mu=None if mu_abs is None else np.log1p(-np.asarray(mu_abs)),
                log_dz=None if abs_dz is None else np.log(abs_dz),
            )
        return np.exp(lv)


def parse_weight(text: str) -> WeightSpec:
    """Parse ``"thm13i(0.5)"`` style labels."""
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ValueError(f"weight must look like kind(v1, v2), got {text!r}")
    kind, rest = text[:-1].split("(", 1)
    vals = tuple(float(v) for v in rest.split(",") if v.strip())
    return WeightSpec(kind.strip(), vals)
