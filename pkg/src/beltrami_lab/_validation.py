"""Input validation helpers shared by the public operations.

These play the role ``sklearn.utils.validation`` plays for array input:
every public entry point funnels its arguments through one of these before
doing numerical work, so error messages are uniform across modules.
"""

from __future__ import annotations

import numbers

import numpy as np

MIN_SIDE = 4.0


def is_power_of_two(n) -> bool:
    return isinstance(n, numbers.Integral) and n > 0 and (n & (n - 1)) == 0


def check_grid_shape(n, side) -> tuple[int, float]:
    """Validate a (n, side) grid descriptor and return it normalized."""
    if isinstance(n, bool) or not is_power_of_two(n):
        raise ValueError(f"n must be a positive power of two, got {n!r}")
    side = float(side)
    if not np.isfinite(side) or side < MIN_SIDE:
        raise ValueError(f"side must be >= {MIN_SIDE}, got {side!r}")
    return int(n), side


def check_complex_array(values, n: int | None = None, name: str = "values") -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square 2D array, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has {arr.shape[0]} samples per axis, expected {n}")
    arr = arr.astype(np.complex128, copy=True)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_same_grid(*grids) -> None:
    """Raise if the grids (or masks carrying a grid) do not share a descriptor."""
    descriptors = {(g.n, g.side) for g in grids}
    if len(descriptors) > 1:
        raise ValueError(f"mismatched grid descriptors: {sorted(descriptors)}")


def check_open_unit(x, name: str) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {x!r}")
    return x


def check_positive(x, name: str) -> float:
    x = float(x)
    if not (np.isfinite(x) and x > 0):
        raise ValueError(f"{name} must be positive, got {x!r}")
    return x


def check_decay_exponents(p, alpha, beta) -> tuple[float, float, float]:
    """The admissible range for the Neumann decay bound: p > 0, alpha >= 1, p/2 <= beta < p."""
    p = check_positive(p, "p")
    alpha = float(alpha)
    if not alpha >= 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha!r}")
    beta = float(beta)
    if not (p / 2 <= beta < p):
        raise ValueError(f"beta must lie in [p/2, p) = [{p / 2}, {p}), got {beta!r}")
    return p, alpha, beta
