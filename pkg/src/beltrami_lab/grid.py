"""Periodic sampling of complex fields on a square torus.

Every two-dimensional operator in the package works on a :class:`ComplexGrid`:
``n x n`` samples taken at cell centers of the square ``[-side/2, side/2)^2``.
Row ``j`` holds the points with ``y = y_j``, column ``k`` those with ``x = x_k``.

Reductions use ``numpy.sum`` on contiguous flattened arrays, which is pairwise
summation in a fixed order, so repeated runs give bit-identical numbers.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from ._validation import check_complex_array, check_grid_shape, check_same_grid

DEFAULT_SIDE = 4.0
DEFAULT_N = 1024

_HEADER = struct.Struct("<qd")


def cell_centers(n: int, side: float) -> np.ndarray:
    """1D cell-center coordinates ``-side/2 + (j + 1/2) h``."""
    n, side = check_grid_shape(n, side)
    h = side / n
    return -side / 2 + (np.arange(n) + 0.5) * h


@dataclass(frozen=True, eq=False)
class ComplexGrid:
    """Samples of a complex field at the cell centers of a periodic square.

    Parameters
    ----------
    side : float
        Edge length of the torus; at least 4 so the unit disk covers at most
        a quarter of each axis.
    n : int
        Samples per axis, a power of two.
    values : array of shape (n, n)
        Field samples; copied and frozen on construction.
    """

    side: float
    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        n, side = check_grid_shape(self.n, self.side)
        arr = check_complex_array(self.values, n)
        arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "values", arr)

    @property
    def h(self) -> float:
        return self.side / self.n

    @property
    def cell_area(self) -> float:
        return self.h**2

    @property
    def descriptor(self) -> tuple[int, float]:
        return self.n, self.side

    @cached_property
    def z(self) -> np.ndarray:
        """Cell centers as complex numbers, same layout as ``values``."""
        x = cell_centers(self.n, self.side)
        z = x[None, :] + 1j * x[:, None]
        z.setflags(write=False)
        return z

    def with_values(self, values) -> "ComplexGrid":
        """A new grid on the same descriptor carrying ``values``."""
        return ComplexGrid(self.side, self.n, values)

    def __mul__(self, c):
        if isinstance(c, ComplexGrid):
            check_same_grid(self, c)
            return self.with_values(self.values * c.values)
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, ComplexGrid):
            check_same_grid(self, other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, ComplexGrid):
            check_same_grid(self, other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    @classmethod
    def zeros(cls, side: float = DEFAULT_SIDE, n: int = DEFAULT_N) -> "ComplexGrid":
        n, side = check_grid_shape(n, side)
        return cls(side, n, np.zeros((n, n), dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class PixelSet:
    """A union of grid cells, the discrete stand-in for a measurable set."""

    mask: np.ndarray = field(repr=False)
    n: int
    side: float

    def __post_init__(self):
        n, side = check_grid_shape(self.n, self.side)
        mask = np.asarray(self.mask, dtype=bool).copy()
        if mask.shape != (n, n):
            raise ValueError(f"mask shape {mask.shape} does not match grid ({n}, {n})")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "side", side)

    @property
    def cell_area(self) -> float:
        return (self.side / self.n) ** 2

    @property
    def measure(self) -> float:
        return int(np.count_nonzero(self.mask)) * self.cell_area

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    @classmethod
    def from_grid(cls, grid: ComplexGrid, mask) -> "PixelSet":
        return cls(mask, grid.n, grid.side)

    @classmethod
    def disk(cls, grid: ComplexGrid, radius: float = 1.0, center: complex = 0.0) -> "PixelSet":
        """Cells whose centers satisfy ``|z - center| < radius``."""
        return cls(np.abs(grid.z - center) < radius, grid.n, grid.side)

    @classmethod
    def annulus(cls, grid: ComplexGrid, r_in: float, r_out: float) -> "PixelSet":
        r = np.abs(grid.z)
        return cls((r > r_in) & (r < r_out), grid.n, grid.side)

    @classmethod
    def empty(cls, grid: ComplexGrid) -> "PixelSet":
        return cls(np.zeros((grid.n, grid.n), dtype=bool), grid.n, grid.side)

    def _check(self, other: "PixelSet"):
        check_same_grid(self, other)

    def __or__(self, other: "PixelSet") -> "PixelSet":
        self._check(other)
        return PixelSet(self.mask | other.mask, self.n, self.side)

    def __and__(self, other: "PixelSet") -> "PixelSet":
        self._check(other)
        return PixelSet(self.mask & other.mask, self.n, self.side)

    def __sub__(self, other: "PixelSet") -> "PixelSet":
        self._check(other)
        return PixelSet(self.mask & ~other.mask, self.n, self.side)


def sample(fn: Callable, side: float = DEFAULT_SIDE, n: int = DEFAULT_N) -> ComplexGrid:
    """Evaluate ``fn`` at every cell center.

    ``fn`` is called once on the full ``(n, n)`` complex array of centers and
    must be vectorized (numpy ufunc style). A scalar return is broadcast.
    """
    n, side = check_grid_shape(n, side)
    x = cell_centers(n, side)
    z = x[None, :] + 1j * x[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(fn(z), dtype=np.complex128)
    vals = np.broadcast_to(vals, z.shape)
    return ComplexGrid(side, n, vals)


def l2_norm(g: ComplexGrid) -> float:
    """``sqrt(sum |values|^2 * cell_area)``."""
    return float(np.sqrt(np.sum(np.abs(g.values.ravel()) ** 2) * g.cell_area))


def l2_norm_on(g: ComplexGrid, E: PixelSet) -> float:
    check_same_grid(g, E)
    return float(np.sqrt(np.sum(np.abs(g.values[E.mask]) ** 2) * g.cell_area))


def integrate_over(g: ComplexGrid, E: PixelSet, integrand: Callable | None = None) -> float:
    """Riemann sum of ``integrand(values)`` over the cells of ``E``.

    ``integrand`` maps complex samples to reals (vectorized); ``None`` means
    the real part of the samples themselves.
    """
    check_same_grid(g, E)
    vals = g.values[E.mask]
    taken = vals.real if integrand is None else np.asarray(integrand(vals), dtype=float)
    return float(np.sum(taken) * g.cell_area)


def fourier_energy(g: ComplexGrid) -> float:
    """``sum |values|^2 * cell_area`` evaluated from the DFT coefficients."""
    coeffs = np.fft.fft2(g.values)
    return float(np.sum(np.abs(coeffs.ravel()) ** 2) * g.cell_area / g.n**2)


def write_binary(g: ComplexGrid, path) -> None:
    """Header ``<q n, <d side``; payload row-major interleaved ``<f8`` re/im pairs."""
    payload = np.empty((g.n, g.n, 2), dtype="<f8")
    payload[..., 0] = g.values.real
    payload[..., 1] = g.values.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.n, g.side))
        fh.write(payload.tobytes(order="C"))


def read_binary(path) -> ComplexGrid:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated grid header")
    n, side = _HEADER.unpack_from(data)
    expected = _HEADER.size + 16 * n * n
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for n={n}, found {len(data)}")
    payload = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(n, n, 2)
    return ComplexGrid(side, n, payload[..., 0] + 1j * payload[..., 1])


def write_csv(g: ComplexGrid, path) -> None:
    """Plot-ready table with columns ``x, y, re, im``, one row per cell."""
    z = g.z.ravel()
    v = g.values.ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "re", "im"])
        for zi, vi in zip(z, v):
            w.writerow([repr(float(zi.real)), repr(float(zi.imag)), repr(float(vi.real)), repr(float(vi.imag))])
