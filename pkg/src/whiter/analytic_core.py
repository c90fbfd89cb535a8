"""Functions sampled on horizontal lines ``Im(alpha) = c`` of the complex plane.

Everything numerical in the package is carried as samples on a uniform,
power-of-two sized grid covering ``Re(alpha)`` in ``[-X, X)``.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from whiter.errors import DomainError, GridMismatchError, SingularityError

DEFAULT_HALF_WIDTH = 200.0
DEFAULT_N_POINTS = 2**14
DIV_THRESHOLD = 1e-13


@dataclass(frozen=True)
class Strip:
    """The strip ``a <= Im(alpha) <= b`` enclosing the real axis."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a < 0 < self.b):
            raise ValueError(f"strip must satisfy a < 0 < b, got a={self.a}, b={self.b}")

    @property
    def width(self) -> float:
        return self.b - self.a

    def contains(self, c: float) -> bool:
        return self.a <= c <= self.b


@dataclass(frozen=True)
class LineGrid:
    offset: float = 0.0
    half_width: float = DEFAULT_HALF_WIDTH
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two, got {n}")

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n_points)

    @property
    def points(self) -> np.ndarray:
        return self.x + 1j * self.offset

    def at(self, offset: float) -> LineGrid:
        """Same horizontal discretisation on another line."""
        return LineGrid(float(offset), self.half_width, self.n_points)

    def same_line(self, other: LineGrid) -> bool:
        return self == other


@dataclass(frozen=True, eq=False)
class LineSamples:
    grid: LineGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: LineGrid) -> LineSamples:
        return cls(grid, np.zeros(grid.n_points, complex))

    @classmethod
    def ones(cls, grid: LineGrid) -> LineSamples:
        return cls(grid, np.ones(grid.n_points, complex))

    def map(self, fn) -> LineSamples:
        return LineSamples(self.grid, fn(self.values))

    def __add__(self, other):
        return pointwise_combine("add", self, _lift(other, self.grid))

    __radd__ = __add__

    def __sub__(self, other):
        return pointwise_combine("sub", self, _lift(other, self.grid))

    def __rsub__(self, other):
        return pointwise_combine("sub", _lift(other, self.grid), self)

    def __mul__(self, other):
        return pointwise_combine("mul", self, _lift(other, self.grid))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return pointwise_combine("div", self, _lift(other, self.grid))

    def __neg__(self):
        return LineSamples(self.grid, -self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _lift(other, grid: LineGrid) -> LineSamples:
    if isinstance(other, LineSamples):
        return other
    return LineSamples(grid, np.full(grid.n_points, complex(other)))


Kind = Literal["strip", "plus", "minus"]


@dataclass(frozen=True)
class AnalyticHandle:
    """A callable known in closed form together with where it may be evaluated.

    ``kind='strip'`` means analytic in ``declared_strip``; ``'plus'`` means
    analytic for ``Im z >= a`` and ``'minus'`` for ``Im z <= b``.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    declared_strip: Strip
    kind: Kind = "strip"
    name: str = ""

    def valid_offset(self, c: float) -> bool:
        s = self.declared_strip
        if self.kind == "plus":
            return c >= s.a
        if self.kind == "minus":
            return c <= s.b
        return s.contains(c)

    def __call__(self, z):
        return self.eval(z)


Side = Literal["plus", "minus"]


@dataclass(frozen=True, eq=False)
class HalfPlaneFunction:
    """Boundary values of a one-sided function on its defining line.

    A ``plus`` function continues analytically above the line, a ``minus``
    function below. ``shifts`` lists the exponents ``s`` of the factors
    ``exp(i*s*alpha)`` present in the function; they are needed to model the
    oscillating tails beyond the truncated grid.
    """

    side: Side
    boundary: LineSamples
    shifts: tuple[float, ...] = field(default=(0.0,))

    def __post_init__(self):
        if self.side not in ("plus", "minus"):
            raise ValueError(f"side must be 'plus' or 'minus', got {self.side!r}")

    @property
    def defining_line(self) -> LineGrid:
        return self.boundary.grid

    @property
    def values(self) -> np.ndarray:
        return self.boundary.values

    @classmethod
    def zero(cls, side: Side, grid: LineGrid) -> HalfPlaneFunction:
        return cls(side, LineSamples.zeros(grid))


def sample(handle: AnalyticHandle | Callable, grid: LineGrid) -> LineSamples:
    if isinstance(handle, AnalyticHandle) and not handle.valid_offset(grid.offset):
        raise DomainError(
            f"line Im(alpha)={grid.offset} lies outside the region of {handle.name or 'handle'}"
        )
    z = grid.points
    values = np.broadcast_to(np.asarray(handle(z), dtype=complex), z.shape)
    return LineSamples(grid, values.copy())


def norm_on_line(f: LineSamples) -> float:
    """Trapezoid approximation of the L2 norm along the line."""
    return float(np.sqrt(f.grid.spacing * np.sum(np.abs(f.values) ** 2)))


def pointwise_combine(op: str, f: LineSamples, g: LineSamples, threshold: float = DIV_THRESHOLD) -> LineSamples:
    if not f.grid.same_line(g.grid):
        raise GridMismatchError(f"cannot combine samples on {f.grid} and {g.grid}")
    if op == "add":
        return LineSamples(f.grid, f.values + g.values)
    if op == "sub":
        return LineSamples(f.grid, f.values - g.values)
    if op == "mul":
        return LineSamples(f.grid, f.values * g.values)
    if op == "div":
        mag = np.abs(g.values)
        if mag.min() <= threshold * max(mag.max(), np.finfo(float).tiny):
            j = int(np.argmin(mag))
            raise SingularityError(f"divisor nearly vanishes at alpha={g.grid.points[j]:.6g}")
        return LineSamples(f.grid, f.values / g.values)
    raise ValueError(f"unknown op {op!r}")


def exp_factor(grid: LineGrid, shift: float) -> LineSamples:
    """Samples of exp(i*shift*alpha) on the line, applied analytically."""
    return LineSamples(grid, np.exp(1j * shift * grid.points))
