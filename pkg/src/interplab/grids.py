"""Logarithmic grids and nonnegative extended-real grid functions on (0, oo).

All scalar profiles handled by the library (K-profiles, resolvent and orbit
displacement curves, variation derivatives) live on a geometric grid over
(t_min, t_max).  A :class:`GridFunction` stores node values in [0, +inf]
together with a support window (a, b); outside the window the function is
zero, below t_min and above t_max it is extended by its boundary value.
The window makes truncations by characteristic functions exact instead of
sampled, which keeps cut-off integrals free of jump artefacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["GridMismatchError", "LogGrid", "GridFunction"]

FULL_WINDOW = (0.0, math.inf)


class GridMismatchError(ValueError):
    """Combination of grid functions with incompatible metadata."""


@dataclass(frozen=True)
class LogGrid:
    """Geometric grid on (0, oo) with trapezoidal quadrature weights.

    Nodes are t_i = t_min * (t_max/t_min)**(i/(n-1)).  The cell weights
    integrate piecewise linear functions exactly, so quadrature of the
    constant 1 over (t_min, t_max) telescopes to t_max - t_min.
    """

    t_min: float
    t_max: float
    n_nodes: int = 2048

    def __post_init__(self):
        if not (0.0 < self.t_min < self.t_max):
            raise ValueError("LogGrid requires 0 < t_min < t_max")
        if self.n_nodes < 2:
            raise ValueError("LogGrid requires n_nodes >= 2")

    @cached_property
    def nodes(self) -> np.ndarray:
        t = np.geomspace(self.t_min, self.t_max, self.n_nodes)
        t.flags.writeable = False
        return t

    @cached_property
    def weights(self) -> np.ndarray:
        t = self.nodes
        w = np.empty_like(t)
        w[1:-1] = 0.5 * (t[2:] - t[:-2])
        w[0] = 0.5 * (t[1] - t[0])
        w[-1] = 0.5 * (t[-1] - t[-2])
        w.flags.writeable = False
        return w

    @property
    def log_step(self) -> float:
        return math.log(self.t_max / self.t_min) / (self.n_nodes - 1)

    @classmethod
    def octave(cls, t_min: float, n_octaves: int, per_octave: int = 64) -> "LogGrid":
        """Grid whose ratio is an exact power of 2.

        On such a grid t -> 2t is a shift by ``per_octave`` nodes, which makes
        the dilation operator exact up to floating point.
        """
        return cls(t_min, t_min * 2.0 ** n_octaves, n_octaves * per_octave + 1)

    def refined(self, node_factor: int = 2, t_min_factor: float = 1.0) -> "LogGrid":
        """Grid with more nodes and (optionally) a smaller left endpoint."""
        return LogGrid(self.t_min * t_min_factor, self.t_max,
                       self.n_nodes * node_factor)

    def quadrature(self, values: np.ndarray) -> float:
        """Trapezoidal integral of node values over (t_min, t_max)."""
        return float(np.dot(self.weights, values))


def _as_window(window) -> tuple[float, float]:
    a, b = float(window[0]), float(window[1])
    if not (a >= 0.0 and b > a):
        raise ValueError(f"invalid support window ({a}, {b})")
    return a, b


class GridFunction:
    """Nonnegative [0, +inf]-valued function sampled on a :class:`LogGrid`.

    Parameters
    ----------
    grid : LogGrid
    values : array of node values; finite nonnegative floats or +inf, no NaN.
    window : support interval (a, b); the function is zero outside it.
    """

    __slots__ = ("grid", "values", "window")

    def __init__(self, grid: LogGrid, values, window=FULL_WINDOW):
        values = np.asarray(values, dtype=float).copy()
        if values.shape != (grid.n_nodes,):
            raise GridMismatchError(
                f"expected {grid.n_nodes} values, got shape {values.shape}")
        if np.isnan(values).any():
            raise ValueError("GridFunction values must not contain NaN")
        if (values < 0).any():
            raise ValueError("GridFunction values must be nonnegative")
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "window", _as_window(window))

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("GridFunction is immutable")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def constant(cls, grid: LogGrid, c: float, window=FULL_WINDOW) -> "GridFunction":
        return cls(grid, np.full(grid.n_nodes, float(c)), window)

    @classmethod
    def indicator(cls, grid: LogGrid, a: float, b: float) -> "GridFunction":
        """Characteristic function of (a, b), represented exactly."""
        return cls(grid, np.ones(grid.n_nodes), (a, b))

    @classmethod
    def from_callable(cls, grid: LogGrid, fn, window=FULL_WINDOW) -> "GridFunction":
        return cls(grid, np.array([fn(t) for t in grid.nodes], dtype=float), window)

    @classmethod
    def from_values(cls, grid: LogGrid, values, window=FULL_WINDOW) -> "GridFunction":
        return cls(grid, values, window)

    # ------------------------------------------------------------------
    # algebra (same grid and window required)
    # ------------------------------------------------------------------
    def _check_compatible(self, other: "GridFunction"):
        if self.grid is not other.grid and (
                self.grid.t_min != other.grid.t_min
                or self.grid.t_max != other.grid.t_max
                or self.grid.n_nodes != other.grid.n_nodes):
            raise GridMismatchError("grid functions live on different grids")
        if self.window != other.window:
            raise GridMismatchError("grid functions have different support windows")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return GridFunction(self.grid, self.values + other.values, self.window)

    def scale(self, c: float) -> "GridFunction":
        """c * f for c >= 0, with the convention 0 * inf = 0."""
        if c < 0:
            raise ValueError("scale factor must be nonnegative")
        if c == 0.0:
            return GridFunction(self.grid, np.zeros(self.grid.n_nodes), self.window)
        return GridFunction(self.grid, c * self.values, self.window)

    def __mul__(self, c):
        return self.scale(float(c))

    __rmul__ = __mul__

    def maximum(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return GridFunction(self.grid, np.maximum(self.values, other.values), self.window)

    def truncate(self, a: float, b: float) -> "GridFunction":
        """Multiply by the characteristic function of (a, b)."""
        lo = max(self.window[0], float(a))
        hi = min(self.window[1], float(b))
        if not hi > lo:
            raise ValueError("truncation window is empty")
        return GridFunction(self.grid, self.values, (lo, hi))

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def extension_at(self, t) -> np.ndarray:
        """Value of the unwindowed extension at points t.

        Linear interpolation between nodes, constant continuation below
        t_min and above t_max.
        """
        t = np.asarray(t, dtype=float)
        v = self.values
        out = np.interp(t, self.grid.nodes, v)
        # np.interp clamps outside the node range, which is exactly the
        # constant-extension convention; inf neighbours need a fixup because
        # interp produces NaN for inf * 0 combinations.
        if np.isinf(v).any():
            idx = np.searchsorted(self.grid.nodes, t, side="right") - 1
            idx = np.clip(idx, 0, self.grid.n_nodes - 2)
            bad = np.isinf(v[idx]) | np.isinf(v[idx + 1])
            out = np.where(bad, np.inf, out)
        return out

    def __call__(self, t):
        """Windowed value at points t (zero outside the support window)."""
        t = np.asarray(t, dtype=float)
        a, b = self.window
        inside = (t > a) & (t < b)
        return np.where(inside, self.extension_at(t), 0.0)

    def integral_to(self, t) -> np.ndarray:
        """Exact integral of the windowed piecewise-linear model over (0, t).

        Below t_min the integrand is continued by its value at t_min, above
        t_max by its value at t_max.  Support-window cuts are applied exactly,
        so indicators integrate without jump-sampling error.
        """
        t_in = np.asarray(t, dtype=float)
        t = np.atleast_1d(t_in)
        nodes = self.grid.nodes
        v = self.values
        # antiderivative of the unwindowed extension at the nodes
        cumulative = np.concatenate((
            [nodes[0] * v[0]],
            nodes[0] * v[0] + np.cumsum(0.5 * np.diff(nodes) * (v[1:] + v[:-1])),
        ))

        def anti(s):
            s = np.asarray(s, dtype=float)
            out = np.empty_like(s)
            below = s <= nodes[0]
            above = s >= nodes[-1]
            mid = ~(below | above)
            out[below] = s[below] * v[0]
            out[above] = cumulative[-1] + (s[above] - nodes[-1]) * v[-1]
            if mid.any():
                sm = s[mid]
                k = np.searchsorted(nodes, sm, side="right") - 1
                k = np.clip(k, 0, len(nodes) - 2)
                vm = self.extension_at(sm)
                out[mid] = cumulative[k] + 0.5 * (sm - nodes[k]) * (v[k] + vm)
            return out

        a, b = self.window
        upper = np.clip(t, a, b)
        base = anti(np.full_like(t, a)) if a > 0 else np.zeros_like(t)
        result = anti(upper) - base
        return result if t_in.ndim else float(result[0])

    # ------------------------------------------------------------------
    # serialization: CSV with columns (t, value); +inf renders as 'inf'
    # ------------------------------------------------------------------
    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,value\n")
            for t, v in zip(self.grid.nodes, self.values):
                fh.write(f"{float(t)!r},{float(v)!r}\n")

    @classmethod
    def from_csv(cls, path, window=FULL_WINDOW) -> "GridFunction":
        ts, vs = [], []
        with open(path) as fh:
            next(fh)
            for line in fh:
                t_str, v_str = line.strip().split(",")
                ts.append(float(t_str))
                vs.append(float(v_str))
        ts = np.asarray(ts)
        grid = LogGrid(ts[0], ts[-1], len(ts))
        return cls(grid, vs, window)
