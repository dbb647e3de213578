"""Banach function spaces over (0, oo): norms, Hardy and dilation operators.

Implemented space kinds:

* ``weighted_lp`` -- L^p(0, oo; t^(p(1-theta)-1) dt) with theta in (0,1),
  p in [1, oo).
* ``l1``, ``linf`` and their intersection ``l1_cap_linf`` (norm = max of the
  two norms).

Norm evaluation is trapezoidal in t on the log grid.  The support window of
a :class:`~interplab.grids.GridFunction` is honoured exactly: the quadrature
splits cells at the window endpoints, and the segment (0, t_min) is accounted
for analytically with the integrand frozen at its value at t_min.  The grid
therefore caps resolution at t_min (profiles that blow up faster than the
weight can integrate are detected by refinement, not by literal infinities)
and at t_max for untruncated norms.

All norms are weighted l^p norms of a fixed linear sampling of the node
values, so absolute homogeneity, the triangle inequality and the ideal
property |g| <= |f|  =>  ||g|| <= ||f|| hold exactly in floating point for
functions sharing a grid and window.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .grids import FULL_WINDOW, GridFunction, LogGrid

__all__ = [
    "UnsupportedSpaceError",
    "SpaceSpec",
    "weighted_lp",
    "l1_space",
    "linf_space",
    "l1_cap_linf_space",
    "norm",
    "hardy_apply",
    "hardy_analytic_bound",
    "hardy_norm_estimate",
    "dilation_apply",
    "dilation_norm",
    "square_space",
    "chi_norm",
    "witness_min_one_over_t2",
]


class UnsupportedSpaceError(ValueError):
    """Operation not defined for this space kind."""


@dataclass(frozen=True)
class SpaceSpec:
    """Descriptor of a Banach function space over (0, oo)."""

    kind: str
    theta: float | None = None
    p: float | None = None

    def __post_init__(self):
        if self.kind == "weighted_lp":
            if self.theta is None or not (0.0 < self.theta < 1.0):
                raise ValueError("weighted_lp requires theta in (0, 1)")
            if self.p is None or self.p < 1.0:
                raise ValueError("weighted_lp requires p >= 1")
        elif self.kind in ("l1", "linf", "l1_cap_linf"):
            if self.theta is not None or self.p is not None:
                raise ValueError(f"{self.kind} takes no parameters")
        else:
            raise ValueError(f"unknown space kind {self.kind!r}")

    @property
    def weight_exponent(self) -> float:
        """Exponent of the weight t^(p(1-theta)-1)."""
        if self.kind != "weighted_lp":
            raise UnsupportedSpaceError("weight exponent only for weighted_lp")
        return self.p * (1.0 - self.theta) - 1.0

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "theta": self.theta, "p": self.p})

    @classmethod
    def from_json(cls, text: str) -> "SpaceSpec":
        d = json.loads(text)
        return cls(d["kind"], d.get("theta"), d.get("p"))

    def __str__(self):
        if self.kind == "weighted_lp":
            return f"E(theta={self.theta:g}, p={self.p:g})"
        return self.kind


def weighted_lp(theta: float, p: float) -> SpaceSpec:
    return SpaceSpec("weighted_lp", float(theta), float(p))


def l1_space() -> SpaceSpec:
    return SpaceSpec("l1")


def linf_space() -> SpaceSpec:
    return SpaceSpec("linf")


def l1_cap_linf_space() -> SpaceSpec:
    return SpaceSpec("l1_cap_linf")


# ----------------------------------------------------------------------
# exact weight integrals, used for the (0, t_min) segment and in oracles
# ----------------------------------------------------------------------

def weight_integral(space: SpaceSpec, a: float, b: float) -> float:
    """Integral of the space weight over (a, b), in closed form."""
    if b <= a:
        return 0.0
    if space.kind == "weighted_lp":
        e = space.p * (1.0 - space.theta)  # > 0
        return (b ** e - a ** e) / e
    if space.kind == "l1":
        return b - a
    raise UnsupportedSpaceError(f"no integral weight for {space.kind}")


# ----------------------------------------------------------------------
# norm evaluation
# ----------------------------------------------------------------------

def _window_samples(f: GridFunction):
    """Sample abscissae/values of f over its window intersected with the grid.

    Returns (xs, vals, tail) where tail = (lo, hi) is the part of the window
    below t_min, on which the integrand is frozen at f(t_min).
    """
    grid = f.grid
    a, b = f.window
    tail = (max(a, 0.0), min(b, grid.t_min))
    lo = max(a, grid.t_min)
    hi = min(b, grid.t_max)
    if hi <= lo:
        return np.empty(0), np.empty(0), tail
    nodes = grid.nodes
    i0 = int(np.searchsorted(nodes, lo, side="right"))
    i1 = int(np.searchsorted(nodes, hi, side="left"))
    inner = nodes[i0:i1]
    xs = np.concatenate(([lo], inner, [hi]))
    vals = np.concatenate((f.extension_at([lo]), f.values[i0:i1],
                           f.extension_at([hi])))
    return xs, vals, tail


def _trap_weights(xs: np.ndarray) -> np.ndarray:
    if len(xs) == 1:
        return np.zeros(1)
    w = np.empty_like(xs)
    w[1:-1] = 0.5 * (xs[2:] - xs[:-2])
    w[0] = 0.5 * (xs[1] - xs[0])
    w[-1] = 0.5 * (xs[-1] - xs[-2])
    return w


def _power_sum(vals, p):
    with np.errstate(over="ignore"):
        return vals ** p


def norm(space: SpaceSpec, f: GridFunction) -> float:
    """Quadrature approximation of ||f||_E over the support window of f.

    Returns +inf when a value +inf carries positive quadrature weight.
    Monotone in the pointwise values (ideal property) by construction.
    """
    xs, vals, (tail_lo, tail_hi) = _window_samples(f)
    v0 = float(f.values[0])
    has_tail = tail_hi > tail_lo

    if space.kind == "weighted_lp":
        p = space.p
        total = 0.0
        if len(xs):
            wq = _trap_weights(xs) * xs ** space.weight_exponent
            total += float(np.dot(wq, _power_sum(vals, p)))
        if has_tail:
            total += weight_integral(space, tail_lo, tail_hi) * v0 ** p
        return total ** (1.0 / p) if np.isfinite(total) else math.inf

    if space.kind == "l1":
        total = 0.0
        if len(xs):
            total += float(np.dot(_trap_weights(xs), vals))
        if has_tail:
            total += (tail_hi - tail_lo) * v0
        return total

    if space.kind == "linf":
        out = 0.0
        if len(xs):
            out = float(np.max(vals))
        if has_tail:
            out = max(out, v0)
        return out

    if space.kind == "l1_cap_linf":
        return max(norm(SpaceSpec("l1"), f), norm(SpaceSpec("linf"), f))

    raise UnsupportedSpaceError(space.kind)


def chi_norm(space: SpaceSpec, grid: LogGrid, a: float, b: float) -> float:
    """||chi_(a,b)||_E evaluated with the same quadrature as :func:`norm`."""
    return norm(space, GridFunction.indicator(grid, a, b))


def witness_min_one_over_t2(grid: LogGrid) -> GridFunction:
    """The L1 cap Linf witness t -> min(1, 1/t^2)."""
    t = grid.nodes
    return GridFunction(grid, np.minimum(1.0, 1.0 / t ** 2))


# ----------------------------------------------------------------------
# Hardy operator P f(t) = (1/t) * integral_0^t f(s) ds
# ----------------------------------------------------------------------

def hardy_apply(f: GridFunction) -> GridFunction:
    """Averaging operator applied to f, on the same grid.

    The integral uses the piecewise-linear model of f with its support
    window honoured exactly; below t_min the integrand is continued by
    f(t_min).  P is linear and monotone in f.
    """
    t = f.grid.nodes
    vals = f.integral_to(t) / t
    return GridFunction(f.grid, np.maximum(vals, 0.0))


def hardy_analytic_bound(space: SpaceSpec) -> float:
    """Upper bound for the operator norm of P on the space.

    1/theta on the weighted L^p scale (classical weighted Hardy inequality
    with weight exponent p(1-theta)-1), 1 on Linf.  P is unbounded on L1
    (it only maps L1 into weak-L1) and on L1 cap Linf (the image decays
    like 1/t, which is not integrable at infinity).
    """
    if space.kind == "weighted_lp":
        return 1.0 / space.theta
    if space.kind == "linf":
        return 1.0
    if space.kind == "l1":
        raise UnsupportedSpaceError("Hardy unbounded on L1")
    if space.kind == "l1_cap_linf":
        raise UnsupportedSpaceError("Hardy unbounded on L1 cap Linf")
    raise UnsupportedSpaceError(space.kind)


def hardy_norm_estimate(space: SpaceSpec, trial_count: int = 12,
                        grid: LogGrid | None = None) -> float:
    """Lower estimate of ||P|| on the space by a family of trial functions.

    The family contains the near-extremal truncated powers
    t^(-(1-theta)+eps) * chi_(0,1) together with bounded witnesses; the
    reported value is the best quadrature Rayleigh quotient and never
    exceeds :func:`hardy_analytic_bound`.
    """
    bound = hardy_analytic_bound(space)  # raises on L1 / L1 cap Linf
    if grid is None:
        # near-extremal powers need a large dynamic range before the
        # Rayleigh quotient approaches the sharp constant
        grid = LogGrid(1e-10, 1e2, 4096)
    t = grid.nodes

    trials = [GridFunction.indicator(grid, 0.0, 1.0),
              witness_min_one_over_t2(grid)]
    if space.kind == "weighted_lp":
        eps_values = np.geomspace(2e-4, 0.5 * (1 - space.theta) + 1e-3,
                                  max(trial_count, 2))
        for eps in eps_values:
            beta = -(1.0 - space.theta) + float(eps)
            trials.append(GridFunction(grid, t ** beta, (0.0, 1.0)))

    best = 0.0
    for trial in trials:
        denom = norm(space, trial)
        if not (0.0 < denom < math.inf):
            continue
        ratio = norm(space, hardy_apply(trial)) / denom
        best = max(best, ratio)
    return min(best, bound)


# ----------------------------------------------------------------------
# dilation operator (D2 f)(t) = f(2t) and the squared space E^2
# ----------------------------------------------------------------------

def dilation_apply(f: GridFunction) -> GridFunction:
    """t -> f(2t) by log-grid interpolation; f(t_max) continues beyond t_max.

    On an octave grid (LogGrid.octave) the sampling points 2*t_i hit nodes
    exactly and the operator is exact up to floating point.
    """
    vals = f.extension_at(2.0 * f.grid.nodes)
    a, b = f.window
    return GridFunction(f.grid, vals, (a / 2.0, b / 2.0))


def dilation_norm(space: SpaceSpec) -> float:
    """Operator norm of D2 on the space.

    2^(theta-1) on the weighted L^p scale.  For l1/linf the value 1 is
    returned as the common bound of the scale; by change of variables the
    exact values are 1/2 on L1 and 1 on Linf.
    """
    if space.kind == "weighted_lp":
        return 2.0 ** (space.theta - 1.0)
    if space.kind in ("l1", "linf"):
        return 1.0
    raise UnsupportedSpaceError(f"dilation norm not defined for {space.kind}")


def square_space(space: SpaceSpec) -> SpaceSpec:
    """The space E^2 = {g : t -> g(sqrt(t))/sqrt(t) in E}.

    On the weighted L^p scale this is again a weighted L^p space with
    doubled theta; it is a Banach function space only for theta < 1/2.
    """
    if space.kind != "weighted_lp":
        raise UnsupportedSpaceError("square space defined on weighted_lp only")
    if space.theta >= 0.5:
        raise UnsupportedSpaceError("E^2 not a Banach function space")
    return weighted_lp(2.0 * space.theta, space.p)
