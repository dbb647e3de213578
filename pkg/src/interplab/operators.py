"""m-accretive operators via resolvent oracles, with concrete instances.

An operator A of type omega >= 0 is described by its resolvent
J_lambda = (I + lambda*A)^(-1) (defined for lambda*omega < 1), the set norm
|Ax| (infimum of ||f|| over the sections f of A at x, +inf off the domain),
and a domain indicator.  Instances:

* scalar multiples of the identity and matrices on R^d,
* subgradients of smooth convex energies, solved by damped Newton on the
  proximal objective E(v) + ||v - x||^2 / (2 lambda),
* the discretized Dirichlet q-Laplacian on (0, 1),
* projections onto boxes (an operator with non-dense domain),
* a scalar energy with open effective domain (reciprocal energy),
* type-shifts A - omega*I, the surjective wrappers I + hA, and additive
  Lipschitz perturbations A + B.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .couples import InterpolationCouple, NormedSpace, euclidean, weighted_l2

__all__ = [
    "PreconditionError",
    "SolverError",
    "AccretiveOperator",
    "ScalarLinear",
    "MatrixLinear",
    "SubgradientOperator",
    "soft_abs_operator",
    "quadratic_energy_operator",
    "reciprocal_energy_operator",
    "indicator_box_operator",
    "QLaplaceOperator",
    "yosida",
    "kato_bracket",
    "set_norm_limit",
    "shifted",
    "plus_identity",
    "perturb",
    "domination_report",
    "accretive_couple",
    "sqrt_energy_couple",
    "resolvent_profile",
    "from_config",
    "matrix_from_csv",
]


class PreconditionError(ValueError):
    """A parameter violates a precondition (e.g. lambda*omega >= 1)."""


class SolverError(RuntimeError):
    """Inner solver failed to reach its residual target."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AccretiveOperator:
    """Base class; concrete operators implement _resolve and set_norm."""

    def __init__(self, space: NormedSpace, omega: float = 0.0, name: str = "A"):
        self.space = space
        self.omega = float(omega)
        self.name = name

    # -- required surface -----------------------------------------------
    def _resolve(self, lam: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def set_norm(self, x) -> float:
        raise NotImplementedError

    def domain_indicator(self, x) -> str:
        """One of 'domain', 'closure', 'outside'."""
        return "domain"

    def energy(self, x) -> float | None:
        """Convex energy for subgradient instances, else None."""
        return None

    def exact_orbit(self, x, t: float):
        """Closed-form semigroup state when available, else None."""
        return None

    # -- shared machinery -------------------------------------------------
    def resolve(self, lam: float, x) -> np.ndarray:
        """J_lambda x = (I + lambda*A)^(-1) x; requires lambda*omega < 1."""
        if lam <= 0:
            raise PreconditionError("requires lambda > 0")
        if lam * self.omega >= 1.0:
            raise PreconditionError("requires lambda*omega < 1")
        return self._resolve(float(lam), np.atleast_1d(np.asarray(x, float)))

    def couple(self) -> InterpolationCouple:
        return accretive_couple(self)

    def __repr__(self):
        return f"{type(self).__name__}({self.name}, omega={self.omega})"


def yosida(op: AccretiveOperator, lam: float, x) -> np.ndarray:
    """A_lambda x = (x - J_lambda x)/lambda, a section of A at J_lambda x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return (x - op.resolve(lam, x)) / lam


def kato_bracket(space: NormedSpace, x, y, lambda_seq=None,
                 return_sequence: bool = False):
    """One-sided directional derivative of the norm at x in direction y.

    Evaluates the difference quotient along a decreasing lambda sequence
    (default 2^-k, k = 4..40) with a cancellation-safe formula per norm
    kind.  The quotients are nonincreasing (infimum characterization); the
    largest upward wiggle is recorded as a monotonicity certificate.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if lambda_seq is None:
        lambda_seq = [2.0 ** (-k) for k in range(4, 41)]
    quotients = [space.bracket_quotient(x, y, lam) for lam in lambda_seq]
    wiggle = max((quotients[i + 1] - quotients[i]
                  for i in range(len(quotients) - 1)), default=0.0)
    value = quotients[-1]
    if return_sequence:
        return value, quotients, wiggle
    return value


def set_norm_limit(op: AccretiveOperator, x, lam0: float = 0.5,
                   halvings: int = 40, rel_tol: float = 1e-8,
                   cap: float = 1e12) -> float:
    """|Ax| as the supremum of the nondecreasing family ||A_lambda x||.

    Diagnostic route, independent of any closed-form set norm: evaluates
    the Yosida norms along lambda = lam0 * 2^-k and returns the plateau, or
    +inf if the family keeps growing past the cap (x off the domain).
    """
    if op.omega > 0:
        lam0 = min(lam0, 0.5 / op.omega)
    prev = None
    lam = lam0
    for _ in range(halvings):
        val = op.space.norm(yosida(op, lam, x))
        if val > cap:
            return math.inf
        if prev is not None and abs(val - prev) <= rel_tol * (1.0 + abs(val)):
            return val
        prev = val
        lam *= 0.5
    # still moving after all halvings: growing families are off-domain
    return math.inf if prev and val > 2.0 * prev else val


# ----------------------------------------------------------------------
# linear instances
# ----------------------------------------------------------------------

class ScalarLinear(AccretiveOperator):
    """A = a*id on R (a >= 0); J_lambda x = x/(1 + lambda a)."""

    def __init__(self, a: float):
        if a < 0:
            raise ValueError("scalar coefficient must be nonnegative")
        super().__init__(euclidean(1), 0.0, f"scalar(a={a:g})")
        self.a = float(a)

    def _resolve(self, lam, x):
        return x / (1.0 + lam * self.a)

    def set_norm(self, x):
        return self.a * self.space.norm(x)

    def energy(self, x):
        x = np.atleast_1d(np.asarray(x, float))
        return 0.5 * self.a * float(x @ x)

    def exact_orbit(self, x, t):
        return np.atleast_1d(np.asarray(x, float)) * math.exp(-self.a * t)

    def exact_k(self, x, t):
        """K(x, t) = min(1, a t) |x| for the couple (|.|, |a .|)."""
        return min(1.0, self.a * t) * self.space.norm(x)


class MatrixLinear(AccretiveOperator):
    """A x = M x on R^d with the Euclidean norm.

    Accretive of type omega = max(0, -lambda_min(sym(M))); shipped instances
    are monotone (omega = 0).  Symmetric instances expose the exact orbit
    through their eigendecomposition.
    """

    def __init__(self, M, name: str = "matrix"):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        sym_eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
        omega = max(0.0, -float(sym_eigs.min()))
        super().__init__(euclidean(M.shape[0]), omega, name)
        self.M = M
        self.symmetric = bool(np.allclose(M, M.T, atol=1e-13))
        if self.symmetric:
            self._eigvals, self._eigvecs = np.linalg.eigh(M)

    def _resolve(self, lam, x):
        return np.linalg.solve(np.eye(len(x)) + lam * self.M, x)

    def set_norm(self, x):
        return self.space.norm(self.M @ np.atleast_1d(np.asarray(x, float)))

    def energy(self, x):
        if not self.symmetric:
            return None
        x = np.atleast_1d(np.asarray(x, float))
        return 0.5 * float(x @ (self.M @ x))

    def exact_orbit(self, x, t):
        x = np.atleast_1d(np.asarray(x, float))
        if self.symmetric:
            c = self._eigvecs.T @ x
            return self._eigvecs @ (np.exp(-self._eigvals * t) * c)
        from scipy.linalg import expm
        return expm(-t * self.M) @ x


# ----------------------------------------------------------------------
# subgradient instances (proximal solves)
# ----------------------------------------------------------------------

class SubgradientOperator(AccretiveOperator):
    """A = subgradient of a convex C^1 energy on a Hilbert space.

    The resolvent minimizes the proximal objective
    E(v) + ||v - x||^2/(2 lambda) by damped Newton (the objective is
    1/lambda-strongly convex) with a gradient-descent fallback, stopping at
    gradient norm <= 1e-10 * (1 + ||x||).
    """

    def __init__(self, space: NormedSpace, energy_fn: Callable,
                 grad_fn: Callable, hess_solver: Optional[Callable] = None,
                 name: str = "subgradient", exact_prox: Optional[Callable] = None,
                 set_norm_fn: Optional[Callable] = None,
                 domain_fn: Optional[Callable] = None,
                 energy_batch: Optional[Callable] = None):
        super().__init__(space, 0.0, name)
        self._energy = energy_fn
        self._grad = grad_fn
        # hess_solver(v, rho) solves (Hess E(v) + rho*I_w) d = rhs in the
        # space's inner product, returning a callable rhs -> d
        self._hess_solver = hess_solver
        self._exact_prox = exact_prox
        self._set_norm_fn = set_norm_fn
        self._domain_fn = domain_fn
        self.energy_batch = energy_batch
        self.residual_tol = 1e-10

    def energy(self, x):
        return float(self._energy(np.atleast_1d(np.asarray(x, float))))

    def gradient(self, x):
        return np.asarray(self._grad(np.atleast_1d(np.asarray(x, float))), float)

    def set_norm(self, x):
        if self._set_norm_fn is not None:
            return float(self._set_norm_fn(np.atleast_1d(np.asarray(x, float))))
        return self.space.norm(self.gradient(x))

    def domain_indicator(self, x):
        if self._domain_fn is not None:
            return self._domain_fn(np.atleast_1d(np.asarray(x, float)))
        return "domain"

    def _resolve(self, lam, x):
        if self._exact_prox is not None:
            return np.atleast_1d(np.asarray(self._exact_prox(lam, x), float))
        v, residual, ok = self._prox_newton(lam, x)
        if not ok:
            raise SolverError(
                f"prox solve failed for {self.name} at lambda={lam:g}",
                residual=residual)
        return v

    def moreau_gradient(self, lam, x, v):
        return self.gradient(v) + (v - x) / lam

    def _prox_objective(self, lam, x, v):
        return (self.energy(v)
                + 0.5 * self.space.norm(v - x) ** 2 / lam)

    def _prox_newton(self, lam, x, max_iter: int = 80):
        v = x.copy()
        # eps/lam floor: a float perturbation dv of the minimizer moves the
        # proximal gradient by dv/lam, so residuals below eps*(1+||x||)/lam
        # are unattainable; the iterate itself is still accurate to
        # lam * residual <= machine precision.
        eps_floor = 128.0 * np.finfo(float).eps * max(1.0, 1.0 / lam)
        tol = (self.residual_tol + eps_floor) * (1.0 + self.space.norm(x))
        g = self.moreau_gradient(lam, x, v)
        gn = self.space.norm(g)
        for _ in range(max_iter):
            if gn <= tol:
                return v, gn, True
            if self._hess_solver is not None:
                step = self._hess_solver(v, 1.0 / lam)(g)
            else:
                step = lam * g  # pure gradient scale
            # damped step, accepted on residual decrease (the objective is
            # 1/lam-strongly convex, so the full Newton step wins near the
            # minimizer and damping only guards the far field)
            alpha = 1.0
            for _ in range(50):
                cand = v - alpha * step
                cand_g = self.moreau_gradient(lam, x, cand)
                cand_gn = self.space.norm(cand_g)
                if cand_gn <= (1.0 - 0.25 * alpha) * gn or cand_gn <= tol:
                    v, g, gn = cand, cand_g, cand_gn
                    break
                alpha *= 0.5
            else:
                # gradient-descent fallback with the strong convexity step
                v = v - (lam / (1.0 + lam)) * g
                g = self.moreau_gradient(lam, x, v)
                gn = self.space.norm(g)
        return v, gn, gn <= 10 * tol


def soft_abs_operator() -> SubgradientOperator:
    """Subgradient of E(v) = |v| on R; the resolvent is soft thresholding.

    The set norm uses the minimal section of the subdifferential: 0 at the
    origin, 1 elsewhere.
    """
    space = euclidean(1)

    def prox(lam, x):
        return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)

    op = SubgradientOperator(
        space,
        energy_fn=lambda v: float(np.abs(v).sum()),
        grad_fn=lambda v: np.sign(v),
        exact_prox=prox,
        set_norm_fn=lambda v: 0.0 if float(np.abs(v)[0]) == 0.0 else 1.0,
        name="soft_abs",
        energy_batch=lambda V: np.abs(V).sum(axis=1),
    )
    return op


def quadratic_energy_operator(a: float = 1.0) -> SubgradientOperator:
    """E(v) = a v^2 / 2 on R, so J_t x = x/(1 + a t)."""
    space = euclidean(1)
    return SubgradientOperator(
        space,
        energy_fn=lambda v: 0.5 * a * float(v @ v),
        grad_fn=lambda v: a * v,
        exact_prox=lambda lam, x: x / (1.0 + a * lam),
        name=f"quadratic(a={a:g})",
        energy_batch=lambda V: 0.5 * a * np.sum(V * V, axis=1),
    )


def reciprocal_energy_operator() -> SubgradientOperator:
    """E(v) = 1/v on (0, oo), +inf elsewhere: an open effective domain.

    The closure point v = 0 lies outside dom A; it separates the domain
    chain characterizations (membership in the closure without membership
    in the interpolation domains for theta >= 1/3 on the p = 2 scale).
    """
    space = euclidean(1)

    def energy(v):
        v0 = float(v[0])
        return 1.0 / v0 if v0 > 0 else math.inf

    def prox(lam, x):
        # v - lam / v^2 = x, unique positive root (phi is increasing in v)
        x0 = float(x[0])
        hi = max(x0, 0.0) + lam ** (1.0 / 3.0) + 1.0

        def phi(v):
            return v - lam / (v * v) - x0

        lo = min(1.0, 0.5 * hi)
        while phi(lo) > 0 and lo > 1e-150:
            lo *= 0.5
        for _ in range(110):
            mid = 0.5 * (lo + hi)
            if phi(mid) > 0:
                hi = mid
            else:
                lo = mid
        return np.array([0.5 * (lo + hi)])

    def set_norm_fn(v):
        v0 = float(v[0])
        return 1.0 / (v0 * v0) if v0 > 0 else math.inf

    def domain_fn(v):
        v0 = float(v[0])
        if v0 > 0:
            return "domain"
        return "closure" if v0 == 0.0 else "outside"

    return SubgradientOperator(
        space, energy_fn=energy, grad_fn=lambda v: -1.0 / (v * v),
        exact_prox=prox, set_norm_fn=set_norm_fn, domain_fn=domain_fn,
        name="reciprocal")


def indicator_box_operator(lo, hi) -> SubgradientOperator:
    """Subgradient of the indicator of the box [lo, hi]^d.

    The resolvent is the projection onto the box for every lambda; the
    domain is the box itself (not dense), so points outside exercise the
    'outside the domain closure' branch of the domain chain.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    space = euclidean(len(lo))

    def inside(v):
        return bool(np.all(v >= lo - 1e-14) and np.all(v <= hi + 1e-14))

    def energy(v):
        return 0.0 if inside(v) else math.inf

    return SubgradientOperator(
        space,
        energy_fn=energy,
        grad_fn=lambda v: np.zeros_like(v),
        exact_prox=lambda lam, x: np.clip(x, lo, hi),
        set_norm_fn=lambda v: 0.0 if inside(v) else math.inf,
        domain_fn=lambda v: "domain" if inside(v) else "outside",
        name="indicator_box",
        energy_batch=lambda V: np.where(
            np.all((V >= lo - 1e-14) & (V <= hi + 1e-14), axis=1), 0.0, np.inf),
    )


class QLaplaceOperator(SubgradientOperator):
    """Discrete Dirichlet q-Laplacian on (0, 1) with n interior points.

    Energy E(u) = (1/q) sum_k h |(u_(k+1) - u_k)/h|^q with zero padding,
    differentiated in the discrete L^2(0,1) inner product (cell weight h).
    For q = 2 this is the standard tridiagonal Laplacian, used as the
    oracle for the Newton prox solver.
    """

    def __init__(self, n_interior: int, q: float = 2.0):
        if q < 2.0:
            raise PreconditionError("requires q >= 2")
        n = int(n_interior)
        h = 1.0 / (n + 1)
        space = weighted_l2(np.full(n, h))
        self.q = float(q)
        self.h = h
        self.n_interior = n
        super().__init__(space, self._energy_impl, self._grad_impl,
                         hess_solver=self._hess_solver_impl,
                         name=f"qlaplace(q={q:g}, n={n})")
        if q == 2.0:
            self._exact_prox = self._prox_tridiag
        self.energy_batch = self._energy_batch_impl

    def _diffs(self, u):
        padded = np.concatenate(([0.0], u, [0.0]))
        return np.diff(padded) / self.h

    def _energy_impl(self, u):
        d = self._diffs(u)
        return (self.h / self.q) * float(np.sum(np.abs(d) ** self.q))

    def _energy_batch_impl(self, U):
        U = np.asarray(U, dtype=float)
        Z = np.zeros((U.shape[0], 1))
        padded = np.hstack([Z, U, Z])
        d = np.diff(padded, axis=1) / self.h
        return (self.h / self.q) * np.sum(np.abs(d) ** self.q, axis=1)

    def _grad_impl(self, u):
        # gradient with respect to the h-weighted inner product
        d = self._diffs(u)
        psi = np.abs(d) ** (self.q - 1.0) * np.sign(d)
        return (psi[:-1] - psi[1:]) / self.h

    def _hess_solver_impl(self, u, rho):
        d = self._diffs(u)
        w = (self.q - 1.0) * np.abs(d) ** (self.q - 2.0) / self.h ** 2
        diag = w[:-1] + w[1:] + rho
        off = -w[1:-1]
        ab = np.zeros((3, self.n_interior))
        ab[0, 1:] = off
        ab[1, :] = diag
        ab[2, :-1] = off
        return lambda rhs: solve_banded((1, 1), ab, rhs)

    def _prox_tridiag(self, lam, x):
        # (I + lam * L/h^2) v = x with L = tridiag(-1, 2, -1)
        n = self.n_interior
        c = lam / self.h ** 2
        ab = np.zeros((3, n))
        ab[0, 1:] = -c
        ab[1, :] = 1.0 + 2.0 * c
        ab[2, :-1] = -c
        return solve_banded((1, 1), ab, x)

    def laplacian_eigensystem(self):
        """Eigenvalues/eigenvectors of the q = 2 operator, orthonormal in
        the discrete L^2 inner product (independent closed form)."""
        n, h = self.n_interior, self.h
        k = np.arange(1, n + 1)
        lam = (4.0 / h ** 2) * np.sin(k * math.pi * h / 2.0) ** 2
        xg = h * np.arange(1, n + 1)
        V = np.sin(np.outer(xg, k) * math.pi)
        V /= np.sqrt(h * np.sum(V * V, axis=0))
        return lam, V

    def grid_x(self):
        return self.h * np.arange(1, self.n_interior + 1)

    def exact_orbit(self, x, t):
        if self.q != 2.0:
            return None
        lam, V = self.laplacian_eigensystem()
        c = self.h * (V.T @ np.atleast_1d(np.asarray(x, float)))
        return V @ (np.exp(-lam * t) * c)


# ----------------------------------------------------------------------
# wrappers: type shift, I + hA, perturbation
# ----------------------------------------------------------------------

class ShiftedOperator(AccretiveOperator):
    """A = A0 - omega*I for a type-0 base operator A0; accretive of type
    omega, resolved through J_lambda^A x = J0_(lambda/(1-lambda*omega))
    (x/(1-lambda*omega))."""

    def __init__(self, base: AccretiveOperator, omega: float):
        if base.omega != 0.0:
            raise PreconditionError("shift expects a type-0 base operator")
        if omega < 0:
            raise ValueError("shift omega must be nonnegative")
        super().__init__(base.space, omega, f"{base.name} - {omega:g}*I")
        self.base = base

    def _resolve(self, lam, x):
        mu = lam / (1.0 - lam * self.omega)
        return self.base.resolve(mu, x / (1.0 - lam * self.omega))

    def set_norm(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        base_norm = self.base.set_norm(x)
        if math.isinf(base_norm):
            return math.inf
        # single-valued shipped bases: section = grad/Mx; shifted section
        if isinstance(self.base, SubgradientOperator):
            section = self.base.gradient(x)
        elif isinstance(self.base, MatrixLinear):
            section = self.base.M @ x
        elif isinstance(self.base, ScalarLinear):
            section = self.base.a * x
        else:
            return base_norm + self.omega * self.space.norm(x)
        return self.space.norm(section - self.omega * x)

    def domain_indicator(self, x):
        return self.base.domain_indicator(x)


def shifted(op: AccretiveOperator, omega: float) -> ShiftedOperator:
    return ShiftedOperator(op, omega)


class PlusIdentityOperator(AccretiveOperator):
    """B = I + hA: m-accretive of type 0 and surjective when h*omega_A < 1.

    Resolved through v = J^A_(lambda h/(1+lambda)) (x/(1+lambda)); the zero
    of the set norm is v0 = J^A_h(0).
    """

    def __init__(self, base: AccretiveOperator, h: float):
        if h <= 0:
            raise ValueError("h must be positive")
        if h * base.omega >= 1.0:
            raise PreconditionError("requires h*omega < 1")
        super().__init__(base.space, 0.0, f"I + {h:g}*{base.name}")
        self.base = base
        self.h = float(h)

    def _resolve(self, lam, x):
        mu = lam * self.h / (1.0 + lam)
        return self.base.resolve(mu, x / (1.0 + lam))

    def set_norm(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        base_norm = self.base.set_norm(x)
        if math.isinf(base_norm):
            return math.inf
        if isinstance(self.base, SubgradientOperator):
            section = self.base.gradient(x)
        elif isinstance(self.base, MatrixLinear):
            section = self.base.M @ x
        elif isinstance(self.base, ScalarLinear):
            section = self.base.a * x
        else:
            return self.space.norm(x) + self.h * base_norm
        return self.space.norm(x + self.h * section)

    def n1_zero_point(self):
        return self.base.resolve(self.h, np.zeros(self.space.dim))

    def domain_indicator(self, x):
        return self.base.domain_indicator(x)


def plus_identity(op: AccretiveOperator, h: float) -> PlusIdentityOperator:
    return PlusIdentityOperator(op, h)


class PerturbedOperator(AccretiveOperator):
    """A + B for a single-valued Lipschitz map B dominated by A.

    The resolvent solves x in v + lam*A v + lam*B v by the fixed-point
    iteration v <- J^A_lam(x - lam*B v), a contraction for
    lam*(lip_b)/(1 - lam*omega_A) < 1.  Records omega_(A+B) = omega_A + lip_b.
    """

    def __init__(self, base: AccretiveOperator, b_map: Callable,
                 lip_b: float, a: float, b_func: Callable,
                 name: str | None = None):
        super().__init__(base.space, base.omega + lip_b,
                         name or f"{base.name}+B")
        self.base = base
        self.b_map = b_map
        self.lip_b = float(lip_b)
        self.a = float(a)
        self.b_func = b_func

    def _resolve(self, lam, x):
        contraction = lam * self.lip_b / max(1.0 - lam * self.base.omega, 1e-15)
        if contraction >= 0.95:
            raise PreconditionError(
                "requires lambda small enough for the splitting contraction")
        v = self.base.resolve(lam, x)
        tol = 1e-12 * (1.0 + self.space.norm(x))
        for _ in range(300):
            v_next = self.base.resolve(lam, x - lam * np.asarray(
                self.b_map(v), dtype=float))
            err = self.space.norm(v_next - v)
            v = v_next
            if err <= tol * max(1e-15, 1.0 - contraction):
                return v
        raise SolverError("splitting iteration did not converge", residual=err)

    def set_norm(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        base_norm = self.base.set_norm(x)
        if math.isinf(base_norm):
            return math.inf
        if isinstance(self.base, SubgradientOperator):
            section = self.base.gradient(x)
        elif isinstance(self.base, MatrixLinear):
            section = self.base.M @ x
        elif isinstance(self.base, ScalarLinear):
            section = self.base.a * x
        else:
            return base_norm + self.space.norm(np.asarray(self.b_map(x), float))
        return self.space.norm(section + np.asarray(self.b_map(x), float))

    def domain_indicator(self, x):
        return self.base.domain_indicator(x)


def perturb(op: AccretiveOperator, b_map: Callable, lip_b: float,
            a: float, b_func: Callable) -> PerturbedOperator:
    """A + B with domination certificate |Bx| <= a |Ax| + b(||x||).

    The certificate (a in (0,1), b increasing) is the caller's claim; it is
    validated on samples by :func:`domination_report`.
    """
    if not (0.0 < a < 1.0):
        raise PreconditionError("requires domination constant a in (0, 1)")
    return PerturbedOperator(op, b_map, lip_b, a, b_func)


def domination_report(op: AccretiveOperator, b_map: Callable, a: float,
                      b_func: Callable, samples) -> dict:
    """Check |Bv| <= a |Av| + b(||v||) on the samples."""
    rows = []
    ok = True
    for v in samples:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        lhs = op.space.norm(np.asarray(b_map(v), dtype=float))
        rhs = a * op.set_norm(v) + b_func(op.space.norm(v))
        good = lhs <= rhs * (1 + 1e-12) + 1e-12
        ok = ok and good
        rows.append({"lhs": lhs, "rhs": rhs, "ok": good})
    return {"pass": ok, "rows": rows}


# ----------------------------------------------------------------------
# couples generated by operators
# ----------------------------------------------------------------------

def accretive_couple(op: AccretiveOperator) -> InterpolationCouple:
    """Couple (||.||, |A .|) with resolvent candidates.

    Each candidate J_t x comes with the pair
    (||x - J_t x||, min(|A J_t x|, ||x - J_t x||/t)); the second component
    is a certified upper bound for N1 because the Yosida quotient is a
    section of A at the resolvent point.
    """
    sn = op.space.norm

    def candidates(x, t):
        if t * op.omega >= 1.0:
            return []
        return [op.resolve(t, x)]

    def pair_candidates(x, t):
        if t * op.omega >= 1.0:
            return []
        v = op.resolve(t, x)
        n0 = sn(np.atleast_1d(np.asarray(x, float)) - v)
        return [(n0, min(op.set_norm(v), n0 / t))]

    exact = getattr(op, "exact_k", None)
    v0 = (op.n1_zero_point() if isinstance(op, PlusIdentityOperator) else None)
    return InterpolationCouple(
        space=op.space,
        n0=sn,
        n1=op.set_norm,
        candidates=candidates,
        pair_candidates=pair_candidates,
        exact_k=exact,
        n1_zero_point=v0,
        lipschitz=(1.0, None),
        n0_batch=op.space.norm_batch,
        name=f"N^{op.name}",
        op=op,
    )


def sqrt_energy_couple(op: SubgradientOperator) -> InterpolationCouple:
    """Couple (||.||_H, sqrt(E)) for a subgradient operator.

    Candidates at parameter s are the resolvent points J_(s^2/2) x and
    J_(s^2) x, matching the proximal minimality estimate
    ||x - J_t x|| <= K(x, sqrt(2t)) for this couple.
    """
    sn = op.space.norm

    def n1(v):
        e = op.energy(v)
        return math.sqrt(e) if math.isfinite(e) else math.inf

    def candidates(x, s):
        return [op.resolve(0.5 * s * s, x), op.resolve(s * s, x)]

    n1_batch = None
    if op.energy_batch is not None:
        n1_batch = lambda V: np.sqrt(op.energy_batch(V))

    return InterpolationCouple(
        space=op.space,
        n0=sn,
        n1=n1,
        candidates=candidates,
        lipschitz=(1.0, None),
        n0_batch=op.space.norm_batch,
        n1_batch=n1_batch,
        name=f"N^sqrt(E[{op.name}])",
        op=op,
    )


def resolvent_profile(op: AccretiveOperator, x, grid, tau: float | None = None):
    """GridFunction of lambda -> ||x - J_lambda x|| / lambda.

    Values at nodes where lambda*omega >= 1 (possible only beyond tau) are
    frozen at the last admissible node; truncated norms never see them.
    """
    from .grids import GridFunction
    x = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.zeros(grid.n_nodes)
    last = 0.0
    for i, lam in enumerate(grid.nodes):
        if tau is not None and lam > tau:
            vals[i] = last
            continue
        if lam * op.omega >= 1.0:
            vals[i] = last
            continue
        v = op.resolve(lam, x)
        last = op.space.norm(x - v) / lam
        vals[i] = last
    return GridFunction(grid, vals)


# ----------------------------------------------------------------------
# configuration loading
# ----------------------------------------------------------------------

def matrix_from_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def from_config(config) -> AccretiveOperator:
    """Build an operator from a JSON object or dict.

    Kinds: scalar {a}, matrix {csv or rows}, energy {energy: abs|quadratic|
    reciprocal|indicator_box, params}, qlaplace {q, n}.  Optional wrappers:
    shift_omega, plus_identity_h.
    """
    if isinstance(config, str):
        config = json.loads(config)
    kind = config["kind"]
    if kind == "scalar":
        op = ScalarLinear(float(config.get("a", 1.0)))
    elif kind == "matrix":
        M = (matrix_from_csv(config["csv"]) if "csv" in config
             else np.asarray(config["rows"], dtype=float))
        op = MatrixLinear(M)
    elif kind == "energy":
        name = config.get("energy", "quadratic")
        if name == "abs":
            op = soft_abs_operator()
        elif name == "quadratic":
            op = quadratic_energy_operator(float(config.get("a", 1.0)))
        elif name == "reciprocal":
            op = reciprocal_energy_operator()
        elif name == "indicator_box":
            op = indicator_box_operator(config.get("lo", [-1.0]),
                                        config.get("hi", [1.0]))
        else:
            raise ValueError(f"unknown energy {name!r}")
    elif kind == "qlaplace":
        op = QLaplaceOperator(int(config.get("n", 64)),
                              float(config.get("q", 2.0)))
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    if config.get("shift_omega"):
        op = shifted(op, float(config["shift_omega"]))
    if config.get("plus_identity_h"):
        op = plus_identity(op, float(config["plus_identity_h"]))
    return op
