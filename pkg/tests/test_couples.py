import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interplab.couples import (
    KEvaluator,
    discrete_l1,
    euclidean,
    interp_function_tau,
    interpolation_theorem_check,
    k_function,
    k_vs_full_relation,
    l1_linf_couple,
    max_norm_space,
    mean_method_tau,
    powered_couple,
    rearrangement_k,
    trace_method_upper,
    weighted_l2,
    InterpolationCouple,
)
from interplab.grids import LogGrid
from interplab.operators import (
    ScalarLinear,
    indicator_box_operator,
    plus_identity,
    quadratic_energy_operator,
)
from interplab.spaces import norm, weighted_lp, witness_min_one_over_t2

E_HALF = weighted_lp(0.5, 2.0)


# ----------------------------------------------------------------------
# normed spaces
# ----------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_norm_axioms_random_triples(seed):
    r = np.random.default_rng(seed)
    spaces = [euclidean(3), max_norm_space(3),
              weighted_l2(r.uniform(0.1, 2.0, 3)),
              discrete_l1(np.full(3, 1 / 3))]
    u, v, w = r.normal(size=(3, 3))
    c = r.uniform(-3, 3)
    for sp in spaces:
        assert sp.norm(np.zeros(3)) == 0.0
        assert abs(sp.norm(c * u) - abs(c) * sp.norm(u)) <= 1e-12 * (
            1 + sp.norm(u))
        assert sp.norm(u + v) <= sp.norm(u) + sp.norm(v) + 1e-12
        assert abs(sp.norm_batch(np.stack([u, v, w]))[1] - sp.norm(v)) <= 1e-14


def test_bracket_quotient_euclidean_formula(rng):
    sp = euclidean(4)
    x, y = rng.normal(size=(2, 4))
    lam = 1e-9
    got = sp.bracket_quotient(x, y, lam)
    want = np.dot(x, y) / np.linalg.norm(x)
    assert abs(got - want) <= 1e-8 * (1 + abs(want))


# ----------------------------------------------------------------------
# K-function
# ----------------------------------------------------------------------

def brute_force_scalar_k(a, x, t, grid_width=3.0, n=20001):
    """Independent dense-grid infimum for the 1-D couple (|.|, |a .|)."""
    vs = np.linspace(-grid_width * abs(x), grid_width * abs(x), n)
    return float(np.min(np.abs(x - vs) + t * a * np.abs(vs)))


def test_scalar_k_against_independent_brute_force():
    # closed form min(1, a t)|x|, here 1.0 at a=1, x=2, t=0.5
    oracle = brute_force_scalar_k(1.0, 2.0, 0.5)
    assert abs(oracle - 1.0) <= 5e-4
    got = k_function(ScalarLinear(1.0).couple(), [2.0], 0.5, brute=True)
    assert abs(got - 1.0) <= 1e-9


def test_k_vanishes_at_zero_of_n1():
    couple = ScalarLinear(1.0).couple()
    for t in (0.01, 1.0, 50.0):
        assert k_function(couple, [0.0], t) == 0.0


def test_rearrangement_k_three_cells():
    # f = (3,1,2) on three equal cells: decreasing rearrangement (3,2,1),
    # integral over (0, 1/3) equals 1.0
    couple = l1_linf_couple(3)
    f = np.array([3.0, 1.0, 2.0])
    assert abs(rearrangement_k(f, 1 / 3, np.full(3, 1 / 3)) - 1.0) <= 1e-15
    got = k_function(couple, f, 1 / 3)
    assert abs(got - 1.0) <= 1e-9


def test_rearrangement_oracle_matches_truncation_brute_force(rng):
    # on <= 8 cells the clamp family attains the infimum
    for m in (4, 8):
        couple = l1_linf_couple(m)
        measures = np.full(m, 1.0 / m)
        for _ in range(5):
            f = rng.normal(size=m) * 3
            for t in (0.05, 0.3, 0.9):
                want = rearrangement_k(f, t, measures)
                got = k_function(couple, f, t)
                assert abs(got - want) <= 1e-9 * (1 + want)


def test_k_profile_monotonicity(rng):
    # K nondecreasing and K/t nonincreasing, node to node
    grid = LogGrid(1e-5, 1e2, 512)
    couple = l1_linf_couple(5)
    f = rng.normal(size=5) * 2
    ev = KEvaluator(couple, f)
    prof = ev.profile(grid)
    k_vals = prof.values * grid.nodes
    assert (np.diff(k_vals) >= -1e-9).all()
    assert (np.diff(prof.values) <= 1e-9).all()


def test_k_subadditive_in_x(rng):
    couple = l1_linf_couple(3)
    for _ in range(10):
        f, g = rng.normal(size=(2, 3))
        for t in (0.1, 1.0):
            kf = k_function(couple, f, t)
            kg = k_function(couple, g, t)
            kfg = k_function(couple, f + g, t)
            assert kfg <= kf + kg + 1e-9


def test_k_pool_envelope_certifies_upper_bound():
    # every returned value dominates the exact closed form
    op = ScalarLinear(2.0)
    couple = op.couple()
    ev = KEvaluator(couple, [1.5], seed=3)
    ts = np.geomspace(1e-4, 10, 50)
    ev.seed(ts, line_search=True, random_probes=4)
    exact = np.array([min(1.0, 2.0 * t) * 1.5 for t in ts])
    got = ev.k_many(ts)
    assert (got >= exact - 1e-12).all()
    assert (got <= exact + 1e-9).all()  # closed-form couple: envelope tight


# ----------------------------------------------------------------------
# truncated interpolation values
# ----------------------------------------------------------------------

def test_interp_tau_closed_form(grid):
    # K(x,t) = min(1,t)|x| gives N_tau = |x| ||chi_(0,1)||_E at tau = 1
    couple = ScalarLinear(1.0).couple()
    for x in (1.0, 2.5):
        want = x / (2.0 * (1 - 0.5)) ** 0.5  # |x| ||chi_(0,1)||
        got = interp_function_tau(couple, [x], E_HALF, 1.0, grid=grid)
        assert abs(got - want) <= 3e-5 * want


def test_interp_tau_zero_at_n1_zero(grid):
    couple = ScalarLinear(1.0).couple()
    assert interp_function_tau(couple, [0.0], E_HALF, 1.0, grid=grid) == 0.0


def test_interp_tau_outside_closure_grows(grid):
    # distance C to the domain forces K/t >= C/t, not integrable at 0:
    # the grid value scales like t_min^(-1/2) on the (0.5, 2) scale
    op = indicator_box_operator([-1.0], [1.0])
    couple = op.couple()
    x = [3.0]
    v0 = interp_function_tau(couple, x, E_HALF, 0.5, grid=grid)
    fine = grid.refined(2, 1.0 / 64.0)
    v1 = interp_function_tau(couple, x, E_HALF, 0.5, grid=fine)
    assert v1 > 5.0 * v0  # 64^0.5 = 8 in the limit
    assert v0 > 1e2  # already large on the base grid


def test_k_vs_full_relation_chain(grid):
    op = plus_identity(ScalarLinear(1.0), 0.5)
    couple = op.couple()
    report = k_vs_full_relation(couple, [2.0], E_HALF, 1.0, grid=grid)
    assert report["pass"]
    assert report["n_tau"] <= report["n_full"] <= report["upper"] + 1e-12


def test_k_vs_full_relation_zero_at_v0(grid):
    op = plus_identity(ScalarLinear(1.0), 0.5)
    couple = op.couple()
    v0 = couple.n1_zero_point
    report = k_vs_full_relation(couple, v0, E_HALF, 1.0, grid=grid)
    assert report["n_tau"] <= 1e-12 and report["n_full"] <= 1e-12


def test_k_vs_full_relation_tau_to_horizon(grid):
    op = plus_identity(ScalarLinear(1.0), 0.5)
    couple = op.couple()
    report = k_vs_full_relation(couple, [2.0], E_HALF, grid.t_max, grid=grid)
    assert abs(report["n_tau"] - report["n_full"]) <= 1e-9
    assert abs(report["upper"] - report["n_full"]) <= 1e-9


def test_k_vs_full_requires_hypotheses(grid):
    couple = ScalarLinear(1.0).couple()  # no surjectivity: no known v0...
    object.__setattr__  # keep flake quiet
    couple.n1_zero_point = None
    with pytest.raises(ValueError, match="v0"):
        k_vs_full_relation(couple, [1.0], E_HALF, 1.0, grid=grid)


# ----------------------------------------------------------------------
# mean method
# ----------------------------------------------------------------------

def test_mean_method_sandwich(grid):
    couple = ScalarLinear(1.0).couple()
    wit = norm(E_HALF, witness_min_one_over_t2(grid))
    x, tau = [1.0], 1.0
    for eps in (0.5, 0.1):
        ev = KEvaluator(couple, x)
        m = mean_method_tau(couple, x, E_HALF, tau, eps, grid=grid,
                            evaluator=ev)
        n_tau = norm(E_HALF, ev.profile(grid, tau=tau).truncate(0, tau))
        assert n_tau <= m.value + 1e-12
        assert m.value <= 2 * (1 + eps) * (n_tau + eps * wit) + 1e-12


def test_mean_method_near_zero_cost_at_v0(grid):
    # at x = v0 the selected pieces have vanishing cost, so the value is
    # bounded by the epsilon witness term alone
    couple = ScalarLinear(1.0).couple()
    wit = norm(E_HALF, witness_min_one_over_t2(grid))
    eps = 0.2
    m = mean_method_tau(couple, [0.0], E_HALF, 1.0, eps, grid=grid)
    assert m.value <= 2 * (1 + eps) * eps * wit + 1e-12


def test_mean_method_epsilon_trend(grid):
    # smaller eps gives a tighter construction (empirical monotone trend)
    couple = ScalarLinear(2.0).couple()
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = [float(rng.uniform(0.5, 2.0))]
        small = mean_method_tau(couple, x, E_HALF, 1.0, 0.01, grid=grid)
        large = mean_method_tau(couple, x, E_HALF, 1.0, 0.5, grid=grid)
        assert small.value <= large.value + 1e-3


# ----------------------------------------------------------------------
# trace method
# ----------------------------------------------------------------------

def test_trace_method_scalar_chain(grid):
    # J_lam x = x/(1+a lam), derivative -a x/(1+a lam)^2: the objective is
    # finite and controlled by the resolvent profile bound
    op = ScalarLinear(1.0)
    res = trace_method_upper(op.couple(), [1.0], E_HALF, 0.5, grid=grid)
    assert res.value <= res.bound * (1 + 1e-6)
    # independent scalar integrals: int_0^0.5 (1+l)^-4 dl and (1+l)^-2 dl
    d_exact = math.sqrt((1 - 1.5 ** -3) / 3)
    n1_exact = math.sqrt(1 - 1 / 1.5)
    assert abs(res.derivative_term - d_exact) <= 2e-3
    assert abs(res.n1_term - n1_exact) <= 2e-3


def test_trace_method_zero_at_origin(grid):
    op = ScalarLinear(1.0)
    res = trace_method_upper(op.couple(), [0.0], E_HALF, 0.5, grid=grid)
    assert res.value == 0.0


def test_trace_dominates_mean_over_hardy_bound(grid):
    # mean value <= ||P|| * trace value on the 1-D instance
    op = ScalarLinear(1.0)
    couple = op.couple()
    mean = mean_method_tau(couple, [1.0], E_HALF, 0.5, 0.1, grid=grid)
    trace = trace_method_upper(couple, [1.0], E_HALF, 0.5, grid=grid)
    assert mean.value <= 2.0 * trace.value * (1 + 1e-6)


def test_trace_requires_omega_condition(grid):
    from interplab.operators import shifted
    op = shifted(ScalarLinear(1.0), 0.9)
    with pytest.raises(ValueError, match="tau\\*omega"):
        trace_method_upper(op.couple(), [1.0], E_HALF, 2.0, grid=grid)


# ----------------------------------------------------------------------
# interpolation theorem (mapping between couples)
# ----------------------------------------------------------------------

def test_interpolation_theorem_resolvent_map(coarse_grid):
    # T = J_h is 1/(1-h*omega)-Lipschitz into X and bounded into dom A
    op = ScalarLinear(1.0)
    couple = op.couple()
    h = 0.5
    T = lambda v: op.resolve(h, v)
    report = interpolation_theorem_check(
        T, couple, couple, E_HALF, 0.5,
        samples=[[0.5], [1.0], [-2.0]],
        L=1.0, a=1.0, b_func=lambda r: r / h,
        grid=coarse_grid)
    assert report["pass"] is True
    assert report["worst_ratio"] <= 1.0 + 1e-9


def test_interpolation_theorem_identity(coarse_grid):
    couple = ScalarLinear(1.0).couple()
    report = interpolation_theorem_check(
        lambda v: v, couple, couple, E_HALF, 0.5,
        samples=[[1.0], [-0.7]], L=1.0, a=1.0, b_func=lambda r: 0.0,
        grid=coarse_grid)
    assert report["pass"] is True
    assert report["a_tilde"] == 1.0
    for row in report["samples"]:
        assert row["b_tilde"] == 0.0


def test_interpolation_theorem_linear_contraction(coarse_grid):
    # T = c x between two Euclidean norm couples reproduces the classical
    # bound with a_tilde = c and no additive term
    sp = euclidean(2)
    couple = InterpolationCouple(
        space=sp, n0=sp.norm, n1=lambda v: 2.0 * sp.norm(v),
        n1_zero_point=np.zeros(2), name="norm_pair")
    c = 0.5
    report = interpolation_theorem_check(
        lambda v: c * v, couple, couple, E_HALF, 0.5,
        samples=[[1.0, 0.0], [0.3, -0.8]], L=c, a=c,
        b_func=lambda r: 0.0, grid=coarse_grid)
    assert report["pass"] is True


def test_interpolation_theorem_reports_hypothesis_violation(coarse_grid):
    couple = ScalarLinear(1.0).couple()
    report = interpolation_theorem_check(
        lambda v: 3.0 * v, couple, couple, E_HALF, 0.5,
        samples=[[1.0]], L=1.0, a=1.0, b_func=lambda r: 0.0,
        grid=coarse_grid)
    assert report["pass"] is None
    assert report["violations"]


# ----------------------------------------------------------------------
# powered couples (exposed, no classical identification asserted)
# ----------------------------------------------------------------------

def test_powered_couple_evaluates(coarse_grid):
    base = l1_linf_couple(4)
    pc = powered_couple(base, 0.5, 1.0)
    f = np.array([2.0, 0.5, 1.0, 0.1])
    k_base = k_function(base, f, 0.5)
    k_pow = k_function(pc, f, 0.5)
    assert 0.0 < k_pow < math.inf
    assert k_pow != k_base
