import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interplab.grids import GridFunction, LogGrid
from interplab.spaces import (
    SpaceSpec,
    UnsupportedSpaceError,
    dilation_apply,
    dilation_norm,
    hardy_analytic_bound,
    hardy_apply,
    hardy_norm_estimate,
    l1_cap_linf_space,
    l1_space,
    linf_space,
    norm,
    square_space,
    weighted_lp,
    witness_min_one_over_t2,
)

ALL_SPACES = [weighted_lp(0.5, 2.0), weighted_lp(0.25, 2.0),
              weighted_lp(0.75, 1.0), l1_space(), linf_space(),
              l1_cap_linf_space()]


# ----------------------------------------------------------------------
# norm evaluation
# ----------------------------------------------------------------------

def test_chi_01_weighted_l2_is_one(grid):
    # p(1-theta)-1 = 0, so the norm is the plain L2 norm of chi_(0,1)
    f = GridFunction.indicator(grid, 0.0, 1.0)
    assert abs(norm(weighted_lp(0.5, 2.0), f) - 1.0) <= 1e-9


@pytest.mark.parametrize("space", ALL_SPACES)
def test_zero_function_has_zero_norm(space, grid):
    assert norm(space, GridFunction.constant(grid, 0.0)) == 0.0


@pytest.mark.parametrize("theta,p,h", [(0.5, 2.0, 0.25), (0.25, 2.0, 0.1),
                                       (0.75, 1.0, 3.0), (0.4, 3.0, 1.7)])
def test_chi_0h_norm_closed_form(grid, theta, p, h):
    # antiderivative of the weight: integral_0^h t^(p(1-theta)-1) dt
    #   = h^(p(1-theta)) / (p(1-theta)),  so the norm is
    #   h^(1-theta) / (p(1-theta))^(1/p), of the form C * h^(1-theta)
    want = h ** (1 - theta) / (p * (1 - theta)) ** (1 / p)
    got = norm(weighted_lp(theta, p), GridFunction.indicator(grid, 0.0, h))
    assert abs(got - want) <= 3e-5 * want


def test_chi_norm_scaling_exponent(grid):
    space = weighted_lp(0.3, 2.0)
    n1 = norm(space, GridFunction.indicator(grid, 0.0, 0.02))
    n2 = norm(space, GridFunction.indicator(grid, 0.0, 0.04))
    assert abs(n2 / n1 - 2.0 ** 0.7) < 2e-4


def test_norm_infinite_when_value_infinite(grid):
    vals = np.ones(grid.n_nodes)
    vals[100] = np.inf
    f = GridFunction(grid, vals, (0.0, 1.0))
    for space in ALL_SPACES:
        assert math.isinf(norm(space, f))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.0, 7.5))
def test_norm_axioms(seed, c):
    # absolute homogeneity, triangle inequality and the ideal property are
    # exact for samples sharing a grid and window (tolerance 1e-10 relative)
    g = LogGrid(1e-4, 1e2, 256)
    r = np.random.default_rng(seed)
    f = GridFunction(g, r.uniform(0.0, 2.0, g.n_nodes))
    h = GridFunction(g, r.uniform(0.0, 2.0, g.n_nodes))
    smaller = GridFunction(g, f.values * r.uniform(0.0, 1.0, g.n_nodes))
    for space in ALL_SPACES:
        nf, nh = norm(space, f), norm(space, h)
        assert abs(norm(space, f.scale(c)) - c * nf) <= 1e-10 * (1 + c * nf)
        assert norm(space, f + h) <= (nf + nh) * (1 + 1e-10)
        assert norm(space, smaller) <= nf * (1 + 1e-10)


def test_embedding_witness_finite_in_every_space(grid):
    # t -> min(1, 1/t^2) lies in L1 cap Linf, hence in every shipped space
    w = witness_min_one_over_t2(grid)
    for space in ALL_SPACES:
        assert norm(space, w) < math.inf


def test_chi_over_t_blows_up_under_left_refinement(grid):
    # chi_(0,1)/t is excluded by every shipped weight: the grid value grows
    # like t_min^(-theta) (or log-diverges on the L1 scale) as the left
    # endpoint refines
    def value(space, g):
        f = GridFunction(g, 1.0 / g.nodes, (0.0, 1.0))
        return norm(space, f)

    fine = grid.refined(2, 1.0 / 64.0)
    for space in ALL_SPACES:
        coarse_val, fine_val = value(space, grid), value(space, fine)
        if space.kind == "l1":
            assert fine_val > coarse_val + 0.9 * math.log(64.0)
        else:
            assert fine_val > 1.5 * coarse_val


# ----------------------------------------------------------------------
# Hardy operator
# ----------------------------------------------------------------------

def test_hardy_indicator_image_formula(grid):
    # P(chi_(0,tau))(t) = chi_(0,tau)(t) + tau * chi_(tau,oo)(t) / t
    tau = 0.37
    image = hardy_apply(GridFunction.indicator(grid, 0.0, tau))
    t = grid.nodes
    exact = np.where(t < tau, 1.0, tau / t)
    assert np.max(np.abs(image.values - exact)) <= 1e-9


def test_hardy_constant_is_fixed(grid):
    image = hardy_apply(GridFunction.constant(grid, 3.5))
    assert np.max(np.abs(image.values - 3.5)) <= 1e-12


def test_hardy_of_identity_halves(grid):
    # f(t) = t gives Pf(t) = t/2; the frozen-tail convention on (0, t_min)
    # contributes t_min^2/2 in absolute terms, so compare above 1e-3
    f = GridFunction(grid, grid.nodes.copy())
    image = hardy_apply(f)
    sel = grid.nodes > 1e-3
    assert np.max(np.abs(image.values[sel] / (grid.nodes[sel] / 2) - 1)) <= 2e-6


def test_hardy_linear_and_monotone(grid, rng):
    f = GridFunction(grid, rng.uniform(0, 1, grid.n_nodes))
    g = GridFunction(grid, rng.uniform(0, 1, grid.n_nodes))
    pf, pg = hardy_apply(f), hardy_apply(g)
    psum = hardy_apply(f + g)
    assert np.allclose(psum.values, pf.values + pg.values, rtol=1e-12)
    dominated = hardy_apply(GridFunction(grid, np.minimum(f.values, g.values)))
    assert (dominated.values <= pf.values + 1e-15).all()


def test_double_hardy_matches_symbolic(grid):
    # P(P chi_(0,1))(t) = 1 for t <= 1 and (1 + log t)/t beyond; the second
    # application integrates a piecewise-linear model, so a finer grid is
    # used to meet the 1e-6 target
    g = LogGrid(1e-6, 1e2, 2 ** 14)
    image = hardy_apply(hardy_apply(GridFunction.indicator(g, 0.0, 1.0)))
    t = g.nodes
    exact = np.where(t <= 1.0, 1.0, (1.0 + np.log(t)) / t)
    assert np.max(np.abs(image.values - exact)) <= 1e-6


def test_hardy_norm_estimate_half_two():
    est = hardy_norm_estimate(weighted_lp(0.5, 2.0))
    assert 1.9 < est <= 2.0


def test_hardy_norm_estimate_quarter():
    est = hardy_norm_estimate(weighted_lp(0.25, 2.0))
    assert 3.5 < est <= 4.0
    assert hardy_analytic_bound(weighted_lp(0.25, 2.0)) == 4.0


def test_hardy_norm_estimate_linf():
    assert abs(hardy_norm_estimate(linf_space()) - 1.0) <= 1e-9


def test_hardy_unbounded_spaces_raise():
    with pytest.raises(UnsupportedSpaceError, match="L1"):
        hardy_norm_estimate(l1_space())
    with pytest.raises(UnsupportedSpaceError):
        hardy_analytic_bound(l1_cap_linf_space())


# ----------------------------------------------------------------------
# dilation and the squared space
# ----------------------------------------------------------------------

def test_dilation_norm_values():
    assert abs(dilation_norm(weighted_lp(0.5, 2.0)) - 2 ** -0.5) <= 1e-15
    assert dilation_norm(l1_space()) == 1.0
    assert dilation_norm(linf_space()) == 1.0
    with pytest.raises(UnsupportedSpaceError):
        dilation_norm(l1_cap_linf_space())


def test_dilation_of_constant(grid):
    f = GridFunction.constant(grid, 2.0)
    assert np.allclose(dilation_apply(f).values, 2.0)


def test_dilation_norm_inequality_piecewise_constant(rng):
    # ||D2 f||_E <= 2^(theta-1) ||f||_E, equality by change of variables;
    # on an octave grid the dilation is an exact node shift
    g = LogGrid.octave(2.0 ** -24, 30, per_octave=48)
    space = weighted_lp(0.3, 2.0)
    bound = dilation_norm(space)
    for _ in range(10):
        pieces = np.sort(rng.choice(g.nodes[48:-48], size=3, replace=False))
        f = GridFunction(g, np.ones(g.n_nodes), (pieces[0], pieces[2]))
        lhs = norm(space, dilation_apply(f))
        rhs = bound * norm(space, f)
        assert lhs <= rhs * (1 + 1e-6)
        assert lhs >= rhs * (1 - 1e-6)  # sharpness on indicators


def test_dilation_indicator_window_halves(grid):
    d = dilation_apply(GridFunction.indicator(grid, 0.0, 1.0))
    assert d.window == (0.0, 0.5)


def test_square_space_identity():
    assert square_space(weighted_lp(0.25, 2.0)) == weighted_lp(0.5, 2.0)
    assert square_space(weighted_lp(0.49, 1.0)) == weighted_lp(0.98, 1.0)
    with pytest.raises(UnsupportedSpaceError, match="Banach function space"):
        square_space(weighted_lp(0.5, 2.0))


def test_square_space_norm_change_of_variables(grid):
    # || g ||_(E^2 defining formula) = 2^(1/p) || g ||_(E_(2 theta, p)):
    # substitute t = s^2 in the defining integral
    theta, p = 0.2, 2.0
    g_fun = GridFunction(grid, np.exp(-grid.nodes))
    direct_vals = g_fun.extension_at(np.sqrt(grid.nodes)) / np.sqrt(grid.nodes)
    direct = norm(weighted_lp(theta, p), GridFunction(grid, direct_vals))
    target = norm(weighted_lp(2 * theta, p), g_fun)
    assert abs(direct - 2 ** (1 / p) * target) <= 3e-4 * direct


def test_gamma_condition_matches_theta_half():
    # sqrt(2)*||D2|| < 1 exactly when theta < 1/2
    for theta in (0.1, 0.25, 0.49):
        assert math.sqrt(2) * dilation_norm(weighted_lp(theta, 2.0)) < 1
    for theta in (0.5, 0.7):
        assert math.sqrt(2) * dilation_norm(weighted_lp(theta, 2.0)) >= 1


def test_spacespec_json_roundtrip():
    for space in ALL_SPACES:
        assert SpaceSpec.from_json(space.to_json()) == space
    with pytest.raises(ValueError):
        weighted_lp(1.5, 2.0)
    with pytest.raises(ValueError):
        weighted_lp(0.5, 0.5)
