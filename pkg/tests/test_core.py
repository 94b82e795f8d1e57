import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasilab.core import (Custom, Forcing, OperatorDescriptor, PowerLaw, PowerLog,
                           ProblemParams, RadialGrid, RadialProfile, Regularized,
                           SamplingPlan, Tabulated, Zero, ball_volume, check_structure,
                           eval_nonlinearity, eval_operator, parse_nonlinearity,
                           parse_operator, sphere_area)
from quasilab.errors import (DomainError, InvalidInput, MonotonicityViolation,
                             UnsupportedRegime)


def test_params_derived_quantities():
    P = ProblemParams(3, 2)
    assert P.kappa == 1 and P.sigma == 3 and P.conjugate == 2
    assert ProblemParams(4, 3).sigma == 8 and ProblemParams(4, 3).kappa == 0.5


@pytest.mark.parametrize("n,p,c1,c2", [(1, 2, 1, 1), (3, 1, 1, 1), (3, 2, 0, 1), (3, 2, 2, 1)])
def test_params_invalid(n, p, c1, c2):
    with pytest.raises(InvalidInput):
        ProblemParams(n, p, c1, c2)


def test_subcritical_regime_rejected():
    with pytest.raises(UnsupportedRegime):
        ProblemParams(3, 3).require_supercritical()
    assert not ProblemParams(2, 2).supercritical


def test_sphere_area_and_volume():
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_area(4) == pytest.approx(2 * math.pi ** 2, rel=1e-15)
    assert ball_volume(3, 2.0) == pytest.approx(32 * math.pi / 3, rel=1e-15)


def test_eval_operator_examples():
    m2, m3 = OperatorDescriptor.model(2), OperatorDescriptor.model(3)
    assert np.allclose(eval_operator(m2, np.zeros(3), 0.0, np.array([3.0, -1, 2])), [3, -1, 2])
    assert np.allclose(eval_operator(m3, np.zeros(3), 0.0, np.array([2.0, 0, 0])), [4, 0, 0])
    sc = parse_operator("scaled:sin2:0.5", 2.5)
    for op in (m2, m3, sc):
        assert np.all(eval_operator(op, np.ones(3), 1.0, np.zeros(3)) == 0)


def test_eval_operator_rejects_non_finite():
    with pytest.raises(InvalidInput):
        eval_operator(OperatorDescriptor.model(2), np.zeros(3), 0.0, np.array([np.inf, 0, 0]))


@settings(max_examples=50, deadline=None)
@given(st.floats(1.1, 6), st.floats(1e-3, 1e3),
       st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_model_operator_homogeneity(p, lam, xi):
    op = OperatorDescriptor.model(p)
    xi = np.array(xi)
    lhs = eval_operator(op, np.zeros(3), 0.0, lam * xi)
    rhs = lam ** (p - 1) * eval_operator(op, np.zeros(3), 0.0, xi)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.5])
def test_structure_model_passes(p):
    rep = check_structure(OperatorDescriptor.model(p), ProblemParams(5, p), 10_000)
    assert rep.passed and rep.monotonicity_margin >= 0


def test_structure_scaled_passes():
    op = parse_operator("scaled:sin2:0.5", 2)
    rep = check_structure(op, ProblemParams(3, 2, 1, 2), SamplingPlan(10_000, seed=7))
    assert rep.passed


def test_structure_scaled_violating_bound_fails():
    op = parse_operator("scaled:3", 2)
    assert not check_structure(op, ProblemParams(3, 2, 1, 2), 1000).passed


def test_structure_negative_operator_fails():
    op = OperatorDescriptor.custom(2, lambda x, s, xi: -xi)
    rep = check_structure(op, ProblemParams(3, 2), 10_000)
    assert not rep.passed and rep.coercivity_margin < 0


def test_structure_is_reproducible():
    op = OperatorDescriptor.model(2.5)
    a = check_structure(op, ProblemParams(3, 2.5), SamplingPlan(2000, seed=3)).as_dict()
    b = check_structure(op, ProblemParams(3, 2.5), SamplingPlan(2000, seed=3)).as_dict()
    assert a == b


def test_nonlinearity_examples():
    assert eval_nonlinearity(PowerLaw(4), 0.5) == 0.0625
    assert eval_nonlinearity(PowerLog(3, 2), math.exp(-2)) == pytest.approx(math.exp(-6) / 4, rel=1e-14)
    for f in (PowerLaw(4), PowerLog(3, 2), Zero(), Tabulated([0, 1], [0, 1])):
        assert eval_nonlinearity(f, 0.0) == 0.0


def test_nonlinearity_domain():
    with pytest.raises(DomainError):
        PowerLaw(2, eps=0.5)(0.6)
    with pytest.raises(DomainError):
        PowerLaw(2)(-1e-3)
    with pytest.raises(InvalidInput):
        PowerLog(3, 1, eps=0.9)


def test_powerlog_monotonicity_guard():
    with pytest.raises(MonotonicityViolation):
        PowerLog(1, -3, eps=math.exp(-1))


@pytest.mark.parametrize("f", [PowerLaw(4), PowerLaw(0.5, eps=3), PowerLog(3, 2), PowerLog(2, -1),
                               Tabulated([0, 0.2, 1], [0, 0.5, 0.6]),
                               Regularized(Zero(), 3.0), Custom(lambda t: np.sqrt(t))])
def test_nonlinearity_non_decreasing(f):
    t = np.linspace(0, f.eps, 4001)
    v = f(t)
    assert np.all(v >= 0) and np.all(np.diff(v) >= 0)


def test_table_validation(tmp_path):
    with pytest.raises(MonotonicityViolation):
        Tabulated([0, 0.5, 1], [0, 0.3, 0.2])
    with pytest.raises(InvalidInput):
        Tabulated([0, 0.5, 0.5], [0, 1, 2])
    tab = Tabulated([0.5, 1.0], [1.0, 2.0])
    assert tab.t[0] == 0.0 and tab(0.25) == 0.5
    path = tmp_path / "f.csv"
    path.write_text("t,f\n0,0\n0.5,0.1\n1,1\n")
    loaded = parse_nonlinearity(f"table:{path}")
    assert loaded.eps == 1.0 and loaded(0.75) == pytest.approx(0.55)


def test_table_with_positive_value_at_zero_is_accepted():
    assert Tabulated([0, 1], [0.2, 1])(0.0) == 0.2


def test_custom_monotonicity_check():
    with pytest.raises(MonotonicityViolation):
        Custom(lambda t: np.cos(3 * t))


def test_parse_nonlinearity():
    assert parse_nonlinearity("power:4").q == 4
    pl = parse_nonlinearity("powerlog:3,2")
    assert (pl.q, pl.alpha, pl.eps) == (3, 2, math.exp(-1))
    assert isinstance(parse_nonlinearity("zero", 2.0), Zero)
    with pytest.raises(InvalidInput):
        parse_nonlinearity("power:x")
    with pytest.raises(InvalidInput):
        parse_nonlinearity("cubic")


def test_default_grid_layout():
    g = RadialGrid.default()
    assert g.nodes[0] == 0 and g.r_max == 1e3
    assert np.all(np.diff(g.nodes) > 0)
    assert 900 < len(g) < 1100


def test_grid_validation_and_refinement():
    with pytest.raises(InvalidInput):
        RadialGrid([0.1, 1.0])
    with pytest.raises(InvalidInput):
        RadialGrid([0, 2, 1])
    g = RadialGrid.uniform(2, 4)
    assert len(g.refined(3)) == 13
    assert np.array_equal(g.refined(3).nodes[::3], g.nodes)
    assert np.array_equal(g.coarsened().nodes, [0, 1, 2])
    assert np.array_equal(g.with_nodes([0.25]).nodes, [0, 0.25, 0.5, 1, 1.5, 2])


def test_profile_interpolation_and_domain():
    g = RadialGrid.uniform(2, 2)
    u = RadialProfile(g, [2, 1, 0])
    assert u(0.5) == 1.5 and u.is_nonincreasing() and u.is_nonnegative()
    assert np.array_equal(u.derivative(), [-1, -1])
    with pytest.raises(DomainError):
        u(3.0)
    with pytest.raises(InvalidInput):
        RadialProfile(g, [1, np.nan, 0])


def test_forcing_factories():
    I = Forcing.indicator(2.0)
    assert I(1.9) == 1 and I(2.1) == 0 and I.support == 2.0
    D = Forcing.power_decay(4)
    assert D(1.0) == 1 / 16 and D.tail_exponent == 4
    assert Forcing.zero().is_zero
    assert Forcing.parse("decay:5").tail_exponent == 5
    assert Forcing.parse("indicator:3").support == 3
    with pytest.raises(InvalidInput):
        Forcing.parse("gauss")
    prof = RadialProfile(RadialGrid.uniform(1, 2), [1, 0.5, 0.25])
    F = Forcing.from_profile(prof)
    assert F(0.25) == 0.75 and F(1.5) == 0.0
