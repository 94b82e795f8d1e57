import math

import numpy as np
import pytest

from quasilab.barrier import BarrierParams, forcing_function
from quasilab.core import Forcing, PowerLaw, ProblemParams, RadialGrid, RadialProfile, Zero
from quasilab.errors import (CriterionDiverges, CriterionInconclusive, GridTooCoarse,
                             InvalidInput, SearchExhausted)
from quasilab.radial import (Certificate, SearchSpec, certify_supersolution, decay_metrics,
                             delta_search, delta_trajectory, refined_check, residual_check,
                             solve_radial)

P32 = ProblemParams(3, 2)


def exact_indicator_32(r):
    r = np.asarray(r, dtype=float)
    return np.where(r <= 1, 0.5 - r * r / 6, 1 / (3 * np.maximum(r, 1e-300)))


@pytest.fixture(scope="module")
def indicator_solution():
    grid = RadialGrid.default().with_nodes([2.0, 5.0, 50.0])
    return solve_radial(Forcing.indicator(1.0), P32, grid)


def test_indicator_nodal_values(indicator_solution):
    u = indicator_solution
    assert np.max(np.abs(u.values - exact_indicator_32(u.grid.nodes))) < 1e-12


def test_indicator_residual_small(indicator_solution):
    assert residual_check(indicator_solution, Forcing.indicator(1.0), P32) < 1e-4


def test_residual_second_order():
    F = Forcing.power_decay(4)
    fine = RadialGrid.default()
    coarse = fine.coarsened()
    r_fine = residual_check(solve_radial(F, P32, fine), F, P32)
    r_coarse = residual_check(solve_radial(F, P32, coarse), F, P32)
    assert r_fine < 1e-4
    assert 2.5 < r_coarse / r_fine < 6


def test_zero_forcing():
    u = solve_radial(Forcing.zero(), P32, RadialGrid.uniform(2, 4))
    assert not np.any(u.values)


def test_homogeneity_model_operator():
    # -Delta_p (c u) = c^{p-1} F  gives u[c^{p-1} F] = c u[F]
    params = ProblemParams(4, 3)
    grid = RadialGrid.default()
    F = Forcing.power_decay(5)
    scaled = Forcing(lambda r: 4.0 * F(r), tail_exponent=5)
    u1 = solve_radial(F, params, grid).values
    u2 = solve_radial(scaled, params, grid).values
    assert np.allclose(u2, 2.0 * u1, rtol=1e-12, atol=0)


def test_solution_monotone_and_positive():
    u = solve_radial(Forcing.power_decay(4), P32, RadialGrid.default())
    assert u.is_nonincreasing() and np.all(u.values > 0)


def test_grid_too_coarse():
    grid = RadialGrid([0.0, 1.0, 10.0, 100.0, 1000.0])
    u = RadialProfile(grid, [1, 0.5, 0.1, 0.01, 0.001])
    with pytest.raises(GridTooCoarse):
        residual_check(u, Forcing.indicator(1.0), P32)


def test_decay_metrics_tail_limit():
    params = ProblemParams(4, 3)
    F = Forcing.power_decay(6)
    u = solve_radial(F, params, RadialGrid.default())
    m = decay_metrics(u, params, F)
    assert m.sup_u == u.values[0]
    assert m.decay_coeff <= m.tail_limit * (1 + 1e-10)
    # r^kappa u(r) approaches the limit at the far end of the grid
    r = u.grid.r_max
    assert u.values[-1] * r ** params.kappa == pytest.approx(m.tail_limit, rel=1e-2)


def test_certify_supersolution_margins():
    bp = BarrierParams(1.0, 1.0, P32)
    grid = RadialGrid.default()
    u = RadialProfile(grid, 0.5 * bp.barrier(grid.nodes))
    chk = certify_supersolution(u, PowerLaw(4), bp)
    assert chk.passed and chk.barrier_margin > 0
    over = RadialProfile(grid, 1.5 * bp.barrier(grid.nodes))
    chk = certify_supersolution(over, PowerLaw(4), bp)
    assert not chk.passed and chk.forcing_margin == -math.inf


@pytest.fixture(scope="module")
def power4_certificate():
    return delta_search(PowerLaw(4), P32, eps=1.0)


def test_delta_search_passes(power4_certificate):
    cert = power4_certificate
    assert cert.passed and cert.forcing_margin >= 0
    assert cert.sup_u <= 0.5
    assert cert.delta == min(cert.delta1, cert.delta2)
    assert refined_check(cert, PowerLaw(4)).forcing_margin >= -1e-8


def test_certificate_round_trip(power4_certificate):
    data = power4_certificate.as_dict()
    assert Certificate.from_dict(data).as_dict() == data


def test_delta_search_refusals():
    with pytest.raises(CriterionDiverges):
        delta_search(PowerLaw(3), P32)
    from quasilab.core import Custom
    f = Custom(lambda t: np.where(t > 0, t ** 3 / np.abs(np.log(np.maximum(t, 1e-300))), 0.0),
               eps=math.exp(-1))
    with pytest.raises(CriterionInconclusive):
        delta_search(f, P32)
    with pytest.raises(InvalidInput):
        delta_search(PowerLaw(4, eps=0.5), P32, eps=1.0)


def test_delta_search_exhausted():
    with pytest.raises(SearchExhausted):
        delta_search(PowerLaw(10), ProblemParams(4, 3), eps=1.0,
                     search=SearchSpec(delta0=1e6, shrink=0.5, max_iters=1))


def test_delta_search_other_regime():
    cert = delta_search(PowerLaw(10), ProblemParams(4, 3), eps=1.0)
    assert cert.passed


def test_zero_nonlinearity_passes():
    assert delta_search(Zero(1.0), P32).passed


def test_trajectory_rate_p2():
    rows = delta_trajectory(PowerLaw(4), P32, [2.0 ** -k for k in range(4)], eps=1.0)
    sups = [r["sup_u"] for r in rows]
    assert all(a > b for a, b in zip(sups, sups[1:]))
    ratios = [r["sup_u"] / r["delta"] ** 2 for r in rows]
    assert max(ratios) / min(ratios) < 1.01


def test_search_spec_validation():
    with pytest.raises(InvalidInput):
        SearchSpec(shrink=1.0)


def test_forcing_of_barrier_solves_consistently():
    bp = BarrierParams(1.0, 1.0, P32)
    F = forcing_function(PowerLaw(4), bp)
    u = solve_radial(F, P32, RadialGrid.default())
    assert residual_check(u, F, P32) < 1e-4
