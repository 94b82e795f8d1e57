import math

import numpy as np
import pytest

from quasilab.barrier import (BarrierParams, barrier_profile, dual_norm_estimate, dyadic_sum,
                              forcing_function, moment_report, radial_moment)
from quasilab.core import Forcing, PowerLaw, PowerLog, ProblemParams, RadialGrid, Tabulated, Zero
from quasilab.errors import DivergentMoment, InvalidInput, UnsupportedRegime


def test_barrier_values():
    bp = BarrierParams(1.0, 1.0, ProblemParams(3, 2))
    assert bp.barrier(0.0) == 1.0 and bp.barrier(1.0) == 0.5
    assert bp.radius_of_level(0.25) == pytest.approx(3.0)
    prof = barrier_profile(bp, RadialGrid.uniform(4, 4))
    assert prof.is_nonincreasing()


def test_barrier_validation():
    with pytest.raises(InvalidInput):
        BarrierParams(0.0, 1.0, ProblemParams(3, 2))
    with pytest.raises(UnsupportedRegime):
        BarrierParams(1.0, 1.0, ProblemParams(2, 2))


def test_forcing_power_law():
    bp = BarrierParams(1.0, 2.0, ProblemParams(3, 2))
    F = forcing_function(PowerLaw(4), bp)
    assert F(2.0) == pytest.approx(1 / 16)
    assert F.tail_exponent == 4 and F.scale == 2.0


def test_forcing_needs_f_defined_up_to_eps():
    with pytest.raises(InvalidInput):
        forcing_function(PowerLaw(4, eps=0.5), BarrierParams(1.0, 1.0, ProblemParams(3, 2)))


def test_forcing_from_vanishing_table_has_compact_support():
    bp = BarrierParams(1.0, 1.0, ProblemParams(3, 2))
    F = forcing_function(Tabulated([0, 0.5, 1], [0, 0, 1]), bp)
    assert F.support == pytest.approx(1.0)
    assert forcing_function(Zero(), bp).is_zero


def test_radial_moment_closed_form():
    # int r^2 (1+r)^-4 dr = 1/3
    assert radial_moment(Forcing.power_decay(4), 2.0) == pytest.approx(1 / 3, rel=1e-10)
    assert radial_moment(Forcing.indicator(1.0), 2.0) == pytest.approx(1 / 3, rel=1e-14)
    with pytest.raises(DivergentMoment):
        radial_moment(Forcing.power_decay(3), 2.0)


@pytest.mark.parametrize("n,p,q", [(3, 2, 4), (4, 3, 10), (5, 2, 3)])
def test_mass_identity_and_bound(n, p, q):
    P = ProblemParams(n, p)
    rep = moment_report(PowerLaw(q), BarrierParams(1.0, 1.0, P))
    assert rep.identity_gap < 1e-8
    assert rep.cov_lhs <= rep.cov_bound
    assert rep.all_finite and not rep.dyadic_truncated


def test_moment_report_refuses_divergent():
    with pytest.raises(DivergentMoment):
        moment_report(PowerLaw(3), BarrierParams(1.0, 1.0, ProblemParams(3, 2)))


def test_delta_scaling():
    P = ProblemParams(3, 2)
    a = moment_report(PowerLaw(4), BarrierParams(1.0, 1.0, P)).cov_lhs
    b = moment_report(PowerLaw(4), BarrierParams(1.0, 0.5, P)).cov_lhs
    assert a / b == pytest.approx(8.0, rel=1e-10)


def test_borderline_log_forcing_is_refused_in_r_form():
    # F ~ r^-3 / ln^2 r: the r-integral converges like 1/ln r, far beyond binary64 range
    with pytest.raises(DivergentMoment):
        radial_moment(forcing_function(PowerLog(3, 2), BarrierParams(math.exp(-1), 1.0,
                                                                      ProblemParams(3, 2))), 2.0)


def test_dyadic_sum_and_dual_norm():
    P = ProblemParams(3, 2)
    F = Forcing.indicator(1.0)
    total, truncated, _ = dyadic_sum(F, P)
    # sum_{i<=0} 2^{5i} = 32/31
    assert total == pytest.approx(32 / 31, rel=1e-14) and not truncated
    est = dual_norm_estimate(F, P)
    assert est["lebesgue_side"] == pytest.approx(4 * math.pi / 5, rel=1e-12)
    assert est["moment_np"] == pytest.approx(0.4, rel=1e-12)
    assert dual_norm_estimate(Forcing.zero(), P)["dyadic_sum"] == 0.0


def test_moment_report_round_trip():
    from quasilab.barrier import MomentReport
    rep = moment_report(PowerLaw(4), BarrierParams(1.0, 1.0, ProblemParams(3, 2)))
    assert MomentReport.from_dict(rep.as_dict()) == rep
    assert np.isfinite(rep.moment_np)
