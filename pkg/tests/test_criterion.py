import math

import numpy as np
import pytest

from quasilab.core import Custom, PowerLaw, PowerLog, ProblemParams, Regularized, Tabulated, Zero
from quasilab.criterion import (classify_criterion, critical_exponent, criterion_integral,
                                regularize, CriterionReport)
from quasilab.errors import UnsupportedRegime


def test_critical_exponent_values():
    assert critical_exponent(ProblemParams(3, 2)) == 3
    assert critical_exponent(ProblemParams(5, 2)) == pytest.approx(5 / 3)
    assert critical_exponent(ProblemParams(4, 3)) == 8
    with pytest.raises(UnsupportedRegime):
        critical_exponent(ProblemParams(2, 2))


@pytest.mark.parametrize("q", [2.0, 3.0])
def test_power_at_or_below_sigma_diverges(q):
    assert classify_criterion(PowerLaw(q), ProblemParams(3, 2)).verdict == "diverges"
    assert criterion_integral(PowerLaw(q), ProblemParams(3, 2)) == math.inf


def test_power_above_sigma_closed_form():
    rep = classify_criterion(PowerLaw(4, eps=0.5), ProblemParams(3, 2))
    assert rep.converges and rep.value == pytest.approx(0.5, rel=1e-15)


def test_powerlog_boundary_cases():
    P = ProblemParams(3, 2)
    rep = classify_criterion(PowerLog(3, 2), P)
    # int_0^{1/e} dt / (t |ln t|^2) = 1 / |ln(1/e)| = 1
    assert rep.converges and rep.value == pytest.approx(1.0, rel=1e-14)
    assert classify_criterion(PowerLog(3, 1), P).verdict == "diverges"
    assert classify_criterion(PowerLog(3, 0.5), P).verdict == "diverges"


def test_powerlog_above_sigma_numeric_matches_oracle():
    from scipy.integrate import quad as scipy_quad
    P = ProblemParams(3, 2)
    rep = classify_criterion(PowerLog(4, 1), P)
    oracle = scipy_quad(lambda t: t ** 4 / abs(math.log(t)) * t ** -4, 0, math.exp(-1),
                        epsabs=0, epsrel=1e-12, limit=200)[0]
    assert rep.value == pytest.approx(oracle, rel=1e-9)


def test_zero_and_vanishing_table():
    P = ProblemParams(3, 2)
    assert classify_criterion(Zero(), P).value == 0.0
    tab = Tabulated([0, 0.5, 1.0], [0, 0, 1.0])
    rep = classify_criterion(tab, P)
    # f = 2(t - 1/2) on [1/2, 1]: int 2(t - 1/2) t^-4 dt
    exact = 2 * ((0.5 ** -2 - 1) / 2 - 0.5 * (0.5 ** -3 - 1) / 3)
    assert rep.converges and rep.value == pytest.approx(exact, rel=1e-10)


def test_custom_numeric_classification():
    P = ProblemParams(3, 2)
    assert classify_criterion(Custom(lambda t: t ** 5), P).converges
    assert classify_criterion(Custom(lambda t: t ** 2), P).verdict == "diverges"


def test_custom_near_sigma_is_inconclusive():
    P = ProblemParams(3, 2)
    # t^3 / |ln t| diverges, but its dyadic slope sits inside the band around sigma
    f = Custom(lambda t: np.where(t > 0, t ** 3 / np.abs(np.log(np.maximum(t, 1e-300))), 0.0),
               eps=math.exp(-1))
    assert classify_criterion(f, P).verdict == "inconclusive"


def test_regularization_preserves_verdict():
    P = ProblemParams(3, 2)
    for f in (PowerLaw(4), PowerLaw(2), PowerLog(3, 2), Zero()):
        base = classify_criterion(f, P).verdict
        assert classify_criterion(regularize(f, P), P).verdict == base
    rf = regularize(PowerLaw(4), P)
    assert isinstance(rf, Regularized) and regularize(rf, P) is rf
    t = np.linspace(1e-3, 1, 50)
    assert np.all(rf(t) > 0)


def test_regularized_value_is_larger():
    P = ProblemParams(3, 2)
    f = PowerLaw(5)
    assert classify_criterion(regularize(f, P), P).value >= classify_criterion(f, P).value


def test_report_round_trip():
    rep = classify_criterion(PowerLog(3, 2), ProblemParams(3, 2))
    assert CriterionReport.from_dict(rep.as_dict()) == rep
