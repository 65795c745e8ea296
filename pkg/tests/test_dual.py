"""
Dual objective, its optimizer and the closed-form regimes
"""
import math

import numpy as np
import pytest

from trcbound import (DecoderSpec, DualConfig, DualParams, beta_threshold, critical_rates,
                      dual_objective, e1, expurgated_ex, expurgated_exponent, gallager_e0,
                      high_rate_bound, inner_sum_log, mutual_information,
                      optimize_dual, regime_bound, sphere_packing_exponent)
from trcbound.core.dual import _candidates, _LambdaGrid, _profile, _refine
from trcbound.core.errors import DomainError, UnsupportedOperationError
from trcbound.core.kernels import collective_factor_log
from trcbound.core.schemas import RegimeHint, RhoCap
from trcbound.core.utils import central_difference

E0_ONE_BSC = -math.log(0.8)
EX_ZERO_BSC = 0.2554128


def _regime_three(rho: float, lam: float) -> DualParams:
    return DualParams(sigma=rho / (1 + rho), tau=(1 - rho) / (1 + rho),
                      lam=lam, theta=0.0, zeta=1.0)


def test_inner_sum_trivial_parameters(bsc, matched):
    """
    sigma = tau = 0 leaves sum_y W(y|x) = 1
    """
    params = DualParams(sigma=0.0, tau=0.0, lam=1.0, theta=0.0, zeta=1.0)
    for x in range(2):
        for x_prime in range(2):
            assert inner_sum_log(bsc, matched, x, x_prime, params) == pytest.approx(0.0, abs=1e-15)


def test_inner_sum_bhattacharyya(bsc, matched):
    params = DualParams(sigma=0.5, tau=0.0, lam=1.0, theta=0.0, zeta=1.0)
    assert inner_sum_log(bsc, matched, 0, 1, params) == pytest.approx(math.log(0.6), abs=1e-12)
    assert inner_sum_log(bsc, matched, 1, 0, params) == pytest.approx(math.log(0.6), abs=1e-12)


def test_inner_sum_same_symbol(bsc, matched):
    params = DualParams(sigma=0.7, tau=0.0, lam=2.0, theta=0.0, zeta=1.0)
    assert inner_sum_log(bsc, matched, 1, 1, params) == pytest.approx(0.0, abs=1e-15)


def test_inner_sum_zero_metric(zchannel, matched):
    """
    W(1|0) = 0 drops the term instead of producing nan
    """
    params = DualParams(sigma=0.5, tau=0.5, lam=1.0, theta=0.0, zeta=1.0)
    value = inner_sum_log(zchannel, matched, 0, 1, params)
    assert math.isfinite(value)


def test_dual_objective_reduces_to_e0(bsc, matched):
    params = DualParams(sigma=0.5, tau=0.0, lam=1.0, theta=0.0, zeta=1.0)
    assert dual_objective(bsc, matched, params, 0.0) == pytest.approx(E0_ONE_BSC, abs=1e-12)


def test_dual_objective_trivial_parameters(bsc, matched):
    params = DualParams(sigma=0.0, tau=0.0, lam=3.0, theta=0.0, zeta=1.0)
    for rate in (0.0, 0.1, 0.4):
        assert dual_objective(bsc, matched, params, rate) == pytest.approx(-rate, abs=1e-12)


def test_dual_objective_regime_three_at_rho_one(bsc, matched):
    params = _regime_three(1.0, 2.0)
    assert dual_objective(bsc, matched, params, 0.1) == pytest.approx(E0_ONE_BSC - 0.1, abs=1e-12)


def test_dual_objective_regime_three_is_e1(bsc, zchannel, matched):
    """
    theta = 0, zeta = 1 with the regime-three (sigma, tau) gives
    E1(rho, lambda) - (1 - lambda tau) R for any lambda
    """
    for model in (bsc, zchannel):
        for rho, lam, rate in ((0.5, 0.8, 0.1), (0.2, 3.0, 0.05), (0.9, 1.9, 0.0)):
            params = _regime_three(rho, lam)
            expected = e1(model, rho, lam) - (1 - lam * params.tau) * rate
            assert dual_objective(model, matched, params, rate) == pytest.approx(expected, abs=1e-12)


def test_dual_objective_regime_one(bsc, matched):
    """
    sigma = 1/2, tau = 0, zeta = 1 + theta = rho gives E_x(rho) - (2 rho - 1) R
    """
    rho, rate = 3.0, 0.02
    params = DualParams(sigma=0.5, tau=0.0, lam=1.0, theta=rho - 1, zeta=rho)
    expected = expurgated_ex(bsc, rho) - (2 * rho - 1) * rate
    assert dual_objective(bsc, matched, params, rate) == pytest.approx(expected, abs=1e-12)


def test_dual_objective_zero_rate_limit(bsc, matched):
    params = DualParams(sigma=0.5, tau=0.0, lam=1.0, theta=math.inf, zeta=math.inf)
    assert dual_objective(bsc, matched, params, 0.0) == pytest.approx(EX_ZERO_BSC, abs=1e-7)
    assert dual_objective(bsc, matched, params, 0.1) == -math.inf


def test_dual_objective_negative_rate(bsc, matched):
    params = DualParams(sigma=0.5, tau=0.0, lam=1.0, theta=0.0, zeta=1.0)
    with pytest.raises(DomainError):
        dual_objective(bsc, matched, params, -0.1)


def test_dual_params_feasibility():
    params = DualParams(sigma=0.4, tau=0.3, lam=1.0, theta=1.0, zeta=2.0)
    assert params.is_feasible()
    assert params.is_feasible(0.7)
    assert not params.is_feasible(0.6)

    violations = DualParams(sigma=0.1, tau=0.0, lam=1.0, theta=2.0, zeta=2.5).violations()
    assert len(violations) == 1
    assert 'zeta' in violations[0]


def test_e1_stationary_point(bsc):
    """
    E1(rho, 1 + rho) = E0(rho), and at rho = 1 lambda drops out
    """
    for rho in np.arange(1, 11) / 10:
        assert e1(bsc, rho, 1 + rho) == pytest.approx(gallager_e0(bsc, rho), abs=1e-12)
    for lam in (0.3, 2.0, 50.0):
        assert e1(bsc, 1.0, lam) == pytest.approx(E0_ONE_BSC, abs=1e-12)


def test_e1_minimized_at_one_plus_rho(bsc):
    """
    With the rate term at R = E0'(rho) the lambda profile bottoms out at 1 + rho
    """
    rate = central_difference(lambda r: gallager_e0(bsc, r), 0.5)
    lams = np.linspace(0.5, 3.0, 251)
    values = [e1(bsc, 0.5, lam) - (1 - lam / 3) * rate for lam in lams]
    assert lams[int(np.argmin(values))] == pytest.approx(1.5, abs=0.011)


def test_e1_domain(bsc):
    with pytest.raises(DomainError):
        e1(bsc, 0.0, 1.0)
    with pytest.raises(DomainError):
        e1(bsc, 0.5, 0.0)


def test_high_rate_bound(bsc):
    """
    Never above E0(rho) - rho R, equal when R = E0'(rho)
    """
    for rho in (0.2, 0.5, 0.8):
        for rate in (0.05, 0.2):
            assert high_rate_bound(bsc, rho, rate) <= gallager_e0(bsc, rho) - rho * rate + 1e-10

        rate = central_difference(lambda r: gallager_e0(bsc, r), rho)
        assert high_rate_bound(bsc, rho, rate) == pytest.approx(
            gallager_e0(bsc, rho) - rho * rate, abs=1e-8)


def test_high_rate_bound_stationary_slope(bsc):
    """
    On a symmetric channel E0'(rho) = -d/dlambda C(y, lambda) at 1 + rho
    """
    rho = 0.4
    slope = central_difference(lambda lam: collective_factor_log(bsc, bsc.w, 0, lam), 1 + rho)
    e0_slope = central_difference(lambda r: gallager_e0(bsc, r), rho)
    assert -slope == pytest.approx(e0_slope, abs=1e-7)


def test_regime_bound_zero_rate(bsc, matched):
    bound = regime_bound(bsc, 0.0, matched)
    assert bound.value == pytest.approx(EX_ZERO_BSC, abs=1e-7)
    assert bound.label is RegimeHint.LOW
    assert bound.params.sigma == 0.5
    assert bound.params.zeta == math.inf


def test_regime_bound_moderate(bsc):
    rates = critical_rates(bsc)
    rate = 0.5 * (rates.r_c1 + rates.r_c2)
    bound = regime_bound(bsc, rate)
    assert bound.value == pytest.approx(E0_ONE_BSC - rate, abs=1e-9)
    assert bound.label is RegimeHint.MODERATE
    assert (bound.params.sigma, bound.params.tau, bound.params.theta, bound.params.zeta) == (
        0.5, 0.0, 0.0, 1.0)


def test_regime_bound_high(bsc):
    rates = critical_rates(bsc)
    rate = 0.5 * (rates.r_c2 + mutual_information(bsc))
    bound = regime_bound(bsc, rate)
    assert bound.label is RegimeHint.HIGH
    assert bound.value == pytest.approx(sphere_packing_exponent(bsc, rate), abs=1e-9)
    # sigma + tau = 1/(1 + rho) and lambda = 1 + rho
    assert beta_threshold(bound.params.sigma, bound.params.tau) == pytest.approx(
        1 / bound.params.lam)


def test_regime_bound_low_dominates(bsc):
    rate = 0.25 * critical_rates(bsc).r_c1
    bound = regime_bound(bsc, rate)
    assert bound.label is RegimeHint.LOW
    assert bound.value == pytest.approx(expurgated_exponent(bsc, 2 * rate) + rate, abs=1e-12)
    assert bound.value >= E0_ONE_BSC - rate


def test_regime_bound_mismatched(bsc):
    decoder = DecoderSpec(w_tilde=[[0.8, 0.2], [0.2, 0.8]])
    with pytest.raises(UnsupportedOperationError) as excinfo:
        regime_bound(bsc, 0.1, decoder)

    assert 'matched' in str(excinfo.value)

    with pytest.raises(UnsupportedOperationError):
        regime_bound(bsc, 0.1, DecoderSpec(beta=2.0))


def test_beta_threshold():
    assert beta_threshold(0.5, 0.0) == 0.5
    rho = 1.0
    assert beta_threshold(rho / (1 + rho), (1 - rho) / (1 + rho)) == pytest.approx(0.5)
    assert beta_threshold(0.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        beta_threshold(math.inf, 0.0)


def test_optimize_dual_zero_rate(bsc, matched, light_config):
    """
    The regime-one parameters reach E_ex(0) through the zero-rate limit
    """
    result = optimize_dual(bsc, matched, 0.0, light_config)
    assert result.value >= EX_ZERO_BSC - 1e-3
    assert result.value <= sphere_packing_exponent(bsc, 0.0) + 1e-6
    assert result.value == pytest.approx(
        dual_objective(bsc, matched, result.params, 0.0), abs=1e-10)


def test_optimize_dual_useless_channel(useless, matched, light_config):
    result = optimize_dual(useless, matched, 0.0, light_config)
    assert result.value == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize('fraction', [0.3, 0.6, 1.0])
def test_optimize_dual_dominates_regimes(bsc, matched, light_config, fraction):
    """
    The regime parameters lie in the searched set, sphere packing caps the value
    """
    rate = fraction * mutual_information(bsc)
    result = optimize_dual(bsc, matched, rate, light_config)

    assert result.value >= regime_bound(bsc, rate).value - 5e-3
    assert result.value <= sphere_packing_exponent(bsc, rate) + 1e-6
    assert result.value == pytest.approx(
        dual_objective(bsc, matched, result.params, rate), abs=1e-10)
    assert result.params.is_feasible()


def test_optimize_dual_at_capacity(bsc, matched, light_config):
    result = optimize_dual(bsc, matched, mutual_information(bsc), light_config)
    assert abs(result.value) <= 1e-3
    assert result.regime_hint is RegimeHint.HIGH


def test_optimize_dual_beta_monotone(bsc, light_config):
    """
    Larger beta only enlarges the (sigma, tau) region; beta = 1/2 already
    holds the low-rate achiever (1/2, 0)
    """
    rate = 0.02
    values = [optimize_dual(bsc, DecoderSpec(beta=beta), rate, light_config).value
              for beta in (0.25, 0.5, 1.0, 2.0, math.inf)]
    for smaller, larger in zip(values, values[1:]):
        assert larger >= smaller - 1e-4
    for value in values[1:]:
        assert value == pytest.approx(values[-1], abs=1e-4)


def test_optimize_dual_finite_beta_feasible(bsc, light_config):
    result = optimize_dual(bsc, DecoderSpec(beta=0.25), 0.05, light_config)
    assert result.params.is_feasible(0.25)


def test_optimize_dual_deterministic(zchannel, matched, light_config):
    first = optimize_dual(zchannel, matched, 0.1, light_config)
    second = optimize_dual(zchannel, matched, 0.1, light_config.copy(update={'n_jobs': 3}))
    assert first.value == second.value
    assert first.params == second.params


def test_optimize_dual_negative_rate(bsc, matched):
    with pytest.raises(DomainError):
        optimize_dual(bsc, matched, -0.1)


def test_dual_result_to_dict(bsc, matched, light_config):
    result = optimize_dual(bsc, matched, 0.0, light_config)
    output = result.to_dict()
    assert set(output) >= {'value', 'sigma', 'tau', 'lambda', 'theta', 'zeta', 'regime_hint'}
    assert output['regime_hint'] == result.regime_hint.value


@pytest.mark.parametrize('fraction', [0.25, 0.5, 0.75, 1.0])
def test_optimize_dual_below_sphere_packing_z_channel(zchannel, matched, light_config, fraction):
    rate = fraction * mutual_information(zchannel)
    result = optimize_dual(zchannel, matched, rate, light_config)
    assert result.value <= sphere_packing_exponent(zchannel, rate) + 1e-6


def test_optimize_dual_matches_exhaustive_search(bsc, matched, light_config):
    """
    Every seed and coarse candidate fully profiled and refined never beats
    the optimizer, which drops candidates early
    """
    rate = 0.1
    grid = _LambdaGrid(bsc, matched, light_config)
    seeds, coarse = _candidates(bsc, matched, rate, light_config)
    exhaustive = max(
        _refine(bsc, matched, _profile(bsc, matched, sigma, tau, rate, light_config, grid),
                rate, light_config, grid).value
        for sigma, tau in seeds + coarse)
    assert optimize_dual(bsc, matched, rate, light_config).value >= exhaustive - 1e-12


def test_profile_ruled_out_is_an_upper_bound(bsc, matched, light_config):
    rate = 0.1
    grid = _LambdaGrid(bsc, matched, light_config)
    sigma, tau = 1 / 3, 1 / 3
    full = _refine(bsc, matched, _profile(bsc, matched, sigma, tau, rate, light_config, grid),
                   rate, light_config, grid)
    assert full.diagnostics.refined
    assert not full.diagnostics.ruled_out

    screened = _profile(bsc, matched, sigma, tau, rate, light_config, grid,
                        incumbent=full.value + 1.0, hint=full.params.lam)
    assert screened.diagnostics.ruled_out
    assert full.value <= screened.value < full.value + 1.0
    assert _refine(bsc, matched, screened, rate, light_config, grid) is screened


def test_profile_without_tau_needs_no_refinement(bsc, matched, light_config):
    grid = _LambdaGrid(bsc, matched, light_config)
    result = _profile(bsc, matched, 0.5, 0.0, 0.1, light_config, grid, incumbent=10.0)
    assert result.diagnostics.refined
    assert not result.diagnostics.ruled_out
    assert result.params.lam == 1.0


def test_regime_bound_custom_cap(bsc):
    """
    The expurgated supremum at 2R = 0.002 sits beyond rho = 2
    """
    rate = 0.001
    cap = RhoCap(rho_max=2.0)
    truncated = regime_bound(bsc, rate, cap=cap)
    assert truncated.value == pytest.approx(expurgated_exponent(bsc, 2 * rate, cap) + rate,
                                            abs=1e-12)
    assert truncated.value < regime_bound(bsc, rate).value - 1e-3
    assert truncated.params.zeta <= 2.0


def test_dual_config_rejects_zero_workers():
    with pytest.raises(ValueError) as excinfo:
        DualConfig(n_jobs=0)

    assert 'n_jobs' in str(excinfo.value)
