"""
Classical exponents and critical rates
"""
import math

import numpy as np
import pytest

from trcbound import (bhattacharyya_matrix, critical_rates, expurgated_ex,
                      expurgated_exponent, exponent_at_zero_rate, gallager_e0,
                      mutual_information, random_coding_exponent, random_channel,
                      sphere_packing_exponent, sphere_packing_rate_infinity)
from trcbound.core.classical import (random_coding_achiever,
                                     sphere_packing_achiever)
from trcbound.core.errors import DomainError
from trcbound.core.schemas import RhoCap

E0_ONE_BSC = -math.log(0.8)
EX_ZERO_BSC = -0.5 * math.log(0.6)


def test_e0_closed_forms(bsc, useless):
    """
    E0(1) on BSC(0.1) is -ln(0.5 (1 + 2 sqrt(0.09))) = -ln 0.8
    """
    assert gallager_e0(bsc, 1.0) == pytest.approx(E0_ONE_BSC, abs=1e-10)
    assert gallager_e0(bsc, 0.0) == 0.0
    for rho in (0.3, 1.0, 7.0):
        assert gallager_e0(useless, rho) == pytest.approx(0.0, abs=1e-12)


def test_e0_negative_rho(bsc):
    with pytest.raises(DomainError):
        gallager_e0(bsc, -0.1)


def test_expurgated_ex_closed_forms(bsc, useless, identity):
    assert expurgated_ex(bsc, 1.0) == pytest.approx(E0_ONE_BSC, abs=1e-10)
    assert expurgated_ex(identity, 1.0) == pytest.approx(math.log(2), abs=1e-12)
    for rho in (1.0, 4.0):
        assert expurgated_ex(useless, rho) == pytest.approx(0.0, abs=1e-12)


def test_expurgated_matches_gallager_at_one():
    """
    E_x(1) = E0(1) for every channel and input distribution
    """
    rng = np.random.default_rng(1)
    for _ in range(20):
        inputs, outputs = rng.integers(2, 5, size=2)
        model = random_channel(rng, int(inputs), int(outputs))
        assert expurgated_ex(model, 1.0) == pytest.approx(gallager_e0(model, 1.0), abs=1e-10)


def test_bhattacharyya_matrix(bsc):
    kernel = bhattacharyya_matrix(bsc)
    assert kernel[0, 0] == pytest.approx(1.0)
    assert kernel[0, 1] == pytest.approx(0.6)
    assert np.allclose(kernel, kernel.T)


def test_mutual_information(bsc, useless, identity):
    binary_entropy = -(0.1 * math.log(0.1) + 0.9 * math.log(0.9))
    assert mutual_information(bsc) == pytest.approx(math.log(2) - binary_entropy, abs=1e-12)
    assert mutual_information(bsc) == pytest.approx(0.3680642, abs=1e-7)
    assert mutual_information(useless) == pytest.approx(0.0, abs=1e-15)
    assert mutual_information(identity) == pytest.approx(math.log(2), abs=1e-12)


def test_exponents_vanish_above_capacity(bsc):
    """
    R >= I(P, W): both suprema sit at rho = 0
    """
    capacity = mutual_information(bsc)
    for rate in (capacity, capacity + 0.05):
        random_coding = random_coding_achiever(bsc, rate)
        assert random_coding.value == pytest.approx(0.0, abs=1e-12)
        assert random_coding.rho == 0.0
        assert sphere_packing_exponent(bsc, rate) == pytest.approx(0.0, abs=1e-12)


def test_random_coding_below_critical_rate(bsc):
    """
    Below R_c2 the random-coding exponent is the straight line E0(1) - R
    """
    rates = critical_rates(bsc)
    rate = rates.r_c2 / 2
    assert random_coding_exponent(bsc, rate) == pytest.approx(E0_ONE_BSC - rate, abs=1e-9)


def test_random_coding_equals_sphere_packing_above_critical_rate(bsc):
    rates = critical_rates(bsc)
    rate = 0.5 * (rates.r_c2 + mutual_information(bsc))
    assert random_coding_exponent(bsc, rate) == pytest.approx(
        sphere_packing_exponent(bsc, rate), abs=1e-9)


def test_sphere_packing_zero_rate_limit(bsc):
    """
    At R = 0 the rho -> inf candidate -ln sum_y exp(sum_x P ln W) wins
    """
    result = sphere_packing_achiever(bsc, 0.0)
    expected = -math.log(2 * math.exp(0.5 * math.log(0.9) + 0.5 * math.log(0.1)))
    assert result.value == pytest.approx(expected, abs=1e-12)
    assert result.rho == math.inf


def test_sphere_packing_infinite_below_rate_infinity(identity, zchannel):
    assert sphere_packing_rate_infinity(identity) == pytest.approx(math.log(2))
    assert sphere_packing_exponent(identity, 0.3) == math.inf

    assert sphere_packing_rate_infinity(zchannel) == pytest.approx(0.0, abs=1e-15)
    assert math.isfinite(sphere_packing_exponent(zchannel, 0.1))


def test_expurgated_exponent_at_zero_rate(bsc, useless):
    """
    The rho -> inf limit -sum P P ln B = -0.5 ln 0.6 on BSC(0.1)
    """
    assert exponent_at_zero_rate(bsc) == pytest.approx(EX_ZERO_BSC, abs=1e-12)
    assert expurgated_exponent(bsc, 0.0) == pytest.approx(0.2554128, abs=1e-7)
    assert expurgated_ex(bsc, 1e4) == pytest.approx(EX_ZERO_BSC, abs=1e-4)
    assert expurgated_exponent(useless, 0.0) == pytest.approx(0.0, abs=1e-12)
    # E_x is identically 0, the supremum over rho >= 1 sits at rho = 1
    assert expurgated_exponent(useless, 0.2) == pytest.approx(-0.2, abs=1e-12)


def test_expurgated_exponent_infinite_with_orthogonal_inputs(identity):
    """
    Zero Bhattacharyya pairs make E_x grow linearly in rho
    """
    assert exponent_at_zero_rate(identity) == math.inf
    assert expurgated_exponent(identity, 0.0) == math.inf
    assert expurgated_exponent(identity, 0.3) == math.inf


def test_expurgated_exponent_dominates_random_coding_at_low_rate(bsc):
    for rate in (0.0, 0.01, 0.03):
        assert expurgated_exponent(bsc, rate) >= random_coding_exponent(bsc, rate) - 1e-12


def test_supremum_stable_under_finer_rho_grid(bsc):
    coarse = expurgated_exponent(bsc, 0.02, RhoCap(grid_points_per_decade=20))
    fine = expurgated_exponent(bsc, 0.02, RhoCap(grid_points_per_decade=40))
    assert coarse == pytest.approx(fine, abs=1e-9)


def test_critical_rates(bsc, useless, identity):
    """
    R_c1 = E_x'(1)/2 and R_c2 = E0'(1), checked against a secant estimate
    """
    rates = critical_rates(bsc)
    assert 0 < rates.r_c1 < rates.r_c2 < math.log(2)

    secant = (gallager_e0(bsc, 1.001) - gallager_e0(bsc, 0.999)) / 0.002
    assert rates.r_c2 == pytest.approx(secant, abs=1e-6)

    assert critical_rates(useless) == pytest.approx((0.0, 0.0), abs=1e-9)
    assert critical_rates(identity).r_c2 == pytest.approx(math.log(2), abs=1e-6)


def test_critical_rates_with_custom_cap(bsc):
    assert critical_rates(bsc, RhoCap(rho_max=2.0)) == pytest.approx(
        tuple(critical_rates(bsc)), abs=1e-9)


def _midpoint_gaps(values):
    values = np.asarray(values)
    return 0.5 * (values[:-2] + values[2:]) - values[1:-1]


def test_e0_concave_nondecreasing(bsc, zchannel):
    rhos = np.linspace(0.0, 4.0, 41)
    for model in (bsc, zchannel):
        values = [gallager_e0(model, rho) for rho in rhos]
        assert np.all(np.diff(values) >= -1e-12)
        assert np.all(_midpoint_gaps(values) <= 1e-12)


@pytest.mark.parametrize('exponent, lower', [
    (random_coding_exponent, 0.0),
    (sphere_packing_exponent, 0.05),
    (expurgated_exponent, 0.0),
])
def test_exponent_nonincreasing_convex(bsc, exponent, lower):
    rates = np.linspace(lower, mutual_information(bsc), 15)
    values = [exponent(bsc, rate) for rate in rates]
    assert np.all(np.diff(values) <= 1e-9)
    assert np.all(_midpoint_gaps(values) >= -1e-8)


def test_random_coding_equals_sphere_packing_from_critical_rate(bsc):
    rates = critical_rates(bsc)
    for rate in np.linspace(rates.r_c2, mutual_information(bsc), 8):
        assert random_coding_exponent(bsc, rate) == pytest.approx(
            sphere_packing_exponent(bsc, rate), abs=1e-8)
