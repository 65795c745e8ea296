"""
Classical exponent family for a fixed input distribution P:
Gallager E0, the expurgated E_x, the random-coding, sphere-packing and
expurgated exponents, and the two critical rates
"""
import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr

from .errors import DomainError
from .kernels import OPTIMIZER_TOL, collective_log_table, lse
from .schemas import ChannelModel, CriticalRates, RhoCap, RhoSupremum
from .utils import central_difference, golden_section, richardson_derivative

logger = logging.getLogger(__name__)

DERIVATIVE_STEP = 1e-5
CROSS_CHECK_STEP = 1e-3

# points of the linear part of the rho grid on [0, 1]
UNIT_GRID_POINTS = 21


def gallager_e0(model: ChannelModel, rho: float) -> float:
    """
    E0(rho) = -ln sum_y exp{(1+rho) A(y, 1+rho)}
    """
    if rho < 0:
        raise DomainError(f'E0 needs rho >= 0, got {rho}')
    if rho == 0:
        # sum_y sum_x P W = 1 for a valid channel
        return 0.0
    table = collective_log_table(model, model.w, [1 + rho])[0]
    return float(-lse(table))


def _log_bhattacharyya(model: ChannelModel) -> np.ndarray:
    """ln sum_y sqrt(W(y|x) W(y|x')) over the support of P
    """
    log_w = model.log_w[model.support]
    return lse(0.5 * (log_w[:, None, :] + log_w[None, :, :]), axis=2)


def bhattacharyya_matrix(model: ChannelModel) -> np.ndarray:
    """
    Pairwise Bhattacharyya kernel B(x, x') = sum_y sqrt(W(y|x) W(y|x'))
    """
    return np.sqrt(model.w) @ np.sqrt(model.w).T


def _pair_log_weights(model: ChannelModel) -> np.ndarray:
    log_p = model.log_p[model.support]
    return log_p[:, None] + log_p[None, :]


def expurgated_ex(model: ChannelModel, rho: float) -> float:
    """
    E_x(rho) = -rho ln sum_{x,x'} P(x)P(x') B(x,x')^(1/rho)

    Defined for every rho > 0, the exponents only use rho >= 1
    """
    if not rho > 0:
        raise DomainError(f'E_x needs rho > 0, got {rho}')
    terms = _pair_log_weights(model) + _log_bhattacharyya(model) / rho
    return float(-rho * lse(terms))


def exponent_at_zero_rate(model: ChannelModel) -> float:
    """
    lim_{rho -> inf} E_x(rho) = -sum_{x,x'} P(x)P(x') ln B(x,x'),
    +inf when some pair in the support has B = 0
    """
    p = model.p[model.support]
    log_b = _log_bhattacharyya(model)
    if np.any(np.isneginf(log_b)):
        return math.inf
    return float(-np.sum(np.outer(p, p) * log_b))


def mutual_information(model: ChannelModel) -> float:
    """
    I(P, W) in nats
    """
    q_y = model.p @ model.w
    per_input = rel_entr(model.w, q_y[None, :]).sum(axis=1)
    mask = model.support
    return float(np.sum(model.p[mask] * per_input[mask]))


def sphere_packing_rate_infinity(model: ChannelModel) -> float:
    """
    R_inf = -ln max_y sum_{x: W(y|x) > 0} P(x), the rate below which
    the sphere-packing exponent is infinite
    """
    reach = (model.p[:, None] * (model.w > 0)).sum(axis=0)
    return float(-np.log(reach.max()))


def _rho_grid(lower: float, upper: float, cap: RhoCap) -> np.ndarray:
    parts = []
    if lower < 1:
        parts.append(np.linspace(lower, min(1.0, upper), UNIT_GRID_POINTS))
    if upper > 1:
        start = max(1.0, lower)
        decades = math.log10(upper / start)
        points = max(2, math.ceil(decades * cap.grid_points_per_decade) + 1)
        parts.append(np.geomspace(start, upper, points))
    return np.unique(np.concatenate(parts))


def sup_over_rho(objective: Callable[[float], float],
                 lower: float,
                 upper: float,
                 cap: RhoCap,
                 limit_candidates: Sequence[Tuple[float, float]] = ()) -> RhoSupremum:
    """
    sup_{rho in [lower, upper]} objective(rho) for a concave objective:
    log-spaced grid, golden-section refinement around the best grid point,
    then the analytic `limit_candidates` given as (rho, value) pairs
    """
    grid = _rho_grid(lower, upper, cap)
    values = np.array([objective(rho) for rho in grid])
    best = int(np.argmax(values))

    at_cap = best == len(grid) - 1 and len(grid) > 1 and values[-1] > values[-2]

    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, len(grid) - 1)]
    refined = golden_section(objective, left, right,
                             tol=OPTIMIZER_TOL * 1e-2, maximize=True)

    rho, value = float(grid[best]), float(values[best])
    if refined.value > value:
        rho, value = refined.x, refined.value

    for limit_rho, limit_value in limit_candidates:
        if limit_value > value:
            rho, value, at_cap = limit_rho, limit_value, False

    return RhoSupremum(value=value, rho=rho, at_cap=at_cap)


def random_coding_achiever(model: ChannelModel, rate: float) -> RhoSupremum:
    """
    E_r(R) = sup_{0 <= rho <= 1} [E0(rho) - rho R] with its achiever
    """
    return sup_over_rho(lambda rho: gallager_e0(model, rho) - rho * rate,
                        0.0, 1.0, RhoCap())


def random_coding_exponent(model: ChannelModel, rate: float) -> float:
    return random_coding_achiever(model, rate).value


def sphere_packing_achiever(model: ChannelModel,
                            rate: float,
                            cap: Optional[RhoCap] = None) -> RhoSupremum:
    """
    E_sp(R) = sup_{rho >= 0} [E0(rho) - rho R], truncated at cap.rho_max
    """
    cap = cap or RhoCap()

    if rate < sphere_packing_rate_infinity(model) - OPTIMIZER_TOL:
        return RhoSupremum(value=math.inf, rho=math.inf, at_cap=True)

    limits = []
    if rate == 0:
        # rho -> inf: [sum_x P W^(1/(1+rho))]^(1+rho) -> exp(sum_x P ln W)
        limit = collective_log_table(model, model.w, [math.inf])[0]
        limits.append((math.inf, float(-lse(limit))))

    result = sup_over_rho(lambda rho: gallager_e0(model, rho) - rho * rate,
                          0.0, cap.rho_max, cap, limits)
    if result.at_cap:
        logger.warning('sphere-packing supremum truncated at rho_max=%g (R=%g)',
                       cap.rho_max, rate)
    return result


def sphere_packing_exponent(model: ChannelModel,
                            rate: float,
                            cap: Optional[RhoCap] = None) -> float:
    return sphere_packing_achiever(model, rate, cap).value


def expurgated_achiever(model: ChannelModel,
                        rate: float,
                        cap: Optional[RhoCap] = None) -> RhoSupremum:
    """
    E_ex(R) = sup_{rho >= 1} [E_x(rho) - rho R], truncated at cap.rho_max,
    with the rho -> inf limit as a candidate at R = 0
    """
    cap = cap or RhoCap()

    limits = []
    if rate == 0:
        limits.append((math.inf, exponent_at_zero_rate(model)))

    result = sup_over_rho(lambda rho: expurgated_ex(model, rho) - rho * rate,
                          1.0, cap.rho_max, cap, limits)

    if result.at_cap:
        # E_x(rho) grows like rho * r_x when some Bhattacharyya pair is zero
        log_b = _log_bhattacharyya(model)
        weights = np.exp(_pair_log_weights(model))
        positive = weights[np.isfinite(log_b)].sum()
        r_x = -math.log(positive) if positive > 0 else math.inf
        if rate < r_x - OPTIMIZER_TOL:
            return RhoSupremum(value=math.inf, rho=math.inf, at_cap=True)
        logger.warning('expurgated supremum truncated at rho_max=%g (R=%g)',
                       cap.rho_max, rate)
    return result


def expurgated_exponent(model: ChannelModel,
                        rate: float,
                        cap: Optional[RhoCap] = None) -> float:
    return expurgated_achiever(model, rate, cap).value


def critical_rates(model: ChannelModel, cap: Optional[RhoCap] = None) -> CriticalRates:
    """
    R_c1 = E_x'(1) / 2 and R_c2 = E0'(1) by central differences.

    Both derivatives sit at rho = 1, which every `cap` admits, so the cap
    only has to be valid
    """
    cap = cap or RhoCap()
    logger.debug('critical rates with rho_max=%g', cap.rho_max)

    def e_x(rho):
        return expurgated_ex(model, rho)

    def e_0(rho):
        return gallager_e0(model, rho)

    r_c1 = central_difference(e_x, 1.0, DERIVATIVE_STEP) / 2
    r_c2 = central_difference(e_0, 1.0, DERIVATIVE_STEP)

    for name, value, func, scale in (('R_c1', r_c1, e_x, 0.5), ('R_c2', r_c2, e_0, 1.0)):
        check = scale * richardson_derivative(func, 1.0, CROSS_CHECK_STEP)
        if abs(check - value) > 1e-6:
            logger.warning('%s finite differences disagree: %.12g vs %.12g',
                           name, value, check)

    return CriticalRates(r_c1=r_c1, r_c2=r_c2)
