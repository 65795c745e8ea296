"""
The five-parameter Lagrange-dual lower bound on the typical-random-code
exponent, its sup-inf-sup optimizer, E1 and the three closed-form regimes
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import joblib
import numpy as np

from .classical import (critical_rates, expurgated_achiever, gallager_e0,
                        random_coding_achiever)
from .errors import DomainError, UnsupportedOperationError
from .kernels import collective_log_table, lse, safe_log
from .schemas import (ChannelModel, DecoderSpec, DualConfig, DualDiagnostics,
                      DualParams, DualResult, RegimeBound, RegimeHint, RhoCap)
from .utils import golden_section, log_grid, warped_grid

logger = logging.getLogger(__name__)

# zoom grid per axis in the (theta, zeta) refinement
ZOOM_POINTS = 9
# relative tolerance of the unimodality diagnostic
UNIMODAL_TOL = 1e-9
# golden-section tolerance on ln(lambda)
LAMBDA_TOL = 1e-8
# every SCREEN_STRIDE-th dense lambda is tried before the whole grid
SCREEN_STRIDE = 8
# (sigma, tau) candidates profiled between two incumbent updates
BATCH = 8


def _scaled(coef: float, values: np.ndarray) -> np.ndarray:
    """coef * values where a zero coefficient contributes exactly 0
    and undefined log-ratios count as ratio 1
    """
    if coef == 0:
        return np.zeros_like(values)
    with np.errstate(invalid='ignore'):
        out = coef * values
    return np.where(np.isnan(out), 0.0, out)


def _inner_sums(model: ChannelModel,
                log_m: np.ndarray,
                sigma: float,
                tau: float,
                collective: Optional[np.ndarray]) -> np.ndarray:
    """
    Inner sums for a precomputed collective table of shape (L, |Y|),
    `collective` is None when tau = 0
    """
    with np.errstate(invalid='ignore'):
        # [x, x', y]
        ratio = log_m[None, :, :] - log_m[:, None, :]
        base = model.log_w[:, None, :] + _scaled(sigma, ratio)

        if tau == 0 or collective is None:
            terms = base[None]
        else:
            # [lambda, x', y]
            competition = log_m[None, :, :] - collective[:, None, :]
            terms = base[None] + _scaled(tau, competition)[:, None, :, :]

        terms = np.where(np.isnan(terms), -np.inf, terms)
        # W(y|x) = 0 drops the term whatever the ratios are
        terms = np.where(model.w[None, :, None, :] > 0, terms, -np.inf)
        return lse(terms, axis=-1)


def inner_sum_table(model: ChannelModel,
                    decoder: DecoderSpec,
                    sigma: float,
                    tau: float,
                    lams: Sequence[float]) -> np.ndarray:
    """
    ln sum_y W(y|x) [W~(y|x')/W~(y|x)]^sigma [W~(y|x')/collective(y,lambda)]^tau
    for every lambda and every pair (x, x'). Shape (len(lams), |X|, |X|)
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    metric = decoder.metric(model)
    collective = None if tau == 0 else collective_log_table(model, metric, lams)
    table = _inner_sums(model, safe_log(metric), sigma, tau, collective)

    if table.shape[0] != lams.size:
        table = np.broadcast_to(table, (lams.size,) + table.shape[1:])
    return table


def inner_sum_log(model: ChannelModel,
                  decoder: DecoderSpec,
                  x: int,
                  x_prime: int,
                  params: DualParams) -> float:
    """
    Log of the innermost sum over y for one pair of input symbols
    """
    table = inner_sum_table(model, decoder, params.sigma, params.tau, [params.lam])
    return float(table[0, x, x_prime])


def _objective_grid(log_p: np.ndarray,
                    table: np.ndarray,
                    lams: np.ndarray,
                    thetas: np.ndarray,
                    zetas: np.ndarray,
                    tau: float,
                    rate: float) -> np.ndarray:
    """
    Dual objective for lambda (L,), theta (L, T) and zeta (L, T, Z)
    with `table` the inner sums (L, S, S) on the support of P
    """
    with np.errstate(invalid='ignore', over='ignore'):
        growth = (1 + thetas)[:, :, None, None]
        # [lambda, theta, x]
        inner = lse(log_p[None, None, None, :] + table[:, None, :, :] / growth, axis=-1)
        scaled = growth / zetas[:, :, :, None] * inner[:, :, None, :]
        outer = lse(log_p + scaled, axis=-1)
        values = -zetas * outer

        if rate != 0:
            if tau == 0:
                competition = np.zeros_like(lams)
            else:
                competition = lams * tau
            coef = zetas + thetas[:, :, None] - competition[:, None, None]
            values = values - coef * rate

    return np.where(np.isnan(values), -np.inf, values)


def _zero_rate_limit(log_p: np.ndarray, table: np.ndarray) -> np.ndarray:
    """
    theta, zeta -> inf at R = 0: -sum_{x,x'} P(x)P(x') inner(x, x'), per lambda
    """
    weights = np.exp(log_p[:, None] + log_p[None, :])
    with np.errstate(invalid='ignore'):
        terms = np.where(weights[None] > 0, weights[None] * table, 0.0)
        values = -terms.sum(axis=(1, 2))
    return np.where(np.isnan(values), -np.inf, values)


def dual_objective(model: ChannelModel,
                   decoder: DecoderSpec,
                   params: DualParams,
                   rate: float) -> float:
    """
    -zeta ln sum_x P(x) [sum_x' P(x') inner(x,x')^(1/(1+theta))]^((1+theta)/zeta)
    - (zeta + theta - lambda tau) R

    `theta = zeta = inf` evaluates the zero-rate limit
    """
    if rate < 0:
        raise DomainError(f'rate must be nonnegative, got {rate}')

    mask = model.support
    log_p = model.log_p[mask]
    table = inner_sum_table(model, decoder, params.sigma, params.tau, [params.lam])
    table = table[:, mask][:, :, mask]

    if math.isinf(params.theta) or math.isinf(params.zeta):
        if rate > 0:
            return -math.inf
        return float(_zero_rate_limit(log_p, table)[0])

    value = _objective_grid(
        log_p, table,
        np.array([params.lam]),
        np.array([[params.theta]]),
        np.array([[[params.zeta]]]),
        params.tau, rate)
    return float(value[0, 0, 0])


def _expspace(lower: np.ndarray, upper: np.ndarray, points: int) -> np.ndarray:
    """Geometric grids between broadcast arrays of endpoints, new last axis
    """
    steps = np.linspace(0.0, 1.0, points)
    lower = np.asarray(lower, dtype=float)[..., None]
    upper = np.asarray(upper, dtype=float)[..., None]
    return lower * (upper / lower) ** steps



class _InnerSup:
    """
    g(lambda) = sup_{theta >= 0, zeta >= 1 + theta} objective for one (sigma, tau)
    """

    def __init__(self,
                 model: ChannelModel,
                 decoder: DecoderSpec,
                 sigma: float,
                 tau: float,
                 rate: float,
                 config: DualConfig):
        self.model = model
        self.sigma = sigma
        self.tau = tau
        self.rate = rate
        self.config = config
        self.metric = decoder.metric(model)
        self.log_m = safe_log(self.metric)
        self.mask = model.support
        self.log_p = model.log_p[self.mask]
        self.evaluations = 0

        self.thetas = np.concatenate(
            [[0.0], log_grid(1e-2, config.theta_cap, max(config.theta_points - 1, 1))])

    def _zetas(self, thetas: np.ndarray) -> np.ndarray:
        lower = 1 + thetas
        upper = np.maximum(self.config.zeta_cap, lower)
        return _expspace(lower, upper, self.config.zeta_points)

    def __call__(self,
                 lams: np.ndarray,
                 collective: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Best value, theta and zeta for each lambda. `collective` is the
        collective table of `lams` when the caller already has it
        """
        lams = np.asarray(lams, dtype=float)
        size = lams.size
        self.evaluations += size

        if self.tau != 0 and collective is None:
            collective = collective_log_table(self.model, self.metric, lams)
        table = _inner_sums(self.model, self.log_m, self.sigma, self.tau, collective)
        if table.shape[0] != size:
            table = np.broadcast_to(table, (size,) + table.shape[1:])
        table = table[:, self.mask][:, :, self.mask]

        thetas = np.broadcast_to(self.thetas, (size, self.thetas.size)).copy()
        zetas = self._zetas(thetas)
        values = _objective_grid(self.log_p, table, lams, thetas, zetas, self.tau, self.rate)

        best_value, best_theta, best_zeta = self._best(values, thetas, zetas)

        for _ in range(self.config.refine_rounds):
            flat = values.reshape(size, -1).argmax(axis=1)
            t_idx, z_idx = np.unravel_index(flat, values.shape[1:])
            rows = np.arange(size)

            t_lo = thetas[rows, np.maximum(t_idx - 1, 0)]
            t_hi = thetas[rows, np.minimum(t_idx + 1, thetas.shape[1] - 1)]
            z_lo = zetas[rows, t_idx, np.maximum(z_idx - 1, 0)]
            z_hi = zetas[rows, t_idx, np.minimum(z_idx + 1, zetas.shape[2] - 1)]

            thetas = t_lo[:, None] + (t_hi - t_lo)[:, None] * np.linspace(0, 1, ZOOM_POINTS)
            lower = np.maximum(1 + thetas, z_lo[:, None])
            upper = np.maximum(lower, z_hi[:, None])
            zetas = _expspace(lower, upper, ZOOM_POINTS)

            values = _objective_grid(self.log_p, table, lams, thetas, zetas, self.tau, self.rate)
            value, theta, zeta = self._best(values, thetas, zetas)
            better = value > best_value
            best_value = np.where(better, value, best_value)
            best_theta = np.where(better, theta, best_theta)
            best_zeta = np.where(better, zeta, best_zeta)

        if self.rate == 0:
            limit = _zero_rate_limit(self.log_p, table)
            better = limit > best_value
            best_value = np.where(better, limit, best_value)
            best_theta = np.where(better, math.inf, best_theta)
            best_zeta = np.where(better, math.inf, best_zeta)

        return best_value, best_theta, best_zeta

    @staticmethod
    def _best(values, thetas, zetas):
        size = values.shape[0]
        flat = values.reshape(size, -1).argmax(axis=1)
        t_idx, z_idx = np.unravel_index(flat, values.shape[1:])
        rows = np.arange(size)
        return values[rows, t_idx, z_idx], thetas[rows, t_idx], zetas[rows, t_idx, z_idx]


def _is_unimodal(values: np.ndarray) -> bool:
    """Nonincreasing up to the minimum and nondecreasing after it
    """
    finite = values[np.isfinite(values)]
    if finite.size < 3:
        return True
    pivot = int(np.argmin(finite))
    scale = UNIMODAL_TOL * max(1.0, float(np.max(np.abs(finite))))
    left = np.diff(finite[:pivot + 1])
    right = np.diff(finite[pivot:])
    return bool(np.all(left <= scale) and np.all(right >= -scale))


def _lambda_grid(config: DualConfig) -> np.ndarray:
    grid = log_grid(config.lambda_min, config.lambda_max, config.lambda_points)
    if config.lambda_limits:
        grid = np.concatenate([[0.0], grid, [math.inf]])
    return grid


class _LambdaGrid:
    """
    Dense lambda grid shared by every (sigma, tau) candidate of one
    optimization, with its collective table computed once
    """

    def __init__(self, model: ChannelModel, decoder: DecoderSpec, config: DualConfig):
        self.lams = _lambda_grid(config)
        self.collective = collective_log_table(model, decoder.metric(model), self.lams)
        size = self.lams.size
        self.sparse = np.unique(np.append(np.arange(0, size, SCREEN_STRIDE), size - 1))

    def near(self, lam: float) -> np.ndarray:
        """Grid indices around `lam`"""
        size = self.lams.size
        position = int(np.clip(np.searchsorted(self.lams, lam), 0, size - 1))
        return np.unique(np.clip([position - 1, position, position + 1], 0, size - 1))


def _profile(model: ChannelModel,
             decoder: DecoderSpec,
             sigma: float,
             tau: float,
             rate: float,
             config: DualConfig,
             grid: _LambdaGrid,
             incumbent: float = -math.inf,
             hint: Optional[float] = None) -> DualResult:
    """
    g(lambda) on the dense grid and its minimum for one (sigma, tau).

    g at any single lambda bounds inf_lambda g from above. The lambdas
    around `hint` and a sparse subset are tried first, and a candidate
    already below `incumbent` there is returned `ruled_out`, valued at
    that upper bound.
    """
    inner = _InnerSup(model, decoder, sigma, tau, rate, config)
    diagnostics = DualDiagnostics()

    if tau == 0:
        # lambda only enters through tau
        lams, collective = np.array([1.0]), None
    else:
        lams, collective = grid.lams, grid.collective

    if tau != 0 and incumbent > -math.inf:
        stages = [grid.sparse] if hint is None else [grid.near(hint), grid.sparse]
        for subset in stages:
            values, thetas, zetas = inner(lams[subset], collective[subset])
            best = int(np.argmin(values))
            if values[best] < incumbent:
                diagnostics.evaluations = inner.evaluations
                diagnostics.ruled_out = True
                params = DualParams(sigma=sigma, tau=tau, lam=float(lams[subset][best]),
                                    theta=float(thetas[best]), zeta=float(zetas[best]))
                return DualResult(value=float(values[best]), params=params,
                                  regime_hint=_regime_hint(params), diagnostics=diagnostics)

    values, thetas, zetas = inner(lams, collective)
    diagnostics.lambda_profile = [(float(lam), float(value))
                                  for lam, value in zip(lams, values)]

    best = int(np.argmin(values))
    if tau != 0:
        finite = np.flatnonzero(np.isfinite(lams) & (lams > 0))
        if config.unimodality_check and not _is_unimodal(values[finite]):
            diagnostics.unimodal = False
            diagnostics.warnings.append(
                f'lambda profile is not unimodal at sigma={sigma:.6g}, tau={tau:.6g}')

    diagnostics.evaluations = inner.evaluations
    diagnostics.refined = tau == 0
    params = DualParams(sigma=sigma, tau=tau, lam=float(lams[best]),
                        theta=float(thetas[best]), zeta=float(zetas[best]))
    return DualResult(value=float(values[best]), params=params,
                      regime_hint=_regime_hint(params), diagnostics=diagnostics)


def _refine(model: ChannelModel,
            decoder: DecoderSpec,
            result: DualResult,
            rate: float,
            config: DualConfig,
            grid: _LambdaGrid) -> DualResult:
    """
    Golden section on ln(lambda) between the grid neighbours of the
    profile minimum. Only ever lowers the value
    """
    diagnostics = result.diagnostics
    if diagnostics.refined or diagnostics.ruled_out:
        return result

    params = result.params
    inner = _InnerSup(model, decoder, params.sigma, params.tau, rate, config)
    lams = grid.lams
    finite = lams[np.isfinite(lams) & (lams > 0)]

    lam_star, value = params.lam, result.value
    theta_star, zeta_star = params.theta, params.zeta

    if math.isinf(lam_star):
        position = finite.size - 1
    elif lam_star > 0:
        position = int(np.searchsorted(finite, lam_star))
    else:
        position = 0
    lower = float(finite[max(position - 1, 0)])
    upper = float(finite[min(position + 1, finite.size - 1)])

    if upper > lower:
        refined = golden_section(
            lambda u: float(inner(np.array([math.exp(u)]))[0][0]),
            math.log(lower), math.log(upper), tol=LAMBDA_TOL)
        if refined.value < value:
            lam_star = math.exp(refined.x)
            point_value, point_theta, point_zeta = inner(np.array([lam_star]))
            value = float(point_value[0])
            theta_star, zeta_star = float(point_theta[0]), float(point_zeta[0])

    diagnostics.evaluations += inner.evaluations
    diagnostics.refined = True
    params = DualParams(sigma=params.sigma, tau=params.tau, lam=lam_star,
                        theta=theta_star, zeta=zeta_star)
    return DualResult(value=value, params=params,
                      regime_hint=_regime_hint(params), diagnostics=diagnostics)


def _regime_hint(params: DualParams) -> RegimeHint:
    if params.sigma == 0 and params.tau == 0:
        return RegimeHint.UNKNOWN
    if params.tau > 1e-6:
        return RegimeHint.HIGH
    if params.theta > 0 or params.zeta > 1:
        return RegimeHint.LOW
    return RegimeHint.MODERATE


def _feasible(sigma: float, tau: float, beta: float, cap: float) -> bool:
    if sigma < 0 or tau < 0:
        return False
    if math.isinf(beta):
        return sigma <= cap and tau <= cap
    return sigma <= beta + 1e-12 and tau <= beta - sigma + 1e-12


def _clip(value: float) -> float:
    return float(round(value, 12))


def _candidates(model: ChannelModel,
                decoder: DecoderSpec,
                rate: float,
                config: DualConfig) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float]]]:
    """
    Closed-form achievers as seeds, then the coarse (sigma, tau) grid
    """
    beta = decoder.beta
    cap = config.sigma_tau_cap if math.isinf(beta) else beta

    achiever = random_coding_achiever(model, rate).rho
    seeds = []
    for rho in [achiever] + list(np.linspace(0.0, 1.0, 11)):
        seeds.append((rho / (1 + rho), (1 - rho) / (1 + rho)))
    seeds.append((0.5, 0.0))
    seeds = list(dict.fromkeys((_clip(sigma), _clip(tau)) for sigma, tau in seeds
                               if _feasible(sigma, tau, beta, cap)))

    axis = warped_grid(cap, config.sigma_tau_points, config.sigma_tau_knee)
    points = set()
    for sigma in axis:
        for tau in axis:
            if _feasible(sigma, tau, beta, cap):
                points.add((_clip(sigma), _clip(tau)))
        if not math.isinf(beta):
            points.add((_clip(sigma), _clip(max(beta - sigma, 0.0))))

    return seeds, sorted(points.difference(seeds))


def _select(results: Sequence[DualResult]) -> DualResult:
    """
    Largest value, ties to the lexicographically smallest parameters
    """
    best = None
    for result in sorted(results, key=lambda item: item.params.key()):
        if best is None or result.value > best.value:
            best = result
    return best


class _Search:
    """
    Candidate cache of one optimization. Candidates are profiled in
    batches, and only the ones that can still beat the incumbent get
    the golden-section refinement
    """

    def __init__(self,
                 model: ChannelModel,
                 decoder: DecoderSpec,
                 rate: float,
                 config: DualConfig):
        self.model = model
        self.decoder = decoder
        self.rate = rate
        self.config = config
        self.grid = _LambdaGrid(model, decoder, config)
        self.cache: Dict[Tuple[float, float], DualResult] = {}
        self.best: Optional[DualResult] = None

    @property
    def incumbent(self) -> float:
        return -math.inf if self.best is None else self.best.value

    def _promote(self, result: DualResult) -> None:
        self.best = result if self.best is None else _select([self.best, result])

    def evaluate(self, points: Sequence[Tuple[float, float]]) -> None:
        pending = [point for point in dict.fromkeys(points) if point not in self.cache]
        start = 0
        while start < len(pending):
            # one candidate alone until there is an incumbent to compare with
            size = 1 if self.best is None else BATCH
            batch = pending[start:start + size]
            start += size
            hint = None if self.best is None else self.best.params.lam
            results = joblib.Parallel(n_jobs=self.config.n_jobs, prefer='threads')(
                joblib.delayed(_profile)(self.model, self.decoder, sigma, tau, self.rate,
                                         self.config, self.grid, self.incumbent, hint)
                for sigma, tau in batch)
            self.cache.update(zip(batch, results))
            self._settle(batch)

    def _settle(self, points: Sequence[Tuple[float, float]]) -> None:
        open_points = []
        for point in points:
            diagnostics = self.cache[point].diagnostics
            if diagnostics.refined:
                self._promote(self.cache[point])
            elif not diagnostics.ruled_out:
                open_points.append(point)

        # the profile minimum bounds the refined value from above
        open_points.sort(key=lambda point: (-self.cache[point].value,
                                            self.cache[point].params.key()))
        for point in open_points:
            if self.cache[point].value < self.incumbent:
                break
            self.cache[point] = _refine(self.model, self.decoder, self.cache[point],
                                        self.rate, self.config, self.grid)
            self._promote(self.cache[point])


def optimize_dual(model: ChannelModel,
                  decoder: DecoderSpec,
                  rate: float,
                  config: Optional[DualConfig] = None) -> DualResult:
    """
    sup_sigma sup_tau inf_lambda sup_theta sup_{zeta >= 1 + theta} of the dual objective.

    The inf over lambda is computed for each (sigma, tau) separately, the
    outer sup runs over the closed-form seeds and a coarse grid followed
    by a pattern search with step halving. Candidates that provably
    cannot beat the incumbent are dropped early, which leaves the result
    unchanged and independent of `config.n_jobs`.
    """
    if rate < 0:
        raise DomainError(f'rate must be nonnegative, got {rate}')
    config = config or DualConfig()
    beta = decoder.beta
    cap = config.sigma_tau_cap if math.isinf(beta) else beta

    search = _Search(model, decoder, rate, config)
    seeds, coarse = _candidates(model, decoder, rate, config)
    search.evaluate(seeds)
    search.evaluate(coarse)
    best = search.best

    step = max(0.25, config.sigma_tau_knee / max(config.sigma_tau_points, 1))
    for _ in range(config.refine_rounds * 4):
        sigma, tau = best.params.sigma, best.params.tau
        moves = [(sigma + step, tau), (sigma - step, tau),
                 (sigma, tau + step), (sigma, tau - step),
                 (sigma + step, tau - step), (sigma - step, tau + step)]
        moves = sorted({(_clip(s), _clip(t)) for s, t in moves
                        if _feasible(s, t, beta, cap)})
        search.evaluate(moves)
        if search.best is best:
            step /= 2
        best = search.best

    results = list(search.cache.values())
    irregular = sum(1 for result in results if not result.diagnostics.unimodal)
    if irregular:
        logger.info('%d of %d (sigma, tau) candidates had a non-unimodal lambda profile',
                    irregular, len(results))
    ruled_out = sum(1 for result in results if result.diagnostics.ruled_out)
    best.diagnostics.evaluations = sum(result.diagnostics.evaluations for result in results)

    logger.debug('dual at R=%g: %.10g with %s (%d of %d candidates ruled out early)',
                 rate, best.value, best.params, ruled_out, len(results))
    return best


def e1(model: ChannelModel, rho: float, lam: float) -> float:
    """
    E1(rho, lambda) = -ln sum_y exp{2 A(y, 1+rho) - lambda (1-rho)/(1+rho) A(y, lambda)}
    """
    if not 0 < rho <= 1:
        raise DomainError(f'E1 needs 0 < rho <= 1, got {rho}')
    if not lam > 0:
        raise DomainError(f'E1 needs lambda > 0, got {lam}')

    table = collective_log_table(model, model.w, [1 + rho, lam])
    exponent = 2 * table[0] / (1 + rho)
    if rho < 1:
        exponent = exponent - (1 - rho) / (1 + rho) * table[1]
    return float(-lse(exponent))


def high_rate_bound(model: ChannelModel,
                    rho: float,
                    rate: float,
                    config: Optional[DualConfig] = None) -> float:
    """
    inf_lambda {E1(rho, lambda) - [1 - lambda (1-rho)/(1+rho)] R}.

    For symmetric channels the infimum sits at lambda = 1 + rho and the
    value is E0(rho) - rho R.
    """
    config = config or DualConfig()
    slope = (1 - rho) / (1 + rho)

    def objective(lam: float) -> float:
        return e1(model, rho, lam) - (1 - lam * slope) * rate

    grid = log_grid(config.lambda_min, config.lambda_max, config.lambda_points)
    values = np.array([objective(lam) for lam in grid])
    best = int(np.argmin(values))
    value = float(values[best])

    lower = grid[max(best - 1, 0)]
    upper = grid[min(best + 1, grid.size - 1)]
    refined = golden_section(lambda u: objective(math.exp(u)),
                             math.log(lower), math.log(upper), tol=LAMBDA_TOL)
    if refined.value < value:
        value = refined.value
        logger.debug('high-rate bound minimized at lambda=%.8g', math.exp(refined.x))
    return value


def regime_bound(model: ChannelModel,
                 rate: float,
                 decoder: Optional[DecoderSpec] = None,
                 cap: Optional[RhoCap] = None) -> RegimeBound:
    """
    Maximum of the three closed-form regime bounds for matched decoding:
    E_ex(2R) + R, E0(1) - R and E_r(R), labelled by R against (R_c1, R_c2).
    `cap` truncates the expurgated supremum
    """
    if decoder is not None and not decoder.is_matched(model):
        raise UnsupportedOperationError(
            'regime bounds are only established for matched decoding (W_tilde = W, beta = inf)')
    if rate < 0:
        raise DomainError(f'rate must be nonnegative, got {rate}')

    expurgated = expurgated_achiever(model, 2 * rate, cap)
    random_coding = random_coding_achiever(model, rate)
    rates = critical_rates(model, cap)

    values = {
        RegimeHint.LOW: expurgated.value + rate,
        RegimeHint.MODERATE: gallager_e0(model, 1.0) - rate,
        RegimeHint.HIGH: random_coding.value,
    }

    if rate <= rates.r_c1:
        label = RegimeHint.LOW
    elif rate <= rates.r_c2:
        label = RegimeHint.MODERATE
    else:
        label = RegimeHint.HIGH

    if label is RegimeHint.LOW:
        rho = expurgated.rho
        params = DualParams(sigma=0.5, tau=0.0, lam=1.0,
                            theta=rho - 1 if math.isfinite(rho) else math.inf,
                            zeta=rho)
    elif label is RegimeHint.MODERATE:
        params = DualParams(sigma=0.5, tau=0.0, lam=1.0, theta=0.0, zeta=1.0)
    else:
        rho = random_coding.rho
        params = DualParams(sigma=rho / (1 + rho), tau=(1 - rho) / (1 + rho),
                            lam=1 + rho, theta=0.0, zeta=1.0)

    return RegimeBound(value=max(values.values()), label=label, params=params)


def beta_threshold(sigma_star: float, tau_star: float) -> float:
    """
    beta_0 = sigma* + tau*, above which the bound no longer depends on beta
    """
    if not (math.isfinite(sigma_star) and math.isfinite(tau_star)):
        raise DomainError('achievers must be finite')
    if sigma_star < 0 or tau_star < 0:
        raise DomainError('achievers must be nonnegative')
    return sigma_star + tau_star
