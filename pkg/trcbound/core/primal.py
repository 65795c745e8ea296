"""
Brute-force primal oracle of the i.i.d.-ensemble exponent on small alphabets.

Every distribution is enumerated on a simplex grid whose points are
multiples of delta, so the value over-approximates the true infimum
and nested grids can only lower it.
"""
import logging
import math
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import joblib
import numpy as np
from scipy.special import rel_entr

from .errors import AlphabetTooLargeError, DomainError, GridTooLargeError
from .kernels import (VALIDATION_TOL, collective_log_table, j_divergence,
                      kl_divergence, safe_log)
from .schemas import ChannelModel, DecoderSpec, GridSpec, JointXXPrime, PrimalResult
from .utils import log_grid, simplex_grid

logger = logging.getLogger(__name__)

MU_MIN = 1e-4
MU_MAX = 1e4
MU_POINTS = 161
GOLDEN_ITERATIONS = 80
CHUNK = 1 << 16
# output distributions are keyed on multiples of 2^-KEY_BITS
KEY_BITS = 30
# joints handed to the worker threads between two early-stop checks
WAVE = 16
INV_PHI = (math.sqrt(5) - 1) / 2


def _expected(weights: np.ndarray, logs: np.ndarray) -> np.ndarray:
    """sum of weights * logs along the last axis with 0 * (-inf) = 0
    """
    with np.errstate(invalid='ignore'):
        terms = np.where(weights > 0, weights * logs, 0.0)
    return terms.sum(axis=-1)


def _mu_objective(model: ChannelModel,
                  metric: np.ndarray,
                  q_ys: np.ndarray,
                  mus: np.ndarray,
                  rate: float) -> np.ndarray:
    """
    sum_y Q_Y(y) C(y, mu) + mu R for rows of Q_Y paired with mus
    """
    table = collective_log_table(model, metric, mus)
    value = _expected(q_ys, table)
    if rate != 0:
        value = value + mus * rate
    return value


def alpha_bar_batch(model: ChannelModel,
                    decoder: DecoderSpec,
                    q_ys: np.ndarray,
                    rate: float) -> np.ndarray:
    """
    inf_{mu > 0} [sum_y Q_Y(y) C(y, mu) + mu R] for every row of `q_ys`:
    log grid, vectorized golden section on ln(mu) between the grid
    neighbours, then the mu -> 0 (and at R = 0 the mu -> inf) limits
    """
    metric = decoder.metric(model)
    q_ys = np.atleast_2d(np.asarray(q_ys, dtype=float))
    rows = q_ys.shape[0]

    grid = log_grid(MU_MIN, MU_MAX, MU_POINTS)
    table = collective_log_table(model, metric, grid)
    with np.errstate(invalid='ignore'):
        values = np.where(q_ys[:, None, :] > 0, q_ys[:, None, :] * table[None], 0.0).sum(axis=-1)
    values = values + grid[None, :] * rate
    values = np.where(np.isnan(values), np.inf, values)

    best_idx = values.argmin(axis=1)
    best = values[np.arange(rows), best_idx]

    lower = np.log(grid[np.maximum(best_idx - 1, 0)])
    upper = np.log(grid[np.minimum(best_idx + 1, grid.size - 1)])

    def evaluate(points: np.ndarray) -> np.ndarray:
        out = _mu_objective(model, metric, q_ys, np.exp(points), rate)
        return np.where(np.isnan(out), np.inf, out)

    a, b = lower, upper
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = evaluate(c), evaluate(d)
    best = np.minimum(best, np.minimum(fc, fd))
    for _ in range(GOLDEN_ITERATIONS):
        left = fc < fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        new_c = np.where(left, b - INV_PHI * (b - a), d)
        new_d = np.where(left, c, a + INV_PHI * (b - a))
        fresh = evaluate(np.where(left, new_c, new_d))
        fc, fd = np.where(left, fresh, fd), np.where(left, fc, fresh)
        c, d = new_c, new_d
        best = np.minimum(best, fresh)

    limits = collective_log_table(model, metric, [0.0, math.inf])
    best = np.minimum(best, _expected(q_ys, limits[0]))
    if rate == 0:
        best = np.minimum(best, _expected(q_ys, limits[1]))
    return best


def alpha_dual(model: ChannelModel,
               decoder: DecoderSpec,
               q_y,
               rate: float) -> float:
    """
    alpha(R, Q_Y) = inf_{lambda > 0} lambda [sum_y Q_Y(y) A(y, lambda/beta) + R].

    Substituting mu = lambda / beta this is beta times the bar value; with
    beta = inf the value is reported per unit beta.
    """
    if rate < 0:
        raise DomainError(f'rate must be nonnegative, got {rate}')
    q_y = np.asarray(q_y, dtype=float)
    if q_y.shape != (model.num_outputs,):
        raise DomainError(f'Q_Y has shape {q_y.shape}, expected ({model.num_outputs},)')

    value = float(alpha_bar_batch(model, decoder, q_y[None], rate)[0])
    return value if math.isinf(decoder.beta) else decoder.beta * value


def alpha_primal_grid(model: ChannelModel,
                      decoder: DecoderSpec,
                      q_y,
                      rate: float,
                      delta: float = 1 / 40) -> float:
    """
    sup over conditionals Q(x|y) on a delta grid with
    D(Q_{X|Y} || P | Q_Y) <= R of beta E_Q ln W~(Y|X), same scaling as `alpha_dual`
    """
    q_y = np.asarray(q_y, dtype=float)
    steps = int(round(1 / delta))
    outputs = np.flatnonzero(q_y > 0)
    conditional = simplex_grid(model.num_inputs, steps)
    log_m = safe_log(decoder.metric(model))

    divergence_table = rel_entr(conditional, model.p[None]).sum(axis=1)
    scores = [_expected(conditional, log_m[:, y][None]) for y in outputs]

    total = conditional.shape[0] ** len(outputs)
    if total > GridSpec().max_points:
        raise GridTooLargeError(f'{total} conditional grid points exceed the cap')

    best = -math.inf
    shape = (conditional.shape[0],) * len(outputs)
    for start in range(0, total, CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + CHUNK, total)), shape)
        divergence = sum(q_y[y] * divergence_table[idx[k]] for k, y in enumerate(outputs))
        score = sum(q_y[y] * scores[k][idx[k]] for k, y in enumerate(outputs))
        feasible = divergence <= rate + VALIDATION_TOL
        if np.any(feasible):
            best = max(best, float(np.max(score[feasible])))

    return best if math.isinf(decoder.beta) else decoder.beta * best


def f_q(q: JointXXPrime, p) -> float:
    """
    F_Q = D(Q_X||P) + max{D(Q_X||P), J_Q(X;X')}
    """
    _check_joint(q)
    p = np.asarray(p, dtype=float)
    divergence = kl_divergence(q.q_x, p)
    return divergence + max(divergence, j_divergence(q.q, p))


def _check_joint(q: JointXXPrime) -> None:
    violations = q.violations()
    if violations:
        raise DomainError('; '.join(violations))


def _check_alphabets(model: ChannelModel, grid: GridSpec) -> None:
    if model.num_inputs > grid.max_alphabet or model.num_outputs > grid.max_alphabet:
        raise AlphabetTooLargeError(
            f'alphabets {model.num_inputs}x{model.num_outputs} exceed max_alphabet={grid.max_alphabet}')


class _AlphaCache:
    """
    Memoized bar-alpha per output distribution.

    Rows are snapped to multiples of 2^-KEY_BITS and alpha is evaluated at
    the snapped row, so a value never depends on which thread asked first
    """

    def __init__(self, model: ChannelModel, decoder: DecoderSpec, rate: float):
        self.model = model
        self.decoder = decoder
        self.rate = rate
        self.scale = float(1 << KEY_BITS)
        self.values: Dict[Hashable, float] = {}

    def _keys(self, ticks: np.ndarray) -> Tuple[List[Hashable], np.ndarray, np.ndarray]:
        if ticks.shape[1] <= 2:
            radix = ((1 << KEY_BITS) + 1) ** np.arange(ticks.shape[1], dtype=np.int64)
            codes = (ticks * radix).sum(axis=1)
            unique, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
            return unique.tolist(), first, inverse
        unique, first, inverse = np.unique(ticks, axis=0, return_index=True, return_inverse=True)
        return [row.tobytes() for row in unique], first, inverse

    def __call__(self, q_ys: np.ndarray) -> np.ndarray:
        # the last coordinate follows from the others
        ticks = np.rint(q_ys[:, :-1] * self.scale).astype(np.int64)
        keys, first, inverse = self._keys(ticks)

        missing = [i for i, key in enumerate(keys) if key not in self.values]
        if missing:
            head = ticks[first[missing]] / self.scale
            rows = np.column_stack([head, np.maximum(1.0 - head.sum(axis=1), 0.0)])
            computed = alpha_bar_batch(self.model, self.decoder, rows, self.rate)
            for i, value in zip(missing, computed):
                self.values[keys[i]] = float(value)

        values = np.array([self.values[key] for key in keys])
        return values[np.ravel(inverse)]


def _outer_sum(parts: Sequence[np.ndarray]) -> np.ndarray:
    """Sums over the Cartesian product of `parts`, flattened with the last part fastest
    """
    total = np.zeros(1)
    for part in parts:
        total = (total[:, None] + part[None, :]).ravel()
    return total


def _gamma(model: ChannelModel,
           decoder: DecoderSpec,
           q: np.ndarray,
           grid: GridSpec,
           alpha: _AlphaCache) -> float:
    conditional = simplex_grid(model.num_outputs, grid.conditional_steps)
    size = conditional.shape[0]
    log_m = safe_log(decoder.metric(model))
    cells = list(zip(*np.nonzero(q > 0)))

    total = size ** len(cells)
    if total > grid.max_points:
        raise GridTooLargeError(
            f'{total} conditional grid points for {len(cells)} cells exceed max_points={grid.max_points}')

    # per-cell terms weighted by Q(x, x')
    weights = [q[x, x_prime] for x, x_prime in cells]
    divergence = [w * rel_entr(conditional, model.w[x][None]).sum(axis=1)
                  for w, (x, _) in zip(weights, cells)]
    correct = [w * _expected(conditional, log_m[x][None]) for w, (x, _) in zip(weights, cells)]
    incorrect = [w * _expected(conditional, log_m[x_prime][None])
                 for w, (_, x_prime) in zip(weights, cells)]
    outputs = [w * conditional for w in weights]

    # the trailing cells are enumerated at once, the leading ones in blocks
    trailing = 0
    while trailing < len(cells) and size ** (trailing + 1) <= CHUNK:
        trailing += 1
    split = len(cells) - trailing

    def expand(parts):
        head = _outer_sum(parts[:split])
        tail = _outer_sum(parts[split:])
        return head, tail

    head_d, tail_d = expand(divergence)
    head_a, tail_a = expand(correct)
    head_b, tail_b = expand(incorrect)
    columns = [expand([part[:, y] for part in outputs]) for y in range(model.num_outputs)]
    head_y = np.stack([head for head, _ in columns], axis=-1)
    tail_y = np.stack([tail for _, tail in columns], axis=-1)

    block = max(1, CHUNK // tail_d.size)
    best = math.inf
    for start in range(0, head_d.size, block):
        rows = slice(start, start + block)
        d = head_d[rows, None] + tail_d[None]
        a = head_a[rows, None] + tail_a[None]
        b = head_b[rows, None] + tail_b[None]
        q_y = (head_y[rows, None, :] + tail_y[None]).reshape(-1, model.num_outputs)
        threshold = np.maximum(a, alpha(q_y).reshape(a.shape))

        with np.errstate(invalid='ignore'):
            if math.isinf(decoder.beta):
                gap = threshold - b
                value = np.where(np.isnan(gap) | (gap <= 1e-12), d, math.inf)
            else:
                bracket = np.maximum(threshold - b, 0.0)
                bracket = np.where(np.isnan(bracket), 0.0, bracket)
                value = d + decoder.beta * bracket

        best = min(best, float(np.min(value)))
    return best


def gamma(model: ChannelModel,
          decoder: DecoderSpec,
          q: JointXXPrime,
          rate: float,
          grid: Optional[GridSpec] = None) -> float:
    """
    inf over Q_{Y|XX'} of D(Q_{Y|X}||W|Q_X) + I_Q(X';Y|X)
    + [max{g(Q_XY), alpha(R, Q_Y)} - g(Q_X'Y)]_+ on the conditional grid.

    With beta = inf the bracket is 0 when g(Q_X'Y) reaches the max and
    +inf otherwise.
    """
    grid = grid or GridSpec()
    _check_alphabets(model, grid)
    _check_joint(q)
    if q.q.shape != (model.num_inputs, model.num_inputs):
        raise DomainError(f'joint has shape {q.q.shape}, expected {(model.num_inputs,) * 2}')
    if rate < 0:
        raise DomainError(f'rate must be nonnegative, got {rate}')
    return _gamma(model, decoder, q.q, grid, _AlphaCache(model, decoder, rate))


def evaluate_primal(model: ChannelModel,
                    decoder: DecoderSpec,
                    rate: float,
                    grid: Optional[GridSpec] = None) -> PrimalResult:
    """
    inf over joints with F_Q <= 2R of Gamma + J_Q(X;X') + D(Q_X||P) - R.

    The slacked value admits F_Q <= 2R + delta ln|X|, the unslacked one
    the exact constraint. Joints are visited by increasing D(Q||P x P) in
    waves of WAVE joints spread over `grid.n_jobs` threads, and the scan
    stops once that lower bound cannot beat the current minimum. Equal
    values go to the smallest grid index.
    """
    grid = grid or GridSpec()
    _check_alphabets(model, grid)
    if rate < 0:
        raise DomainError(f'rate must be nonnegative, got {rate}')

    size = model.num_inputs
    slack = grid.delta * math.log(size) if size > 1 else 0.0
    joints = simplex_grid(size * size, grid.steps).reshape(-1, size, size)
    product = np.outer(model.p, model.p)

    constraint = np.array([f_q(JointXXPrime(q), model.p) for q in joints])
    divergence = np.array([kl_divergence(q, product) for q in joints])

    slacked = constraint <= 2 * rate + slack + VALIDATION_TOL
    exact = constraint <= 2 * rate + VALIDATION_TOL
    order = [int(i) for i in np.argsort(divergence, kind='stable') if slacked[i]]

    alpha = _AlphaCache(model, decoder, rate)
    best, best_exact, best_index = math.inf, math.inf, None
    position = 0
    while position < len(order):
        wave = []
        while position < len(order) and len(wave) < WAVE:
            i = order[position]
            floor = divergence[i] - rate
            if floor > best_exact:
                # every later joint has a larger floor
                position = len(order)
                break
            position += 1
            if floor > best and not exact[i]:
                continue
            wave.append(i)

        values = joblib.Parallel(n_jobs=grid.n_jobs, prefer='threads')(
            joblib.delayed(_gamma)(model, decoder, joints[i], grid, alpha) for i in wave)
        for i, gamma_value in zip(wave, values):
            value = gamma_value + divergence[i] - rate
            if value < best or (value == best and best_index is not None and i < best_index):
                best, best_index = value, i
            if exact[i] and value < best_exact:
                best_exact = value

    warnings = []
    if not order:
        warnings.append(f'no grid joint satisfies F_Q <= 2R at R={rate:g}')
        logger.warning(warnings[-1])

    logger.debug('primal at R=%g: %.10g (unslacked %.10g, %d feasible joints)',
                 rate, best, best_exact, len(order))
    return PrimalResult(
        value=best,
        unslacked_value=best_exact,
        q_argmin=None if best_index is None else joints[best_index],
        feasible_points=len(order),
        slack=slack,
        warnings=warnings)


def primal_bound(model: ChannelModel,
                 decoder: DecoderSpec,
                 rate: float,
                 grid: Optional[GridSpec] = None) -> float:
    return evaluate_primal(model, decoder, rate, grid).value
