"""
Log-domain information-theoretic kernels.

Probabilities are stored linearly, every product and power is taken in the
log domain so that W~^(1/lambda) survives lambda anywhere in [1e-6, 1e6].
"""
import logging
import math
from typing import List, Sequence

import numpy as np
from scipy.special import logsumexp, rel_entr

from .errors import DimensionError, DomainError
from .schemas import ChannelModel, DecoderSpec, LogValue

logger = logging.getLogger(__name__)

VALIDATION_TOL = 1e-12
IDENTITY_TOL = 1e-10
OPTIMIZER_TOL = 1e-8


def safe_log(values) -> np.ndarray:
    """Elementwise natural log, log(0) = -inf without a warning
    """
    with np.errstate(divide='ignore'):
        return np.log(np.asarray(values, dtype=float))


def lse(values, axis=None):
    """logsumexp that stays quiet on -inf / +inf entries
    """
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        return logsumexp(values, axis=axis)


def log_sum_exp(terms: Sequence[LogValue]) -> LogValue:
    """
    ln sum_i exp(terms_i), max-shifted. All -inf gives -inf
    """
    values = np.asarray(terms, dtype=float)
    if values.size == 0:
        raise DomainError('empty reduction')
    return float(lse(values))


def _check_rows(name: str, matrix: np.ndarray) -> List[str]:
    output = []
    for x, row in enumerate(matrix):
        for y, value in enumerate(row):
            if not np.isfinite(value):
                output.append(f'{name}[{x}][{y}] = {value} is not finite')
            elif value < 0:
                output.append(f'{name}[{x}][{y}] = {value:.12g} is negative')
    return output


def validate_channel(model: ChannelModel) -> List[str]:
    """
    List every violated ChannelModel invariant, empty if the model is valid
    """
    violations = []

    if len(model.p) != model.num_inputs:
        violations.append(
            f'input distribution has {len(model.p)} entries but W has {model.num_inputs} rows')
    if len(model.input_alphabet) != model.num_inputs:
        violations.append(
            f'input alphabet has {len(model.input_alphabet)} labels but W has {model.num_inputs} rows')
    if len(model.output_alphabet) != model.num_outputs:
        violations.append(
            f'output alphabet has {len(model.output_alphabet)} labels but W has {model.num_outputs} columns')

    violations.extend(_check_rows('W', model.w))
    for x, total in enumerate(model.w.sum(axis=1)):
        if abs(total - 1.0) > VALIDATION_TOL:
            violations.append(f'row {x} sums to {total:.12g}')

    for x, value in enumerate(model.p):
        if not np.isfinite(value):
            violations.append(f'P[{x}] = {value} is not finite')
        elif value < 0:
            violations.append(f'P[{x}] = {value:.12g} is negative')
    total = float(model.p.sum())
    if abs(total - 1.0) > VALIDATION_TOL:
        violations.append(f'input distribution sums to {total:.12g}')

    return violations


def validate_decoder(model: ChannelModel, decoder: DecoderSpec) -> List[str]:
    """
    Hard violations of a decoder against its channel.
    A metric that is not row-stochastic is only logged
    """
    violations = []
    if not decoder.beta > 0:
        violations.append(f'beta = {decoder.beta} must be positive')

    if decoder.w_tilde is None:
        return violations

    if decoder.w_tilde.shape != model.w.shape:
        violations.append(
            f'W_tilde has shape {decoder.w_tilde.shape} but W has shape {model.w.shape}')
        return violations

    violations.extend(_check_rows('W_tilde', decoder.w_tilde))
    for x, total in enumerate(decoder.w_tilde.sum(axis=1)):
        if abs(total - 1.0) > VALIDATION_TOL:
            logger.warning('W_tilde row %d sums to %.12g (not row-stochastic)', x, total)
    return violations


def support_logs(model: ChannelModel, metric: np.ndarray):
    """
    (ln P, ln metric) restricted to the input symbols with P(x) > 0
    """
    mask = model.support
    return model.log_p[mask], safe_log(metric)[mask]


def collective_log_table(model: ChannelModel, metric: np.ndarray, lams) -> np.ndarray:
    """
    ln [sum_x P(x) metric(y|x)^(1/lambda)]^lambda for every lambda and y.

    Shape (len(lams), |Y|). lambda = 0 gives max_x ln metric(y|x) and
    lambda = inf gives sum_x P(x) ln metric(y|x), both over the support of P
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if np.any(lams < 0) or np.any(np.isnan(lams)):
        raise DomainError('lambda must lie in [0, inf]')

    log_p, log_m = support_logs(model, metric)
    out = np.empty((lams.size, log_m.shape[1]))

    zero = lams == 0
    infinite = np.isinf(lams)
    finite = ~(zero | infinite)

    if np.any(zero):
        out[zero] = log_m.max(axis=0)
    if np.any(infinite):
        out[infinite] = (np.exp(log_p)[:, None] * log_m).sum(axis=0)
    if np.any(finite):
        lam = lams[finite][:, None, None]
        with np.errstate(invalid='ignore'):
            tilted = lse(log_p[None, :, None] + log_m[None] / lam, axis=1)
            out[finite] = lam[:, :, 0] * tilted
    return out


def a_value(model: ChannelModel, metric: np.ndarray, y, r: float) -> float:
    """
    A(y, r) = ln sum_x P(x) metric(y|x)^(1/r)
    """
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f'A(y, r) needs a finite r > 0, got {r}')
    log_p, log_m = support_logs(model, metric)
    column = log_m[:, model.output_index(y)]
    return float(lse(log_p + column / r))


def collective_factor_log(model: ChannelModel, metric: np.ndarray, y, lam: float) -> float:
    """
    lambda * A(y, lambda), the log of the collective-competition factor,
    with the analytic limits at lambda = 0 and lambda = inf
    """
    return float(collective_log_table(model, metric, [lam])[0, model.output_index(y)])


def _same_shape(*arrays: np.ndarray) -> None:
    shapes = {array.shape for array in arrays}
    if len(shapes) != 1:
        raise DimensionError(f'dimension mismatch: {sorted(shapes)}')


def kl_divergence(q, p) -> float:
    """
    D(q||p) with 0 ln(0/.) = 0, +inf if q puts mass where p has none
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    _same_shape(q, p)
    return float(np.sum(rel_entr(q, p)))


def weighted_conditional_divergence(q_y_given_x, w, q_x) -> float:
    """
    D(Q_{Y|X} || W | Q_X) = sum_x Q_X(x) D(Q(.|x) || W(.|x))
    """
    q_y_given_x = np.asarray(q_y_given_x, dtype=float)
    w = np.asarray(w, dtype=float)
    q_x = np.asarray(q_x, dtype=float)
    _same_shape(q_y_given_x, w)
    if q_x.shape != (w.shape[0],):
        raise DimensionError(
            f'dimension mismatch: Q_X has shape {q_x.shape}, W has {w.shape[0]} rows')

    rows = rel_entr(q_y_given_x, w).sum(axis=1)
    mask = q_x > 0
    return float(np.sum(q_x[mask] * rows[mask]))


def j_divergence(q_joint, p) -> float:
    """
    J_Q(X;X') = E_Q ln[Q(X'|X)/P(X')] = I_Q(X;X') + D(Q_X'||P)
    """
    q_joint = np.asarray(q_joint, dtype=float)
    p = np.asarray(p, dtype=float)
    if q_joint.ndim != 2 or q_joint.shape[1] != p.shape[0]:
        raise DimensionError(
            f'dimension mismatch: joint {q_joint.shape} against distribution {p.shape}')
    reference = np.outer(q_joint.sum(axis=1), p)
    return float(np.sum(rel_entr(q_joint, reference)))


def tilted_min(p, f) -> float:
    """
    min_Q [D(Q||P) + E_Q f] = -ln E_P exp(-f)
    """
    p = np.asarray(p, dtype=float)
    f = np.asarray(f, dtype=float)
    _same_shape(p, f)
    mask = p > 0
    return float(-lse(safe_log(p[mask]) - f[mask]))
