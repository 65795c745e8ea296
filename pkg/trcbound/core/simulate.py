"""
Exact error probability of generalized likelihood decoding at tiny
blocklengths and the Monte Carlo typical-random-code estimate
"""
import itertools
import logging
import math
from typing import Sequence

import joblib
import numpy as np

from .errors import DimensionError, EnumerationCapError
from .kernels import lse, safe_log
from .schemas import Codebook, ChannelModel, DecoderSpec, SimConfig, TrcEstimate

logger = logging.getLogger(__name__)

# n |X|^n |Y|^n, n = 8 on binary alphabets
ENUMERATION_CAP = 8 * 2 ** 16
# -ln P_e in nats charged to codes that never err
ZERO_ERROR_CAP = 700.0
# log metric scores this close count as a tie at beta = inf
TIE_TOL = 1e-12


def _check_cap(n: int, model: ChannelModel) -> None:
    size = n * model.num_inputs ** n * model.num_outputs ** n
    if size > ENUMERATION_CAP:
        raise EnumerationCapError(
            f'n={n} on a {model.num_inputs}x{model.num_outputs} channel enumerates {size} terms '
            f'(cap {ENUMERATION_CAP})')


def _log_scores(code: Codebook, log_m: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """
    sum_i ln m(y_i | x_{m,i}) for every codeword m and output sequence y,
    shape (M, number of sequences)
    """
    out = np.zeros((code.size, ys.shape[0]))
    for i in range(code.n):
        out = out + log_m[code.codewords[:, i][:, None], ys[:, i][None, :]]
    return out


def _posterior_table(scores: np.ndarray, beta: float) -> np.ndarray:
    """
    Column-wise GLD posterior from log metric scores.
    beta = inf splits the mass uniformly among the maximizers
    """
    size = scores.shape[0]
    dead = np.all(np.isneginf(scores), axis=0)
    if np.any(dead):
        logger.warning('%d output sequences have zero metric for every codeword, '
                       'using the uniform posterior', int(dead.sum()))

    if math.isinf(beta):
        top = scores.max(axis=0)
        # equal up to summation order
        winners = np.isclose(scores, top[None], rtol=TIE_TOL, atol=TIE_TOL).astype(float)
        posterior = winners / winners.sum(axis=0, keepdims=True)
    else:
        tilted = beta * scores
        with np.errstate(invalid='ignore'):
            posterior = np.exp(tilted - lse(tilted, axis=0)[None])

    posterior[:, dead] = 1.0 / size
    return posterior


def _sequences(num_outputs: int, n: int) -> np.ndarray:
    return np.array(list(itertools.product(range(num_outputs), repeat=n)),
                    dtype=np.int64).reshape(-1, n)


def gld_posterior(code: Codebook,
                  model: ChannelModel,
                  decoder: DecoderSpec,
                  y: Sequence[int],
                  m: int) -> float:
    """
    W~^beta(y|x_m) / sum_m' W~^beta(y|x_m') for one received sequence
    """
    ys = np.asarray(y, dtype=np.int64).reshape(1, -1)
    if ys.shape[1] != code.n:
        raise DimensionError(f'output sequence has length {ys.shape[1]}, expected {code.n}')
    scores = _log_scores(code, safe_log(decoder.metric(model)), ys)
    return float(_posterior_table(scores, decoder.beta)[m, 0])


def exact_error_prob(code: Codebook, model: ChannelModel, decoder: DecoderSpec) -> float:
    """
    (1/M) sum_m sum_y W(y|x_m) [1 - posterior(m|y)] over all of Y^n
    """
    _check_cap(code.n, model)
    ys = _sequences(model.num_outputs, code.n)

    channel = np.exp(_log_scores(code, model.log_w, ys))
    posterior = _posterior_table(
        _log_scores(code, safe_log(decoder.metric(model)), ys), decoder.beta)

    error = float(np.sum(channel * (1.0 - posterior)) / code.size)
    return min(max(error, 0.0), 1.0)


def sample_codebook(model: ChannelModel, n: int, size: int, rng: np.random.Generator) -> Codebook:
    """Codewords drawn i.i.d. from P^n
    """
    codewords = rng.choice(model.num_inputs, size=(size, n), p=model.p)
    return Codebook(n=n, codewords=codewords)


def _code_exponent(model: ChannelModel, decoder: DecoderSpec, config: SimConfig, index: int):
    rng = np.random.default_rng([config.seed, index])
    code = sample_codebook(model, config.n, config.num_messages, rng)
    error = exact_error_prob(code, model, decoder)
    if error <= 0:
        return ZERO_ERROR_CAP / config.n, True
    return -math.log(error) / config.n, False


def trc_estimate(model: ChannelModel, decoder: DecoderSpec, config: SimConfig) -> TrcEstimate:
    """
    Mean and standard error of -ln P_e(C_n) / n over `num_codes` random codebooks.

    Code i uses the generator seeded with (seed, i), so the estimate does
    not depend on the number of workers.
    """
    _check_cap(config.n, model)
    results = joblib.Parallel(n_jobs=config.n_jobs, prefer='threads')(
        joblib.delayed(_code_exponent)(model, decoder, config, index)
        for index in range(config.num_codes))

    exponents = np.array([value for value, _ in results])
    zero_error = sum(1 for _, capped in results if capped)
    if zero_error:
        logger.info('%d of %d codes never err, charged %g nats',
                    zero_error, config.num_codes, ZERO_ERROR_CAP)

    stderr = 0.0
    if exponents.size > 1:
        stderr = float(exponents.std(ddof=1) / math.sqrt(exponents.size))
    return TrcEstimate(
        estimate=float(exponents.mean()),
        stderr=stderr,
        num_codes=config.num_codes,
        zero_error_codes=zero_error)
