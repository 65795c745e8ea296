"""
Algebraic identity suite run by `trcbound identities`
"""
import dataclasses
import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from .channels import binary_symmetric, noiseless, random_channel
from .classical import expurgated_ex, gallager_e0
from .dual import e1
from .kernels import IDENTITY_TOL, collective_log_table
from .schemas import Codebook, DecoderSpec
from .simulate import gld_posterior
from .utils import central_difference

logger = logging.getLogger(__name__)

CONVEXITY_SLACK = 1e-9


@dataclasses.dataclass(frozen=True)
class IdentityCheck:
    """
    Largest deviation seen by one identity against its tolerance
    """
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def _random_channels(rng: np.random.Generator, count: int, max_size: int):
    for _ in range(count):
        inputs, outputs = rng.integers(2, max_size + 1, size=2)
        yield random_channel(rng, int(inputs), int(outputs))


def _expurgated_matches_gallager(rng) -> float:
    return max(abs(expurgated_ex(model, 1.0) - gallager_e0(model, 1.0))
               for model in _random_channels(rng, 20, 4))


def _e1_stationary_point(rng) -> float:
    models = [binary_symmetric(0.1), random_channel(rng, 3, 3)]
    rhos = np.round(np.arange(1, 11) / 10, 10)
    return max(abs(e1(model, rho, 1 + rho) - gallager_e0(model, rho))
               for model in models for rho in rhos)


def _e0_at_zero(rng) -> float:
    return max(abs(gallager_e0(model, 0.0)) for model in _random_channels(rng, 10, 4))


def _bsc_closed_form(_rng) -> float:
    return abs(gallager_e0(binary_symmetric(0.1), 1.0) + math.log(0.8))


def _noiseless_slope(_rng) -> float:
    model = noiseless(2)
    return abs(central_difference(lambda rho: gallager_e0(model, rho), 1.0) - math.log(2))


def _lambda_limits(rng) -> float:
    worst = 0.0
    for model in _random_channels(rng, 10, 4):
        table = collective_log_table(model, model.w, [0.0, 1e-6, 1e6, math.inf])
        worst = max(worst,
                    float(np.max(np.abs(table[1] - table[0]))),
                    float(np.max(np.abs(table[2] - table[3]))))
    return worst


def _midpoint_excess(values: np.ndarray) -> float:
    """Largest f(mid) - (f(left) + f(right))/2 along an equally spaced axis 0"""
    excess = values[1:-1] - 0.5 * (values[:-2] + values[2:])
    return float(np.max(excess, initial=0.0))


def _collective_convexity(rng) -> float:
    lams = np.linspace(0.05, 5.0, 200)
    worst = 0.0
    for model in _random_channels(rng, 10, 4):
        worst = max(worst, _midpoint_excess(collective_log_table(model, model.w, lams)))
    return worst


def _alpha_convexity(rng) -> float:
    mus = np.linspace(0.05, 5.0, 200)
    worst = 0.0
    for model in _random_channels(rng, 10, 4):
        q_y = rng.dirichlet(np.ones(model.num_outputs))
        rate = float(rng.uniform(0.0, 1.0))
        values = collective_log_table(model, model.w, mus) @ q_y + mus * rate
        worst = max(worst, _midpoint_excess(values))
    return worst


def _posterior_normalization(rng) -> float:
    worst = 0.0
    for model in _random_channels(rng, 10, 3):
        n = int(rng.integers(1, 4))
        size = int(rng.integers(2, 6))
        code = Codebook(n=n, codewords=rng.integers(0, model.num_inputs, size=(size, n)))
        decoder = DecoderSpec(beta=float(rng.uniform(0.1, 10.0)))
        y = rng.integers(0, model.num_outputs, size=n)
        total = sum(gld_posterior(code, model, decoder, y, m) for m in range(size))
        worst = max(worst, abs(total - 1.0))
    return worst


IDENTITIES: List[Tuple[str, Callable[[np.random.Generator], float], float]] = [
    ('E_x(1) = E0(1) on random channels', _expurgated_matches_gallager, IDENTITY_TOL),
    ('E1(rho, 1+rho) = E0(rho)', _e1_stationary_point, 1e-12),
    ('E0(0) = 0', _e0_at_zero, 0.0),
    ('E0(1) = -ln 0.8 on BSC(0.1)', _bsc_closed_form, IDENTITY_TOL),
    ("E0'(1) = ln 2 on the noiseless binary channel", _noiseless_slope, 1e-6),
    ('collective factor limits at lambda = 1e-6 and 1e6', _lambda_limits, 1e-4),
    ('midpoint convexity of lambda A(y, lambda)', _collective_convexity, CONVEXITY_SLACK),
    ('midpoint convexity of the alpha dual objective', _alpha_convexity, CONVEXITY_SLACK),
    ('posterior sums to one', _posterior_normalization, 1e-12),
]


def run_identities(seed: int = 0) -> List[IdentityCheck]:
    """
    Evaluate every identity with its own generator derived from `seed`
    """
    output = []
    for index, (name, check, tolerance) in enumerate(IDENTITIES):
        error = check(np.random.default_rng([seed, index]))
        output.append(IdentityCheck(name=name, max_error=error, tolerance=tolerance))
        logger.debug('%s: %.3g (tol %.1g)', name, error, tolerance)
    return output
