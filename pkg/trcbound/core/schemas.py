"""
Channel, decoder and optimizer data model
"""
import dataclasses
import enum
import math
from functools import cached_property
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, validator

# natural logarithm of a nonnegative quantity, -inf encodes log(0)
LogValue = float


def _frozen_array(values: Any, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise ValueError(f'expected a {ndim}-d array, got shape {array.shape}')
    array.setflags(write=False)
    return array


def _labels(labels: Optional[Any], size: int) -> Tuple[str, ...]:
    if not labels:
        return tuple(str(i) for i in range(size))
    return tuple(str(label) for label in labels)


def _check_workers(cls, value):  # pylint: disable=unused-argument
    """joblib convention: positive counts, or -1 for every core, -2 for all but one, ..."""
    if value == 0:
        raise ValueError('n_jobs must not be 0')
    return value


@dataclasses.dataclass(frozen=True, eq=False)
class ChannelModel:
    """
    A discrete memoryless channel W(y|x) and the input distribution P(x)
    that generates the i.i.d. random-coding ensemble.

    Rows of `w` are indexed by the input symbol, columns by the output symbol.
    Construction does not validate, use `kernels.validate_channel`.
    """
    w: np.ndarray
    p: np.ndarray
    input_alphabet: Tuple[str, ...] = ()
    output_alphabet: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        w = _frozen_array(self.w, 2)
        p = _frozen_array(self.p, 1)
        object.__setattr__(self, 'w', w)
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'input_alphabet',
                           _labels(self.input_alphabet, w.shape[0]))
        object.__setattr__(self, 'output_alphabet',
                           _labels(self.output_alphabet, w.shape[1]))

    @classmethod
    def from_matrix(cls, w: Any, p: Optional[Any] = None, **kwargs) -> 'ChannelModel':
        """Build a channel, uniform input distribution if `p` is omitted
        """
        w = np.asarray(w, dtype=float)
        if p is None:
            p = np.full(w.shape[0], 1.0 / w.shape[0])
        return cls(w=w, p=p, **kwargs)

    @property
    def num_inputs(self) -> int:
        return self.w.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.w.shape[1]

    @cached_property
    def support(self) -> np.ndarray:
        """Boolean mask of the input symbols with P(x) > 0"""
        return self.p > 0

    @cached_property
    def log_w(self) -> np.ndarray:
        with np.errstate(divide='ignore'):
            return np.log(self.w)

    @cached_property
    def log_p(self) -> np.ndarray:
        with np.errstate(divide='ignore'):
            return np.log(self.p)

    def output_index(self, symbol: Union[int, str]) -> int:
        """Resolve an output symbol given either as index or as label
        """
        if isinstance(symbol, str):
            return self.output_alphabet.index(symbol)
        return int(symbol)


@dataclasses.dataclass(frozen=True, eq=False)
class DecoderSpec:
    """
    Generalized likelihood decoder with metric g(Q) = beta * E_Q ln W~(Y|X).

    `w_tilde=None` means the metric is the channel itself.
    `beta=inf` is the deterministic (mismatched) maximum-metric decoder.
    """
    w_tilde: Optional[np.ndarray] = None
    beta: float = math.inf

    def __post_init__(self) -> None:
        if self.w_tilde is not None:
            object.__setattr__(self, 'w_tilde', _frozen_array(self.w_tilde, 2))
        object.__setattr__(self, 'beta', float(self.beta))

    def metric(self, model: ChannelModel) -> np.ndarray:
        """The decoding metric matrix W~ for the given channel
        """
        return model.w if self.w_tilde is None else self.w_tilde

    def is_matched(self, model: ChannelModel) -> bool:
        """Matched deterministic decoding: W~ = W and beta = inf
        """
        if not math.isinf(self.beta):
            return False
        if self.w_tilde is None:
            return True
        return self.w_tilde.shape == model.w.shape and bool(
            np.array_equal(self.w_tilde, model.w))


@dataclasses.dataclass(frozen=True)
class DualParams:
    """
    The five parameters of the Lagrange-dual bound.

    `lam` is the collective-competition exponent (lambda), allowed at the
    endpoints 0 and inf. `theta = zeta = inf` encodes the zero-rate limit.
    """
    sigma: float
    tau: float
    lam: float
    theta: float
    zeta: float

    def violations(self, beta: float = math.inf) -> List[str]:
        """Feasibility predicates for a decoder with the given beta
        """
        output = []
        if self.sigma < 0 or self.tau < 0 or self.theta < 0 or self.lam < 0:
            output.append('sigma, tau, lambda and theta must be nonnegative')
        if self.zeta < 1 + self.theta:
            output.append(f'zeta={self.zeta} < 1 + theta={1 + self.theta}')
        if not math.isinf(beta):
            if self.sigma > beta + 1e-12:
                output.append(f'sigma={self.sigma} exceeds beta={beta}')
            if self.tau > beta - self.sigma + 1e-12:
                output.append(
                    f'tau={self.tau} exceeds beta - sigma={beta - self.sigma}')
        return output

    def is_feasible(self, beta: float = math.inf) -> bool:
        return not self.violations(beta)

    def key(self) -> Tuple[float, ...]:
        """Lexicographic key used to break ties between equal values"""
        return (self.sigma, self.tau, self.lam, self.theta, self.zeta)


class RegimeHint(str, enum.Enum):
    """
    Rate regime suggested by the achieving parameters
    """
    LOW = 'low'
    MODERATE = 'moderate'
    HIGH = 'high'
    UNKNOWN = 'unknown'


class DualConfig(BaseModel):
    """
    Search grids of the sup-inf-sup optimization
    """
    sigma_tau_cap: float = Field(
        default=16.0, description='Upper end of the sigma and tau search when beta is infinite')
    sigma_tau_points: int = Field(
        default=12, description='Coarse grid points per axis, linear up to the knee then log-spaced')
    sigma_tau_knee: float = Field(default=2.0)

    lambda_min: float = Field(default=1e-3)
    lambda_max: float = Field(default=1e3)
    lambda_points: int = Field(
        default=200, description='Log-spaced lambda grid points between lambda_min and lambda_max')
    lambda_limits: bool = Field(
        default=True, description='Also evaluate the analytic endpoints lambda = 0 and lambda = inf')

    theta_cap: float = Field(default=32.0)
    theta_points: int = Field(default=24)
    zeta_cap: float = Field(default=64.0)
    zeta_points: int = Field(default=32)

    refine_rounds: int = Field(
        default=3, description='Zoom rounds for (theta, zeta) and pattern rounds for (sigma, tau)')
    unimodality_check: bool = True
    n_jobs: int = Field(
        default=1, description='Worker threads for the (sigma, tau) candidates')

    class Config:
        allow_mutation = False

    @validator('sigma_tau_cap', 'sigma_tau_knee', 'lambda_min', 'lambda_max', 'theta_cap', 'zeta_cap')
    def _positive(cls, value):  # pylint: disable=no-self-argument
        if not value > 0:
            raise ValueError('caps must be positive')
        return value

    @validator('sigma_tau_points', 'lambda_points', 'theta_points', 'zeta_points')
    def _non_empty(cls, value):  # pylint: disable=no-self-argument
        if value < 1:
            raise ValueError('grids must be non-empty')
        return value

    @validator('lambda_max')
    def _lambda_range(cls, value, values):  # pylint: disable=no-self-argument
        if 'lambda_min' in values and value <= values['lambda_min']:
            raise ValueError('lambda_max must exceed lambda_min')
        return value

    @validator('zeta_cap')
    def _zeta_cap(cls, value):  # pylint: disable=no-self-argument
        if value < 1:
            raise ValueError('zeta_cap must be at least 1')
        return value

    _workers = validator('n_jobs', allow_reuse=True)(_check_workers)


@dataclasses.dataclass
class DualDiagnostics:
    """
    What the optimizer saw while minimizing over lambda
    """
    lambda_profile: List[Tuple[float, float]] = dataclasses.field(
        default_factory=list)
    unimodal: bool = True
    warnings: List[str] = dataclasses.field(default_factory=list)
    evaluations: int = 0
    # lambda refinement done (or not needed, tau = 0)
    refined: bool = False
    # a sparse lambda subset already fell below a better candidate
    ruled_out: bool = False


@dataclasses.dataclass
class DualResult:
    """
    Value of the dual bound at one rate and the parameters achieving it
    """
    value: float
    params: DualParams
    regime_hint: RegimeHint = RegimeHint.UNKNOWN
    diagnostics: DualDiagnostics = dataclasses.field(
        default_factory=DualDiagnostics)

    def to_dict(self) -> Dict[str, Any]:
        """Machine readable form (json friendly, inf as string)
        """
        def _num(value: float):
            return value if math.isfinite(value) else str(value)

        return {
            'value': _num(self.value),
            'sigma': _num(self.params.sigma),
            'tau': _num(self.params.tau),
            'lambda': _num(self.params.lam),
            'theta': _num(self.params.theta),
            'zeta': _num(self.params.zeta),
            'regime_hint': self.regime_hint.value,
            'unimodal': self.diagnostics.unimodal,
            'warnings': list(self.diagnostics.warnings),
        }


class RhoCap(BaseModel):
    """
    Truncation of the suprema over rho in [1, inf) or [0, inf)
    """
    rho_max: float = Field(default=64.0)
    grid_points_per_decade: int = Field(default=20)

    class Config:
        allow_mutation = False

    @validator('rho_max')
    def _rho_max(cls, value):  # pylint: disable=no-self-argument
        if value < 1:
            raise ValueError('rho_max must be at least 1')
        return value

    @validator('grid_points_per_decade')
    def _points(cls, value):  # pylint: disable=no-self-argument
        if value < 2:
            raise ValueError('grid_points_per_decade must be at least 2')
        return value


class CriticalRates(NamedTuple):
    """R_c1 = E_x'(1)/2 and R_c2 = E_0'(1)"""
    r_c1: float
    r_c2: float


@dataclasses.dataclass(frozen=True)
class RhoSupremum:
    """
    Result of a supremum over rho: value, achiever and whether the
    search hit the cap while still increasing
    """
    value: float
    rho: float
    at_cap: bool = False


@dataclasses.dataclass(frozen=True)
class RegimeBound:
    """
    Closed-form bound of one of the three rate regimes
    """
    value: float
    label: RegimeHint
    params: DualParams


@dataclasses.dataclass(frozen=True, eq=False)
class JointXXPrime:
    """
    Joint distribution Q(x, x') of the correct and an incorrect codeword letter
    """
    q: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, 'q', _frozen_array(self.q, 2))

    def violations(self) -> List[str]:
        output = []
        if np.any(self.q < 0):
            output.append('joint distribution has negative entries')
        total = float(self.q.sum())
        if abs(total - 1.0) > 1e-12:
            output.append(f'joint distribution sums to {total:.12g}')
        return output

    @property
    def q_x(self) -> np.ndarray:
        return self.q.sum(axis=1)

    @property
    def q_x_prime(self) -> np.ndarray:
        return self.q.sum(axis=0)


class GridSpec(BaseModel):
    """
    Simplex grids of the brute-force primal oracle.
    All grid points are multiples of delta, so halving delta nests the grids
    """
    delta: float = Field(default=0.05, description='Resolution of the joint Q(x, x\') grid')
    conditional_delta: Optional[float] = Field(
        default=None, description='Resolution of the Q(y|x, x\') grids, defaults to delta')
    max_alphabet: int = Field(default=3)
    max_points: int = Field(
        default=4_000_000, description='Largest conditional tensor enumeration per joint')
    n_jobs: int = Field(
        default=-1, description='Worker threads over the joint grid, -1 for every core')

    class Config:
        allow_mutation = False

    @validator('delta', 'conditional_delta')
    def _resolution(cls, value):  # pylint: disable=no-self-argument
        if value is None:
            return value
        if not 0 < value < 1:
            raise ValueError('delta must lie in (0, 1)')
        steps = 1.0 / value
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError('1/delta must be an integer')
        return value

    _workers = validator('n_jobs', allow_reuse=True)(_check_workers)

    @property
    def steps(self) -> int:
        return int(round(1.0 / self.delta))

    @property
    def conditional_steps(self) -> int:
        return int(round(1.0 / (self.conditional_delta or self.delta)))


@dataclasses.dataclass
class PrimalResult:
    """
    Grid value of the primal oracle.

    `value` uses the slacked feasibility filter, `unslacked_value` the exact one
    """
    value: float
    unslacked_value: float
    q_argmin: Optional[np.ndarray] = None
    feasible_points: int = 0
    slack: float = 0.0
    warnings: List[str] = dataclasses.field(default_factory=list)


@dataclasses.dataclass(frozen=True, eq=False)
class Codebook:
    """
    M codewords of blocklength n over the input alphabet (symbol indices)
    """
    n: int
    codewords: np.ndarray

    def __post_init__(self) -> None:
        codewords = np.array(self.codewords, dtype=np.int64)
        if codewords.ndim != 2 or codewords.shape[1] != self.n:
            raise ValueError(
                f'all codewords must have length n={self.n}, got shape {codewords.shape}')
        if codewords.shape[0] < 2:
            raise ValueError('a codebook needs at least two codewords')
        codewords.setflags(write=False)
        object.__setattr__(self, 'codewords', codewords)

    @property
    def size(self) -> int:
        return self.codewords.shape[0]


class SimConfig(BaseModel):
    """
    Settings of the typical-random-code Monte Carlo estimate
    """
    n: int = Field(default=6, description='Blocklength')
    rate_nats: float = Field(default=0.1, description='M = ceil(exp(n R)), at least 2')
    num_codes: int = Field(default=200)
    seed: int = Field(default=0)
    n_jobs: int = Field(default=1)

    class Config:
        allow_mutation = False

    @validator('n', 'num_codes')
    def _positive(cls, value):  # pylint: disable=no-self-argument
        if value < 1:
            raise ValueError('must be positive')
        return value

    _workers = validator('n_jobs', allow_reuse=True)(_check_workers)

    @validator('rate_nats')
    def _rate(cls, value):  # pylint: disable=no-self-argument
        if value < 0:
            raise ValueError('rate must be nonnegative')
        return value

    @property
    def num_messages(self) -> int:
        return max(2, math.ceil(math.exp(self.n * self.rate_nats) - 1e-9))


@dataclasses.dataclass(frozen=True)
class TrcEstimate:
    """
    Mean and standard error of -ln P_e / n over sampled codebooks
    """
    estimate: float
    stderr: float
    num_codes: int
    zero_error_codes: int = 0


class ChannelFileSchema(BaseModel):
    """
    The JSON (or YAML) channel file
    """
    input_alphabet: Optional[List[str]]
    output_alphabet: Optional[List[str]]
    W: List[List[float]]
    P: Optional[List[float]]
    W_tilde: Optional[List[List[float]]]
    beta: Union[float, str] = Field(
        default='inf', description='Positive number or the string "inf"')
    defaults: Optional[Dict[str, Dict[str, Any]]] = Field(
        default=None, description='Optional "dual" and "primal" grid settings')

    class Config:
        extra = 'forbid'

    @validator('beta')
    def _beta(cls, value):  # pylint: disable=no-self-argument
        if isinstance(value, str):
            if value.strip().lower() not in ('inf', 'infinity', '+inf'):
                raise ValueError('beta must be a number or "inf"')
            return math.inf
        if not value > 0:
            raise ValueError('beta must be positive')
        return float(value)

    @validator('W')
    def _non_empty(cls, value):  # pylint: disable=no-self-argument
        if not value or not value[0]:
            raise ValueError('W must have at least one row and one column')
        return value


@dataclasses.dataclass(frozen=True)
class ChannelFile:
    """
    Parsed channel file
    """
    model: ChannelModel
    decoder: DecoderSpec
    dual_config: Optional[DualConfig] = None
    grid: Optional[GridSpec] = None
