"""
Named channels used by the CLI, the identity suite and the tests
"""
from typing import Optional

import numpy as np

from .schemas import ChannelModel


def binary_symmetric(crossover: float, p: Optional[np.ndarray] = None) -> ChannelModel:
    """BSC(crossover), uniform input unless `p` is given
    """
    w = [[1 - crossover, crossover], [crossover, 1 - crossover]]
    return ChannelModel.from_matrix(w, p)


def z_channel(flip: float, p: Optional[np.ndarray] = None) -> ChannelModel:
    """
    Binary z-channel: input 0 is received perfectly, input 1 flips to 0
    with probability `flip`
    """
    w = [[1.0, 0.0], [flip, 1 - flip]]
    return ChannelModel.from_matrix(w, p)


def noiseless(size: int = 2) -> ChannelModel:
    """Identity channel over `size` symbols with uniform input
    """
    return ChannelModel.from_matrix(np.eye(size))


def random_channel(rng: np.random.Generator,
                   num_inputs: int,
                   num_outputs: int,
                   uniform_input: bool = False) -> ChannelModel:
    """
    Channel with Dirichlet(1) rows and, unless `uniform_input`, a Dirichlet(1) input
    """
    w = rng.dirichlet(np.ones(num_outputs), size=num_inputs)
    # renormalize so rows sum to 1 within the validation tolerance
    w = w / w.sum(axis=1, keepdims=True)
    if uniform_input:
        return ChannelModel.from_matrix(w)
    p = rng.dirichlet(np.ones(num_inputs))
    return ChannelModel.from_matrix(w, p / p.sum())
