"""Main entrypoint into package."""


from .core.channels import binary_symmetric, noiseless, random_channel, z_channel
from .core.classical import (bhattacharyya_matrix, critical_rates,
                             expurgated_exponent, expurgated_ex,
                             exponent_at_zero_rate, gallager_e0,
                             mutual_information, random_coding_exponent,
                             sphere_packing_exponent,
                             sphere_packing_rate_infinity)
from .core.curve import CurveRow, compute_curve, write_csv
from .core.dual import (beta_threshold, dual_objective, e1, high_rate_bound,
                        inner_sum_log, optimize_dual, regime_bound)
from .core.loader import parse_channel_file
from .core.primal import (alpha_dual, alpha_primal_grid, evaluate_primal, f_q,
                          gamma, primal_bound)
from .core.schemas import (ChannelModel, Codebook, DecoderSpec, DualConfig,
                           DualParams, DualResult, GridSpec, JointXXPrime,
                           SimConfig)
from .core.simulate import exact_error_prob, gld_posterior, trc_estimate

__all__ = [
    'ChannelModel',
    'Codebook',
    'CurveRow',
    'DecoderSpec',
    'DualConfig',
    'DualParams',
    'DualResult',
    'GridSpec',
    'JointXXPrime',
    'SimConfig',
    'alpha_dual',
    'alpha_primal_grid',
    'beta_threshold',
    'bhattacharyya_matrix',
    'binary_symmetric',
    'compute_curve',
    'critical_rates',
    'dual_objective',
    'e1',
    'evaluate_primal',
    'exact_error_prob',
    'expurgated_ex',
    'expurgated_exponent',
    'exponent_at_zero_rate',
    'f_q',
    'gallager_e0',
    'gamma',
    'gld_posterior',
    'high_rate_bound',
    'inner_sum_log',
    'mutual_information',
    'noiseless',
    'optimize_dual',
    'parse_channel_file',
    'primal_bound',
    'random_channel',
    'random_coding_exponent',
    'regime_bound',
    'sphere_packing_exponent',
    'sphere_packing_rate_infinity',
    'trc_estimate',
    'write_csv',
    'z_channel',
]
