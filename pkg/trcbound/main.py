"""
Command line interface of trcbound
"""
import argparse
import json
import logging
import math
import os
import sys
from typing import List, Optional, Sequence

import numpy as np
from dotenv import load_dotenv

from trcbound.core.channels import binary_symmetric, noiseless, z_channel
from trcbound.core.classical import (critical_rates, expurgated_exponent,
                                     gallager_e0, mutual_information,
                                     random_coding_exponent,
                                     sphere_packing_exponent)
from trcbound.core.curve import (CEILING_TOL, check_rows, compute_curve,
                                 format_number, write_csv, write_rows)
from trcbound.core.dual import optimize_dual, regime_bound
from trcbound.core.errors import InputError, InvariantViolation
from trcbound.core.identities import run_identities
from trcbound.core.loader import parse_channel_file
from trcbound.core.primal import evaluate_primal
from trcbound.core.schemas import (ChannelFile, DecoderSpec, DualConfig, GridSpec,
                                   RhoCap, SimConfig)
from trcbound.core.simulate import trc_estimate

load_dotenv()

# Log level of the command line run
LOG_LEVEL = os.environ.get('TRCBOUND_LOG_LEVEL', 'WARNING')

# Worker threads for rate sweeps, (sigma, tau) candidates and sampled codes, -1 for every core
N_JOBS = os.environ.get('TRCBOUND_N_JOBS', -1)

# Truncation of the suprema over rho
RHO_MAX = os.environ.get('TRCBOUND_RHO_MAX', 64)

# Channel used when no --channel file is given
DEFAULT_PRESET = 'bsc:0.1'

logger = logging.getLogger(__name__)

NATS_PER_BIT = math.log(2)


class ArgumentParser(argparse.ArgumentParser):
    """
    argparse with exit code 1 on usage errors
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f'{self.prog}: error: {message}\n')


def _preset(spec: str) -> ChannelFile:
    name, _, value = spec.partition(':')
    try:
        if name == 'bsc':
            model = binary_symmetric(float(value or 0.1))
        elif name == 'z':
            model = z_channel(float(value or 0.3))
        elif name == 'noiseless':
            model = noiseless(int(value or 2))
        else:
            raise InputError(f'unknown preset {name!r} (bsc:p, z:p, noiseless:k)')
    except ValueError as exc:
        raise InputError(f'bad preset {spec!r}: {exc}') from exc
    return ChannelFile(model=model, decoder=DecoderSpec())


def _load(args) -> ChannelFile:
    channel = parse_channel_file(args.channel) if args.channel else _preset(args.preset)
    if args.beta is None:
        return channel
    beta = math.inf if args.beta.lower() == 'inf' else float(args.beta)
    if not beta > 0:
        raise InputError(f'beta must be positive, got {args.beta}')
    return ChannelFile(model=channel.model,
                       decoder=DecoderSpec(w_tilde=channel.decoder.w_tilde, beta=beta),
                       dual_config=channel.dual_config,
                       grid=channel.grid)


def _dual_config(channel: ChannelFile, n_jobs: int) -> DualConfig:
    config = channel.dual_config or DualConfig()
    return config.copy(update={'n_jobs': n_jobs})


def _grid(channel: ChannelFile, delta: Optional[float]) -> GridSpec:
    grid = channel.grid or GridSpec()
    if delta is None:
        return grid
    try:
        return GridSpec(**{**grid.dict(), 'delta': delta})
    except ValueError as exc:
        raise InputError(f'bad grid resolution {delta}: {exc}') from exc


def _unit(value: float, bits: bool) -> str:
    return format_number(value / NATS_PER_BIT if bits else value)


def _rates(args, channel: ChannelFile) -> np.ndarray:
    upper = args.rmax if args.rmax is not None else mutual_information(channel.model)
    if args.rmin < 0 or upper < args.rmin:
        raise InputError(f'bad rate range [{args.rmin}, {upper}]')
    if args.points < 1:
        raise InputError('--points must be positive')
    return np.linspace(args.rmin, upper, args.points)


def _check_rate(rate: float) -> float:
    if not rate >= 0:
        raise InputError(f'rate must be nonnegative, got {rate}')
    return rate


def cmd_curve(args) -> int:
    channel = _load(args)
    grid = None
    if args.primal_grid:
        # the rates already run in parallel
        grid = _grid(channel, args.primal_grid).copy(update={'n_jobs': 1})
    rows = compute_curve(
        channel.model, channel.decoder, _rates(args, channel),
        config=_dual_config(channel, 1),
        cap=RhoCap(rho_max=args.rho_max),
        grid=grid,
        n_jobs=args.n_jobs)

    if args.out:
        write_csv(rows, args.out, bits=args.bits)
        logger.info('wrote %d rows to %s', len(rows), args.out)
    else:
        write_rows(rows, sys.stdout, bits=args.bits)

    check_rows(rows, channel.decoder.is_matched(channel.model))
    return 0


def cmd_dual(args) -> int:
    channel = _load(args)
    rate = _check_rate(args.rate)
    result = optimize_dual(channel.model, channel.decoder, rate,
                           _dual_config(channel, args.n_jobs))
    params = result.params

    print(f'dual bound: {_unit(result.value, args.bits)}')
    print(f'achiever: sigma={format_number(params.sigma)} tau={format_number(params.tau)} '
          f'lambda={format_number(params.lam)} theta={format_number(params.theta)} '
          f'zeta={format_number(params.zeta)}')
    print(f'regime hint: {result.regime_hint.value}')
    for warning in result.diagnostics.warnings:
        print(f'warning: {warning}')
    print(json.dumps(result.to_dict(), sort_keys=True))

    if channel.decoder.is_matched(channel.model):
        ceiling = sphere_packing_exponent(channel.model, rate, RhoCap(rho_max=args.rho_max))
        if result.value > ceiling + CEILING_TOL:
            raise InvariantViolation(
                f'dual {result.value:.12g} exceeds sphere packing {ceiling:.12g} at R={rate:g}')
    return 0


def cmd_primal(args) -> int:
    channel = _load(args)
    rate = _check_rate(args.rate)
    grid = _grid(channel, args.grid).copy(update={'n_jobs': args.n_jobs})
    report = evaluate_primal(channel.model, channel.decoder, rate, grid)

    print(f'primal bound: {_unit(report.value, args.bits)}')
    print(f'unslacked: {_unit(report.unslacked_value, args.bits)} '
          f'(slack {format_number(report.slack)}, {report.feasible_points} feasible joints)')
    if report.q_argmin is not None:
        print(f'argmin Q(x,x\'): {report.q_argmin.tolist()}')
    for warning in report.warnings:
        print(f'warning: {warning}')
    return 0


def cmd_regimes(args) -> int:
    channel = _load(args)
    model = channel.model
    cap = RhoCap(rho_max=args.rho_max)
    rates = critical_rates(model, cap)

    print(f'R_c1: {_unit(rates.r_c1, args.bits)}')
    print(f'R_c2: {_unit(rates.r_c2, args.bits)}')
    print('rate,low,moderate,high,value,label')
    e0_one = gallager_e0(model, 1.0)
    for rate in _rates(args, channel):
        bound = regime_bound(model, rate, channel.decoder, cap)
        columns = [rate,
                   expurgated_exponent(model, 2 * rate, cap) + rate,
                   e0_one - rate,
                   random_coding_exponent(model, rate),
                   bound.value]
        print(','.join(_unit(value, args.bits) for value in columns) + f',{bound.label.value}')
    return 0


def cmd_simulate(args) -> int:
    channel = _load(args)
    try:
        config = SimConfig(n=args.n, rate_nats=args.rate, num_codes=args.codes,
                           seed=args.seed, n_jobs=args.n_jobs)
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    estimate = trc_estimate(channel.model, channel.decoder, config)
    print(f'codes: {estimate.num_codes} (M={config.num_messages}, n={config.n})')
    print(f'estimate: {_unit(estimate.estimate, args.bits)}')
    print(f'stderr: {_unit(estimate.stderr, args.bits)}')
    if estimate.zero_error_codes:
        print(f'zero-error codes: {estimate.zero_error_codes}')
    return 0


def cmd_identities(args) -> int:
    checks = run_identities(args.seed)
    for check in checks:
        status = 'PASS' if check.passed else 'FAIL'
        print(f'{status} {check.name}: {check.max_error:.3g} (tol {check.tolerance:.1g})')
    failed = [check.name for check in checks if not check.passed]
    if failed:
        raise InvariantViolation(f'identities failed: {", ".join(failed)}')
    return 0


def _workers(text: str) -> int:
    value = int(text)
    if value == 0:
        raise argparse.ArgumentTypeError('n-jobs must not be 0 (-1 uses every core)')
    return value


def _channel_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--channel', help='JSON or YAML channel file')
    parser.add_argument('--preset', default=DEFAULT_PRESET,
                        help='Named channel when --channel is absent (bsc:p, z:p, noiseless:k)')
    parser.add_argument('--beta', help='Override the decoder beta (number or "inf")')
    parser.add_argument('--bits', action='store_true', help='Print rates and exponents in bits')
    parser.add_argument('--n-jobs', type=_workers, default=int(N_JOBS))
    parser.add_argument('--rho-max', type=float, default=float(RHO_MAX))


def _rate_range(parser: argparse.ArgumentParser, points: int) -> None:
    parser.add_argument('--rmin', type=float, default=0.0)
    parser.add_argument('--rmax', type=float, help='Defaults to I(P, W)')
    parser.add_argument('--points', type=int, default=points)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog='trcbound',
        description='Typical-random-code exponent bounds for mismatched likelihood decoding')
    commands = parser.add_subparsers(dest='command', required=True,
                                     parser_class=ArgumentParser)

    curve = commands.add_parser('curve', help='Sweep rates and write the CSV table')
    _channel_options(curve)
    _rate_range(curve, 20)
    curve.add_argument('--out', help='CSV path, stdout if omitted')
    curve.add_argument('--primal-grid', type=float,
                       help='Also evaluate the primal oracle at this grid resolution')
    curve.set_defaults(handler=cmd_curve)

    dual = commands.add_parser('dual', help='Dual bound and achiever at one rate')
    _channel_options(dual)
    dual.add_argument('--rate', type=float, required=True)
    dual.set_defaults(handler=cmd_dual)

    primal = commands.add_parser('primal', help='Primal grid oracle at one rate')
    _channel_options(primal)
    primal.add_argument('--rate', type=float, required=True)
    primal.add_argument('--grid', type=float, help='Simplex grid resolution delta')
    primal.set_defaults(handler=cmd_primal)

    regimes = commands.add_parser('regimes', help='Critical rates and the regime table')
    _channel_options(regimes)
    _rate_range(regimes, 10)
    regimes.set_defaults(handler=cmd_regimes)

    simulate = commands.add_parser('simulate', help='Monte Carlo estimate at a tiny blocklength')
    _channel_options(simulate)
    simulate.add_argument('--n', type=int, default=6)
    simulate.add_argument('--rate', type=float, default=0.1)
    simulate.add_argument('--codes', type=int, default=200)
    simulate.add_argument('--seed', type=int, default=0)
    simulate.set_defaults(handler=cmd_simulate)

    identities = commands.add_parser('identities', help='Run the algebraic identity suite')
    identities.add_argument('--seed', type=int, default=0)
    identities.set_defaults(handler=cmd_identities)

    return parser


def run_command(argv: Sequence[str]) -> int:
    """
    Parse `argv`, run the command and return the exit code:
    0 on success, 1 on bad input, 2 on a failed numerical invariant
    """
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    try:
        return args.handler(args)
    except InputError as exc:
        logging.error(exc)
        return 1
    except InvariantViolation as exc:
        logging.error(exc)
        return 2


def main(argv: Optional[List[str]] = None) -> None:
    logging.basicConfig(
        level=LOG_LEVEL.upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == '__main__':
    main()
