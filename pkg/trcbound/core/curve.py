"""
Rate sweeps and their CSV form
"""
import csv
import dataclasses
import io
import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Union

import joblib

from .classical import (expurgated_exponent, random_coding_exponent,
                        sphere_packing_exponent)
from .dual import optimize_dual, regime_bound
from .errors import InvariantViolation
from .primal import evaluate_primal
from .schemas import ChannelModel, DecoderSpec, DualConfig, GridSpec, RhoCap

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('rate', 'dual', 'regime', 'regime_label', 'Er', 'Esp', 'Eex', 'primal',
               'sigma', 'tau', 'lambda', 'theta', 'zeta', 'warnings')

# columns in nats that --bits converts
EXPONENT_COLUMNS = ('rate', 'dual', 'regime', 'Er', 'Esp', 'Eex', 'primal')

CEILING_TOL = 1e-6


@dataclasses.dataclass
class CurveRow:
    """
    One rate of a sweep, every exponent in nats
    """
    rate: float
    dual: float
    regime: Optional[float]
    regime_label: Optional[str]
    e_r: float
    e_sp: float
    e_ex: float
    primal: Optional[float]
    sigma: float
    tau: float
    lam: float
    theta: float
    zeta: float
    warnings: List[str] = dataclasses.field(default_factory=list)
    # exact-constraint primal, not written to the CSV
    primal_unslacked: Optional[float] = None

    def values(self) -> dict:
        return {
            'rate': self.rate,
            'dual': self.dual,
            'regime': self.regime,
            'regime_label': self.regime_label,
            'Er': self.e_r,
            'Esp': self.e_sp,
            'Eex': self.e_ex,
            'primal': self.primal,
            'sigma': self.sigma,
            'tau': self.tau,
            'lambda': self.lam,
            'theta': self.theta,
            'zeta': self.zeta,
            'warnings': '; '.join(self.warnings),
        }


def curve_row(model: ChannelModel,
              decoder: DecoderSpec,
              rate: float,
              config: DualConfig,
              cap: RhoCap,
              grid: Optional[GridSpec] = None) -> CurveRow:
    """
    Dual bound, classical exponents, the regime closed form (matched
    decoding only) and optionally the primal oracle at one rate
    """
    result = optimize_dual(model, decoder, rate, config)
    warnings = list(result.diagnostics.warnings)

    regime_value, regime_label = None, None
    if decoder.is_matched(model):
        regime = regime_bound(model, rate, decoder, cap)
        regime_value, regime_label = regime.value, regime.label.value

    primal, unslacked = None, None
    if grid is not None:
        report = evaluate_primal(model, decoder, rate, grid)
        primal, unslacked = report.value, report.unslacked_value
        warnings.extend(report.warnings)

    params = result.params
    return CurveRow(
        rate=rate,
        dual=result.value,
        regime=regime_value,
        regime_label=regime_label,
        e_r=random_coding_exponent(model, rate),
        e_sp=sphere_packing_exponent(model, rate, cap),
        e_ex=expurgated_exponent(model, rate, cap),
        primal=primal,
        sigma=params.sigma,
        tau=params.tau,
        lam=params.lam,
        theta=params.theta,
        zeta=params.zeta,
        warnings=warnings,
        primal_unslacked=unslacked)


def compute_curve(model: ChannelModel,
                  decoder: DecoderSpec,
                  rates: Sequence[float],
                  config: Optional[DualConfig] = None,
                  cap: Optional[RhoCap] = None,
                  grid: Optional[GridSpec] = None,
                  n_jobs: int = -1) -> List[CurveRow]:
    """
    One CurveRow per rate, in the order of `rates`. Rates run on
    `n_jobs` threads (every core by default) and the rows do not depend on it
    """
    config = config or DualConfig()
    cap = cap or RhoCap()
    rows = joblib.Parallel(n_jobs=n_jobs, prefer='threads')(
        joblib.delayed(curve_row)(model, decoder, rate, config, cap, grid)
        for rate in rates)
    return list(rows)


def check_rows(rows: Sequence[CurveRow], matched: bool) -> None:
    """
    Raise InvariantViolation when a dual value sits above sphere packing
    (matched decoding) or above the unslacked primal oracle
    """
    failures = []
    for row in rows:
        if matched and row.dual > row.e_sp + CEILING_TOL:
            failures.append(f'R={row.rate:.12g}: dual {row.dual:.12g} > E_sp {row.e_sp:.12g}')
        if row.primal_unslacked is not None and row.dual > row.primal_unslacked + CEILING_TOL:
            failures.append(
                f'R={row.rate:.12g}: dual {row.dual:.12g} > primal {row.primal_unslacked:.12g}')
    if failures:
        raise InvariantViolation('; '.join(failures))


def format_number(value: Optional[float]) -> str:
    """12 significant digits, 'inf' / '-inf' for infinities and '' for missing values
    """
    if value is None:
        return ''
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if math.isnan(value):
        return 'nan'
    return format(value, '.12g')


def _render(row: CurveRow, bits: bool) -> List[str]:
    values = row.values()
    output = []
    for column in CSV_COLUMNS:
        value = values[column]
        if isinstance(value, str) or value is None:
            output.append(value or '')
            continue
        if bits and column in EXPONENT_COLUMNS:
            value = value / math.log(2)
        output.append(format_number(value))
    return output


def write_rows(rows: Sequence[CurveRow], handle: TextIO, bits: bool = False) -> None:
    writer = csv.writer(handle, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(_render(row, bits))


def write_csv(rows: Sequence[CurveRow], path: Union[str, Path], bits: bool = False) -> None:
    """
    Header then one line per row. Identical rows give identical bytes
    """
    buffer = io.StringIO()
    write_rows(rows, buffer, bits)
    with open(Path(path), 'w', encoding='utf-8', newline='') as file:
        file.write(buffer.getvalue())
