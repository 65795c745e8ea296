"""
Channel file loader (JSON, or YAML for .yml / .yaml files)
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import yaml
from pydantic import ValidationError

from .errors import ChannelFileError
from .kernels import validate_channel, validate_decoder
from .schemas import (ChannelFile, ChannelFileSchema, ChannelModel, DecoderSpec,
                      DualConfig, GridSpec)

logger = logging.getLogger(__name__)

YAML_SUFFIXES = ('.yml', '.yaml')


def _pydantic_messages(exc: ValidationError) -> List[str]:
    return [f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
            for error in exc.errors()]


def _read(path: Path) -> Any:
    try:
        content = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ChannelFileError(f'{path}: cannot read channel file ({exc.strerror})') from exc

    if path.suffix.lower() in YAML_SUFFIXES:
        try:
            return yaml.safe_load(content)
        except yaml.YAMLError as exc:
            mark = getattr(exc, 'problem_mark', None)
            where = f'line {mark.line + 1} column {mark.column + 1}: ' if mark else ''
            raise ChannelFileError(f'{path}: {where}{exc}') from exc

    try:
        return json.loads(content)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(
            f'{path}: line {exc.lineno} column {exc.colno}: {exc.msg}') from exc


def _ragged(name: str, rows: List[List[float]]) -> List[str]:
    width = len(rows[0])
    return [f'{name} row {x} has {len(row)} entries, expected {width}'
            for x, row in enumerate(rows) if len(row) != width]


def _defaults(path: Path, defaults: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    unknown = sorted(set(defaults) - {'dual', 'primal'})
    if unknown:
        raise ChannelFileError(f'{path}: defaults: unknown sections {unknown}')
    try:
        return {
            'dual_config': DualConfig.parse_obj(defaults['dual']) if 'dual' in defaults else None,
            'grid': GridSpec.parse_obj(defaults['primal']) if 'primal' in defaults else None,
        }
    except ValidationError as exc:
        messages = '; '.join(f'defaults.{message}' for message in _pydantic_messages(exc))
        raise ChannelFileError(f'{path}: {messages}') from exc


def parse_channel_file(path: Union[str, Path]) -> ChannelFile:
    """
    Parse and validate a channel file.

    Missing entries default to a uniform P, the matched metric W_tilde = W
    and beta = inf. Every violated invariant is reported in one error.
    """
    path = Path(path)
    data = _read(path)
    if not isinstance(data, dict):
        raise ChannelFileError(f'{path}: top level must be an object')

    try:
        schema = ChannelFileSchema.parse_obj(data)
    except ValidationError as exc:
        raise ChannelFileError(f'{path}: ' + '; '.join(_pydantic_messages(exc))) from exc

    shape_errors = _ragged('W', schema.W)
    if schema.W_tilde:
        shape_errors += _ragged('W_tilde', schema.W_tilde)
    if shape_errors:
        raise ChannelFileError(f'{path}: ' + '; '.join(shape_errors))

    model = ChannelModel.from_matrix(
        np.array(schema.W, dtype=float),
        None if schema.P is None else np.array(schema.P, dtype=float),
        input_alphabet=tuple(schema.input_alphabet or ()),
        output_alphabet=tuple(schema.output_alphabet or ()))
    decoder = DecoderSpec(
        w_tilde=None if schema.W_tilde is None else np.array(schema.W_tilde, dtype=float),
        beta=schema.beta)

    violations = validate_channel(model) + validate_decoder(model, decoder)
    if violations:
        raise ChannelFileError(f'{path}: ' + '; '.join(violations))

    logger.debug('loaded %dx%d channel from %s (beta=%g)',
                 model.num_inputs, model.num_outputs, path, decoder.beta)
    return ChannelFile(model=model, decoder=decoder, **_defaults(path, schema.defaults or {}))
