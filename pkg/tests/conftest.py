"""
Conftest
"""
import json
import os
from pathlib import Path

import pytest
from dotenv import load_dotenv

from trcbound import DecoderSpec, DualConfig, binary_symmetric, noiseless, z_channel

ROOT_PATH = Path(__file__).resolve(strict=True).parent.parent


@pytest.fixture(autouse=True)
def setup_envs():
    """
    Setup dotenv
    """
    load_dotenv(dotenv_path=os.path.join(ROOT_PATH, '.env'))


@pytest.fixture(name='bsc')
def bsc_channel():
    """
    BSC(0.1) with uniform input
    """
    return binary_symmetric(0.1)


@pytest.fixture(name='useless')
def useless_channel():
    """BSC(0.5), output independent of the input
    """
    return binary_symmetric(0.5)


@pytest.fixture(name='zchannel')
def z_channel_03():
    """
    Z-channel [[1, 0], [0.3, 0.7]] with uniform input
    """
    return z_channel(0.3)


@pytest.fixture(name='identity')
def noiseless_binary():
    """Noiseless binary channel
    """
    return noiseless(2)


@pytest.fixture(name='matched')
def matched_decoder():
    """
    Matched deterministic decoder (W_tilde = W, beta = inf)
    """
    return DecoderSpec()


@pytest.fixture(name='light_config')
def light_dual_config():
    """
    Coarse dual grids so the optimizer tests stay fast
    """
    return DualConfig(
        sigma_tau_points=6,
        lambda_points=40,
        theta_points=8,
        zeta_points=8,
        refine_rounds=1)


@pytest.fixture(name='light_defaults')
def light_channel_defaults():
    """
    The light grids in channel file form
    """
    return {
        'dual': {
            'sigma_tau_points': 4,
            'lambda_points': 20,
            'theta_points': 6,
            'zeta_points': 6,
            'refine_rounds': 1,
        },
        'primal': {'delta': 0.25},
    }


@pytest.fixture(name='channel_file')
def channel_file_writer(tmp_path):
    """Write a channel file (dict as JSON, str verbatim) and return its path
    """
    def _write(content, name='channel.json'):
        path = tmp_path / name
        if isinstance(content, str):
            path.write_text(content, encoding='utf-8')
        else:
            path.write_text(json.dumps(content), encoding='utf-8')
        return path

    return _write


@pytest.fixture(name='bsc_file')
def bsc_channel_file(channel_file, light_defaults):
    """
    BSC(0.1) channel file with light grids
    """
    return channel_file({
        'input_alphabet': ['0', '1'],
        'output_alphabet': ['0', '1'],
        'W': [[0.9, 0.1], [0.1, 0.9]],
        'P': [0.5, 0.5],
        'beta': 'inf',
        'defaults': light_defaults,
    })
