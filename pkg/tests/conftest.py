""" conftest.py

Shared fixtures: shipped crystals, small lattices and a small far-field
experiment document. Statistical runs at production size are marked `slow`
and only collected with --runslow.

"""

import copy

import numpy as np
import pytest

from twinbeam.spdc import spdcio
from twinbeam.spdc.crystal import PumpParams
from twinbeam.spdc.grid import GridSpec


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run statistical acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long statistical run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def lbo():
    return spdcio.resolveCrystal("lbo-type1")


@pytest.fixture(scope="session")
def bbo():
    return spdcio.resolveCrystal("bbo-type2")


@pytest.fixture
def small_grid():
    return GridSpec(dims="X_T", N_x=64, N_t=16, L_x=2e-3, T_win=4e-12,
                    N_z=8)


@pytest.fixture
def pulsed_bbo_pump(bbo):
    return PumpParams.fromGain(bbo, 3., w_0=300e-6, tau_0=1.5e-12)


SMALL_FAR_FIELD = {
    "crystal": "lbo-type1",
    "pump": {"sigma_p_lc": 1.0, "dq0_over_q0": 0.5,
             "domega0_over_Omega0": 0.5},
    "grid": {"dims": "X_T", "N_x": 128, "N_t": 64, "L_x": 6e-4,
             "T_win": 2.4e-13, "N_z": 10},
    "detector": {"plane": "FarField", "d": [1, 2], "d_unit": "x_diff",
                 "center": "ring", "map": True},
    "optics": {"kind": "FarField_f_f", "f": 0.2},
    "run": {"n_traj": 20, "master_seed": 7, "mode": "monte_carlo",
            "workers": 1, "n_blocks": 4},
}


@pytest.fixture
def far_field_doc():
    return copy.deepcopy(SMALL_FAR_FIELD)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
