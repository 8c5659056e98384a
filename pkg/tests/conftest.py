import json
import os
import sys

import numpy as np
import pytest
from hypothesis import settings

# Add the src directory to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from ewl import EWLConfig  # noqa: E402
from games import Bimatrix2, Matrix3x3Pair  # noqa: E402
from mw import InitState2, Pairing, QutritInitState  # noqa: E402

settings.register_profile('default', max_examples=50, deadline=None)
settings.register_profile('ci', max_examples=200, deadline=None)
settings.load_profile(os.environ.get('HYPOTHESIS_PROFILE', 'default'))

HALF_PI = np.pi / 2
CENTRE = [1 / 3, 1 / 3]


@pytest.fixture(autouse=True)
def no_github_output(monkeypatch):
    """Keep GITHUB_OUTPUT from leaking into tests"""
    monkeypatch.delenv('GITHUB_OUTPUT', raising=False)


@pytest.fixture
def pd_game():
    """Prisoner's dilemma r=3, s=0, t=5, u=1"""
    return Bimatrix2.from_pd_roles(3, 0, 5, 1)


@pytest.fixture
def ewl_max(pd_game):
    return EWLConfig(pd_game, HALF_PI)


@pytest.fixture
def ewl_classical(pd_game):
    return EWLConfig(pd_game, 0.0)


@pytest.fixture
def coordination_game():
    """s = t = 0, r = u = 2"""
    return Bimatrix2.from_pd_roles(2, 0, 0, 2)


@pytest.fixture
def bos_game():
    return Bimatrix2.battle_of_sexes(3, 2, 1)


@pytest.fixture
def threshold_game():
    return Bimatrix2.symmetric(1, 0, 2, 3)


@pytest.fixture
def diagonal_state():
    def make(bsq):
        return InitState2.from_bsq(bsq, Pairing.DIAGONAL)
    return make


@pytest.fixture
def rsp_game():
    return Matrix3x3Pair.rsp(-0.5)


@pytest.fixture
def classical_qutrits():
    return QutritInitState.classical()


@pytest.fixture
def entangled_qutrits():
    return QutritInitState.entangled()


@pytest.fixture
def ewl_config_dict():
    """Minimal EWL scenario config"""
    return {
        'name': 'pd-max',
        'scheme': 'EWL',
        'game': {'pd': {'r': 3, 's': 0, 't': 5, 'u': 1}},
        'state': {'gamma': HALF_PI},
        'analyses': [{'kind': 'payoff', 'profile': ['Q', 'Q']}],
    }


@pytest.fixture
def config_file(tmp_path):
    """Write a config dict as JSON and return its path"""
    def write(data, name='config.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)
    return write


@pytest.fixture
def github_output(tmp_path, monkeypatch):
    path = tmp_path / 'github_output'
    path.write_text('')
    monkeypatch.setenv('GITHUB_OUTPUT', str(path))
    return path
