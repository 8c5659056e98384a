"""
Scenario configs and the runner that turns one into a JSON report.

A config names a quantization scheme, a game, an initial state and a list of
analyses. Configs are validated completely before anything is computed.
"""
import copy
import enum
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ewl import (EWLConfig, EWLStrategy, closed_form_deviation, closed_form_gamma_sweep,
                 compare_case_formulas, ewl_angle_pairs, ewl_angle_table,
                 ewl_payoffs, ne_difference_deviations)
from games import (Bimatrix2, Matrix3x3Pair, MixedStrategy2, ThreePlayerSymmetricSpec,
                   classical_equilibria_2x2, mixed_payoff_bimatrix)
from mw import (InitState2, InitState3, Pairing, QutritInitState, bos_anti_display, bos_mixed_ne,
                mw2_effective_bimatrix, mw_asymmetric_ne_differences, mw_payoffs_2, mw_payoffs_3,
                mw_symmetric_ne_closed, pure_ess_thresholds, rsp_classical_payoff_sum,
                rsp_effective_matrix, rsp_gradients, rsp_payoff_factors, rsp_payoffs,
                rsp_second_condition_closed, rsp_second_condition_display,
                three_player_mixed_ne, three_player_ne_difference, three_player_pure_ess)
from replicator import (DEFAULT_DELTA, DEFAULT_DT, DEFAULT_HORIZON, Population, evolve,
                        stability_probe)
from stability import (DEFAULT_GRID_STEP, InvasionTest, StrategySpace, SymmetricPayoffFn,
                       check_asymmetric_ess, check_asymmetric_ne, check_invasion,
                       check_symmetric_ess, check_symmetric_ne, check_three_player_ess,
                       default_tolerances, fitness_advantage, fitness_pair, mixture_weights,
                       mutant_margins, ne_scan, strategy_grid)

logger = logging.getLogger(__name__)

LIBRARY_VERSION = '1.0.0'
SCHEMES = ('EWL', 'MW2', 'MW3', 'RSP', 'CLASSICAL')
ANALYSES = {
    'EWL': {'payoff', 'ne', 'ess', 'mutants', 'ne_scan', 'fitness', 'formula'},
    'MW2': {'payoff', 'ne', 'ess', 'invasion', 'mutants', 'ne_scan', 'replicate', 'equilibria',
            'fitness', 'symmetric_ne', 'formula'},
    'MW3': {'payoff', 'ne', 'ess', 'mixed_roots', 'formula'},
    'RSP': {'payoff', 'ne', 'ess', 'invasion', 'mutants', 'ne_scan', 'replicate', 'fitness',
            'gradients', 'formula'},
    'CLASSICAL': {'payoff', 'ne', 'ess', 'invasion', 'mutants', 'ne_scan', 'replicate',
                  'equilibria', 'fitness'},
}
FORMULAS = {
    'EWL': {'pd_case', 'symmetric_closed', 'ne_difference'},
    'MW2': {'bos_mixed', 'asymmetric_differences'},
    'MW3': {'ne_difference'},
    'RSP': {'second_condition', 'payoff_sum', 'factors'},
}
EWL_NAMED = {'C': EWLStrategy.cooperate, 'D': EWLStrategy.defect, 'Q': EWLStrategy.quantum}
RSP_CENTRE = (1 / 3, 1 / 3)
FORMULA_GRID = 21
FD_STEP = 1e-6


class ConfigError(ValueError):
    """Schema or normalization violation, located by field path or JSON line/column"""

    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.field = field
        self.line = line
        self.column = column
        if field:
            message = f"{field}: {message}"
        elif line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


def _require(data: Dict[str, Any], key: str, path: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ConfigError("missing required field", field=f"{path}.{key}" if path else key)
    return data[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=path)
    return float(value)


def _parse_game(scheme: str, data: Any):
    try:
        if scheme in ('EWL', 'MW2', 'CLASSICAL'):
            return Bimatrix2.from_dict(data)
        if scheme == 'MW3':
            if 'sigma' in data:
                return ThreePlayerSymmetricSpec.from_reduced(
                    float(data['sigma']), float(data['eta']), float(data['omega']))
            return ThreePlayerSymmetricSpec.from_dict(data)
        return Matrix3x3Pair.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid game: {e}", field='game')


def _parse_state(scheme: str, game, data: Any):
    if scheme == 'CLASSICAL':
        return None
    if not isinstance(data, dict):
        raise ConfigError("missing required field", field='state')
    try:
        if scheme == 'EWL':
            gamma = _number(_require(data, 'gamma', 'state'), 'state.gamma')
            return EWLConfig(game, gamma)
        if scheme == 'MW2':
            try:
                pairing = Pairing(data.get('pairing', 'DIAGONAL'))
            except ValueError:
                raise ConfigError(f"unknown pairing {data.get('pairing')!r}", field='state.pairing')
            if 'bsq' in data:
                return InitState2.from_bsq(_number(data['bsq'], 'state.bsq'), pairing)
            return InitState2(_require(data, 'a', 'state'), _require(data, 'b', 'state'), pairing)
        if scheme == 'MW3':
            if 'bsq' in data:
                return InitState3.from_bsq(_number(data['bsq'], 'state.bsq'))
            return InitState3(_require(data, 'a', 'state'), _require(data, 'b', 'state'))
        preset = data.get('preset')
        if preset == 'classical':
            return QutritInitState.classical()
        if preset == 'entangled':
            return QutritInitState.entangled()
        if preset is not None:
            raise ConfigError(f"unknown preset {preset!r}", field='state.preset')
        return QutritInitState(_require(data, 'c', 'state'))
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid initial state: {e}", field='state')


def _parse_strategy(scheme: str, value: Any, path: str) -> np.ndarray:
    try:
        if scheme == 'EWL':
            if isinstance(value, str):
                if value not in EWL_NAMED:
                    raise ConfigError(f"unknown strategy name {value!r}", field=path)
                s = EWL_NAMED[value]()
            else:
                s = EWLStrategy.from_dict(value)
            return np.array([s.theta, s.phi])
        if scheme == 'RSP':
            p, p1 = value
            s = MixedStrategy2(p, p1)
            return np.array([s.p, s.p1])
        p = _number(value, path)
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"probability must lie in [0, 1], got {p!r}", field=path)
        return np.array([p])
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"invalid strategy {value!r}: {e}", field=path)


def _parse_analysis(scheme: str, item: Any, index: int) -> Dict[str, Any]:
    path = f"analyses[{index}]"
    kind = _require(item, 'kind', path)
    if kind not in ANALYSES[scheme]:
        raise ConfigError(f"analysis {kind!r} is not available for scheme {scheme}", field=f"{path}.kind")
    parsed: Dict[str, Any] = {'kind': kind}

    def strategy(key):
        return _parse_strategy(scheme, _require(item, key, path), f"{path}.{key}")

    if kind == 'payoff':
        profile = _require(item, 'profile', path)
        players = 3 if scheme == 'MW3' else 2
        if not isinstance(profile, list) or len(profile) != players:
            raise ConfigError(f"profile needs {players} strategies", field=f"{path}.profile")
        parsed['profile'] = [_parse_strategy(scheme, s, f"{path}.profile[{k}]")
                             for k, s in enumerate(profile)]
    elif kind in ('ne', 'ess'):
        if 'pair' in item:
            if scheme not in ('MW2', 'CLASSICAL'):
                raise ConfigError("pairs are only checked for 2x2 games", field=f"{path}.pair")
            pair = item['pair']
            if not isinstance(pair, list) or len(pair) != 2:
                raise ConfigError("pair needs two strategies", field=f"{path}.pair")
            parsed['pair'] = [_parse_strategy(scheme, s, f"{path}.pair[{k}]") for k, s in enumerate(pair)]
        else:
            parsed['candidate'] = strategy('candidate')
    elif kind == 'invasion':
        parsed['candidate'] = strategy('candidate')
        parsed['mutant'] = strategy('mutant')
        if 'epsilons' in item:
            parsed['epsilons'] = [_number(e, f"{path}.epsilons") for e in item['epsilons']]
    elif kind == 'mutants':
        parsed['candidate'] = strategy('candidate')
        mutants = _require(item, 'mutants', path)
        parsed['mutants'] = [_parse_strategy(scheme, s, f"{path}.mutants[{k}]")
                             for k, s in enumerate(mutants)]
    elif kind == 'replicate':
        if 'candidate' not in item and 'start' not in item:
            raise ConfigError("replicate needs a candidate or a start", field=path)
        for key in ('candidate', 'start'):
            if key in item:
                parsed[key] = strategy(key)
        parsed['delta'] = _number(item.get('delta', DEFAULT_DELTA), f"{path}.delta")
        parsed['dt'] = _number(item.get('dt', DEFAULT_DT), f"{path}.dt")
        parsed['horizon'] = int(_number(item.get('horizon', DEFAULT_HORIZON), f"{path}.horizon"))
    elif kind == 'fitness':
        parsed['x'] = strategy('x')
        parsed['fx'] = _number(_require(item, 'fx', path), f"{path}.fx")
        if 'y' in item:
            parsed['y'] = strategy('y')
        else:
            parsed['mutant_step'] = _number(item.get('mutant_step', DEFAULT_GRID_STEP),
                                            f"{path}.mutant_step")
    elif kind == 'gradients':
        parsed['at'] = strategy('at')
    elif kind == 'formula':
        name = _require(item, 'name', path)
        if name not in FORMULAS.get(scheme, ()):
            raise ConfigError(f"formula {name!r} is not available for scheme {scheme}",
                              field=f"{path}.name")
        parsed['name'] = name
        if name == 'pd_case':
            parsed['case'] = _require(item, 'case', path)
    if 'grid_step' in item:
        parsed['grid_step'] = _number(item['grid_step'], f"{path}.grid_step")
    return parsed


@dataclass
class ScenarioConfig:
    scheme: str
    game: Any
    state: Any
    analyses: List[Dict[str, Any]]
    name: str = 'scenario'
    grid_step: float = DEFAULT_GRID_STEP
    tolerances: Dict[str, float] = field(default_factory=default_tolerances)
    raw: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ScenarioConfig':
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        scheme = _require(data, 'scheme', '')
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {scheme!r}; expected one of {list(SCHEMES)}", field='scheme')
        game = _parse_game(scheme, _require(data, 'game', ''))
        state = _parse_state(scheme, game, data.get('state'))
        items = _require(data, 'analyses', '')
        if not isinstance(items, list) or not items:
            raise ConfigError("expected a non-empty list", field='analyses')
        analyses = [_parse_analysis(scheme, item, k) for k, item in enumerate(items)]

        grid_step = _number(data.get('grid_step', DEFAULT_GRID_STEP), 'grid_step')
        if not 0 < grid_step <= 1:
            raise ConfigError(f"grid step must lie in (0, 1], got {grid_step!r}", field='grid_step')
        tolerances = default_tolerances()
        for key, value in (data.get('tolerances') or {}).items():
            if key not in tolerances:
                raise ConfigError(f"unknown tolerance {key!r}", field=f"tolerances.{key}")
            tolerances[key] = _number(value, f"tolerances.{key}")
        return cls(scheme=scheme, game=game, state=state, analyses=analyses,
                   name=str(data.get('name', 'scenario')), grid_step=grid_step,
                   tolerances=tolerances, raw=copy.deepcopy(data))

    @classmethod
    def from_json(cls, text: str) -> 'ScenarioConfig':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON: {e.msg}", line=e.lineno, column=e.colno)
        return cls.from_dict(data)

    @classmethod
    def from_file(cls, path: str) -> 'ScenarioConfig':
        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise IOError(f"Cannot read config file {path}: {e}")
        return cls.from_json(text)

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.raw)


def _jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become None"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


class ScenarioRunner:
    """Evaluates the analyses of one config in order"""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.tables: Dict[str, np.ndarray] = {}
        self._effective: Optional[Bimatrix2] = None
        self._rsp_matrix: Optional[np.ndarray] = None

    # Payoff functions

    @property
    def space(self) -> StrategySpace:
        if self.cfg.scheme == 'EWL':
            return StrategySpace.EWL_RECT
        if self.cfg.scheme == 'RSP':
            return StrategySpace.SIMPLEX2
        return StrategySpace.INTERVAL

    def bimatrix(self) -> Bimatrix2:
        """Game over pure tactics: the 2x2 game itself or the MW effective game"""
        if self.cfg.scheme == 'CLASSICAL':
            return self.cfg.game
        if self._effective is None:
            self._effective = mw2_effective_bimatrix(self.cfg.game, self.cfg.state)
        return self._effective

    def rsp_matrix(self) -> np.ndarray:
        if self._rsp_matrix is None:
            self._rsp_matrix = rsp_effective_matrix(self.cfg.game, self.cfg.state)
        return self._rsp_matrix

    def pure_matrix(self, index: int) -> np.ndarray:
        """Symmetric-game payoff matrix over pure tactics"""
        if self.cfg.scheme == 'RSP':
            g, init = self.cfg.game, self.cfg.state
            if not (g.is_symmetric and init.symmetric_play):
                raise ConfigError("symmetric analyses need a symmetric game and a symmetric-play state",
                                  field=f"analyses[{index}]")
            return self.rsp_matrix()
        g = self.bimatrix()
        if not np.allclose(g.payoff_b, g.payoff_a.T, rtol=0.0, atol=1e-12):
            raise ConfigError("symmetric analyses need a symmetric game", field=f"analyses[{index}]")
        return g.payoff_a

    def symmetric_fn(self, index: int) -> SymmetricPayoffFn:
        if self.cfg.scheme == 'EWL':
            ewl_cfg = self.cfg.state

            def batch(xs, ys):
                return ewl_angle_pairs(ewl_cfg, xs, ys)[0]

            def tabulate(xs, ys):
                return ewl_angle_table(ewl_cfg, xs, ys)[0]

            return SymmetricPayoffFn(lambda x, y: float(batch([x], [y])[0]), self.space, batch, tabulate)
        return SymmetricPayoffFn.bilinear(self.pure_matrix(index), self.space)

    def asymmetric_fns(self) -> Tuple[SymmetricPayoffFn, SymmetricPayoffFn]:
        g = self.bimatrix()
        return (SymmetricPayoffFn.bilinear(g.payoff_a, StrategySpace.INTERVAL),
                SymmetricPayoffFn.bilinear(g.payoff_b, StrategySpace.INTERVAL))

    def three_player_fn(self):
        spec, init = self.cfg.game, self.cfg.state
        return lambda x, y, z: mw_payoffs_3(spec, init, x, y, z)[0]

    # Analyses

    def run(self) -> Dict[str, Any]:
        results = []
        for index, analysis in enumerate(self.cfg.analyses):
            handler = getattr(self, f"_analysis_{analysis['kind']}")
            logger.debug(f"{self.cfg.name}: running analysis {index} ({analysis['kind']})")
            result = {'kind': analysis['kind']}
            result.update(handler(index, analysis))
            results.append(result)
        return {
            'name': self.cfg.name,
            'scheme': self.cfg.scheme,
            'config': self.cfg.to_dict(),
            'library_version': LIBRARY_VERSION,
            'grid_step': self.cfg.grid_step,
            'tolerances': dict(self.cfg.tolerances),
            'results': results,
        }

    def _grid(self, analysis: Dict[str, Any]) -> float:
        return analysis.get('grid_step', self.cfg.grid_step)

    def _table(self, index: int, kind: str, rows: np.ndarray) -> None:
        self.tables[f"{self.cfg.name}-{index}-{kind}"] = np.asarray(rows, dtype=float)

    def _payoff_at(self, profile: List[np.ndarray]) -> List[float]:
        scheme, g, state = self.cfg.scheme, self.cfg.game, self.cfg.state
        if scheme == 'EWL':
            return list(ewl_payoffs(state, EWLStrategy(*profile[0]), EWLStrategy(*profile[1])))
        if scheme == 'MW2':
            return list(mw_payoffs_2(g, state, profile[0][0], profile[1][0]))
        if scheme == 'MW3':
            return list(mw_payoffs_3(g, state, *(s[0] for s in profile)))
        if scheme == 'RSP':
            return list(rsp_payoffs(g, state, tuple(profile[0]), tuple(profile[1])))
        return list(mixed_payoff_bimatrix(g, profile[0][0], profile[1][0]))

    def _analysis_payoff(self, index, analysis):
        return {'profile': analysis['profile'], 'payoffs': self._payoff_at(analysis['profile'])}

    def _analysis_ne(self, index, analysis):
        tol, step = self.cfg.tolerances, self._grid(analysis)
        if 'pair' in analysis:
            f_a, f_b = self.asymmetric_fns()
            return check_asymmetric_ne(f_a, f_b, analysis['pair'], step, tol).to_dict()
        if self.cfg.scheme == 'MW3':
            return check_three_player_ess(self.three_player_fn(), analysis['candidate'][0], step, tol).to_dict()
        return check_symmetric_ne(self.symmetric_fn(index), analysis['candidate'], step, tol).to_dict()

    def _analysis_ess(self, index, analysis):
        tol, step = self.cfg.tolerances, self._grid(analysis)
        if 'pair' in analysis:
            f_a, f_b = self.asymmetric_fns()
            return check_asymmetric_ess(f_a, f_b, analysis['pair'], step, tol).to_dict()
        if self.cfg.scheme == 'MW3':
            return check_three_player_ess(self.three_player_fn(), analysis['candidate'][0], step, tol).to_dict()
        return check_symmetric_ess(self.symmetric_fn(index), analysis['candidate'], step, tol).to_dict()

    def _analysis_invasion(self, index, analysis):
        test = (InvasionTest(analysis['mutant'], analysis['epsilons']) if 'epsilons' in analysis
                else InvasionTest(analysis['mutant']))
        result = check_invasion(self.symmetric_fn(index), analysis['candidate'], test, self.cfg.tolerances)
        out = result.to_dict()
        out['all_hold'] = all(result.holds)
        return out

    def _analysis_mutants(self, index, analysis):
        rows = mutant_margins(self.symmetric_fn(index), analysis['candidate'],
                              analysis['mutants'], self.cfg.tolerances)
        return {'candidate': analysis['candidate'], 'mutants': rows,
                'all_resist': all(r['resists'] for r in rows),
                'any_resist': any(r['resists'] for r in rows)}

    def _analysis_ne_scan(self, index, analysis):
        scan = ne_scan(self.symmetric_fn(index), self._grid(analysis), self.cfg.tolerances)
        if scan.points:
            self._table(index, 'ne_scan', np.array(scan.points))
        out = scan.to_dict()
        out['count'] = len(scan.clusters)
        return out

    def _analysis_replicate(self, index, analysis):
        matrix = self.pure_matrix(index)
        out: Dict[str, Any] = {'payoff_matrix': matrix, 'dt': analysis['dt'], 'horizon': analysis['horizon']}
        if 'candidate' in analysis:
            pop = Population(mixture_weights(self.space, analysis['candidate'][None, :])[0])
            probe = stability_probe(pop, matrix, analysis['delta'], analysis['horizon'], analysis['dt'])
            out['probe'] = probe.to_dict()
        if 'start' in analysis:
            pop = Population(mixture_weights(self.space, analysis['start'][None, :])[0])
            trajectory = evolve(pop, matrix, analysis['dt'], analysis['horizon'])
            self._table(index, 'trajectory', trajectory.as_array())
            out['trajectory'] = trajectory.to_dict()
        return out

    def _analysis_equilibria(self, index, analysis):
        found = classical_equilibria_2x2(self.bimatrix())
        out = found.to_dict()
        out['count'] = len(found.equilibria)
        return out

    def _analysis_fitness(self, index, analysis):
        f = self.symmetric_fn(index)
        if 'y' in analysis:
            w_x, w_y = fitness_pair(f, analysis['x'], analysis['y'], analysis['fx'])
            return {'w_x': w_x, 'w_y': w_y, 'advantage': w_x - w_y}
        advantage, witness = fitness_advantage(f, analysis['x'], analysis['fx'], analysis['mutant_step'])
        return {'min_advantage': advantage, 'witness': witness.to_dict() if witness else None,
                'mutant_step': analysis['mutant_step']}

    def _analysis_symmetric_ne(self, index, analysis):
        g, init = self.cfg.game, self.cfg.state
        candidates = mw_symmetric_ne_closed(g, init)
        out = candidates.to_dict()
        try:
            out['thresholds'] = list(pure_ess_thresholds(g))
        except ValueError:
            out['thresholds'] = None
        f = self.symmetric_fn(index)
        step = self._grid(analysis)
        out['ess'] = [check_symmetric_ess(f, [p], step, self.cfg.tolerances).to_dict()
                      for p in candidates.candidates]
        return out

    def _analysis_mixed_roots(self, index, analysis):
        spec, init = self.cfg.game, self.cfg.state
        roots = three_player_mixed_ne(spec, init.bsq)
        f3 = self.three_player_fn()
        grid = np.linspace(0.0, 1.0, FORMULA_GRID)
        residual = 0.0
        for p_star in roots.roots:
            base = f3(p_star, p_star, p_star)
            residual = max(residual, max(abs(base - f3(q, p_star, p_star)) for q in grid))
        out = roots.to_dict()
        out['max_residual'] = residual
        out['pure_ess'] = {'0': three_player_pure_ess(spec, init.bsq, 0),
                           '1': three_player_pure_ess(spec, init.bsq, 1)}
        return out

    def _analysis_gradients(self, index, analysis):
        g, init = self.cfg.game, self.cfg.state
        at = analysis['at']
        grad = rsp_gradients(g, init, tuple(at))
        k = self.rsp_matrix()
        w_b = mixture_weights(StrategySpace.SIMPLEX2, at[None, :])[0]

        def payoff_a(p, p1):
            # Linear extension in Alice's weights, valid off the simplex
            return float(np.array([1 - p - p1, p, p1]) @ k @ w_b)

        fd = [(payoff_a(at[0] + FD_STEP, at[1]) - payoff_a(at[0] - FD_STEP, at[1])) / (2 * FD_STEP),
              (payoff_a(at[0], at[1] + FD_STEP) - payoff_a(at[0], at[1] - FD_STEP)) / (2 * FD_STEP)]
        return {'at': at, 'gradients': list(grad), 'finite_difference': fd,
                'deviation': max(abs(a - b) for a, b in zip(grad, fd)),
                'max_abs': max(abs(v) for v in grad)}

    def _analysis_formula(self, index, analysis):
        handler = getattr(self, f"_formula_{analysis['name']}")
        out = {'name': analysis['name']}
        out.update(handler(analysis))
        return out

    def _formula_pd_case(self, analysis):
        return {'case': analysis['case'],
                'deviations': compare_case_formulas(self.cfg.state, analysis['case'])}

    def _formula_symmetric_closed(self, analysis):
        return {'deviation': closed_form_deviation(self.cfg.state),
                'gamma_sweep_deviation': closed_form_gamma_sweep(self.cfg.game)}

    def _formula_ne_difference(self, analysis):
        if self.cfg.scheme == 'EWL':
            return {'deviations': ne_difference_deviations(self.cfg.state)}
        spec, init = self.cfg.game, self.cfg.state
        f3 = self.three_player_fn()
        grid = np.linspace(0.0, 1.0, FORMULA_GRID)
        deviation = 0.0
        for p_star in grid:
            base = f3(p_star, p_star, p_star)
            for p in grid:
                direct = base - f3(p, p_star, p_star)
                closed = three_player_ne_difference(spec, init.bsq, p_star, p)
                deviation = max(deviation, abs(direct - closed))
        return {'deviation': deviation}

    def _formula_bos_mixed(self, analysis):
        g, init = self.cfg.game, self.cfg.state
        alpha, gamma, beta = g.payoff_a[0, 0], g.payoff_a[0, 1], g.payoff_a[1, 1]
        grid = np.linspace(0.0, 1.0, FORMULA_GRID)

        def residual(p_star, q_star):
            pa, pb = mw_payoffs_2(g, init, p_star, q_star)
            worst = 0.0
            for x in grid:
                worst = max(worst, abs(mw_payoffs_2(g, init, x, q_star)[0] - pa),
                            abs(mw_payoffs_2(g, init, p_star, x)[1] - pb))
            return worst

        corrected = bos_mixed_ne(alpha, beta, gamma, init)
        out = {'corrected': list(corrected), 'corrected_residual': residual(*corrected)}
        if init.pairing is Pairing.ANTI:
            display = bos_anti_display(alpha, beta, gamma, init)
            out['display'] = list(display)
            out['display_residual'] = (residual(*display) if all(0 <= v <= 1 for v in display)
                                       else float('inf'))
        f_a, f_b = self.asymmetric_fns()
        report = check_asymmetric_ess(f_a, f_b, [[corrected[0]], [corrected[1]]],
                                      self.cfg.grid_step, self.cfg.tolerances)
        out['is_ne'] = report.is_ne
        out['is_ess'] = report.is_ess
        return out

    def _formula_asymmetric_differences(self, analysis):
        g, init = self.cfg.game, self.cfg.state
        if init.pairing is not Pairing.DIAGONAL:
            raise ConfigError("asymmetric differences need a DIAGONAL state", field='state.pairing')
        grid = np.linspace(0.0, 1.0, FORMULA_GRID)
        base_a, base_b = mw_payoffs_2(g, init, 0.0, 0.0)
        deviation = 0.0
        for p in grid:
            closed_a, closed_b = mw_asymmetric_ne_differences(g, init.bsq, p, p)
            direct_a = base_a - mw_payoffs_2(g, init, p, 0.0)[0]
            direct_b = base_b - mw_payoffs_2(g, init, 0.0, p)[1]
            deviation = max(deviation, abs(closed_a - direct_a), abs(closed_b - direct_b))
        return {'deviation': deviation}

    def _rsp_preset(self) -> str:
        preset = (self.cfg.raw.get('state') or {}).get('preset')
        if preset not in ('classical', 'entangled'):
            raise ConfigError("closed forms need state.preset 'classical' or 'entangled'",
                              field='state.preset')
        return preset

    def _rsp_epsilon(self) -> float:
        return -float(self.cfg.game.alpha[0, 0])

    def _rsp_grid(self) -> np.ndarray:
        return strategy_grid(StrategySpace.SIMPLEX2, 0.1)

    def _formula_second_condition(self, analysis):
        preset, epsilon = self._rsp_preset(), self._rsp_epsilon()
        g, init = self.cfg.game, self.cfg.state
        p_star = RSP_CENTRE
        deviation = display_deviation = 0.0
        for p, p1 in self._rsp_grid():
            direct = (rsp_payoffs(g, init, p_star, (p, p1))[0]
                      - rsp_payoffs(g, init, (p, p1), (p, p1))[0])
            x, y = p_star[0] - p, p_star[1] - p1
            deviation = max(deviation, abs(direct - rsp_second_condition_closed(epsilon, preset, x, y)))
            display_deviation = max(display_deviation,
                                    abs(direct - rsp_second_condition_display(epsilon, preset, x, y)))
        return {'state': preset, 'deviation': deviation, 'display_deviation': display_deviation}

    def _formula_payoff_sum(self, analysis):
        epsilon = self._rsp_epsilon()
        g, init = self.cfg.game, self.cfg.state
        deviation = 0.0
        grid = self._rsp_grid()
        for a in grid:
            for b in grid:
                pa, pb = rsp_payoffs(g, init, tuple(a), tuple(b))
                expected = -(0.5 * rsp_classical_payoff_sum(epsilon, tuple(a), tuple(b)) + epsilon)
                deviation = max(deviation, abs(pa + pb - expected))
        return {'deviation': deviation, 'pairs': len(grid) ** 2}

    def _formula_factors(self, analysis):
        g, init = self.cfg.game, self.cfg.state
        deviation, omega_ok = 0.0, True
        grid = self._rsp_grid()
        for a in grid:
            for b in grid:
                factors = rsp_payoff_factors(g, init, tuple(a), tuple(b))
                omega_ok &= bool(np.allclose(factors.omega.sum(axis=1), 1.0, atol=1e-12))
                trace = rsp_payoffs(g, init, tuple(a), tuple(b))[0]
                deviation = max(deviation, abs(factors.payoff() - trace))
        return {'deviation': deviation, 'omega_rows_sum_to_one': omega_ok}


def run_scenario(cfg: ScenarioConfig, tables: Optional[Dict[str, np.ndarray]] = None) -> Dict[str, Any]:
    """Report document for one config; CSV-ready arrays go into tables when given"""
    logger.info(f"Running scenario '{cfg.name}' ({cfg.scheme}, {len(cfg.analyses)} analyses)")
    runner = ScenarioRunner(cfg)
    report = _jsonable(runner.run())
    if tables is not None:
        tables.update(runner.tables)
    return report


def dump_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + '\n'


def write_report(report: Dict[str, Any], path: str) -> None:
    try:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(dump_report(report))
    except OSError as e:
        raise IOError(f"Cannot write report {path}: {e}")


def write_csv_tables(tables: Dict[str, np.ndarray], directory: str) -> List[str]:
    """One CSV per table; trajectories get a time,freq_1..freq_n header"""
    written = []
    try:
        os.makedirs(directory, exist_ok=True)
        for name in sorted(tables):
            rows = np.atleast_2d(tables[name])
            if name.endswith('-trajectory'):
                header = ','.join(['time'] + [f"freq_{k}" for k in range(1, rows.shape[1])])
            else:
                header = ','.join(f"x_{k}" for k in range(1, rows.shape[1] + 1))
            path = os.path.join(directory, f"{name}.csv")
            np.savetxt(path, rows, delimiter=',', header=header, comments='')
            written.append(path)
    except OSError as e:
        raise IOError(f"Cannot write CSV tables to {directory}: {e}")
    logger.info(f"Wrote {len(written)} CSV file(s) to {directory}")
    return written
