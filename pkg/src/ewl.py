"""
EWL quantization of symmetric 2x2 games.

Players apply U(theta, phi) between the entangling gate J(gamma) and its
inverse. Payoffs are read from projections of the final two-qubit state onto
|CC>, |CD>, |DC>, |DD> (basis index i*2 + j, C = 0, D = 1).
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from games import Bimatrix2
from qmat import StateVector, UnitaryMatrix, tensor

logger = logging.getLogger(__name__)

THETA_MAX = np.pi
PHI_MAX = np.pi / 2
GAMMA_MAX = np.pi / 2
RANGE_SLACK = 1e-12
GAMMA_SWEEP = 11


@dataclass(frozen=True)
class EWLStrategy:
    theta: float
    phi: float = 0.0
    one_parameter: bool = False

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not -RANGE_SLACK <= theta <= THETA_MAX + RANGE_SLACK:
            raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
        if not -RANGE_SLACK <= phi <= PHI_MAX + RANGE_SLACK:
            raise ValueError(f"phi must lie in [0, pi/2], got {phi!r}")
        if self.one_parameter and phi != 0.0:
            raise ValueError(f"One-parameter strategies have phi = 0, got {phi!r}")
        object.__setattr__(self, 'theta', min(max(theta, 0.0), THETA_MAX))
        object.__setattr__(self, 'phi', min(max(phi, 0.0), PHI_MAX))

    @classmethod
    def cooperate(cls) -> 'EWLStrategy':
        return cls(0.0, 0.0)

    @classmethod
    def defect(cls) -> 'EWLStrategy':
        return cls(np.pi, 0.0)

    @classmethod
    def quantum(cls) -> 'EWLStrategy':
        return cls(0.0, np.pi / 2)

    @classmethod
    def from_dict(cls, data: Any) -> 'EWLStrategy':
        if isinstance(data, dict):
            return cls(float(data['theta']), float(data.get('phi', 0.0)),
                       bool(data.get('one_parameter', False)))
        theta, phi = data
        return cls(float(theta), float(phi))

    def to_dict(self) -> Dict[str, Any]:
        return {'theta': self.theta, 'phi': self.phi, 'one_parameter': self.one_parameter}


@dataclass(frozen=True)
class EWLConfig:
    game: Bimatrix2
    gamma: float

    def __post_init__(self):
        gamma = float(self.gamma)
        if not -RANGE_SLACK <= gamma <= GAMMA_MAX + RANGE_SLACK:
            raise ValueError(f"gamma must lie in [0, pi/2], got {gamma!r}")
        object.__setattr__(self, 'gamma', min(max(gamma, 0.0), GAMMA_MAX))
        self.game.pd_roles()

    @property
    def roles(self) -> Tuple[float, float, float, float]:
        return self.game.pd_roles()


def _unitary_entries(theta, phi) -> np.ndarray:
    """Stack of U(theta, phi) matrices, shape (..., 2, 2)"""
    theta, phi = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    u = np.empty(theta.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = np.exp(1j * phi) * c
    u[..., 0, 1] = s
    u[..., 1, 0] = -s
    u[..., 1, 1] = np.exp(-1j * phi) * c
    return u


def strategy_unitary(s: EWLStrategy) -> UnitaryMatrix:
    """[[e^{i phi} cos(theta/2), sin(theta/2)], [-sin(theta/2), e^{-i phi} cos(theta/2)]]"""
    return UnitaryMatrix(_unitary_entries(s.theta, s.phi))


D_HAT = strategy_unitary(EWLStrategy.defect())
C_HAT = strategy_unitary(EWLStrategy.cooperate())
Q_HAT = strategy_unitary(EWLStrategy.quantum())


def entangler(gamma: float) -> UnitaryMatrix:
    """J = exp(i gamma D x D / 2) = cos(gamma/2) I + i sin(gamma/2) D x D, since (D x D)^2 = I"""
    if not -RANGE_SLACK <= gamma <= GAMMA_MAX + RANGE_SLACK:
        raise ValueError(f"gamma must lie in [0, pi/2], got {gamma!r}")
    dd = tensor(D_HAT, D_HAT).entries
    return UnitaryMatrix(np.cos(gamma / 2) * np.eye(4) + 1j * np.sin(gamma / 2) * dd)


def ewl_final_state(cfg: EWLConfig, s_a: EWLStrategy, s_b: EWLStrategy) -> StateVector:
    """J^dagger (U_A x U_B) J |CC>"""
    j = entangler(cfg.gamma)
    local = tensor(strategy_unitary(s_a), strategy_unitary(s_b))
    psi = j.apply(StateVector.basis(0, 4))
    return j.dagger.apply(local.apply(psi))


def _payoff_vectors(cfg: EWLConfig) -> Tuple[np.ndarray, np.ndarray]:
    r, s, t, u = cfg.roles
    return np.array([r, s, t, u]), np.array([r, t, s, u])


def ewl_payoffs(cfg: EWLConfig, s_a: EWLStrategy, s_b: EWLStrategy) -> Tuple[float, float]:
    probs = ewl_final_state(cfg, s_a, s_b).probabilities()
    weights_a, weights_b = _payoff_vectors(cfg)
    return float(probs @ weights_a), float(probs @ weights_b)


def _batched_probabilities(cfg: EWLConfig, u_a: np.ndarray, u_b: np.ndarray) -> np.ndarray:
    """Projection probabilities for broadcast stacks of local unitaries"""
    j = entangler(cfg.gamma).entries
    psi = (j @ np.array([1, 0, 0, 0], dtype=complex)).reshape(2, 2)
    # (U_A x U_B)|psi> in matrix form is U_A psi U_B^T
    mid = u_a @ psi @ np.swapaxes(u_b, -1, -2)
    mid = mid.reshape(mid.shape[:-2] + (4,))
    final = mid @ j.conj()
    return np.abs(final) ** 2


def _angles(strategies: Sequence[EWLStrategy]) -> Tuple[np.ndarray, np.ndarray]:
    return (np.array([s.theta for s in strategies], dtype=float),
            np.array([s.phi for s in strategies], dtype=float))


def _angle_rows(angles) -> np.ndarray:
    rows = np.asarray(angles, dtype=float)
    if rows.size == 0:
        return rows.reshape(0, 2)
    rows = np.atleast_2d(rows)
    if rows.ndim != 2 or rows.shape[1] != 2:
        raise ValueError(f"Expected (theta, phi) rows, got shape {rows.shape}")
    return rows


def _amplitude_tensor(cfg: EWLConfig) -> np.ndarray:
    """T[k, x, y]: final amplitude k = sum T[k, x, y] vec(U_A)[x] vec(U_B)[y]"""
    j = entangler(cfg.gamma).entries
    psi = (j @ np.array([1, 0, 0, 0], dtype=complex)).reshape(2, 2)
    j_out = j.conj().reshape(2, 2, 4)
    return np.einsum('ack,bd->kabcd', j_out, psi).reshape(4, 4, 4)


def ewl_angle_table(cfg: EWLConfig, angles_a, angles_b) -> Tuple[np.ndarray, np.ndarray]:
    """P_A[i, j], P_B[i, j] for (theta, phi) rows angles_a[i] against angles_b[j]"""
    angles_a, angles_b = _angle_rows(angles_a), _angle_rows(angles_b)
    u_a = _unitary_entries(angles_a[:, 0], angles_a[:, 1]).reshape(-1, 4)
    u_b = _unitary_entries(angles_b[:, 0], angles_b[:, 1]).reshape(-1, 4)
    left = np.einsum('kxy,nx->nky', _amplitude_tensor(cfg), u_a).reshape(-1, 4)
    probs = np.abs((left @ u_b.T).reshape(len(u_a), 4, len(u_b))) ** 2
    weights_a, weights_b = _payoff_vectors(cfg)
    return np.einsum('k,nkm->nm', weights_a, probs), np.einsum('k,nkm->nm', weights_b, probs)


def ewl_angle_pairs(cfg: EWLConfig, angles_a, angles_b) -> Tuple[np.ndarray, np.ndarray]:
    """Elementwise payoffs for zip(angles_a, angles_b)"""
    angles_a, angles_b = _angle_rows(angles_a), _angle_rows(angles_b)
    if len(angles_a) != len(angles_b):
        raise ValueError("strategy lists differ in length")
    probs = _batched_probabilities(cfg, _unitary_entries(angles_a[:, 0], angles_a[:, 1]),
                                   _unitary_entries(angles_b[:, 0], angles_b[:, 1]))
    weights_a, weights_b = _payoff_vectors(cfg)
    return probs @ weights_a, probs @ weights_b


def ewl_payoff_table(cfg: EWLConfig, strategies_a: Sequence[EWLStrategy],
                     strategies_b: Sequence[EWLStrategy]) -> Tuple[np.ndarray, np.ndarray]:
    """P_A[i, j], P_B[i, j] for every pair (strategies_a[i], strategies_b[j])"""
    return ewl_angle_table(cfg, np.column_stack(_angles(strategies_a)),
                           np.column_stack(_angles(strategies_b)))


def ewl_payoff_pairs(cfg: EWLConfig, strategies_a: Sequence[EWLStrategy],
                     strategies_b: Sequence[EWLStrategy]) -> Tuple[np.ndarray, np.ndarray]:
    """Elementwise payoffs for zip(strategies_a, strategies_b)"""
    return ewl_angle_pairs(cfg, np.column_stack(_angles(strategies_a)),
                           np.column_stack(_angles(strategies_b)))


def _further_constraint(cfg: EWLConfig) -> Tuple[float, float]:
    r, s, t, u = cfg.roles
    if not (s == t and r == u and r - t > 0):
        raise ValueError(f"Closed form needs s = t, r = u and r > t; got r={r}, s={s}, t={t}, u={u}")
    return r, t


def ewl_symmetric_payoff_closed(cfg: EWLConfig, s_a: EWLStrategy, s_b: EWLStrategy) -> float:
    """(r-t)/2 {1 + cos tA cos tB + sin tA sin tB sin(gamma) sin(pA + pB)} + t"""
    r, t = _further_constraint(cfg)
    bracket = (1 + np.cos(s_a.theta) * np.cos(s_b.theta)
               + np.sin(s_a.theta) * np.sin(s_b.theta) * np.sin(cfg.gamma) * np.sin(s_a.phi + s_b.phi))
    return float(0.5 * (r - t) * bracket + t)


SYMMETRIC_NE = EWLStrategy(np.pi / 2, np.pi / 4)


def ewl_ne_difference_closed(cfg: EWLConfig, s: EWLStrategy) -> float:
    """P(s*, s*) - P(s, s*) for s* = (pi/2, pi/4)"""
    r, t = _further_constraint(cfg)
    return float(0.5 * (r - t) * np.sin(cfg.gamma) * (1 - np.sin(s.phi + np.pi / 4) * np.sin(s.theta)))


def ewl_second_condition_closed(cfg: EWLConfig, s: EWLStrategy) -> float:
    """P(s*, s) - P(s, s) for s* = (pi/2, pi/4)"""
    r, t = _further_constraint(cfg)
    inner = np.sin(s.phi + np.pi / 4) - np.sin(s.theta) * np.sin(2 * s.phi)
    return float(0.5 * (r - t) * (-np.cos(s.theta) ** 2 + np.sin(cfg.gamma) * np.sin(s.theta) * inner))


def ewl_second_condition_display(cfg: EWLConfig, s: EWLStrategy) -> float:
    """The published display, whose first term lacks the factor 1/2"""
    r, t = _further_constraint(cfg)
    inner = np.sin(s.phi + np.pi / 4) - np.sin(s.theta) * np.sin(2 * s.phi)
    return float(-(r - t) * np.cos(s.theta) ** 2
                 + 0.5 * (r - t) * np.sin(cfg.gamma) * np.sin(s.theta) * inner)


# Closed-form displays of the prisoner's dilemma cases, r=3, s=0, t=5, u=1,
# at maximal entanglement. Each entry: (A's strategy, B's strategy, value).
Formula = Tuple[Callable[[float, float], EWLStrategy], Callable[[float, float], EWLStrategy],
                Callable[[float, float], float]]


def _u(theta, phi):
    return EWLStrategy(theta, phi)


def _d(theta, phi):
    return EWLStrategy.defect()


def _q(theta, phi):
    return EWLStrategy.quantum()


def _c2(theta):
    return np.cos(theta / 2) ** 2


def _s2(theta):
    return np.sin(theta / 2) ** 2


PD_CASE_FORMULAS: Dict[str, Dict[str, Formula]] = {
    'a': {
        'U_vs_D': (_u, _d, lambda th, ph: _s2(th)),
        'D_vs_U': (_d, _u, lambda th, ph: 5 * _c2(th) + _s2(th)),
        'D_vs_D': (_d, _d, lambda th, ph: 1.0),
        'U_vs_U': (_u, _u, lambda th, ph: 3 * _c2(th) ** 2 + 5 * _c2(th) * _s2(th) + _s2(th) ** 2),
        'U_vs_U_display': (_u, _u, lambda th, ph: 2 * _c2(th) + 5 * _c2(th) * _s2(th) + 1),
    },
    'b': {
        'D_vs_U': (_d, _u, lambda th, ph: 5 * _c2(th) * np.cos(ph) ** 2 + _s2(th)),
        'U_vs_D': (_u, _d, lambda th, ph: 5 * _c2(th) * np.sin(ph) ** 2 + _s2(th)),
        'U_vs_U': (_u, _u, lambda th, ph: (3 * (np.cos(2 * ph) * _c2(th)) ** 2
                                           + 5 * _c2(th) * _s2(th) * (np.sin(ph) - np.cos(ph)) ** 2
                                           + (np.sin(2 * ph) * _c2(th) + _s2(th)) ** 2)),
    },
    'c': {
        'U_vs_Q': (_u, _q, lambda th, ph: _c2(th) * (3 - 2 * np.cos(ph) ** 2)),
        'Q_vs_U': (_q, _u, lambda th, ph: _c2(th) * (3 - 2 * np.cos(ph) ** 2) + 5 * _s2(th)),
        'Q_vs_Q': (_q, _q, lambda th, ph: 3.0),
    },
}

# Displays known to disagree with the simulator
PD_DISPLAY_DISCREPANCIES = {('a', 'U_vs_U_display')}


def compare_case_formulas(cfg: EWLConfig, case: str, n_theta: int = 101,
                          n_phi: int = 51) -> Dict[str, float]:
    """Max |display - simulated P_A| per formula over a theta (x phi) grid.

    Case 'a' uses one-parameter strategies (phi = 0).
    """
    if case not in PD_CASE_FORMULAS:
        raise ValueError(f"Unknown case {case!r}; expected one of {sorted(PD_CASE_FORMULAS)}")
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.array([0.0]) if case == 'a' else np.linspace(0.0, np.pi / 2, n_phi)
    points = [(th, ph) for th in thetas for ph in phis]
    deviations = {}
    for name, (build_a, build_b, display) in PD_CASE_FORMULAS[case].items():
        sa = [build_a(th, ph) for th, ph in points]
        sb = [build_b(th, ph) for th, ph in points]
        simulated, _ = ewl_payoff_pairs(cfg, sa, sb)
        expected = np.array([display(th, ph) for th, ph in points], dtype=float)
        deviations[name] = float(np.max(np.abs(simulated - expected)))
        if (case, name) in PD_DISPLAY_DISCREPANCIES and deviations[name] > 1e-9:
            logger.warning(f"Case ({case}) display {name} deviates from the simulator by {deviations[name]:.3g}")
    return deviations


def grid_strategies(n: int) -> List[EWLStrategy]:
    """n x n grid over [0, pi] x [0, pi/2]"""
    return [EWLStrategy(th, ph) for th in np.linspace(0.0, np.pi, n)
            for ph in np.linspace(0.0, np.pi / 2, n)]


def closed_form_deviation(cfg: EWLConfig, n: int = 21) -> float:
    """Max |closed form - simulator| over all strategy pairs of an n x n angle grid"""
    r, t = _further_constraint(cfg)
    strategies = grid_strategies(n)
    simulated, _ = ewl_payoff_table(cfg, strategies, strategies)
    theta, phi = _angles(strategies)
    bracket = (1 + np.cos(theta)[:, None] * np.cos(theta)[None, :]
               + np.sin(theta)[:, None] * np.sin(theta)[None, :] * np.sin(cfg.gamma)
               * np.sin(phi[:, None] + phi[None, :]))
    closed = 0.5 * (r - t) * bracket + t
    return float(np.max(np.abs(simulated - closed)))


def closed_form_gamma_sweep(game: Bimatrix2, n: int = 21, n_gamma: int = GAMMA_SWEEP) -> float:
    """closed_form_deviation maximized over n_gamma evenly spaced gamma in [0, pi/2]"""
    deviations = [closed_form_deviation(EWLConfig(game, gamma), n)
                  for gamma in np.linspace(0.0, GAMMA_MAX, n_gamma)]
    logger.debug(f"Closed form checked at {n_gamma} gamma values, max deviation {max(deviations):.3e}")
    return float(max(deviations))


def ne_difference_deviations(cfg: EWLConfig, n: int = 21) -> Dict[str, float]:
    """Simulated NE and second-condition differences at s* against their closed forms"""
    strategies = grid_strategies(n)
    star = [SYMMETRIC_NE]
    pa_star_star = ewl_payoffs(cfg, SYMMETRIC_NE, SYMMETRIC_NE)[0]
    pa_mut_star, _ = ewl_payoff_table(cfg, strategies, star)
    pa_star_mut, _ = ewl_payoff_table(cfg, star, strategies)
    pa_mut_mut, _ = ewl_payoff_pairs(cfg, strategies, strategies)
    ne_diff = pa_star_star - pa_mut_star[:, 0]
    second = pa_star_mut[0, :] - pa_mut_mut
    ne_closed = np.array([ewl_ne_difference_closed(cfg, s) for s in strategies])
    second_closed = np.array([ewl_second_condition_closed(cfg, s) for s in strategies])
    second_display = np.array([ewl_second_condition_display(cfg, s) for s in strategies])
    return {
        'ne_difference': float(np.max(np.abs(ne_diff - ne_closed))),
        'ne_difference_min': float(np.min(ne_diff)),
        'second_condition': float(np.max(np.abs(second - second_closed))),
        'second_condition_display': float(np.max(np.abs(second - second_display))),
    }
