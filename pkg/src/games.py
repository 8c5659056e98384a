import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEGENERACY_THRESHOLD = 1e-9
VERIFY_GRID_STEP = 1e-3
VERIFY_TOL = 1e-9


def _finite_matrix(values, shape, label) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{label} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{label} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Bimatrix2:
    """2x2 bimatrix game; row/column 0 is strategy S1 (C in the PD)"""
    payoff_a: np.ndarray
    payoff_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'payoff_a', _finite_matrix(self.payoff_a, (2, 2), 'payoff_a'))
        object.__setattr__(self, 'payoff_b', _finite_matrix(self.payoff_b, (2, 2), 'payoff_b'))

    @classmethod
    def from_cells(cls, cells: Sequence[Sequence[Sequence[float]]]) -> 'Bimatrix2':
        """cells[i][j] = (payoff_A, payoff_B)"""
        arr = np.array(cells, dtype=float)
        if arr.shape != (2, 2, 2):
            raise ValueError(f"cells must be 2x2 pairs, got shape {arr.shape}")
        return cls(arr[:, :, 0], arr[:, :, 1])

    @classmethod
    def from_pd_roles(cls, r: float, s: float, t: float, u: float) -> 'Bimatrix2':
        return cls.from_cells([[(r, r), (s, t)], [(t, s), (u, u)]])

    @classmethod
    def symmetric(cls, alpha: float, beta: float, gamma: float, delta: float) -> 'Bimatrix2':
        """[(a,a),(b,c);(c,b),(d,d)]"""
        return cls.from_cells([[(alpha, alpha), (beta, gamma)], [(gamma, beta), (delta, delta)]])

    @classmethod
    def battle_of_sexes(cls, alpha: float, beta: float, gamma: float) -> 'Bimatrix2':
        return cls.from_cells([[(alpha, beta), (gamma, gamma)], [(gamma, gamma), (beta, alpha)]])

    @property
    def cells(self) -> List[List[Tuple[float, float]]]:
        return [[(float(self.payoff_a[i, j]), float(self.payoff_b[i, j])) for j in range(2)]
                for i in range(2)]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.payoff_b, self.payoff_a.T))

    def pd_roles(self) -> Tuple[float, float, float, float]:
        """(r, s, t, u) when the cells follow the (r,r),(s,t);(t,s),(u,u) pattern"""
        a, b = self.payoff_a, self.payoff_b
        r, s, t, u = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
        if not (b[0, 0] == r and b[0, 1] == t and b[1, 0] == s and b[1, 1] == u):
            raise ValueError(f"Game cells do not follow the r,s,t,u pattern: {self.cells}")
        return float(r), float(s), float(t), float(u)

    def symmetric_constants(self) -> Tuple[float, float, float, float]:
        """(alpha, beta, gamma, delta) of a symmetric game"""
        if not self.is_symmetric:
            raise ValueError(f"Game is not symmetric: {self.cells}")
        a = self.payoff_a
        return float(a[0, 0]), float(a[0, 1]), float(a[1, 0]), float(a[1, 1])

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Bimatrix2':
        if 'pd' in data:
            roles = data['pd']
            return cls.from_pd_roles(float(roles['r']), float(roles['s']),
                                     float(roles['t']), float(roles['u']))
        if 'symmetric' in data:
            c = data['symmetric']
            return cls.symmetric(float(c['alpha']), float(c['beta']),
                                 float(c['gamma']), float(c['delta']))
        if 'cells' in data:
            return cls.from_cells(data['cells'])
        raise KeyError("game needs one of 'pd', 'symmetric' or 'cells'")

    def to_dict(self) -> Dict[str, Any]:
        return {'cells': [[list(cell) for cell in row] for row in self.cells]}


@dataclass(frozen=True, eq=False)
class Matrix3x3Pair:
    """Two-player three-strategy game, strategies ordered (R, S, P) for RSP"""
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'alpha', _finite_matrix(self.alpha, (3, 3), 'alpha'))
        object.__setattr__(self, 'beta', _finite_matrix(self.beta, (3, 3), 'beta'))

    @classmethod
    def rsp(cls, epsilon: float) -> 'Matrix3x3Pair':
        """Rock-scissors-paper with draw payoff -epsilon, -1 < epsilon <= 0"""
        if not -1.0 < epsilon <= 0.0:
            raise ValueError(f"RSP epsilon must lie in (-1, 0], got {epsilon!r}")
        alpha = np.array([[-epsilon, 1.0, -1.0],
                          [-1.0, -epsilon, 1.0],
                          [1.0, -1.0, -epsilon]])
        return cls(alpha, alpha.T)

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.alpha, self.beta.T))

    def classical_payoffs(self, x: Sequence[float], y: Sequence[float]) -> Tuple[float, float]:
        """Expected payoffs for distributions x (row player) and y over the three strategies"""
        xv, yv = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return float(xv @ self.alpha @ yv), float(xv @ self.beta @ yv)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Matrix3x3Pair':
        if 'rsp_epsilon' in data:
            return cls.rsp(float(data['rsp_epsilon']))
        return cls(data['alpha'], data['beta'])

    def to_dict(self) -> Dict[str, Any]:
        return {'alpha': self.alpha.tolist(), 'beta': self.beta.tolist()}


@dataclass(frozen=True)
class ThreePlayerSymmetricSpec:
    """Symmetric three-player 2x2x2 game fixed by six constants"""
    alpha1: float
    alpha2: float
    alpha3: float
    alpha5: float
    alpha6: float
    alpha8: float

    def __post_init__(self):
        for name in ('alpha1', 'alpha2', 'alpha3', 'alpha5', 'alpha6', 'alpha8'):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} is not finite: {value!r}")
            object.__setattr__(self, name, value)

    @property
    def sigma(self) -> float:
        return self.alpha1 - self.alpha2

    @property
    def eta(self) -> float:
        return self.alpha3 - self.alpha6

    @property
    def omega(self) -> float:
        return self.alpha5 - self.alpha8

    @classmethod
    def from_reduced(cls, sigma: float, eta: float, omega: float) -> 'ThreePlayerSymmetricSpec':
        """Game with alpha2 = alpha6 = alpha8 = 0 realising the given sigma, eta, omega"""
        return cls(alpha1=sigma, alpha2=0.0, alpha3=eta, alpha5=omega, alpha6=0.0, alpha8=0.0)

    def payoff_tensor(self) -> np.ndarray:
        """T[i, j, k]: payoff to the player choosing i while the others choose j and k"""
        t = np.empty((2, 2, 2))
        t[0, 0, 0] = self.alpha1
        t[1, 0, 0] = self.alpha2
        t[0, 0, 1] = t[0, 1, 0] = self.alpha3
        t[0, 1, 1] = self.alpha5
        t[1, 0, 1] = t[1, 1, 0] = self.alpha6
        t[1, 1, 1] = self.alpha8
        return t

    def classical_payoff(self, p: float, q: float, r: float) -> float:
        """Payoff to the first player when the three play S1 with probabilities p, q, r"""
        px, qx, rx = np.array([p, 1 - p]), np.array([q, 1 - q]), np.array([r, 1 - r])
        return float(np.einsum('ijk,i,j,k->', self.payoff_tensor(), px, qx, rx))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ThreePlayerSymmetricSpec':
        return cls(**{name: float(data[name]) for name in
                      ('alpha1', 'alpha2', 'alpha3', 'alpha5', 'alpha6', 'alpha8')})

    def to_dict(self) -> Dict[str, Any]:
        return {'alpha1': self.alpha1, 'alpha2': self.alpha2, 'alpha3': self.alpha3,
                'alpha5': self.alpha5, 'alpha6': self.alpha6, 'alpha8': self.alpha8}


@dataclass(frozen=True)
class MixedStrategy1:
    p: float

    def __post_init__(self):
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"Probability must lie in [0, 1], got {p!r}")
        object.__setattr__(self, 'p', p)


@dataclass(frozen=True)
class MixedStrategy2:
    """Probabilities (p, p1) of the second and third tactic"""
    p: float
    p1: float

    def __post_init__(self):
        p, p1 = float(self.p), float(self.p1)
        if p < 0.0 or p1 < 0.0 or p + p1 > 1.0 + 1e-12:
            raise ValueError(f"Invalid simplex point (p={p!r}, p1={p1!r})")
        if p + p1 > 1.0:
            # rounding overshoot from grids: rescale onto the p + p1 = 1 edge
            total = p + p1
            p, p1 = p / total, p1 / total
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'p1', p1)

    @property
    def weights(self) -> np.ndarray:
        """(1-p-p1, p, p1)"""
        return np.array([max(0.0, 1.0 - self.p - self.p1), self.p, self.p1])


def probability(x) -> float:
    """Accept MixedStrategy1 or a bare probability"""
    if isinstance(x, MixedStrategy1):
        return x.p
    return MixedStrategy1(x).p


def mixed_payoff_bimatrix(g: Bimatrix2, p, q) -> Tuple[float, float]:
    """(P_A, P_B) when A plays S1 with probability p and B with probability q"""
    x = np.array([probability(p), 1 - probability(p)])
    y = np.array([probability(q), 1 - probability(q)])
    return float(x @ g.payoff_a @ y), float(x @ g.payoff_b @ y)


@dataclass
class EquilibriumSet:
    equilibria: List[Tuple[float, float]] = field(default_factory=list)
    degenerate: bool = False
    rejected: List[Tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'equilibria': [list(pair) for pair in self.equilibria],
            'degenerate': self.degenerate,
            'rejected': [list(pair) for pair in self.rejected],
        }


def _passes_grid_check(g: Bimatrix2, p: float, q: float) -> bool:
    n = int(round(1 / VERIFY_GRID_STEP))
    grid = np.linspace(0.0, 1.0, n + 1)
    pa, pb = mixed_payoff_bimatrix(g, p, q)
    y = np.array([q, 1 - q])
    x = np.array([p, 1 - p])
    rows = np.stack([grid, 1 - grid], axis=1)
    deviations_a = rows @ g.payoff_a @ y
    deviations_b = x @ g.payoff_b @ rows.T
    return bool(np.all(pa - deviations_a >= -VERIFY_TOL) and np.all(pb - deviations_b >= -VERIFY_TOL))


def classical_equilibria_2x2(g: Bimatrix2) -> EquilibriumSet:
    """Pure NE plus the interior mixed NE from indifference conditions.

    Every candidate is re-checked against a deviation grid of step 1e-3.
    p and q are the probabilities of S1.
    """
    a, b = g.payoff_a, g.payoff_b
    result = EquilibriumSet()
    for i in (0, 1):
        for j in (0, 1):
            if a[i, j] >= a[1 - i, j] and b[i, j] >= b[i, 1 - j]:
                result.equilibria.append((1.0 - i, 1.0 - j))

    denom_a = a[0, 0] - a[0, 1] - a[1, 0] + a[1, 1]
    denom_b = b[0, 0] - b[0, 1] - b[1, 0] + b[1, 1]
    if abs(denom_a) < DEGENERACY_THRESHOLD or abs(denom_b) < DEGENERACY_THRESHOLD:
        logger.warning(f"Degenerate 2x2 game (denominators {denom_a}, {denom_b}); pure candidates only")
        result.degenerate = True
    else:
        q_star = (a[1, 1] - a[0, 1]) / denom_a
        p_star = (b[1, 1] - b[1, 0]) / denom_b
        if 0.0 < p_star < 1.0 and 0.0 < q_star < 1.0:
            result.equilibria.append((float(p_star), float(q_star)))

    verified = []
    for p, q in result.equilibria:
        if _passes_grid_check(g, p, q):
            verified.append((p, q))
        else:
            logger.warning(f"Candidate ({p}, {q}) failed the deviation grid check")
            result.rejected.append((p, q))
    result.equilibria = sorted(verified)
    logger.debug(f"Classical equilibria: {result.equilibria}")
    return result
