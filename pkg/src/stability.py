"""
NE and ESS certification over abstract payoff functions.

A payoff function P(x, y) gives the payoff to an x-player against a y-player.
"For all mutants" is checked on a finite strategy grid plus a local
refinement around the candidate and the worst mutant; reports carry the grid
step used.
"""
import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

TOL_NE = 1e-9
TOL_EQ = 1e-9
TOL_STRICT = 1e-9
DEFAULT_GRID_STEP = 1e-2
REFINE_GRID_STEP = 1e-3
REFINE_BELOW = 1e-4
SNAP_TOL = 1e-12
BEST_REPLY_CHUNK = 128


class UnsupportedSpaceError(ValueError):
    """Raised when an operation needs convex mixing the strategy space lacks"""


class StrategySpace(enum.Enum):
    INTERVAL = 'INTERVAL'
    SIMPLEX2 = 'SIMPLEX2'
    EWL_RECT = 'EWL_RECT'

    @property
    def scale(self) -> np.ndarray:
        """Natural coordinates divided by scale lie in the unit box"""
        if self is StrategySpace.EWL_RECT:
            return np.array([np.pi, np.pi / 2])
        if self is StrategySpace.SIMPLEX2:
            return np.array([1.0, 1.0])
        return np.array([1.0])

    @property
    def dim(self) -> int:
        return 1 if self is StrategySpace.INTERVAL else 2


class EssStatus(enum.Enum):
    ESS = 'ESS'
    NE_NOT_ESS = 'NE_NOT_ESS'
    NOT_NE = 'NOT_NE'


Tolerances = Dict[str, float]


def default_tolerances() -> Tolerances:
    return {'tol_ne': TOL_NE, 'tol_eq': TOL_EQ, 'tol_strict': TOL_STRICT}


def as_point(space: StrategySpace, x) -> np.ndarray:
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if point.shape != (space.dim,):
        raise ValueError(f"Strategy {x!r} does not fit space {space.value}")
    return point


def _in_space(space: StrategySpace, u: np.ndarray) -> np.ndarray:
    """Mask of normalized points inside the space"""
    inside = np.all((u >= -SNAP_TOL) & (u <= 1 + SNAP_TOL), axis=-1)
    if space is StrategySpace.SIMPLEX2:
        inside &= u.sum(axis=-1) <= 1 + SNAP_TOL
    return inside


def _grid_size(step: float) -> int:
    if not 0 < step <= 1:
        raise ValueError(f"Grid step must lie in (0, 1], got {step!r}")
    return int(round(1 / step))


def strategy_grid(space: StrategySpace, step: float = DEFAULT_GRID_STEP) -> np.ndarray:
    """All grid strategies in natural coordinates, shape (m, dim).

    n = round(1/step) subdivisions per axis; SIMPLEX2 keeps i + j <= n.
    """
    n = _grid_size(step)
    axis = np.arange(n + 1) / n
    if space is StrategySpace.INTERVAL:
        return axis[:, None]
    uu, vv = np.meshgrid(axis, axis, indexing='ij')
    u = np.stack([uu.ravel(), vv.ravel()], axis=1)
    if space is StrategySpace.SIMPLEX2:
        ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing='ij')
        u = u[(ii + jj).ravel() <= n]
    return u * space.scale


def refine_grid(space: StrategySpace, centre, radius: float,
                step: float = REFINE_GRID_STEP) -> np.ndarray:
    """Local grid of the given normalized step within +-radius of centre"""
    c = as_point(space, centre) / space.scale
    offsets = np.arange(-radius, radius + step / 2, step)
    axes = [np.clip(ci + offsets, 0.0, 1.0) for ci in c]
    mesh = np.meshgrid(*axes, indexing='ij')
    u = np.unique(np.stack([m.ravel() for m in mesh], axis=1), axis=0)
    u = u[_in_space(space, u)]
    return u * space.scale


def same_strategy(space: StrategySpace, x, y) -> bool:
    """Coordinate match after snapping; on EWL_RECT every theta = pi point is D"""
    ux, uy = as_point(space, x) / space.scale, as_point(space, y) / space.scale
    if space is StrategySpace.EWL_RECT and abs(ux[0] - 1) < SNAP_TOL and abs(uy[0] - 1) < SNAP_TOL:
        return True
    return bool(np.all(np.abs(ux - uy) < SNAP_TOL))


def _exclude(space: StrategySpace, points: np.ndarray, x) -> np.ndarray:
    keep = np.array([not same_strategy(space, p, x) for p in points], dtype=bool)
    return points[keep]


def mixture_weights(space: StrategySpace, points: np.ndarray) -> np.ndarray:
    """Pure-strategy weights: INTERVAL (p, 1-p); SIMPLEX2 (1-p-p1, p, p1)"""
    pts = np.atleast_2d(points)
    if space is StrategySpace.INTERVAL:
        return np.stack([pts[:, 0], 1 - pts[:, 0]], axis=1)
    if space is StrategySpace.SIMPLEX2:
        rest = np.clip(1 - pts[:, 0] - pts[:, 1], 0.0, None)
        return np.stack([rest, pts[:, 0], pts[:, 1]], axis=1)
    raise UnsupportedSpaceError("EWL_RECT strategies have no pure-strategy weights")


@dataclass
class SymmetricPayoffFn:
    """P(x, y) on a strategy space.

    batch, when given, evaluates elementwise pairs: batch(xs, ys)[k] = P(xs[k], ys[k]).
    tabulate, when given, evaluates the full table: tabulate(xs, ys)[i, j] = P(xs[i], ys[j]).
    """
    evaluate: Callable[[np.ndarray, np.ndarray], float]
    space: StrategySpace
    batch: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    tabulate: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __call__(self, x, y) -> float:
        return float(self.evaluate(as_point(self.space, x), as_point(self.space, y)))

    def pairs(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        xs, ys = np.atleast_2d(xs), np.atleast_2d(ys)
        xs, ys = np.broadcast_arrays(xs, ys)
        if self.batch is not None:
            return np.asarray(self.batch(xs, ys), dtype=float)
        return np.array([self.evaluate(x, y) for x, y in zip(xs, ys)], dtype=float)

    def table(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """T[i, j] = P(xs[i], ys[j])"""
        xs, ys = np.atleast_2d(xs), np.atleast_2d(ys)
        if self.tabulate is not None:
            return np.asarray(self.tabulate(xs, ys), dtype=float).reshape(len(xs), len(ys))
        rows = np.repeat(xs, len(ys), axis=0)
        cols = np.tile(ys, (len(xs), 1))
        return self.pairs(rows, cols).reshape(len(xs), len(ys))

    def best_replies(self, mutants: np.ndarray, incumbents: np.ndarray,
                     chunk: int = BEST_REPLY_CHUNK) -> np.ndarray:
        """max over mutants y of P(y, x) for each incumbent x, tabulated chunk columns at a time"""
        mutants, incumbents = np.atleast_2d(mutants), np.atleast_2d(incumbents)
        best = np.empty(len(incumbents))
        for start in range(0, len(incumbents), chunk):
            best[start:start + chunk] = self.table(mutants, incumbents[start:start + chunk]).max(axis=0)
        return best

    @classmethod
    def bilinear(cls, matrix, space: StrategySpace) -> 'SymmetricPayoffFn':
        """w(x)^T M w(y) over the pure-strategy weights of the space"""
        m = np.asarray(matrix, dtype=float)

        def batch(xs, ys):
            wx, wy = mixture_weights(space, xs), mixture_weights(space, ys)
            return np.einsum('ki,ij,kj->k', wx, m, wy)

        def tabulate(xs, ys):
            return mixture_weights(space, xs) @ m @ mixture_weights(space, ys).T

        def evaluate(x, y):
            return float(batch(np.atleast_2d(x), np.atleast_2d(y))[0])

        return cls(evaluate, space, batch, tabulate)


@dataclass
class Witness:
    strategy: List[float]
    margin: float

    def to_dict(self) -> Dict[str, Any]:
        return {'strategy': self.strategy, 'margin': self.margin}


@dataclass
class EquilibriumReport:
    candidate: List[float]
    is_ne: bool
    ne_margin: float
    is_strict: bool
    ess_status: Optional[EssStatus]
    witness: Optional[Witness]
    grid_step: float
    refined: bool = False
    mutants_checked: int = 0

    def __post_init__(self):
        if self.ess_status is EssStatus.ESS and not self.is_ne:
            raise ValueError("An ESS verdict requires the candidate to be a NE")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'candidate': self.candidate,
            'is_ne': self.is_ne,
            'ne_margin': self.ne_margin,
            'is_strict': self.is_strict,
            'ess_status': self.ess_status.value if self.ess_status else None,
            'witness': self.witness.to_dict() if self.witness else None,
            'grid_step': self.grid_step,
            'refined': self.refined,
            'mutants_checked': self.mutants_checked,
        }


def _tol(tolerances: Optional[Tolerances], key: str) -> float:
    merged = default_tolerances()
    merged.update(tolerances or {})
    return float(merged[key])


def _with_refinement(space: StrategySpace, x, mutants: np.ndarray, worst: np.ndarray,
                     grid_step: float) -> np.ndarray:
    local = [refine_grid(space, x, grid_step), refine_grid(space, worst, grid_step)]
    combined = np.concatenate([mutants] + local, axis=0)
    return _exclude(space, np.unique(combined, axis=0), x)


def _ne_margins(f: SymmetricPayoffFn, x: np.ndarray, mutants: np.ndarray) -> np.ndarray:
    """P(x, x) - P(y, x) per mutant y"""
    return f(x, x) - f.pairs(mutants, x[None, :])


def check_symmetric_ne(f: SymmetricPayoffFn, x, grid_step: float = DEFAULT_GRID_STEP,
                       tolerances: Optional[Tolerances] = None) -> EquilibriumReport:
    """First ESS condition over the mutant grid.

    ess_status is NOT_NE for a violated NE, ESS for a strict NE, else None.
    """
    x = as_point(f.space, x)
    tol_ne, tol_strict = _tol(tolerances, 'tol_ne'), _tol(tolerances, 'tol_strict')
    mutants = _exclude(f.space, strategy_grid(f.space, grid_step), x)
    margins = _ne_margins(f, x, mutants)
    refined = False
    if margins.size and margins.min() < REFINE_BELOW:
        mutants = _with_refinement(f.space, x, mutants, mutants[int(np.argmin(margins))], grid_step)
        margins = _ne_margins(f, x, mutants)
        refined = True
    if not margins.size:
        return EquilibriumReport(x.tolist(), True, float('inf'), True, EssStatus.ESS, None, grid_step)

    worst = int(np.argmin(margins))
    ne_margin = float(margins[worst])
    is_ne = ne_margin >= -tol_ne
    is_strict = ne_margin > tol_strict
    status = EssStatus.NOT_NE if not is_ne else (EssStatus.ESS if is_strict else None)
    logger.debug(f"NE check at {x.tolist()}: margin {ne_margin:.3g} over {len(mutants)} mutants")
    return EquilibriumReport(x.tolist(), is_ne, ne_margin, is_strict, status,
                             Witness(mutants[worst].tolist(), ne_margin), grid_step,
                             refined, len(mutants))


def _ess_scores(f: SymmetricPayoffFn, x: np.ndarray, mutants: np.ndarray,
                tol_eq: float) -> Tuple[np.ndarray, np.ndarray]:
    """(first-condition margins, per-mutant score); score > tol_strict means the mutant is repelled"""
    first = _ne_margins(f, x, mutants)
    second = f.pairs(np.broadcast_to(x, mutants.shape), mutants) - f.pairs(mutants, mutants)
    scores = np.where(np.abs(first) <= tol_eq, second, first)
    return first, scores


def check_symmetric_ess(f: SymmetricPayoffFn, x, grid_step: float = DEFAULT_GRID_STEP,
                        tolerances: Optional[Tolerances] = None) -> EquilibriumReport:
    """ESS if every grid mutant y either earns strictly less against x, or ties
    against x and earns strictly less against itself than x does."""
    x = as_point(f.space, x)
    tol_ne = _tol(tolerances, 'tol_ne')
    tol_eq = _tol(tolerances, 'tol_eq')
    tol_strict = _tol(tolerances, 'tol_strict')
    mutants = _exclude(f.space, strategy_grid(f.space, grid_step), x)
    first, scores = _ess_scores(f, x, mutants, tol_eq)
    refined = False
    if scores.size and scores.min() < REFINE_BELOW:
        mutants = _with_refinement(f.space, x, mutants, mutants[int(np.argmin(scores))], grid_step)
        first, scores = _ess_scores(f, x, mutants, tol_eq)
        refined = True
    if not scores.size:
        return EquilibriumReport(x.tolist(), True, float('inf'), True, EssStatus.ESS, None, grid_step)

    ne_margin = float(first.min())
    is_ne = ne_margin >= -tol_ne
    is_strict = ne_margin > tol_strict
    worst = int(np.argmin(scores))
    if not is_ne:
        status = EssStatus.NOT_NE
        worst = int(np.argmin(first))
    elif scores[worst] > tol_strict:
        status = EssStatus.ESS
    else:
        status = EssStatus.NE_NOT_ESS
    witness = Witness(mutants[worst].tolist(), float(first[worst] if not is_ne else scores[worst]))
    logger.debug(f"ESS check at {x.tolist()}: {status.value} over {len(mutants)} mutants")
    return EquilibriumReport(x.tolist(), is_ne, ne_margin, is_strict, status, witness,
                             grid_step, refined, len(mutants))


@dataclass
class InvasionTest:
    mutant: Sequence[float]
    epsilon_grid: Sequence[float] = field(
        default_factory=lambda: [0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001])

    def __post_init__(self):
        eps = [float(e) for e in self.epsilon_grid]
        if not eps or any(not 0.0 < e < 1.0 for e in eps):
            raise ValueError(f"Invasion shares must lie in (0, 1), got {eps}")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ValueError(f"Invasion shares must be strictly decreasing, got {eps}")
        self.epsilon_grid = eps


@dataclass
class InvasionResult:
    mutant: List[float]
    epsilons: List[float]
    holds: List[bool]
    barrier: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {'mutant': self.mutant, 'epsilons': self.epsilons,
                'holds': self.holds, 'barrier': self.barrier}


def check_invasion(f: SymmetricPayoffFn, x, test: InvasionTest,
                   tolerances: Optional[Tolerances] = None) -> InvasionResult:
    """P[x, (1-e)x + e y] > P[y, (1-e)x + e y] per share e, using linearity in the second argument.

    barrier is the largest grid share below which every grid share resists the mutant.
    """
    if f.space is StrategySpace.EWL_RECT:
        raise UnsupportedSpaceError("EWL_RECT has no convex mixture of strategies")
    x, y = as_point(f.space, x), as_point(f.space, test.mutant)
    if same_strategy(f.space, x, y):
        raise ValueError(f"Mutant must differ from the incumbent {x.tolist()}")
    tol_strict = _tol(tolerances, 'tol_strict')
    p_xx, p_xy, p_yx, p_yy = f(x, x), f(x, y), f(y, x), f(y, y)
    holds = []
    for eps in test.epsilon_grid:
        incumbent = (1 - eps) * p_xx + eps * p_xy
        mutant = (1 - eps) * p_yx + eps * p_yy
        holds.append(bool(incumbent - mutant > tol_strict))

    barrier = None
    for eps, ok in zip(reversed(test.epsilon_grid), reversed(holds)):
        if not ok:
            break
        barrier = eps
    return InvasionResult(y.tolist(), list(test.epsilon_grid), holds, barrier)


@dataclass
class AsymmetricReport:
    pair: List[List[float]]
    is_ne: bool
    is_ess: bool
    margin_a: float
    margin_b: float
    witness_a: Optional[Witness]
    witness_b: Optional[Witness]
    grid_step: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'pair': self.pair, 'is_ne': self.is_ne, 'is_ess': self.is_ess,
            'margin_a': self.margin_a, 'margin_b': self.margin_b,
            'witness_a': self.witness_a.to_dict() if self.witness_a else None,
            'witness_b': self.witness_b.to_dict() if self.witness_b else None,
            'grid_step': self.grid_step,
        }


def _one_sided(f: SymmetricPayoffFn, own, other, row_player: bool,
               grid_step: float) -> Tuple[float, Optional[Witness]]:
    """Smallest gain from staying at own against other over the deviation grid"""
    own, other = as_point(f.space, own), as_point(f.space, other)

    def margins(points):
        if row_player:
            return f(own, other) - f.pairs(points, other[None, :])
        return f(other, own) - f.pairs(other[None, :], points)

    deviations = _exclude(f.space, strategy_grid(f.space, grid_step), own)
    values = margins(deviations)
    if values.size and values.min() < REFINE_BELOW:
        deviations = _with_refinement(f.space, own, deviations,
                                      deviations[int(np.argmin(values))], grid_step)
        values = margins(deviations)
    if not values.size:
        return float('inf'), None
    worst = int(np.argmin(values))
    return float(values[worst]), Witness(deviations[worst].tolist(), float(values[worst]))


def check_asymmetric_ne(f_a: SymmetricPayoffFn, f_b: SymmetricPayoffFn, pair,
                        grid_step: float = DEFAULT_GRID_STEP,
                        tolerances: Optional[Tolerances] = None) -> AsymmetricReport:
    """One-sided deviation checks for both players.

    f_a(x, y) and f_b(x, y) are the payoffs to A and B when A plays x and B plays y.
    """
    x, y = pair
    tol_ne, tol_strict = _tol(tolerances, 'tol_ne'), _tol(tolerances, 'tol_strict')
    margin_a, witness_a = _one_sided(f_a, x, y, True, grid_step)
    margin_b, witness_b = _one_sided(f_b, y, x, False, grid_step)
    is_ne = margin_a >= -tol_ne and margin_b >= -tol_ne
    is_ess = margin_a > tol_strict and margin_b > tol_strict
    logger.debug(f"Asymmetric check at ({x}, {y}): margins {margin_a:.3g}, {margin_b:.3g}")
    return AsymmetricReport([as_point(f_a.space, x).tolist(), as_point(f_b.space, y).tolist()],
                            is_ne, is_ess, margin_a, margin_b, witness_a, witness_b, grid_step)


def check_asymmetric_ess(f_a: SymmetricPayoffFn, f_b: SymmetricPayoffFn, pair,
                         grid_step: float = DEFAULT_GRID_STEP,
                         tolerances: Optional[Tolerances] = None) -> AsymmetricReport:
    """An ESS of an asymmetric game is a strict NE"""
    return check_asymmetric_ne(f_a, f_b, pair, grid_step, tolerances)


def check_three_player_ess(f3: Callable[[float, float, float], float], p: float,
                           grid_step: float = DEFAULT_GRID_STEP,
                           tolerances: Optional[Tolerances] = None) -> EquilibriumReport:
    """P(p,p,p) > P(q,p,p) for every mutant q, or a tie and P(p,q,p) > P(q,q,p)"""
    tol_ne = _tol(tolerances, 'tol_ne')
    tol_eq = _tol(tolerances, 'tol_eq')
    tol_strict = _tol(tolerances, 'tol_strict')
    space = StrategySpace.INTERVAL
    x = as_point(space, p)
    p = float(x[0])

    def scores_for(mutants):
        qs = mutants[:, 0]
        base = f3(p, p, p)
        first = np.array([base - f3(q, p, p) for q in qs])
        second = np.array([f3(p, q, p) - f3(q, q, p) for q in qs])
        return first, np.where(np.abs(first) <= tol_eq, second, first)

    mutants = _exclude(space, strategy_grid(space, grid_step), x)
    first, scores = scores_for(mutants)
    refined = False
    if scores.min() < REFINE_BELOW:
        mutants = _with_refinement(space, x, mutants, mutants[int(np.argmin(scores))], grid_step)
        first, scores = scores_for(mutants)
        refined = True

    ne_margin = float(first.min())
    is_ne = ne_margin >= -tol_ne
    worst = int(np.argmin(first)) if not is_ne else int(np.argmin(scores))
    if not is_ne:
        status = EssStatus.NOT_NE
    elif scores[worst] > tol_strict:
        status = EssStatus.ESS
    else:
        status = EssStatus.NE_NOT_ESS
    margin = float(first[worst] if not is_ne else scores[worst])
    logger.debug(f"Three-player ESS check at p={p}: {status.value}")
    return EquilibriumReport([p], is_ne, ne_margin, ne_margin > tol_strict, status,
                             Witness(mutants[worst].tolist(), margin), grid_step,
                             refined, len(mutants))


def fitness_pair(f: SymmetricPayoffFn, x, y, fx: float) -> Tuple[float, float]:
    """W(x) = P(x,x)Fx + P(x,y)Fy and W(y) = P(y,x)Fx + P(y,y)Fy with Fy = 1 - Fx"""
    if not 0.0 <= fx <= 1.0:
        raise ValueError(f"Frequency must lie in [0, 1], got {fx!r}")
    fy = 1.0 - fx
    return f(x, x) * fx + f(x, y) * fy, f(y, x) * fx + f(y, y) * fy


def fitness_advantage(f: SymmetricPayoffFn, x, fx: float,
                      grid_step: float = DEFAULT_GRID_STEP) -> Tuple[float, Optional[Witness]]:
    """Smallest W(x) - W(y) over grid mutants y when x has frequency fx"""
    x = as_point(f.space, x)
    if not 0.0 <= fx <= 1.0:
        raise ValueError(f"Frequency must lie in [0, 1], got {fx!r}")
    mutants = _exclude(f.space, strategy_grid(f.space, grid_step), x)
    if not len(mutants):
        return float('inf'), None
    xs = np.broadcast_to(x, mutants.shape)
    w_x = f(x, x) * fx + f.pairs(xs, mutants) * (1 - fx)
    w_y = f.pairs(mutants, xs) * fx + f.pairs(mutants, mutants) * (1 - fx)
    advantage = w_x - w_y
    worst = int(np.argmin(advantage))
    return float(advantage[worst]), Witness(mutants[worst].tolist(), float(advantage[worst]))


def mutant_margins(f: SymmetricPayoffFn, x, mutants: Sequence,
                   tolerances: Optional[Tolerances] = None) -> List[Dict[str, Any]]:
    """Both ESS conditions of x against each listed mutant"""
    tol_eq, tol_strict = _tol(tolerances, 'tol_eq'), _tol(tolerances, 'tol_strict')
    x = as_point(f.space, x)
    rows = []
    for y in mutants:
        y = as_point(f.space, y)
        first = f(x, x) - f(y, x)
        second = f(x, y) - f(y, y)
        resists = first > tol_strict or (abs(first) <= tol_eq and second > tol_strict)
        rows.append({'mutant': y.tolist(), 'first': first, 'second': second, 'resists': resists})
    return rows


@dataclass
class NEScan:
    points: List[List[float]]
    clusters: List[List[List[float]]]
    degenerate: bool
    grid_step: float

    @property
    def representatives(self) -> List[List[float]]:
        return [cluster[0] for cluster in self.clusters]

    def to_dict(self) -> Dict[str, Any]:
        return {'points': self.points, 'clusters': self.clusters,
                'representatives': self.representatives,
                'degenerate': self.degenerate, 'grid_step': self.grid_step}


def _clusters(indices: np.ndarray) -> List[List[int]]:
    """Group grid index tuples whose Chebyshev distance is 1"""
    lookup = {tuple(idx): k for k, idx in enumerate(indices)}
    seen, groups = set(), []
    for start in range(len(indices)):
        if start in seen:
            continue
        seen.add(start)
        group, queue = [], deque([start])
        while queue:
            k = queue.popleft()
            group.append(k)
            for offset in np.ndindex(*(3,) * indices.shape[1]):
                neighbour = tuple(indices[k] + np.array(offset) - 1)
                other = lookup.get(neighbour)
                if other is not None and other not in seen:
                    seen.add(other)
                    queue.append(other)
        groups.append(sorted(group))
    return groups


def ne_scan(f: SymmetricPayoffFn, grid_step: float = DEFAULT_GRID_STEP,
            tolerances: Optional[Tolerances] = None) -> NEScan:
    """Grid points x with P(x, x) >= max_y P(y, x) - tol_ne, clustered by grid adjacency"""
    tol_ne = _tol(tolerances, 'tol_ne')
    grid = strategy_grid(f.space, grid_step)
    best_reply = f.best_replies(grid, grid)
    is_ne = f.pairs(grid, grid) >= best_reply - tol_ne
    n = _grid_size(grid_step)
    ne_points = grid[is_ne]
    indices = np.rint(ne_points / f.space.scale * n).astype(int)
    groups = _clusters(indices) if len(indices) else []
    clusters = [[ne_points[k].tolist() for k in group] for group in groups]
    degenerate = bool(is_ne.all())
    if degenerate:
        logger.warning(f"Every one of {len(grid)} grid points is a symmetric NE")
    logger.debug(f"NE scan: {int(is_ne.sum())} points in {len(clusters)} clusters")
    return NEScan(ne_points.tolist(), clusters, degenerate, grid_step)
