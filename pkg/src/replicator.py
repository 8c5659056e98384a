import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_HORIZON = 10_000
DEFAULT_DELTA = 0.05
DEFAULT_SAMPLE_EVERY = 100
TOL_SIMPLEX = 1e-12


@dataclass(frozen=True, eq=False)
class Population:
    """Shares of the pure strategies"""
    freqs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.freqs, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError(f"Population must be a non-empty vector, got shape {arr.shape}")
        if np.any(arr < 0):
            raise ValueError(f"Population has negative shares: {arr.tolist()}")
        if abs(arr.sum() - 1.0) > TOL_SIMPLEX:
            raise ValueError(f"Population shares sum to {arr.sum()!r}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, 'freqs', arr)

    @property
    def size(self) -> int:
        return self.freqs.size

    @classmethod
    def vertex(cls, index: int, size: int) -> 'Population':
        freqs = np.zeros(size)
        freqs[index] = 1.0
        return cls(freqs)

    @classmethod
    def uniform(cls, size: int) -> 'Population':
        return cls(np.full(size, 1.0 / size))


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    dt: float = DEFAULT_DT
    horizon: int = DEFAULT_HORIZON

    @property
    def terminal(self) -> Population:
        return Population(self.states[-1])

    def as_array(self) -> np.ndarray:
        """Rows (time, freq_1, ..., freq_n)"""
        return np.column_stack([np.array(self.times), np.array(self.states)])

    def to_dict(self) -> Dict[str, Any]:
        return {'dt': self.dt, 'horizon': self.horizon, 'samples': len(self.times),
                'terminal': self.states[-1].tolist()}


def _velocity(x: np.ndarray, payoff: np.ndarray) -> np.ndarray:
    """x_i [(Ax)_i - x^T A x]"""
    ax = payoff @ x
    return x * (ax - x @ ax)


def _project(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def replicator_step(pop: Population, payoff, dt: float = DEFAULT_DT) -> Population:
    """One fixed-step fourth-order Runge-Kutta step of the replicator equation"""
    a = np.asarray(payoff, dtype=float)
    if dt <= 0:
        raise ValueError(f"Step size must be positive, got {dt!r}")
    if a.shape != (pop.size, pop.size):
        raise ValueError(f"Payoff matrix shape {a.shape} does not match {pop.size} strategies")
    x = pop.freqs
    k1 = _velocity(x, a)
    k2 = _velocity(x + dt / 2 * k1, a)
    k3 = _velocity(x + dt / 2 * k2, a)
    k4 = _velocity(x + dt * k3, a)
    return Population(_project(x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)))


def evolve(pop0: Population, payoff, dt: float = DEFAULT_DT, horizon: int = DEFAULT_HORIZON,
           sample_every: int = DEFAULT_SAMPLE_EVERY) -> Trajectory:
    """Integrate for horizon steps; samples every sample_every steps plus the terminal state"""
    if horizon < 0:
        raise ValueError(f"Horizon must be non-negative, got {horizon!r}")
    trajectory = Trajectory(dt=dt, horizon=horizon)
    pop = pop0
    trajectory.times.append(0.0)
    trajectory.states.append(pop.freqs.copy())
    for step in range(1, horizon + 1):
        pop = replicator_step(pop, payoff, dt)
        if step % sample_every == 0 or step == horizon:
            trajectory.times.append(step * dt)
            trajectory.states.append(pop.freqs.copy())
    logger.debug(f"Evolved {horizon} steps of {dt}: terminal {trajectory.states[-1].tolist()}")
    return trajectory


class ProbeVerdict(enum.Enum):
    RETURNS = 'RETURNS'
    ESCAPES = 'ESCAPES'
    INCONCLUSIVE = 'INCONCLUSIVE'


@dataclass
class ProbeResult:
    verdict: ProbeVerdict
    distances: List[float]
    directions: List[int]
    delta: float

    def to_dict(self) -> Dict[str, Any]:
        return {'verdict': self.verdict.value, 'distances': self.distances,
                'directions': self.directions, 'delta': self.delta}


def _classify(distance: float, delta: float) -> ProbeVerdict:
    if distance < delta / 10:
        return ProbeVerdict.RETURNS
    if distance > 10 * delta:
        return ProbeVerdict.ESCAPES
    return ProbeVerdict.INCONCLUSIVE


def stability_probe(candidate: Population, payoff, delta: float = DEFAULT_DELTA,
                    horizon: int = DEFAULT_HORIZON, dt: float = DEFAULT_DT) -> ProbeResult:
    """Perturb toward each pure strategy by delta, evolve and measure the terminal distance.

    RETURNS only when every direction returns; ESCAPES when any escapes.
    """
    if not 0 < delta <= 0.1:
        raise ValueError(f"Perturbation must lie in (0, 0.1], got {delta!r}")
    x = candidate.freqs
    distances, directions, verdicts = [], [], []
    for i in range(candidate.size):
        target = np.zeros(candidate.size)
        target[i] = 1.0
        if np.allclose(target, x, atol=TOL_SIMPLEX):
            continue
        start = Population(_project((1 - delta) * x + delta * target))
        terminal = evolve(start, payoff, dt, horizon, sample_every=max(horizon, 1)).states[-1]
        distance = float(np.linalg.norm(terminal - x))
        distances.append(distance)
        directions.append(i)
        verdicts.append(_classify(distance, delta))

    if verdicts and all(v is ProbeVerdict.RETURNS for v in verdicts):
        verdict = ProbeVerdict.RETURNS
    elif any(v is ProbeVerdict.ESCAPES for v in verdicts):
        verdict = ProbeVerdict.ESCAPES
    else:
        verdict = ProbeVerdict.INCONCLUSIVE
    logger.debug(f"Probe at {x.tolist()}: {verdict.value} (distances {distances})")
    return ProbeResult(verdict, distances, directions, delta)


def is_rest_point(pop: Population, payoff, tol: float = 1e-8) -> bool:
    """Equal payoffs across the support"""
    a = np.asarray(payoff, dtype=float)
    ax = a @ pop.freqs
    support = pop.freqs > tol
    return bool(np.ptp(ax[support]) <= tol) if support.any() else True


def mixed_population(weights, size: Optional[int] = None) -> Population:
    w = np.asarray(weights, dtype=float)
    if size is not None and w.size != size:
        raise ValueError(f"Expected {size} weights, got {w.size}")
    return Population(_project(w))
