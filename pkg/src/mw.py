"""
MW quantization: players mix local tactics over a supplied pure initial state.

Two-qubit games use the tactics {I, sigma_x}; a tactic probability p is the
probability of I. Three-qubit games use the same tactics per player. The
two-qutrit rock-scissors-paper game uses {I, C, D}, where C swaps |1> and |3>
and D swaps |1> and |2>; a strategy (p, p1) gives C and D, and I gets
1 - p - p1. Payoffs are Tr[P_oper rho_fin] with diagonal payoff operators.
"""
import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from games import (Bimatrix2, Matrix3x3Pair, MixedStrategy2, ThreePlayerSymmetricSpec,
                   probability)
from qmat import (IDENTITY2, SIGMA_X, DensityMatrix, StateVector, UnitaryMatrix,
                  evolve_density, mix_densities, permutation_unitary, tensor, tensor_all)

logger = logging.getLogger(__name__)

TOL_NORM = 1e-12
TOL_DUAL_PATH = 1e-10
LEADING_EPS = 1e-12


class Pairing(enum.Enum):
    DIAGONAL = 'DIAGONAL'
    ANTI = 'ANTI'


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(float(re), float(im))
    return complex(value)


@dataclass(frozen=True)
class InitState2:
    """DIAGONAL: a|S1S1> + b|S2S2>; ANTI: a|S1S2> + b|S2S1>"""
    a: complex
    b: complex
    pairing: Pairing = Pairing.DIAGONAL

    def __post_init__(self):
        a, b = _complex(self.a), _complex(self.b)
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'pairing', Pairing(self.pairing))

    @classmethod
    def from_bsq(cls, bsq: float, pairing: Pairing = Pairing.DIAGONAL) -> 'InitState2':
        if not 0.0 <= bsq <= 1.0:
            raise ValueError(f"|b|^2 must lie in [0, 1], got {bsq!r}")
        return cls(np.sqrt(1.0 - bsq), np.sqrt(bsq), pairing)

    @property
    def asq(self) -> float:
        return abs(self.a) ** 2

    @property
    def bsq(self) -> float:
        return abs(self.b) ** 2

    def vector(self) -> StateVector:
        amps = np.zeros(4, dtype=complex)
        if self.pairing is Pairing.DIAGONAL:
            amps[0], amps[3] = self.a, self.b
        else:
            amps[1], amps[2] = self.a, self.b
        return StateVector(amps)


@dataclass(frozen=True)
class InitState3:
    """a|S1S1S1> + b|S2S2S2>"""
    a: complex
    b: complex

    def __post_init__(self):
        a, b = _complex(self.a), _complex(self.b)
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)

    @classmethod
    def from_bsq(cls, bsq: float) -> 'InitState3':
        if not 0.0 <= bsq <= 1.0:
            raise ValueError(f"|b|^2 must lie in [0, 1], got {bsq!r}")
        return cls(np.sqrt(1.0 - bsq), np.sqrt(bsq))

    @property
    def bsq(self) -> float:
        return abs(self.b) ** 2

    def vector(self) -> StateVector:
        amps = np.zeros(8, dtype=complex)
        amps[0], amps[7] = self.a, self.b
        return StateVector(amps)


@dataclass(frozen=True, eq=False)
class QutritInitState:
    """sum_ij c_ij |ij> over two qutrits, |ij> at index 3i + j"""
    c: np.ndarray

    def __post_init__(self):
        c = np.array([[_complex(v) for v in row] for row in self.c], dtype=complex)
        if c.shape != (3, 3):
            raise ValueError(f"Qutrit coefficients must be 3x3, got shape {c.shape}")
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"sum |c_ij|^2 = {norm!r}, expected 1")
        c.setflags(write=False)
        object.__setattr__(self, 'c', c)

    @classmethod
    def classical(cls) -> 'QutritInitState':
        c = np.zeros((3, 3), dtype=complex)
        c[0, 0] = 1.0
        return cls(c)

    @classmethod
    def entangled(cls) -> 'QutritInitState':
        """(|12> + |21> + |13> + |31>)/2"""
        c = np.zeros((3, 3), dtype=complex)
        c[0, 1] = c[1, 0] = c[0, 2] = c[2, 0] = 0.5
        return cls(c)

    @property
    def weights(self) -> np.ndarray:
        """|c_ij|^2"""
        return np.abs(self.c) ** 2

    @property
    def symmetric_play(self) -> bool:
        w = self.weights
        return bool(np.allclose(w, w.T, rtol=0.0, atol=TOL_NORM))

    def vector(self) -> StateVector:
        return StateVector(self.c.reshape(9))


# Two-player 2x2 games

TACTICS_2 = (IDENTITY2, SIGMA_X)


def _tactic_weights_2(p) -> Tuple[float, float]:
    p = probability(p)
    return p, 1.0 - p


def mw_final_density_2(init: InitState2, p, q) -> DensityMatrix:
    rho_in = init.vector().density()
    weights, densities = [], []
    for (ua, wa), (ub, wb) in itertools.product(zip(TACTICS_2, _tactic_weights_2(p)),
                                               zip(TACTICS_2, _tactic_weights_2(q))):
        weights.append(wa * wb)
        densities.append(evolve_density(rho_in, tensor(ua, ub)))
    return mix_densities(weights, densities)


def mw_payoffs_2(g: Bimatrix2, init: InitState2, p, q) -> Tuple[float, float]:
    rho = mw_final_density_2(init, p, q)
    return (rho.expectation(np.diag(g.payoff_a.reshape(4))),
            rho.expectation(np.diag(g.payoff_b.reshape(4))))


def mw2_effective_bimatrix(g: Bimatrix2, init: InitState2) -> Bimatrix2:
    """Classical 2x2 game over the tactics (I, sigma_x) equivalent to the MW game"""
    cells = [[mw_payoffs_2(g, init, 1.0 - i, 1.0 - j) for j in (0, 1)] for i in (0, 1)]
    return Bimatrix2.from_cells(cells)


@dataclass
class SymmetricNECandidates:
    candidates: List[float]
    mixed: Optional[float]
    mixed_in_range: bool
    degenerate: bool
    pure_ne: Dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'candidates': self.candidates, 'mixed': self.mixed,
                'mixed_in_range': self.mixed_in_range, 'degenerate': self.degenerate,
                'pure_ne': self.pure_ne}


def _symmetric_slope(g: Bimatrix2, init: InitState2, y: float) -> float:
    """dP(x, y)/dx for the DIAGONAL state; P(x,y) - P(x',y) = (x - x') * slope"""
    alpha, beta, gamma, delta = g.symmetric_constants()
    asq, bsq = init.asq, init.bsq
    return asq * (beta - delta) + bsq * (gamma - alpha) - y * ((beta - delta) + (gamma - alpha))


def mw_symmetric_ne_closed(g: Bimatrix2, init: InitState2, tol: float = 1e-9) -> SymmetricNECandidates:
    """Candidates {0, 1, p*} from the symmetric payoff difference; p* only when inside (0, 1)"""
    if init.pairing is not Pairing.DIAGONAL:
        raise ValueError("Symmetric closed form needs a DIAGONAL initial state")
    alpha, beta, gamma, delta = g.symmetric_constants()
    denom = (beta - delta) + (gamma - alpha)
    pure_ne = {'0': _symmetric_slope(g, init, 0.0) <= tol,
               '1': _symmetric_slope(g, init, 1.0) >= -tol}
    if abs(denom) < 1e-9:
        logger.warning("Zero denominator in the symmetric mixed NE; pure candidates only")
        return SymmetricNECandidates([0.0, 1.0], None, False, True, pure_ne)
    mixed = (init.asq * (beta - delta) + init.bsq * (gamma - alpha)) / denom
    in_range = 0.0 < mixed < 1.0
    if not in_range:
        logger.debug(f"Mixed candidate p*={mixed} lies outside [0, 1]")
    candidates = [0.0, 1.0] + ([float(mixed)] if in_range else [])
    return SymmetricNECandidates(candidates, float(mixed), in_range, False, pure_ne)


def pure_ess_thresholds(g: Bimatrix2) -> Tuple[float, float]:
    """|a|^2 bounds: p=0 is ESS above the first, p=1 is ESS below the second.

    Needs gamma > alpha and delta > beta.
    """
    alpha, beta, gamma, delta = g.symmetric_constants()
    if not (gamma > alpha and delta > beta):
        raise ValueError("Thresholds need gamma > alpha and delta > beta")
    total = (gamma - alpha) + (delta - beta)
    return (gamma - alpha) / total, (delta - beta) / total


def mw_asymmetric_ne_differences(g: Bimatrix2, bsq: float, p: float, q: float) -> Tuple[float, float]:
    """P_A(0,0) - P_A(p,0) and P_B(0,0) - P_B(0,q) for a DIAGONAL state"""
    (a1, a2), (b1, b2) = g.cells[0]
    (c1, c2), (s1, s2) = g.cells[1]
    diff_a = -p * ((b1 - s1) + bsq * ((c1 - a1) - (b1 - s1)))
    diff_b = -q * ((c2 - s2) + bsq * ((b2 - a2) - (c2 - s2)))
    return diff_a, diff_b


def bos_mixed_ne(alpha: float, beta: float, gamma: float, init: InitState2) -> Tuple[float, float]:
    """Interior NE (p*, q*) of the quantized battle of the sexes"""
    k = alpha + beta - 2 * gamma
    if abs(k) < 1e-12:
        raise ValueError("alpha + beta - 2 gamma vanishes")
    asq, bsq = init.asq, init.bsq
    if init.pairing is Pairing.DIAGONAL:
        return ((asq * (alpha - gamma) + bsq * (beta - gamma)) / k,
                (bsq * (alpha - gamma) + asq * (beta - gamma)) / k)
    mixed = (alpha * asq + beta * bsq - gamma) / k
    return mixed, mixed


def bos_anti_display(alpha: float, beta: float, gamma: float, init: InitState2) -> Tuple[float, float]:
    """The published ANTI-state NE, which does not equalize payoffs"""
    k = alpha + beta - gamma
    asq, bsq = init.asq, init.bsq
    return (beta * asq + alpha * bsq - gamma) / k, (alpha * asq + beta * bsq - gamma) / k


# Three-player symmetric games

def mw_final_density_3(init: InitState3, p, q, r) -> DensityMatrix:
    rho_in = init.vector().density()
    weights, densities = [], []
    options = [list(zip(TACTICS_2, _tactic_weights_2(x))) for x in (p, q, r)]
    for (ua, wa), (ub, wb), (uc, wc) in itertools.product(*options):
        weights.append(wa * wb * wc)
        densities.append(evolve_density(rho_in, tensor_all(ua, ub, uc)))
    return mix_densities(weights, densities)


def three_player_operators(spec: ThreePlayerSymmetricSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = spec.payoff_tensor()
    op_a = np.diag(t.reshape(8))
    op_b = np.diag(np.transpose(t, (1, 0, 2)).reshape(8))
    op_c = np.diag(np.transpose(t, (1, 2, 0)).reshape(8))
    return op_a, op_b, op_c


def mw_payoffs_3(spec: ThreePlayerSymmetricSpec, init: InitState3, p, q, r) -> Tuple[float, float, float]:
    rho = mw_final_density_3(init, p, q, r)
    op_a, op_b, op_c = three_player_operators(spec)
    return rho.expectation(op_a), rho.expectation(op_b), rho.expectation(op_c)


def three_player_payoff_closed(spec: ThreePlayerSymmetricSpec, bsq: float, p: float, q: float, r: float) -> float:
    """|a|^2 P_cl(p,q,r) + |b|^2 P_cl(1-p,1-q,1-r) for the first player"""
    return ((1 - bsq) * spec.classical_payoff(p, q, r)
            + bsq * spec.classical_payoff(1 - p, 1 - q, 1 - r))


def _g(spec: ThreePlayerSymmetricSpec, x: float) -> float:
    return spec.sigma * x ** 2 + 2 * spec.eta * x * (1 - x) + spec.omega * (1 - x) ** 2


def three_player_ne_difference(spec: ThreePlayerSymmetricSpec, bsq: float, p_star: float, p: float) -> float:
    """P(p*,p*,p*) - P(p,p*,p*) = (p* - p)[|a|^2 g(p*) - |b|^2 g(1-p*)]"""
    return (p_star - p) * ((1 - bsq) * _g(spec, p_star) - bsq * _g(spec, 1 - p_star))


@dataclass
class ThreePlayerRoots:
    roots: List[float]
    all_roots: List[float]
    discriminant: Optional[float]
    coefficients: Tuple[float, float, float]
    solver: str

    def to_dict(self) -> Dict[str, Any]:
        return {'roots': self.roots, 'all_roots': self.all_roots,
                'discriminant': self.discriminant,
                'coefficients': list(self.coefficients), 'solver': self.solver}


def three_player_mixed_ne(spec: ThreePlayerSymmetricSpec, bsq: float) -> ThreePlayerRoots:
    """Roots in [0, 1] of (1-2B)K x^2 + 2(BK - omega + eta) x + (omega - B(sigma + omega)) = 0.

    K = sigma + omega - 2 eta and B = |b|^2. solver is 'quadratic', 'linear',
    'identity' (every p solves) or 'none'.
    """
    if not 0.0 <= bsq <= 1.0:
        raise ValueError(f"|b|^2 must lie in [0, 1], got {bsq!r}")
    sigma, eta, omega = spec.sigma, spec.eta, spec.omega
    k = sigma + omega - 2 * eta
    a2 = (1 - 2 * bsq) * k
    a1 = 2 * (bsq * k - omega + eta)
    a0 = omega - bsq * (sigma + omega)
    discriminant = ((sigma + omega) ** 2 - 4 * eta ** 2) * bsq * (1 - bsq) + (eta ** 2 - sigma * omega)

    if abs(a2) < LEADING_EPS:
        if abs(a1) < LEADING_EPS:
            solver = 'identity' if abs(a0) < LEADING_EPS else 'none'
            logger.debug(f"Degenerate three-player root equation ({solver})")
            return ThreePlayerRoots([], [], discriminant, (a2, a1, a0), solver)
        candidates = [-a0 / a1]
        solver = 'linear'
    elif discriminant < -LEADING_EPS:
        return ThreePlayerRoots([], [], discriminant, (a2, a1, a0), 'none')
    else:
        root_d = np.sqrt(max(discriminant, 0.0))
        candidates = sorted({(-(a1 / 2) - root_d) / a2, (-(a1 / 2) + root_d) / a2})
        solver = 'quadratic'
    all_roots = [float(x) for x in sorted(candidates)]
    roots = [min(max(x, 0.0), 1.0) for x in all_roots if -1e-12 <= x <= 1 + 1e-12]
    return ThreePlayerRoots(roots, all_roots, discriminant, (a2, a1, a0), solver)


def three_player_pure_ess(spec: ThreePlayerSymmetricSpec, bsq: float, p: int) -> bool:
    """Closed ESS conditions for the pure strategies p = 0 and p = 1"""
    asq = 1 - bsq
    sigma, eta, omega = spec.sigma, spec.eta, spec.omega
    if p == 0:
        lead, tie = bsq * sigma - asq * omega, -eta * (asq - bsq)
    elif p == 1:
        lead, tie = asq * sigma - bsq * omega, eta * (asq - bsq)
    else:
        raise ValueError(f"Pure strategy must be 0 or 1, got {p!r}")
    if abs(lead) > 1e-12:
        return lead > 0
    return tie > 1e-12


# Two-player 3x3 (rock-scissors-paper) games

C_OP = permutation_unitary([2, 1, 0])
D_OP = permutation_unitary([1, 0, 2])
TACTICS_3 = (UnitaryMatrix.identity(3), C_OP, D_OP)

# Omega[k][m] = (i, j): row k pairs tactic (Alice k % 3, Bob k // 3) in the
# order (I, C, D); column m multiplies alpha at (m // 3, m % 3).
OMEGA_INDEX = (
    ((0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)),
    ((2, 0), (2, 1), (2, 2), (1, 0), (1, 1), (1, 2), (0, 0), (0, 1), (0, 2)),
    ((1, 0), (1, 1), (1, 2), (0, 0), (0, 1), (0, 2), (2, 0), (2, 1), (2, 2)),
    ((0, 2), (0, 1), (0, 0), (1, 2), (1, 1), (1, 0), (2, 2), (2, 1), (2, 0)),
    ((2, 2), (2, 1), (2, 0), (1, 2), (1, 1), (1, 0), (0, 2), (0, 1), (0, 0)),
    ((1, 2), (1, 1), (1, 0), (0, 2), (0, 1), (0, 0), (2, 2), (2, 1), (2, 0)),
    ((0, 1), (0, 0), (0, 2), (1, 1), (1, 0), (1, 2), (2, 1), (2, 0), (2, 2)),
    ((2, 1), (2, 0), (2, 2), (1, 1), (1, 0), (1, 2), (0, 1), (0, 0), (0, 2)),
    ((1, 1), (1, 0), (1, 2), (0, 1), (0, 0), (0, 2), (2, 1), (2, 0), (2, 2)),
)


def _strategy2(x) -> MixedStrategy2:
    if isinstance(x, MixedStrategy2):
        return x
    p, p1 = x
    return MixedStrategy2(p, p1)


@dataclass(frozen=True, eq=False)
class RSPPayoffFactors:
    phi: np.ndarray
    omega: np.ndarray
    upsilon: np.ndarray

    def payoff(self) -> float:
        return float(self.phi @ self.omega @ self.upsilon)


def rsp_payoff_factors(g: Matrix3x3Pair, init: QutritInitState, a, b) -> RSPPayoffFactors:
    wa, wb = _strategy2(a).weights, _strategy2(b).weights
    phi = np.array([wa[k % 3] * wb[k // 3] for k in range(9)])
    weights = init.weights
    omega = np.array([[weights[i, j] for (i, j) in row] for row in OMEGA_INDEX])
    return RSPPayoffFactors(phi, omega, g.alpha.reshape(9).copy())


def rsp_final_density(init: QutritInitState, a, b) -> DensityMatrix:
    rho_in = init.vector().density()
    wa, wb = _strategy2(a).weights, _strategy2(b).weights
    weights, densities = [], []
    for (ua, xa), (ub, xb) in itertools.product(zip(TACTICS_3, wa), zip(TACTICS_3, wb)):
        if xa * xb == 0.0:
            continue
        weights.append(xa * xb)
        densities.append(evolve_density(rho_in, tensor(ua, ub)))
    return mix_densities(weights, densities)


def rsp_payoffs(g: Matrix3x3Pair, init: QutritInitState, a, b) -> Tuple[float, float]:
    """Trace payoffs, with P_A cross-checked against Phi . Omega . Upsilon^T"""
    rho = rsp_final_density(init, a, b)
    payoff_a = rho.expectation(np.diag(g.alpha.reshape(9)))
    payoff_b = rho.expectation(np.diag(g.beta.reshape(9)))
    factored = rsp_payoff_factors(g, init, a, b).payoff()
    if abs(factored - payoff_a) > TOL_DUAL_PATH:
        logger.error(f"Trace payoff {payoff_a} and factored payoff {factored} disagree")
        raise ArithmeticError(f"RSP payoff paths disagree: {payoff_a!r} vs {factored!r}")
    return payoff_a, payoff_b


def rsp_effective_matrix(g: Matrix3x3Pair, init: QutritInitState) -> np.ndarray:
    """K[a, b] = P_A when Alice plays tactic a and Bob tactic b, order (I, C, D)"""
    pure = [MixedStrategy2(0.0, 0.0), MixedStrategy2(1.0, 0.0), MixedStrategy2(0.0, 1.0)]
    return np.array([[rsp_payoffs(g, init, sa, sb)[0] for sb in pure] for sa in pure])


def rsp_gradients(g: Matrix3x3Pair, init: QutritInitState, at) -> Tuple[float, float]:
    """(dP/dp, dP/dp1) of the first player's payoff at p = q, p1 = q1.

    Uses d1, d2, d3 = |c11|^2 - |c31|^2, |c13|^2 - |c33|^2, |c12|^2 - |c32|^2
    and e_k = |c2k|^2 - |c1k|^2 (1-based indices).
    """
    if not init.symmetric_play:
        raise ValueError("Gradients need an initial state with |c_ij|^2 = |c_ji|^2")
    point = _strategy2(at)
    q, q1 = point.p, point.p1
    w = init.weights
    al = g.alpha
    d1, d2, d3 = w[0, 0] - w[2, 0], w[0, 2] - w[2, 2], w[0, 1] - w[2, 1]
    e1, e2, e3 = w[1, 0] - w[0, 0], w[1, 1] - w[0, 1], w[1, 2] - w[0, 2]
    grad_p = (q * (d1 - d2) * ((al[0, 0] + al[2, 2]) - (al[0, 2] + al[2, 0]))
              + q1 * (d1 - d3) * ((al[0, 0] + al[2, 1]) - (al[0, 1] + al[2, 0]))
              - d1 * (al[0, 0] - al[2, 0]) - d3 * (al[0, 1] - al[2, 1]) - d2 * (al[0, 2] - al[2, 2]))
    grad_p1 = (q * (e3 - e1) * ((al[0, 0] + al[1, 2]) - (al[0, 2] + al[1, 0]))
               + q1 * (e2 - e1) * ((al[0, 0] + al[1, 1]) - (al[0, 1] + al[1, 0]))
               + e1 * (al[0, 0] - al[1, 0]) + e2 * (al[0, 1] - al[1, 1]) + e3 * (al[0, 2] - al[1, 2]))
    return float(grad_p), float(grad_p1)


def rsp_second_condition_closed(epsilon: float, state: str, x: float, y: float) -> float:
    """P{*, (p,p1)} - P{(p,p1), (p,p1)} with x = p* - p, y = p1* - p1, for the RSP matrix"""
    quad = x ** 2 + x * y + y ** 2
    if state == 'classical':
        return 2 * epsilon * quad
    if state == 'entangled':
        return -epsilon * quad
    raise ValueError(f"Unknown state {state!r}")


def rsp_second_condition_display(epsilon: float, state: str, x: float, y: float) -> float:
    """Published forms; the entangled one is twice the simulated difference"""
    if state == 'classical':
        return epsilon * ((x + y) ** 2 + (x ** 2 + y ** 2))
    if state == 'entangled':
        return -epsilon * ((x + y) ** 2 + (x ** 2 + y ** 2))
    raise ValueError(f"Unknown state {state!r}")


def rsp_classical_payoff_sum(epsilon: float, a, b) -> float:
    """(P_A + P_B) of the classical RSP game"""
    sa, sb = _strategy2(a), _strategy2(b)
    return -2 * epsilon * ((1 - sa.p - sa.p1) * (1 - sb.p - sb.p1) + sa.p1 * sb.p1 + sa.p * sb.p)
