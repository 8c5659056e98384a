"""
Tests for the MW quantization: two-qubit, three-qubit and two-qutrit games
"""
import numpy as np
import pytest

from games import Bimatrix2, ThreePlayerSymmetricSpec, mixed_payoff_bimatrix
from mw import (InitState2, InitState3, Pairing, QutritInitState, bos_anti_display, bos_mixed_ne,
                mw2_effective_bimatrix, mw_asymmetric_ne_differences, mw_final_density_2,
                mw_payoffs_2, mw_payoffs_3, mw_symmetric_ne_closed, pure_ess_thresholds,
                rsp_classical_payoff_sum, rsp_effective_matrix, rsp_final_density, rsp_gradients,
                rsp_payoff_factors, rsp_payoffs, rsp_second_condition_closed,
                three_player_mixed_ne, three_player_ne_difference, three_player_payoff_closed,
                three_player_pure_ess)

pytestmark = pytest.mark.quantum

CENTRE = (1 / 3, 1 / 3)


class TestInitStates:
    """Test initial-state validation"""

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="expected 1"):
            InitState2(0.5, 0.5)

    def test_complex_pairs(self):
        """Test that [re, im] pairs are accepted"""
        init = InitState2([0.0, np.sqrt(0.5)], [np.sqrt(0.5), 0.0])
        assert init.bsq == pytest.approx(0.5)

    def test_anti_vector_layout(self):
        init = InitState2.from_bsq(0.25, Pairing.ANTI)
        assert init.vector().probabilities() == pytest.approx([0.0, 0.75, 0.25, 0.0])

    def test_bsq_range(self):
        with pytest.raises(ValueError):
            InitState3.from_bsq(1.5)

    def test_entangled_qutrits(self, entangled_qutrits):
        assert entangled_qutrits.symmetric_play
        assert entangled_qutrits.weights.sum() == pytest.approx(1.0)

    def test_qutrit_shape(self):
        with pytest.raises(ValueError, match="3x3"):
            QutritInitState(np.eye(2))


class TestTwoPlayer:
    """Test two-qubit payoffs and effective games"""

    def test_classical_limit(self, bos_game, diagonal_state):
        """Test that |b|^2 = 0 reproduces the classical mixed payoffs"""
        init = diagonal_state(0.0)
        for p, q in [(0.0, 0.0), (0.3, 0.8), (1.0, 0.4)]:
            assert mw_payoffs_2(bos_game, init, p, q) == pytest.approx(
                mixed_payoff_bimatrix(bos_game, p, q), abs=1e-12)

    def test_final_density_is_valid(self, diagonal_state):
        rho = mw_final_density_2(diagonal_state(0.3), 0.2, 0.7)
        assert np.trace(rho.entries).real == pytest.approx(1.0)

    def test_effective_bimatrix_matches_mixing(self, bos_game, diagonal_state):
        """Test that the tactic game reproduces payoffs at mixed tactics"""
        init = diagonal_state(0.3)
        effective = mw2_effective_bimatrix(bos_game, init)
        for p, q in [(0.25, 0.5), (0.9, 0.1)]:
            assert mixed_payoff_bimatrix(effective, p, q) == pytest.approx(
                mw_payoffs_2(bos_game, init, p, q), abs=1e-12)

    def test_symmetric_candidates(self, threshold_game, diagonal_state):
        candidates = mw_symmetric_ne_closed(threshold_game, diagonal_state(0.5))
        assert candidates.mixed == pytest.approx(0.5)
        assert candidates.candidates == pytest.approx([0.0, 1.0, 0.5])

    def test_symmetric_needs_diagonal(self, threshold_game):
        with pytest.raises(ValueError, match="DIAGONAL"):
            mw_symmetric_ne_closed(threshold_game, InitState2.from_bsq(0.5, Pairing.ANTI))

    def test_thresholds(self, threshold_game):
        assert pure_ess_thresholds(threshold_game) == pytest.approx((0.25, 0.75))

    def test_thresholds_need_ordering(self):
        with pytest.raises(ValueError):
            pure_ess_thresholds(Bimatrix2.symmetric(2, 0, 1, 3))

    @pytest.mark.parametrize("bsq", [0.0, 0.3, 0.5, 1.0])
    def test_asymmetric_differences(self, bsq):
        """Test the closed NE differences at (0, 0) against the simulator"""
        game = Bimatrix2.from_cells([[(1, 1), (1, 2)], [(2, 1), (3, 2)]])
        init = InitState2.from_bsq(bsq)
        base = mw_payoffs_2(game, init, 0.0, 0.0)
        for p in np.linspace(0, 1, 6):
            diff_a, diff_b = mw_asymmetric_ne_differences(game, bsq, p, p)
            assert diff_a == pytest.approx(base[0] - mw_payoffs_2(game, init, p, 0.0)[0], abs=1e-12)
            assert diff_b == pytest.approx(base[1] - mw_payoffs_2(game, init, 0.0, p)[1], abs=1e-12)


class TestBattleOfSexes:
    """Test the quantized BoS interior NE"""

    @pytest.mark.parametrize("pairing", [Pairing.DIAGONAL, Pairing.ANTI])
    def test_corrected_ne_equalizes_payoffs(self, bos_game, pairing):
        """Test that neither player can gain by deviating from (p*, q*)"""
        init = InitState2.from_bsq(0.3, pairing)
        p_star, q_star = bos_mixed_ne(3, 2, 1, init)
        pa, pb = mw_payoffs_2(bos_game, init, p_star, q_star)
        for x in np.linspace(0, 1, 11):
            assert mw_payoffs_2(bos_game, init, x, q_star)[0] == pytest.approx(pa, abs=1e-12)
            assert mw_payoffs_2(bos_game, init, p_star, x)[1] == pytest.approx(pb, abs=1e-12)

    def test_anti_value(self):
        init = InitState2.from_bsq(0.3, Pairing.ANTI)
        assert bos_mixed_ne(3, 2, 1, init) == pytest.approx((1.7 / 3, 1.7 / 3))

    @pytest.mark.regression
    def test_anti_display_is_not_a_ne(self, bos_game):
        """Test that the published ANTI formula leaves a profitable deviation"""
        init = InitState2.from_bsq(0.3, Pairing.ANTI)
        p_disp, q_disp = bos_anti_display(3, 2, 1, init)
        pa = mw_payoffs_2(bos_game, init, p_disp, q_disp)[0]
        best = max(mw_payoffs_2(bos_game, init, x, q_disp)[0] for x in np.linspace(0, 1, 11))
        assert best - pa > 1e-3


class TestThreePlayer:
    """Test three-qubit payoffs and the mixed-NE quadratic"""

    def test_classical_limit(self):
        spec = ThreePlayerSymmetricSpec(1.0, 2.0, 3.0, 5.0, 6.0, 8.0)
        init = InitState3.from_bsq(0.0)
        assert mw_payoffs_3(spec, init, 0.2, 0.6, 0.9)[0] == pytest.approx(
            spec.classical_payoff(0.2, 0.6, 0.9), abs=1e-12)

    def test_payoffs_are_symmetric(self):
        """Test that permuting players permutes payoffs"""
        spec = ThreePlayerSymmetricSpec(1.0, 2.0, 3.0, 5.0, 6.0, 8.0)
        init = InitState3.from_bsq(0.4)
        pa, pb, pc = mw_payoffs_3(spec, init, 0.2, 0.6, 0.9)
        assert mw_payoffs_3(spec, init, 0.6, 0.2, 0.9)[0] == pytest.approx(pb, abs=1e-12)
        assert mw_payoffs_3(spec, init, 0.9, 0.6, 0.2)[0] == pytest.approx(pc, abs=1e-12)

    def test_closed_payoff(self):
        spec = ThreePlayerSymmetricSpec(0.7, -0.2, 1.1, 0.4, -0.9, 0.3)
        init = InitState3.from_bsq(0.37)
        assert three_player_payoff_closed(spec, 0.37, 0.1, 0.5, 0.8) == pytest.approx(
            mw_payoffs_3(spec, init, 0.1, 0.5, 0.8)[0], abs=1e-12)

    def test_interior_roots(self):
        """Test the roots (5 -+ sqrt 5)/10 of the sigma = omega = -1, eta = 3/2 class"""
        roots = three_player_mixed_ne(ThreePlayerSymmetricSpec.from_reduced(-1.0, 1.5, -1.0), 0.0)
        assert roots.solver == 'quadratic'
        assert roots.roots == pytest.approx([0.2763932022500210, 0.7236067977499790], abs=1e-12)

    def test_identity_at_half(self):
        """Test that sigma = omega at |b|^2 = 1/2 makes every p a NE"""
        roots = three_player_mixed_ne(ThreePlayerSymmetricSpec.from_reduced(-1.0, 1.5, -1.0), 0.5)
        assert roots.solver == 'identity'
        assert roots.roots == []

    def test_roots_zero_the_difference(self):
        spec = ThreePlayerSymmetricSpec.from_reduced(1.0, -2.0, 4.0)
        roots = three_player_mixed_ne(spec, 0.05)
        assert len(roots.roots) == 2
        for p_star in roots.roots:
            for p in np.linspace(0, 1, 11):
                assert three_player_ne_difference(spec, 0.05, p_star, p) == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.slow
    def test_random_roots_zero_the_simulated_difference(self):
        """Test that every reported root equalizes P(p*,p*,p*) and P(p,p*,p*) from the final density"""
        rng = np.random.default_rng(20240611)
        checked = 0
        for _ in range(100):
            sigma, eta, omega = rng.uniform(-2.0, 2.0, size=3)
            bsq = float(rng.uniform(0.0, 1.0))
            spec = ThreePlayerSymmetricSpec.from_reduced(sigma, eta, omega)
            init = InitState3.from_bsq(bsq)
            for p_star in three_player_mixed_ne(spec, bsq).roots:
                at_root = mw_payoffs_3(spec, init, p_star, p_star, p_star)[0]
                for p in (0.0, 0.25, 0.5, 0.75, 1.0):
                    deviation = mw_payoffs_3(spec, init, p, p_star, p_star)[0]
                    assert at_root - deviation == pytest.approx(0.0, abs=1e-8)
                checked += 1
        assert checked >= 10

    @pytest.mark.parametrize("bsq,expected", [(0.0, True), (0.5, True), (1.0, False)])
    def test_pure_ess_zero_class(self, bsq, expected):
        spec = ThreePlayerSymmetricSpec.from_reduced(0.0, -1.0, -1.0)
        assert three_player_pure_ess(spec, bsq, 0) is expected

    def test_pure_ess_needs_pure(self):
        with pytest.raises(ValueError):
            three_player_pure_ess(ThreePlayerSymmetricSpec.from_reduced(1, 0, -1), 0.5, 2)


class TestRockScissorsPaper:
    """Test two-qutrit payoffs, factors and closed forms"""

    def test_classical_centre(self, rsp_game, classical_qutrits):
        assert rsp_payoffs(rsp_game, classical_qutrits, CENTRE, CENTRE) == pytest.approx((1 / 6, 1 / 6))

    def test_final_density_trace(self, entangled_qutrits):
        rho = rsp_final_density(entangled_qutrits, (0.2, 0.3), (0.5, 0.1))
        assert np.trace(rho.entries).real == pytest.approx(1.0)

    def test_factors_match_trace(self, rsp_game, entangled_qutrits):
        """Test Phi . Omega . Upsilon against the trace payoff"""
        factors = rsp_payoff_factors(rsp_game, entangled_qutrits, (0.2, 0.3), (0.5, 0.1))
        assert np.allclose(factors.omega.sum(axis=1), 1.0)
        assert factors.payoff() == pytest.approx(
            rsp_payoffs(rsp_game, entangled_qutrits, (0.2, 0.3), (0.5, 0.1))[0], abs=1e-12)

    @pytest.mark.slow
    def test_factors_match_trace_on_random_states(self, rsp_game):
        """Test Phi . Omega . Upsilon against Tr(rho P_A) on 10^4 random complex states and strategies"""
        rng = np.random.default_rng(7)
        operator = np.diag(rsp_game.alpha.reshape(9))
        for _ in range(10_000):
            c = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            init = QutritInitState(c / np.linalg.norm(c))
            a, b = rng.dirichlet(np.ones(3), size=2)
            traced = rsp_final_density(init, a[1:], b[1:]).expectation(operator)
            factored = rsp_payoff_factors(rsp_game, init, a[1:], b[1:]).payoff()
            assert factored == pytest.approx(traced, abs=1e-10)

    def test_dual_path_mismatch_raises(self, rsp_game, entangled_qutrits, mocker):
        """Test that disagreeing payoff paths raise ArithmeticError"""
        fake = mocker.MagicMock()
        fake.payoff.return_value = 99.0
        mocker.patch('mw.rsp_payoff_factors', return_value=fake)
        with pytest.raises(ArithmeticError, match="disagree"):
            rsp_payoffs(rsp_game, entangled_qutrits, CENTRE, CENTRE)

    @pytest.mark.parametrize("state", ['classical', 'entangled'])
    def test_centre_is_stationary(self, rsp_game, state):
        init = getattr(QutritInitState, state)()
        assert max(abs(v) for v in rsp_gradients(rsp_game, init, CENTRE)) < 1e-9

    def test_gradients_need_symmetric_play(self, rsp_game):
        c = np.zeros((3, 3))
        c[0, 1] = 1.0
        with pytest.raises(ValueError, match="Gradients"):
            rsp_gradients(rsp_game, QutritInitState(c), CENTRE)

    @pytest.mark.parametrize("state", ['classical', 'entangled'])
    def test_second_condition(self, rsp_game, state):
        init = getattr(QutritInitState, state)()
        for p, p1 in [(0.1, 0.2), (0.6, 0.3), (0.0, 1.0)]:
            direct = rsp_payoffs(rsp_game, init, CENTRE, (p, p1))[0] - rsp_payoffs(rsp_game, init, (p, p1), (p, p1))[0]
            closed = rsp_second_condition_closed(-0.5, state, CENTRE[0] - p, CENTRE[1] - p1)
            assert direct == pytest.approx(closed, abs=1e-9)

    def test_payoff_sum_identity(self, rsp_game, entangled_qutrits):
        """Test (P_A + P_B) = -(classical sum / 2 + epsilon) for the entangled state"""
        for a, b in [((0.1, 0.2), (0.7, 0.1)), ((0.0, 0.0), (1.0, 0.0)), (CENTRE, (0.3, 0.3))]:
            pa, pb = rsp_payoffs(rsp_game, entangled_qutrits, a, b)
            assert pa + pb == pytest.approx(-(0.5 * rsp_classical_payoff_sum(-0.5, a, b) - 0.5), abs=1e-9)

    def test_effective_matrix_rows(self, rsp_game, entangled_qutrits):
        """Test that every tactic earns the same against the centre"""
        k = rsp_effective_matrix(rsp_game, entangled_qutrits)
        assert np.ptp(k @ np.full(3, 1 / 3)) < 1e-12
