"""
Tests for classical game containers and the 2x2 equilibrium finder
"""
import numpy as np
import pytest

from games import (Bimatrix2, Matrix3x3Pair, MixedStrategy1, MixedStrategy2, ThreePlayerSymmetricSpec,
                   classical_equilibria_2x2, mixed_payoff_bimatrix)


class TestBimatrix2:
    """Test construction helpers"""

    def test_pd_roles_layout(self, pd_game):
        """Test the (r,r),(s,t);(t,s),(u,u) layout"""
        assert pd_game.cells == [[(3.0, 3.0), (0.0, 5.0)], [(5.0, 0.0), (1.0, 1.0)]]
        assert pd_game.pd_roles() == (3.0, 0.0, 5.0, 1.0)
        assert pd_game.is_symmetric

    def test_pd_roles_rejects_other_layouts(self, bos_game):
        with pytest.raises(ValueError, match="r,s,t,u"):
            bos_game.pd_roles()

    def test_battle_of_sexes_layout(self, bos_game):
        assert bos_game.cells == [[(3.0, 2.0), (1.0, 1.0)], [(1.0, 1.0), (2.0, 3.0)]]
        assert not bos_game.is_symmetric

    def test_symmetric_constants(self, threshold_game):
        assert threshold_game.symmetric_constants() == (1.0, 0.0, 2.0, 3.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            Bimatrix2(np.array([[1, np.nan], [0, 0]]), np.zeros((2, 2)))

    def test_from_dict_forms(self):
        """Test that the three config forms build the same kind of game"""
        pd = Bimatrix2.from_dict({'pd': {'r': 3, 's': 0, 't': 5, 'u': 1}})
        cells = Bimatrix2.from_dict({'cells': [[[3, 3], [0, 5]], [[5, 0], [1, 1]]]})
        assert np.array_equal(pd.payoff_a, cells.payoff_a)
        assert np.array_equal(pd.payoff_b, cells.payoff_b)
        with pytest.raises(KeyError):
            Bimatrix2.from_dict({'matrix': []})


class TestMixedStrategies:

    def test_probability_range(self):
        with pytest.raises(ValueError):
            MixedStrategy1(1.2)

    def test_simplex_weights(self):
        """Test (p, p1) -> (1-p-p1, p, p1)"""
        assert MixedStrategy2(0.2, 0.3).weights == pytest.approx([0.5, 0.2, 0.3])

    def test_simplex_rejects_outside(self):
        with pytest.raises(ValueError, match="simplex"):
            MixedStrategy2(0.7, 0.4)

    def test_simplex_overshoot_is_renormalized(self):
        """Test that p + p1 slightly above 1 is rescaled so the weights still sum to 1"""
        strategy = MixedStrategy2(0.6, 0.4 + 5e-13)
        assert strategy.p + strategy.p1 == pytest.approx(1.0, abs=1e-15)
        assert strategy.weights[0] == pytest.approx(0.0, abs=1e-15)
        assert strategy.weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert strategy.p / strategy.p1 == pytest.approx(0.6 / (0.4 + 5e-13), rel=1e-14)

    def test_mixed_payoff(self, pd_game):
        """Test that mutual C gives r and C vs D gives (s, t)"""
        assert mixed_payoff_bimatrix(pd_game, 1.0, 1.0) == (3.0, 3.0)
        assert mixed_payoff_bimatrix(pd_game, 1.0, 0.0) == (0.0, 5.0)


class TestClassicalEquilibria:
    """Test pure and interior NE of 2x2 games"""

    def test_battle_of_sexes(self, bos_game):
        """Test that BoS(3,2,1) has (0,0), (2/3,1/3) and (1,1)"""
        found = classical_equilibria_2x2(bos_game)
        assert len(found.equilibria) == 3
        expected = [(0.0, 0.0), (2 / 3, 1 / 3), (1.0, 1.0)]
        for got, want in zip(found.equilibria, expected):
            assert got == pytest.approx(want, abs=1e-6)
        assert not found.degenerate

    def test_prisoners_dilemma(self, pd_game):
        """Test that mutual defection is the only NE"""
        assert classical_equilibria_2x2(pd_game).equilibria == [(0.0, 0.0)]

    def test_degenerate_game(self):
        """Test that a constant game is flagged degenerate"""
        found = classical_equilibria_2x2(Bimatrix2.from_cells([[(1, 1), (1, 1)], [(1, 1), (1, 1)]]))
        assert found.degenerate
        assert len(found.equilibria) == 4


class TestMatrix3x3Pair:

    def test_rsp_matrix(self, rsp_game):
        assert rsp_game.alpha[0].tolist() == [0.5, 1.0, -1.0]
        assert rsp_game.is_symmetric

    def test_rsp_epsilon_range(self):
        with pytest.raises(ValueError):
            Matrix3x3Pair.rsp(0.5)

    def test_classical_payoffs_at_centre(self, rsp_game):
        """Test that uniform play earns -epsilon/3"""
        u = np.full(3, 1 / 3)
        assert rsp_game.classical_payoffs(u, u) == pytest.approx((1 / 6, 1 / 6))


class TestThreePlayerSpec:

    def test_reduced_constants(self):
        spec = ThreePlayerSymmetricSpec(2.0, 1.0, 0.5, 3.0, 1.5, 1.0)
        assert (spec.sigma, spec.eta, spec.omega) == (1.0, -1.0, 2.0)

    def test_from_reduced(self):
        spec = ThreePlayerSymmetricSpec.from_reduced(-1.0, 1.5, -1.0)
        assert (spec.sigma, spec.eta, spec.omega) == (-1.0, 1.5, -1.0)

    def test_classical_payoff_corners(self):
        """Test that pure profiles read single tensor entries"""
        spec = ThreePlayerSymmetricSpec(1.0, 2.0, 3.0, 5.0, 6.0, 8.0)
        assert spec.classical_payoff(1, 1, 1) == 1.0
        assert spec.classical_payoff(0, 1, 1) == 2.0
        assert spec.classical_payoff(1, 0, 1) == 3.0
        assert spec.classical_payoff(1, 0, 0) == 5.0
        assert spec.classical_payoff(0, 1, 0) == 6.0
        assert spec.classical_payoff(0, 0, 0) == 8.0
