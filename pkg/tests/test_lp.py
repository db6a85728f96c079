"""
Tests for the HiGHS LP wrapper
"""

import pytest

from dlshaped_vrpsd.core.errors import LpError
from dlshaped_vrpsd.core.lp import HighsLp


class TestHighsLp:
    """Test row and bound handling"""

    def test_two_variable_lp(self):
        """Test min x + 2y s.t. x + y >= 1, x <= 0.25"""
        lp = HighsLp()
        x = lp.add_variable("x", 0.0, 0.25, 1.0)
        y = lp.add_variable("y", 0.0, None, 2.0)
        lp.add_row({x: 1.0, y: 1.0}, ">=", 1.0)
        result = lp.solve()
        assert result.optimal
        assert result.objective == pytest.approx(1.75)
        assert lp.values()[x] == pytest.approx(0.25)
        assert lp.objective() == pytest.approx(1.75)
        assert lp.num_variables == 2
        assert lp.num_rows == 1
        assert lp.solves == 1

    def test_equality_and_less_equal(self):
        """Test == and <= rows together"""
        lp = HighsLp()
        a = lp.add_variable("a", 0.0, None, -1.0)
        b = lp.add_variable("b", 0.0, None, 0.0)
        lp.add_row({a: 1.0, b: 1.0}, "==", 2.0)
        lp.add_row({a: 1.0}, "<=", 1.5)
        result = lp.solve()
        assert result.objective == pytest.approx(-1.5)
        assert lp.values()[b] == pytest.approx(0.5)

    def test_infeasible_rows(self):
        """Test contradictory rows give an infeasible verdict"""
        lp = HighsLp()
        x = lp.add_variable("x", 0.0, 1.0, 1.0)
        lp.add_row({x: 1.0}, ">=", 2.0)
        assert lp.solve().status == "infeasible"
        with pytest.raises(LpError):
            lp.values()

    def test_inconsistent_bounds(self):
        """Test branching bounds that cross are caught before calling the solver"""
        lp = HighsLp()
        x = lp.add_variable("x", 0.0, 1.0, 1.0)
        lp.set_bounds(x, 1.0, 0.0)
        assert lp.get_bounds(x) == (1.0, 0.0)
        assert lp.solve().status == "infeasible"
        assert lp.solves == 0

    def test_bad_rows(self):
        """Test unknown senses and variables are rejected"""
        lp = HighsLp()
        x = lp.add_variable("x", 0.0, 1.0, 1.0)
        with pytest.raises(LpError):
            lp.add_row({x: 1.0}, ">", 0.0)
        with pytest.raises(LpError):
            lp.add_row({5: 1.0}, ">=", 0.0)

    def test_unbounded(self):
        """Test an unbounded LP raises"""
        lp = HighsLp()
        lp.add_variable("x", 0.0, None, -1.0)
        with pytest.raises(LpError):
            lp.solve()

    def test_no_solution_yet(self):
        """Test values before the first solve"""
        with pytest.raises(LpError):
            HighsLp().objective()
