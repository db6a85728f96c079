"""
Tests for the partition-recourse lower bounds
"""

import math

import numpy as np
import pytest

from dlshaped_vrpsd.core.bounds import (
    best_lower_bound,
    demand_grid,
    greedy_vehicle_order,
    lower_bound_L1,
    lower_bound_L2,
    partition_dp,
    recourse_need_probability,
    scaled_gcd,
    vehicles_needed,
)
from dlshaped_vrpsd.core.errors import BoundNotApplicableError
from dlshaped_vrpsd.core.oracle import enumerate_L
from dlshaped_vrpsd.core.recourse import Policy

DIAGONALS = [(1, 3), (2, 4)]


class TestGrid:
    """Test the demand grid helpers"""

    @pytest.mark.parametrize("values,expected", [
        ([0.5, 1.5], 0.5),
        ([9, 1, 9], 1.0),
        ([0.25, 0.5], 0.25),
        ([1 / 3], 0.001),
        ([1 / 3, 1 / 3], 1 / 3),
    ])
    def test_scaled_gcd(self, values, expected):
        """Test GCD of reals, with the grid fallback for non-terminating decimals"""
        assert scaled_gcd(values) == pytest.approx(expected)

    def test_demand_grid(self, vanishing):
        """Test groups of the square instance"""
        grid = demand_grid(vanishing, [1, 2, 3, 4])
        assert grid.mu_bar == pytest.approx(0.5)
        assert grid.groups == 4
        assert grid.groups_per_vehicle == 6

    def test_vehicles_needed(self, vanishing, non_monotone):
        """Test the vehicle count lower bound"""
        assert vehicles_needed(vanishing, [1, 2, 3, 4]) == 1
        assert vehicles_needed(non_monotone, [1, 2, 3]) == 1
        assert vehicles_needed(non_monotone, [1, 3]) == 1
        assert demand_grid(non_monotone, [1, 3]).groups == 2


class TestPartitionDp:
    """Test the vehicle allocation program"""

    def test_small_table(self):
        """Test the cheapest split of two groups over two vehicles"""
        costs = np.array([[0.0, 1.0, 3.0], [0.0, 2.0, 5.0]])
        assert partition_dp(costs, 2, 2) == pytest.approx(3.0)

    def test_over_capacity(self):
        """Test more groups than the fleet can carry"""
        costs = np.zeros((2, 2))
        assert partition_dp(costs, 3, 1) == math.inf


class TestGeneralBound:
    """Test the bound for identically distributed demands"""

    def test_need_probability(self, vanishing):
        """Test P[four Bernoulli(0.5) > 3]"""
        assert recourse_need_probability(vanishing, [1, 2, 3, 4], 4) == pytest.approx(1 / 16)
        assert recourse_need_probability(vanishing, [1, 2, 3, 4], 0) == 0.0

    def test_free_restock_gives_zero(self, vanishing):
        """Test a zero preventive cost on a diagonal makes the bound vanish"""
        assert lower_bound_L1(vanishing, [1, 2, 3, 4], 1) == pytest.approx(0.0)

    def test_without_diagonals(self, vanishing):
        """Test forbidding the diagonals lifts the bound to 1/16"""
        assert lower_bound_L1(vanishing, [1, 2, 3, 4], 1, DIAGONALS) == pytest.approx(1 / 16)

    def test_requires_iid(self, non_monotone):
        """Test non-identical demands are rejected"""
        with pytest.raises(BoundNotApplicableError):
            lower_bound_L1(non_monotone, [1, 2, 3], 1)

    def test_greedy_order(self, vanishing):
        """Test the floor sequence has one entry per vehicle"""
        floor = greedy_vehicle_order(vanishing, [1, 2, 3, 4], 2, DIAGONALS)
        assert len(floor.order) == 1
        assert len(floor.recourse) == 2
        assert floor.recourse[0] == pytest.approx(1.0)
        with pytest.raises(ValueError):
            greedy_vehicle_order(vanishing, [1, 2], 3)


class TestPoissonBound:
    """Test the bound for Poisson demands"""

    def test_requires_poisson(self, vanishing):
        """Test non-Poisson demands are rejected"""
        with pytest.raises(BoundNotApplicableError):
            lower_bound_L2(vanishing, [1, 2, 3, 4], 1)

    def test_rejects_capped_poisson(self, non_monotone):
        """Test demands conditioned on a cap do not count as Poisson"""
        with pytest.raises(BoundNotApplicableError):
            lower_bound_L2(non_monotone, [1, 2, 3], 1)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_below_exact_value_random(self, random_instance, seed):
        """Test validity on random Poisson sets"""
        instance = random_instance(seed, n=4, family="poisson", capacity=6)
        members = [1, 2, 3, 4]
        for m in range(vehicles_needed(instance, members), 3):
            exact, _ = enumerate_L(instance, members, m, (), Policy.OR)
            assert lower_bound_L2(instance, members, m) <= exact + 1e-9


class TestBestBound:
    """Test the combined bound"""

    def test_exact_enumeration_wins(self, vanishing):
        """Test small sets use the enumerated value"""
        assert best_lower_bound(vanishing, [1, 2, 3, 4], 1, DIAGONALS) == pytest.approx(0.125)
        assert best_lower_bound(vanishing, [1, 2, 3, 4], 1) == pytest.approx(0.0)

    def test_dp_only(self, vanishing):
        """Test the DP bound alone when enumeration is switched off"""
        value = best_lower_bound(vanishing, [1, 2, 3, 4], 1, DIAGONALS, exact_max_set=0)
        assert value == pytest.approx(1 / 16)


FORBIDDEN_CHAIN = [(), [(1, 2)], [(1, 2), (3, 4)]]


def random_sets(random_instance, count):
    """Seeded four-customer instances, alternating i.i.d. Poisson and i.i.d. Bernoulli demands."""
    for seed in range(count):
        if seed % 2:
            yield seed, random_instance(seed, n=4, family="bernoulli", capacity=2)
        else:
            yield seed, random_instance(seed, n=4, family="poisson", capacity=6, iid=True)


class TestRandomizedBounds:
    """Test bound validity and monotonicity on seeded random sets"""

    def test_general_bound_below_enumeration(self, random_instance):
        """Test L1 never exceeds the enumerated L(S, m)"""
        members = [1, 2, 3, 4]
        for seed, instance in random_sets(random_instance, 30):
            for m in range(vehicles_needed(instance, members), len(members) + 1):
                for forbidden in FORBIDDEN_CHAIN:
                    exact, _ = enumerate_L(instance, members, m, forbidden, Policy.OR)
                    bound = lower_bound_L1(instance, members, m, forbidden)
                    assert bound <= exact + 1e-9, (seed, m, forbidden)

    def test_poisson_bound_below_enumeration(self, random_instance):
        """Test L2 never exceeds the enumerated L(S, m)"""
        members = [1, 2, 3, 4]
        for seed in range(30):
            instance = random_instance(seed, n=4, family="poisson", capacity=6)
            for m in range(vehicles_needed(instance, members), len(members) + 1):
                for forbidden in FORBIDDEN_CHAIN:
                    exact, _ = enumerate_L(instance, members, m, forbidden, Policy.OR)
                    bound = lower_bound_L2(instance, members, m, forbidden)
                    assert bound <= exact + 1e-9, (seed, m, forbidden)

    def test_forbidding_edges_never_lowers_bounds(self, random_instance):
        """Test L1 and L2 are non-decreasing along a chain of forbidden edge sets"""
        members = [1, 2, 3, 4]
        for seed, instance in random_sets(random_instance, 30):
            m = vehicles_needed(instance, members)
            general = [lower_bound_L1(instance, members, m, forbidden) for forbidden in FORBIDDEN_CHAIN]
            assert general == sorted(general), seed
            if instance.is_poisson(members):
                poisson = [lower_bound_L2(instance, members, m, forbidden) for forbidden in FORBIDDEN_CHAIN]
                assert poisson == sorted(poisson), seed
