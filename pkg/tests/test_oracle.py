"""
Tests for the brute-force oracle and the property checkers
"""

import pytest

from dlshaped_vrpsd.core.errors import OracleSizeError
from dlshaped_vrpsd.core.oracle import (
    brute_force_solve,
    check_monotonicity,
    check_path_subsequences,
    check_subsequence_monotonicity,
    check_superadditivity,
    enumerate_L,
    proper_subsequences,
    set_partitions,
    undirected_paths,
    verify_telescoping_assignment,
)
from dlshaped_vrpsd.core.recourse import Policy, RecourseCache


class TestEnumeration:
    """Test the combinatorial helpers"""

    @pytest.mark.parametrize("items,blocks,count", [
        ([1, 2, 3, 4], 2, 7),
        ([1, 2, 3, 4, 5], 3, 25),
        ([1, 2, 3], 1, 1),
        ([1, 2, 3], 3, 1),
        ([1, 2], 3, 0),
    ])
    def test_set_partitions(self, items, blocks, count):
        """Test Stirling numbers of the second kind"""
        partitions = list(set_partitions(items, blocks))
        assert len(partitions) == count
        for partition in partitions:
            assert sorted(i for block in partition for i in block) == items

    def test_undirected_paths(self):
        """Test one orientation per path and forbidden edges"""
        assert len(list(undirected_paths([1, 2, 3]))) == 3
        assert list(undirected_paths([1, 2, 3], frozenset({(1, 3)}))) == [(1, 2, 3)]
        assert list(undirected_paths([5])) == [(5,)]

    def test_proper_subsequences(self):
        """Test every order-preserving proper subsequence appears"""
        subs = list(proper_subsequences((3, 1, 2)))
        assert len(subs) == 6
        assert (3, 2) in subs
        assert (2, 3) not in subs


class TestPartitionRecourse:
    """Test exact L(S, m)"""

    def test_diagonals_make_recourse_vanish(self, vanishing):
        """Test L(N,1) with and without the diagonals"""
        assert enumerate_L(vanishing, [1, 2, 3, 4], 1) == (pytest.approx(0.0, abs=1e-12), 1)
        value, _ = enumerate_L(vanishing, [1, 2, 3, 4], 1, [(1, 3), (2, 4)])
        assert value == pytest.approx(0.125)

    def test_more_vehicles(self, vanishing):
        """Test splitting the square over two vehicles needs no recourse"""
        value, _ = enumerate_L(vanishing, [1, 2, 3, 4], 2)
        assert value == pytest.approx(0.0)

    def test_size_guard(self, overestimation):
        """Test the enumeration refuses more than seven customers"""
        with pytest.raises(OracleSizeError):
            enumerate_L(overestimation, range(1, 9), 1)


class TestBruteForce:
    """Test the global brute-force optimum"""

    def test_square(self, vanishing):
        """Test the ring route costs 5 plus 1/8"""
        solution = brute_force_solve(vanishing)
        assert solution.objective == pytest.approx(5.125)
        assert solution.method == "brute-force"
        assert len(solution.routes) == 1

    def test_single_customer(self, single_customer):
        """Test one round trip with no recourse"""
        solution = brute_force_solve(single_customer)
        assert solution.objective == pytest.approx(2.0)
        assert solution.recourse_cost == pytest.approx(0.0)

    def test_size_guard(self, random_instance):
        """Test brute force refuses ten customers"""
        instance = random_instance(0, n=10, family="deterministic")
        with pytest.raises(OracleSizeError):
            brute_force_solve(instance)


class TestPropertyCheckers:
    """Test superadditivity, monotonicity and subsequence checks"""

    def test_superadditivity_holds_for_restocking(self, vanishing):
        """Test OR recourse is superadditive on the square"""
        report = check_superadditivity(vanishing, Policy.OR, max_len=4)
        assert report.holds
        assert report.checked > 0
        assert report.to_dict()["status"] == "holds"

    def test_superadditivity_guard(self, vanishing):
        """Test the depth guard"""
        with pytest.raises(OracleSizeError):
            check_superadditivity(vanishing, Policy.OR, max_len=9)

    def test_monotonicity_on_star(self, overestimation):
        """Test the failure-probability dominance breaks once five customers are involved"""
        assert check_monotonicity(overestimation, max_set=4).holds
        report = check_monotonicity(overestimation, max_set=5)
        assert not report.holds
        assert report.witnesses
        with pytest.raises(OracleSizeError):
            check_monotonicity(overestimation, max_set=7)

    def test_inserting_customer_lowers_restocking_recourse(self, non_monotone):
        """Test (1,3) costs more than (1,2,3) under OR"""
        report = check_path_subsequences(non_monotone, Policy.OR, [1, 2, 3])
        assert not report.holds
        assert [1, 3] in [w["subsequence"] for w in report.witnesses]

    def test_detour_recourse_dominates_subsequences(self, overestimation):
        """Test the full star route dominates all its subsequences under DTD"""
        report = check_path_subsequences(overestimation, Policy.DTD, range(1, 9))
        assert report.holds
        assert report.checked == 2 ** 8 - 2

    def test_subsequence_sweep(self, non_monotone):
        """Test the sweep over every feasible path finds the OR violation"""
        report = check_subsequence_monotonicity(non_monotone, Policy.OR, max_len=3)
        assert not report.holds
        with pytest.raises(OracleSizeError):
            check_subsequence_monotonicity(non_monotone, Policy.OR, max_len=8)

    def test_telescoping_overestimates(self, overestimation):
        """Test prefix increments of the full route under-assign its second half"""
        report = verify_telescoping_assignment(overestimation, Policy.DTD, [list(range(1, 9))])
        assert not report.holds
        assert [5, 6, 7, 8] in [w.get("subpath") for w in report.witnesses]
        assert set(report.details["theta"]) == {str(i) for i in range(1, 9)}
        assert report.details["routes"] == [list(range(1, 9))]

    def test_telescoping_turns_routes_to_cheaper_direction(self, random_instance):
        """Test each route is read in its cheaper recourse direction before assigning increments"""
        instance = random_instance(2, n=4, family="poisson", capacity=6)
        route = [1, 2, 3, 4]
        both = RecourseCache(instance, Policy.OR).evaluate(route)
        for given in (route, route[::-1]):
            report = verify_telescoping_assignment(instance, Policy.OR, [given])
            oriented = report.details["routes"][0]
            assert oriented in (route, route[::-1])
            assert RecourseCache(instance, Policy.OR).evaluate(oriented).forward == pytest.approx(both.value)


class TestMonotonicityOfFamilies:
    """Test the failure-probability dominance on i.i.d. families with f = 1"""

    @pytest.mark.parametrize("seed", range(4))
    def test_iid_poisson(self, random_instance, seed):
        """Test i.i.d. Poisson customers satisfy the property"""
        instance = random_instance(seed, n=6, family="poisson", capacity=10, iid=True)
        report = check_monotonicity(instance, max_set=6)
        assert report.holds
        assert report.checked > 0

    @pytest.mark.parametrize("seed", range(4))
    def test_iid_bernoulli(self, random_instance, seed):
        """Test i.i.d. Bernoulli customers satisfy the property"""
        instance = random_instance(seed, n=6, family="bernoulli", capacity=3)
        report = check_monotonicity(instance, max_set=6)
        assert report.holds
        assert report.checked > 0


@pytest.mark.slow
class TestRandomizedProperties:
    """Test recourse properties exhaustively on seeded random instances"""

    @pytest.mark.parametrize("seed", range(3))
    def test_restocking_superadditive_up_to_seven(self, random_instance, seed):
        """Test OR recourse is superadditive on every concatenation of up to seven customers"""
        instance = random_instance(seed, n=7, family="poisson", capacity=20)
        report = check_superadditivity(instance, Policy.OR, max_len=7)
        assert report.holds, report.witnesses[:1]
        assert report.checked > 0

    @pytest.mark.parametrize("seed", range(3))
    def test_restocking_superadditive_on_general_demands(self, random_instance, seed):
        """Test OR superadditivity with non-Poisson demands"""
        instance = random_instance(seed, n=6, family="discrete", capacity=6)
        assert check_superadditivity(instance, Policy.OR, max_len=6).holds

    def test_detour_properties_follow_monotonicity(self, random_instance):
        """Test DTD superadditivity and subsequence dominance on every instance with the property"""
        gated = 0
        for seed in range(8):
            family = ("poisson", "bernoulli", "discrete", "discrete")[seed % 4]
            instance = random_instance(seed, n=5, family=family, capacity=3 if family == "bernoulli" else 6)
            if not check_monotonicity(instance, max_set=5).holds:
                continue
            gated += 1
            assert check_superadditivity(instance, Policy.DTD, max_len=5).holds, seed
            assert check_subsequence_monotonicity(instance, Policy.DTD, max_len=5).holds, seed
        assert gated >= 4
