"""
Tests for cut builders, separation and the cut pool
"""

import json

import pytest

from dlshaped_vrpsd.core.cuts import (
    CutKind,
    CutPool,
    SeparationState,
    active_path,
    build_classic_cut,
    build_e_cut,
    build_initial_pool,
    build_p_cut,
    build_rci,
    build_s_cut,
    callback_separate,
    check_degrees,
    classic_separate,
    extract_routes,
    select_edge_set,
    separate_rci,
    support_graph,
)
from dlshaped_vrpsd.core.bounds import vehicles_needed
from dlshaped_vrpsd.core.builtin_instances import BUILTIN_INSTANCES
from dlshaped_vrpsd.core.errors import InvalidPathError, UnsupportedVariantError
from dlshaped_vrpsd.core.instance import VariantConfig, derive_variant, parse_instance
from dlshaped_vrpsd.core.recourse import Policy, RecourseCache

SIDES = [(1, 2), (1, 4), (2, 3), (3, 4)]


@pytest.fixture
def ring_x():
    """The route (1,2,3,4) around the square"""
    return {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0, (3, 4): 1.0, (0, 4): 1.0}


@pytest.fixture
def subtour_x():
    """A triangle over 1, 2, 3 disconnected from the depot and a back-and-forth trip to 4"""
    return {(1, 2): 1.0, (2, 3): 1.0, (1, 3): 1.0, (0, 4): 2.0}


@pytest.fixture
def state(vanishing):
    """Separation state of the square under restocking"""
    return SeparationState(instance=vanishing, policy=Policy.OR, cache=RecourseCache(vanishing, Policy.OR))


class TestBuilders:
    """Test the normalized form of each cut family"""

    def test_rci(self, vanishing):
        """Test Σ x(E(S)) ≤ |S| - k(S) as a ≥ row"""
        cut = build_rci(vanishing, [3, 1, 2])
        assert cut.kind is CutKind.RCI
        assert cut.customers == (1, 2, 3)
        assert cut.rhs == -2
        assert all(c == -1.0 for _, c in cut.x_coefs)
        assert cut.describe() == "x_1_2 + x_1_3 + x_2_3 <= 2"

    def test_p_cut(self, non_monotone):
        """Test the path cut with a given recourse value"""
        cut = build_p_cut(non_monotone, (1, 2, 3), 3.0)
        assert cut.edges == ((1, 2), (2, 3))
        assert cut.rhs == pytest.approx(-3.0)
        assert dict(cut.theta_coefs) == {1: 1.0, 2: 1.0, 3: 1.0}
        # θ = 0 and the whole path active: violation Q_p
        x = {(1, 2): 1.0, (2, 3): 1.0}
        assert cut.violation(x, {}) == pytest.approx(3.0)

    def test_p_cut_from_cache(self, vanishing):
        """Test the recourse value is looked up when a cache is given"""
        cut = build_p_cut(vanishing, (1, 2, 3, 4), RecourseCache(vanishing, Policy.OR))
        assert cut.coefficient == pytest.approx(0.125)
        assert not cut.trivial
        assert build_p_cut(vanishing, (1, 2), 0.0).trivial

    def test_p_cut_rejects_invalid_path(self, vanishing):
        """Test repeated customers are rejected"""
        with pytest.raises(InvalidPathError):
            build_p_cut(vanishing, (1, 1), 1.0)

    def test_s_cut(self, vanishing):
        """Test Σ_S θ ≥ L (x(E(S)) - |S| + m + 1)"""
        cut = build_s_cut(vanishing, [1, 2, 3], 1, 0.5)
        assert len(cut.edges) == 3
        assert cut.rhs == pytest.approx(0.5 * (1 + 1 - 3))
        with pytest.raises(ValueError):
            build_s_cut(vanishing, [1, 2], 0, 0.5)

    def test_e_cut(self, vanishing):
        """Test the edge-restricted cut over the sides of the square"""
        cut = build_e_cut(vanishing, [1, 2, 3, 4], SIDES, 1, 0.125)
        assert cut.edges == tuple(SIDES)
        assert cut.rhs == pytest.approx(-0.25)
        with pytest.raises(ValueError):
            build_e_cut(vanishing, [1, 2], [(3, 4)], 1, 0.125)

    def test_classic_cut(self, vanishing, ring_x):
        """Test the classic optimality cut at the ring"""
        cut = build_classic_cut(vanishing, ring_x, 0.125)
        assert cut.edges == ((1, 2), (2, 3), (3, 4))
        assert cut.rhs == pytest.approx(-0.25)
        assert cut.violation(ring_x, {0: 0.0}) == pytest.approx(0.125)
        assert cut.violation(ring_x, {0: 0.125}) == pytest.approx(0.0)

    def test_classic_cut_needs_fixed_fleet(self, vanishing, ring_x):
        """Test a variable fleet is rejected"""
        ecc = derive_variant(vanishing, VariantConfig.from_name("ecc"))
        with pytest.raises(UnsupportedVariantError):
            build_classic_cut(ecc, ring_x, 0.125)

    def test_to_dict(self, vanishing):
        """Test the cut log entry"""
        entry = build_e_cut(vanishing, [1, 2, 3, 4], SIDES, 1, 0.125, note="test").to_dict(0.1)
        assert entry["kind"] == "E"
        assert entry["S"] == [1, 2, 3, 4]
        assert entry["violation"] == 0.1
        assert entry["note"] == "test"


class TestInitialPool:
    """Test the S-cuts added before the first LP"""

    def test_square_has_no_informative_set(self, vanishing):
        """Test small sets of the square never need recourse"""
        assert build_initial_pool(vanishing) == []

    def test_restocking_pair(self, non_monotone):
        """Test the heavy pair gets its own cut"""
        pool = build_initial_pool(non_monotone)
        by_set = {cut.customers: cut for cut in pool}
        assert all(cut.kind is CutKind.S for cut in pool)
        assert by_set[(1, 3)].coefficient == pytest.approx(6.08, abs=0.01)


class TestSupportGraph:
    """Test support graph helpers"""

    def test_support_graph(self, vanishing, ring_x):
        """Test depot edges are left out"""
        graph = support_graph(vanishing, ring_x)
        assert set(graph.nodes) == {1, 2, 3, 4}
        assert graph.number_of_edges() == 3

    def test_check_degrees(self, vanishing, ring_x):
        """Test the degree equations"""
        check_degrees(vanishing, ring_x)
        broken = dict(ring_x)
        broken[(0, 4)] = 0.5
        with pytest.raises(ValueError):
            check_degrees(vanishing, broken)

    def test_extract_routes(self, vanishing, ring_x, subtour_x):
        """Test routes start at the smaller end and subtours are skipped"""
        assert extract_routes(vanishing, ring_x) == [(1, 2, 3, 4)]
        assert extract_routes(vanishing, subtour_x) == [(4,)]

    def test_active_path(self, vanishing, ring_x, subtour_x):
        """Test a component is a path only if its active edges form one"""
        assert active_path(support_graph(vanishing, ring_x), [1, 2, 3, 4]) == (1, 2, 3, 4)
        assert active_path(support_graph(vanishing, subtour_x), [1, 2, 3]) is None


class TestSeparation:
    """Test the separation routines"""

    def test_subtour_violates_capacity(self, vanishing, subtour_x):
        """Test the triangle violates its rounded capacity inequality by one"""
        assert separate_rci(vanishing, subtour_x) == [((1, 2, 3), pytest.approx(1.0))]

    def test_ring_has_no_capacity_violation(self, vanishing, ring_x):
        """Test a feasible route is capacity-clean"""
        assert separate_rci(vanishing, ring_x) == []

    def test_edge_set_of_the_ring(self, vanishing, ring_x):
        """Test the diagonals are dropped because restocking along them is free"""
        assert select_edge_set(vanishing, ring_x, [1, 2, 3, 4]) == SIDES
        with pytest.raises(ValueError):
            select_edge_set(vanishing, {(0, 1): 2.0}, [1, 2])

    def test_integer_ring(self, state, ring_x):
        """Test the ring yields a P-cut and an E-cut but no S-cut"""
        found = callback_separate(ring_x, {i: 0.0 for i in range(1, 5)}, True, state)
        kinds = [cut.kind for _, cut in found]
        assert CutKind.P in kinds
        assert CutKind.E in kinds
        assert CutKind.S not in kinds
        e_cut = next(cut for _, cut in found if cut.kind is CutKind.E)
        assert e_cut.edges == tuple(SIDES)
        assert e_cut.rhs == pytest.approx(-0.25)
        assert all(v == pytest.approx(0.125) for v, _ in found)

    def test_ring_without_e_cuts(self, vanishing, ring_x):
        """Test only the P-cut remains once E-cuts are off"""
        state = SeparationState(
            instance=vanishing, policy=Policy.OR, cache=RecourseCache(vanishing, Policy.OR), e_cuts=False
        )
        found = callback_separate(ring_x, {}, True, state)
        assert [cut.kind for _, cut in found] == [CutKind.P]

    def test_satisfied_theta(self, state, ring_x):
        """Test nothing is returned once θ pays the ring recourse"""
        assert callback_separate(ring_x, {1: 0.125}, True, state) == []

    def test_subtour_returns_capacity_cut(self, state, subtour_x):
        """Test the capacity cut of the triangle"""
        found = callback_separate(subtour_x, {}, True, state)
        assert found[0][1].kind is CutKind.RCI
        assert found[0][1].customers == (1, 2, 3)

    def test_overloaded_subtour_gets_set_cuts(self, subtour_x):
        """Test a set needing two vehicles still yields an S-cut with m_S = 2"""
        doc = dict(BUILTIN_INSTANCES["vanishing-s-cuts"])
        doc.update(Q=4, M="auto", demands=[{"type": "poisson", "lambda": 2} for _ in range(4)])
        instance = parse_instance(doc)
        assert vehicles_needed(instance, [1, 2, 3]) == 2
        state = SeparationState(instance=instance, policy=Policy.OR, cache=RecourseCache(instance, Policy.OR))
        found = callback_separate(subtour_x, {i: 0.0 for i in range(1, 5)}, True, state)
        s_cuts = [cut for _, cut in found if cut.kind is CutKind.S and cut.customers == (1, 2, 3)]
        assert len(s_cuts) == 1
        assert s_cuts[0].vehicles == 2
        assert s_cuts[0].coefficient > 0.0

    def test_classic_separation(self, state, ring_x):
        """Test the classic cut at an integer capacity-clean point"""
        found = classic_separate(ring_x, 0.0, True, state)
        assert len(found) == 1
        violation, cut = found[0]
        assert cut.kind is CutKind.CLASSIC
        assert violation == pytest.approx(0.125)
        assert classic_separate(ring_x, 0.0, False, state) == []


class TestCutPool:
    """Test the global pool"""

    def test_duplicates_are_dropped(self, vanishing):
        """Test cuts with the same key are added once"""
        pool = CutPool()
        cut = build_rci(vanishing, [1, 2])
        assert pool.add(cut, violation=0.5, node=0)
        assert not pool.add(build_rci(vanishing, [2, 1]))
        assert len(pool) == 1
        assert pool.counts()["RCI"] == 1
        assert pool.of_kind(CutKind.P) == []
        assert pool.log[0]["node"] == 0

    def test_write_log(self, vanishing, tmp_path):
        """Test the audit trail is written as JSON"""
        pool = CutPool()
        pool.add(build_e_cut(vanishing, [1, 2, 3, 4], SIDES, 1, 0.125), violation=0.125)
        target = tmp_path / "cuts.json"
        pool.write_log(target)
        entries = json.loads(target.read_text())
        assert entries[0]["kind"] == "E"
        assert entries[0]["violation"] == 0.125
