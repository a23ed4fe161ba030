"""Distance, ball membership, and problem validation."""

import math

import pytest
from hypothesis import given, strategies as st

from drxp import (
    INF,
    Categorical,
    ClassificationProblem,
    DiscreteOrdinal,
    Instance,
    diff_set,
    distance,
    in_ball,
    validate_explanation_problem,
)
from drxp.errors import DomainViolation, PredictionMismatch, Unsupported
from drxp.models import LookupTable
from drxp.problem import BALL_TOL, check_norm, check_ordering, ordered


class TestDistance:
    def test_single_coordinate_difference(self):
        assert distance((0, 1, 1), (1, 1, 1), 1) == pytest.approx(1.0)

    @pytest.mark.parametrize("p", [0, 1, 2, INF])
    def test_identity_is_zero(self, p):
        assert distance((1, 1, 1), (1, 1, 1), p) == 0.0

    def test_l1_adversarial_point(self):
        assert distance((0.5, 0.5, 1), (1, 1, 1), 1) == pytest.approx(1.0)

    def test_euclidean_three_four_five(self):
        assert distance((3, 4, 0), (0, 0, 0), 2) == pytest.approx(5.0)

    def test_linf_is_max_coordinate(self):
        assert distance((0.5, 1, -0.5), (1, 1, 1), INF) == pytest.approx(1.5)

    def test_hamming_counts_differing_coordinates(self):
        assert distance((0, 1, 2, 3), (0, 9, 2, 8), 0) == 2
        assert isinstance(distance((0, 1), (1, 1), 0), int)

    def test_hamming_accepts_categorical_values(self):
        assert distance(("red", 1), ("blue", 1), 0) == 1

    @pytest.mark.parametrize("p", [1, 2, INF])
    def test_categorical_rejected_under_geometric_norms(self, p):
        with pytest.raises(Unsupported):
            distance(("red", 1), ("blue", 1), p)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            distance((1, 2), (1, 2, 3), 1)

    def test_unknown_norm_rejected(self):
        with pytest.raises(ValueError):
            check_norm(3)


coordinate = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
point3 = st.tuples(coordinate, coordinate, coordinate)


class TestDistanceProperties:
    @given(point3, point3, st.sampled_from([0, 1, 2, INF]))
    def test_symmetry(self, x, v, p):
        assert distance(x, v, p) == distance(v, x, p)

    @given(point3, st.sampled_from([0, 1, 2, INF]))
    def test_self_distance_zero(self, x, p):
        assert distance(x, x, p) == 0

    @given(point3, point3, point3, st.sampled_from([1, 2, INF]))
    def test_triangle_inequality(self, x, y, z, p):
        assert distance(x, z, p) <= distance(x, y, p) + distance(y, z, p) + 1e-9

    @given(point3, point3)
    def test_hamming_is_exact_count(self, x, v):
        assert distance(x, v, 0) == sum(1 for a, b in zip(x, v) if a != b)


class TestBall:
    def test_boundary_point_is_inside(self):
        # non-strict comparison: distance exactly epsilon counts as inside
        assert in_ball((0.5, 0.5, 1), (1, 1, 1), 1, 1.0)

    def test_point_beyond_tolerance_is_outside(self):
        assert not in_ball((0, 0, 1), (1, 1, 1), 1, 2.0 - 10 * BALL_TOL)

    def test_diff_set_is_one_based(self):
        assert diff_set((0.5, 1, 0.5), (1, 1, 1)) == frozenset({1, 3})

    def test_ordered_lists_members_in_declared_order(self):
        assert ordered(frozenset({1, 3}), (3, 2, 1)) == [3, 1]

    def test_check_ordering_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            check_ordering((1, 1, 2), 3)


def lookup_problem():
    domains = (DiscreteOrdinal((0, 1)), DiscreteOrdinal((0, 1)))
    classifier = LookupTable(entries=(((0, 0), 0),), default=1)
    return ClassificationProblem(domains=domains, classes=(0, 1), classifier=classifier)


class TestValidation:
    def test_accepts_matching_label(self, example1):
        # fixture construction itself is the acceptance; re-check the label
        assert example1.label == 1
        assert example1.problem.evaluate(example1.v) == 1

    def test_prediction_mismatch_carries_actual_label(self, example1):
        with pytest.raises(PredictionMismatch) as err:
            validate_explanation_problem(example1.problem, Instance((1, 1, 1), 0))
        assert err.value.predicted == 1

    def test_example6_instance_accepted(self, example6):
        assert example6.v == (1, 1)
        assert example6.label == 1

    def test_out_of_domain_point_rejected(self):
        problem = lookup_problem()
        with pytest.raises(DomainViolation):
            validate_explanation_problem(problem, Instance((0, 7), 1))

    def test_unknown_label_rejected(self):
        problem = lookup_problem()
        with pytest.raises(DomainViolation):
            validate_explanation_problem(problem, Instance((0, 1), 5))

    def test_wrong_arity_rejected(self):
        problem = lookup_problem()
        with pytest.raises(DomainViolation):
            validate_explanation_problem(problem, Instance((0, 1, 0), 1))


class TestDomains:
    def test_discrete_membership(self):
        d = DiscreteOrdinal((0, 0.5, 1))
        assert d.contains(0.5)
        assert not d.contains(0.25)
        assert d.enumerable_values() == (0, 0.5, 1)

    def test_categorical_membership(self):
        d = Categorical(("red", "green"))
        assert d.contains("red")
        assert not d.contains("blue")

    def test_continuous_grid(self, example1):
        d = example1.problem.domain_of(1)
        assert d.contains(1.37)  # interval membership, not grid membership
        assert not d.contains(4.5)
        values = d.enumerable_values()
        assert len(values) == 21
        assert values[0] == pytest.approx(-1.0) and values[-1] == pytest.approx(4.0)
        steps = {round(b - a, 9) for a, b in zip(values, values[1:])}
        assert steps == {0.25}
