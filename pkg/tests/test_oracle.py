"""Robustness-oracle implementations: grid search, synthetic, wrappers."""

import itertools
import random
import threading
import time

import pytest

from drxp import (
    INF,
    AdvFound,
    Cancelled,
    ClassificationProblem,
    ContinuousOrdinal,
    CountingOracle,
    DiscreteOrdinal,
    GridOracle,
    Instance,
    MemoOracle,
    OracleQuery,
    Robust,
    SyntheticOracle,
    SyntheticSpec,
    validate_explanation_problem,
    verify_witness,
)
from drxp.errors import CombinatorialLimit, Unsupported
from drxp.models import LookupTable
from drxp.oracle import is_adv

from conftest import random_suite


def naive_find_adv_ex(ep, query):
    """Independent exhaustive check, written from the definitions.

    Enumerates the full domain product with explicit loops and its own
    distance computation; returns True iff a constrained adversarial
    example exists. Kept deliberately separate from the library code.
    """
    v, label = ep.v, ep.label
    m = ep.problem.m
    points = [()]
    for i in range(1, m + 1):
        if i in query.fixed:
            values = [v[i - 1]]
        else:
            values = list(ep.problem.domain_of(i).enumerable_values())
        points = [p + (val,) for p in points for val in values]
    for point in points:
        if query.norm == 0:
            dist = 0
            for a, b in zip(point, v):
                if a != b:
                    dist += 1
        elif query.norm == INF:
            dist = 0.0
            for a, b in zip(point, v):
                dist = max(dist, abs(a - b))
        else:
            total = 0.0
            for a, b in zip(point, v):
                total += abs(a - b) ** query.norm
            dist = total ** (1.0 / query.norm)
        if dist > query.epsilon + 1e-9:
            continue
        if ep.problem.evaluate(tuple(point)) != label:
            return True
    return False


class TestGridOracle:
    def test_example1_free_ball_has_adversarial_example(self, example1):
        oracle = GridOracle(example1)
        verdict = oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))
        assert isinstance(verdict, AdvFound)
        assert verify_witness(example1, verdict.witness, OracleQuery(frozenset(), 1.0, 1))
        # the only class-changing moves at this radius displace x1
        assert verdict.witness[0] != 1

    def test_example1_fixing_x1_is_robust(self, example1):
        oracle = GridOracle(example1)
        assert isinstance(oracle.find_adv_ex(OracleQuery(frozenset({1}), 1.0, 1)), Robust)

    def test_example6_witness_is_lexicographic_first(self, example6):
        oracle = GridOracle(example6)
        verdict = oracle.find_adv_ex(OracleQuery(frozenset(), 0.5, INF))
        assert verdict == AdvFound(witness=(0.5, 0.5))

    def test_fixing_everything_is_robust(self, example7):
        oracle = GridOracle(example7)
        for eps, norm in [(0.5, 1), (10.0, 1), (2.0, INF), (3, 0)]:
            verdict = oracle.find_adv_ex(OracleQuery(example7.features, eps, norm))
            assert isinstance(verdict, Robust)

    def test_example7_witness_sets(self, example7):
        oracle = GridOracle(example7)
        assert oracle.witness_set(OracleQuery(frozenset(), 1.0, 1)) == [
            (0.5, 0.5, 1),
            (1, 0.5, 0.5),
        ]
        wider = oracle.witness_set(OracleQuery(frozenset(), 1.5, 1))
        assert sorted(wider) == [(-0.5, 1, 1), (0.5, 0.5, 1), (1, 0.5, 0.5), (1, 1, -0.5)]

    def test_example7_fixed_1_3_robust_at_wider_radius(self, example7):
        oracle = GridOracle(example7)
        assert isinstance(oracle.find_adv_ex(OracleQuery(frozenset({1, 3}), 1.5, 1)), Robust)

    def test_continuous_free_feature_without_grid_rejected(self):
        problem = ClassificationProblem(
            domains=(ContinuousOrdinal(0.0, 1.0), DiscreteOrdinal((0, 1))),
            classes=(0, 1),
            classifier=LookupTable(entries=(), default=1),
        )
        ep = validate_explanation_problem(problem, Instance((0.5, 0), 1))
        oracle = GridOracle(ep)
        with pytest.raises(Unsupported):
            oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))
        # fixed continuous features never need enumeration
        assert isinstance(oracle.find_adv_ex(OracleQuery(frozenset({1}), 1.0, 1)), Robust)

    def test_candidate_cap(self, example7):
        oracle = GridOracle(example7, point_limit=10)
        with pytest.raises(CombinatorialLimit):
            oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))

    def test_pre_set_cancel_returns_cancelled(self, example7):
        oracle = GridOracle(example7)
        cancel = threading.Event()
        cancel.set()
        verdict = oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1), cancel=cancel)
        assert isinstance(verdict, Cancelled)

    def test_epsilon_must_be_positive(self):
        with pytest.raises(ValueError):
            OracleQuery(frozenset(), 0.0, 1)


class TestGridAgainstNaive:
    def test_agreement_on_random_problems(self):
        # independent double enumeration on 100 seeded problems
        rng = random.Random(2024)
        for ep in random_suite(100, base_seed=500):
            oracle = GridOracle(ep)
            features = sorted(ep.features)
            for _ in range(3):
                fixed = frozenset(rng.sample(features, rng.randint(0, len(features))))
                eps = rng.choice([0.5, 1.0, 2.5])
                norm = rng.choice([0, 1, INF])
                if norm == 0:
                    eps = rng.choice([1, 2])
                query = OracleQuery(fixed, eps, norm)
                verdict = oracle.find_adv_ex(query)
                assert is_adv(verdict) == naive_find_adv_ex(ep, query)
                if is_adv(verdict):
                    assert verify_witness(ep, verdict.witness, query)


class TestMonotonicity:
    def test_subset_monotonicity_exhaustive(self, example6):
        oracle = GridOracle(example6)
        features = sorted(example6.features)
        for eps in (0.5, 1.0):
            robust = {}
            for r in range(len(features) + 1):
                for combo in itertools.combinations(features, r):
                    s = frozenset(combo)
                    robust[s] = not is_adv(oracle.find_adv_ex(OracleQuery(s, eps, INF)))
            for s, s_robust in robust.items():
                for t in robust:
                    if s <= t and s_robust:
                        assert robust[t], f"fixed {set(s)} robust but superset {set(t)} not"

    def test_epsilon_monotonicity_exhaustive(self, example7):
        oracle = GridOracle(example7)
        features = sorted(example7.features)
        radii = (0.5, 1.0, 1.5)
        for r in range(len(features) + 1):
            for combo in itertools.combinations(features, r):
                s = frozenset(combo)
                verdicts = [is_adv(oracle.find_adv_ex(OracleQuery(s, e, 1))) for e in radii]
                # AdvFound at a radius implies AdvFound at every larger one
                assert verdicts == sorted(verdicts)


class TestSyntheticOracle:
    def spec(self, **kwargs):
        return SyntheticSpec(m=3, hidden_breakers=(frozenset({1}), frozenset({2, 3})), **kwargs)

    def test_breakers_all_intersected_is_robust(self):
        oracle = SyntheticOracle(self.spec())
        assert isinstance(oracle.find_adv_ex(OracleQuery(frozenset({1, 2}), 1.0, 1)), Robust)

    def test_disjoint_breaker_yields_adv(self):
        oracle = SyntheticOracle(self.spec())
        verdict = oracle.find_adv_ex(OracleQuery(frozenset({2, 3}), 1.0, 1))
        assert isinstance(verdict, AdvFound)
        assert verdict.witness is None

    def test_empty_fixed_set_yields_adv(self):
        oracle = SyntheticOracle(self.spec())
        assert is_adv(oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1)))

    def test_witnesses_flagged_symbolic(self):
        assert SyntheticOracle(self.spec()).witnesses_are_geometric is False

    def test_latency_is_simulated(self):
        oracle = SyntheticOracle(self.spec(latency=0.05))
        start = time.perf_counter()
        oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))
        assert time.perf_counter() - start >= 0.05

    def test_cancellation_interrupts_latency(self):
        oracle = SyntheticOracle(self.spec(latency=30.0))
        cancel = threading.Event()
        results = []

        def call():
            results.append(oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1), cancel=cancel))

        worker = threading.Thread(target=call)
        start = time.perf_counter()
        worker.start()
        cancel.set()
        worker.join(timeout=5)
        assert not worker.is_alive()
        assert time.perf_counter() - start < 5
        assert isinstance(results[0], Cancelled)

    def test_empty_breaker_family_rejected(self):
        with pytest.raises(ValueError):
            SyntheticSpec(m=3, hidden_breakers=())

    def test_nested_breakers_rejected(self):
        with pytest.raises(ValueError):
            SyntheticSpec(m=3, hidden_breakers=(frozenset({1}), frozenset({1, 2})))

    def test_breaker_outside_universe_rejected(self):
        with pytest.raises(ValueError):
            SyntheticSpec(m=3, hidden_breakers=(frozenset({4}),))


class TestWitnessVerification:
    def test_accepts_valid_witness(self, example7):
        assert verify_witness(example7, (0.5, 0.5, 1), OracleQuery(frozenset(), 1.0, 1))

    def test_rejects_instance_itself(self, example7):
        assert not verify_witness(example7, (1, 1, 1), OracleQuery(frozenset(), 1.0, 1))

    def test_rejects_point_outside_ball(self, example7):
        assert not verify_witness(example7, (-0.5, 1, 1), OracleQuery(frozenset(), 1.0, 1))

    def test_accepts_same_point_at_wider_radius(self, example7):
        assert verify_witness(example7, (-0.5, 1, 1), OracleQuery(frozenset(), 1.5, 1))

    def test_rejects_moved_fixed_feature(self, example7):
        assert not verify_witness(example7, (0.5, 0.5, 1), OracleQuery(frozenset({1}), 1.5, 1))


class TestWrappers:
    def test_counting_oracle_records_sequence(self, example7):
        oracle = CountingOracle(GridOracle(example7))
        oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))
        oracle.find_adv_ex(OracleQuery(frozenset({2}), 1.0, 1))
        assert oracle.calls == 2
        assert oracle.cancelled == 0
        assert oracle.sequence == [(frozenset(), 1.0), (frozenset({2}), 1.0)]

    def test_counting_oracle_counts_cancellations_separately(self):
        oracle = CountingOracle(SyntheticOracle(SyntheticSpec(m=2, hidden_breakers=(frozenset({1}),))))
        cancel = threading.Event()
        cancel.set()
        oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1), cancel=cancel)
        oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))
        assert oracle.calls == 1
        assert oracle.cancelled == 1

    def test_counting_oracle_verifies_witnesses(self, example7):
        oracle = CountingOracle(GridOracle(example7), verify=True)
        verdict = oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))
        assert is_adv(verdict)

    def test_counting_oracle_rejects_bad_witness(self, example7):
        class LyingOracle(GridOracle):
            def find_adv_ex(self, query, cancel=None):
                return AdvFound(witness=(1, 1, 1))

        oracle = CountingOracle(LyingOracle(example7), verify=True)
        with pytest.raises(AssertionError):
            oracle.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))

    def test_memo_oracle_caches_repeat_queries(self, example7):
        counter = CountingOracle(GridOracle(example7))
        memo = MemoOracle(counter)
        q = OracleQuery(frozenset({2}), 1.0, 1)
        first = memo.find_adv_ex(q)
        second = memo.find_adv_ex(q)
        assert first == second
        assert counter.calls == 1

    def test_memo_oracle_distinguishes_epsilon_and_norm(self, example7):
        counter = CountingOracle(GridOracle(example7))
        memo = MemoOracle(counter)
        memo.find_adv_ex(OracleQuery(frozenset(), 1.0, 1))
        memo.find_adv_ex(OracleQuery(frozenset(), 1.5, 1))
        memo.find_adv_ex(OracleQuery(frozenset(), 1.0, INF))
        assert counter.calls == 3

    def test_memo_oracle_never_caches_cancelled(self):
        inner = SyntheticOracle(SyntheticSpec(m=2, hidden_breakers=(frozenset({1}),)))
        memo = MemoOracle(inner)
        cancel = threading.Event()
        cancel.set()
        q = OracleQuery(frozenset(), 1.0, 1)
        assert isinstance(memo.find_adv_ex(q, cancel=cancel), Cancelled)
        assert is_adv(memo.find_adv_ex(q))
