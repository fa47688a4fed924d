import numpy as np
import pytest

from uler.explain import Explanation
from uler.feedback import (
    AggregationError,
    AnnotationRecord,
    JudgmentConfig,
    aggregate_annotations,
    annotations_from_csv,
    annotations_to_csv,
    judged_from_csv,
    judged_to_csv,
    pearson,
    simulate_judgment,
)


def expl(values, instance_id="e"):
    return Explanation(np.asarray(values, dtype=float), base_value=0.0, instance_id=instance_id)


class TestPearson:
    def test_identity(self):
        assert pearson([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0

    def test_exact_anticorrelation(self):
        assert pearson([1.0, 2.0, 3.0], [3.0, 2.0, 1.0]) == -1.0

    def test_constant_vector_convention(self):
        assert pearson([1.0, 1.0, 1.0], [0.3, 5.0, -2.0]) == 0.0

    def test_length_validation(self):
        with pytest.raises(ValueError):
            pearson([1.0], [2.0])
        with pytest.raises(ValueError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])


class TestSimulateJudgment:
    def test_identical_explanations(self):
        j = simulate_judgment(expl([1.0, 2.0, 3.0]), expl([1.0, 2.0, 3.0]))
        assert j.label == 1
        assert j.wrong_set.size == 0
        assert set(j.correct_set.tolist()) == {0, 1, 2}

    def test_anticorrelated_is_low_quality(self):
        j = simulate_judgment(expl([1.0, 2.0, 3.0]), expl([-1.0, -2.0, -3.0]))
        assert j.label == 0

    def test_spec_defaults(self):
        cfg = JudgmentConfig()
        assert cfg.tau_z == 0.25
        assert cfg.u_pct == 0.75

    def test_prefix_hand_example(self):
        # diffs (0.5, 0.3, 0.1, 0.1), low quality, u=0.75: first two cover 0.8 >= 0.75
        z = expl([0.5, 0.3, 0.1, 0.1])
        oracle = expl([0.0, 0.0, 0.0, 0.0])
        j = simulate_judgment(z, oracle, JudgmentConfig(tau_z=0.99, u_pct=0.75))
        assert j.label == 0
        assert set(j.wrong_set.tolist()) == {0, 1}

    def test_high_quality_uses_complementary_mass(self):
        z = expl([0.5, 0.3, 0.1, 0.1])
        oracle = expl([0.0, 0.0, 0.0, 0.0])
        # same diffs but labeled high quality: prefix only needs 25% of L1=1.0
        j = simulate_judgment(z, oracle, JudgmentConfig(tau_z=-1.0, u_pct=0.75))
        assert j.label == 1
        assert set(j.wrong_set.tolist()) == {0}

    def test_minimal_prefix_property_against_bruteforce(self):
        rng = np.random.default_rng(0)
        cfg = JudgmentConfig()
        for _ in range(300):
            d = int(rng.integers(2, 10))
            z = expl(rng.standard_normal(d))
            oracle = expl(rng.standard_normal(d))
            j = simulate_judgment(z, oracle, cfg)
            diffs = np.abs(z.relevance - oracle.relevance)
            l1 = diffs.sum()
            q = cfg.u_pct if j.label == 0 else 1.0 - cfg.u_pct
            order = np.lexsort((np.arange(d), -diffs))
            # brute force: smallest k whose prefix covers q * l1
            expected_k = next(k for k in range(1, d + 1) if np.cumsum(diffs[order])[k - 1] >= q * l1)
            assert j.wrong_set.size == expected_k
            assert set(j.wrong_set.tolist()) == set(order[:expected_k].tolist())

    def test_label_invariant_to_joint_positive_rescaling(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            z = rng.standard_normal(5)
            oracle = rng.standard_normal(5)
            a = simulate_judgment(expl(z), expl(oracle))
            b = simulate_judgment(expl(3.7 * z), expl(3.7 * oracle))
            assert a.label == b.label

    def test_low_quality_has_nonempty_wrong_set(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            z = rng.standard_normal(6)
            oracle = rng.standard_normal(6)
            j = simulate_judgment(expl(z), expl(oracle))
            if j.label == 0:
                assert j.wrong_set.size >= 1

    def test_ties_broken_by_feature_index(self):
        z = expl([1.0, 1.0, 0.0])
        oracle = expl([0.0, 0.0, 0.0])
        j = simulate_judgment(z, oracle, JudgmentConfig(tau_z=0.99, u_pct=0.6))
        # diffs (1, 1, 0): need 1.2 of L1=2 -> two entries; tie at index 0 then 1
        assert j.wrong_set.tolist() == [0, 1]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            simulate_judgment(expl([1.0, 2.0]), expl([1.0, 2.0, 3.0]))


def record(eid, aid, rating, flagged=(), attention=True):
    return AnnotationRecord(eid, aid, rating, tuple(flagged), attention)


def three_explanations():
    return {f"e{i}": expl([0.1 * (i + 1), -0.2], instance_id=f"e{i}") for i in range(3)}


class TestAggregateAnnotations:
    def test_mean_rating_labels(self):
        records = [record("e0", f"a{i}", r, flagged=(0,)) for i, r in enumerate([4, 4, 5, 4, 4])]
        # keep annotators valid: each needs varied ratings across the session
        records += [record("e1", f"a{i}", 1 + (i % 2), flagged=(1,)) for i in range(5)]
        judged, report = aggregate_annotations(records, three_explanations())
        by_id = {j.explanation.instance_id: j for j in judged}
        assert by_id["e0"].label == 1  # mean 4.2
        assert by_id["e1"].label == 0  # mean < 3

    def test_mean_exactly_three_is_high_quality(self):
        records = [record("e0", "a0", 3, flagged=(0,)), record("e0", "a1", 3, flagged=(0,)),
                   record("e1", "a0", 1), record("e1", "a1", 5)]
        judged, _ = aggregate_annotations(records, three_explanations())
        by_id = {j.explanation.instance_id: j for j in judged}
        assert by_id["e0"].label == 1

    def test_high_disagreement_excluded(self):
        ratings = [1, 5, 1, 5, 1]  # population stddev 1.96 > 1.25
        records = [record("e0", f"a{i}", r, flagged=(0,)) for i, r in enumerate(ratings)]
        records += [record("e1", f"a{i}", 2 + (i % 2), flagged=(0,)) for i in range(5)]
        judged, report = aggregate_annotations(records, three_explanations())
        excluded = dict(report.excluded_explanations)
        assert "e0" in excluded and "stddev" in excluded["e0"]
        assert {j.explanation.instance_id for j in judged} == {"e1"}

    def test_majority_flagging(self):
        flags = [(0,), (0,), (0,), (), ()]  # feature 0 flagged by 3 of 5
        records = [record("e0", f"a{i}", 3 + (i % 2), flagged=f) for i, f in enumerate(flags)]
        # feature 1 flagged by 2 of 5 on e1
        flags2 = [(1,), (1,), (), (), ()]
        records += [record("e1", f"a{i}", 3 + ((i + 1) % 2), flagged=f) for i, f in enumerate(flags2)]
        # keep a3/a4 eligible: they flag something on a third explanation
        records += [record("e2", "a3", 2, flagged=(1,)), record("e2", "a4", 2, flagged=(0,))]
        judged, report = aggregate_annotations(records, three_explanations())
        assert report.excluded_annotators == []
        by_id = {j.explanation.instance_id: j for j in judged}
        assert by_id["e0"].wrong_set.tolist() == [0]
        assert by_id["e1"].wrong_set.tolist() == []

    def test_attention_check_exclusion(self):
        records = [record("e0", "bad", 4, flagged=(0,), attention=False),
                   record("e0", "good", 4, flagged=(0,)), record("e1", "good", 2, flagged=(1,))]
        judged, report = aggregate_annotations(records, three_explanations())
        assert ("bad", "failed 1 attention check(s)") in report.excluded_annotators

    def test_all_identical_ratings_exclusion(self):
        records = [record("e0", "flat", 3, flagged=(0,)), record("e1", "flat", 3, flagged=(0,)),
                   record("e0", "ok", 4, flagged=(0,)), record("e1", "ok", 2, flagged=(1,))]
        _, report = aggregate_annotations(records, three_explanations())
        assert ("flat", "all ratings identical") in report.excluded_annotators

    def test_zero_flags_exclusion(self):
        records = [record("e0", "noflag", 4), record("e1", "noflag", 2),
                   record("e0", "ok", 4, flagged=(0,)), record("e1", "ok", 2, flagged=(1,))]
        _, report = aggregate_annotations(records, three_explanations())
        assert ("noflag", "no features flagged in any trial") in report.excluded_annotators

    def test_empty_survivor_set_raises_with_report(self):
        records = [record("e0", "flat", 3, flagged=(0,)), record("e1", "flat", 3, flagged=(0,))]
        with pytest.raises(AggregationError) as err:
            aggregate_annotations(records, three_explanations())
        assert err.value.report.excluded_annotators

    def test_order_invariance(self):
        rng = np.random.default_rng(3)
        records = [record(f"e{i % 3}", f"a{j}", 3 + ((i + j) % 2), flagged=((i + j) % 2,))
                   for i in range(3) for j in range(5)]
        judged_a, _ = aggregate_annotations(records, three_explanations())
        shuffled = list(records)
        rng.shuffle(shuffled)
        judged_b, _ = aggregate_annotations(shuffled, three_explanations())
        labels_a = {j.explanation.instance_id: (j.label, j.wrong_set.tolist()) for j in judged_a}
        labels_b = {j.explanation.instance_id: (j.label, j.wrong_set.tolist()) for j in judged_b}
        assert labels_a == labels_b

    def test_rating_validation(self):
        with pytest.raises(ValueError):
            AnnotationRecord("e0", "a0", 6, (), True)


class TestJudgedCsv:
    def test_roundtrip(self, tmp_path):
        from uler.feedback import JudgedExplanation

        judged = [
            JudgedExplanation(expl([1.0, -2.0, 0.5], "a"), 1, np.array([2]), np.array([0, 1])),
            JudgedExplanation(expl([0.0, 0.25, -1.5], "b"), 0, np.array([0, 1]), np.array([2])),
        ]
        path = tmp_path / "judged.csv"
        judged_to_csv(path, judged, provenance='{"v": 1}')
        back = judged_from_csv(path)
        assert [j.label for j in back] == [1, 0]
        assert back[0].wrong_set.tolist() == [2]
        assert back[1].wrong_set.tolist() == [0, 1]
        np.testing.assert_allclose(back[1].explanation.relevance, judged[1].explanation.relevance)


class TestAnnotationCsv:
    def test_roundtrip(self, tmp_path):
        records = [record("e0", "a0", 4, flagged=(0, 2)), record("e1", "a1", 1, attention=False)]
        path = tmp_path / "annotations.csv"
        annotations_to_csv(path, records)
        back = annotations_from_csv(path)
        assert back[0].flagged_features == (0, 2)
        assert back[1].attention_pass is False

    def test_header_validation(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(ValueError, match="expected header"):
            annotations_from_csv(path)
