import math

import numpy as np
import pytest

from trendweight.clustering import (
    Assignment,
    ClusteringConfig,
    assign_to_existing,
    single_pass_cluster,
)

from conftest import basis_instance, make_instance


def reference_single_pass(vectors, threshold, seed_centroids=None):
    """Independent plain-Python oracle for the single-pass rule.

    Returns (assignment index per input, member lists, founder flags).
    Centroids are running means of raw vectors; ties go to the lowest id.
    """
    centroids = [list(c) for c in (seed_centroids or [])]
    sizes = [1] * len(centroids)
    members = [[] for _ in centroids]
    founders = [None] * len(centroids)
    assignment = []
    for pos, vec in enumerate(vectors):
        vec = list(vec)
        vnorm = math.sqrt(sum(x * x for x in vec))
        best_id, best_sim = None, -2.0
        for cid, cent in enumerate(centroids):
            cnorm = math.sqrt(sum(x * x for x in cent))
            dot = sum(a * b for a, b in zip(cent, vec))
            sim = dot / (cnorm * vnorm)
            if sim > best_sim:
                best_id, best_sim = cid, sim
        if best_id is not None and best_sim > threshold:
            n = sizes[best_id]
            centroids[best_id] = [(c * n + x) / (n + 1) for c, x in zip(centroids[best_id], vec)]
            sizes[best_id] += 1
            members[best_id].append(pos)
            assignment.append(best_id)
        else:
            centroids.append(vec)
            sizes.append(1)
            members.append([pos])
            founders.append(pos)
            assignment.append(len(centroids) - 1)
    return assignment, members, founders


def instances_from_vectors(vectors, prefix="i"):
    return [
        make_instance(f"{prefix}{k:03d}", "2020-01-01", embedding=v) for k, v in enumerate(vectors)
    ]


class TestSinglePass:
    def test_empty_input(self):
        assert single_pass_cluster([], ClusteringConfig(theta_sim=0.5)) == []

    def test_singleton(self):
        inst = make_instance("only", "2020-01-01", embedding=[0.0, 2.0])
        (cluster,) = single_pass_cluster([inst], ClusteringConfig(theta_sim=0.5))
        assert cluster.topic_id == 0
        assert cluster.member_ids == ["only"]
        assert np.array_equal(cluster.centroid, [0.0, 2.0])

    def test_three_vector_sequence_matches_hand_simulation(self):
        e1 = [1.0, 0.0]
        e2 = (np.array([0.9, 0.1]) / np.linalg.norm([0.9, 0.1])).tolist()
        e3 = [0.0, 1.0]
        instances = instances_from_vectors([e1, e2, e3])
        clusters = single_pass_cluster(instances, ClusteringConfig(theta_sim=0.5))

        assert [c.member_ids for c in clusters] == [["i000", "i001"], ["i002"]]
        # centroid of c0 is the mean of e1 and e2
        expected = (np.array(e1) + np.array(e2)) / 2
        assert np.allclose(clusters[0].centroid, expected, atol=1e-12)
        # e3's similarity to that updated centroid was far below threshold
        sim = expected[1] / np.linalg.norm(expected)
        assert sim < 0.1

    def test_high_threshold_gives_all_singletons(self):
        rng = np.random.default_rng(4)
        vectors = rng.normal(size=(12, 6))
        instances = instances_from_vectors(vectors)
        clusters = single_pass_cluster(instances, ClusteringConfig(theta_sim=1.0 - 1e-12))
        assert len(clusters) == 12
        assert all(c.size == 1 for c in clusters)

    def test_boundary_equality_founds_new_cluster(self):
        # colinear vectors give similarity exactly 1.0; strict > theta_sim=1.0
        # means even an identical direction founds a new cluster
        instances = instances_from_vectors([[1.0, 0.0], [0.5, 0.0]])
        clusters = single_pass_cluster(instances, ClusteringConfig(theta_sim=1.0))
        assert len(clusters) == 2

    def test_partition_invariant(self):
        rng = np.random.default_rng(5)
        instances = instances_from_vectors(rng.normal(size=(40, 8)))
        clusters = single_pass_cluster(instances, ClusteringConfig(theta_sim=0.3))
        seen = [mid for c in clusters for mid in c.member_ids]
        assert sorted(seen) == sorted(x.id for x in instances)
        assert len(seen) == len(set(seen))

    def test_counts_match_membership_and_centroid_is_member_mean(self):
        rng = np.random.default_rng(6)
        vectors = rng.normal(size=(25, 5))
        instances = instances_from_vectors(vectors)
        clusters = single_pass_cluster(instances, ClusteringConfig(theta_sim=0.2))
        by_id = {x.id: x for x in instances}
        for c in clusters:
            assert sum(c.counts_by_quarter.values()) == c.size
            mean = np.mean([by_id[mid].embedding for mid in c.member_ids], axis=0)
            assert np.allclose(c.centroid, mean, atol=1e-9)

    def test_assignment_moment_similarity_exceeded_threshold(self):
        # replay the pass with the independent oracle, capturing each join's similarity
        rng = np.random.default_rng(7)
        vectors = rng.normal(size=(30, 4))
        theta = 0.4
        instances = instances_from_vectors(vectors)
        clusters = single_pass_cluster(instances, ClusteringConfig(theta_sim=theta))

        centroids, sizes = [], []
        joined_sims = {}
        for pos, vec in enumerate(vectors):
            sims = [
                float(np.dot(c, vec) / (np.linalg.norm(c) * np.linalg.norm(vec)))
                for c in centroids
            ]
            best = int(np.argmax(sims)) if sims else -1
            if sims and sims[best] > theta:
                joined_sims[pos] = sims[best]
                centroids[best] = (centroids[best] * sizes[best] + vec) / (sizes[best] + 1)
                sizes[best] += 1
            else:
                centroids.append(np.array(vec))
                sizes.append(1)
        for c in clusters:
            founder = c.member_ids[0]
            for mid in c.member_ids[1:]:
                pos = int(mid[1:])
                assert joined_sims[pos] > theta, f"{mid} joined below threshold"
            assert int(founder[1:]) not in joined_sims

    def test_deterministic_for_fixed_order(self):
        rng = np.random.default_rng(8)
        vectors = rng.normal(size=(30, 6))
        a = single_pass_cluster(instances_from_vectors(vectors), ClusteringConfig(theta_sim=0.4))
        b = single_pass_cluster(instances_from_vectors(vectors), ClusteringConfig(theta_sim=0.4))
        assert [c.member_ids for c in a] == [c.member_ids for c in b]
        assert all(np.array_equal(x.centroid, y.centroid) for x, y in zip(a, b))

    @pytest.mark.parametrize("trial", range(10))
    def test_matches_reference_oracle(self, trial):
        rng = np.random.default_rng(100 + trial)
        n = int(rng.integers(1, 21))
        vectors = rng.normal(size=(n, 5))
        theta = float(rng.uniform(0.1, 0.9))
        clusters = single_pass_cluster(instances_from_vectors(vectors), ClusteringConfig(theta_sim=theta))
        _, members, _ = reference_single_pass(vectors.tolist(), theta)
        got = [[int(mid[1:]) for mid in c.member_ids] for c in clusters]
        assert got == [m for m in members if m]

    def test_zero_norm_embedding_names_instance(self):
        bad = make_instance("badvec", "2020-01-01", embedding=[0.0, 0.0])
        with pytest.raises(ValueError, match="badvec"):
            single_pass_cluster([bad], ClusteringConfig(theta_sim=0.5))

    def test_missing_embedding_names_instance(self):
        bad = make_instance("noemb", "2020-01-01", text="only text")
        with pytest.raises(ValueError, match="noemb"):
            single_pass_cluster([bad], ClusteringConfig(theta_sim=0.5))


class TestAssignToExisting:
    def _trained(self):
        instances = [basis_instance(f"train{k}", "2019-01-01", axis=k) for k in range(3)]
        return single_pass_cluster(instances, ClusteringConfig(theta_sim=0.5))

    def test_equal_to_centroid_is_existing(self):
        trained = self._trained()
        test = [basis_instance("t0", "2020-01-01", axis=1)]
        (tag,) = assign_to_existing(test, trained, ClusteringConfig(theta_sim=0.5))
        assert tag == Assignment("t0", topic_id=1, existing=True)

    def test_orthogonal_is_new(self):
        trained = self._trained()
        test = [basis_instance("t0", "2020-01-01", axis=9)]
        (tag,) = assign_to_existing(test, trained, ClusteringConfig(theta_sim=0.5))
        assert not tag.existing

    def test_two_identical_far_items_share_a_new_cluster(self):
        trained = self._trained()
        test = [
            basis_instance("ta", "2020-01-01", axis=9),
            basis_instance("tb", "2020-01-02", axis=9),
        ]
        tags = assign_to_existing(test, trained, ClusteringConfig(theta_sim=0.5))
        assert [t.existing for t in tags] == [False, False]
        assert tags[0].topic_id == tags[1].topic_id  # second joined the first's cluster

    def test_trained_centroids_keep_updating(self):
        trained = self._trained()

        def planar(iid, date, angle):
            v = np.zeros(16)
            v[0], v[4] = math.cos(angle), math.sin(angle)
            return make_instance(iid, date, embedding=v)

        # ta sits at 23 degrees from centroid 0 (cos 0.92 > 0.9, joins and drags
        # the centroid to ~11.5 degrees); tb at 31 degrees is below 0.9 against
        # the ORIGINAL centroid but clears it against the updated one
        ta = planar("ta", "2020-01-01", math.radians(23))
        tb = planar("tb", "2020-01-02", math.radians(31))
        assert float(tb.embedding[0]) < 0.9  # would not join the original centroid
        tags = assign_to_existing([ta, tb], trained, ClusteringConfig(theta_sim=0.9))
        assert tags[0] == Assignment("ta", topic_id=0, existing=True)
        assert tags[1] == Assignment("tb", topic_id=0, existing=True)

    def test_does_not_mutate_trained_clusters(self):
        trained = self._trained()
        before = [c.centroid.copy() for c in trained]
        assign_to_existing(
            [basis_instance("t0", "2020-01-01", axis=0)], trained, ClusteringConfig(theta_sim=0.5)
        )
        assert all(np.array_equal(a, b) for a, b in zip(before, [c.centroid for c in trained]))

    def test_requires_trained_clusters(self):
        with pytest.raises(ValueError):
            assign_to_existing([basis_instance("t", "2020-01-01", axis=0)], [], ClusteringConfig())
