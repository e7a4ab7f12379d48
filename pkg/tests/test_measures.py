import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import oracle_joint_probs, oracle_knowledge, oracle_visibility
from multibeam_duality.coplanar import make_config
from multibeam_duality.measures import (
    Measurement,
    bayes_posteriors,
    fringe_visibility_check,
    outcome_likelihoods,
    partial_knowledge,
    predictability,
    visibility,
    which_way_knowledge,
)
from multibeam_duality.properties import random_config, random_measurement
from multibeam_duality.qcore import (
    BeamDetectorConfig,
    DetectorState,
    DimensionError,
    PopulationVector,
    ValidationError,
    bloch_projector,
)

SZ = Measurement((bloch_projector((0, 0, 1), 1), bloch_projector((0, 0, 1), -1)), ("+", "-"))
SX = Measurement((bloch_projector((1, 0, 0), 1), bloch_projector((1, 0, 0), -1)), ("+", "-"))


def orthonormal_config(pops):
    n = len(pops)
    states = tuple(DetectorState(tuple(np.eye(n)[i])) for i in range(n))
    return BeamDetectorConfig(PopulationVector(pops), states)


class TestMeasurement:
    def test_rejects_non_idempotent(self):
        with pytest.raises(ValidationError):
            Measurement((np.eye(2) * 0.5, np.eye(2) * 0.5))

    def test_rejects_incomplete(self):
        with pytest.raises(ValidationError):
            Measurement((np.diag([1, 0]),))

    def test_rejects_overlapping(self):
        with pytest.raises(ValidationError):
            Measurement((np.diag([1, 0]), np.diag([1, 0]), np.diag([-1, 1])))

    def test_labels_default(self):
        assert SZ.labels == ("+", "-")
        assert Measurement((np.diag([1, 0]), np.diag([0, 1]))).labels == ("0", "1")


class TestVisibility:
    def test_identical_states(self, uniform3):
        cfg = BeamDetectorConfig(uniform3, (DetectorState((1, 0)),) * 3)
        assert visibility(cfg) == pytest.approx(1.0, abs=1e-15)

    def test_orthogonal_states(self):
        assert visibility(orthonormal_config((0.2, 0.3, 0.5))) == 0.0

    def test_coplanar_crossover(self):
        assert visibility(make_config(2 * math.pi / 3)) == pytest.approx(0.5, abs=1e-12)

    def test_single_beam(self):
        cfg = BeamDetectorConfig(PopulationVector((1.0,)), (DetectorState((1, 0)),))
        with pytest.raises(ValidationError):
            visibility(cfg)

    def test_matches_oracle(self, rng):
        for _ in range(30):
            cfg = random_config(rng, int(rng.integers(2, 6)), int(rng.integers(2, 4)))
            assert abs(visibility(cfg) - oracle_visibility(cfg)) < 1e-13


class TestPredictability:
    @pytest.mark.parametrize(
        "zeta, expected",
        [((1 / 3, 1 / 3, 1 / 3), 0.0), ((1.0, 0.0, 0.0), 1.0), ((0.5, 0.5, 0.0), 0.5)],
    )
    def test_values(self, zeta, expected):
        assert predictability(PopulationVector(zeta)) == pytest.approx(expected, abs=1e-15)

    def test_uniform_is_exactly_zero(self):
        assert predictability(PopulationVector.uniform(7)) == 0.0

    def test_partial_knowledge(self):
        assert partial_knowledge(PopulationVector((0.0, 0.5, 0.5))) == pytest.approx(0.5, abs=1e-15)
        assert partial_knowledge(PopulationVector((0.0, 1.0, 0.0))) == 1.0
        assert partial_knowledge(PopulationVector.uniform(3)) == 0.0


class TestLikelihoods:
    def test_sigma_z_formula(self):
        t = 0.7
        cfg = BeamDetectorConfig.from_bloch(PopulationVector.uniform(2), [(math.sin(t), 0, math.cos(t)), (0, 0, 1)])
        q = outcome_likelihoods(cfg, SZ)
        assert q[0, 0] == pytest.approx((1 + math.cos(t)) / 2, abs=1e-15)

    def test_sigma_x_on_z_state(self):
        cfg = BeamDetectorConfig.from_bloch(PopulationVector.uniform(2), [(0, 0, 1), (0, 0, 1)])
        assert outcome_likelihoods(cfg, SX)[0] == pytest.approx([0.5, 0.5], abs=1e-15)

    def test_coplanar_pi(self):
        q = outcome_likelihoods(make_config(math.pi), SZ)
        assert q[:, 0] == pytest.approx([1, 0, 0], abs=1e-15)

    def test_rows_stochastic(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 4))
            cfg = random_config(rng, 4, d)
            q = outcome_likelihoods(cfg, random_measurement(rng, d))
            assert np.allclose(q.sum(axis=1), 1.0, atol=1e-12)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            outcome_likelihoods(random_config(rng, 3, 3), SZ)


class TestBayes:
    def test_deterministic_identity(self):
        pops = PopulationVector((0.2, 0.3, 0.5))
        p, posts = bayes_posteriors(pops, np.eye(3))
        assert p == pytest.approx([0.2, 0.3, 0.5])
        for k, post in enumerate(posts):
            assert post.as_array() == pytest.approx(np.eye(3)[k])

    def test_coplanar_pi_sigma_z(self):
        q = outcome_likelihoods(make_config(math.pi), SZ)
        p, posts = bayes_posteriors(PopulationVector.uniform(3), q)
        assert p == pytest.approx([1 / 3, 2 / 3], abs=1e-15)
        assert posts[0].as_array() == pytest.approx([1, 0, 0], abs=1e-15)
        assert posts[1].as_array() == pytest.approx([0, 0.5, 0.5], abs=1e-15)

    def test_uninformative(self):
        pops = PopulationVector((0.1, 0.6, 0.3))
        q = np.tile([0.25, 0.75], (3, 1))
        _, posts = bayes_posteriors(pops, q)
        for post in posts:
            assert post.as_array() == pytest.approx(pops.as_array(), abs=1e-15)

    def test_zero_probability_outcome_dropped(self):
        pops = PopulationVector((0.5, 0.5))
        q = np.array([[1.0, 0.0], [1.0, 0.0]])
        p, posts = bayes_posteriors(pops, q)
        assert posts[1] is None and p[1] == 0.0

    def test_rows_must_be_stochastic(self):
        with pytest.raises(ValidationError):
            bayes_posteriors(PopulationVector.uniform(2), np.array([[0.5, 0.4], [0.5, 0.5]]))

    def test_matches_joint_oracle(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 4))
            cfg = random_config(rng, int(rng.integers(2, 6)), d)
            meas = random_measurement(rng, d)
            p, posts = bayes_posteriors(cfg.populations, outcome_likelihoods(cfg, meas))
            joint = oracle_joint_probs(cfg, meas.projectors)
            assert np.allclose(p, joint.sum(axis=0), atol=1e-13)
            for l, post in enumerate(posts):
                if post is not None:
                    assert np.allclose(post.as_array(), joint[:, l] / joint[:, l].sum(), atol=1e-10)


class TestWhichWayKnowledge:
    def test_coplanar_pi_sigma_z(self):
        rep = which_way_knowledge(make_config(math.pi), SZ)
        assert rep.total == pytest.approx(2 / 3, abs=1e-15)
        assert rep.partial_knowledge == pytest.approx((1.0, 0.5), abs=1e-15)

    def test_coplanar_pi_sigma_x(self):
        assert which_way_knowledge(make_config(math.pi), SX).total == pytest.approx(0.0, abs=1e-15)

    def test_identical_states_give_predictability(self):
        pops = PopulationVector((0.7, 0.2, 0.1))
        cfg = BeamDetectorConfig(pops, (DetectorState.from_unnormalized((1, 1j)),) * 3)
        assert which_way_knowledge(cfg, SZ).total == pytest.approx(predictability(pops), abs=1e-15)

    def test_dropped_outcome_reported(self, uniform3):
        cfg = BeamDetectorConfig(uniform3, (DetectorState((1, 0)),) * 3)
        rep = which_way_knowledge(cfg, SZ)
        assert rep.dropped == ("-",) and rep.labels == ("+",)
        assert sum(rep.outcome_probs) == pytest.approx(1.0)

    def test_matches_definition_oracle(self, rng):
        for _ in range(40):
            d = int(rng.integers(2, 4))
            cfg = random_config(rng, int(rng.integers(2, 6)), d)
            meas = random_measurement(rng, d)
            assert abs(which_way_knowledge(cfg, meas).total - oracle_knowledge(cfg, meas.projectors)) < 1e-10

    def test_report_invariants(self, rng):
        for _ in range(40):
            d = int(rng.integers(2, 4))
            cfg = random_config(rng, int(rng.integers(2, 6)), d)
            rep = which_way_knowledge(cfg, random_measurement(rng, d))
            assert sum(rep.outcome_probs) == pytest.approx(1.0, abs=1e-9)
            assert rep.total == pytest.approx(
                sum(p * k for p, k in zip(rep.outcome_probs, rep.partial_knowledge)), abs=1e-12
            )
            assert all(0 <= k <= 1 for k in rep.partial_knowledge)
            assert rep.total >= predictability(cfg.populations) - 1e-9


class TestFringeCheck:
    def test_identical(self, uniform3):
        cfg = BeamDetectorConfig(uniform3, (DetectorState((1, 0)),) * 3)
        assert fringe_visibility_check(cfg, 16) == pytest.approx(1.0, abs=2e-6)

    def test_orthogonal(self):
        assert fringe_visibility_check(orthonormal_config((0.2, 0.3, 0.5)), 16) == pytest.approx(0.0, abs=2e-6)

    def test_crossover(self):
        assert fringe_visibility_check(make_config(2 * math.pi / 3), 32) == pytest.approx(0.5, abs=2e-6)

    def test_grid_too_small(self, uniform3):
        with pytest.raises(ValidationError):
            fringe_visibility_check(make_config(1.0), 4)

    def test_agrees_with_algebraic(self, rng):
        for n in (2, 3, 4):
            cfg = random_config(rng, n, 2)
            assert abs(fringe_visibility_check(cfg, 32) - visibility(cfg)) < 2e-6

    def test_error_does_not_grow_with_grid(self, rng):
        cfg = random_config(rng, 3, 3)
        V = visibility(cfg)
        errs = [abs(fringe_visibility_check(cfg, g) - V) for g in (8, 16, 32, 64)]
        assert max(errs) < 2e-6
        assert errs[-1] <= errs[0] + 1e-12


configs = st.builds(
    lambda seed, n, d, uniform: random_config(np.random.default_rng(seed), n, d, uniform),
    st.integers(0, 2**32 - 1),
    st.integers(2, 5),
    st.integers(2, 3),
    st.booleans(),
)


@settings(max_examples=200, deadline=None)
@given(configs)
def test_pv_inequality(cfg):
    V, P = visibility(cfg), predictability(cfg.populations)
    assert 0 <= V <= 1 and 0 <= P <= 1
    assert P**2 + V**2 <= 1 + 1e-9


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(2, 3))
def test_pv_equality_without_marking(seed, n, d):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng, n, d)
    same = BeamDetectorConfig(cfg.populations, (cfg.detector_states[0],) * n)
    V, P = visibility(same), predictability(same.populations)
    assert abs(P**2 + V**2 - 1) < 1e-9


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(2, 3))
def test_sorting_never_loses_knowledge(seed, n, d):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng, n, d)
    meas = random_measurement(rng, d)
    p, posts = bayes_posteriors(cfg.populations, outcome_likelihoods(cfg, meas))
    mix = sum(pl * post.as_array() for pl, post in zip(p, posts) if post is not None)
    assert np.max(np.abs(mix - cfg.populations.as_array())) < 1e-9
    assert which_way_knowledge(cfg, meas).total >= predictability(cfg.populations) - 1e-9
