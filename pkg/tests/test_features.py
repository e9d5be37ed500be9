import math

import numpy as np
import pytest

import oracles
from difem import (
    BBox,
    ConfigError,
    ContractViolation,
    FramePoses,
    Keypoint,
    VideoPoseSequence,
    aggregate_overlap,
    aggregate_velocity,
    extract_features,
    joint_overlap_count,
    joint_velocity,
    match_and_measure,
    person_bbox,
    selected_joints,
)
from difem.features import (
    FEATURE_NAMES,
    JointSpec,
    OverlapObservation,
    VelocityObservation,
    enabled_feature_names,
)
from helpers import (
    MISSING,
    full_person,
    person_from,
    random_frame,
    random_sequence,
    shift_frame,
)

JOINTS = selected_joints()


class TestSelectedJoints:
    def test_eleven_entries(self):
        assert len(JOINTS) == 11

    def test_weights(self):
        weights = {spec.name: spec.weight for spec in JOINTS}
        assert weights["right_elbow"] == 0.8
        assert weights["left_elbow"] == 0.8
        assert weights["neck"] == 1.0
        assert sum(1 for w in weights.values() if w == 1.0) == 9

    def test_body25_positions(self):
        index = {spec.name: spec.body25_index for spec in JOINTS}
        assert index == {
            "neck": 1, "right_elbow": 3, "right_wrist": 4, "left_elbow": 6,
            "left_wrist": 7, "right_hip": 9, "right_knee": 10, "right_ankle": 11,
            "left_hip": 12, "left_knee": 13, "left_ankle": 14,
        }

    def test_canonical_order(self):
        assert [s.name for s in JOINTS[:2]] == ["right_wrist", "left_wrist"]
        assert JOINTS[-1].name == "neck"

    def test_custom_index_map(self):
        table = {spec.name: i for i, spec in enumerate(JOINTS)}
        remapped = selected_joints(table)
        assert [spec.body25_index for spec in remapped] == list(range(11))

    def test_bad_maps_rejected(self):
        with pytest.raises(ConfigError):
            selected_joints({"neck": 1})
        table = {spec.name: 1 for spec in JOINTS}
        with pytest.raises(ConfigError):
            selected_joints(table)
        table = {spec.name: spec.body25_index for spec in JOINTS}
        table["neck"] = 25
        with pytest.raises(ConfigError):
            selected_joints(table)


class TestJointVelocity:
    def test_zero_displacement(self):
        kp = Keypoint(33.0, 44.0, 0.8)
        assert joint_velocity(kp, kp, 0.5) == 0.0

    def test_three_four_five(self):
        a = Keypoint(10.0, 10.0, 0.9)
        b = Keypoint(13.0, 14.0, 0.9)
        assert joint_velocity(a, b, 1.0) == 5.0

    def test_weight_inside_the_root(self):
        a = Keypoint(10.0, 10.0, 0.9)
        b = Keypoint(13.0, 14.0, 0.9)
        assert joint_velocity(a, b, 0.8) == math.sqrt(20.0)

    def test_weight_scaling_property(self):
        # Multiplying the weight by c scales the speed by sqrt(c).
        rng = np.random.default_rng(11)
        for _ in range(2000):
            a = Keypoint(*rng.uniform(0, 500, 2), 0.9)
            b = Keypoint(*rng.uniform(0, 500, 2), 0.9)
            w = float(rng.uniform(0.1, 3.0))
            c = float(rng.uniform(0.1, 9.0))
            lhs = joint_velocity(a, b, c * w)
            rhs = math.sqrt(c) * joint_velocity(a, b, w)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_contract_checks(self):
        kp = Keypoint(1.0, 2.0, 0.9)
        with pytest.raises(ContractViolation):
            joint_velocity(kp, kp, 0.0)
        with pytest.raises(ContractViolation):
            joint_velocity(MISSING, kp, 1.0)


class TestMatching:
    def test_both_frames_empty(self):
        assert match_and_measure(FramePoses(0), FramePoses(1), JOINTS) == []

    def test_stationary_person_eleven_zero_observations(self):
        person = full_person()
        obs = match_and_measure(FramePoses(0, (person,)), FramePoses(1, (person,)), JOINTS)
        assert len(obs) == 11
        assert all(o.velocity == 0.0 for o in obs)
        assert {o.joint.name for o in obs} == {s.name for s in JOINTS}

    def test_nearest_candidate_wins_across_persons(self):
        wrist = JOINTS[0]
        source = person_from({wrist.body25_index: (100.0, 100.0)})
        near = person_from({wrist.body25_index: (102.0, 100.0)})
        far = person_from({wrist.body25_index: (107.0, 100.0)})
        obs = match_and_measure(
            FramePoses(0, (source,)), FramePoses(1, (far, near)), [wrist]
        )
        assert len(obs) == 1
        assert obs[0].velocity == 2.0

    def test_no_candidate_of_type_no_observation(self):
        wrist, neck = JOINTS[0], JOINTS[-1]
        source = person_from({wrist.body25_index: (10.0, 10.0), neck.body25_index: (12.0, 10.0)})
        target = person_from({neck.body25_index: (15.0, 10.0)})
        obs = match_and_measure(FramePoses(0, (source,)), FramePoses(1, (target,)), JOINTS)
        assert [o.joint.name for o in obs] == ["neck"]
        assert obs[0].velocity == 3.0

    def test_confidence_floor_filters_candidates(self):
        wrist = JOINTS[0]
        weak = Keypoint(11.0, 10.0, 0.2)
        strong = Keypoint(20.0, 10.0, 0.9)
        source = person_from({wrist.body25_index: (10.0, 10.0)})
        target = person_from({})
        kps = list(target.keypoints)
        kps[wrist.body25_index] = weak
        weak_person = type(target)(tuple(kps))
        obs = match_and_measure(
            FramePoses(0, (source,)),
            FramePoses(1, (weak_person, person_from({wrist.body25_index: strong}))),
            [wrist],
            confidence_floor=0.5,
        )
        assert len(obs) == 1
        assert obs[0].velocity == 10.0

    def test_matches_oracle_on_random_frames(self):
        rng = np.random.default_rng(23)
        for _ in range(120):
            frame_a = random_frame(rng, frame_index=0)
            frame_b = random_frame(rng, frame_index=1)
            seq = VideoPoseSequence("x", (frame_a, frame_b))
            got = sorted(o.velocity for o in match_and_measure(frame_a, frame_b, JOINTS))
            expected = sorted(oracles.velocities(seq, JOINTS))
            assert got == pytest.approx(expected, rel=1e-12)


class TestPersonBBox:
    def test_all_missing(self):
        assert person_bbox(person_from({})) is None

    def test_single_point_has_no_box(self):
        assert person_bbox(person_from({0: (10.0, 20.0)})) is None

    def test_two_points(self):
        box = person_bbox(person_from({0: (10.0, 20.0), 8: (30.0, 5.0)}))
        assert box == BBox(10.0, 30.0, 5.0, 20.0)

    def test_full_person_matches_scan(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            person = full_person(origin=tuple(rng.uniform(0, 50, 2)), spacing=float(rng.uniform(1, 9)))
            box = person_bbox(person)
            xs = [kp.x for kp in person.keypoints]
            ys = [kp.y for kp in person.keypoints]
            assert box == BBox(min(xs), max(xs), min(ys), max(ys))

    def test_uses_all_keypoints_not_just_selected(self):
        # Index 0 (nose) is not a selected joint but still stretches the box.
        person = person_from({0: (100.0, 0.0), 4: (0.0, 0.0), 7: (10.0, 10.0)})
        assert person_bbox(person).x_max == 100.0


def _three_inside_fixture(extra_inside=0):
    """Two persons: 3 (+extra) selected joints of A poke into B's box, none of
    B's selected joints fall inside A's box."""
    a_points = {
        0: (20.0, 40.0),    # nose anchors A's torso, not a selected joint
        8: (30.0, 160.0),   # mid hip, not selected
        1: (25.0, 60.0),    # neck, selected, outside B
        4: (110.0, 80.0),   # right wrist, inside B
        3: (105.0, 90.0),   # right elbow, inside B
        7: (120.0, 100.0),  # left wrist, inside B
    }
    if extra_inside:
        a_points[6] = (115.0, 95.0)  # left elbow, inside B
    b_points = {
        0: (100.0, 40.0),   # nose defines B's left edge, not selected
        8: (160.0, 160.0),
        1: (140.0, 60.0),
        4: (150.0, 100.0),
        7: (155.0, 105.0),
        3: (145.0, 80.0),
        6: (150.0, 85.0),
        9: (140.0, 140.0),
        12: (150.0, 140.0),
    }
    return FramePoses(0, (person_from(a_points), person_from(b_points)))


class TestJointOverlap:
    def test_zero_or_one_person(self):
        assert joint_overlap_count(FramePoses(0), JOINTS).count == 0
        assert joint_overlap_count(FramePoses(0, (full_person(),)), JOINTS).count == 0

    def test_three_joints_inside(self):
        frame = _three_inside_fixture()
        assert joint_overlap_count(frame, JOINTS).count == 3

    def test_four_joints_inside(self):
        frame = _three_inside_fixture(extra_inside=1)
        assert joint_overlap_count(frame, JOINTS).count == 4

    def test_ordered_pairs_both_directions_counted(self):
        # Two persons standing inside each other's extent: both directions add up.
        a = person_from({0: (0.0, 0.0), 8: (100.0, 100.0), 4: (60.0, 60.0)})
        b = person_from({0: (50.0, 50.0), 8: (150.0, 150.0), 4: (80.0, 80.0)})
        # A's wrist (60, 60) is inside B's box; B's wrist (80, 80) inside A's box.
        assert joint_overlap_count(FramePoses(0, (a, b)), JOINTS).count == 2

    def test_person_without_box_accepts_no_joints(self):
        a = person_from({4: (50.0, 50.0), 0: (0.0, 0.0), 8: (100.0, 100.0)})
        lone = person_from({4: (60.0, 60.0)})  # single valid keypoint, no box
        assert joint_overlap_count(FramePoses(0, (lone, a)), JOINTS).count == 1

    def test_containment_monotonicity(self):
        frame = _three_inside_fixture()
        before = joint_overlap_count(frame, JOINTS).count
        # Move A's left knee (selected, currently missing) strictly inside B.
        a, b = frame.persons
        kps = list(a.keypoints)
        kps[13] = Keypoint(130.0, 100.0, 0.9)
        moved = FramePoses(0, (type(a)(tuple(kps)), b))
        assert joint_overlap_count(moved, JOINTS).count == before + 1

    def test_matches_oracle_on_random_frames(self):
        rng = np.random.default_rng(29)
        for _ in range(300):
            frame = random_frame(rng, max_persons=4)
            got = joint_overlap_count(frame, JOINTS).count
            assert got == oracles.overlap_count(frame, JOINTS)


class TestTranslationInvariance:
    def test_velocities_unchanged_under_shift(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            frame_a = random_frame(rng, frame_index=0)
            frame_b = random_frame(rng, frame_index=1)
            dx, dy = float(rng.uniform(1, 300)), float(rng.uniform(1, 300))
            base = [o.velocity for o in match_and_measure(frame_a, frame_b, JOINTS)]
            moved = [
                o.velocity
                for o in match_and_measure(shift_frame(frame_a, dx, dy), shift_frame(frame_b, dx, dy), JOINTS)
            ]
            assert moved == pytest.approx(base, rel=1e-9, abs=1e-9)

    def test_overlap_count_unchanged_under_shift(self):
        # Integer coordinates and shifts keep the arithmetic exact.
        rng = np.random.default_rng(37)
        for _ in range(60):
            frame = random_frame(rng, max_persons=4, integer_coords=True)
            dx, dy = float(rng.integers(1, 200)), float(rng.integers(1, 200))
            assert (
                joint_overlap_count(shift_frame(frame, dx, dy), JOINTS).count
                == joint_overlap_count(frame, JOINTS).count
            )


class TestAggregation:
    def test_velocity_hand_case(self):
        obs = [VelocityObservation(0, 0, JOINTS[0], v) for v in (3.0, 4.0, 5.0)]
        mean, peak, var = aggregate_velocity(obs)
        assert (mean, peak) == (4.0, 5.0)
        assert var == pytest.approx(2.0 / 3.0, rel=1e-15)

    def test_velocity_degenerate_cases(self):
        assert aggregate_velocity([]) == (0.0, 0.0, 0.0)
        zeros = [VelocityObservation(0, 0, JOINTS[0], 0.0)] * 4
        assert aggregate_velocity(zeros) == (0.0, 0.0, 0.0)

    def test_overlap_hand_cases(self):
        constant = [OverlapObservation(t, 3) for t in range(3)]
        assert aggregate_overlap(constant) == (3.0, 0.0)
        assert aggregate_overlap([OverlapObservation(0, 0), OverlapObservation(1, 4)]) == (2.0, 4.0)
        assert aggregate_overlap([]) == (0.0, 0.0)


class TestExtractFeatures:
    def test_static_single_person_video_is_all_zero(self):
        person = full_person()
        frames = tuple(FramePoses(t, (person,)) for t in range(5))
        fv = extract_features(VideoPoseSequence("static", frames))
        assert fv.values() == (0.0, 0.0, 0.0, 0.0, 0.0)

    def test_velocity_only_zeroes_overlap_slots(self):
        rng = np.random.default_rng(41)
        seq = random_sequence(rng, min_frames=4)
        fv = extract_features(seq, enable_velocity=True, enable_overlap=False)
        assert fv.mean_overlap == 0.0 and fv.var_overlap == 0.0
        assert fv.velocity_enabled and not fv.overlap_enabled
        assert fv.enabled_names() == FEATURE_NAMES[:3]
        assert fv.enabled_values() == fv.values()[:3]

    def test_overlap_only_zeroes_velocity_slots(self):
        rng = np.random.default_rng(43)
        seq = random_sequence(rng, min_frames=4)
        fv = extract_features(seq, enable_velocity=False, enable_overlap=True)
        assert fv.values()[:3] == (0.0, 0.0, 0.0)
        assert fv.enabled_names() == FEATURE_NAMES[3:]

    def test_both_disabled_rejected(self):
        with pytest.raises(ConfigError):
            extract_features(VideoPoseSequence("x"), False, False)
        with pytest.raises(ConfigError):
            enabled_feature_names(False, False)

    def test_empty_and_single_frame_sequences(self):
        assert extract_features(VideoPoseSequence("x")).values() == (0.0,) * 5
        one = VideoPoseSequence("x", (FramePoses(0, (full_person(),)),))
        assert extract_features(one).values() == (0.0,) * 5

    def test_matches_oracle_on_random_sequences(self):
        rng = np.random.default_rng(47)
        for _ in range(150):
            seq = random_sequence(rng)
            got = extract_features(seq).values()
            expected = oracles.feature_vector(seq, JOINTS)
            for g, e in zip(got, expected):
                assert math.isclose(g, e, rel_tol=1e-9, abs_tol=1e-12)

    def test_invariants_on_random_sequences(self):
        rng = np.random.default_rng(53)
        for _ in range(60):
            fv = extract_features(random_sequence(rng))
            assert min(fv.values()) >= 0.0
            assert fv.max_velocity >= fv.mean_velocity

    def test_normalization_scales_velocity_not_overlap(self):
        rng = np.random.default_rng(59)
        seq = random_sequence(rng, min_frames=6, max_frames=12)
        plain = extract_features(seq)
        scaled = extract_features(seq, normalize_diagonal=800.0)
        assert scaled.mean_velocity == pytest.approx(plain.mean_velocity / 800.0, rel=1e-9)
        assert scaled.max_velocity == pytest.approx(plain.max_velocity / 800.0, rel=1e-9)
        assert scaled.var_velocity == pytest.approx(plain.var_velocity / 800.0**2, rel=1e-9)
        assert scaled.mean_overlap == plain.mean_overlap
        assert scaled.var_overlap == plain.var_overlap
        with pytest.raises(ConfigError):
            extract_features(seq, normalize_diagonal=0.0)

    def test_per_frame_mean_variant(self):
        wrist = JOINTS[0]
        def at(x):
            return person_from({wrist.body25_index: (x, 0.0)})
        # Pair 0: two source persons match the lone wrist at 2 -> speeds 2, 8.
        # Pair 1: that person moves to 8 -> single speed 6.
        frames = (
            FramePoses(0, (at(0.0), at(10.0))),
            FramePoses(1, (at(2.0),)),
            FramePoses(2, (at(8.0),)),
        )
        seq = VideoPoseSequence("v", frames)
        flat = extract_features(seq, joints=[wrist])
        assert flat.mean_velocity == pytest.approx(16.0 / 3.0)
        grouped = extract_features(seq, joints=[wrist], per_frame_velocity_mean=True)
        assert grouped.mean_velocity == pytest.approx(5.5)   # mean of [5, 6]
        assert grouped.var_velocity == pytest.approx(0.25)
        assert grouped.max_velocity == flat.max_velocity == 8.0
