from __future__ import annotations

import math

import pytest

from ambientis.errors import InputError
from ambientis.posture import (
    JOINTS, GeometricClassifier, Posture, PostureClassifier, PostureLabel, Skeleton,
    classify_posture, knee_angle, load_classifier, register_classifier, synthetic_corpus,
    torso_leg_ratio,
)


def constructed(angle_deg: float, ratio: float, leg_conf: float = 0.9) -> Skeleton:
    """Skeleton with an exact knee angle and torso/leg vertical ratio."""
    leg = 100.0
    bend = (leg / 2) / math.tan(math.radians(angle_deg / 2))
    joints = {}
    for side, x0 in (("left", 40.0), ("right", 60.0)):
        joints[f"{side}_hip"] = (x0, 200.0, 0.9)
        joints[f"{side}_knee"] = (x0 + bend, 250.0, leg_conf)
        joints[f"{side}_ankle"] = (x0, 300.0, leg_conf)
        joints[f"{side}_shoulder"] = (x0, 200.0 - ratio * leg, 0.9)
    joints["head"] = (50.0, 200.0 - ratio * leg - 20, 0.9)
    return Skeleton(joints)


@pytest.mark.parametrize("angle,ratio,expected", [
    (178, 0.6, Posture.STANDING),
    (95, 1.5, Posture.SITTING),
    (160, 1.4, Posture.SITTING),
    (135, 1.0, Posture.OTHER),
    (150, 0.9, Posture.STANDING),
    (120, 1.0, Posture.SITTING),
])
def test_constructed_skeletons(angle, ratio, expected):
    skel = constructed(angle, ratio)
    assert knee_angle(skel) == pytest.approx(angle, abs=1e-6)
    assert torso_leg_ratio(skel) == pytest.approx(ratio, abs=1e-9)
    assert classify_posture(skel).label is expected


def test_low_leg_confidence_is_other():
    label = classify_posture(constructed(178, 0.6, leg_conf=0.1))
    assert label.label is Posture.OTHER


def test_missing_hips_is_other_with_zero_confidence():
    skel = constructed(178, 0.6)
    joints = {k: v for k, v in skel.joints.items() if "hip" not in k}
    assert classify_posture(Skeleton(joints)) == PostureLabel(Posture.OTHER, 0.0)
    assert classify_posture(Skeleton.from_keypoints(None)).label is Posture.OTHER


def test_single_hip_is_enough():
    skel = constructed(178, 0.6)
    joints = {k: v for k, v in skel.joints.items() if k != "left_hip"}
    assert classify_posture(Skeleton(joints)).label is Posture.STANDING


def test_confidence_in_unit_interval():
    for skel, _ in synthetic_corpus(3, 20, 20, 20):
        assert 0.0 <= classify_posture(skel).confidence <= 1.0


def test_registry():
    assert isinstance(load_classifier("geometric-baseline"), GeometricClassifier)
    with pytest.raises(InputError):
        load_classifier("resnet18")

    class AlwaysSitting(PostureClassifier):
        def classify(self, skel):
            return PostureLabel(Posture.SITTING, 1.0)

    register_classifier("always-sitting-test", AlwaysSitting)
    clf = load_classifier("always-sitting-test")
    assert clf.classify(constructed(178, 0.6)).label is Posture.SITTING


def test_threshold_overrides():
    clf = GeometricClassifier(standing_knee_angle=170)
    assert clf.classify(constructed(160, 0.6)).label is Posture.OTHER


def test_corpus_fully_correct():
    corpus = synthetic_corpus(0)
    assert len(corpus) == 400
    assert sum(lbl is Posture.STANDING for _, lbl in corpus) == 180
    wrong = [(s, lbl) for s, lbl in corpus if classify_posture(s).label is not lbl]
    assert not wrong


def test_similarity_invariance(rng):
    corpus = synthetic_corpus(1, 30, 30, 10)
    for skel, _ in corpus:
        base = classify_posture(skel).label
        s, dx, dy = rng.uniform(0.1, 10), rng.uniform(-500, 500), rng.uniform(-500, 500)
        assert classify_posture(skel.transformed(s, dx, dy)).label is base


def test_from_keypoints_round_trip():
    skel = constructed(178, 0.6)
    kps = tuple((j, x, y, c) for j, (x, y, c) in skel.joints.items())
    assert Skeleton.from_keypoints(kps).joints == skel.joints
    assert set(skel.joints) <= set(JOINTS)
