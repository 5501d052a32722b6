import re

import pytest

from jointgaze.detect import (Candidate, DetectorConfig, NoTargetReason,
                              TargetDetection)
from jointgaze.events import (JointAttentionEvent, analyze_scene,
                              classify_agents, make_caption, report_to_dict,
                              resolve_events)
from jointgaze.scene import SceneInput

from conftest import random_scene

CAPTION_RE = re.compile(r"^[0-9]+ people are looking at .+$")


def det(face_id, segment_id=None, reason=NoTargetReason.NO_INTERSECTIONS):
    if segment_id is None:
        return TargetDetection(face_id, no_target_reason=reason)
    cand = Candidate(segment_id, (10, 10), 5.0, 2.0, 2.0)
    return TargetDetection(face_id, target=cand)


class TestResolveEvents:
    def test_pair_plus_outsider(self):
        events = resolve_events([det(1, 7), det(2, 7), det(3, 9)])
        assert len(events) == 1
        assert events[0].segment_id == 7
        assert events[0].participant_face_ids == frozenset({1, 2})

    def test_all_distinct(self):
        assert resolve_events([det(1, 7), det(2, 8), det(3, 9)]) == []

    def test_three_way(self):
        events = resolve_events([det(1, 7), det(2, 7), det(3, 7)])
        assert events[0].participant_face_ids == frozenset({1, 2, 3})

    def test_duplicate_face_rejected(self):
        with pytest.raises(ValueError, match="duplicate face id"):
            resolve_events([det(1, 7), det(1, 7)])

    def test_sorted_by_segment(self):
        events = resolve_events([det(1, 9), det(2, 9), det(3, 4), det(4, 4)])
        assert [e.segment_id for e in events] == [4, 9]

    def test_minimality(self):
        with pytest.raises(ValueError):
            JointAttentionEvent(1, frozenset({5}))


class TestClassifyAgents:
    def test_pair_event(self):
        events = [JointAttentionEvent(7, frozenset({1, 2}))]
        assert classify_agents([1, 2, 3], events) == {
            1: "participant", 2: "participant", 3: "non_participant"}

    def test_no_events(self):
        assert classify_agents([1, 2], []) == {
            1: "non_participant", 2: "non_participant"}

    def test_all_in_one_event(self):
        events = [JointAttentionEvent(7, frozenset({1, 2, 3}))]
        assert set(classify_agents([1, 2, 3], events).values()) == {"participant"}


class TestMakeCaption:
    def test_labeled_target(self):
        ev = JointAttentionEvent(7, frozenset({1, 2, 3}))
        assert make_caption(ev, {7: "cake"}) == "3 people are looking at cake"

    def test_unlabeled_fallback(self):
        ev = JointAttentionEvent(9, frozenset({1, 2}))
        assert make_caption(ev, {9: None}) == "2 people are looking at segment 9"

    def test_template_regex(self):
        ev = JointAttentionEvent(3, frozenset({4, 5}))
        assert CAPTION_RE.match(make_caption(ev, {}))


class TestAnalyzeScene:
    def test_single_face_no_events(self, rng):
        while True:
            scene = random_scene(rng)
            if len(scene.faces) == 1:
                break
        report = analyze_scene(scene, DetectorConfig())
        assert report.events == []
        assert not report.has_joint_attention
        assert report.captions == []

    def test_has_joint_attention_iff_events(self, rng):
        for _ in range(30):
            report = analyze_scene(random_scene(rng), DetectorConfig())
            assert report.has_joint_attention == bool(report.events)

    def test_face_partition(self, rng):
        for _ in range(30):
            scene = random_scene(rng)
            report = analyze_scene(scene, DetectorConfig())
            face_ids = [f.face_id for f in scene.faces]
            labels = classify_agents(face_ids, report.events)
            assert set(labels) == set(face_ids)
            seen = set()
            for ev in report.events:
                assert not (ev.participant_face_ids & seen)
                seen |= ev.participant_face_ids

    def test_caption_grammar(self, rng):
        for _ in range(30):
            report = analyze_scene(random_scene(rng), DetectorConfig())
            assert len(report.captions) == len(report.events)
            for c in report.captions:
                assert CAPTION_RE.match(c)

    def test_invariant_to_input_ordering(self, rng):
        for _ in range(20):
            scene = random_scene(rng)
            shuffled = SceneInput(scene.scene_id, scene.camera,
                                  list(reversed(scene.faces)), scene.depth,
                                  list(reversed(scene.segments)))
            a = report_to_dict(analyze_scene(scene, DetectorConfig()))
            b = report_to_dict(analyze_scene(shuffled, DetectorConfig()))
            assert a == b
