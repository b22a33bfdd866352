import json
import math

import numpy as np
import pytest

from emotemesh.animator import (
    IdleConfig,
    bake_morph_targets,
    blink_offsets,
    blink_times,
    csv_header,
    export_obj_sequence,
    frame_displacements,
    frames_to_csv,
    frames_to_jsonl,
    load_morphs,
    morphs_to_json,
    sample_timeline,
    save_morphs,
)
from emotemesh.engine import AffectEvent, EventScript
from emotemesh.errors import UnknownLabelError, ValidationError
from emotemesh.features import FEATURES
from emotemesh.rig import displace, load_mesh
from emotemesh.sampleface import sample_face, sample_rig
from emotemesh.table import builtin_table


def joy_script(fps=10.0, duration=1.0, tau=None):
    return EventScript(
        events=(AffectEvent(t=0.0, label="joy", intensity=0.3),),
        fps=fps,
        duration_s=duration,
        tau_s=math.inf if tau is None else tau,
    )


def test_frame_displacements_adds_emotion_and_mood():
    table = builtin_table()
    out = frame_displacements(table, {"happy": 1.0}, {"sad": 1.0})
    h = table.basics["happy"]["LipCornerLeft"]
    s = table.basics["sad"]["LipCornerLeft"]
    assert out["LipCornerLeft"] == tuple(a + b for a, b in zip(h, s))


def test_mood_never_moves_the_jaw():
    table = builtin_table()
    # surprise has a strong jaw drop as emotion...
    as_emotion = frame_displacements(table, {"surprise": 1.0}, {})
    assert as_emotion["Jaw"] == (-0.005, 0.0, 0.01)
    # ...but exactly zero jaw as mood
    as_mood = frame_displacements(table, {}, {"surprise": 1.0})
    assert as_mood["Jaw"] == (0.0, 0.0, 0.0)
    assert as_mood["BrowInnerLeft"] == as_emotion["BrowInnerLeft"]


def test_sample_timeline_frame_grid():
    frames = sample_timeline(joy_script(fps=10.0, duration=1.0), builtin_table())
    assert len(frames) == 10
    assert [f.t for f in frames] == [k / 10.0 for k in range(10)]
    by_t = {f.t: f for f in frames}
    assert by_t[0.2].emotion == {"joy": 0.15}
    assert by_t[0.5].emotion == {"joy": 0.3}


def test_sample_timeline_unknown_label_fails_fast():
    script = EventScript(events=(AffectEvent(t=0.0, label="wistful"),), duration_s=1.0)
    with pytest.raises(UnknownLabelError):
        sample_timeline(script, builtin_table())


def test_sample_timeline_event_between_frames_backdates():
    script = EventScript(
        events=(AffectEvent(t=0.15, label="joy", intensity=0.4),),
        fps=10.0,
        duration_s=1.0,
        tau_s=math.inf,
    )
    frames = sample_timeline(script, builtin_table())
    # at t=0.2 the envelope has run 0.05 s of its 0.4 s onset
    assert frames[2].emotion["joy"] == pytest.approx(0.4 * 0.05 / 0.4, abs=1e-12)


def test_sample_timeline_is_deterministic():
    table = builtin_table()
    a = frames_to_jsonl(sample_timeline(joy_script(fps=30.0, duration=2.0), table))
    b = frames_to_jsonl(sample_timeline(joy_script(fps=30.0, duration=2.0), table))
    assert a == b


def test_jsonl_shape_and_values():
    frames = sample_timeline(joy_script(fps=10.0, duration=1.0), builtin_table())
    lines = frames_to_jsonl(frames).splitlines()
    assert len(lines) == 10
    rec = json.loads(lines[2])
    assert rec["t"] == 0.2
    assert rec["emotion"] == {"joy": 0.15}
    assert rec["mood"] == {}
    assert list(rec["features"]) == list(FEATURES)
    assert len(rec["features"]["Jaw"]) == 3


def test_csv_header_and_row_width():
    assert csv_header().split(",")[0] == "t"
    assert len(csv_header().split(",")) == 1 + 18 * 3
    frames = sample_timeline(joy_script(fps=5.0, duration=1.0), builtin_table())
    lines = frames_to_csv(frames).splitlines()
    assert len(lines) == 1 + 5
    assert all(len(line.split(",")) == 55 for line in lines)
    # csv carries the same numbers as the frames
    row = lines[2].split(",")
    assert float(row[0]) == frames[1].t


def test_obj_sequence_export(tmp_path):
    mesh = sample_face()
    rig = sample_rig(mesh)
    frames = sample_timeline(joy_script(fps=5.0, duration=0.6), builtin_table())
    paths = export_obj_sequence(frames, mesh, rig, tmp_path)
    assert len(paths) == 3
    assert paths[0].name == "frame_000000.obj"
    # frame 0 is neutral: identical to the rest mesh export
    neutral = load_mesh(paths[0].read_text())
    assert np.array_equal(neutral.vertices, mesh.vertices)
    posed = load_mesh(paths[2].read_text())
    assert not np.array_equal(posed.vertices, mesh.vertices)


# -- morph targets ------------------------------------------------------------


def test_bake_covers_all_labels():
    mesh = sample_face()
    morphs = bake_morph_targets(mesh, sample_rig(mesh), builtin_table())
    assert set(morphs.labels()) == set(builtin_table().labels())
    assert all(d.shape == (mesh.vertex_count, 3) for d in morphs.deltas.values())


def test_bake_apply_matches_direct_displace():
    mesh = sample_face()
    rig = sample_rig(mesh)
    table = builtin_table()
    morphs = bake_morph_targets(mesh, rig, table)
    weights = {"happy": 0.7, "surprise": 0.4}
    via_morphs = morphs.apply(mesh, weights)
    direct = displace(mesh, rig, table.synthesize(weights))
    assert np.abs(via_morphs.vertices - direct.vertices).max() <= 1e-9


def test_mood_deltas_leave_jaw_region_fixed():
    mesh = sample_face()
    rig = sample_rig(mesh)
    morphs = bake_morph_targets(mesh, rig, builtin_table())
    jaw_only = sorted(
        set(rig.anchors["Jaw"].weights)
        - {i for n, a in rig.anchors.items() if n != "Jaw" for i in a.weights}
    )
    assert jaw_only, "sample rig should have vertices only the jaw moves"
    surprise = morphs.mood_deltas["surprise"]
    assert np.abs(surprise[jaw_only]).max() == 0.0
    # the emotion delta does move them
    assert np.abs(morphs.deltas["surprise"][jaw_only]).max() > 0.0


def test_morph_document_round_trip_exact():
    mesh = sample_face()
    morphs = bake_morph_targets(mesh, sample_rig(mesh), builtin_table())
    again = load_morphs(morphs_to_json(morphs))
    for label in morphs.labels():
        assert np.array_equal(again.deltas[label], morphs.deltas[label])
        assert np.array_equal(again.mood_deltas[label], morphs.mood_deltas[label])
    assert again.rest_ref == morphs.rest_ref


def test_morph_document_validation():
    with pytest.raises(ValidationError, match="format"):
        load_morphs({"targets": {}})
    with pytest.raises(ValidationError, match="targets"):
        load_morphs({"format": "emotemesh-morphs/1"})
    with pytest.raises(ValidationError, match="disagree"):
        load_morphs(
            {
                "format": "emotemesh-morphs/1",
                "targets": {"a": [[0, 0, 0]], "b": [[0, 0, 0], [0, 0, 0]]},
            }
        )
    doc = save_morphs(bake_morph_targets(sample_face(), sample_rig(), builtin_table()))
    morphs = load_morphs(doc)
    with pytest.raises(ValidationError, match="no morph target"):
        morphs.apply(sample_face(), {"serene": 1.0})


# -- idle layer ---------------------------------------------------------------


def test_blink_schedule_deterministic_and_paced():
    config = IdleConfig(enabled=True, seed=11)
    times = blink_times(config, 100.0)
    assert times == blink_times(config, 100.0)
    assert 40 <= len(times) <= 60  # about every 2 s over 100 s
    gaps = [b - a for a, b in zip(times, times[1:])]
    assert all(1.5 <= g <= 2.5 for g in gaps)
    assert blink_times(IdleConfig(enabled=True, seed=12), 100.0) != times


def test_blink_offsets_shape():
    config = IdleConfig(enabled=True, seed=0)
    times = [2.0]
    mid_close = blink_offsets(config, times, 2.0 + config.close_s / 2)
    assert mid_close["LidUpperLeft"][2] == pytest.approx(config.upper_drop_m * 0.5, rel=1e-9)
    assert mid_close["LidLowerLeft"][2] == pytest.approx(-config.lower_raise_m * 0.5, rel=1e-9)
    closed = blink_offsets(config, times, 2.0 + config.close_s - 1e-9)
    assert closed["LidUpperRight"][2] == pytest.approx(config.upper_drop_m, rel=1e-6)
    assert blink_offsets(config, times, 1.9) == {}
    assert blink_offsets(config, times, 2.0 + config.close_s + config.release_s + 0.01) == {}


def test_idle_layer_only_touches_lids():
    script = joy_script(fps=30.0, duration=4.0)
    idle = IdleConfig(enabled=True, seed=3)
    with_blinks = sample_timeline(script, builtin_table(), idle)
    without = sample_timeline(script, builtin_table())
    lids = {"LidUpperLeft", "LidUpperRight", "LidLowerLeft", "LidLowerRight"}
    changed = set()
    for a, b in zip(with_blinks, without):
        for name in FEATURES:
            if a.features[name] != b.features[name]:
                changed.add(name)
        assert a.emotion == b.emotion  # intensities unaffected by blinks
    assert changed <= lids
    assert changed  # at least one blink landed inside 4 s


def test_idle_config_rejects_overlapping_blinks():
    with pytest.raises(ValueError):
        IdleConfig(mean_period_s=0.2, jitter_s=0.0)
