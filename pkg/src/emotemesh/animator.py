"""Timeline sampling and frame delivery: displacement frames, morph targets,
an optional blink layer, and deterministic exports (JSONL, CSV, OBJ).

Everything here is a pure function of its inputs. Frames are sampled at
k / fps, never at wall-clock times, so one script always produces the same
bytes.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import EmotionalState, EventScript
from .errors import ParseError, ValidationError
from .features import AXIS_NAMES, FEATURES, ZERO3, DisplacementMap, map_add
from .rig import Mesh, Rig, displace, mesh_to_obj
from .table import ExpressionTable

MORPH_FORMAT = "emotemesh-morphs/1"


@dataclass(frozen=True)
class Frame:
    """One sampled instant: intensity maps plus the synthesized displacements."""

    t: float
    emotion: dict[str, float]
    mood: dict[str, float]
    features: DisplacementMap


def frame_displacements(
    table: ExpressionTable,
    emotion: dict[str, float],
    mood: dict[str, float],
) -> DisplacementMap:
    """Combine emotion and mood intensities into one dense feature map.

    Both contributions add linearly, except that mood leaves the jaw alone:
    a mood is worn with the mouth closed.
    """
    combined = table.synthesize(emotion)
    if mood:
        mood_part = table.synthesize(mood)
        mood_part["Jaw"] = ZERO3
        combined = map_add(combined, mood_part)
    return combined


# ---------------------------------------------------------------------------
# Idle layer (blinking)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdleConfig:
    """Blink layer settings. Blinks close roughly every two seconds.

    upper_drop_m moves both upper lids down; lower_raise_m moves the lower
    lids up to meet them. The schedule is drawn once from the seed, so equal
    seeds blink at equal times.
    """

    enabled: bool = False
    seed: int = 0
    mean_period_s: float = 2.0
    jitter_s: float = 0.5
    close_s: float = 0.15
    release_s: float = 0.15
    upper_drop_m: float = 0.01
    lower_raise_m: float = 0.002

    def __post_init__(self):
        if self.mean_period_s - self.jitter_s <= self.close_s + self.release_s:
            raise ValueError("blink periods must be longer than the blink itself")


def blink_times(config: IdleConfig, duration_s: float) -> list[float]:
    """Blink start times covering [0, duration_s)."""
    rng = random.Random(config.seed)
    times = []
    t = rng.uniform(config.mean_period_s - config.jitter_s, config.mean_period_s + config.jitter_s)
    while t < duration_s:
        times.append(t)
        t += rng.uniform(config.mean_period_s - config.jitter_s, config.mean_period_s + config.jitter_s)
    return times


def blink_offsets(config: IdleConfig, times: list[float], t: float) -> DisplacementMap:
    """Lid displacements contributed by the blink layer at time t."""
    level = 0.0
    for b in reversed(times):
        if b > t:
            continue
        into = t - b
        if into < config.close_s:
            level = into / config.close_s
        elif into < config.close_s + config.release_s:
            level = 1.0 - (into - config.close_s) / config.release_s
        break
    if level <= 0.0:
        return {}
    down = config.upper_drop_m * level
    up = -config.lower_raise_m * level
    return {
        "LidUpperLeft": (0.0, 0.0, down),
        "LidUpperRight": (0.0, 0.0, down),
        "LidLowerLeft": (0.0, 0.0, up),
        "LidLowerRight": (0.0, 0.0, up),
    }


# ---------------------------------------------------------------------------
# Timeline sampling
# ---------------------------------------------------------------------------


def sample_timeline(
    script: EventScript,
    table: ExpressionTable,
    idle: "IdleConfig | None" = None,
) -> list[Frame]:
    """Run a script through an emotional state and sample frames at k / fps.

    Events apply at the first frame boundary at or after their timestamp,
    with envelopes back-dated to the event's own time. Frame times are
    computed fresh per frame, so long timelines carry no accumulated drift.
    """
    for label in {e.label for e in script.events if e.label is not None}:
        table.resolve(label)  # fail fast on unknown vocabulary

    duration = script.resolved_duration()
    n = round(duration * script.fps)
    state = EmotionalState(tau_s=script.tau_s, mode=script.mode)
    times = blink_times(idle, duration) if idle is not None and idle.enabled else None

    frames: list[Frame] = []
    pending = list(script.events)
    for k in range(n):
        t = k / script.fps
        if k > 0:
            state.tick_to(t)
        while pending and pending[0].t <= t:
            event = pending.pop(0)
            if event.pad is not None:
                state.set_pad(*event.pad)
            else:
                state.trigger(event.label, event.intensity, at=event.t)
        emotion, mood = state.levels()
        features = frame_displacements(table, emotion, mood)
        if times is not None:
            features = map_add(features, blink_offsets(idle, times, t))
        frames.append(Frame(t=t, emotion=emotion, mood=mood, features=features))
    return frames


# ---------------------------------------------------------------------------
# Morph targets
# ---------------------------------------------------------------------------


@dataclass
class MorphTargetSet:
    """Per-vertex delta fields, one per label, baked against a rest mesh.

    mood_deltas are the same fields with the jaw region left in place, for
    playback paths that apply mood client-side.
    """

    rest_ref: str
    deltas: dict[str, np.ndarray]
    mood_deltas: dict[str, np.ndarray] = field(default_factory=dict)

    def labels(self) -> tuple[str, ...]:
        return tuple(self.deltas)

    def apply(
        self,
        mesh: Mesh,
        weights: dict[str, float],
        mood_weights: "dict[str, float] | None" = None,
    ) -> Mesh:
        """rest + sum of weighted deltas. Unknown labels raise."""
        out = mesh.vertices.copy()
        for label, w in weights.items():
            if label not in self.deltas:
                raise ValidationError(f"no morph target for label {label!r}")
            out += w * self.deltas[label]
        for label, w in (mood_weights or {}).items():
            if label not in self.mood_deltas:
                raise ValidationError(f"no mood morph target for label {label!r}")
            out += w * self.mood_deltas[label]
        return mesh.with_vertices(out)


def bake_morph_targets(
    mesh: Mesh,
    rig: Rig,
    table: ExpressionTable,
    labels: "list[str] | None" = None,
) -> MorphTargetSet:
    """Bake each label's intensity-1 expression into a per-vertex delta field.

    Rendering rest + weight * delta then reproduces displace() up to float
    summation order.
    """
    if labels is None:
        labels = list(table.labels())
    deltas: dict[str, np.ndarray] = {}
    mood_deltas: dict[str, np.ndarray] = {}
    for label in labels:
        vectors = table.scale(label, 1.0)
        deltas[label] = displace(mesh, rig, vectors).vertices - mesh.vertices
        vectors_jawless = dict(vectors)
        vectors_jawless["Jaw"] = ZERO3
        mood_deltas[label] = displace(mesh, rig, vectors_jawless).vertices - mesh.vertices
    return MorphTargetSet(rig.mesh_ref, deltas, mood_deltas)


def save_morphs(morphs: MorphTargetSet) -> dict:
    return {
        "format": MORPH_FORMAT,
        "rest": morphs.rest_ref,
        "targets": {label: [[float(c) for c in row] for row in delta] for label, delta in morphs.deltas.items()},
        "mood_targets": {
            label: [[float(c) for c in row] for row in delta] for label, delta in morphs.mood_deltas.items()
        },
    }


def load_morphs(document: "str | dict") -> MorphTargetSet:
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(f"morph document is not valid JSON: {e}", e.lineno) from None
    if not isinstance(document, dict):
        raise ParseError("morph document must be a JSON object")
    if document.get("format") != MORPH_FORMAT:
        raise ValidationError(f"expected format {MORPH_FORMAT!r}, got {document.get('format')!r}")
    targets = document.get("targets")
    if not isinstance(targets, dict) or not targets:
        raise ValidationError("morph document has no targets")

    def to_arrays(block: dict) -> dict[str, np.ndarray]:
        out = {}
        for label, rows in block.items():
            arr = np.asarray(rows, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ValidationError(f"target {label!r}: expected an (N, 3) delta list")
            out[label] = arr
        return out

    deltas = to_arrays(targets)
    counts = {d.shape[0] for d in deltas.values()}
    if len(counts) > 1:
        raise ValidationError("morph targets disagree on vertex count")
    mood_deltas = to_arrays(document.get("mood_targets", {}))
    return MorphTargetSet(str(document.get("rest", "")), deltas, mood_deltas)


def morphs_to_json(morphs: MorphTargetSet) -> str:
    return json.dumps(save_morphs(morphs), separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def frame_record(frame: Frame) -> dict:
    """JSON-ready dict with stable key order for byte-identical exports."""
    return {
        "t": frame.t,
        "emotion": {label: frame.emotion[label] for label in sorted(frame.emotion)},
        "mood": {label: frame.mood[label] for label in sorted(frame.mood)},
        "features": {name: list(frame.features[name]) for name in FEATURES},
    }


def frames_to_jsonl(frames: "list[Frame]") -> str:
    return "".join(json.dumps(frame_record(f), separators=(",", ":")) + "\n" for f in frames)


def csv_header() -> str:
    cols = ["t"]
    for name in FEATURES:
        cols.extend(f"{name}_{axis}" for axis in AXIS_NAMES)
    return ",".join(cols)


def frames_to_csv(frames: "list[Frame]") -> str:
    lines = [csv_header()]
    for f in frames:
        row = [repr(float(f.t))]
        for name in FEATURES:
            row.extend(repr(float(c)) for c in f.features[name])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def export_obj_sequence(
    frames: "list[Frame]",
    mesh: Mesh,
    rig: Rig,
    out_dir: "str | Path",
    stem: str = "frame",
) -> list[Path]:
    """Write one OBJ per frame: <stem>_000000.obj, <stem>_000001.obj, ..."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, frame in enumerate(frames):
        posed = displace(mesh, rig, frame.features)
        path = out / f"{stem}_{i:06d}.obj"
        path.write_text(mesh_to_obj(posed), encoding="utf-8")
        paths.append(path)
    return paths
