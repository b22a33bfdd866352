"""Emotion dynamics: trigger envelopes, mood accumulation, factor mapping.

A triggered emotion runs through a three-phase envelope (linear onset, hold,
linear decay). Mood is a slow running average of whatever the face expresses
and persists after envelopes finish; the combined face always shows the
stronger of the two per label, never their sum.

Time is a session-local clock in seconds. Callers advance it with tick_to()
using absolute times (frame_index / fps style) so repeated small steps never
accumulate float drift.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from decimal import Decimal

from .errors import ParseError, ValidationError
from .features import DisplacementMap, Vector3  # noqa: F401  (re-exported types)

# Hard ceiling on trigger intensity; the displacement model was evaluated
# up to 2.4x and extrapolating beyond it distorts faces badly.
MAX_INTENSITY = 2.4

# Factor space is the [-1, 1]^3 cube, so no two points are farther apart
# than its main diagonal.
PAD_RANGE_MAX = 2.0 * math.sqrt(3.0)

# Prototype coordinates (pleasure, arousal, dominance) for the six basics.
# These are tuning defaults, not calibrated constants; pass your own
# prototype map to pad_to_intensities or EmotionalState to override.
DEFAULT_PAD_PROTOTYPES: dict[str, tuple[float, float, float]] = {
    "happy": (0.8, 0.5, 0.4),
    "surprise": (0.1, 0.8, -0.2),
    "sad": (-0.6, -0.4, -0.5),
    "angry": (-0.5, 0.6, 0.3),
    "disgust": (-0.6, 0.2, 0.1),
    "fear": (-0.6, 0.6, -0.6),
}


def _dec(x: float) -> Decimal:
    # repr() is the shortest round-tripping decimal, so values that were
    # written as clean decimals stay clean in Decimal space
    return Decimal(repr(float(x)))


@dataclass(frozen=True)
class EnvelopeShape:
    """Phase durations of the intensity curve, in seconds."""

    onset_s: float = 0.4
    hold_s: float = 0.3
    decay_s: float = 0.3

    def __post_init__(self):
        for name, value in (("onset_s", self.onset_s), ("hold_s", self.hold_s), ("decay_s", self.decay_s)):
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive number, got {value}")

    @property
    def span_s(self) -> float:
        return float(_dec(self.onset_s) + _dec(self.hold_s) + _dec(self.decay_s))

    def value(self, elapsed: float, start_value: float, target: float, floor: float) -> float:
        """Envelope level at `elapsed` seconds after the trigger.

        Phase positions are interpolated through Decimal so that samples at
        clean decimal times yield clean results; plain float accumulation is
        an ulp off at points like 0.85 into the default shape.
        """
        d = _dec(elapsed)
        onset = _dec(self.onset_s)
        hold_end = onset + _dec(self.hold_s)
        span = hold_end + _dec(self.decay_s)
        if d <= 0:
            return start_value
        if d < onset:
            frac = float(d / onset)
            return start_value + (target - start_value) * frac
        if d < hold_end:
            return target
        if d < span:
            frac = float((d - hold_end) / _dec(self.decay_s))
            return target + (floor - target) * frac
        return floor


DEFAULT_SHAPE = EnvelopeShape()


@dataclass
class Envelope:
    """One running trigger: label, target level, and phase bookkeeping."""

    label: str
    target: float
    start_t: float
    start_value: float = 0.0
    shape: EnvelopeShape = DEFAULT_SHAPE
    decay_floor: float = 0.0
    floor_set: bool = False

    @property
    def peak(self) -> float:
        return max(self.target, self.start_value)

    def elapsed(self, at: float) -> float:
        return at - self.start_t

    def expired(self, at: float) -> bool:
        return self.elapsed(at) >= self.shape.span_s

    def value(self, at: float) -> float:
        return self.shape.value(self.elapsed(at), self.start_value, self.target, self.decay_floor)


def pad_to_intensities(
    point: tuple[float, float, float],
    prototypes: "dict[str, tuple[float, float, float]] | None" = None,
) -> dict[str, float]:
    """Derive categorical intensities from a factor-space point.

    Each label's intensity falls off linearly with Euclidean distance from
    its prototype, reaching zero at the cube diagonal. Zero entries are
    omitted.
    """
    if prototypes is None:
        prototypes = DEFAULT_PAD_PROTOTYPES
    if len(point) != 3:
        raise ValueError("factor point must have 3 coordinates")
    for c in point:
        if not (math.isfinite(c) and -1.0 <= c <= 1.0):
            raise ValueError(f"factor coordinates must lie in [-1, 1], got {c}")
    out: dict[str, float] = {}
    for label, proto in prototypes.items():
        dist = math.dist(point, proto)
        intensity = max(0.0, 1.0 - dist / PAD_RANGE_MAX)
        if intensity > 0.0:
            out[label] = intensity
    return out


class EmotionalState:
    """Envelopes plus mood for one animated character.

    mode "categorical" takes trigger() events only; mode "factor" also
    accepts a factor-space point whose derived intensities combine with any
    running envelopes (per label, the stronger wins).
    """

    def __init__(
        self,
        tau_s: float = 60.0,
        mode: str = "categorical",
        shape: EnvelopeShape = DEFAULT_SHAPE,
        prototypes: "dict[str, tuple[float, float, float]] | None" = None,
    ):
        if mode not in ("categorical", "factor"):
            raise ValueError(f"mode must be 'categorical' or 'factor', got {mode!r}")
        if not tau_s > 0:
            raise ValueError("tau_s must be positive (math.inf disables mood)")
        self.tau_s = float(tau_s)
        self.mode = mode
        self.shape = shape
        self.prototypes = dict(prototypes) if prototypes is not None else dict(DEFAULT_PAD_PROTOTYPES)
        self.clock = 0.0
        self.envelopes: dict[str, Envelope] = {}
        self.mood: dict[str, float] = {}
        self.pad: "tuple[float, float, float] | None" = None

    def set_mode(self, mode: str):
        if mode not in ("categorical", "factor"):
            raise ValueError(f"mode must be 'categorical' or 'factor', got {mode!r}")
        self.mode = mode
        if mode == "categorical":
            self.pad = None

    def set_pad(self, p: float, a: float, d: float):
        if self.mode != "factor":
            raise ValueError("factor point rejected: state is in categorical mode")
        pad_to_intensities((p, a, d), self.prototypes)  # raises on bad coordinates
        self.pad = (float(p), float(a), float(d))

    def trigger(self, label: str, intensity: float = 1.0, at: "float | None" = None):
        """Start (or restart) an emotion envelope.

        Retriggering a running label restarts its clock from the current
        level; the target never steps down below where the curve already is,
        so a weaker retrigger extends rather than dents the expression.
        """
        if not label or not isinstance(label, str):
            raise ValidationError("trigger needs a label")
        if not (isinstance(intensity, (int, float)) and math.isfinite(intensity)):
            raise ValueError(f"intensity must be a finite number, got {intensity!r}")
        if intensity < 0:
            raise ValueError("intensity must be non-negative")
        target = min(float(intensity), MAX_INTENSITY)
        start = self.clock if at is None else float(at)
        current = 0.0
        existing = self.envelopes.get(label)
        if existing is not None and not existing.expired(start):
            current = existing.value(start)
        self.envelopes[label] = Envelope(
            label=label,
            target=max(target, current),
            start_t=start,
            start_value=current,
            shape=self.shape,
        )

    def reset(self):
        """Drop all envelopes, mood, and any factor point. The clock keeps running."""
        self.envelopes.clear()
        self.mood.clear()
        self.pad = None

    def tick_to(self, t: float):
        """Advance the state to absolute session time t."""
        dt = t - self.clock
        if dt < 0:
            raise ValueError(f"time runs forward only: clock at {self.clock}, asked for {t}")
        if dt == 0:
            return
        self.clock = t

        expressed = self.emotion_intensities()
        # First-order pull of mood toward what the face currently expresses;
        # tau_s = inf gives k = 0 and freezes mood entirely.
        k = 1.0 - math.exp(-dt / self.tau_s)
        if k > 0.0:
            for label in set(expressed) | set(self.mood):
                level = self.mood.get(label, 0.0)
                level += (expressed.get(label, 0.0) - level) * k
                if level == 0.0 or (abs(level) < 1e-15 and label not in expressed):
                    self.mood.pop(label, None)
                else:
                    self.mood[label] = level

        for label, env in list(self.envelopes.items()):
            if env.expired(t):
                del self.envelopes[label]
            elif not env.floor_set and env.elapsed(t) >= float(_dec(env.shape.onset_s) + _dec(env.shape.hold_s)):
                # entering decay: latch the level to fall back to, which is
                # the mood behind it, never above the curve's own peak
                env.decay_floor = min(self.mood.get(label, 0.0), env.peak)
                env.floor_set = True

    def emotion_intensities(self) -> dict[str, float]:
        """Active expressed levels per label; zero entries omitted."""
        out: dict[str, float] = {}
        for label, env in self.envelopes.items():
            if not env.expired(self.clock):
                v = env.value(self.clock)
                if v > 0.0:
                    out[label] = v
        if self.mode == "factor" and self.pad is not None:
            for label, v in pad_to_intensities(self.pad, self.prototypes).items():
                if v > out.get(label, 0.0):
                    out[label] = v
        return out

    def mood_intensities(self) -> dict[str, float]:
        """Mood left over after the expressed emotion is accounted for.

        The face shows max(emotion, mood) per label, realized as emotion
        plus this remainder.
        """
        emotion = self.emotion_intensities()
        out = {}
        for label, level in self.mood.items():
            remainder = level - emotion.get(label, 0.0)
            if remainder > 0.0:
                out[label] = remainder
        return out

    def levels(self) -> tuple[dict[str, float], dict[str, float]]:
        return self.emotion_intensities(), self.mood_intensities()


# ---------------------------------------------------------------------------
# Event scripts
# ---------------------------------------------------------------------------

SCRIPT_FORMAT = "emotemesh-script/1"


@dataclass(frozen=True)
class AffectEvent:
    """One timed stimulus: either a labeled trigger or a factor point."""

    t: float
    label: "str | None" = None
    intensity: float = 1.0
    pad: "tuple[float, float, float] | None" = None

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t >= 0):
            raise ValidationError(f"event time must be >= 0, got {self.t}")
        if (self.label is None) == (self.pad is None):
            raise ValidationError("event needs exactly one of label or pad")
        if self.label is not None and self.intensity < 0:
            raise ValidationError("event intensity must be non-negative")


@dataclass(frozen=True)
class EventScript:
    """A reproducible stimulus sequence with its sampling parameters."""

    events: tuple[AffectEvent, ...]
    mode: str = "categorical"
    fps: float = 30.0
    duration_s: "float | None" = None
    tau_s: float = 60.0

    def __post_init__(self):
        if self.mode not in ("categorical", "factor"):
            raise ValidationError(f"script mode must be 'categorical' or 'factor', got {self.mode!r}")
        if not self.fps > 0:
            raise ValidationError("fps must be positive")
        if self.duration_s is not None and not self.duration_s > 0:
            raise ValidationError("duration_s must be positive")
        if not self.tau_s > 0:
            raise ValidationError("tau_s must be positive (null disables mood)")
        object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.t)))

    def resolved_duration(self) -> float:
        """Explicit duration, or long enough for the last event to finish."""
        if self.duration_s is not None:
            return self.duration_s
        last = max((e.t for e in self.events), default=0.0)
        return last + DEFAULT_SHAPE.span_s + 0.5


def load_script(document: "str | dict") -> EventScript:
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(f"script document is not valid JSON: {e}", e.lineno) from None
    if not isinstance(document, dict):
        raise ParseError("script document must be a JSON object")
    if document.get("format") != SCRIPT_FORMAT:
        raise ValidationError(f"expected format {SCRIPT_FORMAT!r}, got {document.get('format')!r}")

    events = []
    for i, entry in enumerate(document.get("events", [])):
        if not isinstance(entry, dict) or "t" not in entry:
            raise ValidationError(f"events[{i}]: expected an object with a t field")
        if "pad" in entry:
            pad = entry["pad"]
            if not isinstance(pad, list) or len(pad) != 3:
                raise ValidationError(f"events[{i}]: pad must be [p, a, d]")
            events.append(AffectEvent(t=float(entry["t"]), pad=(float(pad[0]), float(pad[1]), float(pad[2]))))
        elif "label" in entry:
            events.append(
                AffectEvent(
                    t=float(entry["t"]),
                    label=str(entry["label"]),
                    intensity=float(entry.get("intensity", 1.0)),
                )
            )
        else:
            raise ValidationError(f"events[{i}]: needs a label or a pad")

    tau = document.get("tau_s", 60.0)
    duration = document.get("duration_s")
    return EventScript(
        events=tuple(events),
        mode=document.get("mode", "categorical"),
        fps=float(document.get("fps", 30.0)),
        duration_s=float(duration) if duration is not None else None,
        tau_s=math.inf if tau is None else float(tau),
    )


def save_script(script: EventScript) -> dict:
    events = []
    for e in script.events:
        if e.pad is not None:
            events.append({"t": e.t, "pad": list(e.pad)})
        else:
            events.append({"t": e.t, "label": e.label, "intensity": e.intensity})
    doc: dict = {
        "format": SCRIPT_FORMAT,
        "mode": script.mode,
        "fps": script.fps,
        "tau_s": None if math.isinf(script.tau_s) else script.tau_s,
        "events": events,
    }
    if script.duration_s is not None:
        doc["duration_s"] = script.duration_s
    return doc


def script_to_json(script: EventScript) -> str:
    return json.dumps(save_script(script), indent=2, sort_keys=False) + "\n"


def scaled_script(script: EventScript, factor: float) -> EventScript:
    """Copy of a script with every trigger intensity multiplied by factor."""
    if factor < 0:
        raise ValueError("intensity factor must be non-negative")
    events = tuple(
        replace(e, intensity=e.intensity * factor) if e.label is not None else e for e in script.events
    )
    return replace(script, events=events)
