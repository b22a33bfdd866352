"""emotemesh: affective facial animation on rigged meshes.

Expression prototypes displace named anchor regions of a face; triggered
emotions run through onset/hold/decay envelopes while mood keeps a slow
running average of what was expressed. Frames can be rendered directly,
baked to morph targets, exported deterministically, or streamed live.
"""

from .animator import (
    Frame,
    IdleConfig,
    MorphTargetSet,
    bake_morph_targets,
    frame_displacements,
    frames_to_csv,
    frames_to_jsonl,
    load_morphs,
    sample_timeline,
    save_morphs,
)
from .engine import (
    DEFAULT_PAD_PROTOTYPES,
    MAX_INTENSITY,
    AffectEvent,
    EmotionalState,
    Envelope,
    EnvelopeShape,
    EventScript,
    load_script,
    pad_to_intensities,
    save_script,
)
from .errors import EmoteMeshError, ParseError, UnknownLabelError, ValidationError
from .features import BASICS, FEATURES, MIRROR_PAIRS
from .metrics import (
    ExpressionProfile,
    RatingMatrix,
    analyze,
    load_ratings,
    recognition_quality,
)
from .rig import (
    Anchor,
    Axes,
    Mesh,
    Rig,
    displace,
    generate_weights,
    load_mesh,
    load_rig,
    mesh_to_obj,
    save_rig,
)
from .sampleface import sample_face, sample_rig
from .service import ServiceConfig, Session, replay_log, serve
from .table import (
    ExpressionTable,
    SymmetryFinding,
    builtin_table,
    load_table,
    magnitude_audit,
    save_table,
    symmetry_audit,
)

__version__ = "0.1.0"

__all__ = [
    "AffectEvent",
    "Anchor",
    "Axes",
    "BASICS",
    "DEFAULT_PAD_PROTOTYPES",
    "EmoteMeshError",
    "EmotionalState",
    "Envelope",
    "EnvelopeShape",
    "EventScript",
    "ExpressionProfile",
    "ExpressionTable",
    "FEATURES",
    "Frame",
    "IdleConfig",
    "MAX_INTENSITY",
    "Mesh",
    "MIRROR_PAIRS",
    "MorphTargetSet",
    "ParseError",
    "RatingMatrix",
    "Rig",
    "ServiceConfig",
    "Session",
    "SymmetryFinding",
    "UnknownLabelError",
    "ValidationError",
    "analyze",
    "bake_morph_targets",
    "builtin_table",
    "displace",
    "frame_displacements",
    "frames_to_csv",
    "frames_to_jsonl",
    "generate_weights",
    "load_mesh",
    "load_morphs",
    "load_ratings",
    "load_rig",
    "load_script",
    "load_table",
    "magnitude_audit",
    "mesh_to_obj",
    "pad_to_intensities",
    "recognition_quality",
    "replay_log",
    "sample_face",
    "sample_rig",
    "sample_timeline",
    "save_morphs",
    "save_rig",
    "save_script",
    "save_table",
    "serve",
    "symmetry_audit",
]
