"""Canonical facial feature names and displacement-vector conventions.

Displacement vectors are stored in [z, x, y] component order throughout:
positive z is a displacement to the front, positive x to the right,
positive y down. Units are meters. Rig documents declare how these three
directions map onto the axes of their particular mesh.
"""

from __future__ import annotations

from .errors import UnknownLabelError

Vector3 = tuple[float, float, float]
DisplacementMap = dict[str, Vector3]

ZERO3: Vector3 = (0.0, 0.0, 0.0)

# The 18 instrumented features, in table row order.
FEATURES: tuple[str, ...] = (
    "Jaw",
    "Nostrils",
    "LipLowerLeft",
    "LipLowerRight",
    "LipUpperLeft",
    "LipUpperRight",
    "LipCornerLeft",
    "LipCornerRight",
    "CheekLeft",
    "CheekRight",
    "LidLowerLeft",
    "LidLowerRight",
    "LidUpperLeft",
    "LidUpperRight",
    "BrowInnerLeft",
    "BrowInnerRight",
    "BrowOuterLeft",
    "BrowOuterRight",
)

FEATURE_SET = frozenset(FEATURES)

# Left/right feature pairs for the mirror-symmetry audit.
MIRROR_PAIRS: tuple[tuple[str, str], ...] = tuple(
    (name, name[:-4] + "Right") for name in FEATURES if name.endswith("Left")
)

# The six basic expressions, in table column order.
BASICS: tuple[str, ...] = ("surprise", "happy", "sad", "angry", "disgust", "fear")

# Everyday emotion words mapped onto the basic expression labels, so event
# scripts can say "joy" while the displacement table says "happy".
LABEL_ALIASES: dict[str, str] = {
    "joy": "happy",
    "happiness": "happy",
    "afraid": "fear",
    "scared": "fear",
    "disgusted": "disgust",
    "surprised": "surprise",
    "anger": "angry",
    "sadness": "sad",
}

AXIS_NAMES = ("z", "x", "y")  # component order of stored vectors


def check_feature(name: str) -> str:
    if name not in FEATURE_SET:
        raise UnknownLabelError(f"unknown feature: {name}")
    return name


def vec_add(a: Vector3, b: Vector3) -> Vector3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vec_scale(v: Vector3, k: float) -> Vector3:
    return (v[0] * k, v[1] * k, v[2] * k)


def map_add(a: DisplacementMap, b: DisplacementMap) -> DisplacementMap:
    out = dict(a)
    for name, vec in b.items():
        out[name] = vec_add(out.get(name, ZERO3), vec)
    return out


def zero_map() -> DisplacementMap:
    """All 18 features mapped to the zero vector, in canonical order."""
    return {name: ZERO3 for name in FEATURES}
