"""A small procedurally built demo head with all 18 anchors rigged.

The mesh is the front half of an ellipsoid (x right, y down, z toward the
viewer), dense enough that every anchor region catches several vertices.
It exists so the command line tools and tests run with zero external
assets; it is not meant to look like anyone.
"""

from __future__ import annotations

import math

import numpy as np

from .features import Vector3
from .rig import Anchor, Axes, Mesh, Rig, generate_weights

SAMPLE_MESH_REF = "sampleface"

# Ellipsoid half-axes in meters: width, height, depth of an adult head's
# front. y grows downward to match the displacement convention.
_AX, _AY, _AZ = 0.08, 0.11, 0.09

_GRID = 21  # vertices per direction
_SWEEP_DEG = 75.0  # angular half-extent vertically and horizontally

# Anchor layout: (x, y) on the face, region radius in meters. "Left"
# features carry positive x: the table's vectors treat +x as the viewer's
# right, which is the character's anatomical left.
_ANCHOR_LAYOUT: dict[str, tuple[float, float, float]] = {
    "Jaw": (0.0, 0.075, 0.035),
    "Nostrils": (0.0, 0.02, 0.018),
    "LipLowerLeft": (0.012, 0.048, 0.016),
    "LipLowerRight": (-0.012, 0.048, 0.016),
    "LipUpperLeft": (0.012, 0.035, 0.016),
    "LipUpperRight": (-0.012, 0.035, 0.016),
    "LipCornerLeft": (0.028, 0.042, 0.016),
    "LipCornerRight": (-0.028, 0.042, 0.016),
    "CheekLeft": (0.05, 0.01, 0.03),
    "CheekRight": (-0.05, 0.01, 0.03),
    "LidLowerLeft": (0.032, -0.025, 0.015),
    "LidLowerRight": (-0.032, -0.025, 0.015),
    "LidUpperLeft": (0.032, -0.038, 0.015),
    "LidUpperRight": (-0.032, -0.038, 0.015),
    "BrowInnerLeft": (0.018, -0.055, 0.018),
    "BrowInnerRight": (-0.018, -0.055, 0.018),
    "BrowOuterLeft": (0.05, -0.052, 0.018),
    "BrowOuterRight": (-0.05, -0.052, 0.018),
}


def _surface_z(x: float, y: float) -> float:
    """Depth of the ellipsoid surface above the (x, y) face plane point."""
    r = 1.0 - (x / _AX) ** 2 - (y / _AY) ** 2
    return _AZ * math.sqrt(max(0.0, r))


def sample_face() -> Mesh:
    """Build the demo head mesh: a lat/lon grid over the front half."""
    sweep = math.radians(_SWEEP_DEG)
    angles = [(-sweep + 2.0 * sweep * i / (_GRID - 1)) for i in range(_GRID)]

    vertices = []
    for u in angles:  # vertical, negative = brow, positive = chin
        for v in angles:  # horizontal, positive = viewer's right
            x = _AX * math.cos(u) * math.sin(v)
            y = _AY * math.sin(u)
            z = _AZ * math.cos(u) * math.cos(v)
            vertices.append((x, y, z))

    faces = []
    for i in range(_GRID - 1):
        for j in range(_GRID - 1):
            a = i * _GRID + j
            b = a + 1
            c = a + _GRID
            d = c + 1
            faces.append(((a, None, None), (c, None, None), (d, None, None)))
            faces.append(((a, None, None), (d, None, None), (b, None, None)))

    return Mesh(np.array(vertices, dtype=np.float64), faces)


def sample_rig(mesh: "Mesh | None" = None) -> Rig:
    """Rig the demo head: smoothstep weight regions around each landmark."""
    if mesh is None:
        mesh = sample_face()
    anchors = {}
    for name, (x, y, radius) in _ANCHOR_LAYOUT.items():
        rest: Vector3 = (x, y, _surface_z(x, y))
        weights = generate_weights(mesh, rest, radius, "smoothstep")
        anchors[name] = Anchor(name, rest, weights)
    return Rig(SAMPLE_MESH_REF, anchors, Axes(), {"generator": SAMPLE_MESH_REF})
