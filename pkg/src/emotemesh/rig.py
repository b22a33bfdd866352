"""Rigged face meshes: OBJ geometry, anchor regions, and vertex displacement.

A rig binds the 18 canonical features to weighted vertex regions of a mesh.
Feature displacement vectors are given in [z, x, y] front/right/down order
(see features.py); the rig document declares which mesh axis each of those
directions corresponds to, and displace() converts on the fly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, UnknownLabelError, ValidationError
from .features import FEATURES, FEATURE_SET, DisplacementMap, Vector3

RIG_FORMAT = "emotemesh-rig/1"

# (vertex, texcoord, normal) indices, 0-based, texcoord/normal may be None
Corner = tuple[int, "int | None", "int | None"]

_AXIS_VECTORS = {
    "+x": (1.0, 0.0, 0.0),
    "-x": (-1.0, 0.0, 0.0),
    "+y": (0.0, 1.0, 0.0),
    "-y": (0.0, -1.0, 0.0),
    "+z": (0.0, 0.0, 1.0),
    "-z": (0.0, 0.0, -1.0),
}


@dataclass(frozen=True)
class Axes:
    """Mapping from the front/right/down vector convention to mesh axes."""

    front: str = "+z"
    right: str = "+x"
    down: str = "+y"

    def __post_init__(self):
        for label, value in (("front", self.front), ("right", self.right), ("down", self.down)):
            if value not in _AXIS_VECTORS:
                raise ValidationError(f"axes.{label}: expected one of +x,-x,+y,-y,+z,-z, got {value!r}")
        letters = {self.front[1], self.right[1], self.down[1]}
        if len(letters) != 3:
            raise ValidationError("axes front/right/down must use three distinct mesh axes")

    def to_mesh(self, vec: Vector3) -> Vector3:
        """Convert a [z, x, y] displacement into mesh coordinates."""
        fz, fx, fy = _AXIS_VECTORS[self.front], _AXIS_VECTORS[self.right], _AXIS_VECTORS[self.down]
        z, x, y = vec
        return (
            z * fz[0] + x * fx[0] + y * fy[0],
            z * fz[1] + x * fx[1] + y * fy[1],
            z * fz[2] + x * fx[2] + y * fy[2],
        )


@dataclass
class Mesh:
    """Triangle mesh. Vertices are (N, 3) float64 in meters, model space.

    Texture coordinates and normals are carried through untouched so that
    displaced copies of a textured mesh keep their texturing.
    """

    vertices: np.ndarray
    faces: list[tuple[Corner, Corner, Corner]]
    texcoords: list[tuple[float, ...]] = field(default_factory=list)
    normals: list[Vector3] = field(default_factory=list)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValidationError("vertices must be an (N, 3) array")
        if not np.all(np.isfinite(self.vertices)):
            raise ValidationError("vertex positions must be finite")
        n = len(self.vertices)
        for corners in self.faces:
            for v, _, _ in corners:
                if not 0 <= v < n:
                    raise ValidationError(f"face vertex index {v + 1} out of range (mesh has {n} vertices)")
        self.vertices.setflags(write=False)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def face_indices(self) -> np.ndarray:
        """(M, 3) vertex indices, texture/normal data dropped."""
        return np.array([[c[0] for c in corners] for corners in self.faces], dtype=np.int64)

    def with_vertices(self, vertices: np.ndarray) -> "Mesh":
        return Mesh(vertices, self.faces, self.texcoords, self.normals)


@dataclass(frozen=True)
class Anchor:
    """A named control point attached to a weighted vertex region."""

    name: str
    rest: Vector3
    weights: dict[int, float]

    def __post_init__(self):
        if self.name not in FEATURE_SET:
            raise ValidationError(f"unknown anchor name: {self.name}")
        if not self.weights:
            raise ValidationError(f"anchor {self.name}: weight map is empty")
        for idx, w in self.weights.items():
            if not 0.0 <= w <= 1.0:
                raise ValidationError(f"anchor {self.name}: weight {w} for vertex {idx} outside [0, 1]")
        if not all(math.isfinite(c) for c in self.rest):
            raise ValidationError(f"anchor {self.name}: rest position must be finite")


@dataclass(frozen=True)
class Rig:
    """All 18 anchors bound to one mesh, plus the axis declaration."""

    mesh_ref: str
    anchors: dict[str, Anchor]
    axes: Axes = field(default_factory=Axes)
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        missing = [name for name in FEATURES if name not in self.anchors]
        if missing:
            raise ValidationError(f"missing anchor: {missing[0]}")
        extra = set(self.anchors) - FEATURE_SET
        if extra:
            raise ValidationError(f"unknown anchor name: {sorted(extra)[0]}")
        # Normalize iteration order so downstream accumulation is deterministic.
        object.__setattr__(self, "anchors", {name: self.anchors[name] for name in FEATURES})

    def max_vertex_index(self) -> int:
        return max(max(a.weights) for a in self.anchors.values())


# ---------------------------------------------------------------------------
# Wavefront OBJ
# ---------------------------------------------------------------------------


def _parse_corner(token: str, lineno: int) -> Corner:
    parts = token.split("/")
    if len(parts) > 3 or parts[0] == "":
        raise ParseError(f"malformed face corner {token!r}", lineno)
    try:
        v = int(parts[0])
        vt = int(parts[1]) if len(parts) > 1 and parts[1] != "" else None
        vn = int(parts[2]) if len(parts) > 2 and parts[2] != "" else None
    except ValueError:
        raise ParseError(f"malformed face corner {token!r}", lineno) from None
    if v < 1 or (vt is not None and vt < 1) or (vn is not None and vn < 1):
        raise ParseError(f"face indices are 1-based, got {token!r}", lineno)
    return (v - 1, vt - 1 if vt is not None else None, vn - 1 if vn is not None else None)


def load_mesh(text: str) -> Mesh:
    """Parse Wavefront OBJ text. Polygon faces are fan-triangulated."""
    vertices: list[Vector3] = []
    texcoords: list[tuple[float, ...]] = []
    normals: list[Vector3] = []
    faces: list[tuple[Corner, Corner, Corner]] = []
    face_lines: list[int] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind, args = tokens[0], tokens[1:]
        if kind == "v":
            if len(args) < 3:
                raise ParseError("vertex record needs 3 coordinates", lineno)
            try:
                vertices.append((float(args[0]), float(args[1]), float(args[2])))
            except ValueError:
                raise ParseError(f"malformed vertex record {line!r}", lineno) from None
        elif kind == "vt":
            try:
                texcoords.append(tuple(float(a) for a in args[:3]))
            except ValueError:
                raise ParseError(f"malformed texcoord record {line!r}", lineno) from None
        elif kind == "vn":
            if len(args) < 3:
                raise ParseError("normal record needs 3 components", lineno)
            try:
                normals.append((float(args[0]), float(args[1]), float(args[2])))
            except ValueError:
                raise ParseError(f"malformed normal record {line!r}", lineno) from None
        elif kind == "f":
            if len(args) < 3:
                raise ParseError("face record needs at least 3 corners", lineno)
            corners = [_parse_corner(tok, lineno) for tok in args]
            for i in range(1, len(corners) - 1):
                faces.append((corners[0], corners[i], corners[i + 1]))
                face_lines.append(lineno)
        # all other record types (o, g, s, usemtl, ...) are ignored

    n = len(vertices)
    for corners, lineno in zip(faces, face_lines):
        for v, vt, vn in corners:
            if v >= n:
                raise ValidationError(f"line {lineno}: face vertex index {v + 1} out of range (mesh has {n} vertices)")
            if vt is not None and vt >= len(texcoords):
                raise ValidationError(f"line {lineno}: face texcoord index {vt + 1} out of range")
            if vn is not None and vn >= len(normals):
                raise ValidationError(f"line {lineno}: face normal index {vn + 1} out of range")

    return Mesh(np.array(vertices, dtype=np.float64).reshape(n, 3), faces, texcoords, normals)


def _fmt(x: float) -> str:
    # repr gives the shortest decimal that round-trips, so export/import
    # cycles are bit-exact and exports are byte-stable across runs
    return repr(float(x))


def mesh_to_obj(mesh: Mesh) -> str:
    lines = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
    for tc in mesh.texcoords:
        lines.append("vt " + " ".join(_fmt(c) for c in tc))
    for nx, ny, nz in mesh.normals:
        lines.append(f"vn {_fmt(nx)} {_fmt(ny)} {_fmt(nz)}")
    for corners in mesh.faces:
        parts = []
        for v, vt, vn in corners:
            if vn is not None:
                parts.append(f"{v + 1}/{vt + 1 if vt is not None else ''}/{vn + 1}")
            elif vt is not None:
                parts.append(f"{v + 1}/{vt + 1}")
            else:
                parts.append(str(v + 1))
        lines.append("f " + " ".join(parts))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Rig documents
# ---------------------------------------------------------------------------


def load_rig(document: "str | dict") -> Rig:
    """Load a rig from JSON text or an already-parsed document."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(f"rig document is not valid JSON: {e}", e.lineno) from None
    if not isinstance(document, dict):
        raise ParseError("rig document must be a JSON object")
    if document.get("format") != RIG_FORMAT:
        raise ValidationError(f"expected format {RIG_FORMAT!r}, got {document.get('format')!r}")
    if document.get("units") != "meters":
        raise ValidationError(f"units must be 'meters', got {document.get('units')!r}")

    axes_doc = document.get("axes", {})
    axes = Axes(
        front=axes_doc.get("front", "+z"),
        right=axes_doc.get("right", "+x"),
        down=axes_doc.get("down", "+y"),
    )

    anchors_doc = document.get("anchors")
    if not isinstance(anchors_doc, dict):
        raise ValidationError("rig document has no anchors object")
    for name in FEATURES:
        if name not in anchors_doc:
            raise ValidationError(f"missing anchor: {name}")

    anchors: dict[str, Anchor] = {}
    for name, entry in anchors_doc.items():
        if name not in FEATURE_SET:
            raise ValidationError(f"unknown anchor name: {name}")
        rest = entry.get("rest")
        if not isinstance(rest, list) or len(rest) != 3:
            raise ValidationError(f"anchor {name}: rest must be a 3-element position")
        weights_doc = entry.get("weights")
        if not isinstance(weights_doc, dict) or not weights_doc:
            raise ValidationError(f"anchor {name}: weight map is empty")
        weights: dict[int, float] = {}
        for key, w in weights_doc.items():
            try:
                idx = int(key)
            except ValueError:
                raise ValidationError(f"anchor {name}: vertex index {key!r} is not an integer") from None
            if idx < 0:
                raise ValidationError(f"anchor {name}: vertex index {idx} is negative")
            weights[idx] = float(w)
        anchors[name] = Anchor(name, (float(rest[0]), float(rest[1]), float(rest[2])), weights)

    metadata = document.get("metadata", {})
    return Rig(str(document.get("mesh", "")), anchors, axes, dict(metadata))


def save_rig(rig: Rig) -> dict:
    doc: dict = {
        "format": RIG_FORMAT,
        "units": "meters",
        "mesh": rig.mesh_ref,
        "axes": {"front": rig.axes.front, "right": rig.axes.right, "down": rig.axes.down},
        "anchors": {
            name: {
                "rest": list(anchor.rest),
                "weights": {str(idx): anchor.weights[idx] for idx in sorted(anchor.weights)},
            }
            for name, anchor in rig.anchors.items()
        },
    }
    if rig.metadata:
        doc["metadata"] = dict(rig.metadata)
    return doc


def rig_to_json(rig: Rig) -> str:
    return json.dumps(save_rig(rig), indent=2, sort_keys=False) + "\n"


def validate_rig_against_mesh(rig: Rig, mesh: Mesh) -> list[str]:
    """Return diagnostics for anchors referencing vertices the mesh lacks."""
    problems = []
    n = mesh.vertex_count
    for name, anchor in rig.anchors.items():
        bad = sorted(idx for idx in anchor.weights if idx >= n)
        if bad:
            problems.append(f"anchor {name}: vertex index {bad[0]} out of range (mesh has {n} vertices)")
    return problems


# ---------------------------------------------------------------------------
# Weight generation and displacement
# ---------------------------------------------------------------------------


def generate_weights(
    mesh: Mesh,
    center: Vector3,
    radius: float,
    falloff: str = "smoothstep",
) -> dict[int, float]:
    """Authoring aid: weights for vertices within radius of center.

    weight = falloff(1 - dist/radius); vertices at or beyond the radius are
    excluded so every stored weight is in (0, 1].
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if falloff not in ("linear", "smoothstep"):
        raise ValueError(f"falloff must be 'linear' or 'smoothstep', got {falloff!r}")
    dists = np.linalg.norm(mesh.vertices - np.asarray(center, dtype=np.float64), axis=1)
    weights: dict[int, float] = {}
    for idx in np.nonzero(dists < radius)[0]:
        u = 1.0 - dists[idx] / radius
        if falloff == "smoothstep":
            u = u * u * (3.0 - 2.0 * u)
        if u > 0.0:
            weights[int(idx)] = float(u)
    return weights


def displace(mesh: Mesh, rig: Rig, displacements: DisplacementMap) -> Mesh:
    """Move anchor regions by the given [z, x, y] feature displacements.

    Each weighted vertex moves by weight * anchor displacement; overlapping
    regions sum. Vertices outside every supplied anchor's region are
    untouched bit-exactly.
    """
    for name in displacements:
        if name not in rig.anchors:
            raise UnknownLabelError(f"unknown feature: {name}")
    if rig.max_vertex_index() >= mesh.vertex_count:
        raise ValidationError("rig references vertices the mesh does not have")

    out = mesh.vertices.copy()
    for name in FEATURES:
        vec = displacements.get(name)
        if vec is None:
            continue
        delta = rig.axes.to_mesh(vec)
        if delta == (0.0, 0.0, 0.0):
            continue
        anchor = rig.anchors[name]
        idxs = np.fromiter(anchor.weights.keys(), dtype=np.int64, count=len(anchor.weights))
        ws = np.fromiter(anchor.weights.values(), dtype=np.float64, count=len(anchor.weights))
        out[idxs] += ws[:, None] * np.asarray(delta, dtype=np.float64)[None, :]
    return mesh.with_vertices(out)
