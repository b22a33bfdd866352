"""Expression vector tables: per-feature displacement vectors for each label.

A table holds one displacement vector per (expression, feature) pair at
intensity 1. Blended labels are weighted sums of basic ones and are stored
by their recipe, not by precomputed vectors, so edits to a basic expression
flow through automatically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ParseError, UnknownLabelError, ValidationError
from .features import (
    FEATURES,
    FEATURE_SET,
    LABEL_ALIASES,
    MIRROR_PAIRS,
    DisplacementMap,
    Vector3,
    map_add,
    vec_scale,
    zero_map,
)

TABLE_FORMAT = "emotemesh-table/1"

# Large displacements are almost certainly unit mistakes; flag anything
# whose single component exceeds this many meters.
SUSPICIOUS_COMPONENT_M = 0.05

# Built-in displacement vectors, [z, x, y] meters at intensity 1, for the
# six basic expressions. Rows follow the canonical feature order.
_BUILTIN: dict[str, dict[str, Vector3]] = {
    "surprise": {
        "Jaw": (-0.005, 0.0, 0.01),
        "Nostrils": (0.0, 0.0, 0.0),
        "LipLowerLeft": (0.0, -0.001, -0.001),
        "LipLowerRight": (0.0, 0.001, -0.001),
        "LipUpperLeft": (0.0, -0.002, -0.001),
        "LipUpperRight": (0.0, 0.002, -0.001),
        "LipCornerLeft": (0.0, -0.001, 0.0),
        "LipCornerRight": (0.0, 0.001, 0.0),
        "CheekLeft": (0.0, 0.0, 0.004),
        "CheekRight": (0.0, 0.0, 0.004),
        "LidLowerLeft": (0.0, 0.0, 0.001),
        "LidLowerRight": (0.0, 0.0, 0.001),
        "LidUpperLeft": (0.0, 0.0, -0.003),
        "LidUpperRight": (0.0, 0.0, -0.003),
        "BrowInnerLeft": (0.0, 0.0, -0.005),
        "BrowInnerRight": (0.0, 0.0, -0.005),
        "BrowOuterLeft": (0.0, 0.0, -0.005),
        "BrowOuterRight": (0.0, 0.0, -0.005),
    },
    "happy": {
        "Jaw": (0.0, 0.0, 0.0),
        "Nostrils": (0.0, 0.0, 0.0),
        "LipLowerLeft": (-0.002, 0.001, 0.001),
        "LipLowerRight": (-0.002, -0.001, 0.001),
        "LipUpperLeft": (-0.001, 0.001, -0.001),
        "LipUpperRight": (-0.001, -0.001, -0.001),
        "LipCornerLeft": (-0.005, 0.009, -0.007),
        "LipCornerRight": (-0.005, -0.009, -0.007),
        "CheekLeft": (0.0, 0.0, -0.011),
        "CheekRight": (0.0, 0.0, -0.011),
        "LidLowerLeft": (0.0, 0.0, -0.0017),
        "LidLowerRight": (0.0, 0.0, -0.0017),
        "LidUpperLeft": (0.0, 0.0, 0.0015),
        "LidUpperRight": (0.0, 0.0, 0.0015),
        "BrowInnerLeft": (0.0, 0.0, 0.0),
        "BrowInnerRight": (0.0, 0.0, 0.0),
        "BrowOuterLeft": (0.0, 0.0, 0.0),
        "BrowOuterRight": (0.0, 0.0, 0.0),
    },
    "sad": {
        "Jaw": (0.0, 0.0, 0.0),
        "Nostrils": (0.0, 0.0, 0.0),
        "LipLowerLeft": (0.0, 0.001, 0.001),
        "LipLowerRight": (0.0, -0.001, 0.001),
        "LipUpperLeft": (0.0, 0.001, 0.001),
        "LipUpperRight": (0.0, -0.001, 0.001),
        "LipCornerLeft": (0.0, 0.002, 0.007),
        "LipCornerRight": (0.0, -0.002, 0.007),
        "CheekLeft": (0.0, 0.0, 0.0),
        "CheekRight": (0.0, 0.0, 0.0),
        "LidLowerLeft": (0.0, 0.0, 0.0),
        "LidLowerRight": (0.0, 0.0, 0.0),
        "LidUpperLeft": (0.0, 0.0, 0.001),
        "LidUpperRight": (0.0, 0.0, 0.001),
        "BrowInnerLeft": (0.0, 0.0, -0.005),
        "BrowInnerRight": (0.0, 0.0, -0.005),
        "BrowOuterLeft": (0.0, 0.0, 0.006),
        "BrowOuterRight": (0.0, 0.0, 0.006),
    },
    "angry": {
        "Jaw": (0.0, 0.0, 0.0),
        "Nostrils": (0.0, 0.0, 0.0),
        "LipLowerLeft": (0.0, -0.002, 0.0),
        "LipLowerRight": (0.0, 0.002, 0.0),
        "LipUpperLeft": (0.0, -0.002, -0.002),
        "LipUpperRight": (0.0, 0.002, -0.002),
        "LipCornerLeft": (0.0, -0.004, 0.0),
        "LipCornerRight": (0.0, 0.004, 0.0),
        "CheekLeft": (0.0, 0.0, 0.0),
        "CheekRight": (0.0, 0.0, 0.0),
        "LidLowerLeft": (0.0, 0.0, 0.001),
        "LidLowerRight": (0.0, 0.0, 0.001),
        "LidUpperLeft": (0.0, 0.0, 0.0),
        "LidUpperRight": (0.0, 0.0, 0.0),
        "BrowInnerLeft": (0.0, -0.013, 0.012),
        "BrowInnerRight": (0.0, 0.013, 0.012),
        "BrowOuterLeft": (0.0, 0.0, 0.003),
        "BrowOuterRight": (0.0, 0.0, 0.003),
    },
    "disgust": {
        "Jaw": (-0.001, 0.0, 0.001),
        "Nostrils": (0.0, 0.0, -0.008),
        "LipLowerLeft": (-0.004, 0.002, 0.002),
        "LipLowerRight": (-0.004, -0.002, 0.0025),
        "LipUpperLeft": (-0.002, 0.002, -0.0045),
        "LipUpperRight": (-0.002, -0.002, -0.0045),
        "LipCornerLeft": (0.0, -0.001, 0.0),
        "LipCornerRight": (0.0, 0.001, 0.0),
        "CheekLeft": (0.0, 0.0, -0.003),
        "CheekRight": (0.0, 0.0, -0.003),
        "LidLowerLeft": (0.0, 0.0, -0.0025),
        "LidLowerRight": (0.0, 0.0, -0.0025),
        "LidUpperLeft": (0.0, 0.0, 0.002),
        "LidUpperRight": (0.0, 0.0, 0.002),
        "BrowInnerLeft": (0.0, -0.013, 0.004),
        "BrowInnerRight": (0.0, 0.013, 0.004),
        "BrowOuterLeft": (0.0, -0.002, 0.0),
        "BrowOuterRight": (0.0, 0.002, 0.0),
    },
    "fear": {
        "Jaw": (-0.002, 0.0, 0.003),
        "Nostrils": (0.0, 0.0, 0.0),
        "LipLowerLeft": (0.0, 0.0, 0.002),
        "LipLowerRight": (0.0, 0.0, 0.002),
        "LipUpperLeft": (0.0, 0.0, -0.002),
        "LipUpperRight": (0.0, 0.0, -0.002),
        "LipCornerLeft": (0.0, 0.002, 0.003),
        "LipCornerRight": (0.0, -0.002, 0.003),
        "CheekLeft": (0.0, 0.0, 0.0),
        "CheekRight": (0.0, 0.0, 0.0),
        "LidLowerLeft": (0.0, 0.0, 0.002),
        "LidLowerRight": (0.0, 0.0, 0.002),
        "LidUpperLeft": (0.0, 0.0, -0.003),
        "LidUpperRight": (0.0, 0.0, -0.003),
        "BrowInnerLeft": (0.0, -0.008, -0.006),
        "BrowInnerRight": (0.0, 0.008, -0.006),
        "BrowOuterLeft": (0.0, 0.0, 0.004),
        "BrowOuterRight": (0.0, 0.0, 0.004),
    },
}

# Blended expressions as (basic, weight) recipes. Each is an equal-parts
# linear mix of its two components.
_BUILTIN_BLENDS: dict[str, tuple[tuple[str, float], ...]] = {
    "evil": (("angry", 0.5), ("happy", 0.5)),
    "frustrated": (("sad", 0.5), ("angry", 0.5)),
    "enthusiastic": (("surprise", 0.5), ("happy", 0.5)),
    "furious": (("surprise", 0.5), ("angry", 0.5)),
}


@dataclass(frozen=True)
class SymmetryFinding:
    """One mirror violation: a left/right feature pair that fails to mirror."""

    label: str
    left: str
    right: str
    axis: str
    left_value: float
    right_value: float

    def __str__(self):
        return (
            f"{self.label}: {self.left}/{self.right} {self.axis} mismatch "
            f"({self.left_value} vs {self.right_value})"
        )


@dataclass
class ExpressionTable:
    """Displacement vectors for basic expressions plus blend recipes.

    Basic entries are dense: one vector per canonical feature. Blend entries
    reference basics by name with a weight each.
    """

    basics: dict[str, dict[str, Vector3]] = field(default_factory=dict)
    blends: dict[str, tuple[tuple[str, float], ...]] = field(default_factory=dict)

    def __post_init__(self):
        for label, vectors in self.basics.items():
            dense = dict(zero_map())
            for feature, vec in vectors.items():
                if feature not in FEATURE_SET:
                    raise ValidationError(f"{label}: unknown feature {feature!r}")
                dense[feature] = (float(vec[0]), float(vec[1]), float(vec[2]))
            self.basics[label] = dense
        for label, recipe in self.blends.items():
            if label in self.basics:
                raise ValidationError(f"label {label!r} is both a basic and a blend")
            if not recipe:
                raise ValidationError(f"blend {label!r} has no components")
            for base, weight in recipe:
                if base not in self.basics:
                    raise ValidationError(f"blend {label!r} references unknown basic {base!r}")
                if not math.isfinite(weight):
                    raise ValidationError(f"blend {label!r}: weight for {base!r} must be finite")

    def labels(self) -> tuple[str, ...]:
        return tuple(self.basics) + tuple(self.blends)

    def resolve(self, label: str) -> str:
        """Map a label or one of its aliases to the stored name."""
        if label in self.basics or label in self.blends:
            return label
        alias = LABEL_ALIASES.get(label.lower())
        if alias is not None and (alias in self.basics or alias in self.blends):
            return alias
        if label.lower() in self.basics or label.lower() in self.blends:
            return label.lower()
        raise UnknownLabelError(f"unknown expression label: {label}")

    def vector_set(self, label: str) -> DisplacementMap:
        """Dense feature->vector map for a label, blends expanded."""
        name = self.resolve(label)
        if name in self.basics:
            return dict(self.basics[name])
        out = zero_map()
        for base, weight in self.blends[name]:
            out = map_add(out, scale_map(self.basics[base], weight))
        return out

    def scale(self, label: str, intensity: float) -> DisplacementMap:
        """Vector set at a given intensity. Displacement scales linearly."""
        if intensity < 0:
            raise ValueError("intensity must be non-negative")
        return scale_map(self.vector_set(label), intensity)

    def synthesize(self, intensities: dict[str, float]) -> DisplacementMap:
        """Additive mix: sum of each label's vector set times its intensity."""
        out = zero_map()
        for label, intensity in intensities.items():
            out = map_add(out, self.scale(label, intensity))
        return out


def scale_map(vectors: DisplacementMap, factor: float) -> DisplacementMap:
    return {feature: vec_scale(vec, factor) for feature, vec in vectors.items()}


def blend(table: ExpressionTable, components: "list[tuple[str, float]]") -> DisplacementMap:
    """Weighted sum of several labels' vector sets."""
    out = zero_map()
    for label, weight in components:
        out = map_add(out, scale_map(table.vector_set(label), weight))
    return out


def builtin_table() -> ExpressionTable:
    """The bundled table: six basics plus four blended expressions."""
    basics = {label: dict(vectors) for label, vectors in _BUILTIN.items()}
    return ExpressionTable(basics, dict(_BUILTIN_BLENDS))


# ---------------------------------------------------------------------------
# Table documents
# ---------------------------------------------------------------------------


def load_table(document: "str | dict") -> ExpressionTable:
    """Load a table from JSON text or a parsed document.

    Basic entries may be sparse; unlisted features default to zero.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(f"table document is not valid JSON: {e}", e.lineno) from None
    if not isinstance(document, dict):
        raise ParseError("table document must be a JSON object")
    if document.get("format") != TABLE_FORMAT:
        raise ValidationError(f"expected format {TABLE_FORMAT!r}, got {document.get('format')!r}")

    basics_doc = document.get("basics")
    if not isinstance(basics_doc, dict) or not basics_doc:
        raise ValidationError("table document has no basics object")
    basics: dict[str, dict[str, Vector3]] = {}
    for label, vectors in basics_doc.items():
        if not isinstance(vectors, dict):
            raise ValidationError(f"{label}: expected a feature->vector object")
        entry: dict[str, Vector3] = {}
        for feature, vec in vectors.items():
            if not isinstance(vec, list) or len(vec) != 3:
                raise ValidationError(f"{label}.{feature}: expected a 3-element [z, x, y] vector")
            entry[feature] = (float(vec[0]), float(vec[1]), float(vec[2]))
        basics[label] = entry

    blends: dict[str, tuple[tuple[str, float], ...]] = {}
    for label, recipe in document.get("blends", {}).items():
        if not isinstance(recipe, list):
            raise ValidationError(f"blend {label!r}: expected a list of [basic, weight] pairs")
        parsed = []
        for item in recipe:
            if not isinstance(item, list) or len(item) != 2:
                raise ValidationError(f"blend {label!r}: expected [basic, weight] pairs")
            parsed.append((str(item[0]), float(item[1])))
        blends[label] = tuple(parsed)

    return ExpressionTable(basics, blends)


def save_table(table: ExpressionTable) -> dict:
    return {
        "format": TABLE_FORMAT,
        "basics": {
            label: {feature: list(vectors[feature]) for feature in FEATURES}
            for label, vectors in table.basics.items()
        },
        "blends": {label: [[base, w] for base, w in recipe] for label, recipe in table.blends.items()},
    }


def table_to_json(table: ExpressionTable) -> str:
    return json.dumps(save_table(table), indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------


def symmetry_audit(table: ExpressionTable) -> list[SymmetryFinding]:
    """Check every label's left/right pairs for exact mirror symmetry.

    Mirroring means equal z (front) and y (down) with negated x (right).
    Comparisons are exact: the audit exists to catch hand-editing slips,
    and a mirrored pair authored as such matches bit for bit.
    """
    findings = []
    for label in table.labels():
        vectors = table.vector_set(label)
        for left, right in MIRROR_PAIRS:
            lz, lx, ly = vectors[left]
            rz, rx, ry = vectors[right]
            if lz != rz:
                findings.append(SymmetryFinding(label, left, right, "z", lz, rz))
            if rx != -lx:
                findings.append(SymmetryFinding(label, left, right, "x", lx, rx))
            if ly != ry:
                findings.append(SymmetryFinding(label, left, right, "y", ly, ry))
    return findings


def magnitude_audit(table: ExpressionTable) -> list[str]:
    """Flag displacement components large enough to suggest a unit mistake."""
    warnings = []
    for label in table.labels():
        for feature, vec in table.vector_set(label).items():
            worst = max(abs(c) for c in vec)
            if worst > SUSPICIOUS_COMPONENT_M:
                warnings.append(
                    f"{label}.{feature}: component magnitude {worst} m exceeds "
                    f"{SUSPICIOUS_COMPONENT_M} m, check units"
                )
    return warnings
