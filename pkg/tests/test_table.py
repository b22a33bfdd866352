import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emotemesh.errors import UnknownLabelError, ValidationError
from emotemesh.features import BASICS, FEATURES
from emotemesh.table import (
    ExpressionTable,
    blend,
    builtin_table,
    load_table,
    magnitude_audit,
    save_table,
    symmetry_audit,
    table_to_json,
)

# Independently recomputed by hand from the published vector list before
# the table module existed; these literals are the oracle, not the code.
SPOT_VALUES = {
    ("surprise", "Jaw"): (-0.005, 0.0, 0.01),
    ("surprise", "LipUpperRight"): (0.0, 0.002, -0.001),
    ("happy", "LipCornerLeft"): (-0.005, 0.009, -0.007),
    ("happy", "CheekLeft"): (0.0, 0.0, -0.011),
    ("happy", "LidLowerRight"): (0.0, 0.0, -0.0017),
    ("happy", "BrowInnerLeft"): (0.0, 0.0, 0.0),
    ("sad", "LipCornerLeft"): (0.0, 0.002, 0.007),
    ("sad", "BrowOuterLeft"): (0.0, 0.0, 0.006),
    ("angry", "BrowInnerLeft"): (0.0, -0.013, 0.012),
    ("angry", "BrowInnerRight"): (0.0, 0.013, 0.012),
    ("disgust", "Nostrils"): (0.0, 0.0, -0.008),
    ("disgust", "LipLowerLeft"): (-0.004, 0.002, 0.002),
    ("disgust", "LipLowerRight"): (-0.004, -0.002, 0.0025),
    ("disgust", "LipUpperLeft"): (-0.002, 0.002, -0.0045),
    ("fear", "Jaw"): (-0.002, 0.0, 0.003),
    ("fear", "BrowInnerLeft"): (0.0, -0.008, -0.006),
    ("fear", "LidUpperLeft"): (0.0, 0.0, -0.003),
}


def test_builtin_table_shape():
    table = builtin_table()
    assert set(table.basics) == set(BASICS)
    for label in BASICS:
        vectors = table.basics[label]
        assert tuple(vectors) == FEATURES
    assert set(table.blends) == {"evil", "frustrated", "enthusiastic", "furious"}
    assert len(table.labels()) == 10


def test_builtin_spot_values_exact():
    table = builtin_table()
    for (label, feature), expected in SPOT_VALUES.items():
        assert table.basics[label][feature] == expected, (label, feature)


def test_builtin_max_component_is_brow_x():
    table = builtin_table()
    worst = max(
        abs(c)
        for label in BASICS
        for vec in table.basics[label].values()
        for c in vec
    )
    assert worst == 0.013


def test_symmetry_audit_flags_exactly_the_disgust_lip_pair():
    findings = symmetry_audit(builtin_table())
    assert len(findings) == 1
    f = findings[0]
    assert (f.label, f.left, f.right, f.axis) == ("disgust", "LipLowerLeft", "LipLowerRight", "y")
    assert (f.left_value, f.right_value) == (0.002, 0.0025)


def test_symmetry_audit_catches_injected_asymmetry():
    table = builtin_table()
    z, x, y = table.basics["happy"]["CheekLeft"]
    table.basics["happy"]["CheekLeft"] = (z + 0.001, x, y)
    labels = {(f.label, f.left, f.axis) for f in symmetry_audit(table)}
    assert ("happy", "CheekLeft", "z") in labels
    assert ("disgust", "LipLowerLeft", "y") in labels  # still present
    # the asymmetry propagates into every blend containing happy
    assert ("evil", "CheekLeft", "z") in labels
    assert ("enthusiastic", "CheekLeft", "z") in labels
    assert len(labels) == 4


def test_blend_recipes():
    table = builtin_table()
    assert table.blends["evil"] == (("angry", 0.5), ("happy", 0.5))
    assert table.blends["frustrated"] == (("sad", 0.5), ("angry", 0.5))
    assert table.blends["enthusiastic"] == (("surprise", 0.5), ("happy", 0.5))
    assert table.blends["furious"] == (("surprise", 0.5), ("angry", 0.5))


def test_blend_vectors_match_hand_computed_sums():
    table = builtin_table()

    def close(got, want):
        assert all(abs(g - w) <= 1e-12 for g, w in zip(got, want)), (got, want)

    # 0.5*(0,-0.004,0) + 0.5*(-0.005,0.009,-0.007)
    close(table.vector_set("evil")["LipCornerLeft"], (-0.0025, 0.0025, -0.0035))
    # 0.5*(0,0,-0.005) + 0.5*(0,-0.013,0.012)
    close(table.vector_set("frustrated")["BrowInnerLeft"], (0.0, -0.0065, 0.0035))
    # 0.5*(-0.005,0,0.01) + 0.5*(0,0,0)
    close(table.vector_set("enthusiastic")["Jaw"], (-0.0025, 0.0, 0.005))
    # same sum for furious: the angry jaw row is zero too
    close(table.vector_set("furious")["Jaw"], (-0.0025, 0.0, 0.005))


def test_all_blends_match_brute_force_within_1e_12():
    table = builtin_table()
    for label, recipe in table.blends.items():
        got = table.vector_set(label)
        for feature in FEATURES:
            expected = [0.0, 0.0, 0.0]
            for base, weight in recipe:
                for i in range(3):
                    expected[i] += weight * table.basics[base][feature][i]
            for i in range(3):
                assert abs(got[feature][i] - expected[i]) <= 1e-12, (label, feature)


def test_scale_is_homogeneous():
    table = builtin_table()
    assert table.scale("happy", 2.4)["CheekLeft"] == (0.0, 0.0, -0.011 * 2.4)
    assert table.scale("happy", 0.0)["CheekLeft"] == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        table.scale("happy", -0.1)


def test_synthesize_adds_labels():
    table = builtin_table()
    # happy + sad at full strength
    out = table.synthesize({"happy": 1.0, "sad": 1.0})
    assert out["LipCornerLeft"] == (-0.005, 0.011, 0.0)


def test_alias_resolution():
    table = builtin_table()
    assert table.resolve("joy") == "happy"
    assert table.resolve("afraid") == "fear"
    assert table.resolve("surprised") == "surprise"
    assert table.resolve("disgusted") == "disgust"
    assert table.resolve("Happy") == "happy"
    assert table.vector_set("joy") == table.vector_set("happy")
    with pytest.raises(UnknownLabelError):
        table.resolve("melancholy")


def test_table_json_round_trip_exact():
    table = builtin_table()
    doc = save_table(table)
    again = load_table(json.dumps(doc))
    assert save_table(again) == doc
    for label in table.labels():
        assert again.vector_set(label) == table.vector_set(label)
    # sparse documents fill missing features with zero
    sparse = {"format": "emotemesh-table/1", "basics": {"happy": {"Jaw": [0, 0, 0.001]}}}
    loaded = load_table(sparse)
    assert loaded.basics["happy"]["Jaw"] == (0.0, 0.0, 0.001)
    assert loaded.basics["happy"]["Nostrils"] == (0.0, 0.0, 0.0)


def test_table_document_validation():
    with pytest.raises(ValidationError, match="format"):
        load_table({"basics": {}})
    with pytest.raises(ValidationError, match="unknown feature"):
        load_table({"format": "emotemesh-table/1", "basics": {"happy": {"Chin": [0, 0, 0]}}})
    with pytest.raises(ValidationError, match="unknown basic"):
        load_table(
            {
                "format": "emotemesh-table/1",
                "basics": {"happy": {}},
                "blends": {"evil": [["angry", 0.5]]},
            }
        )
    with pytest.raises(ValidationError, match="3-element"):
        load_table({"format": "emotemesh-table/1", "basics": {"happy": {"Jaw": [0, 0]}}})


def test_magnitude_audit_warns_beyond_five_centimeters():
    assert magnitude_audit(builtin_table()) == []
    table = builtin_table()
    table.basics["happy"]["Jaw"] = (0.0, 0.0, 0.06)
    warnings = magnitude_audit(table)
    assert len(warnings) >= 1 and "happy.Jaw" in warnings[0]


def test_blend_function_weighted_sum():
    table = builtin_table()
    out = blend(table, [("happy", 0.25), ("angry", 0.75)])
    for feature in FEATURES:
        h = table.basics["happy"][feature]
        a = table.basics["angry"][feature]
        for i in range(3):
            assert abs(out[feature][i] - (0.25 * h[i] + 0.75 * a[i])) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(
    w=st.dictionaries(
        st.sampled_from(BASICS),
        st.floats(0.0, 2.4, allow_nan=False),
        min_size=1,
        max_size=6,
    ),
    k=st.floats(0.0, 4.0, allow_nan=False),
)
def test_synthesize_homogeneity_property(w, k):
    table = builtin_table()
    base = table.synthesize(w)
    scaled = table.synthesize({label: k * v for label, v in w.items()})
    for feature in FEATURES:
        for i in range(3):
            assert abs(scaled[feature][i] - k * base[feature][i]) <= 1e-12


def test_table_to_json_stable():
    assert table_to_json(builtin_table()) == table_to_json(builtin_table())
