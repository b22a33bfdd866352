import json
import math

import numpy as np
import pytest

from emotemesh.errors import ParseError, UnknownLabelError, ValidationError
from emotemesh.rig import (
    Axes,
    Mesh,
    displace,
    generate_weights,
    load_mesh,
    load_rig,
    mesh_to_obj,
    rig_to_json,
    save_rig,
    validate_rig_against_mesh,
)
from emotemesh.sampleface import sample_face, sample_rig

QUAD_OBJ = """\
# a unit quad
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
f 1 2 3 4
"""


def test_obj_vertices_and_fan_triangulation():
    mesh = load_mesh(QUAD_OBJ)
    assert mesh.vertex_count == 4
    # one quad fans into two triangles sharing the first corner
    assert [tuple(c[0] for c in f) for f in mesh.faces] == [(0, 1, 2), (0, 2, 3)]


def test_obj_texcoords_and_normals_pass_through():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 1\nf 1/1/1 2/2/1 3/3/1\n"
    mesh = load_mesh(text)
    assert mesh.texcoords == [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    assert mesh.normals == [(0.0, 0.0, 1.0)]
    assert mesh.faces[0] == ((0, 0, 0), (1, 1, 0), (2, 2, 0))
    # v//vn without a texcoord
    mesh2 = load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n")
    assert mesh2.faces[0] == ((0, None, 0), (1, None, 0), (2, None, 0))


def test_obj_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 2"):
        load_mesh("v 0 0 0\nv 1 nope 0\n")
    with pytest.raises(ParseError, match="line 1"):
        load_mesh("v 0 0\n")
    with pytest.raises(ParseError, match="line 4"):
        load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n")


def test_obj_face_index_out_of_range():
    with pytest.raises(ValidationError, match="line 4.*out of range"):
        load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")


def test_obj_round_trip_is_exact():
    mesh = load_mesh(QUAD_OBJ)
    text = mesh_to_obj(mesh)
    again = load_mesh(text)
    assert np.array_equal(mesh.vertices, again.vertices)
    assert mesh.faces == again.faces
    # and the re-export is byte-stable
    assert mesh_to_obj(again) == text


def test_obj_round_trip_random_vertices():
    rng = np.random.default_rng(7)
    verts = rng.uniform(-1, 1, (30, 3))
    mesh = Mesh(verts, [((0, None, None), (1, None, None), (2, None, None))])
    again = load_mesh(mesh_to_obj(mesh))
    # repr round-trips every float bit-exactly
    assert np.array_equal(mesh.vertices, again.vertices)


def test_mesh_rejects_nonfinite_vertices():
    with pytest.raises(ValidationError, match="finite"):
        Mesh(np.array([[0.0, 0.0, math.inf]]), [])


def test_axes_validation():
    assert Axes().to_mesh((1.0, 2.0, 3.0)) == (2.0, 3.0, 1.0)  # [z,x,y] -> mesh xyz
    with pytest.raises(ValidationError):
        Axes(front="+w")
    with pytest.raises(ValidationError, match="distinct"):
        Axes(front="+x", right="-x", down="+y")


def test_axes_conversion_remaps_components():
    axes = Axes(front="-y", right="+z", down="+x")
    # displacement of 1 front, 2 right, 3 down
    assert axes.to_mesh((1.0, 2.0, 3.0)) == (3.0, -1.0, 2.0)


def test_rig_json_round_trip_exact():
    rig = sample_rig()
    doc = save_rig(rig)
    again = load_rig(json.dumps(doc))
    assert save_rig(again) == doc
    assert again.axes == rig.axes
    for name, anchor in rig.anchors.items():
        assert again.anchors[name].rest == anchor.rest
        assert again.anchors[name].weights == anchor.weights


def test_rig_document_validation():
    doc = save_rig(sample_rig())
    missing = json.loads(json.dumps(doc))
    del missing["anchors"]["Nostrils"]
    with pytest.raises(ValidationError, match="missing anchor: Nostrils"):
        load_rig(missing)

    bad_units = json.loads(json.dumps(doc))
    bad_units["units"] = "centimeters"
    with pytest.raises(ValidationError, match="meters"):
        load_rig(bad_units)

    bad_weight = json.loads(json.dumps(doc))
    bad_weight["anchors"]["Jaw"]["weights"]["0"] = 1.5
    with pytest.raises(ValidationError, match="outside"):
        load_rig(bad_weight)

    wrong_format = json.loads(json.dumps(doc))
    wrong_format["format"] = "something/9"
    with pytest.raises(ValidationError, match="format"):
        load_rig(wrong_format)


def test_rig_to_json_parses_back():
    rig = sample_rig()
    assert save_rig(load_rig(rig_to_json(rig))) == save_rig(rig)


def test_generate_weights_linear_and_smoothstep():
    mesh = Mesh(np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [2.0, 0.0, 0.0]]), [])
    w = generate_weights(mesh, (0.0, 0.0, 0.0), 1.0, "linear")
    assert w == {0: 1.0, 1: 0.5}  # vertex at distance 2 excluded
    ws = generate_weights(mesh, (0.0, 0.0, 0.0), 1.0, "smoothstep")
    assert ws[0] == 1.0
    assert ws[1] == pytest.approx(0.5 * 0.5 * (3 - 2 * 0.5))  # smoothstep(0.5) = 0.5
    with pytest.raises(ValueError):
        generate_weights(mesh, (0.0, 0.0, 0.0), -1.0)
    with pytest.raises(ValueError):
        generate_weights(mesh, (0.0, 0.0, 0.0), 1.0, "cubic")


def test_generate_weights_excludes_radius_boundary():
    mesh = Mesh(np.array([[1.0, 0.0, 0.0]]), [])
    assert generate_weights(mesh, (0.0, 0.0, 0.0), 1.0) == {}


def test_displace_moves_weighted_region_and_nothing_else():
    mesh = sample_face()
    rig = sample_rig(mesh)
    moved = displace(mesh, rig, {"Jaw": (0.0, 0.0, 0.01)})
    jaw_idx = set(rig.anchors["Jaw"].weights)
    for i in range(mesh.vertex_count):
        if i in jaw_idx:
            w = rig.anchors["Jaw"].weights[i]
            # default axes: down (+y) maps straight onto mesh +y
            assert moved.vertices[i, 1] == mesh.vertices[i, 1] + w * 0.01
            assert moved.vertices[i, 0] == mesh.vertices[i, 0]
        else:
            # untouched vertices are bit-identical, not merely close
            assert tuple(moved.vertices[i]) == tuple(mesh.vertices[i])


def test_displace_zero_map_is_identity():
    mesh = sample_face()
    rig = sample_rig(mesh)
    out = displace(mesh, rig, {name: (0.0, 0.0, 0.0) for name in rig.anchors})
    assert np.array_equal(out.vertices, mesh.vertices)


def test_displace_overlapping_regions_sum():
    verts = np.zeros((1, 3))
    mesh = Mesh(verts, [])
    rig = sample_rig(sample_face())
    # two anchors sharing vertex 0 with full weight
    anchors = dict(rig.anchors)
    from emotemesh.rig import Anchor, Rig

    new_anchors = {}
    for name, anchor in anchors.items():
        new_anchors[name] = Anchor(name, anchor.rest, {0: 1.0})
    tiny = Rig("one-vertex", new_anchors)
    out = displace(mesh, tiny, {"Jaw": (0.0, 0.0, 0.01), "Nostrils": (0.0, 0.0, 0.02)})
    assert out.vertices[0, 1] == pytest.approx(0.03, abs=1e-15)


def test_displace_unknown_feature_rejected():
    mesh = sample_face()
    rig = sample_rig(mesh)
    with pytest.raises(UnknownLabelError):
        displace(mesh, rig, {"Chin": (0.0, 0.0, 0.01)})


def test_displace_honors_declared_axes():
    mesh = Mesh(np.zeros((1, 3)), [])
    from emotemesh.rig import Anchor, Rig

    anchors = {name: Anchor(name, (0.0, 0.0, 0.0), {0: 1.0}) for name in sample_rig().anchors}
    rig = Rig("m", anchors, Axes(front="+y", right="-x", down="+z"))
    out = displace(mesh, rig, {"Jaw": (1.0, 2.0, 3.0)})
    # front=+y gets z=1, right=-x gets x=2 negated, down=+z gets y=3
    assert tuple(out.vertices[0]) == (-2.0, 1.0, 3.0)


def test_validate_rig_against_mesh_reports_out_of_range():
    mesh = sample_face()
    rig = sample_rig(mesh)
    assert validate_rig_against_mesh(rig, mesh) == []
    small = Mesh(mesh.vertices[:10].copy(), [])
    problems = validate_rig_against_mesh(rig, small)
    assert problems and all("out of range" in p for p in problems)


def test_sample_rig_every_anchor_has_vertices():
    rig = sample_rig()
    for name, anchor in rig.anchors.items():
        assert anchor.weights, name
        assert all(0.0 < w <= 1.0 for w in anchor.weights.values())


def test_sample_face_is_mirror_symmetric():
    mesh = sample_face()
    xs = np.sort(np.round(mesh.vertices[:, 0], 12))
    assert np.allclose(xs + xs[::-1], 0.0, atol=1e-12)
