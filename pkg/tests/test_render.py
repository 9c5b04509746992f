import xml.etree.ElementTree as ET

import numpy as np
from hypothesis import given, settings, strategies as st

from rhizome.channelgates import builtin_layout, evaluate_layout
from rhizome.field import Terrain
from rhizome.geomtasks.voronoi import approximate_voronoi
from rhizome.grower import RootNetwork
from rhizome.render import PALETTE, render_polygons, render_svg

SVG = "{http://www.w3.org/2000/svg}"


def parse(doc):
    root = ET.fromstring(doc.encode())
    assert root.tag == SVG + "svg"
    return root


def by_id(root):
    return {el.get("id"): el for el in root.iter() if el.get("id")}


def network(trails):
    n = len(trails)
    return RootNetwork([np.asarray(t, dtype=float).reshape(-1, 2) for t in trails],
                       list(range(n)), [None] * n, [None] * n, ["stopped"] * n)


def test_empty_network_is_valid_with_notice():
    root = parse(render_svg(network([])))
    assert not list(root.iter(SVG + "path"))
    assert "notice" in by_id(root)


def test_network_one_path_per_root():
    net = network([[(1, 1), (5, 1), (5, 4)], [(2, 2)]])
    ids = by_id(parse(render_svg(net)))
    assert ids["root-0"].get("d") == "M1 1L5 1L5 4"
    assert "root-1" in ids


def test_network_over_terrain_shows_obstacles():
    ob = np.zeros((6, 8), dtype=bool)
    ob[2, 3:6] = True
    ids = by_id(parse(render_svg(network([[(0, 0), (7, 0)]]), terrain=Terrain(8, 6, obstacle=ob))))
    assert ids["obstacles"].get("d") == "M2.5 1.5h3v1h-3z"


def test_two_seed_voronoi_structure():
    lab = approximate_voronoi([(5, 10), (30, 10)], Terrain(40, 20))
    root = parse(render_svg(lab))
    ids = by_id(root)
    regions = sorted(k for k in ids if k.startswith("region-"))
    assert regions == ["region-0", "region-1"]
    assert ids["region-0"].get("fill") == PALETTE[0]
    assert ids["region-1"].get("fill") == PALETTE[1]
    assert ids["boundary"].get("fill") == "none"
    assert len(list(root.iter(SVG + "path"))) == 3


def test_rendering_is_byte_identical():
    lab = approximate_voronoi([(3, 3), (12, 9), (20, 4)], Terrain(24, 16))
    assert render_svg(lab) == render_svg(lab)
    layout = builtin_layout("half_adder")
    res = evaluate_layout(layout, {"x": True, "y": False})
    assert render_svg(layout, res) == render_svg(layout, res)


def test_layout_graph_annotations():
    layout = builtin_layout("humidity")
    res = evaluate_layout(layout, {"x": True, "y": True})
    root = parse(render_svg(layout, res))
    ids = by_id(root)
    for name in layout.channels:
        assert f"channel-{name}" in ids
    for j in layout.junctions:
        assert f"junction-{j}" in ids
    texts = [t.text for t in root.iter(SVG + "text")]
    assert "p=0" in texts and "q=1" in texts
    taken = {c for _t, c, _r in res.occupancy}
    for name in layout.channels:
        stroke = ids[f"channel-{name}"].get("stroke")
        assert (stroke == "#c62828") == (name in taken)


def test_layout_without_result():
    root = parse(render_svg(builtin_layout("gravity")))
    texts = [t.text for t in root.iter(SVG + "text")]
    assert "p" in texts and "q" in texts


def test_polygons_and_empty_polygons():
    root = parse(render_polygons([[(0, 0), (1, 0), (0, 1)]], [(0.2, 0.2)]))
    ids = by_id(root)
    assert "polygon-0" in ids and "point-0" in ids
    assert "notice" in by_id(parse(render_polygons([])))


def test_unknown_artifact():
    import pytest
    with pytest.raises(TypeError):
        render_svg(object())


coord = st.floats(0, 50, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.tuples(coord, coord), min_size=1, max_size=6), max_size=5))
def test_random_networks_render_deterministically(trails):
    net = network(trails)
    doc = render_svg(net)
    assert doc == render_svg(net)
    root = parse(doc)
    paths = [el.get("id") for el in root.iter(SVG + "path")]
    assert paths == [f"root-{k}" for k in range(len(trails))]
