"""Lattices, masks, gallery domains, and exterior data."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracboundary.domains import (
    FIXED,
    FREE,
    REMOVED,
    DataSpec,
    DomainMask,
    Lattice,
    comb_hole_centers,
    default_comb_jmax,
    dist_cap_data,
    edge_layer,
    make_ball,
    make_comb,
    make_exterior_block,
    make_halfspace_slit,
    make_punctured_ball,
    max_shell_index,
    shell_nodes,
)
from fracboundary.errors import ConfigError, ContractError, DomainError


# --- lattice ---------------------------------------------------------------

def test_lattice_validation():
    with pytest.raises(ConfigError):
        Lattice(1, (-2.0,), 4.0, 48)  # not a power of two
    with pytest.raises(ConfigError):
        Lattice(1, (-2.0,), 4.0, 4)   # too coarse
    with pytest.raises(ConfigError):
        Lattice(1, (-2.0, 0.0), 4.0, 16)
    with pytest.raises(ConfigError):
        Lattice(1, (-2.0,), -1.0, 16)


def test_lattice_geometry(lat64):
    assert lat64.h == 4.0 / 64
    assert lat64.n_nodes == 64
    assert lat64.hi == (2.0,)
    x = lat64.axis_nodes(0)
    assert x[0] == pytest.approx(-2.0 + 0.5 * lat64.h)
    assert x[-1] == pytest.approx(2.0 - 0.5 * lat64.h)
    # nodes sit at cell centers, so 0.0 is a cell boundary, not a node
    assert lat64.is_cell_boundary(0.0)
    assert not lat64.is_cell_boundary(x[3])


def test_nearest_node_round_trip(lat64):
    coords = lat64.node_coords()
    for i in (0, 17, 63):
        assert lat64.nearest_node(coords[i]) == i
    with pytest.raises(DomainError):
        lat64.nearest_node((5.0,))


def test_refine_halves_h(lat64):
    fine = lat64.refine()
    assert fine.cells == 128 and fine.h == lat64.h / 2
    # coarse nodes land midway between fine node pairs
    assert fine.lo == lat64.lo and fine.side == lat64.side


def test_lattice_dict_round_trip(lat64):
    assert Lattice.from_dict(lat64.to_dict()) == lat64


def test_lattice_2d_coords():
    lat = Lattice(2, (-1.0, -1.0), 2.0, 8)
    coords = lat.node_coords()
    assert coords.shape == (64, 2)
    assert lat.nearest_node(coords[37]) == 37
    d = lat.distances_to((0.0, 0.0))
    assert d.min() > 0.0  # center is a cell corner, never a node


# --- masks -----------------------------------------------------------------

def test_mask_invariants_and_rle(lat64):
    mask = make_ball(lat64, (0.0,), 1.0)
    assert mask.name == "ball"
    assert not np.any(mask.free & edge_layer(lat64))
    again = DomainMask.from_dict(mask.to_dict())
    assert np.array_equal(again.status, mask.status)
    assert again.lattice == mask.lattice and again.name == mask.name


def test_mask_rejects_edge_free_nodes(lat64):
    status = np.ones(64, dtype=np.int8)
    status[0] = FREE
    with pytest.raises(DomainError):
        DomainMask(lat64, status)
    with pytest.raises(DomainError):
        DomainMask(lat64, np.ones(64, dtype=np.int8))  # no free nodes


def test_punctured_ball(lat256):
    mask = make_punctured_ball(lat256, (0.0,), 1.0)
    assert int(np.sum(mask.removed)) == 1
    node = int(np.flatnonzero(mask.removed)[0])
    assert node == mask.meta["puncture_node"]
    assert abs(lat256.node_coords()[node, 0]) <= lat256.h / 2
    # free count matches the plain ball minus the puncture
    ball = make_ball(lat256, (0.0,), 1.0)
    assert mask.free.sum() == ball.free.sum() - 1


@given(radius=st.floats(min_value=0.2, max_value=1.0))
@settings(max_examples=20, deadline=None)
def test_ball_margin_honored(radius):
    lat = Lattice(1, (-2.0,), 4.0, 128)
    mask = make_ball(lat, (0.0,), radius)
    x = lat.node_coords()[mask.free_indices, 0]
    assert np.all(np.abs(x) < radius)


def test_ball_needs_margin():
    lat = Lattice(1, (-1.0,), 2.0, 64)
    with pytest.raises(DomainError):
        make_ball(lat, (0.0,), 1.0)  # ball fills the whole box


def test_exterior_block_1d(lat256):
    mask = make_exterior_block(lat256, (0.0,))
    x = lat256.node_coords()[mask.free_indices, 0]
    assert np.all((x > 0.0) & (x < 1.0))
    with pytest.raises(DomainError):
        make_exterior_block(lat256, (lat256.h / 3,))  # off the cell grid


def test_exterior_block_2d():
    lat = Lattice(2, (-2.0, -2.0), 4.0, 64)
    mask = make_exterior_block(lat, (0.0, 0.0))
    coords = lat.node_coords()[mask.free_indices]
    # the closed lower-left quadrant is carved out of the ball
    assert not np.any(np.all(coords <= 0.0, axis=1))
    assert np.all(np.sqrt(np.sum(coords**2, axis=1)) < 1.0)


def test_halfspace_slit():
    lat = Lattice(2, (-2.0, -2.0), 4.0, 32)
    mask = make_halfspace_slit(lat)
    coords = lat.node_coords()[mask.free_indices]
    assert np.all(coords[:, 1] > 0.0)
    with pytest.raises(DomainError):
        make_halfspace_slit(Lattice(1, (-2.0,), 4.0, 32))


# --- comb ------------------------------------------------------------------

def test_comb_hole_centers():
    assert comb_hole_centers(3) == [0.375, 0.1875, 0.09375]


def test_default_comb_jmax(lat256):
    j = default_comb_jmax(lat256)
    assert 0.75 * 2.0 ** -j >= 8.0 * lat256.h
    assert 0.75 * 2.0 ** -(j + 1) < 8.0 * lat256.h


def test_comb_structure(lat256):
    mask = make_comb(lat256)
    assert mask.name == "comb"
    holes = mask.meta["holes"]
    assert len(holes) == mask.meta["jmax"]
    # without a capacity callback teeth stay minimal (a center on a cell
    # boundary ties two nodes) and unverified
    assert all(h["node_count"] in (1, 2) and not h["verified"] for h in holes)
    assert any("budget unverified" in f for f in mask.flags)
    coords = lat256.node_coords()[:, 0]
    for h in holes:
        j = h["j"]
        sel = np.abs(coords - h["center"]) <= (h["radius_cells"] + 0.5) * lat256.h
        tooth = np.flatnonzero(sel & (mask.status == REMOVED))
        assert tooth.size == h["node_count"]
        r = np.abs(coords[tooth])
        assert np.all(r >= 2.0 ** (-j - 1)) and np.all(r <= 2.0 ** -j)


def test_comb_with_greedy_capacity():
    # a callback that always approves makes each tooth fill its cap
    lat = Lattice(1, (-2.0,), 4.0, 512)
    mask = make_comb(lat, capacity_fn=lambda nodes, c, rho: 0.0)
    holes = mask.meta["holes"]
    assert all(h["verified"] for h in holes)
    assert mask.flags == []
    assert holes[0]["node_count"] > 1


def test_comb_with_stingy_capacity(lat256):
    # a callback that always refuses leaves single unverified nodes
    mask = make_comb(lat256, capacity_fn=lambda nodes, c, rho: 1.0)
    assert all(not h["verified"] for h in mask.meta["holes"])
    assert any("budget unverified" in f for f in mask.flags)


def test_comb_too_deep_rejected(lat256):
    with pytest.raises(DomainError):
        make_comb(lat256, jmax=default_comb_jmax(lat256) + 1)


# --- shells ----------------------------------------------------------------

def test_shell_nodes_partition(lat256):
    mask = make_ball(lat256, (0.0,), 1.0)
    seen = []
    for m in range(max_shell_index(lat256) + 1):
        nodes = shell_nodes(mask, (0.0,), m)
        d = lat256.distances_to((0.0,))[nodes]
        assert np.all((d >= 2.0 ** (-m - 1)) & (d < 2.0 ** -m))
        seen.append(nodes)
    allnodes = np.concatenate(seen)
    assert allnodes.size == np.unique(allnodes).size  # disjoint


def test_shell_floor_enforced(lat256):
    mask = make_ball(lat256, (0.0,), 1.0)
    with pytest.raises(ContractError):
        shell_nodes(mask, (0.0,), max_shell_index(lat256) + 1)


def test_max_shell_index():
    lat = Lattice(1, (-2.0,), 4.0, 1024)  # h = 1/256, 4h = 1/64
    assert max_shell_index(lat) == 6


# --- data ------------------------------------------------------------------

def test_dist_cap_data(lat256):
    g = dist_cap_data((0.0,)).evaluate(lat256)
    x = lat256.node_coords()[:, 0]
    assert np.allclose(g, np.minimum(1.0, np.abs(x)))


def test_data_kinds_and_errors(lat256):
    with pytest.raises(ConfigError):
        DataSpec("noise", 0.0)
    with pytest.raises(ConfigError):
        DataSpec("constant", 0.5, {"value": 0.7}).evaluate(lat256)
    with pytest.raises(ConfigError):
        DataSpec("dist_cap", 0.0, {"x0": (0.0,)}).evaluate(lat256)
    # a ramp must flatten to g_inf before the box edge
    wide = DataSpec("ramp", 0.0, {"center": (0.0,), "halfwidth": 3.0, "peak": 1.0})
    with pytest.raises(ConfigError):
        wide.evaluate(lat256)
    ok = DataSpec("ramp", 0.2, {"center": (0.0,), "halfwidth": 1.5, "peak": 0.9})
    g = ok.evaluate(lat256)
    assert g.max() <= 0.9 + 1e-12 and g.min() >= 0.2 - 1e-12
    assert g[0] == pytest.approx(0.2)


def test_custom_data_round_trip(lat64):
    vals = np.zeros(64)
    vals[20:40] = 0.5
    spec = DataSpec("custom", 0.0, {"values": vals})
    again = DataSpec.from_dict(spec.to_dict())
    assert np.allclose(again.evaluate(lat64), vals)
    bad = DataSpec("custom", 0.0, {"values": np.ones(64)})
    with pytest.raises(ConfigError):
        bad.evaluate(lat64)  # edge nodes disagree with g_inf
