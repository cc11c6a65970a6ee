"""Capacity values: set monotonicity, grounding equivalence, scaling, profiles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracboundary.capacity import (
    BORDERLINE_BAND,
    capacity_scaling_slope,
    closed_ball_nodes,
    condenser_capacity,
    open_ball_nodes,
    sobolev_capacity,
    wiener_profile,
    zero_capacity_probe,
)
from fracboundary.domains import Lattice, make_comb, make_punctured_ball
from fracboundary.errors import ContractError, DomainError
from fracboundary.kernel import KernelSpec, build_weight_table
from fracboundary.solve import SolveOptions, capacitary_potential


def _table(p=2.0, s=0.4, cells=64, side=4.0):
    lat = Lattice(1, (-side / 2,), side, cells)
    return build_weight_table(KernelSpec(s=s, p=p, dim=1), lat)


def test_ball_node_selectors(lat64):
    closed = closed_ball_nodes(lat64, (0.0,), 0.5)
    opened = open_ball_nodes(lat64, (0.0,), 0.5)
    d = lat64.distances_to((0.0,))
    assert np.all(d[closed] <= 0.5)
    assert np.all(d[opened] < 0.5)
    assert set(opened).issubset(set(closed))


def test_empty_set_capacity_is_zero():
    table = _table()
    res = sobolev_capacity(table, np.array([], dtype=np.intp))
    assert res.value == 0.0 and res.kind == "sobolev"


def test_single_node_positive(table64):
    node = table64.lattice.nearest_node((0.0,))
    res = sobolev_capacity(table64, [node])
    assert res.value > 0.0
    assert res.potential.values[node] == 1.0


def test_measure_lower_bound(table64):
    lat = table64.lattice
    E = closed_ball_nodes(lat, (0.0,), 0.4)
    res = sobolev_capacity(table64, E)
    assert res.value >= lat.h * E.size - 1e-12


@given(r1=st.floats(min_value=0.1, max_value=0.4),
       grow=st.floats(min_value=0.0, max_value=0.4))
@settings(max_examples=15, deadline=None)
def test_sobolev_monotone(r1, grow):
    table = _table()
    lat = table.lattice
    E1 = closed_ball_nodes(lat, (0.0,), r1)
    E2 = closed_ball_nodes(lat, (0.0,), r1 + grow)
    c1 = sobolev_capacity(table, E1, keep_potential=False).value
    c2 = sobolev_capacity(table, E2, keep_potential=False).value
    assert c1 <= c2 + 1e-8


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=15, deadline=None)
def test_sobolev_subadditive(seed):
    table = _table()
    lat = table.lattice
    rng = np.random.default_rng(seed)
    interior = np.arange(4, lat.n_nodes - 4)
    E1 = rng.choice(interior, size=6, replace=False)
    E2 = rng.choice(interior, size=6, replace=False)
    c1 = sobolev_capacity(table, E1, keep_potential=False).value
    c2 = sobolev_capacity(table, E2, keep_potential=False).value
    cu = sobolev_capacity(table, np.union1d(E1, E2), keep_potential=False).value
    assert cu <= c1 + c2 + 1e-8


def test_potential_stays_in_unit_interval(table64):
    lat = table64.lattice
    E = closed_ball_nodes(lat, (0.3,), 0.3)
    res = sobolev_capacity(table64, E)
    u = res.potential.values
    assert u.min() >= -1e-10 and u.max() <= 1.0 + 1e-10


def test_sobolev_rejects_edge_sets(table64):
    with pytest.raises(DomainError):
        sobolev_capacity(table64, [0])
    with pytest.raises(DomainError):
        sobolev_capacity(table64, [10_000])


def test_condenser_monotone_in_both_arguments():
    table = _table(cells=128)
    lat = table.lattice
    K_small = closed_ball_nodes(lat, (0.0,), 0.2)
    K_big = closed_ball_nodes(lat, (0.0,), 0.3)
    om_small = open_ball_nodes(lat, (0.0,), 0.8)
    om_big = open_ball_nodes(lat, (0.0,), 1.2)
    base = condenser_capacity(table, K_small, om_small, keep_potential=False).value
    assert condenser_capacity(table, K_big, om_small, keep_potential=False).value >= base - 1e-10
    assert condenser_capacity(table, K_small, om_big, keep_potential=False).value <= base + 1e-10


@pytest.mark.parametrize("p", [1.5, 2.0])
def test_grounded_window_matches_direct_solve(p):
    # condenser_capacity restricts to a sub-window; capacitary_potential
    # solves on the full box; both describe one discrete problem
    table = _table(p=p, cells=512)
    lat = table.lattice
    mask = make_punctured_ball(lat, (0.0,), 1.0)
    K = closed_ball_nodes(lat, (0.0,), 0.05)
    omega = open_ball_nodes(lat, (0.0,), 0.1)
    fast = condenser_capacity(table, K, omega, SolveOptions(tol=1e-10))
    full = capacitary_potential(table, mask, K, omega, SolveOptions(tol=1e-10))
    assert fast.value == pytest.approx(full.energy, rel=1e-8)
    sub = fast.potential.values
    assert np.max(np.abs(sub - full.solution.values)) < 1e-8


def test_condenser_contract_errors(table64):
    lat = table64.lattice
    K = closed_ball_nodes(lat, (0.0,), 0.3)
    with pytest.raises(ContractError):
        condenser_capacity(table64, K, open_ball_nodes(lat, (0.0,), 0.2))


def test_zero_capacity_probe_point_decays():
    probe = zero_capacity_probe(KernelSpec(s=0.3, p=2.0, dim=1),
                                Lattice(1, (-2.0,), 4.0, 32), "point")
    assert probe.label == "zero-capacity-expected"
    assert probe.hs[0] > probe.hs[1] > probe.hs[2]
    assert probe.values[0] > probe.values[2]  # heading to zero
    assert len(probe.rows) == 3


def test_zero_capacity_probe_labels():
    lat = Lattice(1, (-2.0,), 4.0, 16)
    assert zero_capacity_probe(KernelSpec(s=0.9, p=2.5, dim=1), lat, "point").label \
        == "positive-capacity-expected"
    assert zero_capacity_probe(KernelSpec(s=0.5, p=2.0, dim=1), lat, "point").label \
        == "borderline"
    with pytest.raises(ContractError):
        zero_capacity_probe(KernelSpec(s=0.4, p=2.0, dim=1), lat, "blob")


def test_scaling_slope_1d():
    table = _table(s=0.3, cells=1024)
    res = capacity_scaling_slope(table, (0.0,), [2, 3, 4, 5])
    assert abs(res.slope - res.expected) < 0.1
    assert res.expected == pytest.approx(1.0 - 0.6)
    assert not res.borderline
    assert res.values[0] > res.values[-1]


def test_scaling_slope_contracts():
    table = _table(cells=64)
    with pytest.raises(ContractError):
        capacity_scaling_slope(table, (0.0,), [2, 3])
    with pytest.raises(ContractError):
        capacity_scaling_slope(table, (0.0,), [2, 3, 9])  # below 8h
    borderline = capacity_scaling_slope(
        _table(s=0.5, cells=1024), (0.0,), [2, 3, 4])
    assert borderline.borderline  # sp = 1 = dim


def test_wiener_profile_structure():
    table = _table(cells=256)
    mask = make_punctured_ball(table.lattice, (0.0,), 1.0)
    prof = wiener_profile(table, mask, (0.0,))
    assert prof.converged
    assert list(prof.ks) == sorted(prof.ks)
    assert prof.radii == tuple(2.0 ** -k for k in prof.ks)
    # deepest scale honors the 8h floor
    assert prof.radii[-1] >= 8.0 * table.lattice.h
    sums = np.asarray(prof.partial_sums)
    assert np.all(np.diff(sums) >= -1e-15)
    assert any("unresolved" in f for f in prof.flags)
    assert prof.trend in ("convergent-like", "divergent-like", "inconclusive")


def test_wiener_profile_propagates_mask_flags():
    lat = Lattice(1, (-2.0,), 4.0, 256)
    table = build_weight_table(KernelSpec(s=0.4, p=2.0, dim=1), lat)
    comb = make_comb(lat)  # unverified budgets leave flags
    prof = wiener_profile(table, comb, (0.0,))
    assert any("budget unverified" in f for f in prof.flags)


def test_wiener_profile_domain_errors(table64):
    mask = make_punctured_ball(table64.lattice, (0.0,), 1.0)
    with pytest.raises(DomainError):
        wiener_profile(table64, mask, (9.0,))
