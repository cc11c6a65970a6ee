"""Energy, gradient, pairing, and tail quantities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracboundary.domains import DataSpec, Lattice, make_ball
from fracboundary.energy import (
    Field,
    box_exterior_radial_tail,
    energy_gradient,
    energy_total,
    full_gradient,
    pairing,
    poincare_ratio,
    residual_at_node,
    tail_quantity,
)
from fracboundary.errors import ContractError, DomainError
from fracboundary.kernel import KernelSpec, build_weight_table


def _random_field(lat, rng, g_inf=0.0):
    return Field(lat, rng.uniform(-1.0, 1.0, lat.n_nodes), g_inf)


def test_field_validation(lat64):
    with pytest.raises(ContractError):
        Field(lat64, np.zeros(10))
    with pytest.raises(ContractError):
        Field(lat64, np.full(64, np.nan))
    f = Field.constant(lat64, 0.3).clipped(0.0, 0.2)
    assert f.values.max() == 0.2 and f.g_inf == 0.2


def test_constant_field_has_zero_energy(table64, lat64):
    mask = make_ball(lat64, (0.0,), 1.0)
    br = energy_total(table64, mask, Field.constant(lat64, 0.7))
    assert br.pair_energy == 0.0 and br.tail_energy == 0.0 and br.total == 0.0


def test_energy_positive_otherwise(table64, lat64, rng):
    mask = make_ball(lat64, (0.0,), 1.0)
    br = energy_total(table64, mask, _random_field(lat64, rng))
    assert br.pair_energy > 0.0 and br.tail_energy > 0.0
    assert br.total == pytest.approx(br.pair_energy + br.tail_energy)


def test_lp_term_needs_zero_far_field(table64, lat64):
    mask = make_ball(lat64, (0.0,), 1.0)
    with pytest.raises(ContractError):
        energy_total(table64, mask, Field.constant(lat64, 1.0), include_lp=True)
    br = energy_total(table64, mask, Field(lat64, np.ones(64), 0.0), include_lp=True)
    assert br.lp_term == pytest.approx(lat64.h * 64)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_gradient_matches_finite_differences(p, rng):
    lat = Lattice(1, (-2.0,), 4.0, 32)
    table = build_weight_table(KernelSpec(s=0.4, p=p, dim=1), lat)
    mask = make_ball(lat, (0.0,), 1.0)
    u = _random_field(lat, rng, g_inf=0.2)

    def J(vals):
        br = energy_total(table, mask, Field(lat, vals, 0.2))
        return br.total / p

    g = energy_gradient(table, mask, u)
    eps = 1e-6
    for k, node in enumerate(mask.free_indices):
        vp = u.values.copy(); vp[node] += eps
        vm = u.values.copy(); vm[node] -= eps
        fd = (J(vp) - J(vm)) / (2 * eps)
        assert g[k] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_pairing_telescopes_to_gradient(table64, lat64, rng):
    mask = make_ball(lat64, (0.0,), 1.0)
    u = _random_field(lat64, rng, g_inf=0.1)
    phi_vals = np.zeros(64)
    phi_vals[mask.free_indices] = rng.uniform(-1.0, 1.0, mask.free_indices.size)
    phi = Field(lat64, phi_vals, 0.0)
    lhs = pairing(table64, mask, u, phi)
    rhs = float(np.dot(full_gradient(table64, u), phi_vals))
    assert lhs == pytest.approx(rhs, rel=1e-12)
    with pytest.raises(ContractError):
        pairing(table64, mask, u, Field(lat64, np.ones(64), 0.0))


def test_residual_at_node_matches_gradient(table64, lat64, rng):
    mask = make_ball(lat64, (0.0,), 1.0)
    u = _random_field(lat64, rng)
    g = energy_gradient(table64, mask, u)
    for k in (0, 3, len(g) - 1):
        node = int(mask.free_indices[k])
        assert residual_at_node(table64, mask, u, node) == pytest.approx(g[k], rel=1e-12)
    with pytest.raises(ContractError):
        residual_at_node(table64, mask, u, 64)


def test_box_exterior_radial_tail_1d(lat64):
    # closed form: ((hi-x)^-sp + (x-lo)^-sp)/sp
    val = box_exterior_radial_tail(lat64, (0.5,), 0.8)
    assert val == pytest.approx((1.5 ** -0.8 + 2.5 ** -0.8) / 0.8, rel=1e-12)
    # the floor clips distances from below
    clipped = box_exterior_radial_tail(lat64, (0.5,), 0.8, floor=2.0)
    assert clipped == pytest.approx((2.0 ** -0.8 + 2.5 ** -0.8) / 0.8, rel=1e-12)
    with pytest.raises(DomainError):
        box_exterior_radial_tail(lat64, (3.0,), 0.8)


def test_box_exterior_radial_tail_2d_brackets():
    lat = Lattice(2, (-1.0, -1.0), 2.0, 16)
    sp = 0.9
    val = box_exterior_radial_tail(lat, (0.0, 0.0), sp)
    assert 2 * np.pi / sp * np.sqrt(2.0) ** -sp < val < 2 * np.pi / sp


@given(c=st.floats(min_value=0.1, max_value=3.0))
@settings(max_examples=20, deadline=None)
def test_tail_quantity_homogeneous(c):
    lat = Lattice(1, (-2.0,), 4.0, 64)
    spec = KernelSpec(s=0.4, p=2.5, dim=1)
    base = Field(lat, np.abs(np.sin(np.arange(64.0))), 0.5)
    scaled = Field(lat, c * base.values, c * 0.5)
    t1 = tail_quantity(spec, base, (0.0,), 0.5)
    t2 = tail_quantity(spec, scaled, (0.0,), 0.5)
    assert t2 == pytest.approx(c * t1, rel=1e-9)


def test_tail_quantity_validation(lat64):
    spec = KernelSpec(s=0.4, p=2.0, dim=1)
    u = Field.constant(lat64, 1.0)
    with pytest.raises(DomainError):
        tail_quantity(spec, u, (0.0,), 0.0)
    t = tail_quantity(spec, u, (0.0,), 0.25)
    # for u == 1 the 1D tail integral is exact: r^sp * 2 r^-sp / sp = 2/sp
    # up to the node-sum vs integral gap inside the box
    assert t == pytest.approx((2.0 / spec.sp) ** (1.0 / (spec.p - 1.0)), rel=0.05)


def test_poincare_ratio_diagnostic(table64, lat64):
    mask = make_ball(lat64, (0.0,), 1.0)
    vals = np.zeros(64)
    vals[mask.free_indices] = 1.0
    ratio = poincare_ratio(table64, mask, Field(lat64, vals, 0.0))
    assert 0.0 < ratio < 1.0
    assert poincare_ratio(table64, mask, Field(lat64, np.zeros(64), 0.0)) == 0.0
    with pytest.raises(ContractError):
        poincare_ratio(table64, mask, Field(lat64, np.ones(64), 0.0))
