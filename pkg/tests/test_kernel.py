"""Weight table construction checked against independent quadrature."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad, quad

from fracboundary.domains import Lattice
from fracboundary.errors import ConfigError, ContractError, DomainError
from fracboundary.kernel import (
    KernelSpec,
    build_weight_table,
    kernel_eval,
    offset_weight,
    tail_weight,
    tail_weight_1d_closed,
    unit_offset_weight,
    unit_pair_integral,
)


def test_spec_validation():
    with pytest.raises(ConfigError):
        KernelSpec(s=0.0, p=2.0, dim=1)
    with pytest.raises(ConfigError):
        KernelSpec(s=1.0, p=2.0, dim=1)
    with pytest.raises(ConfigError):
        KernelSpec(s=0.5, p=1.0, dim=1)
    with pytest.raises(ConfigError):
        KernelSpec(s=0.5, p=2.0, dim=3)
    with pytest.raises(ConfigError):
        KernelSpec(s=0.5, p=2.0, dim=1, lam=2.0)  # lam without multiplier


def test_kernel_eval_diagonal_rejected():
    spec = KernelSpec(s=0.4, p=2.0, dim=1)
    with pytest.raises(DomainError):
        kernel_eval(spec, [0.3], [0.3])


@pytest.mark.parametrize("sp", [0.3, 0.8, 1.5])
def test_unit_pair_integral_1d_against_dblquad(sp):
    # cells [-1/2, 1/2] and [m - 1/2, m + 1/2], m = 2 (non-touching)
    ours = unit_pair_integral(1, sp, (2,))
    ref, err = dblquad(
        lambda y, x: abs(x - y) ** -(1.0 + sp),
        -0.5, 0.5, lambda x: 1.5, lambda x: 2.5,
        epsabs=1e-12, epsrel=1e-11,
    )
    assert err < 1e-9
    assert ours == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("delta", [(2, 1), (2, 2), (0, 2)])
def test_unit_pair_integral_2d_against_dblquad(delta):
    sp = 0.9
    d1, d2 = delta
    ours = unit_pair_integral(2, sp, delta)

    def integrand(z2, z1):
        hat1 = max(0.0, 1.0 - abs(z1 - d1))
        hat2 = max(0.0, 1.0 - abs(z2 - d2))
        return (z1 * z1 + z2 * z2) ** (-0.5 * (2.0 + sp)) * hat1 * hat2

    ref, err = dblquad(integrand, d1 - 1.0, d1 + 1.0,
                       lambda z1: d2 - 1.0, lambda z1: d2 + 1.0,
                       epsabs=1e-12, epsrel=1e-10)
    assert ours == pytest.approx(ref, rel=1e-7)


def test_touching_cells_diverge_past_critical_order():
    with pytest.raises(ContractError):
        unit_pair_integral(1, 1.2, (1,))
    with pytest.raises(ContractError):
        unit_pair_integral(2, 1.1, (1, 0))
    # corner contact in 2D only diverges once sp reaches 2
    assert unit_pair_integral(2, 1.5, (1, 1)) > 0.0


def test_divergent_offsets_fall_back_to_midpoint():
    assert unit_offset_weight(1, 1.2, (1,)) == 1.0
    assert unit_offset_weight(2, 1.1, (1, 0)) == 1.0


@given(sp=st.floats(min_value=0.15, max_value=0.95))
@settings(max_examples=25, deadline=None)
def test_near_weight_dominates_midpoint_1d(sp):
    # r^{-(1+sp)} is convex along the offset, so cell averaging only helps
    for m in (1, 2):
        assert unit_offset_weight(1, sp, (m,)) >= float(m) ** -(1.0 + sp)


def test_far_field_is_exactly_midpoint():
    sp = 0.8
    assert unit_offset_weight(1, sp, (3,)) == 3.0 ** -(1.0 + sp)
    assert unit_offset_weight(2, sp, (3, 1)) == 10.0 ** (-0.5 * (2.0 + sp))


def test_offset_weight_scaling_in_h():
    spec = KernelSpec(s=0.45, p=2.0, dim=1)
    w1 = offset_weight(spec, 1.0, (2,))
    w2 = offset_weight(spec, 0.5, (2,))
    assert w2 == pytest.approx(0.5 ** (1.0 - spec.sp) * w1, rel=1e-13)
    with pytest.raises(DomainError):
        offset_weight(spec, 0.0, (1,))
    with pytest.raises(DomainError):
        offset_weight(spec, 0.5, (0,))


def test_tail_weight_1d_against_quad():
    sp = 0.7
    lo, hi, x = -2.0, 2.0, 0.37
    closed = tail_weight_1d_closed(sp, lo, hi, np.array([x]))[0]
    right, _ = quad(lambda y: (y - x) ** -(1.0 + sp), hi, np.inf)
    left, _ = quad(lambda y: (x - y) ** -(1.0 + sp), -np.inf, lo)
    assert closed == pytest.approx(right + left, rel=1e-10)


def test_tail_weight_2d_disk_brackets():
    # the box complement sits between two disk complements
    lat = Lattice(2, (-1.0, -1.0), 2.0, 16)
    spec = KernelSpec(s=0.5, p=2.0, dim=2)
    t = tail_weight(spec, lat, (0.0, 0.0))
    sp = spec.sp
    upper = 2.0 * math.pi / sp * 1.0 ** -sp       # inradius 1
    lower = 2.0 * math.pi / sp * math.sqrt(2.0) ** -sp  # circumradius
    assert lower < t < upper


def test_table_scaling_and_tail_storage():
    spec = KernelSpec(s=0.4, p=2.0, dim=1)
    lat = Lattice(1, (-2.0,), 4.0, 128)
    table = build_weight_table(spec, lat)
    h = lat.h
    # radial column carries the physical h scaling
    assert table.offset_weight(5) == pytest.approx(
        h ** (1.0 - spec.sp) * 5.0 ** -(1.0 + spec.sp), rel=1e-12)
    assert table.offset_weight(2) == pytest.approx(
        h ** (1.0 - spec.sp) * unit_pair_integral(1, spec.sp, (2,)), rel=1e-12)
    # stored tails include the cell measure; the public value does not
    node = lat.nearest_node((0.25,))
    x = lat.node_coords()[node]
    assert table.tails[node] == pytest.approx(
        h * tail_weight(spec, lat, x), rel=1e-12)


def test_table_2d_symmetry():
    spec = KernelSpec(s=0.5, p=2.0, dim=2)
    lat = Lattice(2, (-1.0, -1.0), 2.0, 16)
    table = build_weight_table(spec, lat)
    assert table.offset_weight((1, 2)) == table.offset_weight((2, 1))
    assert table.offset_weight((-1, 2)) == table.offset_weight((1, 2))
    # corner nodes carry the heaviest tails
    tails = table.tails.reshape(lat.cells, lat.cells)
    assert tails[0, 0] > tails[lat.cells // 2, lat.cells // 2]


def test_dim_mismatch_rejected():
    spec = KernelSpec(s=0.4, p=2.0, dim=2)
    with pytest.raises(ConfigError):
        build_weight_table(spec, Lattice(1, (-2.0,), 4.0, 32))


def _bump(x, y):
    return 1.5 + 0.5 * np.cos(np.pi * (np.sum(x, axis=-1) + np.sum(y, axis=-1)))


def test_multiplier_table():
    lat = Lattice(1, (-2.0,), 4.0, 64)
    plain = build_weight_table(KernelSpec(s=0.4, p=2.0, dim=1), lat)
    spec = KernelSpec(s=0.4, p=2.0, dim=1, multiplier=_bump, lam=2.0)
    table = build_weight_table(spec, lat)
    assert table.has_multiplier()
    vals = table.multiplier_values(np.array([0, 5]), np.array([5, 0]))
    assert vals[0] == pytest.approx(vals[1])  # symmetric
    flat = table.multiplier_flat()
    assert flat is not None and flat.min() >= 0.5 and flat.max() <= 2.0
    # tails sit inside the ellipticity band around the plain kernel
    ratio = table.tails / plain.tails
    assert ratio.min() > 1.0 - 1e-9 and ratio.max() < 2.0 + 1e-9


def test_multiplier_outside_band_rejected():
    lat = Lattice(1, (-2.0,), 4.0, 16)
    spec = KernelSpec(s=0.4, p=2.0, dim=1,
                      multiplier=lambda x, y: np.full(np.broadcast(x, y).shape[:-1], 3.0),
                      lam=2.0)
    table = build_weight_table(spec, lat)
    with pytest.raises(ConfigError):
        table.multiplier_flat()


def test_offset_bounds_checked(table64):
    with pytest.raises(DomainError):
        table64.offset_weight(0)
    with pytest.raises(DomainError):
        table64.offset_weight(64)
