"""Discrete nonlocal energy, gradient, pairing, residuals, Tail, Poincare.

The energy of a field u (node values plus a constant far field g_inf) is

    pair_energy = sum over ordered node pairs of  w_ij a_ij |u_i - u_j|^p
    tail_energy = 2 sum_i tail_i |u_i - g_inf|^p

matching a double integral counting both (x, y) and (y, x); pairs with both
points outside the box contribute nothing because the data are constant
there.  The convex objective driving the solver is J = total / p, and
energy_gradient returns dJ/du_i restricted to FREE nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _pairsum
from .domains import DataSpec, DomainMask, Lattice
from .errors import ContractError, DomainError
from .kernel import KernelSpec, WeightTable, _ray_exit_distance

FloatArray = NDArray[np.float64]


@dataclass
class Field:
    """Values at every box node plus the constant far-field value g_inf."""

    lattice: Lattice
    values: FloatArray
    g_inf: float = 0.0

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if self.values.shape != (self.lattice.n_nodes,):
            raise ContractError(
                f"field has {self.values.shape} values for {self.lattice.n_nodes} nodes"
            )
        if not np.all(np.isfinite(self.values)) or not math.isfinite(self.g_inf):
            raise ContractError("field values and far field must be finite")

    @classmethod
    def from_data(cls, lattice: Lattice, data: DataSpec) -> "Field":
        return cls(lattice=lattice, values=data.evaluate(lattice), g_inf=data.g_inf)

    @classmethod
    def constant(cls, lattice: Lattice, c: float) -> "Field":
        return cls(lattice=lattice, values=np.full(lattice.n_nodes, float(c)), g_inf=float(c))

    def copy(self) -> "Field":
        return Field(self.lattice, self.values.copy(), self.g_inf)

    def clipped(self, lo: float, hi: float) -> "Field":
        """Pointwise truncation min(max(u, lo), hi); far field clipped too."""
        return Field(self.lattice, np.clip(self.values, lo, hi),
                     float(min(max(self.g_inf, lo), hi)))


@dataclass(frozen=True)
class EnergyBreakdown:
    pair_energy: float
    tail_energy: float
    lp_term: float
    total: float


def _check_compatible(table: WeightTable, u: Field, mask: DomainMask | None = None) -> None:
    if u.lattice != table.lattice:
        raise ContractError("field lattice does not match the weight table")
    if mask is not None and mask.lattice != table.lattice:
        raise ContractError("mask lattice does not match the weight table")


def energy_total(table: WeightTable, mask: DomainMask, u: Field,
                 include_lp: bool = False) -> EnergyBreakdown:
    """Pair + tail (+ optional h^dim L^p mass) energy of a field."""
    _check_compatible(table, u, mask)
    if include_lp and u.g_inf != 0.0:
        raise ContractError("the L^p mass term requires far field 0")
    lat = table.lattice
    p = table.spec.p
    pair = 2.0 * _pairsum.pair_energy(
        u.values, table.radial, lat.cells, lat.dim, p, table.multiplier_flat()
    )
    diff = np.abs(u.values - u.g_inf)
    tail = 2.0 * float(np.dot(table.tails, diff**p))
    lp = float(lat.h**lat.dim * np.sum(np.abs(u.values) ** p)) if include_lp else 0.0
    return EnergyBreakdown(pair_energy=pair, tail_energy=tail, lp_term=lp,
                           total=pair + tail + lp)


def full_gradient(table: WeightTable, u: Field) -> FloatArray:
    """dJ/du_i at every box node, J = (pair_energy + tail_energy)/p:
    2 sum_j w a phi_p(u_i - u_j) + 2 tail_i phi_p(u_i - g_inf)."""
    _check_compatible(table, u)
    lat = table.lattice
    p = table.spec.p
    g = _pairsum.pair_gradient(
        u.values, table.radial, lat.cells, lat.dim, p, table.multiplier_flat()
    )
    g += 2.0 * table.tails * _pairsum.signed_power(u.values - u.g_inf, p)
    return g


def energy_gradient(table: WeightTable, mask: DomainMask, u: Field) -> FloatArray:
    """Gradient of J restricted to FREE nodes, in free_indices order."""
    _check_compatible(table, u, mask)
    return full_gradient(table, u)[mask.free_indices]


def pairing(table: WeightTable, mask: DomainMask, u: Field, phi: Field) -> float:
    """The form E(u, phi) = sum w a phi_p(u_i-u_j)(phi_i-phi_j) + tail part.

    phi must vanish on all constrained nodes and at the far field; then the
    sum telescopes to <full_gradient(u), phi>.
    """
    _check_compatible(table, u, mask)
    if phi.lattice != table.lattice:
        raise ContractError("test-function lattice does not match the weight table")
    if phi.g_inf != 0.0:
        raise ContractError("test function must have far field 0")
    constrained = mask.status != 0
    if np.any(phi.values[constrained] != 0.0):
        raise ContractError("test function must vanish on constrained nodes")
    return float(np.dot(full_gradient(table, u), phi.values))


def residual_at_node(table: WeightTable, mask: DomainMask, u: Field, node: int) -> float:
    """Gradient component at one node regardless of its status (O(N))."""
    _check_compatible(table, u, mask)
    lat = table.lattice
    n = lat.n_nodes
    if not (0 <= node < n):
        raise ContractError(f"node {node} outside box of {n} nodes")
    p = table.spec.p
    if lat.dim == 1:
        w = table.radial[np.abs(np.arange(n) - node)]
    else:
        M = lat.cells
        ix, iy = divmod(node, M)
        jx, jy = np.divmod(np.arange(n), M)
        w = table.radial[np.abs(jx - ix), np.abs(jy - iy)]
    if table.has_multiplier():
        w = w * table.multiplier_values(np.full(n, node), np.arange(n))
    s = float(np.dot(w, _pairsum.signed_power(u.values[node] - u.values, p)))
    tail = table.tails[node] * _pairsum.signed_power(
        np.asarray(u.values[node] - u.g_inf), p
    )
    return 2.0 * s + 2.0 * float(tail)


def box_exterior_radial_tail(lattice: Lattice, x0, sp: float, floor: float = 0.0) -> float:
    """int over { y outside box, |y - x0| >= floor } of |y - x0|^{-(dim+sp)} dy
    for a point x0 inside the box (plain radial kernel, no multiplier)."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    lo = np.asarray(lattice.lo)
    hi = np.asarray(lattice.hi)
    if np.any(x0 <= lo) or np.any(x0 >= hi):
        raise DomainError(f"point {x0.tolist()} is not interior to the box")
    if lattice.dim == 1:
        d_right = max(hi[0] - x0[0], floor)
        d_left = max(x0[0] - lo[0], floor)
        return (d_right**-sp + d_left**-sp) / sp
    corners = [(lo[0], lo[1]), (lo[0], hi[1]), (hi[0], lo[1]), (hi[0], hi[1])]
    ang = sorted(math.atan2(c[1] - x0[1], c[0] - x0[0]) % (2.0 * math.pi) for c in corners)
    arcs = ang + [ang[0] + 2.0 * math.pi]
    pt = x0.reshape(1, 2)

    def evaluate(q: int) -> float:
        t, wts = np.polynomial.legendre.leggauss(q)
        total = 0.0
        for a in range(4):
            half = 0.5 * (arcs[a + 1] - arcs[a])
            mid = 0.5 * (arcs[a + 1] + arcs[a])
            theta = mid + half * t
            rho = _ray_exit_distance(lo, hi, pt, theta[None, :])[0]
            rho = np.maximum(rho, floor)
            total += float(np.sum(rho**-sp * wts)) * half / sp
        return total

    q = 64
    prev = evaluate(q)
    for _ in range(3):
        q *= 2
        cur = evaluate(q)
        if abs(cur - prev) <= 1e-10 * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev


def tail_quantity(kernel: KernelSpec, u: Field, x0, r: float) -> float:
    """Nonlocal tail ( r^{sp} int_{|y-x0|>=r} |u|^{p-1} |y-x0|^{-(dim+sp)} )^{1/(p-1)}
    discretized over box nodes, with the exact far-field term at |u| = |g_inf|."""
    if r <= 0.0:
        raise DomainError(f"tail radius must be positive, got {r}")
    lat = u.lattice
    if kernel.dim != lat.dim:
        raise ContractError("kernel dim does not match the field lattice")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    sp = kernel.sp
    p = kernel.p
    dist = lat.distances_to(x0)
    sel = dist >= r
    near = float(np.sum(np.abs(u.values[sel]) ** (p - 1.0) * dist[sel] ** -(lat.dim + sp)))
    near *= lat.h**lat.dim
    far = abs(u.g_inf) ** (p - 1.0) * box_exterior_radial_tail(lat, x0, sp, floor=r)
    return float((r**sp * (near + far)) ** (1.0 / (p - 1.0)))


def _free_diameter(mask: DomainMask) -> float:
    coords = mask.lattice.node_coords()[mask.free_indices]
    if coords.shape[0] <= 1:
        return 0.0
    if mask.lattice.dim == 1:
        return float(coords[:, 0].max() - coords[:, 0].min())
    if coords.shape[0] > 8:
        from scipy.spatial import ConvexHull

        try:
            coords = coords[ConvexHull(coords).vertices]
        except Exception:  # collinear free sets etc.
            pass
    d2 = np.sum((coords[:, None, :] - coords[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))


def poincare_ratio(table: WeightTable, mask: DomainMask, u: Field) -> float:
    """(h^dim sum |u_i|^p) / ((1 + diam^{sp}) (pair + tail)); diagnostic."""
    _check_compatible(table, u, mask)
    if u.g_inf != 0.0:
        raise ContractError("the Poincare diagnostic requires far field 0")
    constrained = mask.status != 0
    if np.any(u.values[constrained] != 0.0):
        raise ContractError("the Poincare diagnostic requires u = 0 on constrained nodes")
    if not np.any(u.values != 0.0):
        return 0.0
    br = energy_total(table, mask, u, include_lp=True)
    diam = _free_diameter(mask)
    denom = (1.0 + diam**table.spec.sp) * (br.pair_energy + br.tail_energy)
    return br.lp_term / denom
