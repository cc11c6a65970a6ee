"""Discrete capacities and the dyadic Wiener-criterion profile.

Two capacities coexist here.  The Sobolev variant penalizes the field's own
mass (pair + tail + h^dim sum |u|^p, u = 1 on the set, far field zero) and
needs no surrounding open set.  The condenser variant grounds the field
outside a prescribed open node set instead of adding mass.  Both are energies
of constrained minimizers, so every result can carry its potential.

Condenser problems ground the field to zero outside Omega_c, which lets the
minimization restrict exactly to an aligned sub-window: pair interactions
with the grounded exterior depend on the free values only through row sums,
and those fold into the per-node tail weights without approximation.  The
restriction is a pure speedup; it changes no computed value beyond solver
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _pairsum
from .domains import DomainMask, Lattice, edge_layer
from .energy import Field
from .errors import ContractError, DomainError
from .kernel import KernelSpec, WeightTable, build_weight_table
from .solve import (SolveOptions, _conv_apply, _symmetric_kernel,
                    solve_constrained)

FloatArray = NDArray[np.floating]
IntArray = NDArray[np.integer]

LN2 = math.log(2.0)

# trend heuristic thresholds; finitely many scales cannot certify divergence,
# so these are reported as labels, never as facts
DIVERGENT_FLOOR = 0.01
DECAY_FACTOR = 2.0
BORDERLINE_BAND = 0.1

__all__ = [
    "CapacityResult",
    "ProbeResult",
    "ScalingSlope",
    "WienerProfile",
    "capacity_scaling_slope",
    "closed_ball_nodes",
    "condenser_capacity",
    "open_ball_nodes",
    "sobolev_capacity",
    "wiener_profile",
    "zero_capacity_probe",
]


# ---------------------------------------------------------------------------
# result types

@dataclass(frozen=True)
class CapacityResult:
    """One capacity value with enough context to audit it."""

    kind: str  # "sobolev" or "condenser"
    descriptor: str
    value: float
    h: float
    potential: Field | None = None
    converged: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("sobolev", "condenser"):
            raise ContractError(f"unknown capacity kind {self.kind!r}")
        if not (self.value >= 0.0) or not math.isfinite(self.value):
            raise ContractError(f"capacity value must be finite and >= 0, got {self.value}")


@dataclass(frozen=True)
class ScalingSlope:
    """Least-squares slope of log2 c_k against -k over dyadic radii."""

    slope: float
    expected: float  # dim - sp
    borderline: bool  # |dim - sp| below the labeling band
    ks: tuple[int, ...]
    radii: tuple[float, ...]
    values: tuple[float, ...]

    def __float__(self) -> float:
        return self.slope


@dataclass(frozen=True)
class ProbeResult:
    """Capacity of one shape across three dyadic grid refinements."""

    shape: str
    sp: float
    threshold: float  # codimension: dim for a point, 1 for a hyperplane slice
    label: str  # zero-capacity-expected | positive-capacity-expected | borderline
    hs: tuple[float, ...]
    values: tuple[float, ...]

    @property
    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.hs, self.values))


@dataclass(frozen=True)
class WienerProfile:
    """Dyadic discretization of the boundary-regularity integral at x0.

    c_k is the condenser capacity of the complement piece in the closed ball
    of radius rho_k = 2^-k relative to the ball of twice the radius, and
    I_k = (c_k / rho_k^{dim-sp})^{1/(p-1)} ln 2 is the integrand sample.
    The trend label is a finite-scale heuristic, not a convergence proof.
    """

    x0: tuple[float, ...]
    ks: tuple[int, ...]
    radii: tuple[float, ...]
    c: tuple[float, ...]
    integrand: tuple[float, ...]
    partial_sums: tuple[float, ...]
    trend: str
    converged: bool = True
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.ks)
        if not (len(self.radii) == len(self.c) == len(self.integrand)
                == len(self.partial_sums) == n):
            raise ContractError("profile columns have mismatched lengths")
        if any(v < 0.0 for v in self.integrand):
            raise ContractError("integrand samples must be nonnegative")
        if any(b < a - 1e-15 for a, b in zip(self.partial_sums, self.partial_sums[1:])):
            raise ContractError("partial sums must be nondecreasing")

    @property
    def rows(self) -> list[tuple[int, float, float, float, float]]:
        """(k, rho, c_k, I_k, S_k) per scale, deepest last."""
        return list(zip(self.ks, self.radii, self.c, self.integrand,
                        self.partial_sums))


# ---------------------------------------------------------------------------
# node-set helpers

def closed_ball_nodes(lattice: Lattice, x0, r: float) -> IntArray:
    """Indices of nodes with |x - x0| <= r."""
    return np.flatnonzero(lattice.distances_to(x0) <= r).astype(np.intp)


def open_ball_nodes(lattice: Lattice, x0, r: float) -> IntArray:
    """Indices of nodes with |x - x0| < r."""
    return np.flatnonzero(lattice.distances_to(x0) < r).astype(np.intp)


def _inside_box(lattice: Lattice, x0) -> bool:
    pt = np.asarray(x0, dtype=float)
    if pt.shape != (lattice.dim,):
        return False
    lo = np.asarray(lattice.lo)
    return bool(np.all(pt > lo) and np.all(pt < lo + lattice.side))


# ---------------------------------------------------------------------------
# exact window restriction for grounded (condenser) problems

def _axis_indices(lattice: Lattice, flat: IntArray) -> tuple[IntArray, ...]:
    if lattice.dim == 1:
        return (flat,)
    return tuple(np.divmod(flat, lattice.cells))


def _rowsums_fft(table: WeightTable) -> FloatArray:
    kern = _symmetric_kernel(table)
    lat = table.lattice
    return _conv_apply(kern, np.ones(lat.n_nodes), lat.cells, lat.dim)


def _restrict_grounded(table: WeightTable, omega: IntArray):
    """Build the exact sub-window problem for a field grounded outside
    `omega`.  Returns (sub_table, parent_flat_of_sub_nodes) or None when no
    window smaller than the full lattice covers omega with one spare node.

    Exactness: for any p the grounded exterior contributes
    2 * sum_i |u_i|^p * (row sum of weights from i to outside the window),
    which is absorbed into the window tails via full-grid and in-window row
    sums.  Multiplier kernels are not translation invariant in their row
    sums, so they skip the restriction.
    """
    lat = table.lattice
    if table.has_multiplier() or omega.size == 0:
        return None
    M = lat.cells
    axes = _axis_indices(lat, omega)
    lo_idx = [int(ax.min()) for ax in axes]
    hi_idx = [int(ax.max()) for ax in axes]
    span = max(hi - lo + 3 for lo, hi in zip(lo_idx, hi_idx))
    G = 8
    while G < span:
        G *= 2
    if G >= M:
        return None
    start = []
    for lo, hi in zip(lo_idx, hi_idx):
        s = (lo + hi + 1 - G) // 2
        s = min(max(s, 0), M - G)
        if lo - s < 1 or hi - s > G - 2:  # window must keep a spare layer
            return None
        start.append(s)

    h = lat.h
    sub_lat = Lattice(lat.dim, tuple(lat.lo[a] + start[a] * h for a in range(lat.dim)),
                      G * h, G)
    if lat.dim == 1:
        radial_sub = table.radial[:G].copy()
        sel = np.arange(G, dtype=np.intp) + start[0]
    else:
        radial_sub = table.radial[:G, :G].copy()
        ix = np.arange(G, dtype=np.intp) + start[0]
        iy = np.arange(G, dtype=np.intp) + start[1]
        sel = (ix[:, None] * M + iy[None, :]).reshape(-1)

    s_parent = _rowsums_fft(table)[sel]
    sub_table = WeightTable(spec=table.spec, lattice=sub_lat, radial=radial_sub,
                            tails=np.zeros(sel.size), near_radius=table.near_radius)
    s_sub = _rowsums_fft(sub_table)
    sub_table.tails = table.tails[sel] + (s_parent - s_sub)
    return sub_table, sel


def _grounded_minimize(table: WeightTable, K: IntArray, omega: IntArray,
                       opts: SolveOptions | None, keep_potential: bool):
    """Shared engine: minimize the energy with u = 1 on K, grounded outside
    omega.  Returns (value, Field|None, converged)."""
    lat = table.lattice
    if K.size == 0:
        pot = Field(lat, np.zeros(lat.n_nodes), 0.0) if keep_potential else None
        return 0.0, pot, True
    if np.any(K < 0) or np.any(K >= lat.n_nodes) \
            or np.any(omega < 0) or np.any(omega >= lat.n_nodes):
        raise DomainError("condenser node sets leave the box")
    if not np.all(np.isin(K, omega)):
        raise ContractError("the compact set K must sit inside omega_c")
    free = np.setdiff1d(omega, K)
    if np.intersect1d(free, np.flatnonzero(edge_layer(lat))).size:
        raise DomainError("omega_c touches the outermost node layer")

    restricted = _restrict_grounded(table, omega)
    if restricted is None:
        values = np.zeros(lat.n_nodes)
        values[K] = 1.0
        rep = solve_constrained(table, free, values, 0.0, opts)
        pot = rep.solution if keep_potential else None
        return float(rep.energy), pot, rep.converged

    sub_table, sel = restricted
    pos = np.full(lat.n_nodes, -1, dtype=np.intp)
    pos[sel] = np.arange(sel.size, dtype=np.intp)
    K_s, free_s = pos[K], pos[free]
    values = np.zeros(sel.size)
    values[K_s] = 1.0
    rep = solve_constrained(sub_table, free_s, values, 0.0, opts)
    pot = None
    if keep_potential:
        full = np.zeros(lat.n_nodes)
        full[sel] = rep.solution.values
        pot = Field(lat, full, 0.0)
    return float(rep.energy), pot, rep.converged


# ---------------------------------------------------------------------------
# the two capacities

def condenser_capacity(table: WeightTable, K, omega_c,
                       opts: SolveOptions | None = None,
                       keep_potential: bool = True) -> CapacityResult:
    """Energy of the capacitary potential: u = 1 on K, grounded outside the
    open node set omega_c (far field included).  Monotone up in K, down in
    omega_c, by admissible-set inclusion."""
    K = np.unique(np.asarray(K, dtype=np.intp).reshape(-1))
    omega = np.unique(np.asarray(omega_c, dtype=np.intp).reshape(-1))
    value, pot, ok = _grounded_minimize(table, K, omega, opts, keep_potential)
    desc = f"K: {K.size} nodes, omega_c: {omega.size} nodes"
    return CapacityResult(kind="condenser", descriptor=desc, value=value,
                          h=table.h, potential=pot, converged=ok)


def sobolev_capacity(table: WeightTable, E,
                     opts: SolveOptions | None = None,
                     keep_potential: bool = True) -> CapacityResult:
    """Minimum of pair + tail + h^dim sum |u_i|^p over fields with u = 1 on
    E and zero far field.  Every node outside E is free; the mass term keeps
    the minimizer from spreading."""
    lat = table.lattice
    E = np.unique(np.asarray(E, dtype=np.intp).reshape(-1))
    if E.size == 0:
        pot = Field(lat, np.zeros(lat.n_nodes), 0.0) if keep_potential else None
        return CapacityResult(kind="sobolev", descriptor="E: 0 nodes", value=0.0,
                              h=table.h, potential=pot)
    if np.any(E < 0) or np.any(E >= lat.n_nodes):
        raise DomainError("the probed set leaves the box")
    if np.intersect1d(E, np.flatnonzero(edge_layer(lat))).size:
        raise DomainError("the probed set touches the outermost node layer")
    free = np.setdiff1d(np.arange(lat.n_nodes, dtype=np.intp), E)
    values = np.zeros(lat.n_nodes)
    values[E] = 1.0
    rep = solve_constrained(table, free, values, 0.0, opts,
                            lp_mass=table.h ** lat.dim)
    return CapacityResult(kind="sobolev", descriptor=f"E: {E.size} nodes",
                          value=float(rep.energy), h=table.h,
                          potential=rep.solution if keep_potential else None,
                          converged=rep.converged)


# ---------------------------------------------------------------------------
# refinement probe for zero-capacity shapes

def _probe_nodes(lattice: Lattice, shape: str) -> IntArray:
    center = tuple(lo + 0.5 * lattice.side for lo in lattice.lo)
    if shape == "point":
        return np.array([int(np.argmin(lattice.distances_to(center)))],
                        dtype=np.intp)
    if shape == "hyperplane-slice":
        if lattice.dim != 2:
            raise ContractError("hyperplane-slice needs a 2D lattice")
        coords = lattice.node_coords()
        dy = np.abs(coords[:, 1] - center[1])
        row = np.flatnonzero(np.isclose(dy, dy.min()))
        keep = np.abs(coords[row, 0] - center[0]) <= lattice.side / 8.0
        return row[keep].astype(np.intp)
    raise ContractError(f"unknown probe shape {shape!r}")


def zero_capacity_probe(kernel: KernelSpec, lattice: Lattice, shape: str,
                        opts: SolveOptions | None = None) -> ProbeResult:
    """Sobolev capacity of a canonical shape at the box center across grids
    h, h/2, h/4.  A vanishing continuum capacity shows up as decay toward
    zero; a positive one as a floor.  Near the critical order sp the decay
    is logarithmic and the probe only labels, never asserts."""
    threshold = float(lattice.dim) if shape == "point" else 1.0
    if shape not in ("point", "hyperplane-slice"):
        raise ContractError(f"unknown probe shape {shape!r}")
    sp = kernel.s * kernel.p
    if sp < threshold - BORDERLINE_BAND:
        label = "zero-capacity-expected"
    elif sp > threshold + BORDERLINE_BAND:
        label = "positive-capacity-expected"
    else:
        label = "borderline"

    hs: list[float] = []
    values: list[float] = []
    lat = lattice
    for _ in range(3):
        table = build_weight_table(kernel, lat)
        res = sobolev_capacity(table, _probe_nodes(lat, shape), opts,
                               keep_potential=False)
        hs.append(lat.h)
        values.append(res.value)
        lat = lat.refine()
    return ProbeResult(shape=shape, sp=sp, threshold=threshold, label=label,
                       hs=tuple(hs), values=tuple(values))


# ---------------------------------------------------------------------------
# dyadic condenser scaling

def _dyadic_condenser(table: WeightTable, x0, k: int,
                      opts: SolveOptions | None) -> float:
    """c_k at scale rho = 2^-k: the full closed rho-ball grounded outside
    the open 2 rho ball."""
    lat = table.lattice
    rho = 2.0 ** (-k)
    inner = closed_ball_nodes(lat, x0, rho)
    omega = open_ball_nodes(lat, x0, 2.0 * rho)
    res = condenser_capacity(table, inner, omega, opts, keep_potential=False)
    if not res.converged:
        raise ContractError(f"condenser solve at scale 2^-{k} did not converge")
    return res.value


def capacity_scaling_slope(table: WeightTable, x0, ks,
                           opts: SolveOptions | None = None) -> ScalingSlope:
    """Least-squares slope of log2 cap(closed ball rho_k, ball 2 rho_k)
    against -k.  The condenser normalization makes the expected slope
    dim - sp; within 0.1 of zero the decay is logarithmic and the result is
    flagged borderline rather than trusted."""
    lat = table.lattice
    ks = sorted({int(k) for k in np.atleast_1d(np.asarray(ks)).tolist()})
    if len(ks) < 3:
        raise ContractError("a slope needs at least 3 dyadic radii")
    if not _inside_box(lat, x0):
        raise DomainError("the scaling center must lie strictly inside the box")
    radii = [2.0 ** (-k) for k in ks]
    if min(radii) < 8.0 * lat.h:
        raise ContractError("all radii must be at least 8 grid cells")
    values = [_dyadic_condenser(table, x0, k, opts) for k in ks]
    if min(values) <= 0.0:
        raise ContractError("nonpositive capacity in the scaling window")
    slope = float(np.polyfit([-k for k in ks], np.log2(values), 1)[0])
    spec = table.spec
    expected = lat.dim - spec.s * spec.p
    return ScalingSlope(slope=slope, expected=expected,
                        borderline=abs(expected) < BORDERLINE_BAND,
                        ks=tuple(ks), radii=tuple(radii), values=tuple(values))


# ---------------------------------------------------------------------------
# the Wiener profile

def _trend_label(integrand: list[float]) -> str:
    if all(v == 0.0 for v in integrand):
        return "convergent-like"
    if len(integrand) < 3:
        return "inconclusive"
    tail3 = integrand[-3:]
    if all(v > DIVERGENT_FLOOR for v in tail3):
        return "divergent-like"
    if tail3[-1] <= tail3[0] / DECAY_FACTOR:
        return "convergent-like"
    return "inconclusive"


def wiener_profile(table: WeightTable, mask: DomainMask, x0,
                   opts: SolveOptions | None = None,
                   k_min: int | None = None) -> WienerProfile:
    """Sample the regularity integrand at dyadic scales around x0.

    At each k the compact piece is every constrained (non-free) node in the
    closed 2^-k ball and the grounding set is the ball of twice the radius.
    k_min defaults to the shallowest scale whose grounding ball clears the
    outermost node layer; k_max is set by the rho >= 8h floor.
    """
    lat = table.lattice
    if mask.lattice != lat:
        raise ContractError("mask lattice does not match the weight table")
    if not _inside_box(lat, x0):
        raise DomainError("the profile center must lie strictly inside the box")
    k_hi = int(math.floor(-math.log2(8.0 * lat.h)))
    if k_hi < 1:
        raise DomainError("grid too coarse for any scale with rho >= 8h")

    edge = np.flatnonzero(edge_layer(lat))
    constrained = mask.status != 0
    k_lo = 1 if k_min is None else int(k_min)
    while k_lo <= k_hi:
        omega = open_ball_nodes(lat, x0, 2.0 ** (1 - k_lo))
        if np.intersect1d(omega, edge).size == 0 and omega.size:
            break
        k_lo += 1
    if k_lo > k_hi:
        raise DomainError("no admissible scale between the edge clearance "
                          "and the rho >= 8h floor")

    spec = table.spec
    gamma = lat.dim - spec.s * spec.p
    qexp = 1.0 / (spec.p - 1.0)
    ks, radii, cs, integrand, partial = [], [], [], [], []
    running = 0.0
    all_ok = True
    for k in range(k_lo, k_hi + 1):
        rho = 2.0 ** (-k)
        inner = closed_ball_nodes(lat, x0, rho)
        inner = inner[constrained[inner]]
        omega = open_ball_nodes(lat, x0, 2.0 * rho)
        res = condenser_capacity(table, inner, omega, opts, keep_potential=False)
        all_ok = all_ok and res.converged
        c_k = res.value
        i_k = (c_k / rho ** gamma) ** qexp * LN2 if c_k > 0.0 else 0.0
        running += i_k
        ks.append(k)
        radii.append(rho)
        cs.append(c_k)
        integrand.append(i_k)
        partial.append(running)
    flags = [f"scales below rho = 8h = {8.0 * lat.h:.3e} unresolved"]
    flags.extend(mask.flags)
    return WienerProfile(x0=tuple(float(v) for v in np.atleast_1d(np.asarray(x0, dtype=float))),
                         ks=tuple(ks), radii=tuple(radii), c=tuple(cs),
                         integrand=tuple(integrand), partial_sums=tuple(partial),
                         trend=_trend_label(integrand), converged=all_ok,
                         flags=tuple(flags))
