"""Boundary-point classification from the distance-cap solve.

One Dirichlet solve with datum d_x0(x) = min(1, |x - x0|) drives the whole
module: min/max statistics of the solution over dyadic shells around x0
estimate the liminf and limsup of H d_x0 at the point, and a threshold rule
maps the pair (l_hat, u_hat) to one of the labels regular / semiregular /
strongly-irregular / indeterminate.  The estimates come from the finest
resolved shells only; nothing is extrapolated below the grid scale, and
every report says where resolution ended.

The refinement experiments live here too: the removability study (does a
single puncture change the solution as h drops?), its sharpness control
(the residual left on a removed block of positive capacity), the universal
sequence probe along shell argmins, and the (s, p) sweep against the
geometric ground-truth oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .capacity import BORDERLINE_BAND, condenser_capacity, open_ball_nodes
from .domains import (
    FREE,
    REMOVED,
    DataSpec,
    DomainMask,
    Lattice,
    dist_cap_data,
    make_ball,
    make_comb,
    make_exterior_block,
    make_halfspace_slit,
    make_punctured_ball,
    max_shell_index,
    shell_nodes,
)
from .energy import Field, residual_at_node
from .errors import ConfigError, ContractError, DomainError
from .kernel import KernelSpec, WeightTable, build_weight_table
from .solve import SolveOptions, SolveReport, capacitary_potential, dirichlet_solve

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

DELTA_REG = 0.05
DELTA_GAP = 0.10
WINDOW = 3

LABELS = ("regular", "semiregular", "strongly-irregular", "indeterminate")

_GALLERY_NAMES = ("ball", "punctured_ball", "exterior_block", "comb",
                  "halfspace_slit")


# ---------------------------------------------------------------------------
# report types

@dataclass(frozen=True)
class ShellStat:
    """Solution min/max over the free nodes of one dyadic shell."""

    m: int
    radius: float        # outer shell radius 2^-m
    count: int
    vmin: float
    vmax: float

    def __post_init__(self) -> None:
        if self.count <= 0:
            raise ContractError("shell stats require a nonempty shell")
        if self.vmin > self.vmax + 1e-12:
            raise ContractError("shell min exceeds shell max")


@dataclass(frozen=True)
class ClassificationReport:
    x0: tuple[float, ...]
    shells: tuple[ShellStat, ...]
    l_hat: float
    u_hat: float
    label: str
    delta_reg: float
    delta_gap: float
    window: int
    resolved_range: tuple[int, int]
    converged: bool
    flags: tuple[str, ...] = ()
    method: str = ""

    def __post_init__(self) -> None:
        if not (-1e-9 <= self.l_hat <= self.u_hat + 1e-12 <= 1.0 + 1e-9):
            raise ContractError("window estimates must satisfy 0 <= l <= u <= 1")
        if self.label not in LABELS:
            raise ContractError(f"unknown label {self.label!r}")
        want = decide_label(self.l_hat, self.u_hat, self.delta_reg, self.delta_gap)
        if self.label != want:
            raise ContractError("label inconsistent with the decision rule")

    @property
    def rows(self) -> list[tuple[int, float, int, float, float]]:
        """(m, outer radius, node count, min, max) per resolved shell."""
        return [(s.m, s.radius, s.count, s.vmin, s.vmax) for s in self.shells]

    def to_dict(self) -> dict:
        return {
            "x0": list(self.x0),
            "shells": [
                {"m": s.m, "radius": s.radius, "count": s.count,
                 "min": s.vmin, "max": s.vmax}
                for s in self.shells
            ],
            "l_hat": self.l_hat,
            "u_hat": self.u_hat,
            "label": self.label,
            "thresholds": {"delta_reg": self.delta_reg,
                           "delta_gap": self.delta_gap,
                           "window": self.window},
            "resolved_range": list(self.resolved_range),
            "converged": self.converged,
            "flags": list(self.flags),
            "method": self.method,
        }


@dataclass(frozen=True)
class SequenceProbeReport:
    """Deviations |H g(y_m) - g(x0)| along the shell-argmin sequence y_m."""

    x0: tuple[float, ...]
    ms: tuple[int, ...]
    nodes: tuple[int, ...]
    data_labels: tuple[str, ...]
    deviations: tuple[tuple[float, ...], ...]   # one row per datum
    converged: bool
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.ms) != len(self.nodes):
            raise ContractError("one argmin node per shell index")
        for row in self.deviations:
            if len(row) != len(self.ms):
                raise ContractError("deviation rows must span every shell")
        if len(self.deviations) != len(self.data_labels):
            raise ContractError("one deviation row per test datum")

    @property
    def rows(self) -> list[tuple]:
        """(m, node, dev_datum0, dev_datum1, ...) per shell, deepest last."""
        return [
            (m, n) + tuple(dev[i] for dev in self.deviations)
            for i, (m, n) in enumerate(zip(self.ms, self.nodes))
        ]

    def to_dict(self) -> dict:
        return {
            "x0": list(self.x0),
            "ms": list(self.ms),
            "nodes": [int(n) for n in self.nodes],
            "data": list(self.data_labels),
            "deviations": [list(row) for row in self.deviations],
            "converged": self.converged,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class RefinementTable:
    """One headline value per grid level h, h/2, h/4, ..."""

    kind: str
    hs: tuple[float, ...]
    values: tuple[float, ...]
    converged: bool
    meta: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.hs) != len(self.values):
            raise ContractError("one value per grid level")
        if any(b >= a for a, b in zip(self.hs, self.hs[1:])):
            raise ContractError("grid levels must refine strictly")

    @property
    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.hs, self.values))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "hs": list(self.hs),
            "values": list(self.values),
            "converged": self.converged,
            "meta": self.meta,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class SweepEntry:
    s: float
    p: float
    label: str
    oracle: str
    agrees: bool
    borderline: bool
    converged: bool
    flags: tuple[str, ...] = ()

    @property
    def sp(self) -> float:
        return self.s * self.p


@dataclass(frozen=True)
class SweepResult:
    domain: str
    x0: tuple[float, ...]
    entries: tuple[SweepEntry, ...]

    @property
    def rows(self) -> list[tuple]:
        """(s, p, sp, label, oracle, agrees, borderline) per kernel."""
        return [(e.s, e.p, e.sp, e.label, e.oracle, e.agrees, e.borderline)
                for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "x0": list(self.x0),
            "entries": [
                {"s": e.s, "p": e.p, "sp": e.sp, "label": e.label,
                 "oracle": e.oracle, "agrees": e.agrees,
                 "borderline": e.borderline, "converged": e.converged,
                 "flags": list(e.flags)}
                for e in self.entries
            ],
        }


# ---------------------------------------------------------------------------
# the decision rule

def decide_label(l_hat: float, u_hat: float,
                 delta_reg: float = DELTA_REG,
                 delta_gap: float = DELTA_GAP) -> str:
    """Map window estimates of (liminf, limsup) to a trichotomy label.

    Regular means the solution forgets the datum's value at x0 entirely
    (both estimates near zero); semiregular means it settles on a positive
    level (estimates close to each other, away from zero); strong
    irregularity is a persistent gap: minima near zero under maxima that
    stay high.
    """
    if u_hat <= delta_reg:
        return "regular"
    if l_hat >= delta_reg and u_hat - l_hat <= delta_gap:
        return "semiregular"
    if l_hat <= delta_reg and u_hat >= delta_reg + delta_gap:
        return "strongly-irregular"
    return "indeterminate"


def _boundary_check(mask: DomainMask, x0: FloatArray) -> None:
    # a boundary location has both free and data-bearing nodes within ~2h
    lat = mask.lattice
    dist = lat.distances_to(x0)
    tol = 2.0 * lat.h + 1e-12
    if not dist[mask.free].size or dist[mask.free].min() > tol:
        raise DomainError("x0 has no free node nearby; not a boundary location")
    if not dist[mask.fixed].size or dist[mask.fixed].min() > tol:
        raise DomainError("x0 has no constrained node nearby; not a boundary location")


def _classify(table: WeightTable, mask: DomainMask, x0,
              opts: SolveOptions | None,
              delta_reg: float, delta_gap: float,
              window: int) -> tuple[ClassificationReport, SolveReport]:
    lat = table.lattice
    if mask.lattice != lat:
        raise ContractError("mask lattice does not match the weight table")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (lat.dim,):
        raise ContractError(f"x0 must have {lat.dim} coordinates")
    if window < 1:
        raise ConfigError("window must be at least 1")
    _boundary_check(mask, x0)

    report = dirichlet_solve(table, mask, dist_cap_data(x0), opts)
    u = report.solution.values

    flags: list[str] = list(mask.flags)
    shells: list[ShellStat] = []
    for m in range(0, max_shell_index(lat) + 1):
        nodes = shell_nodes(mask, x0, m)
        if nodes.size == 0:
            flags.append(f"empty shell skipped: m={m}")
            continue
        vals = u[nodes]
        shells.append(ShellStat(m=m, radius=2.0 ** (-m), count=int(nodes.size),
                                vmin=float(vals.min()), vmax=float(vals.max())))
    if len(shells) < 3:
        raise ConfigError(f"only {len(shells)} resolvable shells; need at least 3")

    tail = shells[-window:]
    l_hat = float(np.clip(min(s.vmin for s in tail), 0.0, 1.0))
    u_hat = float(np.clip(max(s.vmax for s in tail), 0.0, 1.0))
    label = decide_label(l_hat, u_hat, delta_reg, delta_gap)

    spec = table.spec
    if abs(spec.s * spec.p - lat.dim) < BORDERLINE_BAND:
        flags.append(f"borderline: sp within {BORDERLINE_BAND} of dim")
    if not report.converged:
        flags.append(f"solve not converged; gradient norm {report.final_gradient_norm:.3e}")
    if label == "indeterminate":
        flags.append(f"scales below {4.0 * lat.h:.3e} unresolved; "
                     "window estimates are finite-scale only")

    cls = ClassificationReport(
        x0=tuple(float(v) for v in x0),
        shells=tuple(shells),
        l_hat=l_hat,
        u_hat=u_hat,
        label=label,
        delta_reg=delta_reg,
        delta_gap=delta_gap,
        window=window,
        resolved_range=(shells[0].m, shells[-1].m),
        converged=report.converged,
        flags=tuple(flags),
        method=report.method,
    )
    return cls, report


def classify_point(table: WeightTable, mask: DomainMask, x0,
                   opts: SolveOptions | None = None,
                   delta_reg: float = DELTA_REG,
                   delta_gap: float = DELTA_GAP,
                   window: int = WINDOW) -> ClassificationReport:
    """Classify the boundary point x0 of the mask's domain.

    Solves the exterior-value problem for the distance-cap datum once, then
    reads shell statistics near x0.  A non-convergent solve is propagated
    through `converged` and a flag rather than raised.
    """
    cls, _ = _classify(table, mask, x0, opts, delta_reg, delta_gap, window)
    return cls


# ---------------------------------------------------------------------------
# geometric ground truth for the gallery

def geometric_oracle(kernel: KernelSpec, mask: DomainMask, x0) -> str:
    """Ground-truth label for a gallery mask at its canonical point.

    The answer comes from the construction of the domain, not from any
    solve: a puncture is negligible exactly when single points carry zero
    capacity (sp <= dim); solid complements force the datum's value; the
    comb's teeth are tuned so the capacity sum converges while the teeth
    keep pulling the solution down, which is the strongly irregular
    signature -- again only meaningful while points are negligible.
    """
    if mask.lattice.dim != kernel.dim:
        raise ContractError("mask dimension does not match the kernel")
    if mask.name not in _GALLERY_NAMES:
        raise ContractError(f"no oracle for domain {mask.name!r}")
    canon = mask.meta.get("x0")
    if canon is not None:
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        if not np.allclose(x0, np.asarray(canon, dtype=float), atol=1e-12):
            raise ContractError("the oracle only knows the canonical point "
                                f"{tuple(canon)} of {mask.name!r}")
    points_negligible = kernel.s * kernel.p <= kernel.dim
    if mask.name == "punctured_ball":
        return "semiregular" if points_negligible else "regular"
    if mask.name == "comb":
        return "strongly-irregular" if points_negligible else "regular"
    # solid complements near the point: ball boundary, block, half-space edge
    return "regular"


# ---------------------------------------------------------------------------
# universal sequence probe

def _point_value(data: DataSpec, x0: FloatArray, lattice: Lattice) -> float:
    """Evaluate a datum at an off-node point, mirroring its node formulas."""
    if data.kind == "constant":
        return float(data.params.get("value", data.g_inf))
    if data.kind == "dist_cap":
        ref = np.asarray(data.params["x0"], dtype=float)
        return float(min(1.0, np.linalg.norm(x0 - ref)))
    if data.kind == "ramp":
        center = np.asarray(data.params["center"], dtype=float)
        t = 1.0 - np.linalg.norm(x0 - center) / float(data.params["halfwidth"])
        return float(data.g_inf + (float(data.params["peak"]) - data.g_inf)
                     * max(0.0, t))
    # custom tables only know node values; the nearest node is within h/2
    values = np.asarray(data.params["values"], dtype=float)
    return float(values[lattice.nearest_node(x0)])


def _data_label(data: DataSpec) -> str:
    if data.kind == "constant":
        return f"constant({float(data.params.get('value', data.g_inf)):g})"
    if data.kind == "dist_cap":
        return "dist_cap"
    if data.kind == "ramp":
        return (f"ramp(peak={float(data.params['peak']):g},"
                f"hw={float(data.params['halfwidth']):g})")
    return "custom"


def universal_sequence_probe(table: WeightTable, mask: DomainMask, x0,
                             test_data: Sequence[DataSpec],
                             opts: SolveOptions | None = None) -> SequenceProbeReport:
    """Evaluate H g along the shell-argmin sequence of H d_x0.

    y_m is the free node minimizing the distance-cap solution in shell m;
    for each bounded test datum g the report lists |H g(y_m) - g(x0)| over
    the resolved shells.  When the classification at x0 is not
    strongly-irregular the probe still runs but says so in a flag, since
    the sequence is only guaranteed universal in that case.
    """
    if not test_data:
        raise ConfigError("the probe needs at least one test datum")
    cls, d_report = _classify(table, mask, x0, opts, DELTA_REG, DELTA_GAP, WINDOW)
    x0v = np.asarray(cls.x0, dtype=float)
    u_d = d_report.solution.values

    flags: list[str] = [f for f in cls.flags if f.startswith("empty shell")]
    if cls.label != "strongly-irregular":
        flags.append(f"classification at x0 is {cls.label}; the argmin "
                     "sequence is only guaranteed universal for "
                     "strongly-irregular points")

    ms, nodes = [], []
    for stat in cls.shells:
        shell = shell_nodes(mask, x0v, stat.m)
        ms.append(stat.m)
        nodes.append(int(shell[np.argmin(u_d[shell])]))

    all_ok = d_report.converged
    labels, dev_rows = [], []
    for data in test_data:
        rep = dirichlet_solve(table, mask, data, opts)
        all_ok = all_ok and rep.converged
        g0 = _point_value(data, x0v, table.lattice)
        dev_rows.append(tuple(float(abs(rep.solution.values[n] - g0))
                              for n in nodes))
        labels.append(_data_label(data))
    if not all_ok:
        flags.append("at least one solve did not converge")

    return SequenceProbeReport(
        x0=cls.x0, ms=tuple(ms), nodes=tuple(nodes),
        data_labels=tuple(labels), deviations=tuple(dev_rows),
        converged=all_ok, flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# refinement experiments

def refine_mask(mask: DomainMask) -> DomainMask:
    """Halve the cell size, every child inheriting its parent's status."""
    lat = mask.lattice
    fine = lat.refine()
    if lat.dim == 1:
        status = np.repeat(mask.status, 2)
    else:
        M = lat.cells
        status = np.repeat(np.repeat(mask.status.reshape(M, M), 2, axis=0),
                           2, axis=1).reshape(-1)
    return DomainMask(fine, status, name=mask.name,
                      flags=list(mask.flags) + [f"statuses carried from h={lat.h:g}"],
                      meta=dict(mask.meta))


def removability_experiment(kernel: KernelSpec, lattice: Lattice, x0,
                            opts: SolveOptions | None = None,
                            radius: float = 1.0,
                            levels: int = 3) -> RefinementTable:
    """Compare punctured and unpunctured ball solves under refinement.

    For each grid h, h/2, ... solve the exterior-value problem with the
    distance-cap datum on B(x0, radius) with and without the single-node
    puncture at x0, and report the sup difference over the free nodes they
    share.  The meta table also carries the same sup restricted to nodes at
    least radius/8 away from x0, which separates the fixed-strength drag on
    the puncture's immediate neighbours from the far field.
    """
    if levels < 1:
        raise ConfigError("need at least one grid level")
    x0v = np.atleast_1d(np.asarray(x0, dtype=float))
    g = dist_cap_data(x0v)
    hs, sups, far_sups, ns = [], [], [], []
    all_ok = True
    lat = lattice
    for _ in range(levels):
        table = build_weight_table(kernel, lat)
        punctured = make_punctured_ball(lat, x0v, radius)
        whole = make_ball(lat, x0v, radius)
        rep_p = dirichlet_solve(table, punctured, g, opts)
        rep_w = dirichlet_solve(table, whole, g, opts)
        all_ok = all_ok and rep_p.converged and rep_w.converged
        common = punctured.free_indices
        diff = np.abs(rep_p.solution.values[common] - rep_w.solution.values[common])
        dist = lat.distances_to(x0v)[common]
        hs.append(lat.h)
        sups.append(float(diff.max()))
        far = diff[dist >= radius / 8.0]
        far_sups.append(float(far.max()) if far.size else 0.0)
        ns.append(int(common.size))
        lat = lat.refine()
    flags = () if all_ok else ("at least one solve did not converge",)
    return RefinementTable(
        kind="removability", hs=tuple(hs), values=tuple(sups),
        converged=all_ok,
        meta={"x0": [float(v) for v in x0v], "radius": radius,
              "sp": kernel.s * kernel.p,
              "sup_beyond_r8": far_sups, "free_counts": ns},
        flags=flags,
    )


def block_ball_mask(lattice: Lattice, x0, block_halfwidth: float,
                    radius: float = 1.0) -> DomainMask:
    """Ball B(x0, radius) with the sup-norm block |x - x0| <= halfwidth removed."""
    x0v = np.atleast_1d(np.asarray(x0, dtype=float))
    if not (0.0 < block_halfwidth < radius):
        raise DomainError("block halfwidth must sit strictly inside the ball")
    mask = make_ball(lattice, x0v, radius)
    coords = lattice.node_coords()
    inside = np.all(np.abs(coords - x0v) <= block_halfwidth + 1e-12, axis=1)
    if not inside.any():
        raise DomainError("block contains no nodes at this h")
    if np.any(mask.status[inside] != FREE):
        raise DomainError("block leaks outside the ball")
    status = mask.status.copy()
    status[inside] = REMOVED
    return DomainMask(lattice, status, name="block_ball",
                      meta={"x0": [float(v) for v in x0v], "radius": radius,
                            "block_halfwidth": block_halfwidth,
                            "block_nodes": int(inside.sum())})


def sharpness_experiment(table: WeightTable, mask: DomainMask,
                         opts: SolveOptions | None = None,
                         levels: int = 3) -> RefinementTable:
    """Track the obstacle residual of a removed set under refinement.

    The removed nodes K of the mask act as a condenser plate: compute the
    capacitary potential of K grounded outside free-union-K, then report
    the largest stationarity residual over K per grid.  A block of fixed
    physical size keeps its capacity and its residual; the single-node
    control case (K re-punctured at each grid, not refined into a pair) is
    expected to fade when points are negligible.
    """
    if mask.lattice != table.lattice:
        raise ContractError("mask lattice does not match the weight table")
    if levels < 1:
        raise ConfigError("need at least one grid level")
    K0 = np.flatnonzero(mask.removed)
    if K0.size == 0:
        raise ContractError("the mask has no removed nodes to test")
    control = K0.size == 1
    x_K = table.lattice.node_coords()[K0[0]] if control else None

    hs, residuals, sizes = [], [], []
    all_ok = True
    current = mask
    tbl = table
    for level in range(levels):
        if level > 0:
            current = refine_mask(current)
            if control:
                # a refined single node would become a pair: re-puncture the
                # nearest node to the original coordinate instead
                status = current.status.copy()
                status[status == REMOVED] = FREE
                status[current.lattice.nearest_node(x_K)] = REMOVED
                current = DomainMask(current.lattice, status, name=current.name,
                                     flags=list(current.flags),
                                     meta=dict(current.meta))
            tbl = build_weight_table(table.spec, current.lattice)
        K = np.flatnonzero(current.removed)
        omega = np.flatnonzero(current.free | current.removed)
        pot = capacitary_potential(tbl, current, K, omega, opts)
        all_ok = all_ok and pot.converged
        u = pot.solution
        worst = max(abs(residual_at_node(tbl, current, u, int(i))) for i in K)
        hs.append(current.lattice.h)
        residuals.append(float(worst))
        sizes.append(int(K.size))
    flags = ["single-node control: re-punctured at each grid"] if control else []
    if not all_ok:
        flags.append("at least one solve did not converge")
    return RefinementTable(
        kind="sharpness", hs=tuple(hs), values=tuple(residuals),
        converged=all_ok,
        meta={"control": control, "block_nodes": sizes,
              "sp": table.spec.s * table.spec.p},
        flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# gallery construction and the (s, p) sweep

def gallery_mask(name: str, lattice: Lattice, x0=None,
                 table: WeightTable | None = None,
                 opts: SolveOptions | None = None) -> DomainMask:
    """Build a gallery domain by name.

    The comb's tooth radii are sized by measured condenser capacities when
    a weight table is supplied; without one the teeth stay single nodes and
    the mask carries the budget-unverified flag.
    """
    if name not in _GALLERY_NAMES:
        raise ConfigError(f"unknown gallery domain {name!r}; "
                          f"choose from {', '.join(_GALLERY_NAMES)}")
    if x0 is None:
        x0 = (0.0,) * lattice.dim
    x0v = np.atleast_1d(np.asarray(x0, dtype=float))
    if name == "ball":
        return make_ball(lattice, x0v)
    if name == "punctured_ball":
        return make_punctured_ball(lattice, x0v)
    if name == "exterior_block":
        return make_exterior_block(lattice, x0v)
    if name == "halfspace_slit":
        return make_halfspace_slit(lattice)
    if np.any(x0v != 0.0):
        raise ConfigError("the comb domain is anchored at the origin")
    capacity_fn = None
    if table is not None:
        if table.lattice != lattice:
            raise ContractError("weight table lattice does not match")

        def capacity_fn(nodes, center, rho):
            omega = open_ball_nodes(lattice, center, rho)
            return condenser_capacity(table, nodes, omega, opts,
                                      keep_potential=False).value

    return make_comb(lattice, capacity_fn=capacity_fn)


def sp_sweep(lattice: Lattice, domain: str, x0, pairs: Sequence[tuple[float, float]],
             opts: SolveOptions | None = None,
             delta_reg: float = DELTA_REG,
             delta_gap: float = DELTA_GAP,
             window: int = WINDOW) -> SweepResult:
    """Classify one gallery point under a list of (s, p) kernels.

    Each kernel gets its own weight table and, for the comb, its own
    capacity-sized mask.  Entries are sorted by (s, p) so concurrent runs
    merge identically.
    """
    if not pairs:
        raise ConfigError("the sweep needs at least one (s, p) pair")
    x0v = np.atleast_1d(np.asarray(x0, dtype=float))
    entries = []
    for s, p in sorted((float(s), float(p)) for s, p in pairs):
        kernel = KernelSpec(s=s, p=p, dim=lattice.dim)
        table = build_weight_table(kernel, lattice)
        mask = gallery_mask(domain, lattice, x0v, table=table, opts=opts)
        rep = classify_point(table, mask, x0v, opts, delta_reg, delta_gap, window)
        oracle = geometric_oracle(kernel, mask, x0v)
        entries.append(SweepEntry(
            s=s, p=p, label=rep.label, oracle=oracle,
            agrees=rep.label == oracle,
            borderline=abs(s * p - lattice.dim) < BORDERLINE_BAND,
            converged=rep.converged, flags=rep.flags,
        ))
    return SweepResult(domain=domain, x0=tuple(float(v) for v in x0v),
                       entries=tuple(entries))
