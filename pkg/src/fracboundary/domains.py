"""Lattices, domain masks, exterior data, and the example-domain gallery.

The discrete model lives on a uniform node-centered lattice over an axis
aligned box.  A domain is a boolean mask over the nodes: FREE nodes carry
unknowns, FIXED nodes carry prescribed exterior data, and a subset of the
fixed nodes may be tagged as "removed" obstacle sets (punctures, comb teeth).
Everything beyond the box is handled analytically by tail weights under the
convention that data is constant out there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, ContractError, DomainError

FloatArray = NDArray[np.float64]
BoolArray = NDArray[np.bool_]

_EDGE_TOL = 1e-9


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Lattice:
    """Uniform node-centered grid with M cells per axis on a cubical box.

    Nodes sit at cell centers: x_i = lo + (i + 1/2) h along each axis with
    h = side / cells.  `cells` must be a power of two and at least 8 so that
    dyadic radii and refinement studies line up with cell boundaries.
    """

    dim: int
    lo: tuple[float, ...]
    side: float
    cells: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.lo) != self.dim:
            raise ConfigError(f"lo has {len(self.lo)} components for dim={self.dim}")
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ConfigError(f"box side must be positive, got {self.side}")
        if not _is_power_of_two(self.cells) or self.cells < 8:
            raise ConfigError(f"cells must be a power of two >= 8, got {self.cells}")

    @property
    def h(self) -> float:
        return self.side / self.cells

    @property
    def n_nodes(self) -> int:
        return self.cells**self.dim

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(a + self.side for a in self.lo)

    def axis_nodes(self, axis: int = 0) -> FloatArray:
        return self.lo[axis] + (np.arange(self.cells) + 0.5) * self.h

    def node_coords(self) -> FloatArray:
        """All node positions as an (N, dim) array in C (row-major) order."""
        axes = [self.axis_nodes(k) for k in range(self.dim)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def nearest_node(self, point: Sequence[float]) -> int:
        """Flat index of the node closest to `point` (ties resolved downward)."""
        pt = np.asarray(point, dtype=float)
        if pt.shape != (self.dim,):
            raise DomainError(f"point {point} does not match dim={self.dim}")
        idx = []
        for k in range(self.dim):
            frac = (pt[k] - self.lo[k]) / self.h - 0.5
            i = int(math.floor(frac + 0.5 - _EDGE_TOL))
            if i < 0 or i >= self.cells:
                raise DomainError(f"point {point} outside the box")
            idx.append(i)
        flat = 0
        for i in idx:
            flat = flat * self.cells + i
        return flat

    def is_cell_boundary(self, coord: float, axis: int = 0) -> bool:
        frac = (coord - self.lo[axis]) / self.h
        return abs(frac - round(frac)) < _EDGE_TOL

    def refine(self) -> "Lattice":
        """Same box with h halved."""
        return Lattice(self.dim, self.lo, self.side, self.cells * 2)

    def distances_to(self, point: Sequence[float]) -> FloatArray:
        """Euclidean node distances to `point`, shape (N,)."""
        pt = np.asarray(point, dtype=float)
        diff = self.node_coords() - pt
        if self.dim == 1:
            return np.abs(diff[:, 0])
        return np.sqrt(np.sum(diff * diff, axis=1))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "lo": list(self.lo),
            "side": self.side,
            "cells": self.cells,
        }

    @staticmethod
    def from_dict(d: dict) -> "Lattice":
        return Lattice(int(d["dim"]), tuple(float(v) for v in d["lo"]), float(d["side"]), int(d["cells"]))


FREE = 0
FIXED = 1
REMOVED = 2  # fixed node belonging to a tagged obstacle set


def edge_layer(lattice: Lattice) -> BoolArray:
    """Mask of the outermost node layer of the box."""
    M = lattice.cells
    if lattice.dim == 1:
        e = np.zeros(M, dtype=bool)
        e[0] = e[-1] = True
        return e
    e2 = np.zeros((M, M), dtype=bool)
    e2[0, :] = e2[-1, :] = True
    e2[:, 0] = e2[:, -1] = True
    return e2.ravel()


@dataclass
class DomainMask:
    """FREE/FIXED status per node, with removed obstacle nodes tagged.

    Invariant: free nodes never touch the outermost node layer, so the
    discrete domain is compactly inside the box and every free node has a
    full ring of data-bearing neighbors.
    """

    lattice: Lattice
    status: NDArray[np.int8]
    name: str = "custom"
    flags: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.status = np.asarray(self.status, dtype=np.int8)
        if self.status.shape != (self.lattice.n_nodes,):
            raise DomainError("status array does not match the lattice")
        if not np.all(np.isin(self.status, (FREE, FIXED, REMOVED))):
            raise DomainError("status entries must be FREE, FIXED, or REMOVED")
        if not self.free.any():
            raise DomainError("domain has no free nodes")
        edge = self._edge_layer()
        if np.any(self.free & edge):
            raise DomainError("free nodes touch the outermost node layer")

    def _edge_layer(self) -> BoolArray:
        return edge_layer(self.lattice)

    @property
    def free(self) -> BoolArray:
        return self.status == FREE

    @property
    def fixed(self) -> BoolArray:
        return self.status != FREE

    @property
    def removed(self) -> BoolArray:
        return self.status == REMOVED

    @property
    def free_indices(self) -> NDArray[np.int64]:
        return np.flatnonzero(self.free)

    def to_dict(self) -> dict:
        runs: list[list[int]] = []
        for v in self.status:
            iv = int(v)
            if runs and runs[-1][0] == iv:
                runs[-1][1] += 1
            else:
                runs.append([iv, 1])
        return {
            "lattice": self.lattice.to_dict(),
            "status_rle": runs,
            "name": self.name,
            "flags": list(self.flags),
            "meta": self.meta,
        }

    @staticmethod
    def from_dict(d: dict) -> "DomainMask":
        lat = Lattice.from_dict(d["lattice"])
        status = np.concatenate(
            [np.full(count, value, dtype=np.int8) for value, count in d["status_rle"]]
        )
        return DomainMask(lat, status, name=d.get("name", "custom"),
                          flags=list(d.get("flags", [])), meta=d.get("meta", {}))


@dataclass(frozen=True)
class DataSpec:
    """Exterior data generator: node values inside the box plus one far-field
    constant `g_inf` holding everywhere beyond it.

    Kinds:
      constant  - g = value everywhere, g_inf = value
      dist_cap  - g(x) = min(1, |x - x0|), g_inf = 1
      ramp      - tent profile rising linearly from g_inf to `peak` at
                  `center` over `halfwidth`, back to g_inf outside
      custom    - explicit per-node table
    """

    kind: str
    g_inf: float
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "dist_cap", "ramp", "custom"):
            raise ConfigError(f"unknown data kind {self.kind!r}")
        if not math.isfinite(self.g_inf):
            raise ConfigError("g_inf must be finite")

    def evaluate(self, lattice: Lattice) -> FloatArray:
        """Node values over the whole box; raises ConfigError if the profile
        fails to equal g_inf within one cell of the box edge."""
        x = lattice.node_coords()
        if self.kind == "constant":
            g = np.full(lattice.n_nodes, float(self.params.get("value", self.g_inf)))
            if float(self.params.get("value", self.g_inf)) != self.g_inf:
                raise ConfigError("constant data must equal g_inf")
        elif self.kind == "dist_cap":
            x0 = np.asarray(self.params["x0"], dtype=float)
            g = np.minimum(1.0, lattice.distances_to(x0))
            if self.g_inf != 1.0:
                raise ConfigError("dist_cap data has far-field 1")
        elif self.kind == "ramp":
            center = np.asarray(self.params["center"], dtype=float)
            halfwidth = float(self.params["halfwidth"])
            peak = float(self.params["peak"])
            if halfwidth <= 0:
                raise ConfigError("ramp halfwidth must be positive")
            t = 1.0 - lattice.distances_to(center) / halfwidth
            g = self.g_inf + (peak - self.g_inf) * np.maximum(0.0, t)
        else:  # custom
            g = np.asarray(self.params["values"], dtype=float)
            if g.shape != (lattice.n_nodes,):
                raise ConfigError("custom data table does not match the lattice")
            if not np.all(np.isfinite(g)):
                raise ConfigError("custom data must be finite")
        self._check_edge(lattice, g)
        return g

    def _check_edge(self, lattice: Lattice, g: FloatArray) -> None:
        M = lattice.cells
        if lattice.dim == 1:
            edge = np.zeros(M, dtype=bool)
            edge[:1] = edge[-1:] = True
        else:
            e2 = np.zeros((M, M), dtype=bool)
            e2[0, :] = e2[-1, :] = True
            e2[:, 0] = e2[:, -1] = True
            edge = e2.ravel()
        if not np.all(np.abs(g[edge] - self.g_inf) <= 1e-12):
            raise ConfigError("data must equal g_inf at every node within one cell of the box edge")

    def to_dict(self) -> dict:
        params = dict(self.params)
        if "values" in params:
            params["values"] = [float(v) for v in params["values"]]
        if "x0" in params:
            params["x0"] = [float(v) for v in np.atleast_1d(params["x0"])]
        if "center" in params:
            params["center"] = [float(v) for v in np.atleast_1d(params["center"])]
        return {"kind": self.kind, "g_inf": self.g_inf, "params": params}

    @staticmethod
    def from_dict(d: dict) -> "DataSpec":
        return DataSpec(d["kind"], float(d["g_inf"]), dict(d.get("params", {})))


def dist_cap_data(x0: Sequence[float]) -> DataSpec:
    """The one-function test datum d_x0(x) = min(1, |x - x0|)."""
    return DataSpec("dist_cap", 1.0, {"x0": tuple(float(v) for v in np.atleast_1d(x0))})


def _require_margin(lattice: Lattice, center: np.ndarray, radius: float, cells: int) -> None:
    margin = cells * lattice.h
    for k in range(lattice.dim):
        if center[k] - radius < lattice.lo[k] + margin - _EDGE_TOL:
            raise DomainError(f"ball B({tuple(center)}, {radius}) needs {cells} cells of margin")
        if center[k] + radius > lattice.hi[k] - margin + _EDGE_TOL:
            raise DomainError(f"ball B({tuple(center)}, {radius}) needs {cells} cells of margin")


def make_punctured_ball(lattice: Lattice, x0: Sequence[float], radius: float = 1.0) -> DomainMask:
    """Ball B(x0, radius) with the single node nearest x0 removed."""
    center = np.asarray(x0, dtype=float)
    if radius <= 0 or radius > 1.0:
        raise DomainError(f"radius must lie in (0, 1], got {radius}")
    _require_margin(lattice, center, radius, cells=2)
    dist = lattice.distances_to(center)
    status = np.where(dist < radius, FREE, FIXED).astype(np.int8)
    puncture = lattice.nearest_node(center)
    if status[puncture] != FREE:
        raise DomainError("puncture node fell outside the ball")
    status[puncture] = REMOVED
    return DomainMask(lattice, status, name="punctured_ball",
                      meta={"x0": [float(v) for v in center], "radius": radius,
                            "puncture_node": int(puncture)})


def make_ball(lattice: Lattice, x0: Sequence[float], radius: float = 1.0) -> DomainMask:
    """Unpunctured control ball, used by removability refinement studies."""
    center = np.asarray(x0, dtype=float)
    if radius <= 0 or radius > 1.0:
        raise DomainError(f"radius must lie in (0, 1], got {radius}")
    _require_margin(lattice, center, radius, cells=2)
    dist = lattice.distances_to(center)
    status = np.where(dist < radius, FREE, FIXED).astype(np.int8)
    return DomainMask(lattice, status, name="ball",
                      meta={"x0": [float(v) for v in center], "radius": radius})


def make_exterior_block(lattice: Lattice, x0: Sequence[float]) -> DomainMask:
    """Domain whose complement contains a solid block touching x0.

    1D: Omega = (x0, x0 + 1).  2D: Omega = B(x0, 1) minus the closed
    lower-left quadrant with vertex x0.  x0 must lie on a cell boundary so
    the block edge aligns with the grid.
    """
    center = np.asarray(x0, dtype=float)
    for k in range(lattice.dim):
        if not lattice.is_cell_boundary(center[k], k):
            raise DomainError(f"x0 component {center[k]} is not on a cell boundary")
    coords = lattice.node_coords()
    if lattice.dim == 1:
        a = center[0]
        _require_margin(lattice, np.array([a + 0.5]), 0.5, cells=2)
        inside = (coords[:, 0] > a) & (coords[:, 0] < a + 1.0)
    else:
        _require_margin(lattice, center, 1.0, cells=2)
        in_ball = lattice.distances_to(center) < 1.0
        in_quadrant = np.all(coords <= center + _EDGE_TOL, axis=1)
        inside = in_ball & ~in_quadrant
    status = np.where(inside, FREE, FIXED).astype(np.int8)
    return DomainMask(lattice, status, name="exterior_block",
                      meta={"x0": [float(v) for v in center]})


def make_halfspace_slit(lattice: Lattice) -> DomainMask:
    """2D upper half-ball: Omega = B(0,1) intersected with {x2 > 0}."""
    if lattice.dim != 2:
        raise DomainError("halfspace slit domain is 2D only")
    coords = lattice.node_coords()
    inside = (lattice.distances_to((0.0, 0.0)) < 1.0) & (coords[:, 1] > 0.0)
    status = np.where(inside, FREE, FIXED).astype(np.int8)
    _require_margin(lattice, np.zeros(2), 1.0, cells=2)
    return DomainMask(lattice, status, name="halfspace_slit", meta={"x0": [0.0, 0.0]})


def comb_hole_centers(jmax: int) -> list[float]:
    return [0.75 * 2.0 ** (-j) for j in range(1, jmax + 1)]


def default_comb_jmax(lattice: Lattice) -> int:
    """Largest j with hole center x_j = 0.75 * 2^-j at least 8h from the origin."""
    j, out = 1, 0
    while 0.75 * 2.0 ** (-j) >= 8.0 * lattice.h:
        out = j
        j += 1
    if out == 0:
        raise DomainError("lattice too coarse for any comb hole")
    return out


def make_comb(
    lattice: Lattice,
    jmax: int | None = None,
    capacity_fn: Callable[[NDArray[np.int64], Sequence[float], float], float] | None = None,
    budget_exponent: Callable[[int], float] | None = None,
) -> DomainMask:
    """Ball B(0,1) with the center node removed and a tooth K_j removed near
    each x_j = (3/4) 2^-j, j = 1..jmax.

    Each tooth radius is the largest grid-representable value keeping its
    measured condenser capacity inside B(0, 2^-j) below the budget
    2^{-(j+1)^2}.  `capacity_fn(nodes, center, rho)` measures that capacity;
    without one (or when even the single nearest node exceeds the budget)
    the tooth degenerates to one node and the mask is flagged
    "budget unverified at this h".
    """
    if lattice.dim != 1:
        raise DomainError("the comb domain is 1D")
    if jmax is None:
        jmax = default_comb_jmax(lattice)
    if jmax < 1:
        raise DomainError("comb needs jmax >= 1")
    if 0.75 * 2.0 ** (-jmax) < 8.0 * lattice.h - _EDGE_TOL:
        raise DomainError(f"jmax={jmax} puts a hole center closer than 8h to the origin")
    if budget_exponent is None:
        budget_exponent = lambda j: -((j + 1) ** 2)

    mask = make_punctured_ball(lattice, (0.0,), 1.0)
    status = mask.status.copy()
    coords = lattice.node_coords()[:, 0]
    holes = []
    flags: list[str] = []
    for j in range(1, jmax + 1):
        xj = 0.75 * 2.0 ** (-j)
        budget = 2.0 ** budget_exponent(j)
        shell_lo, shell_hi = 2.0 ** (-j - 1), 2.0 ** (-j)
        # radius never grows past the shell of this tooth
        r_cap = 0.25 * 2.0 ** (-j) - lattice.h
        candidates = [k for k in range(int(r_cap / lattice.h) + 1)]
        if not candidates:
            candidates = [0]

        def tooth(k: int) -> NDArray[np.int64]:
            r = (k + 0.5) * lattice.h
            return np.flatnonzero(np.abs(coords - xj) <= r + _EDGE_TOL)

        chosen_k = 0
        cap_val = math.nan
        verified = False
        if capacity_fn is not None:
            cap0 = capacity_fn(tooth(0), (0.0,), shell_hi)
            if cap0 < budget:
                verified = True
                cap_val = cap0
                lo_k, hi_k = 0, None
                k_try = 1
                while k_try <= candidates[-1]:
                    c = capacity_fn(tooth(k_try), (0.0,), shell_hi)
                    if c < budget:
                        lo_k, cap_val = k_try, c
                        k_try *= 2
                    else:
                        hi_k = k_try
                        break
                if hi_k is not None:
                    while hi_k - lo_k > 1:
                        mid = (lo_k + hi_k) // 2
                        c = capacity_fn(tooth(mid), (0.0,), shell_hi)
                        if c < budget:
                            lo_k, cap_val = mid, c
                        else:
                            hi_k = mid
                chosen_k = min(lo_k, candidates[-1])
            else:
                cap_val = cap0
        if not verified:
            flags.append(f"budget unverified at this h: j={j}")
        nodes = tooth(chosen_k)
        if np.any(np.abs(coords[nodes]) < shell_lo) or np.any(np.abs(coords[nodes]) > shell_hi):
            raise DomainError(f"comb tooth j={j} escapes its shell")
        status[nodes] = REMOVED
        holes.append({
            "j": j, "center": xj, "radius_cells": chosen_k,
            "node_count": int(nodes.size),
            "capacity": None if math.isnan(cap_val) else float(cap_val),
            "budget": budget, "verified": verified,
        })
    return DomainMask(lattice, status, name="comb", flags=flags,
                      meta={"x0": [0.0], "radius": 1.0, "holes": holes,
                            "jmax": jmax})


def shell_nodes(mask: DomainMask, x0: Sequence[float], m: int) -> NDArray[np.int64]:
    """Free nodes in the dyadic shell 2^{-m-1} <= |x - x0| < 2^{-m}."""
    if 2.0 ** (-m) < 4.0 * mask.lattice.h - _EDGE_TOL:
        raise ContractError(f"shell m={m} is below the 4h resolution floor")
    dist = mask.lattice.distances_to(x0)
    sel = mask.free & (dist >= 2.0 ** (-m - 1)) & (dist < 2.0 ** (-m))
    return np.flatnonzero(sel)


def max_shell_index(lattice: Lattice) -> int:
    """Largest m with 2^-m >= 4h."""
    return int(math.floor(math.log2(1.0 / (4.0 * lattice.h)) + _EDGE_TOL))
