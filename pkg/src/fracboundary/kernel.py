"""Jump kernels and discrete weight tables.

The kernel k(x, y) = a(x, y) |x - y|^{-(dim + s p)} couples every pair of
lattice nodes.  A WeightTable precomputes

* a translation-invariant radial pair weight per offset delta:
    far field  (sup|delta| > near_radius): midpoint rule
        w = h^{2 dim} k0(0, h delta)
    near field (sup|delta| <= near_radius): the cell-pair double integral
        int_{C_0} int_{C_delta} k0 dy dx
  via the overlap identity  int int = int k0(z) prod_k hat(z_k - delta_k) dz,
  which is evaluated in closed form (1D) or by exact piecewise radial
  integration with adaptive angular quadrature (2D).  For touching cells the
  pair integral diverges once sp >= (number of touching axes); such offsets
  fall back to the midpoint value so every stored weight is finite.

* a per-node tail weight  T(x_i) = int_{R^dim \\ box} k(x_i, y) dy  capturing
  all interaction with the constant-data exterior.

Optional bounded symmetric multipliers a(x, y) enter pair weights as the
midpoint factor a(x_i, x_j) on top of the radial part, and tails through the
quadrature directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .domains import Lattice
from .errors import ConfigError, ContractError, DomainError

FloatArray = NDArray[np.float64]

NEAR_RADIUS = 2


@dataclass(frozen=True)
class KernelSpec:
    """Fractional kernel parameters: order s in (0,1), exponent p > 1.

    `multiplier` is an optional symmetric function a(x, y) mapping point
    arrays of shape (..., dim) to values in [1/lam, lam]; None means a == 1.
    """

    s: float
    p: float
    dim: int
    multiplier: Callable[[FloatArray, FloatArray], FloatArray] | None = None
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.s < 1.0):
            raise ConfigError(f"s must lie in (0, 1), got {self.s}")
        if not (self.p > 1.0):
            raise ConfigError(f"p must exceed 1, got {self.p}")
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if self.lam < 1.0:
            raise ConfigError(f"ellipticity constant lam must be >= 1, got {self.lam}")
        if self.multiplier is None and self.lam != 1.0:
            raise ConfigError("lam != 1 requires a multiplier")

    @property
    def sp(self) -> float:
        return self.s * self.p

    def label(self) -> str:
        return f"s={self.s:g},p={self.p:g},dim={self.dim}"


def kernel_eval(spec: KernelSpec, x, y) -> FloatArray:
    """Pointwise kernel value a(x,y) |x-y|^{-(dim+sp)}; x == y is an error."""
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    ya = np.atleast_2d(np.asarray(y, dtype=float))
    diff = xa - ya
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    if np.any(r == 0.0):
        raise DomainError("kernel_eval is undefined on the diagonal x == y")
    out = r ** -(spec.dim + spec.sp)
    if spec.multiplier is not None:
        out = out * spec.multiplier(xa, ya)
    return out if out.size > 1 else float(out.reshape(-1)[0])


def _hat_branches(delta_k: int, e_k: float):
    """Linear branches (alpha + beta r) of hat(r e_k - delta_k) with their
    r-breakpoints, for the 2D radial reduction."""
    # hat(t) = 1 - |t| on (-1, 1); t = r e_k - delta_k
    crossings = []
    if e_k != 0.0:
        for c in (-1.0, 0.0, 1.0):
            r = (delta_k + c) / e_k
            if r > 0.0:
                crossings.append(r)
    return crossings


def _radial_piece_integral(sp: float, a: float, b: float, c: float, r1: float, r2: float) -> float:
    """int_{r1}^{r2} (a + b r + c r^2) r^{-(1+sp)} dr in closed form."""

    def term(coef: float, power: float) -> float:
        if coef == 0.0:
            return 0.0
        q = power - sp
        if abs(q) < 1e-13:
            return coef * math.log(r2 / r1)
        return coef * (r2**q - r1**q) / q

    return term(a, 0.0) + term(b, 1.0) + term(c, 2.0)


def _overlap_radial(sp: float, delta: tuple[int, int], theta: float) -> float:
    """For fixed angle, integrate r^{-(1+sp)} * hat(r cos - d1) * hat(r sin - d2)
    exactly over r > 0 using the piecewise-quadratic structure."""
    e = (math.cos(theta), math.sin(theta))
    breaks: set[float] = set()
    for k in range(2):
        for r in _hat_branches(delta[k], e[k]):
            breaks.add(r)
    # support bounds in r: both hat arguments must lie in (-1, 1)
    lohi = [0.0, math.inf]
    for k in range(2):
        if e[k] == 0.0:
            if abs(delta[k]) >= 1:
                return 0.0
            continue
        r_lo = (delta[k] - 1.0) / e[k]
        r_hi = (delta[k] + 1.0) / e[k]
        if r_lo > r_hi:
            r_lo, r_hi = r_hi, r_lo
        lohi[0] = max(lohi[0], r_lo)
        lohi[1] = min(lohi[1], r_hi)
    if lohi[1] <= lohi[0]:
        return 0.0
    pts = sorted({lohi[0], lohi[1], *(r for r in breaks if lohi[0] < r < lohi[1])})
    total = 0.0
    for r1, r2 in zip(pts[:-1], pts[1:]):
        rm = 0.5 * (r1 + r2)
        coeffs = [(1.0, 0.0), (1.0, 0.0)]
        ok = True
        for k in range(2):
            t = rm * e[k] - delta[k]
            if not (-1.0 < t < 1.0):
                ok = False
                break
            if t < 0.0:
                coeffs[k] = (1.0 - delta[k], e[k])
            else:
                coeffs[k] = (1.0 + delta[k], -e[k])
        if not ok:
            continue
        (a1, b1), (a2, b2) = coeffs
        total += _radial_piece_integral(
            sp, a1 * a2, a1 * b2 + a2 * b1, b1 * b2, r1, r2
        )
    return total


@lru_cache(maxsize=4096)
def unit_pair_integral(dim: int, sp: float, delta: tuple[int, ...], rel_tol: float = 1e-9) -> float:
    """Cell-pair integral over unit cells at integer offset delta, i.e.
    int k0(z) prod hat(z_k - delta_k) dz with k0 = |z|^{-(dim+sp)}.

    Raises ContractError when the integral diverges (touching cells with
    sp >= number of touching axes).
    """
    if all(d == 0 for d in delta):
        raise DomainError("zero offset has no pair weight")
    touching_axes = sum(1 for d in delta if abs(d) == 1)
    touches = all(abs(d) <= 1 for d in delta)
    if touches and sp >= touching_axes:
        raise ContractError(
            f"cell-pair integral diverges at offset {delta} for sp={sp:g}"
        )
    if dim == 1:
        m = abs(delta[0])
        if abs(sp - 1.0) < 1e-13:
            return math.log(m * m / ((m - 1.0) * (m + 1.0)))
        q = 1.0 - sp
        return (2.0 * m**q - (m - 1.0) ** q - (m + 1.0) ** q) / (sp * q)
    from scipy.integrate import quad

    d1, d2 = abs(delta[0]), abs(delta[1])
    corners = []
    for z1 in (d1 - 1.0, d1, d1 + 1.0):
        for z2 in (d2 - 1.0, d2, d2 + 1.0):
            if z1 != 0.0 or z2 != 0.0:
                corners.append(math.atan2(z2, z1) % (2.0 * math.pi))
    pts = sorted({0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi, *corners})
    val, _ = quad(
        lambda th: _overlap_radial(sp, (d1, d2), th),
        0.0, 2.0 * math.pi, points=pts, limit=400,
        epsabs=0.0, epsrel=rel_tol,
    )
    return val


def unit_offset_weight(dim: int, sp: float, delta: tuple[int, ...]) -> float:
    """Radial weight at unit spacing: near-field pair integral with midpoint
    fallback where that integral diverges; midpoint rule in the far field."""
    sup = max(abs(d) for d in delta)
    if sup == 0:
        raise DomainError("zero offset has no pair weight")
    r2 = float(sum(d * d for d in delta))
    midpoint = r2 ** (-0.5 * (dim + sp))
    if sup > NEAR_RADIUS:
        return midpoint
    try:
        return unit_pair_integral(dim, sp, tuple(abs(int(d)) for d in delta))
    except ContractError:
        return midpoint


@dataclass
class WeightTable:
    """Discrete interaction weights for one kernel on one lattice.

    radial: 1D shape (M,) indexed by |delta| (entry 0 unused);
            2D shape (M, M) indexed by (|d1|, |d2|) (entry (0,0) unused).
    tails: shape (N,) exterior weights per node, multiplier included.
    """

    spec: KernelSpec
    lattice: Lattice
    radial: FloatArray
    tails: FloatArray
    near_radius: int = NEAR_RADIUS
    _mult_flat: FloatArray | None = field(default=None, repr=False)

    @property
    def h(self) -> float:
        return self.lattice.h

    def offset_weight(self, delta) -> float:
        """Radial pair weight for an integer offset (scalar in 1D, pair in 2D)."""
        if self.lattice.dim == 1:
            m = abs(int(np.atleast_1d(delta)[0]))
            if m == 0:
                raise DomainError("zero offset has no pair weight")
            if m >= self.lattice.cells:
                raise DomainError(f"offset {m} exceeds the lattice")
            return float(self.radial[m])
        d1, d2 = (abs(int(v)) for v in delta)
        if d1 == 0 and d2 == 0:
            raise DomainError("zero offset has no pair weight")
        if d1 >= self.lattice.cells or d2 >= self.lattice.cells:
            raise DomainError(f"offset {(d1, d2)} exceeds the lattice")
        return float(self.radial[d1, d2])

    def offsets(self) -> list[tuple[int, ...]]:
        """Canonical enumeration of distinct offsets (one per unordered pair)."""
        return _offset_list(self.lattice)

    def tail_weight(self, node: int) -> float:
        return float(self.tails[node])

    def has_multiplier(self) -> bool:
        return self.spec.multiplier is not None

    def multiplier_values(self, i_idx: NDArray, j_idx: NDArray) -> FloatArray:
        """a(x_i, x_j) for index arrays, 1.0 when no multiplier is set."""
        if self.spec.multiplier is None:
            return np.ones(np.broadcast(i_idx, j_idx).shape)
        coords = self.lattice.node_coords()
        return np.asarray(self.spec.multiplier(coords[i_idx], coords[j_idx]), dtype=float)

    def multiplier_flat(self) -> FloatArray | None:
        """Per-pair multiplier factors in canonical offset order (see
        _pairsum offset enumeration); None when a == 1.  Built lazily and
        cached; the layout is the concatenation over offsets of the valid
        pair values, matching offset_starts()."""
        if self.spec.multiplier is None:
            return None
        if self._mult_flat is None:
            self._mult_flat = _build_multiplier_flat(self)
        return self._mult_flat


def _offset_list(lattice: Lattice) -> list[tuple[int, ...]]:
    """Canonical half-space offset enumeration: every unordered node pair is
    visited exactly once.  Same order as the pair-sum kernels."""
    from . import _pairsum

    if lattice.dim == 1:
        return _pairsum.offsets_1d(lattice.cells)
    return _pairsum.offsets_2d(lattice.cells)


def _build_multiplier_flat(table: WeightTable) -> FloatArray:
    from . import _pairsum

    lat = table.lattice
    coords = lat.node_coords()
    if lat.dim == 1:
        flat = _pairsum.multiplier_flat_1d(table.spec.multiplier, coords, lat.cells)
    else:
        flat = _pairsum.multiplier_flat_2d(table.spec.multiplier, coords, lat.cells)
    lam = table.spec.lam
    if flat.min() < 1.0 / lam - 1e-9 or flat.max() > lam + 1e-9:
        raise ConfigError("multiplier leaves the ellipticity band [1/lam, lam]")
    return flat


def tail_weight_1d_closed(sp: float, lo: float, hi: float, x: FloatArray) -> FloatArray:
    """Closed-form 1D exterior tail ((hi-x)^{-sp} + (x-lo)^{-sp}) / sp."""
    return ((hi - x) ** -sp + (x - lo) ** -sp) / sp


def _tails_1d(spec: KernelSpec, lattice: Lattice) -> FloatArray:
    x = lattice.axis_nodes(0)
    lo, hi = lattice.lo[0], lattice.hi[0]
    if spec.multiplier is None:
        return tail_weight_1d_closed(spec.sp, lo, hi, x)
    return _tails_1d_points(spec, lo, hi, x)


def _tails_1d_points(spec: KernelSpec, lo: float, hi: float, x: FloatArray) -> FloatArray:
    # substitution d = dist * t^{-1/sp}, t in (0, 1], turns each half-line
    # integral into (dist^{-sp}/sp) int_0^1 a(x, x +- d(t)) dt
    sp = spec.sp

    def evaluate(q: int) -> FloatArray:
        t, wts = np.polynomial.legendre.leggauss(q)
        t = 0.5 * (t + 1.0)
        wts = 0.5 * wts
        out = np.zeros_like(x)
        for sign, edge in ((1.0, hi), (-1.0, lo)):
            dist = np.abs(edge - x)[:, None]
            y = x[:, None] + sign * dist * t[None, :] ** (-1.0 / sp)
            xa = np.broadcast_to(x[:, None, None], (*y.shape, 1))
            a = np.asarray(spec.multiplier(xa, y[..., None]), dtype=float)
            a = a.reshape(y.shape)
            out += (dist[:, 0] ** -sp / sp) * np.sum(a * wts[None, :], axis=1)
        return out

    q = 64
    prev = evaluate(q)
    for _ in range(3):
        q *= 2
        cur = evaluate(q)
        if np.allclose(cur, prev, rtol=1e-8, atol=1e-14):
            return cur
        prev = cur
    return prev


def _ray_exit_distance(lo: np.ndarray, hi: np.ndarray, x: FloatArray, theta: FloatArray) -> FloatArray:
    """Distance from interior points x (N,2) to the box wall along each angle
    theta (...,): result shape (N,) + theta.shape broadcast."""
    c, s = np.cos(theta), np.sin(theta)
    with np.errstate(divide="ignore"):
        tx = np.where(c > 0, (hi[0] - x[:, :1]) / c, np.where(c < 0, (lo[0] - x[:, :1]) / c, np.inf))
        ty = np.where(s > 0, (hi[1] - x[:, 1:2]) / s, np.where(s < 0, (lo[1] - x[:, 1:2]) / s, np.inf))
    return np.minimum(tx, ty)


def _tails_2d(spec: KernelSpec, lattice: Lattice, rel_tol: float = 1e-7) -> FloatArray:
    return _tails_2d_points(spec, np.asarray(lattice.lo), np.asarray(lattice.hi),
                            lattice.node_coords(), rel_tol)


def _tails_2d_points(spec: KernelSpec, lo: np.ndarray, hi: np.ndarray,
                     coords: FloatArray, rel_tol: float = 1e-7) -> FloatArray:
    """Polar reduction: T(x) = (1/sp) int rho(theta)^{-sp} dtheta, with the
    multiplier (when present) handled by an exact radial substitution."""
    sp = spec.sp
    corners = np.array([[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]])
    # per node, split the circle at the four corner angles; integrand is
    # analytic inside each arc
    ang = np.stack([np.arctan2(c[1] - coords[:, 1], c[0] - coords[:, 0]) for c in corners], axis=1)
    ang = np.sort(np.mod(ang, 2.0 * math.pi), axis=1)
    arcs = np.concatenate([ang, ang[:, :1] + 2.0 * math.pi], axis=1)  # (N, 5)

    def evaluate(q: int) -> FloatArray:
        t, wts = np.polynomial.legendre.leggauss(q)
        out = np.zeros(coords.shape[0])
        for a in range(4):
            th0 = arcs[:, a][:, None]
            th1 = arcs[:, a + 1][:, None]
            half = 0.5 * (th1 - th0)
            mid = 0.5 * (th1 + th0)
            theta = mid + half * t[None, :]
            rho = _ray_exit_distance(lo, hi, coords, theta)
            if spec.multiplier is None:
                vals = rho**-sp / sp
            else:
                # substitution r = rho * u^{-1/sp}: the radial factor becomes
                # (rho^{-sp}/sp) int_0^1 a(x, x + r(u) e_theta) du
                u, wu = np.polynomial.legendre.leggauss(32)
                u = 0.5 * (u + 1.0)
                wu = 0.5 * wu
                r = rho[..., None] * u[None, None, :] ** (-1.0 / sp)
                y = np.stack(
                    [coords[:, 0, None, None] + r * np.cos(theta)[..., None],
                     coords[:, 1, None, None] + r * np.sin(theta)[..., None]],
                    axis=-1,
                )
                xa = np.broadcast_to(coords[:, None, None, :], y.shape)
                aval = np.asarray(spec.multiplier(xa, y), dtype=float).reshape(r.shape)
                vals = rho**-sp / sp * np.sum(aval * wu[None, None, :], axis=-1)
            out += np.sum(vals * (half * wts[None, :]), axis=1)
        return out

    q = 48
    prev = evaluate(q)
    for _ in range(3):
        q *= 2
        cur = evaluate(q)
        if np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-300)) < rel_tol:
            return cur
        prev = cur
    return prev


def build_weight_table(spec: KernelSpec, lattice: Lattice) -> WeightTable:
    """Assemble the radial weight array and per-node tails for a lattice."""
    if spec.dim != lattice.dim:
        raise ConfigError(f"kernel dim {spec.dim} does not match lattice dim {lattice.dim}")
    M = lattice.cells
    h = lattice.h
    scale = h ** (lattice.dim - spec.sp)
    if lattice.dim == 1:
        m = np.arange(M, dtype=float)
        radial = np.zeros(M)
        with np.errstate(divide="ignore"):
            radial[1:] = m[1:] ** -(1.0 + spec.sp)
        for mm in (1, 2):
            radial[mm] = unit_offset_weight(1, spec.sp, (mm,))
        radial *= scale
        # stored tails integrate x over its cell (collapsed to the center),
        # hence the cell measure on top of the exterior point integral
        tails = h ** lattice.dim * _tails_1d(spec, lattice)
    else:
        d1 = np.arange(M, dtype=float)[:, None]
        d2 = np.arange(M, dtype=float)[None, :]
        r2 = d1 * d1 + d2 * d2
        with np.errstate(divide="ignore"):
            radial = r2 ** (-0.5 * (2.0 + spec.sp))
        radial[0, 0] = 0.0
        for dx in range(0, NEAR_RADIUS + 1):
            for dy in range(0, NEAR_RADIUS + 1):
                if dx == 0 and dy == 0:
                    continue
                radial[dx, dy] = unit_offset_weight(2, spec.sp, (dx, dy))
        radial *= scale
        tails = h ** lattice.dim * _tails_2d(spec, lattice)
    return WeightTable(spec=spec, lattice=lattice, radial=radial, tails=np.asarray(tails))


def offset_weight(spec: KernelSpec, h: float, delta) -> float:
    """Physical pair weight at spacing h: the unit-lattice weight scaled by
    h^{dim - sp} (equivalently h^{2 dim} k(0, h delta) in the far field).
    The translation-invariant radial part only; multipliers enter separately."""
    if h <= 0.0:
        raise DomainError(f"spacing must be positive, got {h}")
    d = tuple(int(v) for v in np.atleast_1d(delta))
    if len(d) != spec.dim:
        raise DomainError(f"offset {d} has wrong dimension for dim={spec.dim}")
    if all(v == 0 for v in d):
        raise DomainError("zero offset has no pair weight")
    return h ** (spec.dim - spec.sp) * unit_offset_weight(spec.dim, spec.sp, d)


def tail_weight(spec: KernelSpec, lattice: Lattice, x) -> float:
    """Exterior weight int_{R^dim \\ box} k(x, y) dy for a point strictly
    inside the box (multiplier included when present)."""
    pt = np.asarray(x, dtype=float).reshape(-1)
    if pt.shape[0] != lattice.dim:
        raise DomainError(f"point {pt.tolist()} has wrong dimension")
    lo = np.asarray(lattice.lo)
    hi = np.asarray(lattice.hi)
    if np.any(pt <= lo) or np.any(pt >= hi):
        raise DomainError(f"point {pt.tolist()} is not strictly inside the box")
    if lattice.dim == 1:
        if spec.multiplier is None:
            return float(tail_weight_1d_closed(spec.sp, lo[0], hi[0], pt)[0])
        return float(_tails_1d_points(spec, lo[0], hi[0], pt)[0])
    return float(_tails_2d_points(spec, lo, hi, pt.reshape(1, 2))[0])
