"""Low-level O(N^2) pair sums over lattice offsets.

Every unordered node pair is visited exactly once through a canonical offset
enumeration (1D: m = 1..M-1; 2D: dx = 0 with dy > 0, then dx >= 1 with any
dy).  The optional per-pair multiplier array follows the same enumeration,
concatenated offset by offset, so kernels index it with a running cursor.

Numba compiles the hot loops when available; a pure-numpy per-offset path
provides the same semantics otherwise (set FRACBOUNDARY_NO_NUMBA=1 to force
it).  All loops run in a fixed order, so results are bit-deterministic and
independent of any worker-pool configuration above them.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

_USE_NUMBA = os.environ.get("FRACBOUNDARY_NO_NUMBA", "") != "1"
if _USE_NUMBA:
    try:
        import numba
        from numba import njit
    except ImportError:  # pragma: no cover
        _USE_NUMBA = False

if not _USE_NUMBA:  # identity decorator stand-in
    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap if not (args and callable(args[0])) else args[0]


def offsets_1d(cells: int) -> list[tuple[int, ...]]:
    return [(m,) for m in range(1, cells)]


def offsets_2d(cells: int) -> list[tuple[int, int]]:
    out = [(0, dy) for dy in range(1, cells)]
    for dx in range(1, cells):
        for dy in range(-(cells - 1), cells):
            out.append((dx, dy))
    return out


def offset_bounds_2d(cells: int, dx: int, dy: int) -> tuple[int, int, int, int]:
    """Valid (ix0, ix1, iy0, iy1) for pairs (ix,iy) -> (ix+dx, iy+dy)."""
    return 0, cells - dx, max(0, -dy), cells - max(0, dy)


def multiplier_flat_1d(mult, coords: FloatArray, cells: int) -> FloatArray:
    chunks = [np.asarray(mult(coords[:-m], coords[m:]), dtype=float).reshape(-1)
              for m in range(1, cells)]
    return np.ascontiguousarray(np.concatenate(chunks))


def multiplier_flat_2d(mult, coords: FloatArray, cells: int) -> FloatArray:
    grid = coords.reshape(cells, cells, 2)
    chunks = []
    for dx, dy in offsets_2d(cells):
        ix0, ix1, iy0, iy1 = offset_bounds_2d(cells, dx, dy)
        a = grid[ix0:ix1, iy0:iy1].reshape(-1, 2)
        b = grid[ix0 + dx:ix1 + dx, iy0 + dy:iy1 + dy].reshape(-1, 2)
        chunks.append(np.asarray(mult(a, b), dtype=float).reshape(-1))
    return np.ascontiguousarray(np.concatenate(chunks))


# ---------------------------------------------------------------------------
# numba kernels (1D)

@njit(cache=True)
def _abs_pow(t: float, p: float) -> float:
    a = abs(t)
    if p == 2.0:
        return a * a
    if p == 3.0:
        return a * a * a
    if p == 2.5:
        return a * a * np.sqrt(a)
    if p == 1.5:
        return a * np.sqrt(a)
    return a**p


@njit(cache=True)
def _phi(t: float, p: float) -> float:
    """|t|^{p-2} t, the odd signed power driving the gradient."""
    if t == 0.0:
        return 0.0
    a = abs(t)
    if p == 2.0:
        return t
    if p == 3.0:
        return a * t
    if p == 2.5:
        return np.sqrt(a) * t
    if p == 1.5:
        return t / np.sqrt(a)
    return a ** (p - 2.0) * t


@njit(cache=True)
def _energy_1d(u, w, p, mult, use_mult):
    n = u.shape[0]
    total = 0.0
    cursor = 0
    for m in range(1, n):
        wm = w[m]
        if use_mult:
            for i in range(n - m):
                total += wm * mult[cursor + i] * _abs_pow(u[i] - u[i + m], p)
            cursor += n - m
        else:
            acc = 0.0
            for i in range(n - m):
                acc += _abs_pow(u[i] - u[i + m], p)
            total += wm * acc
    return total


@njit(cache=True)
def _grad_1d(u, w, p, mult, use_mult, out):
    n = u.shape[0]
    cursor = 0
    for m in range(1, n):
        wm = w[m]
        for i in range(n - m):
            e = wm * _phi(u[i] - u[i + m], p)
            if use_mult:
                e *= mult[cursor + i]
            out[i] += 2.0 * e
            out[i + m] -= 2.0 * e
        if use_mult:
            cursor += n - m


@njit(cache=True)
def _rowsum_1d(w, n, mult, use_mult, out):
    cursor = 0
    for m in range(1, n):
        wm = w[m]
        for i in range(n - m):
            v = wm
            if use_mult:
                v *= mult[cursor + i]
            out[i] += v
            out[i + m] += v
        if use_mult:
            cursor += n - m


@njit(cache=True)
def _matvec_1d(u, w, mult, use_mult, out):
    """out_i += sum_j w_ij a_ij (u_i - u_j) over all pairs (linear case)."""
    n = u.shape[0]
    cursor = 0
    for m in range(1, n):
        wm = w[m]
        for i in range(n - m):
            v = wm
            if use_mult:
                v *= mult[cursor + i]
            d = v * (u[i] - u[i + m])
            out[i] += d
            out[i + m] -= d
        if use_mult:
            cursor += n - m


# ---------------------------------------------------------------------------
# numba kernels (2D) - flat C-order arrays, offsets enumerated like offsets_2d

@njit(cache=True)
def _energy_2d(u, radial, cells, p, mult, use_mult):
    total = 0.0
    cursor = 0
    for dx in range(0, cells):
        dy_lo = 1 if dx == 0 else -(cells - 1)
        for dy in range(dy_lo, cells):
            w = radial[dx, abs(dy)]
            iy0 = -dy if dy < 0 else 0
            iy1 = cells - (dy if dy > 0 else 0)
            jump = dx * cells + dy
            for ix in range(0, cells - dx):
                base = ix * cells
                for iy in range(iy0, iy1):
                    i = base + iy
                    t = _abs_pow(u[i] - u[i + jump], p)
                    if use_mult:
                        t *= mult[cursor]
                        cursor += 1
                    total += w * t
    return total


@njit(cache=True)
def _grad_2d(u, radial, cells, p, mult, use_mult, out):
    cursor = 0
    for dx in range(0, cells):
        dy_lo = 1 if dx == 0 else -(cells - 1)
        for dy in range(dy_lo, cells):
            w = radial[dx, abs(dy)]
            iy0 = -dy if dy < 0 else 0
            iy1 = cells - (dy if dy > 0 else 0)
            jump = dx * cells + dy
            for ix in range(0, cells - dx):
                base = ix * cells
                for iy in range(iy0, iy1):
                    i = base + iy
                    e = w * _phi(u[i] - u[i + jump], p)
                    if use_mult:
                        e *= mult[cursor]
                        cursor += 1
                    out[i] += 2.0 * e
                    out[i + jump] -= 2.0 * e


@njit(cache=True)
def _rowsum_2d(radial, cells, mult, use_mult, out):
    cursor = 0
    for dx in range(0, cells):
        dy_lo = 1 if dx == 0 else -(cells - 1)
        for dy in range(dy_lo, cells):
            w = radial[dx, abs(dy)]
            iy0 = -dy if dy < 0 else 0
            iy1 = cells - (dy if dy > 0 else 0)
            jump = dx * cells + dy
            for ix in range(0, cells - dx):
                base = ix * cells
                for iy in range(iy0, iy1):
                    i = base + iy
                    v = w
                    if use_mult:
                        v *= mult[cursor]
                        cursor += 1
                    out[i] += v
                    out[i + jump] += v


@njit(cache=True)
def _matvec_2d(u, radial, cells, mult, use_mult, out):
    cursor = 0
    for dx in range(0, cells):
        dy_lo = 1 if dx == 0 else -(cells - 1)
        for dy in range(dy_lo, cells):
            w = radial[dx, abs(dy)]
            iy0 = -dy if dy < 0 else 0
            iy1 = cells - (dy if dy > 0 else 0)
            jump = dx * cells + dy
            for ix in range(0, cells - dx):
                base = ix * cells
                for iy in range(iy0, iy1):
                    i = base + iy
                    v = w
                    if use_mult:
                        v *= mult[cursor]
                        cursor += 1
                    d = v * (u[i] - u[i + jump])
                    out[i] += d
                    out[i + jump] -= d


# ---------------------------------------------------------------------------
# numpy fallback paths

def _np_phi(t: FloatArray, p: float) -> FloatArray:
    if p == 2.0:
        return t
    a = np.abs(t)
    if p == 3.0:
        return a * t
    if p == 2.5:
        return np.sqrt(a) * t
    if p == 1.5:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = t / np.sqrt(a)
        return np.where(t == 0.0, 0.0, out)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a ** (p - 2.0) * t
    return np.where(t == 0.0, 0.0, out)


def _np_pairs_1d(u, w, p, mult, mode, out=None):
    n = u.shape[0]
    total = 0.0
    cursor = 0
    for m in range(1, n):
        du = u[:-m] - u[m:] if u is not None else None
        if mode == "energy":
            t = np.abs(du) ** p if p not in (2.0,) else du * du
            if mult is not None:
                t = t * mult[cursor:cursor + n - m]
            total += w[m] * np.sum(t)
        else:
            if mode == "grad":
                e = w[m] * _np_phi(du, p)
            elif mode == "matvec":
                e = w[m] * du
            else:  # rowsum
                e = np.full(n - m, w[m])
            if mult is not None:
                e = e * mult[cursor:cursor + n - m]
            if mode == "grad":
                out[: n - m] += 2.0 * e
                out[m:] -= 2.0 * e
            elif mode == "matvec":
                out[: n - m] += e
                out[m:] -= e
            else:
                out[: n - m] += e
                out[m:] += e
        cursor += n - m
    return total


def _np_pairs_2d(u2, radial, cells, p, mult, mode, out2=None):
    total = 0.0
    cursor = 0
    for dx, dy in offsets_2d(cells):
        ix0, ix1, iy0, iy1 = offset_bounds_2d(cells, dx, dy)
        w = radial[dx, abs(dy)]
        ua = u2[ix0:ix1, iy0:iy1] if u2 is not None else None
        ub = u2[ix0 + dx:ix1 + dx, iy0 + dy:iy1 + dy] if u2 is not None else None
        count = (ix1 - ix0) * (iy1 - iy0)
        mseg = mult[cursor:cursor + count].reshape(ix1 - ix0, iy1 - iy0) if mult is not None else None
        cursor += count
        if mode == "energy":
            t = np.abs(ua - ub) ** p if p != 2.0 else (ua - ub) ** 2
            if mseg is not None:
                t = t * mseg
            total += w * np.sum(t)
            continue
        if mode == "grad":
            e = w * _np_phi(ua - ub, p)
            scale = 2.0
        elif mode == "matvec":
            e = w * (ua - ub)
            scale = 1.0
        else:
            e = np.full((ix1 - ix0, iy1 - iy0), w)
            scale = 1.0
        if mseg is not None:
            e = e * mseg
        if mode == "rowsum":
            out2[ix0:ix1, iy0:iy1] += e
            out2[ix0 + dx:ix1 + dx, iy0 + dy:iy1 + dy] += e
        else:
            out2[ix0:ix1, iy0:iy1] += scale * e
            out2[ix0 + dx:ix1 + dx, iy0 + dy:iy1 + dy] -= scale * e
    return total


# ---------------------------------------------------------------------------
# public API: unordered pair sums over the whole box

_EMPTY = np.zeros(0)


def pair_energy(u: FloatArray, radial: FloatArray, cells: int, dim: int, p: float,
                mult: FloatArray | None) -> float:
    """sum over unordered pairs of w_ij a_ij |u_i - u_j|^p."""
    if _USE_NUMBA:
        if dim == 1:
            return float(_energy_1d(u, radial, p, mult if mult is not None else _EMPTY,
                                    mult is not None))
        return float(_energy_2d(u, radial, cells, p,
                                mult if mult is not None else _EMPTY, mult is not None))
    if dim == 1:
        return float(_np_pairs_1d(u, radial, p, mult, "energy"))
    return float(_np_pairs_2d(u.reshape(cells, cells), radial, cells, p, mult, "energy"))


def pair_gradient(u: FloatArray, radial: FloatArray, cells: int, dim: int, p: float,
                  mult: FloatArray | None) -> FloatArray:
    """d/du_i of the ordered pair energy: 2 sum_j w a phi_p(u_i - u_j)."""
    out = np.zeros_like(u)
    if _USE_NUMBA:
        if dim == 1:
            _grad_1d(u, radial, p, mult if mult is not None else _EMPTY,
                     mult is not None, out)
        else:
            _grad_2d(u, radial, cells, p, mult if mult is not None else _EMPTY,
                     mult is not None, out)
        return out
    if dim == 1:
        _np_pairs_1d(u, radial, p, mult, "grad", out)
    else:
        o2 = out.reshape(cells, cells)
        _np_pairs_2d(u.reshape(cells, cells), radial, cells, p, mult, "grad", o2)
    return out


def pair_rowsums(radial: FloatArray, cells: int, dim: int,
                 mult: FloatArray | None) -> FloatArray:
    """S_i = sum_{j != i} w_ij a_ij over the box."""
    n = cells**dim
    out = np.zeros(n)
    if _USE_NUMBA:
        if dim == 1:
            _rowsum_1d(radial, cells, mult if mult is not None else _EMPTY,
                       mult is not None, out)
        else:
            _rowsum_2d(radial, cells, mult if mult is not None else _EMPTY,
                       mult is not None, out)
        return out
    if dim == 1:
        _np_pairs_1d(None, radial, 2.0, mult, "rowsum", out)
    else:
        _np_pairs_2d(None, radial, cells, 2.0, mult, "rowsum", out.reshape(cells, cells))
    return out


def pair_matvec(u: FloatArray, radial: FloatArray, cells: int, dim: int,
                mult: FloatArray | None) -> FloatArray:
    """(L u)_i = sum_j w_ij a_ij (u_i - u_j), the p = 2 linear operator."""
    out = np.zeros_like(u)
    if _USE_NUMBA:
        if dim == 1:
            _matvec_1d(u, radial, mult if mult is not None else _EMPTY,
                       mult is not None, out)
        else:
            _matvec_2d(u, radial, cells, mult if mult is not None else _EMPTY,
                       mult is not None, out)
        return out
    if dim == 1:
        _np_pairs_1d(u, radial, 2.0, mult, "matvec", out)
    else:
        _np_pairs_2d(u.reshape(cells, cells), radial, cells, 2.0, mult, "matvec",
                     out.reshape(cells, cells))
    return out


def signed_power(t: FloatArray, p: float) -> FloatArray:
    """Vectorized |t|^{p-2} t used by residual and pairing helpers."""
    return _np_phi(np.asarray(t, dtype=float), p)
