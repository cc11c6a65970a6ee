"""Dirichlet solver and capacitary potentials by convex minimization.

The discrete problem: minimize J(u) = (pair_energy + tail_energy)/p over
fields that take prescribed values on constrained nodes and the constant
g_inf outside the box.  J is strictly convex (positive weights connect every
node pair, and every node couples to the exterior), so the minimizer is
unique and characterized by a zero gradient on free nodes.

Three interchangeable paths produce it:
  * p = 2, small free set: one dense SPD solve.
  * p = 2, large lattice, no multiplier: conjugate gradients with the
    translation-invariant pair sum applied by FFT convolution.
  * otherwise: Jacobi-preconditioned nonlinear conjugate gradients (PR+,
    Armijo backtracking with interpolation).

Stopping is relative: sup-norm of the free gradient <= tol times the same
norm at the deterministic mean-of-data initialization.  All paths are
deterministic for a fixed configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _pairsum
from .domains import DataSpec, DomainMask, edge_layer
from .energy import Field, energy_total, full_gradient
from .errors import ContractError, DomainError
from .kernel import WeightTable

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.intp]


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-8
    max_iter: int = 20000
    method: str = "auto"        # auto | linear | nlcg
    init: str = "mean"          # mean | random | warm
    warm_values: FloatArray | None = None
    seed: int = 0
    dense_limit: int = 6000


@dataclass
class SolveReport:
    solution: Field
    iterations: int
    final_gradient_norm: float
    energy: float
    converged: bool
    method: str = ""
    reference_gradient_norm: float = 0.0


# ---------------------------------------------------------------------------
# FFT pair-sum application (p = 2, multiplier-free)

def _symmetric_kernel(table: WeightTable) -> FloatArray:
    M = table.lattice.cells
    idx = np.abs(np.arange(-(M - 1), M))
    if table.lattice.dim == 1:
        return table.radial[idx]
    return table.radial[idx[:, None], idx[None, :]]


def _conv_apply(kern: FloatArray, v: FloatArray, cells: int, dim: int) -> FloatArray:
    """(W * v)_i = sum_j w(|i-j|) v_j over the box, by FFT convolution."""
    from scipy.signal import fftconvolve

    if dim == 1:
        return fftconvolve(v, kern, mode="same")
    out = fftconvolve(v.reshape(cells, cells), kern, mode="same")
    return out.reshape(-1)


def linear_gradient_fft(table: WeightTable, u: Field) -> FloatArray:
    """dJ/du for p = 2 without multiplier via convolution; must agree with
    full_gradient to high accuracy (tested)."""
    if table.spec.p != 2.0 or table.has_multiplier():
        raise ContractError("the convolution gradient needs p = 2 and no multiplier")
    lat = table.lattice
    kern = _symmetric_kernel(table)
    s = _conv_apply(kern, np.ones(lat.n_nodes), lat.cells, lat.dim)
    wu = _conv_apply(kern, u.values, lat.cells, lat.dim)
    return 2.0 * (s * u.values - wu) + 2.0 * table.tails * (u.values - u.g_inf)


# ---------------------------------------------------------------------------
# shared pieces

def _mean_init(values: FloatArray, free_idx: IntArray) -> FloatArray:
    out = values.copy()
    cons = np.ones(values.shape[0], dtype=bool)
    cons[free_idx] = False
    vc = values[cons]
    # identical data must give the exactly constant field, not the rounded
    # mean, so the stationary shortcut can fire on it
    out[free_idx] = float(vc[0]) if vc.min() == vc.max() else float(np.mean(vc))
    return out


def _initial_values(table: WeightTable, free_idx: IntArray, values: FloatArray,
                    g_inf: float, opts: SolveOptions) -> FloatArray:
    if opts.init == "mean":
        return _mean_init(values, free_idx)
    if opts.init == "random":
        cons = np.ones(values.shape[0], dtype=bool)
        cons[free_idx] = False
        lo = min(float(values[cons].min()), g_inf)
        hi = max(float(values[cons].max()), g_inf)
        rng = np.random.default_rng(opts.seed)
        out = values.copy()
        out[free_idx] = rng.uniform(lo, hi, size=free_idx.shape[0])
        return out
    if opts.init == "warm":
        if opts.warm_values is None:
            raise ContractError("init='warm' needs warm_values")
        out = values.copy()
        out[free_idx] = np.asarray(opts.warm_values, dtype=float)[free_idx]
        return out
    raise ContractError(f"unknown init {opts.init!r}")


def _grad_evaluator(table: WeightTable, use_fft: bool, lp_mass: float = 0.0):
    base = linear_gradient_fft if use_fft else full_gradient
    if lp_mass == 0.0:
        return lambda u: base(table, u)
    p = table.spec.p
    return lambda u: base(table, u) + lp_mass * _pairsum.signed_power(u.values, p)


# ---------------------------------------------------------------------------
# p = 2 linear paths

def _pair_matrix(table: WeightTable, free_idx: IntArray) -> FloatArray:
    """Dense (n_free, n_nodes) base pair weights w_ij a_ij."""
    lat = table.lattice
    cols = np.arange(lat.n_nodes)
    if lat.dim == 1:
        w = table.radial[np.abs(free_idx[:, None] - cols[None, :])]
    else:
        M = lat.cells
        fx, fy = np.divmod(free_idx, M)
        cx, cy = np.divmod(cols, M)
        w = table.radial[np.abs(fx[:, None] - cx[None, :]),
                         np.abs(fy[:, None] - cy[None, :])]
    if table.has_multiplier():
        w = w * table.multiplier_values(free_idx[:, None], cols[None, :])
    return w


def _weighted_linear_step(w: FloatArray, t: FloatArray, free_idx: IntArray,
                          values: FloatArray, g_inf: float,
                          lp_diag: FloatArray | float = 0.0) -> FloatArray:
    """Solve the SPD stationarity system for pair weights w, tail weights t
    and a zero-anchored diagonal term lp_diag:
    (S_i + t_i + lp_i) u_i - sum_j w_ij u_j = sum_cons w_ij g_j + t_i g_inf."""
    from scipy.linalg import solve as la_solve

    nf = free_idx.shape[0]
    s = w.sum(axis=1)
    a = -w[:, free_idx]
    a[np.arange(nf), np.arange(nf)] += s + t + lp_diag
    cons = np.ones(values.shape[0], dtype=bool)
    cons[free_idx] = False
    b = w[:, cons] @ values[cons] + t * g_inf
    return la_solve(a, b, assume_a="pos")


def _dense_solve(table: WeightTable, free_idx: IntArray, values: FloatArray,
                 g_inf: float, lp_mass: float = 0.0) -> FloatArray:
    w = _pair_matrix(table, free_idx)
    t = table.tails[free_idx]
    out = values.copy()
    # the system is the half-gradient; pair/tail weights already carry the
    # ordered-pair factor two, the single-integral lp term does not
    out[free_idx] = _weighted_linear_step(w, t, free_idx, values, g_inf,
                                          lp_diag=0.5 * lp_mass)
    return out


def _cg_solve(table: WeightTable, free_idx: IntArray, values: FloatArray,
              g_inf: float, x0_full: FloatArray, target: float,
              max_iter: int, lp_mass: float = 0.0) -> tuple[FloatArray, int, bool]:
    from scipy.sparse.linalg import LinearOperator, cg

    lat = table.lattice
    n = lat.n_nodes
    kern = _symmetric_kernel(table)
    s_all = _conv_apply(kern, np.ones(n), lat.cells, lat.dim)
    t_free = table.tails[free_idx]
    diag = s_all[free_idx] + t_free + 0.5 * lp_mass

    def matvec(v: FloatArray) -> FloatArray:
        full = np.zeros(n)
        full[free_idx] = v
        wv = _conv_apply(kern, full, lat.cells, lat.dim)
        return diag * v - wv[free_idx]

    ghat = values.copy()
    ghat[free_idx] = 0.0
    b = _conv_apply(kern, ghat, lat.cells, lat.dim)[free_idx] + t_free * g_inf
    op = LinearOperator((free_idx.size, free_idx.size), matvec=matvec)
    prec = LinearOperator((free_idx.size, free_idx.size), matvec=lambda v: v / diag)

    grad_of = _grad_evaluator(table, use_fft=True, lp_mass=lp_mass)
    x = x0_full[free_idx].copy()
    iters = 0
    rtol = 1e-10
    for _ in range(4):
        counter = [0]

        def count(_xk):
            counter[0] += 1

        budget = max(1, max_iter - iters)
        try:
            x, _info = cg(op, b, x0=x, rtol=rtol, atol=0.0, maxiter=budget,
                          M=prec, callback=count)
        except TypeError:  # older scipy spells the relative tolerance `tol`
            x, _info = cg(op, b, x0=x, tol=rtol, atol=0.0, maxiter=budget,
                          M=prec, callback=count)
        iters += counter[0]
        full = values.copy()
        full[free_idx] = x
        gn = float(np.max(np.abs(grad_of(Field(lat, full, g_inf))[free_idx])))
        if gn <= target or iters >= max_iter:
            return full, iters, gn <= target
        rtol = max(rtol * 1e-2, 1e-15)
    return full, iters, gn <= target


# ---------------------------------------------------------------------------
# iteratively reweighted least squares (the 1 < p < 2 workhorse)

def _irls(table: WeightTable, free_idx: IntArray, values: FloatArray,
          g_inf: float, u0: FloatArray, target: float,
          max_iter: int, lp_mass: float = 0.0) -> tuple[FloatArray, int, float, bool]:
    """Majorize |t|^p by the quadratic (p/2)(t0^2+eps^2)^{(p-2)/2} t^2 + c and
    minimize exactly; shrink eps on a ladder.  Monotone for p < 2."""
    lat = table.lattice
    p = table.spec.p
    w_base = _pair_matrix(table, free_idx)
    t_base = table.tails[free_idx]
    grad_of = _grad_evaluator(table, use_fft=False, lp_mass=lp_mass)
    u = u0.copy()
    cons = np.ones(values.shape[0], dtype=bool)
    cons[free_idx] = False
    scale = max(float(np.max(np.abs(values[cons]))), abs(g_inf), 1e-12)
    iters = 0
    gn = np.inf
    eps = 0.1 * scale
    while eps > 1e-14 * scale and iters < max_iter:
        for _inner in range(8):
            du = u[free_idx][:, None] - u[None, :]
            wp = w_base * (du * du + eps * eps) ** (0.5 * (p - 2.0))
            reg = eps * eps
            wt = t_base * ((u[free_idx] - g_inf) ** 2 + reg) ** (0.5 * (p - 2.0))
            wl = 0.5 * lp_mass * (u[free_idx] ** 2 + reg) ** (0.5 * (p - 2.0)) \
                if lp_mass else 0.0
            new = _weighted_linear_step(wp, wt, free_idx, values, g_inf,
                                        lp_diag=wl)
            step = float(np.max(np.abs(new - u[free_idx])))
            u[free_idx] = new
            iters += 1
            if step <= 1e-3 * eps or iters >= max_iter:
                break
        gn = float(np.max(np.abs(grad_of(Field(lat, u, g_inf))[free_idx])))
        if gn <= target:
            return u, iters, gn, True
        eps *= 0.1
    return u, iters, gn, gn <= target


# ---------------------------------------------------------------------------
# nonlinear conjugate gradients

def _objective(table: WeightTable, u_full: FloatArray, g_inf: float,
               lp_mass: float = 0.0) -> float:
    lat = table.lattice
    p = table.spec.p
    pair = 2.0 * _pairsum.pair_energy(u_full, table.radial, lat.cells, lat.dim, p,
                                      table.multiplier_flat())
    tail = 2.0 * float(np.dot(table.tails, np.abs(u_full - g_inf) ** p))
    lp = lp_mass * float(np.sum(np.abs(u_full) ** p)) if lp_mass else 0.0
    return (pair + tail + lp) / p


def _gradient_polish(table: WeightTable, free_idx: IntArray, u: FloatArray,
                     g_inf: float, diag: FloatArray, target: float,
                     budget: int, lp_mass: float = 0.0) -> tuple[FloatArray, int, float]:
    """Preconditioned steepest descent with a secant line search on the
    directional derivative of J.  Unlike Armijo on J itself, acceptance is
    by gradient-norm decrease, which stays meaningful after the objective
    differences fall below double-precision resolution."""
    lat = table.lattice
    grad_of = _grad_evaluator(table, use_fft=False, lp_mass=lp_mass)

    def gfree(full: FloatArray) -> FloatArray:
        return grad_of(Field(lat, full, g_inf))[free_idx]

    g = gfree(u)
    gn = float(np.max(np.abs(g)))
    it = 0
    while it < budget and gn > target:
        d = -(g / diag)
        s0 = float(np.dot(g, d))
        if s0 >= 0.0:
            break
        trial = u.copy()
        trial[free_idx] += d
        g1 = gfree(trial)
        s1 = float(np.dot(g1, d))
        alpha = s0 / (s0 - s1) if s1 != s0 else 1.0
        alpha = min(max(alpha, 1e-6), 1e3)
        cand = u.copy()
        cand[free_idx] += alpha * d
        g2 = gfree(cand)
        gn2 = float(np.max(np.abs(g2)))
        gn1 = float(np.max(np.abs(g1)))
        it += 1
        if gn2 < gn * (1.0 - 1e-9) and gn2 <= gn1:
            u, g, gn = cand, g2, gn2
        elif gn1 < gn * (1.0 - 1e-9):
            u, g, gn = trial, g1, gn1
        else:
            break
    return u, it, gn


def _nlcg(table: WeightTable, free_idx: IntArray, u0: FloatArray, g_inf: float,
          target: float, max_iter: int,
          lp_mass: float = 0.0) -> tuple[FloatArray, int, float, bool]:
    lat = table.lattice
    diag = _pairsum.pair_rowsums(table.radial, lat.cells, lat.dim,
                                 table.multiplier_flat())[free_idx]
    diag = diag + table.tails[free_idx] + lp_mass
    grad_of = _grad_evaluator(table, use_fft=False, lp_mass=lp_mass)
    u = u0.copy()

    def grad() -> FloatArray:
        return grad_of(Field(lat, u, g_inf))[free_idx]

    def fval() -> float:
        return _objective(table, u, g_inf, lp_mass)

    g = grad()
    gn = float(np.max(np.abs(g))) if g.size else 0.0
    if gn <= target:
        return u, 0, gn, True
    z = g / diag
    d = -z
    gz = float(np.dot(g, z))
    f0 = fval()
    alpha = 1.0 / max(float(np.max(np.abs(d))), 1e-30)
    c1 = 1e-4
    stagnant = 0
    for it in range(1, max_iter + 1):
        dg = float(np.dot(g, d))
        if dg >= 0.0:  # not a descent direction: restart steepest
            d = -z
            dg = -gz
        base = u[free_idx].copy()
        step = alpha
        f_trial = None
        accepted = False
        for _bt in range(60):
            u[free_idx] = base + step * d
            f_trial = fval()
            if f_trial <= f0 + c1 * step * dg:
                accepted = True
                break
            # quadratic interpolation with safeguards
            denom = 2.0 * (f_trial - f0 - step * dg)
            cand = step * step * (-dg) / denom if denom > 0.0 else 0.5 * step
            step = min(max(cand, 0.1 * step), 0.5 * step)
        if not accepted:
            u[free_idx] = base
            if np.array_equal(d, -z):
                gn = float(np.max(np.abs(g)))
                break
            d = -z
            alpha = 1.0 / max(float(np.max(np.abs(d))), 1e-30)
            continue
        # greedy expansion when the first trial was accepted at full step
        if step == alpha:
            for _ex in range(8):
                trial = 2.0 * step
                u[free_idx] = base + trial * d
                f_more = fval()
                if f_more <= f0 + c1 * trial * dg and f_more < f_trial:
                    step, f_trial = trial, f_more
                else:
                    u[free_idx] = base + step * d
                    break
        if f0 - f_trial <= 1e-15 * (1.0 + abs(f0)):
            stagnant += 1
        else:
            stagnant = 0
        f0 = f_trial
        g_new = grad()
        gn = float(np.max(np.abs(g_new)))
        if gn <= target:
            return u, it, gn, True
        if stagnant >= 20:  # at the flat bottom of the objective in doubles
            break
        z_new = g_new / diag
        beta = max(0.0, float(np.dot(z_new, g_new - g)) / gz)
        d = -z_new + beta * d
        g, z = g_new, z_new
        gz = float(np.dot(g, z))
        if float(np.dot(g, d)) >= 0.0 or it % max(50, free_idx.size) == 0:
            d = -z
        alpha = 2.0 * step
    else:
        it = max_iter
    u, extra, gn = _gradient_polish(table, free_idx, u, g_inf, diag, target,
                                    budget=300, lp_mass=lp_mass)
    return u, it + extra, gn, gn <= target


# ---------------------------------------------------------------------------
# public entry points

def solve_constrained(table: WeightTable, free_idx: IntArray, values: FloatArray,
                      g_inf: float, opts: SolveOptions | None = None,
                      lp_mass: float = 0.0) -> SolveReport:
    """Minimize J over fields equal to `values` off the free set; `values`
    entries at free nodes are ignored except as warm-start storage.  A
    positive lp_mass adds lp_mass * sum |u_i|^p to the minimized energy
    (zero-anchored, so it requires g_inf = 0)."""
    opts = opts or SolveOptions()
    lat = table.lattice
    free_idx = np.asarray(free_idx, dtype=np.intp)
    values = np.asarray(values, dtype=float)
    if lp_mass < 0.0 or not np.isfinite(lp_mass):
        raise ContractError("lp_mass must be finite and nonnegative")
    if lp_mass > 0.0 and g_inf != 0.0:
        raise ContractError("the lp term is zero-anchored; it needs g_inf = 0")

    def _energy_of(u_full: FloatArray) -> float:
        u = Field(lat, u_full, g_inf)
        br = energy_total(table, _context_mask(table), u)
        lp = lp_mass * float(np.sum(np.abs(u_full) ** table.spec.p))
        return br.total + lp

    if free_idx.size == 0:
        u = Field(lat, values, g_inf)
        return SolveReport(solution=u, iterations=0, final_gradient_norm=0.0,
                           energy=_energy_of(values), converged=True,
                           method="fixed", reference_gradient_norm=0.0)

    p = table.spec.p
    method = opts.method
    if method == "auto":
        if p == 2.0:
            method = "linear"
        elif p < 2.0 and free_idx.size <= opts.dense_limit:
            method = "irls"
        else:
            method = "nlcg"
    if method == "linear" and p != 2.0:
        raise ContractError("the linear path requires p = 2")
    if method == "irls" and p > 2.0:
        raise ContractError("the reweighting path requires p <= 2")

    large = free_idx.size > opts.dense_limit
    use_fft = method == "linear" and large
    if use_fft and table.has_multiplier():
        method = "nlcg"  # no translation invariance to exploit
        use_fft = False
    grad_of = _grad_evaluator(table, use_fft, lp_mass)

    mean_full = _mean_init(values, free_idx)
    ref = float(np.max(np.abs(grad_of(Field(lat, mean_full, g_inf))[free_idx])))
    target = opts.tol * ref

    if ref == 0.0:  # the mean init is already stationary (constant data)
        u = Field(lat, mean_full, g_inf)
        return SolveReport(solution=u, iterations=0, final_gradient_norm=0.0,
                           energy=_energy_of(mean_full), converged=True,
                           method="stationary-init", reference_gradient_norm=0.0)

    if opts.init == "mean":
        u0 = mean_full
        if method in ("nlcg", "irls"):
            # the quadratic companion problem (same weights, squared
            # differences) lands far closer to the p-minimizer than a flat
            # mean and costs one linear solve
            if not large:
                u0 = _dense_solve(table, free_idx, values, g_inf, lp_mass)
            elif not table.has_multiplier():
                u0, _, _ = _cg_solve(table, free_idx, values, g_inf, mean_full,
                                     1e-4 * ref, min(400, opts.max_iter),
                                     lp_mass)
    else:
        u0 = _initial_values(table, free_idx, values, g_inf, opts)

    if method == "linear":
        if not large:
            full = _dense_solve(table, free_idx, values, g_inf, lp_mass)
            gn = float(np.max(np.abs(grad_of(Field(lat, full, g_inf))[free_idx])))
            iters, converged = 1, gn <= max(target, 1e-12)
            label = "dense"
        else:
            full, iters, converged = _cg_solve(table, free_idx, values, g_inf,
                                               u0, target, opts.max_iter, lp_mass)
            gn = float(np.max(np.abs(grad_of(Field(lat, full, g_inf))[free_idx])))
            label = "cg-fft"
    elif method == "nlcg":
        full, iters, gn, converged = _nlcg(table, free_idx, u0, g_inf,
                                           target, opts.max_iter, lp_mass)
        label = "nlcg"
    elif method == "irls":
        full, iters, gn, converged = _irls(table, free_idx, values, g_inf, u0,
                                           target, opts.max_iter, lp_mass)
        if not converged:
            diag = _pairsum.pair_rowsums(table.radial, lat.cells, lat.dim,
                                         table.multiplier_flat())[free_idx]
            diag = diag + table.tails[free_idx] + lp_mass
            full, extra, gn = _gradient_polish(table, free_idx, full, g_inf,
                                               diag, target, budget=300,
                                               lp_mass=lp_mass)
            iters += extra
            converged = gn <= target
        label = "irls"
    else:
        raise ContractError(f"unknown method {opts.method!r}")

    u = Field(lat, full, g_inf)
    return SolveReport(solution=u, iterations=iters, final_gradient_norm=gn,
                       energy=_energy_of(full), converged=bool(converged),
                       method=label, reference_gradient_norm=ref)


_MASK_CACHE: dict = {}


def _context_mask(table: WeightTable) -> DomainMask:
    """A throwaway all-interior mask used only for lattice validation."""
    key = table.lattice
    if key not in _MASK_CACHE:
        lat = table.lattice
        status = np.ones(lat.n_nodes, dtype=np.int8)
        interior = ~edge_layer(lat)
        status[interior] = 0
        _MASK_CACHE[key] = DomainMask(lattice=lat, status=status, name="context")
    return _MASK_CACHE[key]


def dirichlet_solve(table: WeightTable, mask: DomainMask, g: DataSpec,
                    opts: SolveOptions | None = None) -> SolveReport:
    """Solve the exterior-value problem: u = g on constrained nodes, far
    field g.g_inf, stationary on FREE nodes."""
    if mask.lattice != table.lattice:
        raise ContractError("mask lattice does not match the weight table")
    values = g.evaluate(table.lattice)
    return solve_constrained(table, mask.free_indices, values, g.g_inf, opts)


def capacitary_potential(table: WeightTable, mask: DomainMask, K, omega_c,
                         opts: SolveOptions | None = None) -> SolveReport:
    """Minimize pair+tail energy with u = 1 on K, u = 0 outside omega_c
    (far field included); the minimum is the condenser capacity."""
    lat = table.lattice
    if mask.lattice != lat:
        raise ContractError("mask lattice does not match the weight table")
    K = np.unique(np.asarray(K, dtype=np.intp).reshape(-1))
    omega = np.unique(np.asarray(omega_c, dtype=np.intp).reshape(-1))
    if K.size == 0:
        u = Field(lat, np.zeros(lat.n_nodes), 0.0)
        return SolveReport(solution=u, iterations=0, final_gradient_norm=0.0,
                           energy=0.0, converged=True, method="empty",
                           reference_gradient_norm=0.0)
    if np.any(K < 0) or np.any(K >= lat.n_nodes) or np.any(omega >= lat.n_nodes) or np.any(omega < 0):
        raise DomainError("condenser node sets leave the box")
    if not np.all(np.isin(K, omega)):
        raise ContractError("the compact set K must sit inside omega_c")
    free = np.setdiff1d(omega, K)
    edge = np.flatnonzero(edge_layer(lat))
    if np.intersect1d(free, edge).size:
        raise DomainError("omega_c touches the outermost node layer")
    values = np.zeros(lat.n_nodes)
    values[K] = 1.0
    return solve_constrained(table, free, values, 0.0, opts)


def comparison_check(table: WeightTable, mask: DomainMask, g1: DataSpec,
                     g2: DataSpec, opts: SolveOptions | None = None) -> bool:
    """Ordered data must give ordered solutions; returns that check's truth."""
    v1 = g1.evaluate(table.lattice)
    v2 = g2.evaluate(table.lattice)
    cons = mask.status != 0
    if np.any(v1[cons] > v2[cons] + 1e-12) or g1.g_inf > g2.g_inf + 1e-12:
        raise ContractError("comparison_check needs g1 <= g2 on data")
    r1 = dirichlet_solve(table, mask, g1, opts)
    r2 = dirichlet_solve(table, mask, g2, opts)
    return bool(np.all(r1.solution.values <= r2.solution.values + 1e-8))
