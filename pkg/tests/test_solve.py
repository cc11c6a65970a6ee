"""Solver paths cross-checked against each other and against order.

The p = 2 dense factorization is the anchor: every other path (CG on the
FFT pair sum, reweighting for p < 2, nonlinear CG for p > 2) must land on
the same minimizer where domains of validity overlap.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracboundary.domains import (
    DataSpec,
    Lattice,
    dist_cap_data,
    make_ball,
    make_comb,
    make_punctured_ball,
)
from fracboundary.energy import Field, energy_gradient
from fracboundary.errors import ContractError
from fracboundary.kernel import KernelSpec, build_weight_table
from fracboundary.solve import (
    SolveOptions,
    capacitary_potential,
    comparison_check,
    dirichlet_solve,
    solve_constrained,
)


def _table(p=2.0, s=0.4, cells=256, mult=None, lam=1.0):
    lat = Lattice(1, (-2.0,), 4.0, cells)
    return build_weight_table(KernelSpec(s=s, p=p, dim=1, multiplier=mult, lam=lam), lat)


def _ramp(peak=0.8, g_inf=0.2, hw=1.5):
    return DataSpec("ramp", g_inf, {"center": (0.0,), "halfwidth": hw, "peak": peak})


def test_constant_data_is_stationary_at_init():
    table = _table()
    mask = make_ball(table.lattice, (0.0,), 1.0)
    rep = dirichlet_solve(table, mask, DataSpec("constant", 0.4, {"value": 0.4}))
    assert rep.method == "stationary-init"
    assert rep.iterations == 0
    assert np.all(rep.solution.values == 0.4)
    assert rep.energy == 0.0


def test_dense_vs_cg_fft():
    table = _table(cells=1024)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    data = _ramp()
    dense = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-12))
    cg = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-12, dense_limit=100))
    assert dense.method == "dense" and cg.method == "cg-fft"
    assert cg.converged
    err = np.max(np.abs(dense.solution.values - cg.solution.values))
    assert err < 1e-9


def test_nlcg_agrees_with_dense_at_p2():
    table = _table()
    mask = make_ball(table.lattice, (0.0,), 1.0)
    data = _ramp()
    direct = dirichlet_solve(table, mask, data)
    nlcg = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-12, method="nlcg"))
    assert np.max(np.abs(direct.solution.values - nlcg.solution.values)) < 1e-8


def test_irls_agrees_with_nlcg_below_2():
    # below p = 2 the line search hits the phi'' singularity, so nlcg only
    # reaches a coarse tolerance; irls is the precise path there and must
    # match it on the overlap
    table = _table(p=1.5)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    data = _ramp()
    a = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-9, method="irls"))
    b = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-4, method="nlcg"))
    assert a.converged and b.converged
    assert np.max(np.abs(a.solution.values - b.solution.values)) < 1e-4
    assert a.energy <= b.energy + 1e-12


def test_method_contract_errors():
    table = _table(p=2.5)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    with pytest.raises(ContractError):
        dirichlet_solve(table, mask, _ramp(), SolveOptions(method="linear"))
    with pytest.raises(ContractError):
        dirichlet_solve(table, mask, _ramp(), SolveOptions(method="irls"))
    with pytest.raises(ContractError):
        dirichlet_solve(table, mask, _ramp(), SolveOptions(method="sgd"))


def test_solution_respects_data_range():
    for p in (1.5, 2.0, 3.0):
        table = _table(p=p)
        mask = make_punctured_ball(table.lattice, (0.0,), 1.0)
        rep = dirichlet_solve(table, mask, dist_cap_data((0.0,)),
                              SolveOptions(tol=1e-10))
        assert rep.converged
        u = rep.solution.values
        assert u.min() >= -1e-9 and u.max() <= 1.0 + 1e-9


@given(lo=st.floats(min_value=0.0, max_value=0.4),
       gap=st.floats(min_value=0.0, max_value=0.5),
       p=st.sampled_from([1.5, 2.0, 2.5]))
@settings(max_examples=12, deadline=None)
def test_comparison_principle(lo, gap, p):
    table = _table(p=p, cells=128)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    g1 = _ramp(peak=lo + 0.1, g_inf=lo, hw=1.5)
    g2 = _ramp(peak=lo + 0.1 + gap, g_inf=lo + gap, hw=1.5)
    assert comparison_check(table, mask, g1, g2, SolveOptions(tol=1e-10))


def test_comparison_check_rejects_unordered_data():
    table = _table(cells=64)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    with pytest.raises(ContractError):
        comparison_check(table, mask, _ramp(peak=0.9), _ramp(peak=0.3))


def test_random_inits_agree():
    table = _table(p=2.5)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    data = _ramp()
    a = dirichlet_solve(table, mask, data,
                        SolveOptions(tol=1e-10, init="random", seed=7))
    b = dirichlet_solve(table, mask, data,
                        SolveOptions(tol=1e-10, init="random", seed=888))
    assert a.converged and b.converged
    assert np.max(np.abs(a.solution.values - b.solution.values)) < 1e-6


def test_warm_start_resolves_quickly():
    table = _table(p=2.5)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    data = _ramp()
    cold = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-9))
    warm = dirichlet_solve(table, mask, data,
                           SolveOptions(tol=1e-9, init="warm",
                                        warm_values=cold.solution.values))
    assert warm.converged
    assert warm.iterations <= max(5, cold.iterations // 10)


def test_report_gradient_norm_is_true_residual():
    table = _table(p=3.0, cells=128)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    rep = dirichlet_solve(table, mask, _ramp(), SolveOptions(tol=1e-9))
    g = energy_gradient(table, mask, rep.solution)
    assert np.max(np.abs(g)) == pytest.approx(rep.final_gradient_norm, rel=1e-6, abs=1e-15)
    assert rep.final_gradient_norm <= 1e-9 * rep.reference_gradient_norm * 1.01


def _bump(x, y):
    return 1.5 + 0.5 * np.cos(np.pi * (np.sum(x, axis=-1) + np.sum(y, axis=-1)))


def test_multiplier_solve_paths_agree():
    table = _table(mult=_bump, lam=2.0, cells=128)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    data = _ramp()
    dense = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-12))
    nlcg = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-12, method="nlcg"))
    assert np.max(np.abs(dense.solution.values - nlcg.solution.values)) < 1e-8
    # the multiplier shifts the solution measurably off the plain kernel
    plain = dirichlet_solve(_table(cells=128), mask, data)
    assert np.max(np.abs(dense.solution.values - plain.solution.values)) > 1e-4


def test_energy_never_exceeds_data_energy():
    # the minimizer cannot beat the data field itself
    from fracboundary.energy import energy_total

    table = _table(p=2.5, cells=128)
    mask = make_ball(table.lattice, (0.0,), 1.0)
    data = _ramp()
    rep = dirichlet_solve(table, mask, data, SolveOptions(tol=1e-10))
    raw = energy_total(table, mask, Field.from_data(table.lattice, data))
    assert rep.energy <= raw.total + 1e-12


def test_capacitary_potential_basic():
    table = _table(cells=256)
    lat = table.lattice
    mask = make_ball(lat, (0.0,), 1.0)
    d = lat.distances_to((0.0,))
    K = np.flatnonzero(d <= 0.25)
    omega = np.flatnonzero(d < 0.75)
    rep = capacitary_potential(table, mask, K, omega)
    u = rep.solution.values
    assert np.all(u[K] == 1.0)
    assert np.all(u[np.setdiff1d(np.arange(lat.n_nodes), omega)] == 0.0)
    assert u.min() >= -1e-10 and u.max() <= 1.0 + 1e-10
    assert rep.energy > 0.0
    with pytest.raises(ContractError):
        capacitary_potential(table, mask, omega, K)  # K must sit inside omega


def test_empty_free_set_returns_fixed_field():
    table = _table(cells=64)
    values = np.zeros(64)
    rep = solve_constrained(table, np.array([], dtype=np.intp), values, 0.0)
    assert rep.method == "fixed" and rep.converged and rep.energy == 0.0
