"""Batch experiment harness: config files in, CSV/JSON/SVG artifacts out.

One JSON config describes one run: kernel, lattice, domain, task, solver
options, seed.  `run` executes the task and writes its artifacts atomically
into the output directory; identical config and seed give byte-identical
CSV and JSON no matter how many worker threads the suite uses.  Every JSON
report embeds the config hash, the grid spacing, and the resolved-scale
flags of the run it came from, so an artifact can always be traced back to
the exact configuration that produced it.

Exit codes: 0 success, 1 internal failure, 2 invalid config or usage,
3 finished but at least one solve did not converge.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import capacity as _capacity
from . import classify as _classify
from .domains import DataSpec, DomainMask, Lattice, dist_cap_data
from .errors import ConfigError, ContractError, DomainError, FracBoundaryError
from .kernel import KernelSpec, build_weight_table
from .solve import SolveOptions, dirichlet_solve

TASKS = ("solve", "capacity", "wiener", "classify", "sweep", "removability",
         "sharpness", "universal-sequence", "suite")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_UNCONVERGED = 3

_SUITE_PAIRS = ((0.4, 2.0), (0.5, 2.0), (0.3, 3.0), (0.9, 2.5))
_SUITE_DOMAINS = ("punctured_ball", "exterior_block", "comb")


# ---------------------------------------------------------------------------
# configuration

def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {msg}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: everything needed to reproduce a run byte-for-byte."""

    task: str
    kernel: dict = field(default_factory=lambda: {"s": 0.4, "p": 2.0,
                                                  "multiplier": "none",
                                                  "lam": 1.0})
    lattice: dict = field(default_factory=lambda: {"dim": 1, "lo": [-2.0],
                                                   "side": 4.0, "cells": 512})
    domain: dict = field(default_factory=lambda: {"name": "punctured_ball",
                                                  "x0": [0.0]})
    solver: dict = field(default_factory=dict)
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        _expect(self.task in TASKS, "task",
                f"unknown task {self.task!r}; choose from {', '.join(TASKS)}")
        k = self.kernel
        _expect(isinstance(k, dict), "kernel", "must be a mapping")
        _expect("s" in k and "p" in k, "kernel", "needs s and p")
        _expect(k.get("multiplier", "none") in _MULTIPLIERS,
                "kernel.multiplier",
                f"unknown preset; choose from {', '.join(_MULTIPLIERS)}")
        lat = self.lattice
        for key in ("dim", "lo", "side", "cells"):
            _expect(key in lat, f"lattice.{key}", "missing")
        _expect(isinstance(self.domain, dict) and "name" in self.domain,
                "domain.name", "missing")
        _expect(isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64,
                "seed", "must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "kernel": dict(self.kernel),
            "lattice": dict(self.lattice),
            "domain": dict(self.domain),
            "solver": dict(self.solver),
            "seed": self.seed,
            "params": dict(self.params),
        }

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        _expect(isinstance(d, dict), "", "config must be a JSON object")
        known = {"task", "kernel", "lattice", "domain", "solver", "seed",
                 "params", "out"}
        for key in d:
            _expect(key in known, key, "unknown config field")
        _expect("task" in d, "task", "missing")
        return ExperimentConfig(
            task=d["task"],
            kernel=d.get("kernel", {"s": 0.4, "p": 2.0}),
            lattice=d.get("lattice", {"dim": 1, "lo": [-2.0], "side": 4.0,
                                      "cells": 512}),
            domain=d.get("domain", {"name": "punctured_ball", "x0": [0.0]}),
            solver=d.get("solver", {}),
            seed=int(d.get("seed", 0)),
            params=d.get("params", {}),
        )

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(raw)


def example_config(task: str = "classify") -> dict:
    """A complete, runnable config for the given task; documents the schema."""
    base = ExperimentConfig(task=task).to_dict()
    base["solver"] = {"tol": 1e-8, "max_iter": 20000, "method": "auto"}
    if task == "sweep":
        base["params"] = {"pairs": [[0.4, 2.0], [0.9, 2.5]]}
    elif task == "capacity":
        base["params"] = {"mode": "slope", "ks": [2, 3, 4]}
        base["lattice"]["cells"] = 1024
    elif task == "universal-sequence":
        base["params"] = {"data": [{"kind": "constant", "g_inf": 0.7,
                                    "params": {"value": 0.7}}]}
        base["domain"] = {"name": "comb", "x0": [0.0]}
    return base


# ---------------------------------------------------------------------------
# multiplier presets (callables cannot live in a config file)

def _cosine_multiplier(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return 1.5 + 0.5 * np.cos(math.pi * (np.sum(x, axis=-1)
                                         + np.sum(y, axis=-1)))


_MULTIPLIERS: dict[str, tuple[Callable | None, float]] = {
    "none": (None, 1.0),
    "cosine": (_cosine_multiplier, 2.0),
}


# ---------------------------------------------------------------------------
# builders

def _build_kernel(cfg: ExperimentConfig) -> KernelSpec:
    k = cfg.kernel
    mult, lam = _MULTIPLIERS[k.get("multiplier", "none")]
    try:
        return KernelSpec(s=float(k["s"]), p=float(k["p"]),
                          dim=int(cfg.lattice["dim"]),
                          multiplier=mult, lam=float(k.get("lam", lam)) if mult
                          else 1.0)
    except FracBoundaryError as exc:
        raise ConfigError(f"kernel: {exc}") from exc


def _build_lattice(cfg: ExperimentConfig) -> Lattice:
    lat = cfg.lattice
    try:
        return Lattice(int(lat["dim"]),
                       tuple(float(v) for v in lat["lo"]),
                       float(lat["side"]), int(lat["cells"]))
    except FracBoundaryError as exc:
        raise ConfigError(f"lattice: {exc}") from exc


def _build_solver(cfg: ExperimentConfig) -> SolveOptions:
    s = cfg.solver
    try:
        return SolveOptions(
            tol=float(s.get("tol", 1e-8)),
            max_iter=int(s.get("max_iter", 20000)),
            method=str(s.get("method", "auto")),
            init=str(s.get("init", "mean")),
            seed=cfg.seed,
            dense_limit=int(s.get("dense_limit", 6000)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from exc


def _domain_x0(cfg: ExperimentConfig, lattice: Lattice) -> tuple[float, ...]:
    x0 = cfg.domain.get("x0")
    if x0 is None:
        return (0.0,) * lattice.dim
    return tuple(float(v) for v in x0)


def _build_mask(cfg: ExperimentConfig, lattice: Lattice,
                table=None, opts=None) -> DomainMask:
    name = str(cfg.domain["name"]).replace("-", "_")
    x0 = _domain_x0(cfg, lattice)
    try:
        if name == "block_ball":
            return _classify.block_ball_mask(
                lattice, x0,
                float(cfg.domain.get("block_halfwidth", 0.125)),
                float(cfg.domain.get("radius", 1.0)))
        return _classify.gallery_mask(name, lattice, x0, table=table,
                                      opts=opts)
    except FracBoundaryError as exc:
        raise ConfigError(f"domain: {exc}") from exc


def _build_data(cfg: ExperimentConfig, x0) -> DataSpec:
    raw = cfg.params.get("data")
    if raw is None:
        return dist_cap_data(x0)
    try:
        return DataSpec.from_dict(raw)
    except FracBoundaryError as exc:
        raise ConfigError(f"params.data: {exc}") from exc


# ---------------------------------------------------------------------------
# deterministic artifact writers

def _atomic_write(path: str, payload: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence],
              preamble: dict | None = None) -> None:
    lines = []
    if preamble:
        note = ",".join(f"{k}={_fmt(v)}" for k, v in preamble.items())
        lines.append(f"# {note}")
    lines.append(",".join(header))
    for row in rows:
        if len(row) != len(header):
            raise ContractError("CSV row width does not match the header")
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str, obj: dict) -> None:
    _atomic_write(path, json.dumps(obj, indent=2) + "\n")


# ---------------------------------------------------------------------------
# SVG emission (hand-rolled: dependency-free, diffable)

_PALETTE = ("#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#b7950b", "#34495e")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / n))
    for mul in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mul) <= n:
            step *= mul
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(round(t, 12))
        t += step
    return out or [lo]


def emit_plot(series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
              path: str, title: str = "", xlabel: str = "",
              ylabel: str = "") -> None:
    """Write a standalone SVG 1.1 line/scatter plot.

    `series` is a list of (label, xs, ys); single-point series get a
    marker, longer ones a polyline plus markers.
    """
    if not series:
        raise ConfigError("emit_plot needs at least one series")
    for label, xs, ys in series:
        if len(xs) != len(ys):
            raise ConfigError(f"series {label!r}: x and y lengths differ")
        if not len(xs):
            raise ConfigError(f"series {label!r} is empty")

    W, H = 640, 420
    ml, mr, mt, mb = 64, 16, 34, 46
    all_x = [float(x) for _, xs, _ in series for x in xs]
    all_y = [float(y) for _, _, ys in series for y in ys]
    xlo, xhi = min(all_x), max(all_x)
    ylo, yhi = min(all_y), max(all_y)
    if xhi <= xlo:
        xlo, xhi = xlo - 1.0, xhi + 1.0
    if yhi <= ylo:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    xpad, ypad = 0.05 * (xhi - xlo), 0.05 * (yhi - ylo)
    xlo, xhi = xlo - xpad, xhi + xpad
    ylo, yhi = ylo - ypad, yhi + ypad

    def X(v: float) -> float:
        return ml + (v - xlo) / (xhi - xlo) * (W - ml - mr)

    def Y(v: float) -> float:
        return H - mb - (v - ylo) / (yhi - ylo) * (H - mt - mb)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{W - ml - mr}" height="{H - mt - mb}"'
        ' fill="none" stroke="#888" stroke-width="1"/>',
    ]
    if title:
        out.append(f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" '
                   f'font-size="14">{title}</text>')
    for t in _ticks(xlo, xhi):
        x = X(t)
        out.append(f'<line x1="{x:.2f}" y1="{H - mb}" x2="{x:.2f}" '
                   f'y2="{H - mb + 5}" stroke="#555"/>')
        out.append(f'<text x="{x:.2f}" y="{H - mb + 18}" '
                   f'text-anchor="middle">{t:.6g}</text>')
    for t in _ticks(ylo, yhi):
        y = Y(t)
        out.append(f'<line x1="{ml - 5}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" '
                   'stroke="#555"/>')
        out.append(f'<text x="{ml - 8}" y="{y + 4:.2f}" '
                   f'text-anchor="end">{t:.6g}</text>')
    if xlabel:
        out.append(f'<text x="{(ml + W - mr) / 2:.1f}" y="{H - 8}" '
                   f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{(mt + H - mb) / 2:.1f}" '
                   f'text-anchor="middle" transform="rotate(-90 16 '
                   f'{(mt + H - mb) / 2:.1f})">{ylabel}</text>')

    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = [(X(float(x)), Y(float(y))) for x, y in zip(xs, ys)]
        if len(pts) > 1:
            poly = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline points="{poly}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" '
                       f'fill="{color}"/>')
        if label:
            out.append(f'<text x="{W - mr - 8}" y="{mt + 16 + 16 * i}" '
                       f'text-anchor="end" fill="{color}">{label}</text>')
    out.append("</svg>")
    _atomic_write(path, "\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# task runners

def _stamp(cfg: ExperimentConfig, lattice: Lattice,
           flags: Sequence[str] = ()) -> dict:
    return {"config_hash": cfg.config_hash, "h": lattice.h,
            "flags": list(flags)}


def _run_solve(cfg: ExperimentConfig, out: str) -> int:
    kernel = _build_kernel(cfg)
    lattice = _build_lattice(cfg)
    opts = _build_solver(cfg)
    table = build_weight_table(kernel, lattice)
    mask = _build_mask(cfg, lattice, table=table, opts=opts)
    data = _build_data(cfg, _domain_x0(cfg, lattice))
    rep = dirichlet_solve(table, mask, data, opts)

    doc = _stamp(cfg, lattice, mask.flags)
    doc.update({
        "energy": rep.energy,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "method": rep.method,
        "final_gradient_norm": rep.final_gradient_norm,
        "reference_gradient_norm": rep.reference_gradient_norm,
    })
    write_json(os.path.join(out, "solve.json"), doc)
    coords = lattice.node_coords()
    u = rep.solution.values
    if lattice.dim == 1:
        header = ["x", "u"]
        rows = [(coords[i, 0], u[i]) for i in range(lattice.n_nodes)]
    else:
        header = ["x1", "x2", "u"]
        rows = [(coords[i, 0], coords[i, 1], u[i])
                for i in range(lattice.n_nodes)]
    write_csv(os.path.join(out, "solution.csv"), header, rows,
              {"config": cfg.config_hash, "h": lattice.h})
    if lattice.dim == 1:
        emit_plot([("u", coords[:, 0].tolist(), u.tolist())],
                  os.path.join(out, "solution.svg"),
                  title="exterior-value solution", xlabel="x", ylabel="u")
    return EXIT_OK if rep.converged else EXIT_UNCONVERGED


def _nodeset(spec: dict, lattice: Lattice, path: str) -> np.ndarray:
    """Node-set descriptor: {'shape': 'ball'|'interval'|'point', ...}."""
    _expect(isinstance(spec, dict) and "shape" in spec, path,
            "must be a mapping with a 'shape' key")
    shape = spec["shape"]
    if shape == "ball":
        center = spec.get("center", (0.0,) * lattice.dim)
        nodes = _capacity.closed_ball_nodes(lattice, center,
                                            float(spec.get("radius", 0.25)))
    elif shape == "open-ball":
        center = spec.get("center", (0.0,) * lattice.dim)
        nodes = _capacity.open_ball_nodes(lattice, center,
                                          float(spec.get("radius", 0.5)))
    elif shape == "point":
        nodes = np.asarray([lattice.nearest_node(
            spec.get("at", (0.0,) * lattice.dim))], dtype=np.int64)
    else:
        raise ConfigError(f"{path}.shape: unknown shape {shape!r}")
    return nodes


def _run_capacity(cfg: ExperimentConfig, out: str) -> int:
    kernel = _build_kernel(cfg)
    lattice = _build_lattice(cfg)
    opts = _build_solver(cfg)
    mode = cfg.params.get("mode", "condenser")
    if mode == "probe":
        shape = cfg.params.get("shape", "point")
        res = _capacity.zero_capacity_probe(kernel, lattice, shape, opts)
        doc = _stamp(cfg, lattice)
        doc.update({"mode": "probe", "shape": res.shape, "sp": res.sp,
                    "threshold": res.threshold, "label": res.label,
                    "hs": list(res.hs), "values": list(res.values)})
        write_json(os.path.join(out, "capacity.json"), doc)
        write_csv(os.path.join(out, "capacity.csv"), ["h", "value"],
                  res.rows, {"config": cfg.config_hash, "mode": "probe"})
        return EXIT_OK

    table = build_weight_table(kernel, lattice)
    if mode == "slope":
        ks = [int(k) for k in cfg.params.get("ks", (2, 3, 4))]
        _expect(len(ks) >= 3, "params.ks", "need at least 3 dyadic radii")
        x0 = _domain_x0(cfg, lattice)
        res = _capacity.capacity_scaling_slope(table, x0, ks, opts)
        doc = _stamp(cfg, lattice)
        doc.update({"mode": "slope", "slope": res.slope,
                    "expected": res.expected, "borderline": res.borderline,
                    "ks": list(res.ks), "radii": list(res.radii),
                    "values": list(res.values)})
        write_json(os.path.join(out, "capacity.json"), doc)
        write_csv(os.path.join(out, "capacity.csv"),
                  ["k", "radius", "value"],
                  list(zip(res.ks, res.radii, res.values)),
                  {"config": cfg.config_hash, "mode": "slope"})
        emit_plot([("log2 c_k", [float(k) for k in res.ks],
                    [math.log2(v) for v in res.values])],
                  os.path.join(out, "capacity.svg"),
                  title="capacity decay", xlabel="k", ylabel="log2 c_k")
        return EXIT_OK

    if mode == "condenser":
        K = _nodeset(cfg.params.get("set", {"shape": "ball", "radius": 0.25}),
                     lattice, "params.set")
        omega = _nodeset(cfg.params.get("ground",
                                        {"shape": "open-ball", "radius": 0.5}),
                         lattice, "params.ground")
        res = _capacity.condenser_capacity(table, K, omega, opts)
    elif mode == "sobolev":
        E = _nodeset(cfg.params.get("set", {"shape": "ball", "radius": 0.25}),
                     lattice, "params.set")
        res = _capacity.sobolev_capacity(table, E, opts)
    else:
        raise ConfigError(f"params.mode: unknown capacity mode {mode!r}")

    doc = _stamp(cfg, lattice)
    doc.update({"mode": mode, "kind": res.kind, "descriptor": res.descriptor,
                "value": res.value, "converged": res.converged})
    write_json(os.path.join(out, "capacity.json"), doc)
    if res.potential is not None:
        coords = lattice.node_coords()
        u = res.potential.values
        if lattice.dim == 1:
            rows = [(coords[i, 0], u[i]) for i in range(lattice.n_nodes)]
            write_csv(os.path.join(out, "potential.csv"), ["x", "u"], rows,
                      {"config": cfg.config_hash})
            emit_plot([("potential", coords[:, 0].tolist(), u.tolist())],
                      os.path.join(out, "potential.svg"),
                      title=f"{res.kind} capacitary potential",
                      xlabel="x", ylabel="u")
        else:
            rows = [(coords[i, 0], coords[i, 1], u[i])
                    for i in range(lattice.n_nodes)]
            write_csv(os.path.join(out, "potential.csv"),
                      ["x1", "x2", "u"], rows, {"config": cfg.config_hash})
    return EXIT_OK if res.converged else EXIT_UNCONVERGED


def _run_wiener(cfg: ExperimentConfig, out: str) -> int:
    kernel = _build_kernel(cfg)
    lattice = _build_lattice(cfg)
    opts = _build_solver(cfg)
    table = build_weight_table(kernel, lattice)
    mask = _build_mask(cfg, lattice, table=table, opts=opts)
    x0 = _domain_x0(cfg, lattice)
    prof = _capacity.wiener_profile(table, mask, x0, opts)

    doc = _stamp(cfg, lattice, prof.flags)
    doc.update({"x0": list(prof.x0), "trend": prof.trend,
                "converged": prof.converged,
                "ks": list(prof.ks), "radii": list(prof.radii),
                "c": list(prof.c), "integrand": list(prof.integrand),
                "partial_sums": list(prof.partial_sums)})
    write_json(os.path.join(out, "wiener.json"), doc)
    write_csv(os.path.join(out, "wiener.csv"),
              ["k", "rho", "c_k", "I_k", "S_k"], prof.rows,
              {"config": cfg.config_hash, "trend": prof.trend})
    emit_plot([("partial sums", [float(k) for k in prof.ks],
                list(prof.partial_sums)),
               ("integrand", [float(k) for k in prof.ks],
                list(prof.integrand))],
              os.path.join(out, "wiener.svg"),
              title=f"regularity profile ({prof.trend})",
              xlabel="k", ylabel="value")
    return EXIT_OK if prof.converged else EXIT_UNCONVERGED


def _run_classify(cfg: ExperimentConfig, out: str) -> int:
    kernel = _build_kernel(cfg)
    lattice = _build_lattice(cfg)
    opts = _build_solver(cfg)
    table = build_weight_table(kernel, lattice)
    mask = _build_mask(cfg, lattice, table=table, opts=opts)
    x0 = _domain_x0(cfg, lattice)
    rep = _classify.classify_point(table, mask, x0, opts)

    doc = _stamp(cfg, lattice, rep.flags)
    doc.update(rep.to_dict())
    write_json(os.path.join(out, "classify.json"), doc)
    write_csv(os.path.join(out, "shells.csv"),
              ["m", "radius", "count", "min", "max"], rep.rows,
              {"config": cfg.config_hash, "label": rep.label})
    ms = [float(s.m) for s in rep.shells]
    emit_plot([("shell min", ms, [s.vmin for s in rep.shells]),
               ("shell max", ms, [s.vmax for s in rep.shells])],
              os.path.join(out, "shells.svg"),
              title=f"shell profile: {rep.label}", xlabel="m",
              ylabel="H d")
    return EXIT_OK if rep.converged else EXIT_UNCONVERGED


def _run_sweep(cfg: ExperimentConfig, out: str) -> int:
    lattice = _build_lattice(cfg)
    opts = _build_solver(cfg)
    pairs = cfg.params.get("pairs")
    _expect(isinstance(pairs, list) and pairs, "params.pairs",
            "must be a nonempty list of [s, p] pairs")
    name = str(cfg.domain["name"]).replace("-", "_")
    x0 = _domain_x0(cfg, lattice)
    res = _classify.sp_sweep(lattice, name, x0,
                             [(float(s), float(p)) for s, p in pairs], opts)
    doc = _stamp(cfg, lattice)
    doc.update(res.to_dict())
    write_json(os.path.join(out, "sweep.json"), doc)
    write_csv(os.path.join(out, "sweep.csv"),
              ["s", "p", "sp", "label", "oracle", "agrees", "borderline"],
              res.rows, {"config": cfg.config_hash, "domain": res.domain})
    ok = all(e.converged for e in res.entries)
    return EXIT_OK if ok else EXIT_UNCONVERGED


def _run_removability(cfg: ExperimentConfig, out: str) -> int:
    kernel = _build_kernel(cfg)
    lattice = _build_lattice(cfg)
    opts = _build_solver(cfg)
    x0 = _domain_x0(cfg, lattice)
    tab = _classify.removability_experiment(
        kernel, lattice, x0, opts,
        radius=float(cfg.domain.get("radius", 1.0)),
        levels=int(cfg.params.get("levels", 3)))
    doc = _stamp(cfg, lattice, tab.flags)
    doc.update(tab.to_dict())
    write_json(os.path.join(out, "removability.json"), doc)
    far = tab.meta["sup_beyond_r8"]
    write_csv(os.path.join(out, "removability.csv"),
              ["h", "sup_diff", "sup_beyond_r8"],
              [(h, v, f) for (h, v), f in zip(tab.rows, far)],
              {"config": cfg.config_hash, "sp": tab.meta["sp"]})
    return EXIT_OK if tab.converged else EXIT_UNCONVERGED


def _run_sharpness(cfg: ExperimentConfig, out: str) -> int:
    kernel = _build_kernel(cfg)
    lattice = _build_lattice(cfg)
    opts = _build_solver(cfg)
    table = build_weight_table(kernel, lattice)
    mask = _build_mask(cfg, lattice, table=table, opts=opts)
    tab = _classify.sharpness_experiment(table, mask, opts,
                                         levels=int(cfg.params.get("levels",
                                                                   3)))
    doc = _stamp(cfg, lattice, tab.flags)
    doc.update(tab.to_dict())
    write_json(os.path.join(out, "sharpness.json"), doc)
    sizes = tab.meta["block_nodes"]
    write_csv(os.path.join(out, "sharpness.csv"),
              ["h", "max_residual", "block_nodes"],
              [(h, v, n) for (h, v), n in zip(tab.rows, sizes)],
              {"config": cfg.config_hash, "control": tab.meta["control"]})
    return EXIT_OK if tab.converged else EXIT_UNCONVERGED


def _run_universal(cfg: ExperimentConfig, out: str) -> int:
    kernel = _build_kernel(cfg)
    lattice = _build_lattice(cfg)
    opts = _build_solver(cfg)
    table = build_weight_table(kernel, lattice)
    mask = _build_mask(cfg, lattice, table=table, opts=opts)
    x0 = _domain_x0(cfg, lattice)
    raw = cfg.params.get("data")
    if raw is None:
        data = default_probe_data(lattice.dim)
    else:
        _expect(isinstance(raw, list) and raw, "params.data",
                "must be a nonempty list of data specs")
        data = [DataSpec.from_dict(d) for d in raw]
    rep = _classify.universal_sequence_probe(table, mask, x0, data, opts)

    doc = _stamp(cfg, lattice, rep.flags)
    doc.update(rep.to_dict())
    write_json(os.path.join(out, "universal_sequence.json"), doc)
    # data labels may contain commas; keep the header a valid CSV row
    header = ["m", "node"] + [f"dev_{i}_{lbl.replace(',', ';')}"
                              for i, lbl in enumerate(rep.data_labels)]
    write_csv(os.path.join(out, "universal_sequence.csv"), header, rep.rows,
              {"config": cfg.config_hash})
    ms = [float(m) for m in rep.ms]
    emit_plot([(lbl, ms, list(devs)) for lbl, devs in
               zip(rep.data_labels, rep.deviations)],
              os.path.join(out, "universal_sequence.svg"),
              title="deviations along the argmin sequence", xlabel="m",
              ylabel="|H g(y_m) - g(x0)|")
    return EXIT_OK if rep.converged else EXIT_UNCONVERGED


def default_probe_data(dim: int = 1) -> list[DataSpec]:
    """Three bounded data continuous at the origin, gentle near it."""
    origin = (0.0,) * dim
    return [
        DataSpec("constant", 0.7, {"value": 0.7}),
        DataSpec("ramp", 0.5, {"center": origin, "halfwidth": 1.9,
                               "peak": 0.9}),
        DataSpec("ramp", 0.6, {"center": origin, "halfwidth": 1.5,
                               "peak": 0.35}),
    ]


# ---------------------------------------------------------------------------
# suite: the classification matrix with a worker pool

def _suite_cell(cfg: ExperimentConfig, lattice: Lattice, dom: str,
                s: float, p: float) -> dict:
    cell_cfg = ExperimentConfig(
        task="classify",
        kernel={"s": s, "p": p,
                "multiplier": cfg.kernel.get("multiplier", "none"),
                "lam": cfg.kernel.get("lam", 1.0)},
        lattice=cfg.lattice, domain={"name": dom, "x0": [0.0]},
        solver=cfg.solver, seed=cfg.seed)
    kernel = _build_kernel(cell_cfg)
    opts = _build_solver(cell_cfg)
    table = build_weight_table(kernel, lattice)
    mask = _build_mask(cell_cfg, lattice, table=table, opts=opts)
    rep = _classify.classify_point(table, mask, (0.0,), opts)
    oracle = _classify.geometric_oracle(kernel, mask, (0.0,))
    return {"domain": dom, "s": s, "p": p, "sp": s * p,
            "label": rep.label, "oracle": oracle,
            "agrees": rep.label == oracle,
            "borderline": abs(s * p - lattice.dim) < _capacity.BORDERLINE_BAND,
            "l_hat": rep.l_hat, "u_hat": rep.u_hat,
            "converged": rep.converged}


def _run_suite(cfg: ExperimentConfig, out: str, threads: int) -> int:
    lattice = _build_lattice(cfg)
    _expect(lattice.dim == 1, "lattice.dim", "the suite matrix is 1D")
    cells = [(dom, s, p) for dom in _SUITE_DOMAINS for s, p in _SUITE_PAIRS]
    results: dict[tuple, dict] = {}
    if threads <= 1:
        for dom, s, p in cells:
            results[(dom, s, p)] = _suite_cell(cfg, lattice, dom, s, p)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            futs = {ex.submit(_suite_cell, cfg, lattice, dom, s, p):
                    (dom, s, p) for dom, s, p in cells}
            for fut in concurrent.futures.as_completed(futs):
                results[futs[fut]] = fut.result()
    ordered = [results[key] for key in sorted(results)]

    doc = _stamp(cfg, lattice)
    doc["cells"] = ordered
    doc["all_match"] = all(c["agrees"] or c["borderline"] for c in ordered)
    write_json(os.path.join(out, "suite.json"), doc)
    write_csv(os.path.join(out, "suite.csv"),
              ["domain", "s", "p", "sp", "label", "oracle", "agrees",
               "borderline", "l_hat", "u_hat"],
              [(c["domain"], c["s"], c["p"], c["sp"], c["label"], c["oracle"],
                c["agrees"], c["borderline"], c["l_hat"], c["u_hat"])
               for c in ordered],
              {"config": cfg.config_hash, "h": lattice.h})
    ok = all(c["converged"] for c in ordered)
    return EXIT_OK if ok else EXIT_UNCONVERGED


# ---------------------------------------------------------------------------
# entry points

_RUNNERS = {
    "solve": _run_solve,
    "capacity": _run_capacity,
    "wiener": _run_wiener,
    "classify": _run_classify,
    "sweep": _run_sweep,
    "removability": _run_removability,
    "sharpness": _run_sharpness,
    "universal-sequence": _run_universal,
}


def run(config: ExperimentConfig, out: str, threads: int = 1) -> int:
    """Execute one experiment; write artifacts into `out`; return exit code."""
    os.makedirs(out, exist_ok=True)
    try:
        if config.task == "suite":
            return _run_suite(config, out, threads)
        return _RUNNERS[config.task](config, out)
    except ConfigError as exc:
        write_json(os.path.join(out, "error.json"),
                   {"error": "ConfigError", "message": str(exc)})
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FracBoundaryError as exc:
        write_json(os.path.join(out, "error.json"),
                   {"error": type(exc).__name__, "message": str(exc)})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracboundary",
        description="Boundary-regularity experiments for nonlocal "
                    "Dirichlet problems.")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", default=None,
                       help="JSON experiment config (defaults apply if "
                            "omitted)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="suite worker threads")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            cfg = load_config(args.config)
            _expect(cfg.task == args.task, "task",
                    f"config says {cfg.task!r} but the subcommand is "
                    f"{args.task!r}")
        else:
            cfg = ExperimentConfig.from_dict(example_config(args.task))
        if args.seed is not None:
            d = cfg.to_dict()
            d["seed"] = args.seed
            cfg = ExperimentConfig.from_dict(d)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.threads < 1:
        print("config error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
