"""Batch runner: build an example family from a JSON config and run the check suites.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
configuration or construction error.
"""
from __future__ import annotations

import argparse
import csv
import importlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .ambient import SpaceFormSpec, standard_point
from .algebra import eps_trig
from .errors import ConfigError, GeometryError, NotHopf
from .hopf import (
    constancy_scan,
    horizontal_eigenpairs,
    hopf_identity_residuals,
    eigenspace_residuals,
    principal_spectrum,
)
from .hypersurface import (
    HypersurfacePatch,
    connection_residuals,
    contact_residuals,
    frames_at,
    gauss_codazzi_residuals,
)
from .tube import (
    CoreSpec,
    KERNEL_TOL,
    focal_map,
    focal_radius,
    geodesic_sphere_patch,
    hopf_law,
    j_invariance_check,
    tube_over_linear_core,
)

FAMILIES = ("geodesic-sphere", "tube-linear-core", "user-lift")

DEFAULT_TOLERANCES = {
    "contact": 1e-8,
    "structure": 1e-3,
    "hopf": 1e-5,
    "hopf_law": 1e-5,
    "phi_invariance": 1e-5,
    "companion": 1e-4,
    "theta": 1e-6,
    "quadric": 1e-8,
    "focal_xi": 1e-6,
    "j_invariance": 1e-4,
}

CONFIG_KEYS = (
    "n", "eps", "c", "p", "family", "theta", "grid", "fd_step", "tolerances",
    "core_dim", "focal_a", "lift", "radius", "output", "format",
)


@dataclass
class RunConfig:
    n: int = 2
    eps: int = 1
    c: int = 1
    p: int = 0
    family: str = "geodesic-sphere"
    theta: Optional[float] = None
    grid: list = field(default_factory=lambda: [3])
    fd_step: float = 1e-3
    tolerances: dict = field(default_factory=dict)
    core_dim: int = 1
    focal_a: Optional[float] = None
    lift: Optional[str] = None
    radius: float = 0.4
    output: Optional[str] = None
    format: str = "json"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(data) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
        return cls.from_dict(data)

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        for name in ("n", "eps", "c", "p", "core_dim"):
            need(isinstance(getattr(self, name), int) and not isinstance(getattr(self, name), bool),
                 f"{name} must be an integer")
        need(self.n >= 1, "n must be >= 1")
        need(self.eps in (1, -1), "eps must be +1 or -1")
        need(self.c in (1, -1), "c must be +1 or -1")
        need(self.family in FAMILIES, f"family must be one of {', '.join(FAMILIES)}")
        if self.family != "user-lift":
            need(isinstance(self.theta, (int, float)) and math.isfinite(self.theta),
                 "theta is required for generated families")
        else:
            need(isinstance(self.lift, str) and ":" in self.lift, "user-lift needs lift = 'module:attr'")
        if self.family == "tube-linear-core":
            need(1 <= self.core_dim <= self.n - 1, "core_dim must lie in [1, n-1]")
        grid = self.grid if isinstance(self.grid, list) else [self.grid]
        need(len(grid) > 0, "grid is empty")
        need(all(isinstance(k, int) and not isinstance(k, bool) and k >= 1 for k in grid),
             "grid sizes must be integers >= 1")
        self.grid = grid
        need(isinstance(self.fd_step, (int, float)) and 0 < self.fd_step < 0.1, "fd_step must lie in (0, 0.1)")
        need(isinstance(self.radius, (int, float)) and 0 < self.radius < 1, "radius must lie in (0, 1)")
        need(isinstance(self.tolerances, dict), "tolerances must be a JSON object")
        bad = sorted(set(self.tolerances) - set(DEFAULT_TOLERANCES))
        need(not bad, f"unknown tolerance names: {', '.join(bad)}")
        need(all(isinstance(v, (int, float)) and v > 0 for v in self.tolerances.values()),
             "tolerances must be positive")
        need(self.focal_a is None or isinstance(self.focal_a, (int, float)), "focal_a must be a number")
        need(self.format in ("json", "csv"), "format must be json or csv")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def space_form(self) -> SpaceFormSpec:
        try:
            return SpaceFormSpec(n=self.n, eps=self.eps, c=self.c, p=self.p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        out = {
            "n": self.n, "eps": self.eps, "c": self.c, "p": self.p,
            "family": self.family, "theta": self.theta, "grid": list(self.grid),
            "fd_step": self.fd_step,
            "tolerances": {k: self.tol(k) for k in DEFAULT_TOLERANCES},
        }
        if self.family == "tube-linear-core":
            out["core_dim"] = self.core_dim
        if self.family == "user-lift":
            out["lift"] = self.lift
        if self.focal_a is not None:
            out["focal_a"] = self.focal_a
        out["radius"] = self.radius
        return out


def build_patch(cfg: RunConfig) -> HypersurfacePatch:
    spec = cfg.space_form()
    kw = {"radius": cfg.radius, "fd_step": cfg.fd_step}
    if cfg.family == "geodesic-sphere":
        return geodesic_sphere_patch(spec, standard_point(spec), cfg.theta, **kw)
    if cfg.family == "tube-linear-core":
        core = CoreSpec.coordinate(spec, range(cfg.core_dim + 1))
        return tube_over_linear_core(spec, core, cfg.theta, **kw)
    module, _, attr = cfg.lift.partition(":")
    try:
        factory = getattr(importlib.import_module(module), attr)
    except (ImportError, AttributeError) as exc:
        raise ConfigError(f"cannot load user lift {cfg.lift!r}: {exc}") from None
    patch = factory(spec)
    if not isinstance(patch, HypersurfacePatch):
        raise ConfigError("user lift factory must return a HypersurfacePatch")
    return patch.with_step(cfg.fd_step)


# --------------------------------------------------------------------------
# reports


@dataclass
class Entry:
    check: str
    value: float
    tolerance: float
    passed: bool
    error: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"check": self.check, "value": self.value, "tolerance": self.tolerance, "pass": self.passed}
        if self.error:
            out["error"] = self.error
        return out


@dataclass
class SuiteReport:
    command: str
    config: RunConfig
    seed: int
    entries: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    row_header: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def check(self, name, value, tol, error=None, passed=None) -> None:
        value = float(value)
        ok = bool(value <= tol) if passed is None else bool(passed)
        self.entries.append(Entry(name, value, float(tol), ok, None if ok else error))

    def residuals(self, report, tol, prefix="", error=None) -> None:
        for label in report.labels():
            self.check(prefix + label, report.max(label), tol, error)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "results": {
                "checks": [e.to_dict() for e in self.entries],
                "summary": self.summary,
                "warnings": self.warnings,
            },
            "pass": self.passed,
            "provenance": {
                "command": self.command,
                "package": "hopfsurf",
                "version": __version__,
                "seed": self.seed,
            },
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.to_dict()), indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.rows:
            w.writerow(self.row_header)
            w.writerows(self.rows)
        else:
            w.writerow(["check", "value", "tolerance", "pass", "error"])
            for e in self.entries:
                w.writerow([e.check, repr(e.value), repr(e.tolerance), e.passed, e.error or ""])
        return buf.getvalue()


def _clean(obj):
    """Plain Python types for json; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _grid(cfg: RunConfig, patch: HypersurfacePatch) -> np.ndarray:
    try:
        return patch.grid(cfg.grid, margin=patch.residual_reach() * 1.001)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _fmt(x: float) -> str:
    return repr(float(x))


# --------------------------------------------------------------------------
# suites


def run_verify(cfg: RunConfig, seed: int = 0) -> SuiteReport:
    patch = build_patch(cfg)
    U = _grid(cfg, patch)
    rep = SuiteReport("verify", cfg, seed)
    fr = frames_at(patch, U)
    rep.residuals(contact_residuals(fr, seed=seed), cfg.tol("contact"))

    tol = cfg.tol("structure")
    gc = gauss_codazzi_residuals(patch, U, tol=tol, strict=False)
    for label in gc.labels():
        err = "StencilTooCoarse" if label.startswith("stencil:") else None
        rep.check(label, gc.max(label), tol, err)
    rep.residuals(connection_residuals(patch, U), tol)

    try:
        rep.residuals(hopf_identity_residuals(patch, U), cfg.tol("hopf"))
        scan = constancy_scan(patch, U)
        rep.check("constancy", scan.max_deviation, cfg.tol("hopf"))
        rep.summary["constancy"] = scan.to_dict()
        if cfg.family != "user-lift":
            law = hopf_law(cfg.theta, patch.spec.eps_prime)
            rep.check("hopf_law", abs(scan.mean_a - law), cfg.tol("hopf_law"))
    except NotHopf as exc:
        rep.check("hopf", math.inf, cfg.tol("hopf"), f"NotHopf: {exc}", passed=False)
    rep.summary["grid_points"] = int(U.shape[0])
    rep.summary["family"] = patch.name
    return rep


def run_spectrum(cfg: RunConfig, seed: int = 0) -> SuiteReport:
    patch = build_patch(cfg)
    U = _grid(cfg, patch)
    rep = SuiteReport("spectrum", cfg, seed)
    fr = frames_at(patch, U)
    d = patch.dim
    rep.row_header = [f"u{i}" for i in range(d)] + [
        "eigenvalues", "multiplicities", "hopf_a", "phi_invariance_defects",
    ]
    quad = comp = mult_err = 0.0
    counts = set()
    first = None
    for k in range(U.shape[0]):
        f = fr.at(k)
        sp = principal_spectrum(f)
        first = first or sp
        counts.add(len(sp.eigenvalues))
        mult_err = max(mult_err, abs(sp.total_multiplicity - d))
        defects = []
        try:
            l4 = eigenspace_residuals(f)
            if "phi_invariance" in l4:
                quad = max(quad, l4.max("phi_invariance"))
                comp = max(comp, l4.max("companion"))
            ce = patch.spec.level
            defects = [k_ ** 2 - sp.hopf_value * k_ - ce for k_, _ in horizontal_eigenpairs(f)]
        except GeometryError as exc:
            rep.warnings.append(f"point {k}: {type(exc).__name__}")
        vals = ";".join(
            _fmt(e.value.real) if e.classification != "complex-pair" else f"{_fmt(e.value.real)}{e.value.imag:+.17g}i"
            for e in sp.eigenvalues
        )
        rep.rows.append(
            [_fmt(x) for x in U[k]]
            + [vals, ";".join(str(e.multiplicity) for e in sp.eigenvalues), _fmt(sp.hopf_value),
               ";".join(_fmt(x) for x in defects)]
        )
    rep.check("multiplicity_sum", mult_err, 0.5)
    rep.check("eigen:phi_invariance", quad, cfg.tol("phi_invariance"))
    rep.check("eigen:companion", comp, cfg.tol("companion"))
    rep.summary["spectrum"] = first.to_dict()
    rep.summary["cluster_counts"] = sorted(counts)
    rep.summary["grid_points"] = int(U.shape[0])
    rep.summary["family"] = patch.name
    return rep


def run_tube(cfg: RunConfig, seed: int = 0) -> SuiteReport:
    patch = build_patch(cfg)
    U = _grid(cfg, patch)
    rep = SuiteReport("tube", cfg, seed)
    eps_p = patch.spec.eps_prime
    a_measured = constancy_scan(patch, U).mean_a
    a = a_measured if cfg.focal_a is None else float(cfg.focal_a)
    theta = focal_radius(a, eps_p)  # TubeRadiusUndefined propagates as a construction error
    if cfg.family != "user-lift":
        rep.check("hopf_law", abs(a_measured - hopf_law(cfg.theta, eps_p)), cfg.tol("hopf_law"))
        rep.check("theta_roundtrip", abs(theta - cfg.theta), cfg.tol("theta"))
    rng = np.random.default_rng(seed)
    d = patch.dim
    rep.row_header = [f"u{i}" for i in range(d)] + [
        "theta", "numeric_rank", "kernel_dim", "rank_formula", "j_invariance",
    ]
    ranks, kdims, quad, xi_img, jinv, mismatches = set(), set(), 0.0, 0.0, 0.0, 0
    for k in range(U.shape[0]):
        fm = focal_map(patch, U[k], theta)
        ranks.add(fm.numeric_rank)
        kdims.add(fm.kernel_dim)
        quad = max(quad, fm.quadric_residual)
        xi_img = max(xi_img, float(np.linalg.norm(fm.xi_image)))
        mismatches += fm.rank_warning
        f = frames_at(patch, U[k : k + 1]).at(0)
        co, si = eps_trig(eps_p, theta)
        probes = [X for kap, X in horizontal_eigenpairs(f) if abs(co - si * kap) > KERNEL_TOL * (abs(co) + abs(si * kap))]
        if len(probes) >= 2:
            w = rng.standard_normal(len(probes))
            probes.append(np.sum([wi * X for wi, X in zip(w, probes)], axis=0))
        local = 0.0
        for X in probes:
            local = max(local, j_invariance_check(patch, U[k], theta, X))
        jinv = max(jinv, local)
        rep.rows.append(
            [_fmt(x) for x in U[k]]
            + [_fmt(theta), fm.numeric_rank, fm.kernel_dim, fm.rank_formula, _fmt(local)]
        )
    rep.check("quadric", quad, cfg.tol("quadric"))
    rep.check("focal_xi", xi_img, cfg.tol("focal_xi"))
    rep.check("rank_even", float(any(r % 2 for r in ranks)), 0.5)
    rep.check("j_invariance", jinv, cfg.tol("j_invariance"))
    if cfg.family != "user-lift":
        core_rank = 2 * cfg.core_dim if cfg.family == "tube-linear-core" else 0
        rep.check("rank_matches_core", float(ranks != {core_rank}), 0.5)
    if mismatches:
        rep.warnings.append(
            f"rank formula 2n - dim ker disagrees with the numeric rank at {mismatches} of {U.shape[0]} points"
        )
    rep.summary.update(
        {
            "hopf_a": a_measured,
            "theta_configured": cfg.theta,
            "theta_recovered": theta,
            "numeric_rank": sorted(ranks),
            "kernel_dim": sorted(kdims),
            "kernel_dim_formula": sorted(2 * patch.spec.n - k for k in kdims),
            "rank_even": all(r % 2 == 0 for r in ranks),
            "j_invariance_max": jinv,
            "grid_points": int(U.shape[0]),
            "family": patch.name,
        }
    )
    return rep


COMMANDS = {"verify": run_verify, "spectrum": run_spectrum, "tube": run_tube}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopfsurf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="flat JSON run configuration")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
        p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        rep = COMMANDS[args.command](cfg, seed=args.seed)
    except (GeometryError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    fmt = args.format or cfg.format
    text = rep.to_json() if fmt == "json" else rep.to_csv()
    out = args.out or cfg.output
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for e in rep.entries:
        if not e.passed:
            print(f"FAIL {e.check}: {e.value!r} > {e.tolerance!r} {e.error or ''}".rstrip(), file=sys.stderr)
    return 0 if rep.passed else 1

