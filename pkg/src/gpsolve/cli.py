"""Command-line driver: validated JSON configs in, deterministic CSV/JSON out.

Usage::

    gpsolve <subcommand> --config run.json --out results/ [--seed 0] [--allow-partial]

Subcommands: constants, thresholds, groundstate, evolve, sweep-beta, region.
Every run writes ``manifest.json`` next to its outputs.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field, asdict
import json
import math
from pathlib import Path
import platform
import sys
import time

import numpy as np
import scipy

from .grid import Domain, Grid, build_grid, principal_eigenpairs, analytic_eigenvalues
from .model import SystemParams, MassPair, Regime, exponents
from .constants import gn_constant, solve_Z, l2critical_identity_check
from .thresholds import threshold_report, region_sample
from .minimize import (ConstraintSpec, FlowOptions, INIT_KINDS, initial_guess,
                       normalized_gradient_flow, ground_state, verify_local_min, witness_table)
from .evolve import PERTURBATION_MODES, WaveState, stability_experiment, evolve as run_evolution
from .segregation import beta_sweep, limit_profile_check
from .io import write_csv, write_json, write_field, read_field
from . import __version__

__all__ = ["ConfigError", "RunConfig", "parse_config", "emit_config", "run", "main"]

SUBCOMMANDS = ("constants", "thresholds", "groundstate", "evolve", "sweep-beta", "region")
EXIT_OK, EXIT_ERROR, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class SolverConfig:
    n: int = 200
    dt: float | None = None
    tol: float = 1e-9
    max_iter: int = 200_000
    init: str = "multi"


@dataclass(frozen=True)
class ThresholdsConfig:
    alpha: float | None = None


@dataclass(frozen=True)
class GroundstateConfig:
    ball_alpha: float | str | None = "auto"
    witness_ks: tuple[float, ...] | None = None


@dataclass(frozen=True)
class EvolveConfig:
    T: float | None = None
    dt: float = 1e-2
    delta: float = 1e-2
    mode: str = "random"
    sample_every: int = 1
    groundstate: str | None = None


@dataclass(frozen=True)
class SweepConfig:
    betas: tuple[float, ...] = (-1.0, -10.0, -100.0, -1000.0, -10000.0)


@dataclass(frozen=True)
class RegionConfig:
    mode: str | None = None
    x: tuple[float, float, int] | None = None
    y: tuple[float, float, int] | None = None


@dataclass(frozen=True)
class RunConfig:
    domain: Domain
    params: SystemParams
    masses: MassPair
    solver: SolverConfig = SolverConfig()
    eigen_overrides: tuple[float, float] | None = None
    thresholds: ThresholdsConfig = ThresholdsConfig()
    groundstate: GroundstateConfig = GroundstateConfig()
    evolve: EvolveConfig = EvolveConfig()
    sweep: SweepConfig = SweepConfig()
    region: RegionConfig = RegionConfig()


_DOMAIN_KEYS = {"interval": {"kind", "length"}, "rectangle": {"kind", "lx", "ly"},
                "ball": {"kind", "radius", "dim"}}
_TOP_KEYS = {"domain", "params", "masses", "solver", "eigen_overrides", "thresholds",
             "groundstate", "evolve", "sweep", "region"}


def _num(errors, where, v, positive=False, allow_none=False, integer=False):
    if v is None and allow_none:
        return None
    ok = isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
    if integer:
        ok = ok and float(v).is_integer()
    if ok and positive and not v > 0:
        errors.append(f"{where} must be > 0, got {v}")
        return None
    if not ok:
        kind = "an integer" if integer else "a finite number"
        errors.append(f"{where} must be {kind}, got {v!r}")
        return None
    return int(v) if integer else float(v)


def _block(errors, data, name, cls, checks):
    raw = data.get(name, {})
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        errors.append(f"{name} must be an object")
        return cls()
    allowed = {f for f in cls.__dataclass_fields__}
    for k in sorted(set(raw) - allowed):
        errors.append(f"unknown key {name}.{k} (allowed: {', '.join(sorted(allowed))})")
    values = {}
    for k in allowed & set(raw):
        values[k] = checks[k](f"{name}.{k}", raw[k])
    return cls(**{k: v for k, v in values.items() if v is not _SKIP})


_SKIP = object()


def _triple(errors):
    def check(where, v):
        if v is None:
            return None
        if not (isinstance(v, list) and len(v) == 3):
            errors.append(f"{where} must be [lo, hi, count]")
            return _SKIP
        lo = _num(errors, where + "[0]", v[0])
        hi = _num(errors, where + "[1]", v[1])
        cnt = _num(errors, where + "[2]", v[2], positive=True, integer=True)
        if None in (lo, hi, cnt):
            return _SKIP
        if not hi > lo:
            errors.append(f"{where}: need hi > lo")
            return _SKIP
        return (lo, hi, cnt)
    return check


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Raises:
        ConfigError: listing every problem found, not just the first.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["configuration must be a JSON object"])
    errors: list[str] = []
    for k in sorted(set(data) - _TOP_KEYS):
        errors.append(f"unknown key {k!r} (allowed: {', '.join(sorted(_TOP_KEYS))})")
    for k in ("domain", "params", "masses"):
        if not isinstance(data.get(k), dict):
            errors.append(f"missing or malformed required block {k!r}")

    domain = None
    d = data.get("domain")
    if isinstance(d, dict):
        kind = d.get("kind")
        if kind not in _DOMAIN_KEYS:
            errors.append(f"domain.kind must be one of {sorted(_DOMAIN_KEYS)}, got {kind!r}")
        else:
            for k in sorted(set(d) - _DOMAIN_KEYS[kind]):
                errors.append(f"unknown key domain.{k} for kind {kind!r}")
            missing = sorted(_DOMAIN_KEYS[kind] - set(d))
            if missing:
                errors.append(f"domain of kind {kind!r} needs {', '.join(missing)}")
            else:
                if kind == "interval":
                    L = _num(errors, "domain.length", d["length"], positive=True)
                    domain = Domain.interval(L) if L else None
                elif kind == "rectangle":
                    lx = _num(errors, "domain.lx", d["lx"], positive=True)
                    ly = _num(errors, "domain.ly", d["ly"], positive=True)
                    domain = Domain.rectangle(lx, ly) if lx and ly else None
                else:
                    R = _num(errors, "domain.radius", d["radius"], positive=True)
                    dim = _num(errors, "domain.dim", d["dim"], positive=True, integer=True)
                    domain = Domain.ball(R, dim) if R and dim else None

    params = None
    N = None
    p = data.get("params")
    if isinstance(p, dict):
        keys = {"N", "p", "mu1", "mu2", "beta"}
        for k in sorted(set(p) - keys):
            errors.append(f"unknown key params.{k}")
        missing = sorted(keys - set(p))
        if missing:
            errors.append(f"params needs {', '.join(missing)}")
        else:
            N = _num(errors, "params.N", p["N"], positive=True, integer=True)
            vals = [_num(errors, f"params.{k}", p[k]) for k in ("p", "mu1", "mu2", "beta")]
            if N is not None and None not in vals:
                errs = SystemParams.validation_errors(N, *vals)
                errors.extend(f"params: {e}" for e in errs)
                if not errs:
                    params = SystemParams(N, *vals)
    if domain is not None and N is not None and N != domain.dim:
        errors.append(f"params.N = {N} does not match the {domain.kind} domain "
                      f"(dimension {domain.dim})")

    masses = None
    m = data.get("masses")
    if isinstance(m, dict):
        for k in sorted(set(m) - {"rho1", "rho2"}):
            errors.append(f"unknown key masses.{k}")
        if {"rho1", "rho2"} - set(m):
            errors.append("masses needs rho1 and rho2")
        else:
            r1 = _num(errors, "masses.rho1", m["rho1"])
            r2 = _num(errors, "masses.rho2", m["rho2"])
            if r1 is not None and r2 is not None:
                if r1 < 0 or r2 < 0 or r1 + r2 == 0:
                    errors.append(f"masses must be >= 0 and not both zero, got ({r1}, {r2})")
                else:
                    masses = MassPair(r1, r2)

    def init_check(where, v):
        if v not in ("multi",) + INIT_KINDS[:-1]:
            errors.append(f"{where} must be 'multi' or one of {INIT_KINDS[:-1]}, got {v!r}")
            return _SKIP
        return v

    solver = _block(errors, data, "solver", SolverConfig, {
        "n": lambda w, v: _num(errors, w, v, positive=True, integer=True) or _SKIP,
        "dt": lambda w, v: _num(errors, w, v, positive=True, allow_none=True),
        "tol": lambda w, v: _num(errors, w, v, positive=True) or _SKIP,
        "max_iter": lambda w, v: _num(errors, w, v, positive=True, integer=True) or _SKIP,
        "init": init_check,
    })
    if solver.n < 3:
        errors.append(f"solver.n must be >= 3, got {solver.n}")

    overrides = None
    eo = data.get("eigen_overrides")
    if eo is not None:
        if not isinstance(eo, dict) or set(eo) != {"lambda1", "lambda2"}:
            errors.append("eigen_overrides must be an object with exactly lambda1 and lambda2")
        else:
            l1 = _num(errors, "eigen_overrides.lambda1", eo["lambda1"], positive=True)
            l2 = _num(errors, "eigen_overrides.lambda2", eo["lambda2"], positive=True)
            if l1 and l2:
                if l2 < l1:
                    errors.append("eigen_overrides: need lambda2 >= lambda1")
                else:
                    overrides = (l1, l2)

    thresholds = _block(errors, data, "thresholds", ThresholdsConfig, {
        "alpha": lambda w, v: _num(errors, w, v, positive=True, allow_none=True),
    })

    def ball_check(where, v):
        if v is None or v in ("auto", "bar_alpha"):
            return v
        x = _num(errors, where, v, positive=True)
        return _SKIP if x is None else x

    def ks_check(where, v):
        if v is None:
            return None
        if not isinstance(v, list) or not v:
            errors.append(f"{where} must be a non-empty list")
            return _SKIP
        ks = [_num(errors, f"{where}[{i}]", k, positive=True) for i, k in enumerate(v)]
        return _SKIP if None in ks else tuple(ks)

    groundstate = _block(errors, data, "groundstate", GroundstateConfig,
                         {"ball_alpha": ball_check, "witness_ks": ks_check})

    def mode_check(where, v):
        if v not in PERTURBATION_MODES:
            errors.append(f"{where} must be one of {PERTURBATION_MODES}, got {v!r}")
            return _SKIP
        return v

    def path_check(where, v):
        if v is None or isinstance(v, str):
            return v
        errors.append(f"{where} must be a path string")
        return _SKIP

    evolve = _block(errors, data, "evolve", EvolveConfig, {
        "T": lambda w, v: _num(errors, w, v, positive=True, allow_none=True),
        "dt": lambda w, v: _num(errors, w, v, positive=True) or _SKIP,
        "delta": lambda w, v: (lambda x: _SKIP if x is None else x)(_num(errors, w, v)),
        "mode": mode_check,
        "sample_every": lambda w, v: _num(errors, w, v, positive=True, integer=True) or _SKIP,
        "groundstate": path_check,
    })
    if evolve.delta < 0:
        errors.append(f"evolve.delta must be >= 0, got {evolve.delta}")

    def betas_check(where, v):
        if not isinstance(v, list) or not v:
            errors.append(f"{where} must be a non-empty list")
            return _SKIP
        bs = [_num(errors, f"{where}[{i}]", b) for i, b in enumerate(v)]
        if None in bs:
            return _SKIP
        if any(b >= 0 for b in bs) or any(b2 >= b1 for b1, b2 in zip(bs, bs[1:])):
            errors.append(f"{where} must be negative and strictly decreasing")
            return _SKIP
        return tuple(bs)

    sweep = _block(errors, data, "sweep", SweepConfig, {"betas": betas_check})

    def region_mode(where, v):
        if v is None or v in ("h2", "assnice", "mainassL"):
            return v
        errors.append(f"{where} must be 'h2', 'assnice' or 'mainassL', got {v!r}")
        return _SKIP

    region = _block(errors, data, "region", RegionConfig,
                    {"mode": region_mode, "x": _triple(errors), "y": _triple(errors)})
    if region.mode == "h2" and params is not None and params.regime is not Regime.H2:
        errors.append(f"region.mode 'h2' needs p = 1 + 4/N = {1 + 4 / params.N:g}, got p = {params.p}")

    if errors:
        raise ConfigError(errors)
    return RunConfig(domain, params, masses, solver, overrides, thresholds, groundstate,
                     evolve, sweep, region)


def config_dict(cfg: RunConfig) -> dict:
    """Fully explicit JSON-ready form of a config (defaults filled)."""
    out = {
        "domain": cfg.domain.describe(),
        "params": {"N": cfg.params.N, "p": cfg.params.p, "mu1": cfg.params.mu1,
                   "mu2": cfg.params.mu2, "beta": cfg.params.beta},
        "masses": {"rho1": cfg.masses.rho1, "rho2": cfg.masses.rho2},
        "solver": asdict(cfg.solver),
        "eigen_overrides": (None if cfg.eigen_overrides is None else
                            {"lambda1": cfg.eigen_overrides[0], "lambda2": cfg.eigen_overrides[1]}),
        "thresholds": asdict(cfg.thresholds),
        "groundstate": asdict(cfg.groundstate),
        "evolve": asdict(cfg.evolve),
        "sweep": asdict(cfg.sweep),
        "region": asdict(cfg.region),
    }
    return json.loads(json.dumps(out))   # tuples -> lists


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(config_dict(cfg), indent=2) + "\n"


# ---------------------------------------------------------------- running


@dataclass
class _Run:
    cfg: RunConfig
    out: Path
    seed: int
    allow_partial: bool
    files: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    _grid: Grid | None = None

    @property
    def grid(self) -> Grid:
        if self._grid is None:
            self._grid = build_grid(self.cfg.domain, self.cfg.solver.n)
        return self._grid

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out / name

    def eigenvalues(self) -> tuple[float, float, str]:
        if self.cfg.eigen_overrides is not None:
            return (*self.cfg.eigen_overrides, "override")
        if self.cfg.domain.kind == "ball":
            # the radial grid only carries radial modes; lambda2 is not radial
            return (principal_eigenpairs(self.grid, 1)[0].lam,
                    float(analytic_eigenvalues(self.cfg.domain, 2)[1]), "grid+analytic")
        pairs = principal_eigenpairs(self.grid, 2)
        return pairs[0].lam, pairs[1].lam, "grid"

    def opts(self) -> FlowOptions:
        s = self.cfg.solver
        return FlowOptions(dt=s.dt, tol=s.tol, max_iter=s.max_iter)


def _constant(cfg: RunConfig) -> float:
    return gn_constant(cfg.params.N, cfg.params.p).value


def _cmd_constants(run: _Run) -> None:
    N, p = run.cfg.params.N, run.cfg.params.p
    c = gn_constant(N, p)
    out = {"N": N, "p": p, "regime": run.cfg.params.regime.value,
           "exponents": dict(run.cfg.params.exponents._asdict()),
           "C": c.value, "provenance": c.provenance}
    if run.cfg.params.regime is not Regime.H4:
        Z = solve_Z(N, p)
        out["Z"] = {"z0": Z.z0, "mass": Z.mass, "kinetic": Z.kinetic, "lp1": Z.lp1,
                    "residual": Z.residual}
    if N <= 2:
        ident = l2critical_identity_check(N)
        out["l2_critical"] = {"C_N": gn_constant(N, 1 + 4 / N).value,
                              "threshold": ident.threshold, "z_mass": ident.z_mass,
                              "z_mass_power": ident.z_mass_power, "rel_gap": ident.rel_gap}
    write_json(run.path("constants.json"), out)
    rows = [(N, p)]
    if N <= 2 and p != 1 + 4 / N:
        rows.append((N, 1 + 4 / N))
    table = [(n, q, *exponents(n, q), gn_constant(n, q).value) for n, q in rows]
    write_csv(run.path("constants.csv"), ["N", "p", "a", "r", "C"], table)
    sys.stdout.write((run.out / "constants.csv").read_text())


def _thresholds_payload(run: _Run) -> dict:
    cfg = run.cfg
    l1, l2, source = run.eigenvalues()
    C = _constant(cfg)
    rep = threshold_report(cfg.params, cfg.masses, C, l1, l2)
    out = {"eigenvalue_source": source, "report": rep.to_dict()}
    alpha = cfg.thresholds.alpha
    if alpha is not None and rep.Lambda is not None and rep.a >= 1:
        from .thresholds import hat_c_bounds
        lam_j = l1 if (rep.j or 1) == 1 else l2
        lo, up = hat_c_bounds(alpha, cfg.masses, rep.Lambda, lam_j, rep.a)
        out["hat_c_bounds"] = {"alpha": alpha, "lower": lo, "upper": up}
    return out


def _region(run: _Run, prefix: str) -> None:
    cfg = run.cfg
    params = cfg.params
    C = _constant(cfg)
    mode = cfg.region.mode or ("h2" if params.regime is Regime.H2 else "assnice")
    kwargs = {}
    if mode == "h2":
        T = (params.N + 2) / (params.N * C)
        default = (0.0, 1.2 * T, 61)
    else:
        if params.regime not in (Regime.H3, Regime.H4):
            raise ValueError(f"region mode {mode!r} needs p > 1 + 4/N")
        l1, l2, _ = run.eigenvalues()
        kwargs = {"lambda1": l1, "lambda2": l2}
        rep = threshold_report(params, MassPair(1.0, 0.0), C, l1, l2)
        a, r = params.exponents
        # single-component budget along each axis
        top = max((rep.R / mu) ** (1 / (2 * r + a - 1)) for mu in (params.mu1, params.mu2))
        default = (0.0, 1.5 * top, 41)
    xs = cfg.region.x or default
    ys = cfg.region.y or default
    x = np.linspace(xs[0], xs[1], xs[2])
    y = np.linspace(ys[0], ys[1], ys[2])
    sample = region_sample(params, C, x, y, mode=mode, **kwargs)
    write_csv(run.path(f"{prefix}.csv"), ["x", "y", "pass"], sample.rows())
    if sample.boundary is not None:
        write_csv(run.path(f"{prefix}_boundary.csv"), ["x", "y"], sample.boundary.tolist())


def _cmd_thresholds(run: _Run) -> None:
    write_json(run.path("thresholds.json"), _thresholds_payload(run))
    if run.cfg.params.regime is not Regime.H1:
        _region(run, "region")


def _cmd_region(run: _Run) -> None:
    _region(run, "region")


def _ball_alpha(run: _Run):
    cfg = run.cfg
    choice = cfg.groundstate.ball_alpha
    supercritical = cfg.params.regime in (Regime.H3, Regime.H4)
    if choice is None or (choice == "auto" and not supercritical):
        return None, None
    l1, l2, _ = run.eigenvalues()
    rep = threshold_report(cfg.params, cfg.masses, _constant(cfg), l1, l2)
    if choice in ("auto", "bar_alpha"):
        if rep.bar_alpha is None:
            raise ValueError("ball_alpha 'bar_alpha' needs p > 1 + 4/N")
        return rep.bar_alpha, rep
    return float(choice), rep


def _gs_payload(run: _Run, res, runs, certificate) -> dict:
    return {
        "domain": run.cfg.domain.describe(),
        "grid": run.grid.describe(),
        "params": config_dict(run.cfg)["params"],
        "masses": {"rho1": res.masses.rho1, "rho2": res.masses.rho2},
        "result": res.summary(),
        "starts": [r.summary() for r in runs],
        "certificate": certificate,
        "fields": {"u1": "u1.csv", "u2": "u2.csv"},
    }


def _cmd_groundstate(run: _Run, witness: int | None = None) -> None:
    cfg, grid = run.cfg, run.grid
    alpha, rep = _ball_alpha(run)
    spec = ConstraintSpec(cfg.masses, alpha)
    if cfg.solver.init == "multi":
        res, runs = ground_state(cfg.params, grid, spec, run.opts())
    else:
        init = initial_guess(cfg.solver.init, cfg.masses, grid)
        res = normalized_gradient_flow(cfg.params, grid, spec, init, run.opts(),
                                       init_name=cfg.solver.init)
        runs = [res]
    cert = None
    if alpha is not None:
        cert = verify_local_min(res, spec, rep).as_dict()
    write_json(run.path("groundstate.json"), _gs_payload(run, res, runs, cert))
    write_field(run.path("u1.csv"), grid, res.u1)
    write_field(run.path("u2.csv"), grid, res.u2)
    write_csv(run.path("energy_history.csv"), ["iteration", "energy"],
              enumerate(res.energy_history.tolist()))
    if not res.converged:
        run.flags.append(f"groundstate: {res.message}")
    if witness is not None:
        ks = cfg.groundstate.witness_ks
        if ks is None:
            dom = cfg.domain
            room = dom.extents[0] / 4 if dom.kind == "interval" else min(dom.extents[0] / 4,
                                                                          dom.extents[1] / 2)
            k0 = math.floor(1 / room) + 1
            ks = tuple(float(k) for k in range(k0, max(k0, witness) + 1))
        table = witness_table(cfg.params, grid, cfg.masses, ks)
        write_csv(run.path("witness.csv"), ["k", "kinetic", "energy"], table.tolist())


def _load_groundstate(run: _Run, path: Path):
    from .minimize import GroundStateResult
    meta = json.loads(path.read_text())
    if meta["domain"] != run.cfg.domain.describe() or meta["grid"]["n"] != list(run.grid.n):
        raise ValueError(f"ground state in {path} was computed on a different grid")
    grid = run.grid
    u1 = read_field(path.parent / meta["fields"]["u1"], grid)
    u2 = read_field(path.parent / meta["fields"]["u2"], grid)
    r = meta["result"]
    nan = lambda v: math.nan if v is None else v
    masses = MassPair(**meta["masses"])
    return GroundStateResult(u1=u1, u2=u2, omega1=nan(r["omega1"]), omega2=nan(r["omega2"]),
                             energy=r["energy"], kinetic_total=r["kinetic_total"],
                             converged=r["converged"], boundary_hit=r["boundary_hit"],
                             iterations=r["iterations"], residual=r["residual"], dt=r["dt"],
                             params=run.cfg.params, masses=masses, grid=grid,
                             init=r["init"], message=r["message"])


def _cmd_evolve(run: _Run, config_dir: Path) -> None:
    cfg, grid = run.cfg, run.grid
    ev = cfg.evolve
    if ev.groundstate is not None:
        gs_path = Path(ev.groundstate)
        if not gs_path.is_absolute():
            gs_path = config_dir / gs_path
        gs = _load_groundstate(run, gs_path)
    else:
        alpha, _ = _ball_alpha(run)
        gs, _ = ground_state(cfg.params, grid, ConstraintSpec(cfg.masses, alpha), run.opts())
    if not gs.converged:
        run.flags.append("evolve: ground state not converged")
        if not run.allow_partial:
            return
    T = ev.T if ev.T is not None else 20.0 / principal_eigenpairs(grid, 1)[0].lam
    if gs.converged:
        trace = stability_experiment(cfg.params, gs, ev.mode, ev.delta, T, ev.dt,
                                     seed=run.seed, sample_every=ev.sample_every)
    else:
        trace = run_evolution(cfg.params, WaveState(grid, gs.u1, gs.u2), T, ev.dt,
                              sample_every=ev.sample_every, gs=gs)
    write_csv(run.path("trace.csv"), ["t", "mass1", "mass2", "energy", "dist"], trace.rows())
    m1, m2 = trace.mass_drift()
    write_json(run.path("evolve.json"), {
        "T": T, "dt": ev.dt, "delta": ev.delta, "mode": ev.mode, "seed": run.seed,
        "sup_distance": trace.sup_distance, "mass_drift": [m1, m2],
        "energy_drift_rate": trace.energy_drift_rate(), "halvings": trace.halvings,
        "blowup": trace.blowup,
    })
    if trace.blowup:
        run.flags.append("evolve: blow-up detected")


def _cmd_sweep(run: _Run) -> None:
    cfg = run.cfg
    recs = beta_sweep(cfg.params, cfg.masses, cfg.sweep.betas, run.grid, run.opts())
    write_csv(run.path("sweep.csv"), ["beta", "energy", "omega1", "omega2", "overlap", "holder_proxy"],
              (r.row() for r in recs))
    lim = limit_profile_check(recs[-1])
    write_json(run.path("sweep.json"), {
        "records": [{"beta": r.beta, "converged": r.result.converged,
                     "iterations": r.result.iterations, "residual": r.result.residual,
                     "h1_norms": r.h1_norms, "sup_norms": r.sup_norms,
                     "energy_jump": r.energy_jump} for r in recs],
        "limit_profile": asdict(lim),
    })
    for r in recs:
        if not r.result.converged:
            run.flags.append(f"sweep-beta: beta = {r.beta} not converged")
        if r.energy_jump:
            run.flags.append(f"sweep-beta: possible branch switch at beta = {r.beta}")


def run(subcommand: str, cfg: RunConfig, out, seed: int = 0, allow_partial: bool = False,
        witness: int | None = None, config_dir=".") -> int:
    """Execute one subcommand, write its artifacts and the manifest; return the exit status."""
    if subcommand not in SUBCOMMANDS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    r = _Run(cfg, out, int(seed), allow_partial)
    start = time.perf_counter()
    if subcommand == "constants":
        _cmd_constants(r)
    elif subcommand == "thresholds":
        _cmd_thresholds(r)
    elif subcommand == "region":
        _cmd_region(r)
    elif subcommand == "groundstate":
        _cmd_groundstate(r, witness)
    elif subcommand == "evolve":
        _cmd_evolve(r, Path(config_dir))
    else:
        _cmd_sweep(r)
    status = EXIT_PARTIAL if (r.flags and not allow_partial) else EXIT_OK
    write_json(out / "manifest.json", {
        "subcommand": subcommand,
        "config": config_dict(cfg),
        "seed": r.seed,
        "witness": witness,
        "allow_partial": allow_partial,
        "outputs": r.files,
        "flags": r.flags,
        "exit_status": status,
        "versions": {"gpsolve": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_time_s": time.perf_counter() - start,
    })
    return status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="gpsolve", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="seed for random perturbations")
    ap.add_argument("--allow-partial", action="store_true",
                    help="exit 0 even when a run is flagged as not converged")
    ap.add_argument("--witness", type=int, metavar="K",
                    help="groundstate: also tabulate the concentrating sequence up to k = K")
    args = ap.parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        ap.error("--seed must be an unsigned 64-bit integer")
    if args.witness is not None and args.subcommand != "groundstate":
        ap.error("--witness only applies to groundstate")
    cfg_path = Path(args.config)
    try:
        cfg = parse_config(cfg_path.read_text())
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    try:
        status = run(args.subcommand, cfg, args.out, args.seed, args.allow_partial,
                     args.witness, cfg_path.parent)
    except (OSError, ValueError, KeyError) as exc:
        print(f"gpsolve {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if status != EXIT_OK:
        print(f"gpsolve {args.subcommand}: flagged run, see {Path(args.out) / 'manifest.json'}",
              file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
