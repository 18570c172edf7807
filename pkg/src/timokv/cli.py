"""Command-line front end: simulate | spectrum | resolvent | verify."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Literal, Optional

import mpmath
import numpy as np
import scipy
import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator

from . import __version__
from .beam_model import (BeamParameters, DampingKind, DampingProfile, GridState, ModelError,
                         validate_hypothesis)
from .discretize import assemble
from .evolve import NumericalFailure, fit_decay_exponent, simulate
from .resolvent import ResolventError, peak_frequencies, resolvent_norm_discrete
from .spectra import SpectralConfig, SpectralError, find_roots

ENV_PREFIX = "TIMOKV_"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BeamCfg(_Strict):
    rho1: PositiveFloat = 1.0
    rho2: PositiveFloat = 1.0
    k1: PositiveFloat = 1.0
    k2: PositiveFloat = 1.0
    L: PositiveFloat = 1.0


class DampingCfg(_Strict):
    kind: Literal["step", "global", "piecewise", "smooth", "zero"] = "step"
    alpha: float = 0.5
    beta: Optional[float] = None
    d0: PositiveFloat = 1.0
    table: Optional[list[tuple[float, float, float]]] = None
    expr: Optional[str] = None

    @model_validator(mode="after")
    def _needs(self):
        if self.kind == "piecewise" and not self.table:
            raise ValueError("piecewise damping needs a table of [x0, x1, value] rows")
        if self.kind == "smooth" and not self.expr:
            raise ValueError("smooth damping needs expr (a numpy expression in x)")
        return self


class InitialCfg(_Strict):
    u: str = "x**2*(1-x)**2"
    v: str = "0"
    y: str = "0"
    z: str = "0"


class SimulateCfg(_Strict):
    dt: Optional[PositiveFloat] = None
    t_final: PositiveFloat = 400.0
    stride: int = Field(10, ge=1)
    window: Optional[tuple[PositiveFloat, PositiveFloat]] = None
    initial: InitialCfg = InitialCfg()


class SpectrumCfg(_Strict):
    c: PositiveFloat = 1.0
    n_lo: int = 50
    n_hi: int = 60
    branches: list[Literal[1, 2]] = [1, 2]
    case: Optional[Literal[1, 2, 3]] = None
    strip_width: PositiveFloat = 0.5


class ResolventCfg(_Strict):
    frequencies: Literal["peaks", "modes", "list"] = "peaks"
    omegas: list[PositiveFloat] = []
    n_lo: int = Field(10, ge=1)
    n_hi: int = Field(80, ge=1)
    n_step: int = Field(5, ge=1)
    tol: PositiveFloat = 1e-6


class VerifyCfg(_Strict):
    suites: list[Literal["blowup", "branches", "remainder", "decay", "resolvent", "identities",
                         "discrete", "all"]] = ["identities"]


class MetadataCfg(_Strict):
    wall_time: bool = False


class RunConfig(_Strict):
    beam: BeamCfg = BeamCfg()
    normalized_c: Optional[PositiveFloat] = None
    damping: DampingCfg = DampingCfg()
    bc: Literal["dirichlet_neumann", "fully_dirichlet"] = "dirichlet_neumann"
    n_cells: int = Field(400, ge=8)
    seed: int = 42
    simulate: SimulateCfg = SimulateCfg()
    spectrum: SpectrumCfg = SpectrumCfg()
    resolvent: ResolventCfg = ResolventCfg()
    verify: VerifyCfg = VerifyCfg()
    metadata: MetadataCfg = MetadataCfg()

    def params(self) -> BeamParameters:
        if self.normalized_c is not None:
            return BeamParameters.normalized(self.normalized_c)
        return BeamParameters(**self.beam.model_dump())


# ------------------------------------------------------------------ loading

def _set_path(doc: dict, path: list[str], value):
    node = doc
    for key in path[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"environment override {'.'.join(path)} targets a non-mapping")
    node[path[-1]] = value


def load_config(path: Optional[str], environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    doc: dict = {}
    if path:
        try:
            with open(path) as fh:
                doc = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
            raise ConfigError(f"malformed config{where}: {getattr(exc, 'problem', exc)}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a mapping")
    for key in sorted(environ):
        if key.startswith(ENV_PREFIX):
            parts = key[len(ENV_PREFIX):].lower().split("__")
            _set_path(doc, parts, yaml.safe_load(environ[key]))
    try:
        return RunConfig.model_validate(doc)
    except ValidationError as exc:
        msgs = [f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()]
        raise ConfigError("invalid config: " + "; ".join(msgs)) from exc


_EXPR_NS = {name: getattr(np, name) for name in ("sin", "cos", "exp", "tanh", "sqrt", "abs", "where", "pi")}


def _expr(text: str, x: np.ndarray) -> np.ndarray:
    try:
        val = eval(text, {"__builtins__": {}}, {**_EXPR_NS, "np": np, "x": x})  # noqa: S307
    except Exception as exc:  # user-supplied expression
        raise ConfigError(f"cannot evaluate expression {text!r}: {exc}") from exc
    return np.broadcast_to(np.asarray(val, dtype=complex), x.shape).copy()


def build_profile(cfg: RunConfig) -> DampingProfile:
    d, L = cfg.damping, cfg.params().L
    if d.kind == "zero":
        return DampingProfile.zero(L)
    if d.kind == "global":
        return DampingProfile.constant(d.d0, L)
    if d.kind == "step":
        return DampingProfile.piecewise(d.d0, d.alpha, d.beta if d.beta is not None else L, L)
    if d.kind == "smooth":
        fn = lambda x, e=d.expr: _expr(e, np.asarray(x, dtype=float)).real
        return DampingProfile.smooth(fn, d.alpha, d.beta if d.beta is not None else L, d.d0, d.expr)
    rows = sorted(d.table)

    def ev(x, rows=rows):
        out = np.zeros_like(x, dtype=float)
        for x0, x1, val in rows:
            out = np.where((x > x0) & (x <= x1), val, out)
        return out

    positive = [r for r in rows if r[2] > 0]
    if not positive:
        raise ConfigError("piecewise table has no positive segment")
    alpha = min(r[0] for r in positive)
    beta = max(r[1] for r in positive)
    return DampingProfile(ev, alpha, beta, min(r[2] for r in positive), DampingKind.PIECEWISE_CONSTANT,
                          label="table")


def initial_state(cfg: RunConfig) -> GridState:
    n, L = cfg.n_cells, cfg.params().L
    x = np.linspace(0.0, L, n + 1)
    ini = cfg.simulate.initial
    return GridState(n, *(_expr(getattr(ini, k), x) for k in "uvyz"), L=L)


# ----------------------------------------------------------------- output

def _metadata(cfg: RunConfig, command: str, extra: dict, wall: float) -> list[str]:
    lines = [f"# timokv {__version__} {command}",
             "# config: " + json.dumps(cfg.model_dump(mode="json"), sort_keys=True),
             f"# versions: numpy={np.__version__} scipy={scipy.__version__} mpmath={mpmath.__version__}",
             f"# seed: {cfg.seed}"]
    for k, v in extra.items():
        lines.append(f"# {k}: {v}")
    if cfg.metadata.wall_time:
        lines.append(f"# wall_time_s: {wall:.3f}")
    return lines


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise NumericalFailure(f"non-finite value {v!r} in output")
        return repr(float(v))
    return str(v)


def write_table(out_path: Optional[str], header: list[str], rows: list[list], meta: list[str],
                footer: Optional[list[str]] = None):
    buf = io.StringIO()
    for line in meta:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    for line in footer or []:
        buf.write(line + "\n")
    text = buf.getvalue()
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------- commands

def cmd_simulate(cfg: RunConfig, out: Optional[str], threads: int = 1) -> int:
    t0 = time.perf_counter()
    params, profile = cfg.params(), build_profile(cfg)
    gen = assemble(params, profile, cfg.bc, cfg.n_cells, allow_zero=True)
    u0 = initial_state(cfg)
    s = cfg.simulate
    tr = simulate(gen, u0, dt=s.dt, t_final=s.t_final, stride=s.stride)
    rows = [[t, e, t * e] for t, e in zip(tr.times, tr.energies)]
    if tr.energies[0] > 0 and np.allclose(tr.energies, tr.energies[0], rtol=1e-8, atol=0):
        fit_line = "# fit: p=0.0 C=%r r2=nan (constant energy)" % float(tr.energies[0])
    else:
        fit = fit_decay_exponent(tr, s.window)
        fit_line = f"# fit: p={fit.p!r} C={fit.C!r} r2={fit.r2!r} power_law={fit.power_law}"
    meta = _metadata(cfg, "simulate", {"graph_norm0": repr(tr.graph_norm0), "monotone": tr.monotone},
                     time.perf_counter() - t0)
    write_table(out, ["t", "E", "E_t"], rows, meta, [fit_line])
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, out: Optional[str], threads: int = 1) -> int:
    t0 = time.perf_counter()
    sc = cfg.spectrum
    spec = SpectralConfig(sc.c, sc.strip_width)
    rows, total, failed = [], 0, 0
    for branch in sorted(set(sc.branches)):
        if sc.n_hi < sc.n_lo:
            continue
        for r in find_roots([sc.n_lo, sc.n_hi], branch, spec, case=sc.case, threads=threads):
            total += 1
            failed += r.status == "unresolved"
            rows.append([branch, r.n, r.lam.real, r.lam.imag, r.residual, abs(r.lam - r.prediction),
                         r.prediction.real, r.prediction.imag, r.status])
    rows.sort(key=lambda row: (row[0], row[1]))
    meta = _metadata(cfg, "spectrum", {"case": spec.case_label}, time.perf_counter() - t0)
    write_table(out, ["branch", "n", "re", "im", "residual", "abs_err", "pred_re", "pred_im", "status"], rows, meta)
    if total and failed == total:
        print("error: no root resolved", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _scan_frequencies(cfg: RunConfig, gen) -> np.ndarray:
    r, p = cfg.resolvent, cfg.params()
    if r.frequencies == "list":
        if not r.omegas:
            raise ConfigError("resolvent.omegas must be non-empty when frequencies = list")
        return np.asarray(r.omegas, dtype=float)
    ns = np.arange(r.n_lo, r.n_hi + 1, r.n_step)
    modes = ns * np.pi / p.L * math.sqrt(p.k1 / p.rho1)
    if r.frequencies == "modes":
        return modes
    return np.sort(peak_frequencies(gen, 1j * modes, seed=cfg.seed))


def cmd_resolvent(cfg: RunConfig, out: Optional[str], threads: int = 1) -> int:
    t0 = time.perf_counter()
    gen = assemble(cfg.params(), build_profile(cfg), cfg.bc, cfg.n_cells, allow_zero=True)
    om = _scan_frequencies(cfg, gen)
    work = lambda w: resolvent_norm_discrete(gen, float(w), cfg.resolvent.tol, seed=cfg.seed)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            norms = np.array(list(pool.map(work, om)))
    else:
        norms = np.array([work(w) for w in om])
    slope = float(np.polyfit(np.log(om), np.log(norms), 1)[0]) if om.size >= 2 else float("nan")
    diverging = bool(norms.max() >= 10.0) if norms.size else False
    meta = _metadata(cfg, "resolvent", {}, time.perf_counter() - t0)
    footer = [f"# slope: {slope!r}", f"# diverging: {diverging}"]
    write_table(out, ["omega", "norm"], [[w, n] for w, n in zip(om, norms)], meta, footer)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Optional[str], threads: int = 1) -> int:
    from .verification import SUITES, run_criterion

    t0 = time.perf_counter()
    numbers = sorted({k for s in cfg.verify.suites for k in SUITES[s]})
    rows, any_fail = [], False
    for k in numbers:
        kwargs = {}
        if k == 5:
            profile = build_profile(cfg)
            if profile.is_zero or not validate_hypothesis(profile, cfg.params()).passed:
                kwargs["profile"] = profile
        res = run_criterion(k, **kwargs)
        print(res.line(), file=sys.stderr)
        outcome = "n/a" if not res.applicable else ("pass" if res.passed else "fail")
        any_fail |= outcome == "fail"
        for c in res.checks:
            val = c.value if math.isfinite(c.value) else ""
            rows.append([k, c.name, val if val == "" else float(val), c.threshold,
                         "not-applicable (H violated)" if outcome == "n/a" else ("pass" if c.passed else "fail")])
    meta = _metadata(cfg, "verify", {"suites": ",".join(cfg.verify.suites)}, time.perf_counter() - t0)
    write_table(out, ["criterion", "check", "value", "threshold", "outcome"], rows, meta)
    return EXIT_FAIL if any_fail else EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "spectrum": cmd_spectrum, "resolvent": cmd_resolvent, "verify": cmd_verify}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="timokv", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="YAML/JSON configuration file")
    ap.add_argument("--out", help="output CSV path (default: stdout)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for independent sub-tasks")
    args = ap.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, ResolventError, SpectralError, ArithmeticError, np.linalg.LinAlgError,
            RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
