"""Implicit-midpoint time integration, energy traces and decay-exponent fitting."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .beam_model import GridState, ModelError, validate_hypothesis
from .discretize import DiscreteGenerator, _check

MONOTONE_RTOL = 1e-12


class NumericalFailure(RuntimeError):
    pass


@dataclass
class EnergyTrace:
    times: np.ndarray
    energies: np.ndarray
    graph_norm0: float
    mean_drift: Optional[np.ndarray] = None
    monotone: bool = True

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.energies = np.asarray(self.energies, dtype=float)
        if self.times.shape != self.energies.shape:
            raise ValueError("times and energies must have the same length")


@dataclass
class DecayFit:
    p: float
    C: float
    r2: float
    n_samples: int
    slope_spread: float
    power_law: bool
    flags: list = field(default_factory=list)


class MidpointStepper:
    """Crank-Nicolson map U -> (I - dt/2 A)^{-1} (I + dt/2 A) U on free dofs."""

    def __init__(self, gen: DiscreteGenerator, dt: float):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.gen, self.dt = gen, float(dt)
        eye = sp.identity(gen.A.shape[0], format="csc", dtype=complex)
        self.rhs_op = (eye + 0.5 * dt * gen.A).tocsr()
        try:
            self.lu = spla.splu((eye - 0.5 * dt * gen.A).tocsc())
        except RuntimeError as exc:  # singular factor
            raise NumericalFailure(f"midpoint factorization failed: {exc}") from exc

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        return self.lu.solve(self.rhs_op @ vec)


@lru_cache(maxsize=8)
def _stepper(gen: DiscreteGenerator, dt: float) -> MidpointStepper:
    return MidpointStepper(gen, dt)


def default_dt(gen: DiscreteGenerator) -> float:
    p = gen.params
    return gen.h / np.sqrt(max(p.k1 / p.rho1, p.k2 / p.rho2))


def step_midpoint(gen: DiscreteGenerator, state: GridState, dt: float) -> GridState:
    vec = gen.to_free(state)
    return gen.from_free(_stepper(gen, float(dt))(vec))


def _quad(gen: DiscreteGenerator, vec) -> float:
    return float(np.vdot(vec, gen.G @ vec).real)


def simulate(gen: DiscreteGenerator, u0: GridState, dt: Optional[float] = None, t_final: float = 1.0,
             stride: int = 1, check_monotone: Optional[bool] = None) -> EnergyTrace:
    """March to t_final, recording the energy every `stride` steps."""
    from .beam_model import graph_norm

    _check(gen, u0)
    bad = u0.check_bc(gen.bc, atol=1e-10)
    if bad:
        raise ModelError("initial state not admissible: " + "; ".join(bad))
    dt = default_dt(gen) if dt is None else float(dt)
    n_steps = int(round(t_final / dt))
    if n_steps < 1:
        raise ValueError("t_final must exceed dt")
    stride = max(int(stride), 1)
    if check_monotone is None:
        check_monotone = not gen.profile.is_zero and validate_hypothesis(gen.profile, gen.params).passed
    step = _stepper(gen, dt)
    cons = gen.constraints
    vec = gen.to_free(u0)
    e_prev = 0.5 * _quad(gen, vec)
    e0 = e_prev
    times, energies, drift = [0.0], [e_prev], [np.abs(cons @ vec).max(initial=0.0)]
    monotone = True
    for k in range(1, n_steps + 1):
        vec = step(vec)
        e = 0.5 * _quad(gen, vec)
        if not np.isfinite(e):
            raise NumericalFailure(f"non-finite energy at step {k}")
        if e > e_prev + MONOTONE_RTOL * e0:
            monotone = False
            if check_monotone:
                raise NumericalFailure(f"energy increased at step {k}: {e_prev!r} -> {e!r}")
        e_prev = e
        if k % stride == 0 or k == n_steps:
            times.append(k * dt)
            energies.append(e)
            drift.append(np.abs(cons @ vec).max(initial=0.0))
    return EnergyTrace(np.array(times), np.array(energies), graph_norm(u0, gen),
                       np.array(drift), monotone)


def fit_decay_exponent(trace: EnergyTrace, window: Optional[Sequence[float]] = None) -> DecayFit:
    """Least-squares fit log E = log C - p log t over the window (default: last decade)."""
    t, e = trace.times, trace.energies
    if window is None:
        window = (t[-1] / 10.0, t[-1])
    lo, hi = window
    if not (0 < lo < hi):
        raise ValueError("window must satisfy 0 < t_lo < t_hi")
    sel = (t >= lo) & (t <= hi)
    flags = []
    ts, es = t[sel], e[sel]
    if np.any(es <= 0):
        first = np.argmax(es <= 0)
        ts, es = ts[:first], es[:first]
        flags.append("energy reached zero inside window; fitted positive prefix")
    if ts.size < 10:
        raise ValueError(f"need at least 10 positive samples in window, got {ts.size}")
    lt, le = np.log(ts), np.log(es)
    slope, icpt = np.polyfit(lt, le, 1)
    resid = le - (slope * lt + icpt)
    ss_tot = np.sum((le - le.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    # local slopes on the first and last thirds measure curvature in log-log
    k = max(ts.size // 3, 2)
    s_first = np.polyfit(lt[:k], le[:k], 1)[0]
    s_last = np.polyfit(lt[-k:], le[-k:], 1)[0]
    spread = abs(s_last - s_first)
    power_law = spread <= 0.25 * max(abs(slope), 1.0)
    if not power_law:
        flags.append("curvature in log-log: not a power law")
    return DecayFit(float(-slope), float(np.exp(icpt)), float(r2), int(ts.size), float(spread),
                    bool(power_law), flags)
