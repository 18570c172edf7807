"""Resolvent blowup sequence for global damping and discrete resolvent-norm probes."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import mpmath as mp
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .beam_model import (BeamParameters, BoundaryConditionKind, DampingProfile, GridState,
                         UnderResolvedError)
from .discretize import DiscreteGenerator, assemble, inner


class ResolventError(RuntimeError):
    pass


@dataclass
class BlowupPair:
    n: int
    lambda_n: float
    A_n: complex
    B_n: float
    U_n: GridState
    F_n: GridState
    C1: complex
    C2: complex


def blowup_coefficients(n: int, params: BeamParameters, d0: float, dps: int = 50):
    """(lambda_n, A_n, B_n, C1, C2) evaluated in extended precision."""
    with mp.workdps(dps):
        r1, r2, k1, k2, L = (mp.mpf(v) for v in (params.rho1, params.rho2, params.k1, params.k2, params.L))
        d0 = mp.mpf(d0)
        npi = n * mp.pi
        lam = npi / L * mp.sqrt(k1 / r1)
        a = (-1j * npi * d0 / (k1 * L) * mp.sqrt(r1 / k1) + k2 / k1 * (r2 / k2 - r1 / k1)
             - r1 * L ** 2 / (k1 * mp.pi ** 2 * n ** 2))
        b = r1 * L / (k1 * npi)
        c1 = (k1 / r1 * (npi / L) ** 2 - lam ** 2) * a + k1 * npi / (r1 * L) * b
        c2 = (npi * k1 / (r2 * L) * a
              + (-lam ** 2 + k1 / r2 + (k2 + 1j * lam * d0) / r2 * (npi / L) ** 2) * b)
        return float(lam), complex(a), float(b), complex(c1), complex(c2)


def build_blowup_pair(n: int, params: BeamParameters, d0: float, n_cells: int) -> BlowupPair:
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n_cells < 8 * n:
        raise UnderResolvedError(f"mode {n} needs n_cells >= {8 * n}, got {n_cells}")
    lam, a, b, c1, c2 = blowup_coefficients(n, params, d0)
    L = params.L
    x = np.linspace(0.0, L, n_cells + 1)
    s = np.sin(n * np.pi * x / L)
    s[[0, -1]] = 0.0
    co = np.cos(n * np.pi * x / L)
    u = GridState(n_cells, a * s, 1j * lam * a * s, b * co, 1j * lam * b * co, L)
    f = GridState(n_cells, 0 * s, s, 0 * s, 0 * s, L)
    return BlowupPair(n, lam, a, b, u, f, c1, c2)


@lru_cache(maxsize=16)
def _global_generator(params: BeamParameters, d0: float, n_cells: int) -> DiscreteGenerator:
    return assemble(params, DampingProfile.constant(d0, params.L),
                    BoundaryConditionKind.DIRICHLET_NEUMANN, n_cells)


def pair_ratio(pair: BlowupPair, params: BeamParameters, d0: float) -> float:
    """||U_n|| / ||F_n|| in the discrete energy norm."""
    gen = _global_generator(params, float(d0), pair.U_n.n_cells)
    nu = inner(gen, pair.U_n, pair.U_n).real
    nf = inner(gen, pair.F_n, pair.F_n).real
    return math.sqrt(nu / nf)


def blowup_exponent(n_list: Sequence[int], params: BeamParameters, d0: float, n_cells: int):
    """Log-log slope of ||U_n||/||F_n|| against lambda_n (expected 2)."""
    lams, ratios = [], []
    for n in n_list:
        try:
            pair = build_blowup_pair(int(n), params, d0, n_cells)
        except UnderResolvedError as exc:
            warnings.warn(f"skipping n={n}: {exc}", RuntimeWarning, stacklevel=2)
            continue
        lams.append(pair.lambda_n)
        ratios.append(pair_ratio(pair, params, d0))
    if len(lams) < 2:
        raise ValueError("need at least two resolved modes")
    return float(np.polyfit(np.log(lams), np.log(ratios), 1)[0])


# --------------------------------------------------------------- discrete norms

def _mean_projector(gen: DiscreteGenerator, g_lu):
    cons = gen.constraints
    if cons.shape[0] == 0:
        return lambda x: x
    gc = np.column_stack([g_lu.solve(row.astype(complex)) for row in cons])  # G^{-1} C^T
    small = np.linalg.inv(cons @ gc)

    def project(x):
        return x - gc @ (small @ (cons @ x))

    return project


@lru_cache(maxsize=8)
def _gram_lu(gen: DiscreteGenerator):
    return spla.splu(gen.G.astype(complex).tocsc())


def resolvent_norm_discrete(gen: DiscreteGenerator, omega: float, tol: float = 1e-6,
                            max_iter: int = 500, seed: int = 42) -> float:
    """||(i omega - A_h)^{-1}|| in the energy norm, by power iteration on R^dagger R."""
    a = gen.A
    eye = sp.identity(a.shape[0], dtype=complex, format="csc")
    lu = None
    for shift in (0.0, 1e-8, -1e-8):
        try:
            lu = spla.splu((1j * (omega + shift) * eye - a).tocsc())
            break
        except RuntimeError:
            continue
    if lu is None:
        raise ResolventError(f"factorization of (i omega - A_h) failed at omega={omega}")
    g = gen.G
    g_lu = _gram_lu(gen)
    project = _mean_projector(gen, g_lu)
    rng = np.random.default_rng(seed)
    x = project(rng.standard_normal(a.shape[0]) + 1j * rng.standard_normal(a.shape[0]))
    x /= math.sqrt(np.vdot(x, g @ x).real)
    sigma_old = 0.0
    for _ in range(max_iter):
        y = lu.solve(x)
        sigma2 = np.vdot(y, g @ y).real
        z = project(g_lu.solve(lu.solve(g @ y, trans="H")))
        sigma = math.sqrt(sigma2)
        if not np.isfinite(sigma):
            raise ResolventError("non-finite iterate")
        x = z / math.sqrt(np.vdot(z, g @ z).real)
        if abs(sigma - sigma_old) <= tol * sigma:
            return sigma
        sigma_old = sigma
    raise ResolventError(f"power iteration did not converge in {max_iter} iterations at omega={omega}")


@dataclass
class ScanResult:
    omegas: np.ndarray
    norms: np.ndarray
    slope: float
    diverging: bool
    notes: list = field(default_factory=list)


def resolvent_growth_scan(gen: DiscreteGenerator, omega_list: Sequence[float], tol: float = 1e-6,
                          seed: int = 42) -> ScanResult:
    om = np.asarray(omega_list, dtype=float)
    if om.size < 2 or np.any(om <= 0) or np.any(np.diff(om) <= 0):
        raise ValueError("omega_list must be positive and strictly increasing with >= 2 entries")
    norms = np.array([resolvent_norm_discrete(gen, w, tol, seed=seed) for w in om])
    slope = float(np.polyfit(np.log(om), np.log(norms), 1)[0])
    diverging = bool(norms.max() >= 10.0)
    notes = [] if diverging else ["all norms below 10: bounded resolvent, non-diverging"]
    return ScanResult(om, norms, slope, diverging, notes)


def peak_frequencies(gen: DiscreteGenerator, guesses: Sequence[complex], seed: int = 42) -> np.ndarray:
    """Imaginary parts of the discrete eigenvalues nearest to the guesses."""
    from .spectra import discrete_spectrum_probe

    mus = discrete_spectrum_probe(gen, guesses, seed=seed)
    return np.array([m.imag for m in mus])
