"""Staggered finite-difference generator A_h and the discrete energy inner product.

Strains live at cell midpoints:  S = u_x + y (shear),  B = k2 y_x + D z_x (bending flux),
with D sampled at midpoints. Nodal equations are obtained by summation by parts, so
Re <A_h U, U> = -h sum D_{i+1/2} |z_x|^2 holds exactly on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .beam_model import (BeamParameters, BoundaryConditionKind, DampingProfile, GridState,
                         InvalidProfileError, ModelError, midpoints, trapezoid_weights,
                         validate_hypothesis)

MIN_CELLS = 8


class DimensionError(ModelError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteGenerator:
    n_cells: int
    bc: BoundaryConditionKind
    params: BeamParameters
    profile: DampingProfile
    matrix: sp.csr_matrix  # full 4(N+1) square, rows of fixed dofs are zero
    gram: sp.csr_matrix
    free: np.ndarray  # boolean mask of unconstrained dofs
    d_mid: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        return self.params.L / self.n_cells

    @property
    def size(self) -> int:
        return 4 * (self.n_cells + 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.params.L, self.n_cells + 1)

    @cached_property
    def free_index(self) -> np.ndarray:
        return np.flatnonzero(self.free)

    @cached_property
    def A(self) -> sp.csc_matrix:
        """Generator restricted to free dofs (explicit sparse export)."""
        idx = self.free_index
        return self.matrix[idx][:, idx].tocsc()

    @cached_property
    def G(self) -> sp.csc_matrix:
        idx = self.free_index
        return self.gram[idx][:, idx].tocsc()

    @cached_property
    def constraints(self) -> np.ndarray:
        """Rows of linear functionals that must vanish (zero means of y and z), on free dofs."""
        m = self.n_cells + 1
        if self.bc is not BoundaryConditionKind.DIRICHLET_NEUMANN:
            return np.zeros((0, self.free.sum()))
        w = trapezoid_weights(self.n_cells, self.params.L)
        rows = np.zeros((2, 4 * m))
        rows[0, 2 * m:3 * m] = w
        rows[1, 3 * m:] = w
        return rows[:, self.free]

    def to_free(self, state: GridState) -> np.ndarray:
        _check(self, state)
        return state.as_vector()[self.free]

    def from_free(self, vec) -> GridState:
        full = np.zeros(self.size, dtype=complex)
        full[self.free] = vec
        return GridState.from_vector(full, self.n_cells, self.params.L)


def _check(gen: DiscreteGenerator, *states: GridState):
    for s in states:
        if s.n_cells != gen.n_cells:
            raise DimensionError(f"state has {s.n_cells} cells, generator has {gen.n_cells}")


def _difference_ops(n: int, h: float):
    ones = np.ones(n)
    cols = np.arange(n)
    dm = sp.csr_matrix((np.r_[-ones, ones] / h, (np.r_[cols, cols], np.r_[cols, cols + 1])), shape=(n, n + 1))
    av = sp.csr_matrix((np.full(2 * n, 0.5), (np.r_[cols, cols], np.r_[cols, cols + 1])), shape=(n, n + 1))
    return dm, av


def assemble(params: BeamParameters, profile: DampingProfile, bc, n_cells: int,
             allow_zero: bool = False) -> DiscreteGenerator:
    bc = BoundaryConditionKind.parse(bc)
    n = int(n_cells)
    if n < MIN_CELLS:
        raise ModelError(f"n_cells must be >= {MIN_CELLS}")
    if not (profile.is_zero and allow_zero):
        report = validate_hypothesis(profile, params)
        if not report.passed:
            raise InvalidProfileError("; ".join(report.violations) or "profile rejected")
    p = params
    h = p.L / n
    m = n + 1
    dm, av = _difference_ops(n, h)
    d_mid = profile(midpoints(n, p.L))
    winv_h = sp.diags(h / trapezoid_weights(n, p.L))
    zero_n = sp.csr_matrix((n, m))
    eye = sp.identity(m, format="csr")
    zero_m = sp.csr_matrix((m, m))

    shear = sp.hstack([dm, zero_n, av, zero_n])  # S = u_x + avg(y)
    flux = sp.hstack([zero_n, zero_n, p.k2 * dm, sp.diags(d_mid) @ dm])  # B = k2 y_x + D z_x
    rows = [
        sp.hstack([zero_m, eye, zero_m, zero_m]),
        -(p.k1 / p.rho1) * winv_h @ dm.T @ shear,
        sp.hstack([zero_m, zero_m, zero_m, eye]),
        -(1.0 / p.rho2) * winv_h @ (dm.T @ flux + p.k1 * av.T @ shear),
    ]
    a = sp.vstack(rows).tocsr()

    w = trapezoid_weights(n, p.L)
    strain = h * (p.k1 * shear.T @ shear + p.k2 * sp.hstack([zero_n, zero_n, dm, zero_n]).T
                  @ sp.hstack([zero_n, zero_n, dm, zero_n]))
    kinetic = sp.block_diag([zero_m, sp.diags(p.rho1 * w), zero_m, sp.diags(p.rho2 * w)])
    gram = (strain + kinetic).tocsr()

    free = np.ones(4 * m, dtype=bool)
    fixed = [0, m - 1, m, 2 * m - 1]  # u and v at both ends
    if bc is BoundaryConditionKind.FULLY_DIRICHLET:
        fixed += [2 * m, 3 * m - 1, 3 * m, 4 * m - 1]
    free[fixed] = False
    keep = sp.diags(free.astype(float))
    a = (keep @ a @ keep).tocsr()
    a.eliminate_zeros()
    gram = (keep @ gram @ keep).tocsr()
    return DiscreteGenerator(n, bc, params, profile, a, gram, free, d_mid)


def apply(gen: DiscreteGenerator, state: GridState) -> GridState:
    _check(gen, state)
    out = gen.matrix @ state.as_vector()
    return GridState.from_vector(out, gen.n_cells, gen.params.L)


def inner(gen: DiscreteGenerator, a: GridState, b: GridState) -> complex:
    """<a, b> in the energy product, linear in a and conjugate-linear in b."""
    _check(gen, a, b)
    va, vb = a.as_vector(), b.as_vector()
    return complex(np.vdot(vb, gen.gram @ va))


def energy_norm(gen: DiscreteGenerator, vec_free) -> float:
    """Energy norm of a free-dof vector."""
    return float(np.sqrt(max(np.vdot(vec_free, gen.G @ vec_free).real, 0.0)))
