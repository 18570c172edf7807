"""Domain types for the damped Timoshenko beam and continuous-level functionals.

State vectors are U = (u, v, y, z) with v = u_t and z = y_t, sampled on the
uniform grid x_i = i L / n_cells.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

EQUAL_SPEED_RTOL = 1e-12
DEFAULT_SAMPLES = 1024


class ModelError(ValueError):
    """Raised for invalid parameters, profiles, or states."""


class InvalidProfileError(ModelError):
    pass


class UnderResolvedError(ModelError):
    pass


@dataclass(frozen=True)
class BeamParameters:
    rho1: float = 1.0
    rho2: float = 1.0
    k1: float = 1.0
    k2: float = 1.0
    L: float = 1.0

    def __post_init__(self):
        for name in ("rho1", "rho2", "k1", "k2", "L"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ModelError(f"{name} must be a positive finite number, got {val!r}")

    @property
    def shear_speed2(self) -> float:
        return self.k1 / self.rho1

    @property
    def bending_speed2(self) -> float:
        return self.k2 / self.rho2

    @property
    def equal_speeds(self) -> bool:
        a, b = self.shear_speed2, self.bending_speed2
        return abs(a - b) <= EQUAL_SPEED_RTOL * max(a, b)

    @property
    def coupling(self) -> float:
        """c = sqrt(k1/k2)."""
        return float(np.sqrt(self.k1 / self.k2))

    @classmethod
    def normalized(cls, c: float) -> "BeamParameters":
        """Equal-speed unit-length beam with k2 = rho2 = 1 and k1 = rho1 = c**2."""
        return cls(rho1=c * c, rho2=1.0, k1=c * c, k2=1.0, L=1.0)


class DampingKind(enum.Enum):
    PIECEWISE_CONSTANT = "piecewise"
    SMOOTH = "smooth"
    ZERO = "zero"


@dataclass(frozen=True)
class DampingProfile:
    """Kelvin-Voigt coefficient D(x), supported on [alpha, beta] with floor d0 there."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    alpha: float
    beta: float
    d0: float
    kind: DampingKind
    value: Optional[float] = None
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.evaluator(x), dtype=float), x.shape).copy()

    @property
    def is_zero(self) -> bool:
        return self.kind is DampingKind.ZERO

    @classmethod
    def constant(cls, d0: float, L: float = 1.0) -> "DampingProfile":
        """Global damping D = d0 on [0, L]."""
        return cls.piecewise(d0, 0.0, L, L)

    @classmethod
    def piecewise(cls, value: float, alpha: float, beta: float, L: float = 1.0) -> "DampingProfile":
        """D = value on (alpha, beta], zero elsewhere (left-open like the step profile)."""

        def ev(x, a=alpha, b=beta, v=value, L=L):
            inside = (x > a) & (x <= b)
            if a <= 0.0:
                inside |= x == 0.0
            return np.where(inside, v, 0.0)

        return cls(ev, float(alpha), float(beta), float(value), DampingKind.PIECEWISE_CONSTANT,
                   value=float(value), label=f"piecewise({value}, [{alpha}, {beta}])")

    @classmethod
    def smooth(cls, fn: Callable, alpha: float, beta: float, d0: float, label: str = "smooth"):
        return cls(fn, float(alpha), float(beta), float(d0), DampingKind.SMOOTH, label=label)

    @classmethod
    def zero(cls, L: float = 1.0) -> "DampingProfile":
        return cls(lambda x: np.zeros_like(x), 0.0, float(L), 0.0, DampingKind.ZERO, label="zero")

    @classmethod
    def step(cls, L: float = 1.0, alpha: float = 0.5, d0: float = 1.0) -> "DampingProfile":
        """Local damping: zero on (0, alpha], d0 on (alpha, L]."""
        return cls.piecewise(d0, alpha, L, L)


class BoundaryConditionKind(enum.Enum):
    FULLY_DIRICHLET = "fully_dirichlet"
    DIRICHLET_NEUMANN = "dirichlet_neumann"

    @classmethod
    def parse(cls, tag) -> "BoundaryConditionKind":
        if isinstance(tag, cls):
            return tag
        key = str(tag).strip().lower().replace("-", "_")
        aliases = {"dd": cls.FULLY_DIRICHLET, "h1": cls.FULLY_DIRICHLET,
                   "dn": cls.DIRICHLET_NEUMANN, "h2": cls.DIRICHLET_NEUMANN}
        if key in aliases:
            return aliases[key]
        for member in cls:
            if member.value == key:
                return member
        raise ModelError(f"unknown boundary condition {tag!r}")


@dataclass
class GridState:
    """Nodal samples of (u, v, y, z); arrays have length n_cells + 1."""

    n_cells: int
    u: np.ndarray
    v: np.ndarray
    y: np.ndarray
    z: np.ndarray
    L: float = 1.0

    def __post_init__(self):
        n = int(self.n_cells)
        if n < 1:
            raise ModelError("n_cells must be positive")
        self.n_cells = n
        for name in ("u", "v", "y", "z"):
            arr = np.array(getattr(self, name), dtype=complex).reshape(-1)
            if arr.size != n + 1:
                raise ModelError(f"component {name} has {arr.size} samples, expected {n + 1}")
            setattr(self, name, arr)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n_cells + 1)

    @property
    def h(self) -> float:
        return self.L / self.n_cells

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.v, self.y, self.z])

    @classmethod
    def from_vector(cls, vec, n_cells: int, L: float = 1.0) -> "GridState":
        vec = np.asarray(vec, dtype=complex)
        m = n_cells + 1
        if vec.size != 4 * m:
            raise ModelError(f"vector has {vec.size} entries, expected {4 * m}")
        return cls(n_cells, vec[:m], vec[m:2 * m], vec[2 * m:3 * m], vec[3 * m:], L)

    @classmethod
    def zeros(cls, n_cells: int, L: float = 1.0) -> "GridState":
        z = np.zeros(n_cells + 1, dtype=complex)
        return cls(n_cells, z, z, z, z, L)

    @classmethod
    def from_functions(cls, n_cells: int, L: float = 1.0, u=None, v=None, y=None, z=None):
        x = np.linspace(0.0, L, n_cells + 1)
        ev = lambda f: np.zeros_like(x, dtype=complex) if f is None else np.asarray(f(x), dtype=complex) * np.ones_like(x)
        return cls(n_cells, ev(u), ev(v), ev(y), ev(z), L)

    def scaled(self, a) -> "GridState":
        return GridState(self.n_cells, a * self.u, a * self.v, a * self.y, a * self.z, self.L)

    def __add__(self, other: "GridState") -> "GridState":
        return GridState(self.n_cells, self.u + other.u, self.v + other.v,
                         self.y + other.y, self.z + other.z, self.L)

    def max_amplitude(self) -> float:
        return float(max(np.max(np.abs(c)) for c in (self.u, self.v, self.y, self.z)))

    def check_bc(self, bc: BoundaryConditionKind, atol: float = 1e-12) -> list[str]:
        """Return the list of violated boundary/mean constraints (empty when admissible)."""
        bc = BoundaryConditionKind.parse(bc)
        scale = max(self.max_amplitude(), 1.0)
        tol = atol * scale
        bad = []
        if abs(self.u[0]) > tol or abs(self.u[-1]) > tol:
            bad.append("u must vanish at both ends")
        if bc is BoundaryConditionKind.FULLY_DIRICHLET:
            if abs(self.y[0]) > tol or abs(self.y[-1]) > tol:
                bad.append("y must vanish at both ends")
        else:
            w = trapezoid_weights(self.n_cells, self.L)
            amp = self.max_amplitude()
            for name in ("y", "z"):
                mean = abs(np.dot(w, getattr(self, name)))
                if mean > 1e-10 * max(amp, 1e-300) * self.L and amp > 0:
                    bad.append(f"trapezoidal mean of {name} is {mean:.3e}, expected zero")
        return bad


@dataclass
class ValidationReport:
    passed: bool
    violations: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


def trapezoid_weights(n_cells: int, L: float = 1.0) -> np.ndarray:
    h = L / n_cells
    w = np.full(n_cells + 1, h)
    w[0] = w[-1] = h / 2
    return w


def midpoints(n_cells: int, L: float = 1.0) -> np.ndarray:
    h = L / n_cells
    return (np.arange(n_cells) + 0.5) * h


def validate_hypothesis(profile: DampingProfile, params: BeamParameters,
                        n_samples: int = DEFAULT_SAMPLES) -> ValidationReport:
    """Check D >= 0 on [0, L] and D >= d0 > 0 on (alpha, beta) by sampling."""
    if n_samples < 16:
        raise ModelError("n_samples must be at least 16")
    L = params.L
    if profile.alpha >= profile.beta:
        raise InvalidProfileError(f"empty support: alpha={profile.alpha} >= beta={profile.beta}")
    violations, flags = [], []
    if not (0.0 <= profile.alpha < L) or not (profile.alpha < profile.beta <= L):
        violations.append(f"support [{profile.alpha}, {profile.beta}] not inside [0, {L}]")
    x = np.linspace(0.0, L, n_samples)
    d = profile(x)
    if not np.all(np.isfinite(d)):
        violations.append("D is not finite at some sample")
    if np.any(d < 0):
        violations.append(f"negativity: min D = {d.min():.3e} < 0")
    xin = np.linspace(profile.alpha, profile.beta, n_samples + 2)[1:-1]
    din = profile(xin)
    if profile.d0 <= 0 or np.any(din < profile.d0):
        violations.append(f"floor failure on (alpha, beta): min D = {din.min():.3e}, d0 = {profile.d0:.3e}")
    if profile.is_zero:
        flags.append("zero damping: conservative baseline, hypothesis violated by design")
    jumps = np.abs(np.diff(din))
    if din.size > 2 and jumps.max(initial=0.0) > 0.25 * max(np.abs(din).max(), 1e-300) and profile.kind is DampingKind.SMOOTH:
        flags.append("profile appears discontinuous inside (alpha, beta)")
    return ValidationReport(not violations, violations, flags)


def _diffs(state: GridState):
    h = state.h
    ux = np.diff(state.u) / h
    yx = np.diff(state.y) / h
    ym = 0.5 * (state.y[1:] + state.y[:-1])
    return ux + ym, yx


def energy(state: GridState, params: BeamParameters) -> float:
    """Discrete energy: kinetic part by trapezoid, strain part by midpoint differences."""
    if state.n_cells < 4:
        raise UnderResolvedError("energy needs n_cells >= 4")
    w = trapezoid_weights(state.n_cells, state.L)
    shear, yx = _diffs(state)
    kin = np.dot(w, params.rho1 * np.abs(state.v) ** 2 + params.rho2 * np.abs(state.z) ** 2)
    pot = state.h * np.sum(params.k1 * np.abs(shear) ** 2 + params.k2 * np.abs(yx) ** 2)
    return 0.5 * float(kin + pot)


def dissipation_rate(state: GridState, profile: DampingProfile) -> float:
    """-int D |z_x|^2 dx with D at cell midpoints."""
    dmid = profile(midpoints(state.n_cells, state.L))
    zx = np.diff(state.z) / state.h
    return -float(state.h * np.sum(dmid * np.abs(zx) ** 2))


def graph_norm(state: GridState, gen) -> float:
    """sqrt(||U||^2 + ||A_h U||^2) in the discrete energy norm."""
    if state.n_cells != gen.n_cells:
        raise ModelError(f"state has {state.n_cells} cells, generator {gen.n_cells}")
    from .discretize import apply, inner

    au = apply(gen, state)
    return float(np.sqrt(inner(gen, state, state).real + inner(gen, au, au).real))
