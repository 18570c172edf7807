"""Exact spectrum of the locally damped beam via its characteristic determinant.

Normalized setting: equal wave speeds, L = 1, D = k2 on (1/2, 1] and zero on (0, 1/2],
Dirichlet-Neumann ends. Eigenvalues are the zeros of det(M~) in the strip
S = {-alpha0 <= Re lam <= 0}.

Evaluation works on numpy complex arrays (vectorized) and on mpmath scalars, which
is what the remainder checks at |lam| ~ 1e4 need.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath as mp
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

CASE_TOL = 1e-9
AMBIGUITY_TOL = 1e-6
N_MIN = 5
NUDGE = 1e-12


class SpectralError(RuntimeError):
    pass


class CaseAmbiguityError(ValueError):
    pass


class ContourError(SpectralError):
    pass


@dataclass(frozen=True)
class SpectralConfig:
    c: float
    strip_width: float = 0.5

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.strip_width > 0:
            raise ValueError("strip_width must be positive")

    def _distance_to(self, period: float, offset: float) -> tuple[float, int]:
        k = round((self.c - offset) / period)
        return abs(self.c - offset - k * period), k

    @property
    def case_label(self) -> int:
        """1 if c is not in 2 pi Z, 2 if c = 2(2k+1) pi, 3 if c = 4 k pi."""
        d2, _ = self._distance_to(4 * math.pi, 2 * math.pi)
        d3, k3 = self._distance_to(4 * math.pi, 0.0)
        if d2 <= CASE_TOL:
            return 2
        if d3 <= CASE_TOL and k3 >= 1:
            return 3
        return 1

    @property
    def near_case_boundary(self) -> bool:
        """True when c is close to, but not within CASE_TOL of, a multiple of 2 pi."""
        d, _ = self._distance_to(2 * math.pi, 0.0)
        return CASE_TOL < d <= AMBIGUITY_TOL * max(1.0, self.c)

    def in_strip(self, lam) -> np.ndarray:
        re = np.real(lam)
        return (re >= -self.strip_width) & (re <= 0)


# --------------------------------------------------------------------- backends

class _NumpyOps:
    sqrt = staticmethod(np.sqrt)
    sinh = staticmethod(np.sinh)
    cosh = staticmethod(np.cosh)
    exp = staticmethod(np.exp)
    pi = math.pi

    @staticmethod
    def right(r):
        return np.where(np.real(r) < 0, -r, r)

    @staticmethod
    def lam(x):
        return np.asarray(x, dtype=complex)


class _MpOps:
    sqrt = staticmethod(mp.sqrt)
    sinh = staticmethod(mp.sinh)
    cosh = staticmethod(mp.cosh)
    exp = staticmethod(mp.exp)

    @property
    def pi(self):
        return mp.pi

    @staticmethod
    def right(r):
        return -r if mp.re(r) < 0 else r

    @staticmethod
    def lam(x):
        return mp.mpc(x)


def _ops(lam):
    if isinstance(lam, (mp.mpc, mp.mpf)):
        return _MpOps()
    return _NumpyOps()


def _c_value(cfg, xp):
    return mp.mpf(cfg.c) if isinstance(xp, _MpOps) else cfg.c


# ------------------------------------------------------------------ wavenumbers

def _radicands(lam, c):
    x = 4 * c ** 2 / lam ** 3 + 4 * c ** 2 / lam ** 4
    return lam ** 2 + 1j * c * lam, lam ** 2 - 1j * c * lam, x


def wavenumbers(lam, cfg: SpectralConfig):
    """(r1, r2, s1, s2), every square root taken with nonnegative real part."""
    xp = _ops(lam)
    lam = xp.lam(lam)
    c = _c_value(cfg, xp)
    if np.any(np.asarray(lam == 0)):
        raise ValueError("lambda must be nonzero")
    if isinstance(xp, _NumpyOps):
        ra, rb, _ = _radicands(lam, c)
        on_cut = ((np.abs(ra.imag) <= 1e-15 * np.abs(ra)) & (ra.real < 0)) | \
                 ((np.abs(rb.imag) <= 1e-15 * np.abs(rb)) & (rb.real < 0))
        lam = np.where(on_cut, lam - NUDGE, lam)
    r1 = xp.sqrt(lam ** 2 + 1j * c * lam)
    r2 = xp.sqrt(lam ** 2 - 1j * c * lam)
    root = xp.sqrt(1 - 4 * c ** 2 / lam ** 3 - 4 * c ** 2 / lam ** 4)
    s1 = xp.sqrt((lam + lam ** 2 / 2 * (1 + root)) / (1 + 1 / lam))
    s2 = xp.sqrt((lam + lam ** 2 / 2 * (1 - root)) / (1 + 1 / lam))
    return r1, r2, s1, s2


def _analytic_wavenumbers(lam, c, xp):
    """Branch of (r1, r2, s1) continuous across Re lam = 0 for large |lam|.

    r1 ~ lam + ic/2, r2 ~ lam - ic/2, s1 ~ lam; s2 keeps the principal root. The
    determinant is odd in r1, r2, s1, so only its sign differs from the principal
    choice, while the zero set is unchanged.
    """
    r1 = lam * xp.right(xp.sqrt(1 + 1j * c / lam))
    r2 = lam * xp.right(xp.sqrt(1 - 1j * c / lam))
    x = 4 * c ** 2 / lam ** 3 + 4 * c ** 2 / lam ** 4
    d = xp.right(xp.sqrt(1 - x))
    one_minus_d = x / (1 + d)  # cancellation-free 1 - sqrt(1 - x)
    s1 = lam * xp.right(xp.sqrt((1 / lam + (1 + d) / 2) / (1 + 1 / lam)))
    s2 = xp.right(xp.sqrt((lam + lam ** 2 / 2 * one_minus_d) / (1 + 1 / lam)))
    return r1, r2, s1, s2


# ---------------------------------------------------------------- determinants

def char_matrix(lam: complex, cfg: SpectralConfig, branch: str = "principal") -> np.ndarray:
    """The 4x4 matrix M of the interface conditions at x = 1/2."""
    lam = complex(lam)
    if branch == "principal":
        r1, r2, s1, s2 = (complex(w) for w in wavenumbers(lam, cfg))
    elif branch == "analytic":
        r1, r2, s1, s2 = (complex(w) for w in _analytic_wavenumbers(lam, cfg.c, _NumpyOps()))
    else:
        raise ValueError("branch must be 'principal' or 'analytic'")
    icl2 = 1j * cfg.c * lam ** 2
    with np.errstate(over="raise", invalid="raise"):
        try:
            sh = [np.sinh(w / 2) for w in (r1, r2, s1, s2)]
            ch = [np.cosh(w / 2) for w in (r1, r2, s1, s2)]
        except FloatingPointError as exc:
            raise OverflowError("hyperbolic entries of M overflow; use char_det_scaled") from exc
    w = (r1, r2, s1, s2)
    m = np.empty((4, 4), dtype=complex)
    for j in range(4):
        sign = 1 if j < 2 else -1
        m[0, j] = sign * sh[j]
        m[1, j] = w[j] / icl2 * ch[j]
        m[2, j] = (w[j] ** 2 if j < 2 else lam ** 3 - (lam + 1) * w[j] ** 2) * sh[j]
        m[3, j] = ch[j] / w[j]
    if not np.all(np.isfinite(m)):
        raise OverflowError("hyperbolic entries of M overflow; use char_det_scaled")
    return m


def g_coefficients(lam, cfg: SpectralConfig):
    """g1..g6 of the expanded determinant (analytic wavenumber branch)."""
    xp = _ops(lam)
    lam = xp.lam(lam)
    c = _c_value(cfg, xp)
    return _g(lam, c, *_analytic_wavenumbers(lam, c, xp))


def _g(lam, c, r1, r2, s1, s2):
    ic = 1j * c * lam ** 2
    a, b, p, q = r1 ** 2, r2 ** 2, s1 ** 2, s2 ** 2
    l1, l3 = lam + 1, lam ** 3
    return (l1 * (a - b) * (p - q) / (ic * r1 * r2),
            (b - p) * (l1 * q - l3 - a) / (ic * s1 * r2),
            -(a - p) * (l1 * q - l3 - b) / (ic * r1 * s1),
            (a - b) * (p - q) / (ic * s1 * s2),
            (a - q) * (l1 * p - l3 - b) / (ic * s2 * r1),
            -(b - q) * (l1 * p - l3 - a) / (ic * r2 * s2))


def _det_terms(lam, cfg):
    xp = _ops(lam)
    lam = xp.lam(lam)
    c = _c_value(cfg, xp)
    r1, r2, s1, s2 = _analytic_wavenumbers(lam, c, xp)
    g = _g(lam, c, r1, r2, s1, s2)
    c1, s1h = xp.cosh(r1 / 2), xp.sinh(r1 / 2)
    c2, s2h = xp.cosh(r2 / 2), xp.sinh(r2 / 2)
    c3, s3h = xp.cosh(s1 / 2), xp.sinh(s1 / 2)
    t = (g[0] * c1 * c2 * s3h, g[1] * s1h * c2 * c3, g[2] * c1 * s2h * c3,
         g[3] * s1h * s2h * c3, g[4] * c1 * s2h * s3h, g[5] * s1h * c2 * s3h)
    return t, xp.exp(-s2), s2


def char_det_scaled(lam, cfg: SpectralConfig):
    """det(M~) in the expanded g-form: only bounded hyperbolics and e^{-s2} appear."""
    t, e, _ = _det_terms(lam, cfg)
    val = (t[0] + t[1] + t[2] + t[3] + t[4] + t[5]
           + (-t[0] - t[1] - t[2] + t[3] + t[4] + t[5]) * e)
    if isinstance(val, np.ndarray):
        if val.ndim == 0:
            val = complex(val)
        outside = ~cfg.in_strip(lam)
        if np.any(outside):
            warnings.warn("char_det_scaled evaluated outside the strip S; values are not overflow-protected",
                          RuntimeWarning, stacklevel=2)
        if not np.all(np.isfinite(val)):
            raise OverflowError("det(M~) overflowed outside the strip")
    return val


def reduced_matrix(lam: complex, cfg: SpectralConfig) -> np.ndarray:
    """M~ = M with column 4 divided by e^{s2/2}/2 (analytic branch)."""
    lam = complex(lam)
    r1, r2, s1, s2 = (complex(w) for w in _analytic_wavenumbers(lam, cfg.c, _NumpyOps()))
    m = np.empty((4, 4), dtype=complex)
    e = np.exp(-s2)
    icl2 = 1j * cfg.c * lam ** 2
    for j, w in enumerate((r1, r2, s1)):
        sign = 1 if j < 2 else -1
        m[0, j] = sign * np.sinh(w / 2)
        m[1, j] = w / icl2 * np.cosh(w / 2)
        m[2, j] = (w ** 2 if j < 2 else lam ** 3 - (lam + 1) * w ** 2) * np.sinh(w / 2)
        m[3, j] = np.cosh(w / 2) / w
    m[0, 3] = -1 + e
    m[1, 3] = s2 / icl2 * (1 + e)
    m[2, 3] = (lam ** 3 - (lam + 1) * s2 ** 2) * (1 - e)
    m[3, 3] = (1 + e) / s2
    return m


def det_M(lam, cfg: SpectralConfig, branch: str = "analytic"):
    """Raw det(M) (vectorized); overflows for large |lam| through cosh(s2/2)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    out = np.array([np.linalg.det(char_matrix(z, cfg, branch)) for z in lam.ravel()])
    return out.reshape(lam.shape)


# ------------------------------------------------------------- asymptotic F

def f_terms(lam, cfg: SpectralConfig, printed: bool = False):
    """f0..f5. With printed=True the last products of f4 and f5 use cos(c/2) as typeset;
    the default uses cosh(lam/2), which is what the expansion of det(M~) produces."""
    xp = _ops(lam)
    lam = xp.lam(lam)
    c = _c_value(cfg, xp)
    cos, sin = (mp.cos, mp.sin) if isinstance(xp, _MpOps) else (np.cos, np.sin)
    sh3, ch3 = xp.sinh(3 * lam / 2), xp.cosh(3 * lam / 2)
    sh1, ch1 = xp.sinh(lam / 2), xp.cosh(lam / 2)
    C, S = cos(c / 2), sin(c / 2)
    tail = C if printed else ch1
    c2 = c * c
    f0 = sh3 + sh1 * C
    f1 = ch3 - ch1 * C
    f2 = c2 * ch3 - 4 * c * ch1 * S
    f3 = c2 * sh3 - 4 * ch3 + 12 * c * sh1 * S + 4 * ch1 * C
    f4 = (c2 * (c2 - 56) * sh3 - 32 * c2 * ch3 + 8 * c2 * (c * S - 8 * C + 1) * sh1
          - 32 * c * (8 * S + c * C) * tail)
    f5 = (-40 * c2 * sh3 + (c2 * c2 - 88 * c2 + 48) * ch3 + 32 * c * (5 * S + c * C) * sh1
          - (8 * c2 * c * S - 16 * (4 * c2 - 3) * C - 24 * c2) * tail)
    return f0, f1, f2, f3, f4, f5


def asymptotic_F(lam, cfg: SpectralConfig, printed: bool = False):
    xp = _ops(lam)
    lam = xp.lam(lam)
    f0, f1, f2, f3, f4, f5 = f_terms(lam, cfg, printed)
    q = xp.sqrt(lam)
    val = f0 + f1 / q + f2 / (8 * lam) + f3 / (8 * lam * q) + f4 / (128 * lam ** 2) + f5 / (128 * lam ** 2 * q)
    if isinstance(val, np.ndarray) and val.ndim == 0:
        return complex(val)
    return val


def f0_factored(lam, cfg: SpectralConfig):
    """2 sinh(lam/2) (cosh lam + cos^2(c/4))."""
    xp = _ops(lam)
    lam = xp.lam(lam)
    cos = mp.cos if isinstance(xp, _MpOps) else np.cos
    return 2 * xp.sinh(lam / 2) * (xp.cosh(lam) + cos(_c_value(cfg, xp) / 4) ** 2)


# ----------------------------------------------------------------- predictions

@dataclass(frozen=True)
class EigenvaluePrediction:
    branch: int
    n: int
    case_label: int
    lam: complex
    correction_order: float
    epsilon: complex
    mu: complex


def branch_center(branch: int, n: int, cfg: SpectralConfig) -> complex:
    """Root of f0 the branch is attached to."""
    if branch == 1:
        return 2j * n * math.pi
    theta = math.acos(math.cos(cfg.c / 4) ** 2)
    return 2j * n * math.pi + 1j * math.pi + 1j * theta


def predict_branch(branch: int, n: int, cfg: SpectralConfig, case: Optional[int] = None) -> EigenvaluePrediction:
    if branch not in (1, 2):
        raise ValueError("branch must be 1 or 2")
    n = int(n)
    if n == 0:
        raise ValueError("n must be nonzero")
    if case is None:
        if cfg.near_case_boundary:
            raise CaseAmbiguityError(
                f"c = {cfg.c!r} is within {AMBIGUITY_TOL} of a multiple of 2 pi; pass case explicitly")
        case = cfg.case_label
    if case not in (1, 2, 3):
        raise ValueError("case must be 1, 2 or 3")
    c, pi = cfg.c, math.pi
    sgn = 1 if n > 0 else -1
    rt = math.sqrt(pi * abs(n))
    mu = branch_center(branch, n, cfg)
    if case == 1:
        order = -1.0
        if branch == 1:
            eps = -2 * (1 - 1j * sgn) * math.sin(c / 4) ** 2 / ((3 + math.cos(c / 2)) * rt)
        else:
            c4 = math.cos(c / 4) ** 2
            eps = -(1 - 1j * sgn) * c4 / ((1 + c4) * rt)
    elif case == 2:
        if branch == 1:
            order = -1.0
            eps = -(1 - 1j * sgn) / rt
        else:
            order = -2.5
            mu = 2j * n * pi + 1.5j * pi
            eps = 1j * c * c / (32 * pi * n) - (8 + 1j * (3 * pi - 2)) * c * c / (128 * pi ** 2 * n ** 2)
    else:
        order = -2.5
        if branch == 1:
            eps = 1j * c * c / (32 * pi * n) - c * c / (16 * pi ** 2 * n ** 2)
        else:
            mu = 2j * n * pi + 1j * pi
            eps = 1j * c * c / (32 * pi * n) - (4 + 1j * pi) * c * c / (64 * pi ** 2 * n ** 2)
    return EigenvaluePrediction(branch, n, case, mu + eps, order, eps, mu)


# ------------------------------------------------------------ argument principle

@dataclass(frozen=True)
class Box:
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def __post_init__(self):
        if not (self.re_lo < self.re_hi and self.im_lo < self.im_hi):
            raise ValueError("degenerate box")

    @classmethod
    def around(cls, center: complex, half: float) -> "Box":
        return cls(center.real - half, center.real + half, center.imag - half, center.imag + half)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))

    def contains(self, z: complex) -> bool:
        return self.re_lo <= z.real <= self.re_hi and self.im_lo <= z.imag <= self.im_hi

    def scaled(self, factor: float, shift: complex = 0) -> "Box":
        c = self.center + shift
        hw, hh = factor * (self.re_hi - self.re_lo) / 2, factor * (self.im_hi - self.im_lo) / 2
        return Box(c.real - hw, c.real + hw, c.imag - hh, c.imag + hh)

    def quadrants(self) -> list["Box"]:
        c = self.center
        return [Box(self.re_lo, c.real, self.im_lo, c.imag), Box(c.real, self.re_hi, self.im_lo, c.imag),
                Box(self.re_lo, c.real, c.imag, self.im_hi), Box(c.real, self.re_hi, c.imag, self.im_hi)]

    def as_tuple(self):
        return (self.re_lo, self.re_hi, self.im_lo, self.im_hi)


def _edge_phase(f, a: complex, b: complex, n0: int, max_jump: float, max_points: int):
    t = np.linspace(0.0, 1.0, n0 + 1)
    vals = f(a + (b - a) * t)
    while True:
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.angle(vals[1:] / vals[:-1])
        bad = np.flatnonzero(np.abs(d) > max_jump)
        if bad.size == 0:
            return float(d.sum()), np.min(np.abs(vals)), np.max(np.abs(vals))
        if t.size + bad.size > max_points:
            raise ContourError("phase refinement budget exhausted (zero on or near the contour)")
        tm = 0.5 * (t[bad] + t[bad + 1])
        vm = f(a + (b - a) * tm)
        t = np.insert(t, bad + 1, tm)
        vals = np.insert(vals, bad + 1, vm)


def winding_number(f: Callable, box: Box, n0: int = 32, max_jump: float = math.pi / 2,
                   max_points: int = 1 << 14, small: float = 1e-10) -> int:
    corners = [complex(box.re_lo, box.im_lo), complex(box.re_hi, box.im_lo),
               complex(box.re_hi, box.im_hi), complex(box.re_lo, box.im_hi)]
    total, lo, hi = 0.0, np.inf, 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        ph, mn, mx = _edge_phase(f, a, b, n0, max_jump, max_points)
        total += ph
        lo, hi = min(lo, mn), max(hi, mx)
    if not np.isfinite(total) or lo <= small * hi:
        raise ContourError(f"|f| nearly vanishes on the contour (min {lo:.3e}, max {hi:.3e})")
    w = total / (2 * math.pi)
    if abs(w - round(w)) > 0.1:
        raise ContourError(f"non-integer winding {w:.4f}")
    return int(round(w))


def count_zeros(box: Box, cfg: SpectralConfig, func: Optional[Callable] = None, retries: int = 5) -> int:
    """Zeros of det(M~) inside box by the argument principle (adaptive phase tracking)."""
    f = func or (lambda z: char_det_scaled(z, cfg))
    trial = box
    last = None
    for k in range(retries + 1):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                return winding_number(f, trial)
        except ContourError as exc:
            last = exc
            span = min(box.re_hi - box.re_lo, box.im_hi - box.im_lo)
            trial = box.scaled(1.0 - 0.03 * (k + 1), shift=complex(0.011, 0.007) * span * (k + 1))
    raise ContourError(f"contour passes through a zero after {retries} retries: {last}; box={box.as_tuple()}")


# ------------------------------------------------------------------ root finder

@dataclass
class RootRecord:
    lam: complex
    residual: float
    newton_iters: int
    box: Box
    multiplicity: int
    n: int = 0
    branch: int = 0
    prediction: Optional[complex] = None
    status: str = "ok"
    notes: list = field(default_factory=list)

    @property
    def resolved(self) -> bool:
        return self.status in ("ok", "out-of-regime")


def default_root_tol(lam: complex) -> float:
    return 1e-9 * (1 + abs(lam))


def newton(f: Callable, z0: complex, max_iter: int = 60, box: Optional[Box] = None):
    """Newton on f with central-difference derivative; returns (z, iterations, converged)."""
    z = complex(z0)
    for k in range(1, max_iter + 1):
        h = 1e-6 * (1 + abs(z))
        fz = complex(f(z))
        df = (complex(f(z + h)) - complex(f(z - h))) / (2 * h)
        if df == 0 or not np.isfinite(df):
            return z, k, False
        step = fz / df
        z -= step
        if not np.isfinite(z) or (box is not None and not box.contains(z)):
            return z, k, False
        if abs(step) <= 4e-16 * (1 + abs(z)):
            return z, k, True
    return z, max_iter, abs(step) <= 1e-10 * (1 + abs(z))


def _bisect_box(f, cfg, box: Box, depth: int = 8) -> Optional[complex]:
    """Shrink to a quadrant holding exactly one zero, then Newton from its center."""
    current = box
    for _ in range(depth):
        counts = []
        for q in current.quadrants():
            try:
                counts.append(count_zeros(q, cfg, f))
            except ContourError:
                counts.append(-1)
        ones = [q for q, cnt in zip(current.quadrants(), counts) if cnt == 1]
        if not ones:
            return None
        current = ones[0]
        z, _, ok = newton(f, current.center, box=current.scaled(3.0))
        if ok:
            return z
    return None


def _find_one(n: int, branch: int, cfg: SpectralConfig, root_tol, case, n_min) -> RootRecord:
    f = lambda z: char_det_scaled(z, cfg)
    pred = predict_branch(branch, n, cfg, case).lam
    half = abs(n) ** -0.25
    search = Box.around(pred, half)
    z, iters, ok = newton(f, pred, box=search)
    notes = []
    if not ok:
        notes.append("newton diverged; bisection fallback")
        zb = _bisect_box(f, cfg, search)
        if zb is not None:
            z, ok = zb, True
    tol = root_tol(z) if callable(root_tol) else float(root_tol)
    res = abs(complex(f(z))) if np.isfinite(z) else math.inf
    status = "ok" if abs(n) >= n_min else "out-of-regime"
    mult = 0
    box = Box.around(z if np.isfinite(z) else pred, half)
    if ok and res <= tol:
        for shrink in (1.0, 0.5, 0.25, 0.125, 0.0625):
            try:
                box = Box.around(z, half * shrink)
                mult = count_zeros(box, cfg, f)
            except ContourError as exc:
                notes.append(str(exc))
                mult = 0
            if mult == 1:
                if shrink < 1.0:
                    notes.append(f"box shrunk to {shrink} of the Rouche radius to isolate the root")
                break
        if mult != 1:
            status = "unresolved"
            notes.append(f"box count {mult} != 1")
    else:
        status = "unresolved"
        notes.append(f"residual {res:.3e} above tolerance {tol:.3e}")
    return RootRecord(z, res, iters, box, max(mult, 1) if status != "unresolved" else mult,
                      n, branch, pred, status, notes)


def find_roots(n_range: Sequence[int], branch: int, cfg: SpectralConfig, root_tol=default_root_tol,
               case: Optional[int] = None, n_min: int = N_MIN, threads: int = 1) -> list[RootRecord]:
    """Newton-refined roots seeded at the branch predictions, one per n in [n_lo, n_hi]."""
    n_lo, n_hi = int(n_range[0]), int(n_range[1])
    ns = [n for n in range(n_lo, n_hi + 1) if n != 0]
    work = lambda n: _find_one(n, branch, cfg, root_tol, case, n_min)
    if threads > 1 and len(ns) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(work, ns))
    return [work(n) for n in ns]


# ------------------------------------------------------- discrete cross-check

def discrete_spectrum_probe(gen, shifts: Sequence[complex], tol: float = 1e-12, max_iter: int = 200,
                            seed: int = 42, allow_zero_shift: bool = False) -> list[complex]:
    """Nearest eigenvalue of A_h to each shift by shifted inverse iteration.

    Iterates live in the zero-mean subspace for Dirichlet-Neumann ends. Entries that
    stagnate come back as nan with a warning.
    """
    a = gen.A
    eye = sp.identity(a.shape[0], dtype=complex, format="csc")
    cons = gen.constraints
    rng = np.random.default_rng(seed)
    gram = gen.G

    def project(x):
        if cons.shape[0] == 0:
            return x
        return x - cons.T @ ((cons @ x) / np.sum(cons ** 2, axis=1))

    out = []
    for sigma in shifts:
        sigma = complex(sigma)
        if sigma == 0 and not allow_zero_shift:
            raise ValueError("shift 0 rejected: 0 lies in the resolvent set of the generator")
        lu = spla.splu((a - sigma * eye).tocsc())
        x = project(rng.standard_normal(a.shape[0]) + 1j * rng.standard_normal(a.shape[0]))
        x /= math.sqrt(np.vdot(x, gram @ x).real)
        mu_old = None
        converged = False
        for _ in range(max_iter):
            y = project(lu.solve(x))
            nu = np.vdot(x, gram @ y) / np.vdot(x, gram @ x)
            mu = sigma + 1 / nu
            x = y / math.sqrt(np.vdot(y, gram @ y).real)
            if mu_old is not None and abs(mu - mu_old) <= tol * max(1.0, abs(mu)):
                converged = True
                break
            mu_old = mu
        if not converged:
            warnings.warn(f"inverse iteration stagnated at shift {sigma}", RuntimeWarning, stacklevel=2)
            mu = complex(np.nan, np.nan)
        out.append(complex(mu))
    return out
