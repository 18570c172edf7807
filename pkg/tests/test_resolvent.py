import math

import numpy as np
import pytest

from timokv.beam_model import BeamParameters, DampingProfile, UnderResolvedError
from timokv.discretize import apply, assemble, inner
from timokv.resolvent import (blowup_coefficients, blowup_exponent, build_blowup_pair, pair_ratio,
                              resolvent_growth_scan, resolvent_norm_discrete)

UNIT = BeamParameters()


def test_B_closed_form():
    pair = build_blowup_pair(2, UNIT, 1.0, 64)
    assert pair.B_n == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert pair.lambda_n == pytest.approx(2 * math.pi, rel=1e-14)


@pytest.mark.parametrize("params", [UNIT, BeamParameters(1.3, 0.7, 2.0, 0.5, 1.5)])
def test_C1_C2_identities(params):
    for n in range(1, 21):
        _, _, _, c1, c2 = blowup_coefficients(n, params, 0.8)
        assert c1 == pytest.approx(1.0, abs=1e-12)
        assert abs(c2) < 1e-12


def test_A_asymptotics_and_d0_scaling():
    n = 2000
    lead = n * math.pi * 1.0
    a1 = blowup_coefficients(n, UNIT, 1.0)[1]
    a2 = blowup_coefficients(n, UNIT, 2.0)[1]
    assert abs(a1) / lead == pytest.approx(1.0, rel=1e-6)
    assert abs(a2) / abs(a1) == pytest.approx(2.0, rel=1e-6)


def test_under_resolved():
    with pytest.raises(UnderResolvedError):
        build_blowup_pair(10, UNIT, 1.0, 64)
    with pytest.raises(ValueError):
        build_blowup_pair(0, UNIT, 1.0, 64)


def test_forcing_norm_constant():
    vals = [inner(assemble(UNIT, DampingProfile.constant(1.0), "dn", 400),
                  build_blowup_pair(n, UNIT, 1.0, 400).F_n, build_blowup_pair(n, UNIT, 1.0, 400).F_n).real
            for n in (3, 10, 40)]
    np.testing.assert_allclose(vals, 0.5, rtol=1e-12)


def test_action_reproduces_closed_form_rhs():
    """(i lam_n - A_h) U_n approaches F_n = (0, sin, 0, 0) under refinement."""
    errs = []
    for n_cells in (200, 400):
        gen = assemble(UNIT, DampingProfile.constant(1.0), "dn", n_cells)
        pair = build_blowup_pair(3, UNIT, 1.0, n_cells)
        au = apply(gen, pair.U_n)
        res = pair.U_n.scaled(1j * pair.lambda_n) + au.scaled(-1)
        diff = res + pair.F_n.scaled(-1)
        inner_nodes = slice(1, -1)
        errs.append(max(np.abs(getattr(diff, k))[inner_nodes].max() for k in "uvyz"))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_blowup_slope_quick():
    slope = blowup_exponent([10, 20, 40], UNIT, 1.0, 640)
    assert slope == pytest.approx(2.0, abs=0.1)


def test_blowup_skips_under_resolved():
    with pytest.warns(RuntimeWarning):
        slope = blowup_exponent([5, 10, 100], UNIT, 1.0, 200)
    assert np.isfinite(slope)


def test_resolvent_at_zero_finite():
    gen = assemble(BeamParameters.normalized(1.0), DampingProfile.step(), "dn", 64)
    assert np.isfinite(resolvent_norm_discrete(gen, 0.0))


def test_lower_bound_consistency():
    n_cells = 800
    gen = assemble(UNIT, DampingProfile.constant(1.0), "dn", n_cells)
    for n in (3, 6):
        pair = build_blowup_pair(n, UNIT, 1.0, n_cells)
        assert resolvent_norm_discrete(gen, pair.lambda_n) >= 0.99 * pair_ratio(pair, UNIT, 1.0)


def test_conservative_resonance():
    import scipy.linalg as la
    gen = assemble(UNIT, DampingProfile.zero(), "dd", 32, allow_zero=True)
    w = la.eigvals(gen.A.toarray())
    om = np.sort(w.imag[w.imag > 0.5])[0] + 1e-9
    tol = 1e-6
    assert resolvent_norm_discrete(gen, om, tol=tol) > 1 / tol


def test_scan_bounded_regime_and_validation():
    gen = assemble(UNIT, DampingProfile.constant(50.0), "dd", 32)
    res = resolvent_growth_scan(gen, [0.3, 0.6, 0.9])
    assert not res.diverging and res.notes
    with pytest.raises(ValueError):
        resolvent_growth_scan(gen, [1.0])
    with pytest.raises(ValueError):
        resolvent_growth_scan(gen, [2.0, 1.0])
