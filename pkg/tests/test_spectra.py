import math

import mpmath as mp
import numpy as np
import pytest

from timokv.beam_model import BeamParameters, DampingProfile
from timokv.discretize import assemble
from timokv.spectra import (Box, CaseAmbiguityError, ContourError, SpectralConfig, asymptotic_F,
                            char_det_scaled, char_matrix, count_zeros, det_M, discrete_spectrum_probe,
                            f0_factored, find_roots, g_coefficients, predict_branch, reduced_matrix,
                            wavenumbers, winding_number)

C1 = SpectralConfig(1.0)


@pytest.mark.parametrize("c,label", [(1.0, 1), (math.pi, 1), (2 * math.pi, 2), (6 * math.pi, 2),
                                     (4 * math.pi, 3), (8 * math.pi, 3)])
def test_case_labels(c, label):
    assert SpectralConfig(c).case_label == label


def test_case_boundary_requires_override():
    cfg = SpectralConfig(2 * math.pi + 1e-8)
    with pytest.raises(CaseAmbiguityError):
        predict_branch(1, 10, cfg)
    assert predict_branch(1, 10, cfg, case=2).case_label == 2


def test_r_identities():
    lam = 10j
    r1, r2, _, _ = wavenumbers(lam, C1)
    assert r1 ** 2 + r2 ** 2 == pytest.approx(2 * lam ** 2, rel=1e-12)
    assert r1 ** 2 - r2 ** 2 == pytest.approx(2j * lam, rel=1e-12)


def test_s_identities():
    cfg = SpectralConfig(2 * math.pi)
    lam = 40j - 0.01
    _, _, s1, s2 = wavenumbers(lam, cfg)
    # the sum follows from the definitions: (2 lam + lam^2) / (1 + 1/lam)
    assert s1 ** 2 + s2 ** 2 == pytest.approx(lam ** 2 * (lam + 2) / (lam + 1), rel=1e-12)
    assert s1 ** 2 * s2 ** 2 == pytest.approx(lam ** 2 * (lam ** 2 + cfg.c ** 2) / (1 + lam), rel=1e-12)


def test_principal_roots_have_nonnegative_real_part():
    lams = np.array([10j, -0.3 + 25j, -0.1 - 7j, 3j - 0.2])
    for w in wavenumbers(lams, SpectralConfig(3.0)):
        assert np.all(w.real >= 0)


def test_s2_expansion():
    lam = 200j * math.pi
    s2 = wavenumbers(lam, C1)[3]
    err = abs(s2 - (np.sqrt(lam) - 1 / (2 * np.sqrt(lam))))
    assert err <= 2 * abs(lam) ** -1.5


def test_char_matrix_column_one():
    lam = 1j * math.pi
    r1 = wavenumbers(lam, C1)[0]
    m = char_matrix(lam, C1)
    ref = [np.sinh(r1 / 2), r1 / (1j * lam ** 2) * np.cosh(r1 / 2), r1 ** 2 * np.sinh(r1 / 2),
           np.cosh(r1 / 2) / r1]
    np.testing.assert_allclose(m[:, 0], ref, rtol=1e-14)


def test_schwarz_reflection():
    cfg = SpectralConfig(2.5)
    for lam in (3.1j - 0.2, 17.4j - 0.05):
        # conjugation swaps r1 and r2 and flips the sign of the row carrying 1/(i c lam^2)
        ref = np.conj(char_matrix(lam, cfg))[:, [1, 0, 2, 3]]
        ref[1] *= -1
        np.testing.assert_allclose(char_matrix(np.conj(lam), cfg), ref, rtol=1e-12)
        assert np.linalg.det(char_matrix(np.conj(lam), cfg)) == pytest.approx(
            np.conj(np.linalg.det(char_matrix(lam, cfg))), rel=1e-12)
        assert char_det_scaled(np.conj(lam), cfg) == pytest.approx(np.conj(char_det_scaled(lam, cfg)), rel=1e-12)


def test_reduced_matrix_matches_scaled_det():
    for lam in (12j - 0.1, 31j - 0.02):
        assert np.linalg.det(reduced_matrix(lam, C1)) == pytest.approx(char_det_scaled(lam, C1), rel=1e-9)
        _, _, _, s2 = wavenumbers(lam, C1)
        # same analytic branch for det(M): det(M) = e^{s2/2}/2 det(M~)
        dm = det_M(lam, C1)[0]
        assert dm == pytest.approx(np.exp(s2 / 2) / 2 * char_det_scaled(lam, C1), rel=1e-8)


def test_det_and_reduced_det_share_zeros():
    box = Box.around(predict_branch(1, 6, C1).lam, 6 ** -0.25)
    full = count_zeros(box, C1, func=lambda z: np.array([det_M(w, C1)[0] for w in np.atleast_1d(z)]))
    assert full == count_zeros(box, C1) == 1


def test_g_asymptotics():
    lam = 400j * math.pi - 0.001
    g = g_coefficients(lam, C1)
    assert abs(g[0] - 2) <= 5 * abs(lam) ** -2
    assert abs(g[1] - (1 + 1j / (2 * lam))) <= 5 * abs(lam) ** -2


def test_f0_factorization(rng):
    for _ in range(5):
        lam = complex(rng.uniform(-0.5, 0), rng.uniform(-30, 30))
        cfg = SpectralConfig(rng.uniform(0.1, 20))
        f0 = asymptotic_F(lam, cfg) - 0  # dominant term checked via f_terms below
        from timokv.spectra import f_terms
        assert f_terms(lam, cfg)[0] == pytest.approx(f0_factored(lam, cfg), rel=1e-12, abs=1e-12)
        assert np.isfinite(f0)


def test_F_small_at_f0_root():
    lam = 2000j * math.pi
    assert abs(asymptotic_F(lam, C1)) <= 2 * 1000 ** -0.5


def test_remainder_order_mp():
    errs, lams = [], []
    with mp.workdps(40):
        for n in (100, 1000, 10000):
            lam = mp.mpc(-1e-3, 2 * n * mp.pi)
            errs.append(float(abs(char_det_scaled(lam, C1) - asymptotic_F(lam, C1))))
            lams.append(float(abs(lam)))
    slope = np.polyfit(np.log(lams), np.log(errs), 1)[0]
    assert slope <= -3 + 0.2


def test_predictions():
    p = predict_branch(1, 100, SpectralConfig(math.pi))
    ref = 200j * math.pi - (1 - 1j) / (3 * math.sqrt(100 * math.pi))
    assert p.lam == pytest.approx(ref, abs=1e-12)
    assert p.lam.imag == pytest.approx(628.3185 + 0.01881, abs=1e-4)
    assert p.correction_order == -1
    p = predict_branch(1, 40, SpectralConfig(2 * math.pi))
    assert p.lam.real == pytest.approx(-1 / math.sqrt(40 * math.pi), rel=1e-12)
    p = predict_branch(2, 50, SpectralConfig(4 * math.pi))
    assert p.lam.imag - 101 * math.pi == pytest.approx(math.pi / 100, rel=2e-2)
    assert p.correction_order == -2.5
    with pytest.raises(ValueError):
        predict_branch(3, 5, C1)
    with pytest.raises(ValueError):
        predict_branch(1, 0, C1)


def test_count_zeros_boxes():
    n = 40
    assert count_zeros(Box.around(2j * n * math.pi, n ** -0.25), C1) == 1
    assert count_zeros(Box(0.1, 0.4, 100.0, 101.0), C1) == 0


def test_winding_rejects_zero_on_contour():
    with pytest.raises(ContourError):
        winding_number(lambda z: z - 0.5, Box(0.5, 1.0, -1.0, 1.0))
    assert winding_number(lambda z: (z - 0.1) * (z + 0.2j), Box(-1, 1, -1, 1)) == 2


def test_find_roots_case1():
    recs = find_roots((50, 60), 1, C1)
    assert len(recs) == 11
    for r in recs:
        assert r.status == "ok" and r.multiplicity == 1
        assert abs(r.lam - r.prediction) <= 3.0 / r.n
        assert r.lam.real < 0
        assert r.residual <= 1e-9 * (1 + abs(r.lam))
    assert recs[-1].lam.real > recs[0].lam.real


def test_conjugate_pairs():
    pos = find_roots((12, 14), 1, C1)
    neg = find_roots((-14, -12), 1, C1)
    for a, b in zip(pos, reversed(neg)):
        assert b.lam == pytest.approx(np.conj(a.lam), abs=1e-8)


def test_empty_and_out_of_regime():
    assert find_roots((5, 4), 1, C1) == []
    recs = find_roots((2, 3), 1, C1)
    assert all(r.status in ("out-of-regime", "unresolved") for r in recs)


def test_discrete_probe_near_root():
    root = find_roots((2, 2), 1, C1, n_min=1)[0].lam
    p = BeamParameters.normalized(1.0)
    errs = []
    for n in (400, 800):
        gen = assemble(p, DampingProfile.step(), "dn", n)
        errs.append(abs(discrete_spectrum_probe(gen, [root])[0] - root))
    assert errs[1] < errs[0] < 1e-2
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.25)


def test_discrete_probe_zero_shift_and_conservative():
    p = BeamParameters.normalized(1.0)
    gen = assemble(p, DampingProfile.step(), "dn", 64)
    with pytest.raises(ValueError):
        discrete_spectrum_probe(gen, [0.0])
    # dense oracle: the spectrum stays away from 0 (real cluster near -1 from the damped segment)
    import scipy.linalg as la
    assert np.abs(la.eigvals(gen.A.toarray())).min() > 0.5
    gen0 = assemble(p, DampingProfile.zero(), "dn", 64, allow_zero=True)
    for mu in discrete_spectrum_probe(gen0, [0.1j, 5j, 13j - 0.5]):
        assert abs(mu.real) < 1e-8
        assert abs(mu) > 1.0
