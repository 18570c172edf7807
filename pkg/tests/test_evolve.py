import numpy as np
import pytest

from timokv.beam_model import BeamParameters, DampingProfile, GridState, ModelError, energy
from timokv.discretize import assemble, inner
from timokv.evolve import (EnergyTrace, default_dt, fit_decay_exponent, simulate, step_midpoint)

from conftest import random_state

P = BeamParameters()


def test_zero_state_stays_zero():
    gen = assemble(P, DampingProfile.step(), "dn", 32)
    tr = simulate(gen, GridState.zeros(32), t_final=1.0)
    assert np.all(tr.energies == 0.0)


def test_conservative_limit_preserves_energy(rng):
    gen = assemble(P, DampingProfile.zero(), "dn", 40, allow_zero=True)
    s = random_state(rng, 40)
    tr = simulate(gen, s, t_final=5.0)
    assert np.abs(tr.energies - tr.energies[0]).max() <= 1e-10 * tr.energies[0]


def test_global_damping_monotone_and_decaying(rng):
    gen = assemble(P, DampingProfile.constant(1.0), "dd", 40)
    tr = simulate(gen, random_state(rng, 40, "dd"), t_final=5.0, stride=5)
    assert tr.monotone
    assert np.all(np.diff(tr.energies) <= 1e-12 * tr.energies[0])
    assert tr.energies[-1] < tr.energies[0]


def test_dn_mean_preserved(rng):
    gen = assemble(P, DampingProfile.step(), "dn", 40)
    tr = simulate(gen, random_state(rng, 40), t_final=3.0)
    assert tr.mean_drift.max() < 1e-10


def test_sine_mode_single_step():
    n = 64
    gen = assemble(P, DampingProfile.constant(1.0), "dd", n)
    s = GridState.from_functions(n, u=lambda x: np.sin(np.pi * x))
    out = step_midpoint(gen, s, 0.01)
    assert energy(out, P) <= energy(s, P)
    # defining relation of the midpoint rule
    a, u0, u1 = gen.A, gen.to_free(s), gen.to_free(out)
    resid = (u1 - 0.005 * (a @ u1)) - (u0 + 0.005 * (a @ u0))
    assert np.abs(resid).max() < 1e-12 * np.abs(u0).max() * 1e2


def test_step_halving_second_order():
    n = 64
    gen = assemble(P, DampingProfile.constant(1.0), "dn", n)
    s = GridState.from_functions(n, u=lambda x: np.sin(np.pi * x), y=lambda x: np.cos(np.pi * x))
    import scipy.linalg as la
    exact = la.expm(gen.A.toarray() * 0.5) @ gen.to_free(s)
    errs = []
    for dt in (0.05, 0.025):
        v = gen.to_free(s)
        for _ in range(int(round(0.5 / dt))):
            v = gen.to_free(step_midpoint(gen, gen.from_free(v), dt))
        errs.append(np.sqrt(np.vdot(v - exact, gen.G @ (v - exact)).real))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_inadmissible_initial_state():
    gen = assemble(P, DampingProfile.step(), "dd", 16)
    with pytest.raises(ModelError):
        simulate(gen, GridState.from_functions(16, y=lambda x: 1 + 0 * x), t_final=0.1)


def test_default_dt():
    gen = assemble(BeamParameters(k1=4.0), DampingProfile.step(), "dn", 20)
    assert default_dt(gen) == pytest.approx(0.05 / 2.0)


def test_fit_recovers_power_law():
    t = np.linspace(1.0, 1000.0, 2000)
    fit = fit_decay_exponent(EnergyTrace(t, 3.0 * t ** -1.0, 1.0))
    assert fit.p == pytest.approx(1.0, abs=1e-9)
    assert fit.C == pytest.approx(3.0, rel=1e-9)
    assert fit.power_law


def test_fit_flags_exponential():
    t = np.linspace(0.1, 100.0, 2000)
    fit = fit_decay_exponent(EnergyTrace(t, np.exp(-0.1 * t), 1.0))
    assert not fit.power_law
    assert any("curvature" in f for f in fit.flags)


def test_fit_needs_samples():
    t = np.linspace(1.0, 10.0, 30)
    with pytest.raises(ValueError):
        fit_decay_exponent(EnergyTrace(t, t ** -1.0, 1.0), window=(9.5, 10.0))
    with pytest.raises(ValueError):
        fit_decay_exponent(EnergyTrace(t, t ** -1.0, 1.0), window=(5.0, 2.0))


def test_energy_matches_inner_along_trace(rng):
    gen = assemble(P, DampingProfile.step(), "dn", 32)
    s = random_state(rng, 32)
    tr = simulate(gen, s, t_final=0.2)
    assert tr.energies[0] == pytest.approx(0.5 * inner(gen, s, s).real, rel=1e-12)
