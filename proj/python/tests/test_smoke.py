import math

import numpy as np
import pytest

import annealab as al


def test_potential_vectorized():
    x = np.linspace(-1.0, 1.0, 5)
    v = al.potential(x)
    assert v.shape == x.shape
    assert v[2] == 0.0
    assert v[0] == pytest.approx(0.5 + 0.1 * (1 - math.cos(2 * math.pi / 0.2)))


def test_minima_count_reference_params():
    p = al.PotentialParams()
    assert al.count_minima(p) == len(al.local_minima(p))
    assert al.count_minima(p) == 15
    assert al.count_minima(al.PotentialParams(h0=0.0)) == 0


def test_ground_state_harmonic_limit():
    p = al.PotentialParams(h0=0.0)
    g = al.Grid(12.0, 512)
    r = al.lowest_eigenpairs(g, p, 1.0, 2)
    assert r["energies"][0] == pytest.approx(0.5, abs=1e-10)
    assert r["energies"][1] == pytest.approx(1.5, abs=1e-10)
    psi = r["states"][0]
    assert abs(al.inner_product(g, psi, psi) - 1.0) < 1e-12


def test_propagation_tracks_ground_state():
    p = al.PotentialParams()
    g = al.grid_for_mass(p, 1.0, 512)
    psi0 = al.lowest_eigenpairs(g, p, 1.0, 1)["states"][0]
    s = al.MassSchedule(al.MassScheduleKind.poly3, 1.0, 2.0, 50.0)
    cfg = al.PropagationConfig()
    cfg.integrator = al.Integrator.split_step
    tr = al.propagate(g, p, s, psi0, cfg)
    e0 = al.lowest_eigenpairs(g, p, 2.0, 1)["energies"][0]
    assert tr["energy"][-1] - e0 == pytest.approx(0.0, abs=1e-3)
    assert tr["max_norm_drift"] < 1e-8


def test_equilibrium_table_value():
    u = al.equilibrium(al.PotentialParams(), 10 ** 0.29)
    assert u.internal_energy == pytest.approx(0.603158201, abs=1e-6)


def test_philox_is_pure():
    a = al.philox_uniforms(7, 3, 11)
    assert a == al.philox_uniforms(7, 3, 11)
    assert a != al.philox_uniforms(7, 4, 11)
    assert all(0.0 < u < 1.0 for u in a)


def test_anneal_deterministic():
    p = al.PotentialParams()
    sched = al.BetaSchedule(al.BetaScheduleKind.linear, 2.0, 10.0, 5.0)
    a = al.anneal_ensemble(p, sched, 1.0, 2000, 5)
    b = al.anneal_ensemble(p, sched, 1.0, 2000, 5)
    assert np.array_equal(a["avgV"], b["avgV"])
    assert a["t"][0] == 0.0 and a["t"][-1] == pytest.approx(5.0)


def test_fit_power_law_exact():
    t = np.logspace(1, 3, 9)
    fit = al.fit_power_law(t, 3.0 * t ** -2.5)
    assert fit.exponent == pytest.approx(-2.5, abs=1e-12)
    with pytest.raises(al.FitError):
        al.fit_power_law(t[:2], t[:2])


def test_config_errors_and_hash():
    text = "[run]\nstage = A\nT = 1,2\n[classical]\nN = 100\n"
    assert al.config_hash(text) == al.config_hash(text.replace("T = 1,2", "T = 1,2\nthreads = 4"))
    assert al.config_hash(text) != al.config_hash(text.replace("N = 100", "N = 101"))
    with pytest.raises(al.ConfigError):
        al.config_hash("[run]\nbogus = 1\n")


def test_stage_spec():
    s = al.stage_spec("2")
    assert s["kind"] == "quantum"
    assert (s["start"], s["end"]) == (1e3, 1e5)
