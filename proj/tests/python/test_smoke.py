import math

import numpy as np
import pytest

import anisofdtd as af


def test_quantities_and_config():
    assert af.parse_quantity("200 nm") == pytest.approx(0.2)
    assert af.parse_quantity("1 fs") == pytest.approx(af.FEMTOSECOND)
    with pytest.raises(af.ConfigError):
        af.parse_quantity("3 parsecs")
    text = af.normalize_config("grid: {dims: [4, 4, 4]}\nmaterial: {layout: {kind: vacuum}}\n")
    assert af.normalize_config(text) == text


def test_grid_and_materials_roundtrip():
    g = af.Grid([3, 4, 5], [0.1, 0.1, 0.1])
    assert g.cell_count == 60
    assert g.linear(1, 2, 3) == 1 + 3 * (2 + 4 * 3)
    m = af.Materials.layout(g, "random", gamma=100, seed=3)
    eps = m.eps
    assert eps.shape == (60, 3, 3)
    assert np.allclose(eps, np.transpose(eps, (0, 2, 1)))
    assert np.all(np.linalg.eigvalsh(eps) > 0)
    again = af.Materials([3, 4, 5], eps, m.mu)
    assert again.digest == m.digest
    with pytest.raises(af.InvalidInput):
        af.Materials([3, 4, 5], eps[:10], m.mu)


def test_vacuum_cfl_matches_courant_limit():
    g = af.Grid([8, 8, 8])
    r = af.compute_cfl(g, af.Materials.vacuum([8, 8, 8]), af.Scheme.averaged)
    assert r["dt_max"] == pytest.approx(1 / math.sqrt(3), rel=1e-6)


def test_update_matrix_is_unit_modulus_below_the_limit():
    g = af.Grid([3, 3, 3])
    m = af.Materials.layout(g, "random", gamma=10, seed=5)
    for scheme in (af.Scheme.averaged, af.Scheme.non_averaged):
        dt = 0.5 * af.compute_cfl(g, m, scheme)["dt_max"]
        a = af.update_matrix(g, m, scheme, dt)
        lam = np.asarray(af.eigenvalues(a))
        assert np.max(np.abs(np.abs(lam) - 1)) < 1e-10
        # Independent check through numpy.
        assert np.allclose(np.sort(np.abs(np.linalg.eigvals(a))), np.sort(np.abs(lam)), atol=1e-9)


def test_simulation_conserves_energy_and_exposes_fields():
    g = af.Grid([6, 6, 6], [0.02] * 3)
    m = af.Materials.layout(g, "random", gamma=100, seed=7)
    dt = 0.4 * af.compute_cfl(g, m, af.Scheme.averaged)["dt_max"]
    sim = af.Simulation(g, m, af.Scheme.averaged, dt)
    rng = np.random.default_rng(0)
    sim.set_field(af.Component.Bz, rng.standard_normal((6, 6, 6)))
    sim.sync_fields()
    e0 = sim.energy_norm()
    sim.run(200)
    assert sim.time_level == 200
    assert sim.energy_norm() == pytest.approx(e0, rel=0.5)
    assert sim.field(af.Component.Ex).shape == (6, 6, 6)


def test_point_source_and_runaway():
    g = af.Grid([4, 4, 4])
    sim = af.Simulation(g, af.Materials.vacuum([4, 4, 4]), af.Scheme.non_averaged, 0.2)
    sim.add_point_source(af.Component.Ey, [1, 1, 1], t0=0.6, tau=0.3)
    sim.step()
    assert sim.field(af.Component.Ey)[1, 1, 1] == pytest.approx(math.exp(-((0.2 - 0.6) / 0.3) ** 2))
    bad = af.Simulation(g, af.Materials.vacuum([4, 4, 4]), af.Scheme.non_averaged, 3.0)
    bad.add_point_source(af.Component.Ex, [0, 0, 0], t0=0.0, tau=1.0)
    with pytest.raises(af.NumericalError):
        bad.run(2000)


def test_cloak_and_analysis_helpers():
    spec = af.CloakSpec()
    spec.center = [0.2, 0.2, 0.2]
    g = af.Grid([8, 8, 8], [0.05] * 3)
    m = af.build_cloak(spec, g)
    assert not np.allclose(m.eps, np.eye(3))
    eps, mu = af.cloak_tensors(spec, [0.25, 0.2, 0.2])
    assert np.allclose(eps, mu)
    assert af.convergence_order([(10, 4e-3), (20, 1e-3)]) == pytest.approx(2.0)
    assert af.relative_error([1 + 0j, 2j], [1 + 0j, 1j]) == pytest.approx(0.5)
