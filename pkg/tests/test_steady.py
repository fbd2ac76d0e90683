import dataclasses
import math

import numpy as np
import pytest

import steerlab as sl
from steerlab.errors import ConfigurationError
from steerlab.generator import from_vector6
from steerlab.model import Basis, Phase
from steerlab.rates import Statistics
from steerlab.steady import max_stable_dt

from conftest import gibbs_local, random_system

BOSE = Statistics.BOSE
FERMI = Statistics.FERMI


def make(p, ta, tb, stat=BOSE, mua=0.0, mub=0.0):
    g = sl.build_generator(p, sl.ReservoirSpec(stat, ta, mua), sl.ReservoirSpec(stat, tb, mub))
    return g, sl.steady_state(g)


class TestSteadyState:
    def test_equilibrium_matches_analytic_weak_bose(self):
        p = sl.SystemParams(1.5, 0.5, 1.0, 0.01)
        g, ss = make(p, 0.5, 0.5)
        ana = sl.equilibrium_analytic(p, g.reservoir_a)
        assert np.max(np.abs(ss.state_local.entries - ana.local.entries)) < 1e-10
        assert np.max(np.abs(ss.state_energy.entries - ana.energy.entries)) < 1e-10
        assert ss.residual < 1e-10 and ss.positivity_ok

    def test_symmetric_equilibrium_population_symmetry(self):
        p = sl.SystemParams(1.0, 1.0, 1.0, 0.01)
        _, ss = make(p, 0.5, 0.5)
        m = ss.state_local.entries
        assert m[1, 1].real == pytest.approx(m[2, 2].real, abs=1e-14)

    def test_nonequilibrium_coherence_grows_from_zero(self):
        p = sl.SystemParams(1.1, 0.9, 1.0, 0.01)
        cohs = []
        for dt in (0.0, 0.05, 0.1, 0.2):
            _, ss = make(p, 0.5 - dt / 2, 0.5 + dt / 2)
            cohs.append(abs(ss.vector6[4]))
        assert cohs[0] < 1e-12
        assert all(a < b for a, b in zip(cohs, cohs[1:]))

    def test_population_gamma_independence_equilibrium(self):
        # block decoupling makes equilibrium populations exactly gamma-free
        base = dict(eps_a=1.4, eps_b=0.6, kappa=1.0)
        pops = []
        for gamma in (0.01, 0.001):
            p = sl.SystemParams(**base, gamma=gamma)
            _, ss = make(p, 0.5, 0.5)
            pops.append(ss.vector6[:4].real)
        assert np.max(np.abs(pops[0] - pops[1])) < 1e-10

    def test_population_gamma_dependence_is_second_order(self):
        # out of equilibrium the coherence feedback shifts populations at
        # O(gamma^2): differences shrink quadratically under gamma -> gamma/10
        base = dict(eps_a=1.4, eps_b=0.6, kappa=1.0)
        pops = {}
        for gamma in (0.01, 0.001, 0.0001):
            p = sl.SystemParams(**base, gamma=gamma)
            _, ss = make(p, 0.4, 0.7)
            pops[gamma] = ss.vector6[:4].real
        d1 = np.max(np.abs(pops[0.01] - pops[0.001]))
        d2 = np.max(np.abs(pops[0.001] - pops[0.0001]))
        assert d1 < 1e-4
        assert d2 < 1e-6
        assert d2 < 0.05 * d1

    def test_fermionic_coherence_closed_form(self):
        # fermionic steady coherence is (s_B - s_A) / (2 gamma - i Omega):
        # the coherence row couples to the unit population sum only
        p = sl.SystemParams(1.2, 0.8, 0.6, 0.01)
        g, ss = make(p, 0.15, 0.15, FERMI, mua=0.4, mub=1.3)
        rs = g.rates
        omega = 2 * g.derived.omega
        expected = (rs.s_b - rs.s_a) / (2 * p.gamma - 1j * omega)
        assert ss.vector6[4] == pytest.approx(expected, rel=1e-10)

    def test_all_setups_match_gibbs(self, rng):
        for phase, stat in ((Phase.WEAK, BOSE), (Phase.STRONG, BOSE), (Phase.WEAK, FERMI)):
            p = random_system(rng, phase)
            t = rng.uniform(0.2, 1.5)
            mu = rng.uniform(-0.5, 2.0) if stat is FERMI else 0.0
            g, ss = make(p, t, t, stat, mu, mu)
            oracle = gibbs_local(p, 1.0 / t, mu)
            assert np.max(np.abs(ss.state_local.entries - oracle)) < 1e-10


class TestEvolve:
    def test_steady_state_is_fixed_point(self):
        p = sl.SystemParams(1.0, 1.0, 3.0, 0.01)
        g, ss = make(p, 0.4, 0.6)
        traj = sl.evolve(g, ss.state_energy, t_final=50.0, dt=0.02)
        assert np.max(np.abs(traj.vectors - ss.vector6)) < 1e-10

    def test_ground_state_converges_to_gibbs(self):
        p = sl.SystemParams(1.0, 1.0, 1.0, 0.05)
        g, ss = make(p, 0.5, 0.5)
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = 1.0
        rho0 = sl.DensityMatrix4(entries=m, basis=Basis.LOCAL)
        traj = sl.evolve(g, rho0, t_final=20 / 0.05, dt=0.02)
        final = traj.final_state(Basis.LOCAL)
        assert np.max(np.abs(final.entries - gibbs_local(p, 2.0))) < 1e-8
        assert traj.trace_drift() < 1e-10

    def test_unstable_dt_rejected(self):
        p = sl.SystemParams(1.0, 1.0, 3.0, 0.01)
        g, _ = make(p, 0.4, 0.6)
        with pytest.raises(ValueError, match="unstable"):
            sl.evolve(g, sl.DensityMatrix4(entries=np.eye(4, dtype=complex) / 4,
                                           basis=Basis.LOCAL),
                      t_final=1.0, dt=10.0)

    def test_coherent_only_unitary_limit(self):
        # zeroed dissipators: coherence rotates at Omega with constant modulus
        p = sl.SystemParams(1.3, 0.7, 1.0, 0.01)
        g, _ = make(p, 0.5, 0.5)
        zero = np.zeros((6, 6), dtype=complex)
        g0 = dataclasses.replace(g, total=g.coherent_part, res_a_part=zero, res_b_part=zero)
        v0 = np.array([0.4, 0.3, 0.2, 0.1, 0.1 + 0.05j, 0.1 - 0.05j])
        rho0 = sl.DensityMatrix4(entries=from_vector6(v0), basis=Basis.ENERGY)
        traj = sl.evolve(g0, rho0, t_final=5.0, dt=0.01)
        mags = np.abs(traj.vectors[:, 4])
        assert np.max(np.abs(mags - abs(v0[4]))) < 1e-9
        omega = 2 * g.derived.omega
        expected = v0[4] * np.exp(1j * omega * traj.times[-1])
        assert traj.vectors[-1, 4] == pytest.approx(expected, rel=1e-7)

    def test_projection_warns_on_unrepresentable_state(self):
        # |01><01| in the strong phase needs g<->e3 coherence
        p = sl.SystemParams(1.0, 1.0, 3.0, 0.01)
        g, _ = make(p, 0.5, 0.5)
        m = np.zeros((4, 4), dtype=complex)
        m[1, 1] = 1.0
        rho0 = sl.DensityMatrix4(entries=m, basis=Basis.LOCAL)
        with pytest.warns(UserWarning, match="projecting"):
            sl.evolve(g, rho0, t_final=1.0, dt=0.01)

    def test_csv_rows_schema(self):
        p = sl.SystemParams(1.0, 1.0, 1.0, 0.01)
        g, ss = make(p, 0.5, 0.5)
        traj = sl.evolve(g, ss.state_energy, t_final=0.1, dt=0.05)
        rows = list(traj.csv_rows())
        assert len(rows) == len(traj.times)
        assert all(len(r) == 7 for r in rows)


class TestEquilibriumAnalytic:
    def test_zero_temperature_limits(self):
        p_weak = sl.SystemParams(1.5, 0.5, 1.0, 0.01)
        ana = sl.equilibrium_analytic(p_weak, sl.ReservoirSpec(BOSE, 0.01))
        assert ana.local.entries[0, 0].real == pytest.approx(1.0, abs=1e-10)

        p_strong = sl.SystemParams(1.5, 0.5, 3.0, 0.01)
        d = sl.derive_params(p_strong)
        ana = sl.equilibrium_analytic(p_strong, sl.ReservoirSpec(BOSE, 0.02))
        m = ana.local.entries
        assert m[1, 2].real == pytest.approx(-math.sin(d.theta) / 2, abs=1e-9)
        assert m[1, 1].real == pytest.approx(math.cos(d.theta / 2) ** 2, abs=1e-9)
        assert m[2, 2].real == pytest.approx(math.sin(d.theta / 2) ** 2, abs=1e-9)

    def test_gibbs_oracle_all_setups(self, rng):
        for phase, stat, mu in ((Phase.WEAK, BOSE, 0.0), (Phase.STRONG, BOSE, 0.0),
                                (Phase.WEAK, FERMI, 0.9)):
            p = random_system(rng, phase)
            t = rng.uniform(0.2, 1.5)
            ana = sl.equilibrium_analytic(p, sl.ReservoirSpec(stat, t, mu))
            assert np.max(np.abs(ana.local.entries - gibbs_local(p, 1 / t, mu))) < 1e-10

    def test_nonequilibrium_rejected(self):
        p = sl.SystemParams(1, 1, 1, 0.01)
        with pytest.raises(ConfigurationError):
            sl.equilibrium_analytic(p, sl.ReservoirSpec(BOSE, 0.5), sl.ReservoirSpec(BOSE, 0.6))

    def test_strong_fermi_rejected(self):
        p = sl.SystemParams(1, 1, 3, 0.01)
        with pytest.raises(ConfigurationError):
            sl.equilibrium_analytic(p, sl.ReservoirSpec(FERMI, 0.2, 1.0))


def test_long_time_evolution_matches_null_space(rng):
    p = random_system(rng, Phase.WEAK, gamma_range=(5e-3, 0.02))
    g, ss = make(p, 0.45, 0.65)
    rho0 = sl.DensityMatrix4(entries=np.eye(4, dtype=complex) / 4, basis=Basis.LOCAL)
    dt = 0.9 * max_stable_dt(g)
    traj = sl.evolve(g, rho0, t_final=20 / p.gamma, dt=dt)
    assert np.max(np.abs(traj.vectors[-1] - ss.vector6)) < 1e-8
