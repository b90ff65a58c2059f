"""Acceptance criteria 1-12, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; a summary section lists one
PASS/FAIL line per criterion.
"""
import math

import numpy as np
import pytest
from scipy import linalg

from conftest import log_uniform, random_spec
from spinlind import ChainSpec, solve_chain
from spinlind import oracle
from spinlind.kinetics import evolve_populations, slowest_rate
from spinlind.liouville import build_liouvillian, coherence_decay_check, steady_density
from spinlind.spectral import configuration_labels
from spinlind.transport import (ModulatorScenario, bulk_spec, bulk_chain_spec, modulator_spec,
                                run_modulator)

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def occupation(omega, t):
    return 1.0 / math.expm1(omega / t)


@pytest.mark.criterion(1, "single-spin thermal state, 50 draws, 1e-12")
def test_single_spin_thermal_state():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(50):
        b, t = log_uniform(rng, 1, 10), log_uniform(rng, 1, 20)
        k, th = log_uniform(rng, 1e-4, 1e-2), rng.uniform(0, math.pi / 2)
        sol = solve_chain(ChainSpec(1, b, th, (), k, t))
        n = occupation(b, t)
        # level 0 is the ground state, level 1 the excited one
        expect = np.array([(n + 1) / (2 * n + 1), n / (2 * n + 1)])
        worst = max(worst, np.abs(sol.populations - expect).max())
    print(f"max deviation {worst:.2e}")
    assert worst <= 1e-12


@pytest.mark.criterion(2, "two-spin closed form, 100 LF draws, 1e-10 relative")
def test_two_spin_oracle_equivalence():
    rng = np.random.default_rng(102)
    worst_p = worst_q = 0.0
    done = 0
    while done < 100:
        spec = random_spec(rng, 2, angles=0.0)
        if min(spec.field_magnitude) <= spec.coupling[0]:
            continue
        sol = solve_chain(spec)
        ref = oracle.two_spin_steady(spec)
        for i, lab in enumerate(configuration_labels(sol.eigensystem)):
            worst_p = max(worst_p, abs(sol.populations[i] / ref.populations[lab] - 1))
        q1 = -2 * spec.coupling[0] * ref.gamma12
        worst_q = max(worst_q, abs(sol.currents[0] / q1 - 1), abs(sol.currents[1] / -q1 - 1))
        done += 1
    sym = solve_chain(ChainSpec(2, 4.0, 0.0, 0.3, 2e-3, 6.0))
    print(f"populations {worst_p:.2e}  currents {worst_q:.2e}  "
          f"symmetric {np.abs(sym.currents).max():.2e}")
    assert worst_p <= 1e-10
    assert worst_q <= 1e-10
    assert np.abs(sym.currents).max() <= 1e-14


@pytest.mark.criterion(3, "energy conservation, 500 specs, N in [2, 6]")
def test_energy_conservation():
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 7))
        kind = rng.integers(4)
        if kind == 0:
            angles = rng.choice([0.0, math.pi / 2], n)
        elif kind == 1:
            angles = rng.uniform(0, math.pi, n)
        else:
            angles = rng.uniform(0, math.pi / 2, n)
        kappa = log_uniform(rng, 1e-4, 1e-2, n)
        kappa[rng.random(n) < 0.3] = 0.0
        if not kappa.any():
            kappa[0] = 1e-3
        temps = [float(t) if k > 0 else None for k, t in zip(kappa, log_uniform(rng, 1, 20, n))]
        spec = random_spec(rng, n, angles=angles, kappa=kappa, temps=temps)
        q = solve_chain(spec, "uniform").currents
        worst = max(worst, abs(q.sum()) / max(1.0, np.abs(q).max()))
    print(f"max |sum Q| {worst:.2e}")
    assert worst <= 1e-12


@pytest.mark.criterion(4, "rank(M) = 2^N - 1, 100 all-dissipative specs")
def test_rate_matrix_rank():
    rng = np.random.default_rng(104)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        spec = random_spec(rng, n)
        sol = solve_chain(spec)
        s = linalg.svdvals(sol.rate_matrix.matrix)
        nullity = int(np.sum(s <= 1e-10 * s[0]))
        assert nullity == 1, (spec, s[-3:])
        assert np.linalg.matrix_rank(sol.rate_matrix.matrix, tol=1e-10 * s[0]) == 2 ** n - 1


@pytest.mark.criterion(5, "LF splitting around a non-dissipative bulk spin, shifts of +-J")
def test_longitudinal_splitting():
    rng = np.random.default_rng(105)
    for _ in range(10):
        kappa = log_uniform(rng, 1e-4, 1e-2, 5)
        kappa[2] = 0.0
        temps = [float(t) for t in log_uniform(rng, 1, 20, 5)]
        temps[2] = None
        spec = random_spec(rng, 5, angles=0.0, kappa=kappa, temps=temps)
        sol = solve_chain(spec, "uniform")
        decomp = sol.decomposition
        assert len(decomp) == 2
        assert decomp.labels == ("3g", "3e")
        b, j = spec.field_magnitude, spec.coupling
        ch = sol.channels
        for label, comp in zip(decomp.labels, decomp.components):
            s3 = 1.0 if label == "3e" else -1.0
            inside = np.isin(ch.lower, comp)
            for mu, shifted in ((2, b[1] + s3 * j[1]), (4, b[3] + s3 * j[2])):
                other = j[0] if mu == 2 else j[3]
                w = np.sort(ch.omega[inside & (ch.mu == mu)])
                got = w[np.r_[True, np.diff(w) > 1e-9]]
                # the frozen spin moves the baseline pair B +- J_other by +-J
                expect = np.sort([shifted - other, shifted + other])
                assert got.size == 2
                assert np.abs(got - expect).max() <= 1e-12


@pytest.mark.criterion(6, "TF splitting into two halves, masses conserved")
def test_transverse_splitting():
    rng = np.random.default_rng(106)
    for n in range(2, 7):
        patterns = [np.full(n, 1e-3), np.r_[1e-3, np.zeros(n - 2), 2e-3] if n > 2 else
                    np.array([1e-3, 0.0]), log_uniform(rng, 1e-4, 1e-2, n)]
        for kappa in patterns:
            temps = [float(t) if k > 0 else None for k, t in zip(kappa, log_uniform(rng, 1, 20, n))]
            spec = random_spec(rng, n, angles=math.pi / 2, kappa=kappa, temps=temps)
            sol = solve_chain(spec, "uniform")
            comps = sol.decomposition.components
            assert len(comps) == 2
            assert all(len(c) == 2 ** (n - 1) for c in comps)
            p0 = rng.random(2 ** n)
            p0 /= p0.sum()
            m0 = sol.decomposition.masses(p0)
            tau = 1.0 / slowest_rate(sol.rate_matrix)
            traj = evolve_populations(sol.rate_matrix, p0, np.array([0.1, 1.0, 10.0, 50.0]) * tau)
            for p in traj:
                assert np.abs(sol.decomposition.masses(p) - m0).max() <= 1e-10


@pytest.mark.criterion(7, "frozen middle spin blocks the current for LLL, LLT, TLL, TLT")
def test_table_one_blocking():
    rng = np.random.default_rng(107)
    for tag in ("LLL", "LLT", "TLL", "TLT"):
        spec = random_spec(rng, 3, angles=oracle.model_angles(tag),
                           kappa=[2e-3, 0.0, 1e-3], temps=[9.0, None, 4.0])
        for middle in "ge":
            sol = solve_chain(spec, {2: middle})
            assert np.abs(sol.currents).max() <= 1e-12
            bx, bz = spec.bx, spec.bz
            s = 1.0 if middle == "e" else -1.0
            j12, j23 = spec.coupling
            rho1 = oracle.thermal_bloch(bx[0], bz[0] + s * j12, 9.0)
            rho3 = oracle.thermal_bloch(bx[2], bz[2] + s * j23, 4.0)
            frozen = np.diag([1.0, 0.0] if middle == "e" else [0.0, 1.0])
            expect = np.kron(np.kron(rho1, frozen), rho3)
            rho = sol.eigensystem.populations_to_bare(sol.populations)
            assert np.abs(rho - expect).max() <= 1e-12, (tag, middle)


@pytest.mark.criterion(8, "modulator: blocked at theta=0, conducting at pi/2, Q1 = -Q3")
def test_modulator():
    base = modulator_spec()
    table = run_modulator(ModulatorScenario.named("s2", 25), base)
    q = table.currents
    kappa_b = max(base.dissipation_rate) * max(base.field_magnitude)
    assert table.grid.size == 25
    assert abs(q[0, 0]) <= 1e-12 * kappa_b
    assert q[-1, 0] > 0
    assert np.abs(q[:, 0] + q[:, 2]).max() <= 1e-12
    assert np.all(q[:, 1] == 0)
    equal = modulator_spec(magnitudes=(5.0, 5.0, 5.0))
    table = run_modulator(ModulatorScenario.named("s2", 25), equal)
    assert np.all(np.isfinite(table.currents))


def _seven_spin(rng, symmetric=False):
    if symmetric:
        b, j = float(log_uniform(rng, 2, 10)), float(log_uniform(rng, 0.05, 0.5))
        tb = float(log_uniform(rng, 1, 20))
        temps = [float(log_uniform(rng, 1, 20))] + [tb] * 5 + [float(log_uniform(rng, 1, 20))]
        kappa = [1e-3, 1e-3, 0, 1e-3, 1e-3, 0, 1e-3]
        return ChainSpec(7, b, 0.0, j, kappa, temps)
    while True:
        b = log_uniform(rng, 1, 10, 7)
        j = log_uniform(rng, 0.05, 1, 6)
        if b.min() > 2 * j.max():
            break
    kappa = log_uniform(rng, 1e-4, 1e-2, 7)
    kappa[2] = kappa[5] = 0.0
    return ChainSpec(7, b, 0.0, j, kappa, log_uniform(rng, 1, 20, 7))


@pytest.mark.criterion(9, "seven-spin decomposition against composed two-spin forms")
def test_seven_spin_decomposition():
    rng = np.random.default_rng(109)
    labels = ("3g6g", "3g6e", "3e6g", "3e6e")
    for _ in range(5):
        spec = _seven_spin(rng)
        for label in labels:
            sol = solve_chain(spec, {3: label[1], 6: label[3]})
            assert len(sol.decomposition) == 4
            assert sorted(sol.decomposition.labels) == sorted(labels)
            ref = oracle.seven_spin_subchain_currents(spec, label)
            dev = np.abs(sol.currents - ref.currents).max() / np.abs(ref.currents).max()
            assert dev <= 1e-9, (label, dev)
    spec = _seven_spin(rng, symmetric=True)
    q = {lab: solve_chain(spec, {3: lab[1], 6: lab[3]}).currents for lab in labels}
    for lab in ("3g6g", "3e6e"):
        assert abs(oracle.seven_spin_subchain_currents(spec, lab).gamma45) <= 1e-15
        assert np.abs(q[lab][3:5]).max() <= 1e-12
    assert abs(q["3g6e"][3] + q["3e6g"][3]) <= 1e-12


@pytest.mark.criterion(10, "superoperator cross-check, N=3, 20 tilted specs")
def test_liouvillian_cross_check():
    rng = np.random.default_rng(110)
    done = 0
    while done < 20:
        spec = random_spec(rng, 3, angles=rng.uniform(0.1, 1.4, 3))
        sol = solve_chain(spec)
        lam = sol.eigensystem.eigenvalues
        w = np.abs(lam[:, None] - lam[None, :])[np.triu_indices(lam.size, 1)]
        gaps = np.diff(np.sort(w))
        if gaps.min() <= 1e-6 * w.max():
            continue  # keep transition spectra non-degenerate
        sop = build_liouvillian(spec, sol.eigensystem, sol.channels)
        rho, zeros = steady_density(sop)
        assert zeros == 1
        assert np.abs(np.diag(rho).real - sol.populations).max() <= 1e-9
        report = coherence_decay_check(sop)
        assert report.status == "decays", report
        done += 1


@pytest.mark.criterion(11, "Gibbs state and zero currents at a common temperature")
def test_gibbs_detailed_balance():
    rng = np.random.default_rng(111)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        t = float(log_uniform(rng, 1, 20))
        spec = random_spec(rng, n, temps=t)
        sol = solve_chain(spec)
        lam = sol.eigensystem.eigenvalues
        w = np.exp(-(lam - lam.min()) / t)
        gibbs = w / w.sum()
        assert np.abs(sol.populations / gibbs - 1).max() <= 1e-8
        scale = max(spec.dissipation_rate) * max(spec.field_magnitude)
        assert np.abs(sol.currents).max() <= 1e-12 * scale


@pytest.mark.criterion(12, "seven-spin sign patterns against the bulk temperature")
def test_bulk_temperature_signs():
    base = bulk_chain_spec(7)
    q = {tb: solve_chain(bulk_spec(base, tb, 1e-3)).currents for tb in (10.0, 5.0, 2.0)}
    assert q[10.0][-1] < 0 and np.all(q[10.0][:-1] >= 0)
    assert q[5.0][0] > 0 and np.all(q[5.0][1:] <= 0)
    assert q[2.0][0] > 0 and q[2.0][-1] > 0 and np.all(q[2.0][1:-1] < 0)
    for tb in (10.0, 5.0, 2.0):
        qb = solve_chain(bulk_spec(base, tb, 0.0), "uniform").currents
        assert np.all(qb[1:-1] == 0.0)
        assert abs(qb[0] + qb[-1]) <= 1e-12 * abs(qb[0])
