"""Acceptance criteria 1-8, each at its stated tolerance and time budget.

Every test prints one ``PASS``/``FAIL`` line (outside pytest's capture) with
the measured numbers, then asserts.
"""

import time

import numpy as np
import pytest

from conftest import loglog_slope, random_hermitian
from protective_lab import qcore
from protective_lab.apparatus import ApparatusSpec
from protective_lab.presets import commuting_qubit, default_qubit, strong_readout_qubit
from protective_lab.protective import (VALIDITY_GATE, ProtectiveSetup, SystemSpec, analyze,
                                       assemble_hamiltonian, dyadic_times,
                                       energy_branch_populations, evolve_exact, initial_state,
                                       perturbative_expansion)
from protective_lab.readout import derive_seed, monte_carlo, run_trial
from protective_lab.reconstruct import bloch_of, protective_tomography, reconstruct_density
from protective_lab.scaling import (AGE_OF_UNIVERSE_S, observable_count, per_measurement_time,
                                    scaling_report)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, budget):
        ok = ok and elapsed <= budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail} "
                  f"({elapsed:.2f} s / {budget:g} s)")
        return ok
    return emit


def test_criterion_1_pointer_shift_law(report):
    t0 = time.perf_counter()
    Ts = dyadic_times(3, 10)
    reps = [analyze(default_qubit(T)) for T in Ts]
    errs = [abs(r.pointer_shift - r.expectation_target) for r in reps]
    slope = loglog_slope(Ts, errs)
    elapsed = time.perf_counter() - t0
    ok = slope <= -0.9 and errs[-1] <= 1e-2
    assert report(1, ok, f"slope {slope:.3f} <= -0.9, error at T={Ts[-1]:g} is {errs[-1]:.2e}",
                  elapsed, 10)


def test_criterion_2_disturbance_exponent(report):
    t0 = time.perf_counter()
    Ts = dyadic_times(3, 14)
    reps = [analyze(default_qubit(T)) for T in Ts]
    gated = [(r.T, r.disturbance_prob) for r in reps if r.validity_indicator < VALIDITY_GATE]
    xs, ys = zip(*gated)
    slope = loglog_slope(xs, ys)
    decades = np.log10(max(xs) / min(xs))
    elapsed = time.perf_counter() - t0
    ok = abs(slope + 2.0) <= 0.1 and decades >= 2
    assert report(2, ok, f"slope {slope:.4f} over {decades:.2f} decades "
                         f"({len(xs)} gated points)", elapsed, 30)


def test_criterion_3_perturbative_equivalence(report):
    t0 = time.perf_counter()
    Ts = dyadic_times(6, 14)
    first = [analyze(default_qubit(T)).pert_error for T in Ts]
    second = [analyze(default_qubit(T, second_order_phase=True)).pert_error for T in Ts]
    s1, s2 = loglog_slope(Ts, first), loglog_slope(Ts, second)
    rel = []
    for T in Ts[-2:]:
        setup = default_qubit(T)
        pert = perturbative_expansion(setup).branch_populations
        exact = energy_branch_populations(setup, evolve_exact(setup))
        m = [k for k in range(len(pert)) if k != setup.system.n_index]
        rel.append(max(abs(pert[k] - exact[k]) / exact[k] for k in m))
    elapsed = time.perf_counter() - t0
    ok = s1 <= -0.9 and s2 <= -1.8 and max(rel) <= 0.1
    assert report(3, ok, f"slopes {s1:.3f} (first order), {s2:.3f} (second-order phase); "
                         f"population rel. error {max(rel):.2e}", elapsed, 30)


def test_criterion_4_commuting_case(report):
    t0 = time.perf_counter()
    worst_d = worst_s = 0.0
    for T in dyadic_times(0, 12):
        rep = analyze(commuting_qubit(T))
        worst_d = max(worst_d, rep.disturbance_prob)
        worst_s = max(worst_s, rep.entropy_bits)
    setup = commuting_qubit(100.0)
    back = all(run_trial(setup, derive_seed(0, i)).projected_back for i in range(50))
    ensemble = monte_carlo(setup, 2000, base_seed=4)
    back = back and ensemble.n_disturbed == 0
    elapsed = time.perf_counter() - t0
    ok = worst_d <= 1e-12 and worst_s <= 1e-12 and back
    assert report(4, ok, f"max disturbance {worst_d:.1e}, max entropy {worst_s:.1e}, "
                         f"50 single trials + 2000-trial ensemble all projected back: {back}",
                  elapsed, 5)


def test_criterion_5_monte_carlo(report):
    t0 = time.perf_counter()
    stats = [monte_carlo(strong_readout_qubit(T), 10_000, base_seed=1) for T in (6.43, 12.86)]
    z = [abs(s.freq_disturbed - s.disturbance_prob) / s.summary()["binomial_stderr"] for s in stats]
    ratio = stats[0].freq_disturbed / stats[1].freq_disturbed
    elapsed = time.perf_counter() - t0
    ok = max(z) <= 3 and 3 <= ratio <= 5.3
    assert report(5, ok, f"freq {stats[0].freq_disturbed:.4f} vs {stats[0].disturbance_prob:.4f}, "
                         f"{stats[1].freq_disturbed:.4f} vs {stats[1].disturbance_prob:.4f} "
                         f"(max {max(z):.2f} SE); ratio {ratio:.2f}", elapsed, 60)


def test_criterion_6_tomography(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        v = rng.normal(size=3)
        v = v / np.linalg.norm(v) * rng.random() ** (1 / 3)
        worst = max(worst, np.max(np.abs(bloch_of(reconstruct_density(v)).as_array() - v)))
    T_top = dyadic_times(7, 12)[-1]
    fids = [protective_tomography(psi, 1.0, T_top).fidelity_true
            for psi in ([1, 0], [2**-0.5, 2**-0.5])]
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and min(fids) >= 0.999
    assert report(6, ok, f"round trip error {worst:.1e}; fidelities |0> {fids[0]:.6f}, "
                         f"|+> {fids[1]:.6f} at T={T_top:g}", elapsed, 60)


def test_criterion_7_scaling(report):
    t0 = time.perf_counter()
    c1, c2 = observable_count(1), observable_count(2)
    t_per = per_measurement_time(10 * 3600.0, 656100)
    rep = scaling_report(100, 1e-5, assume_pure=True)
    elapsed = time.perf_counter() - t0
    ok = (c1 == 3 and c2 == 15 and abs(t_per - 0.0549) < 5e-5
          and rep.total_seconds / AGE_OF_UNIVERSE_S >= 1e7 and rep.orders_of_magnitude >= 7)
    assert report(7, ok, f"counts {c1}, {c2}; {t_per:.4f} s per measurement; "
                         f"100-qubit budget {rep.orders_of_magnitude:.2f} orders past the age",
                  elapsed, 1)


def test_criterion_8_numerics_hygiene(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst_u = worst_n = worst_e = 0.0
    for _ in range(1000):
        d_S = int(rng.integers(2, 4))
        d_A = int(rng.choice([16, 24, 32]))
        H_S = random_hermitian(rng, d_S)
        O = random_hermitian(rng, d_S)
        T = float(rng.uniform(0.5, 50.0))
        system = SystemSpec(H_S, O, n_index=int(rng.integers(d_S)), gap_min=0.0)
        spec = ApparatusSpec(d_A=d_A, p_max=float(rng.uniform(4.0, 6.0)), sigma=1.0,
                             mass_inv=float(rng.uniform(0.0, 0.1)))
        setup = ProtectiveSetup(system, spec, T=T)
        H = assemble_hamiltonian(setup)
        eig = qcore.eigh(H)
        U = qcore.propagator(H, T)
        worst_u = max(worst_u, np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
        psi0 = initial_state(setup).amplitudes
        psi = qcore.apply_propagator(eig, T, psi0)
        worst_n = max(worst_n, abs(np.linalg.norm(psi) - 1.0))
        e0 = np.vdot(psi0, H.matrix @ psi0).real
        e1 = np.vdot(psi, H.matrix @ psi).real
        worst_e = max(worst_e, abs(e1 - e0) / max(1.0, abs(e0)))
    elapsed = time.perf_counter() - t0
    ok = worst_u <= 1e-10 and worst_n <= 1e-10 and worst_e <= 1e-10
    assert report(8, ok, f"unitarity {worst_u:.1e}, norm {worst_n:.1e}, "
                         f"energy drift {worst_e:.1e} over 1000 instances", elapsed, 60)
