"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""

import json
import math
import time

import numpy as np
import pytest
import scipy.linalg

from chargetomo import control, process, tomography
from chargetomo.cli import main
from chargetomo.control import compose, sequence
from chargetomo.device import reference_parameters, timings
from chargetomo.measurement import probability
from chargetomo.qmath import pauli_matrix, phase_aligned_deviation, random_density_matrix, trace_distance
from chargetomo.states import rho_prime


def within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


def test_criterion_1_timing(criterion):
    reference = {1: (0.059, 0.071, 0.03), 2: (0.023, 0.030, 0.05), 3: (0.019, 0.026, 0.05)}
    ok, parts = True, []
    for which, (t_x, t_y, rel) in reference.items():
        t = timings(reference_parameters(which, 1))
        good = within(t.t_x, t_x, rel) and within(t.t_y_total, t_y, rel)
        ok &= good
        parts.append(f"set{which}: t_x={t.t_x * 1e3:.2f} ps t_y={t.t_y_total * 1e3:.2f} ps")
    criterion(1, ok, "; ".join(parts))
    assert ok


def test_criterion_2_tau(criterion, tmp_path):
    assert main(["timing", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "timing.json").read_text())
    tau_ok = within(rep["tau_ns"], 0.232, 0.02)
    alt_ok = within(rep["tau_alternative_ns"], 0.116, 0.02) and bool(rep["tau_convention"])
    max_ok = rep["max_two_qubit_duration_ns"] < 0.4
    ok = tau_ok and alt_ok and max_ok
    criterion(2, ok, f"tau={rep['tau_ns']:.4f} ns, alternative={rep['tau_alternative_ns']:.4f} ns, "
                     f"max schedule={rep['max_two_qubit_duration_ns']:.4f} ns")
    assert ok


def test_criterion_3_gate_identities(criterion):
    start = time.perf_counter()
    p = reference_parameters(1, 2)
    dev_tau = phase_aligned_deviation(compose(p, sequence(p, "U(t)")), control.u_tau_closed_form())
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        e_j, e_int, t = rng.uniform(0.1, 10), rng.uniform(0.1, 10) * rng.choice([-1, 1]), rng.uniform(0, 2)
        h = -0.5 * e_j * (pauli_matrix("x0") + pauli_matrix("0x")) - e_int * pauli_matrix("yy")
        numeric = scipy.linalg.expm(-2j * math.pi * t * h)
        worst = max(worst, float(np.max(np.abs(control.u_closed_form(e_j, e_int, t) - numeric))))
    elapsed = time.perf_counter() - start
    ok = dev_tau < 1e-10 and worst < 1e-10 and elapsed < 1.0
    criterion(3, ok, f"U(tau) deviation {dev_tau:.1e}, closed form vs expm {worst:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_4_tables(criterion):
    start = time.perf_counter()
    report = control.verify_tables(reference_parameters(1, 2))
    elapsed = time.perf_counter() - start
    failures = report.failures()
    ok = report.passed and elapsed < 1.0
    detail = f"{18 - len(failures)}/18 rows hold to 1e-10, convention={report.convention}, {elapsed:.2f} s"
    if failures:
        detail += "; failing: " + ", ".join(
            f"{r.row.table}.{r.row.index} {r.row.label} (dev {min(r.deviation, r.reversed_deviation):.2f})"
            for r in failures)
    criterion(4, ok, detail)
    assert ok, detail


def test_criterion_5_round_trip(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = {}
    for n in (1, 2, 3):
        schedule = tomography.schedule_for(n)
        worst[n] = 0.0
        for _ in range(1000):
            rho = random_density_matrix(n, rng)
            res = tomography.reconstruct(schedule, tomography.simulate_records(schedule, rho), project=False)
            worst[n] = max(worst[n], trace_distance(res.raw_rho, rho))
    s1, s2 = tomography.schedule_2q("qubit1"), tomography.schedule_2q("qubit2")
    route = 0.0
    for _ in range(1000):
        rho = random_density_matrix(2, rng)
        a = tomography.reconstruct(s1, tomography.simulate_records(s1, rho), project=False)
        b = tomography.reconstruct(s2, tomography.simulate_records(s2, rho), project=False)
        route = max(route, trace_distance(a.raw_rho, b.raw_rho))
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-9 and route < 1e-10 and elapsed < 30
    criterion(5, ok, ", ".join(f"n={n}: {w:.1e}" for n, w in worst.items())
              + f", routes {route:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_6_shot_scaling(criterion):
    start = time.perf_counter()
    rho = random_density_matrix(2, np.random.default_rng(6))
    schedule = tomography.schedule_2q()
    medians = {}
    for shots in (10_000, 40_000):
        dists = []
        for seed in range(100):
            recs = tomography.simulate_records(schedule, rho, shots, seed)
            dists.append(trace_distance(tomography.reconstruct(schedule, recs, project=False).raw_rho, rho))
        medians[shots] = float(np.median(dists))
    ratio = medians[10_000] / medians[40_000]
    elapsed = time.perf_counter() - start
    ok = 1.6 <= ratio <= 2.4 and elapsed < 120
    criterion(6, ok, f"median {medians[10_000]:.2e} -> {medians[40_000]:.2e}, ratio {ratio:.2f}, {elapsed:.1f} s")
    assert ok


def test_criterion_7_three_qubit(criterion):
    p = reference_parameters(1, 3)
    w = sequence(p, "U13(t)Z1U12(t)")
    u = compose(p, w)
    p1 = (np.eye(8) - pauli_matrix("z00")) / 2
    effective = u.conj().T @ p1 @ u
    P = pauli_matrix
    identity = 0.5 * np.eye(8) - 0.25 * (P("z00") + P("xy0") + P("y0y") - P("xzy"))
    ident_dev = float(np.max(np.abs(effective - identity)))
    frag = tomography.schedule_3q_coefficient("xzy", ["z00", "xy0", "y0y"], p)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        rho = random_density_matrix(3, rng)
        r = {k: np.trace(rho @ P(k)).real for k in ("z00", "xy0", "y0y", "xzy")}
        p2 = probability(p, rho, frag.setting)
        recovered = 4 * (p2 - 0.5) + r["z00"] + r["xy0"] + r["y0y"]
        worst = max(worst, abs(recovered - r["xzy"]))
    ok = ident_dev < 1e-10 and worst < 1e-9
    criterion(7, ok, f"identity deviation {ident_dev:.1e}, r_xzy recovery {worst:.1e}")
    assert ok


def _bisection_projection(raw):
    evals, evecs = np.linalg.eigh((raw + raw.conj().T) / 2)
    lo, hi = evals.min() - 1.0, evals.max()
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if np.maximum(evals - mid, 0).sum() > 1 else (lo, mid)
    lam = np.maximum(evals - (lo + hi) / 2, 0)
    return (evecs * lam) @ evecs.conj().T


def test_criterion_8_projection(criterion):
    rng = np.random.default_rng(8)
    idem = 0.0
    min_eig = 1.0
    for n in (1, 2, 3):
        for _ in range(100):
            rho = random_density_matrix(n, rng)
            out = tomography.project_physical(rho)
            idem = max(idem, float(np.max(np.abs(out - rho))))
            min_eig = min(min_eig, float(np.linalg.eigvalsh(out)[0]))
    oracle = 0.0
    for raw in (rho_prime(), np.diag([1.2, -0.2]).astype(complex)):
        out = tomography.project_physical(raw)
        oracle = max(oracle, float(np.max(np.abs(out - _bisection_projection(raw)))))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(out)[0]))
    for _ in range(200):
        n = int(rng.integers(1, 4))
        h = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
        h = (h + h.conj().T) / 2
        raw = h - (np.trace(h) - 1) / 2**n * np.eye(2**n)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(tomography.project_physical(raw))[0]))
    ok = idem < 1e-12 and oracle < 1e-10 and min_eig >= -1e-12
    criterion(8, ok, f"idempotence {idem:.1e}, oracle deviation {oracle:.1e}, min eigenvalue {min_eig:.1e}")
    assert ok


def _choi_chi(kraus):
    j = sum(np.outer(k.ravel(), k.ravel().conj()) for k in kraus)
    v = [b.ravel() for b in process.CHI_BASIS]
    return np.array([[v[m].conj() @ j @ v[n] for n in range(4)] for m in range(4)]) / 4


def test_criterion_9_process(criterion):
    channels = [process.standard_channel("identity"), process.standard_channel("bit_flip", 0.2),
                process.standard_channel("dephasing", 0.6), process.standard_channel("amplitude_damping", 0.3)]
    exact, sampled = 0.0, 0.0
    for c in channels:
        oracle = _choi_chi(c.kraus_ops)
        exact = max(exact, float(np.max(np.abs(process.process_tomography(c).entries - oracle))))
        chi = process.process_tomography(c, shots=100_000, seed=99)
        sampled = max(sampled, float(np.max(np.abs(chi.entries - oracle))))
    ok = exact < 1e-9 and sampled < 0.02
    criterion(9, ok, f"exact {exact:.1e}, sampled (1e5 shots) {sampled:.4f}")
    assert ok


CLI_CASES = [
    ("timing", "device.parameter_set = 2\n"),
    ("verify-tables", ""),
    ("simulate", "device.n_qubits = 3\nstate.preset = random\nshots = 2000\nseed = 5\n"),
    ("tomo-state", "device.n_qubits = 2\nstate.preset = random\nshots = 10000\nseed = 17\n"),
    ("tomo-process", "channel.kind = amplitude_damping\nchannel.param = 0.3\nshots = 5000\nseed = 1\n"),
]


def test_criterion_10_determinism(criterion, tmp_path):
    mismatched = []
    nfiles = 0
    for task, config in CLI_CASES:
        cfg = tmp_path / f"{task}.cfg"
        cfg.write_text(config)
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / rep / task
            code = main([task, "--config", str(cfg), "--out", str(out)])
            assert code in (0, 2)
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        if names != sorted(p.name for p in outs[1].iterdir()):
            mismatched.append(task)
            continue
        for name in names:
            nfiles += 1
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                mismatched.append(f"{task}/{name}")
    ok = not mismatched
    criterion(10, ok, f"{nfiles} files over {len(CLI_CASES)} tasks" + (f", differing: {mismatched}" if mismatched else ""))
    assert ok
