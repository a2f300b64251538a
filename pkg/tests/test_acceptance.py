"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured quantity
and wall time. Run ``pytest tests/test_acceptance.py -v -s`` to see them, or
``python tests/test_acceptance.py`` for the summary alone.
"""
import json
import random
import time
from fractions import Fraction
from math import ceil, log2

import numpy as np
import pytest

from distshor.bitmath import BitString, dt_distance, frac_bits, slice_bits
from distshor.cli import main as cli_main
from distshor.combine import correction_bit, theorem_oracle
from distshor.distsim import (
    comm_cost,
    make_plan,
    plan_from_bits,
    anchor_mass,
    qubit_budget,
    run_distributed,
    run_trials,
    statevector_joint_distribution,
)
from distshor.phasedist import joint_distribution, pe_vector

RESULTS: list[str] = []


def report(number, title, ok, detail, elapsed, limit=None):
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
    ok = ok and (limit is None or elapsed < limit)
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}: {detail}; {timing}"
    RESULTS.append(line)
    print("\n" + line)
    return ok


def test_criterion_1_backend_equivalence():
    start = time.perf_counter()
    plan = make_plan(15, 7, 2, 0.5)
    qubits = sum(plan.t) + plan.L
    sv_joint = statevector_joint_distribution(plan, strict=True)
    tv = 0.5 * float(np.abs(sv_joint - joint_distribution(plan, 4)).sum())
    elapsed = time.perf_counter() - start
    assert qubits == 19
    assert report(1, "strict statevector vs analytic joint law", tv < 1e-6, f"TV={tv:.2e} on {qubits} qubits", elapsed, 60)


def test_criterion_2_theorem_success_rate():
    start = time.perf_counter()
    plan = make_plan(15, 7, 2, 0.1)
    runs = run_trials(plan, 5000, seed=2)
    rate = sum(run.theorem_event() for run in runs) / len(runs)
    elapsed = time.perf_counter() - start
    assert report(2, "theorem event over 5000 analytic trials", rate >= 0.90, f"rate={rate:.4f} (need >= 0.90)", elapsed, 10)


def test_criterion_3_theorem_oracle_grid():
    start = time.perf_counter()
    failures, checked = [], 0
    for L in (4, 6):
        for k in (2, 3):
            if L % k:
                continue
            plan = plan_from_bits(L, k, p=2)
            for r in range(2, 16):
                ok, n = theorem_oracle(plan, r, return_count=True)
                checked += n
                if not ok:
                    failures.append((L, k, r))
    elapsed = time.perf_counter() - start
    assert report(3, "exhaustive theorem oracle grid", not failures,
                  f"{checked} hypothesis tuples checked, failures={failures}", elapsed, 300)


def test_criterion_4_phase_estimation_bounds():
    start = time.perf_counter()
    gen = random.Random(4)
    omegas = []
    for _ in range(50):
        den = gen.randint(1, 100)
        omegas.append(Fraction(gen.randrange(den), den))
    worst = 1.0
    ok = True
    for n in (3, 4):
        for eps in (0.25, 0.1):
            t = n + ceil(log2(2 + 1 / (2 * eps)))
            for omega in omegas:
                probs = pe_vector(t, omega)
                truth_t, truth_n = frac_bits(omega, 1, t), frac_bits(omega, 1, n)
                ball = sum(p for m, p in enumerate(probs) if dt_distance(BitString(t, m), truth_t) < 1 << (t - n))
                trunc = sum(
                    p for m, p in enumerate(probs)
                    if dt_distance(slice_bits(BitString(t, m), 1, n), truth_n) <= 1
                )
                ok &= ball >= 1 - eps and trunc >= 1 - eps
                worst = min(worst, ball - (1 - eps), trunc - (1 - eps))
    elapsed = time.perf_counter() - start
    assert report(4, "ball and truncation bounds, 50 rationals", ok, f"smallest slack {worst:.4f}", elapsed, 30)


def test_criterion_5_last_node_mass():
    start = time.perf_counter()
    rows, ok = [], True
    for a, r in ((7, 4), (4, 2), (2, 4)):
        for eps in (0.5, 0.2):
            mass = anchor_mass(make_plan(15, a, 2, eps), r)
            ok &= mass >= 1 - eps / 2
            rows.append(f"a={a},eps={eps}:{mass:.4f}")
    elapsed = time.perf_counter() - start
    assert report(5, "last-node anchor mass >= 1 - eps/k", ok, ", ".join(rows), elapsed)


def test_criterion_6_correction_uniqueness():
    start = time.perf_counter()
    pairs = bad = 0
    for t in range(3, 7):
        size = 1 << t
        for xv in range(size):
            for yv in range(size):
                x, y = BitString(t, xv), BitString(t, yv)
                if dt_distance(x, y) > 1:
                    continue
                pairs += 1
                valid = [b for b in (-1, 0, 1) if (xv + b) % size == yv]
                try:
                    picked = correction_bit(slice_bits(x, t - 1, t), slice_bits(y, t - 1, t))
                except ValueError:
                    picked = None
                bad += len(valid) != 1 or picked != valid[0]
    elapsed = time.perf_counter() - start
    assert report(6, "unique correction bit from last two bits", bad == 0, f"{pairs} pairs, {bad} counterexamples", elapsed)


def test_criterion_7_end_to_end_factoring(tmp_path, capsys):
    start = time.perf_counter()
    wrong = []
    for n, k, expected in ((15, 2, [3, 5]), (21, 1, [3, 7])):
        for seed in range(10):
            out = tmp_path / f"f{n}_{seed}.json"
            code = cli_main(["factor", "--n", str(n), "--k", str(k), "--epsilon", "0.1",
                             "--seed", str(seed), "--max-attempts", "25", "--json-out", str(out)])
            rep = json.loads(out.read_text())
            if code != 0 or rep["factors"] != expected or rep["stats"]["trials"] > 25:
                wrong.append((n, seed))
    capsys.readouterr()
    elapsed = time.perf_counter() - start
    assert report(7, "factor 15 (k=2) and 21 (k=1), 10 seeds each", not wrong, f"failures={wrong}", elapsed, 30)


def test_criterion_8_resource_formulas():
    start = time.perf_counter()
    big = plan_from_bits(2048, 8, 0.05)
    saving = qubit_budget(big)["headline_reduction"]
    cost = comm_cost(big)
    ledgers_ok = True
    for k, backend in ((1, "analytic"), (2, "analytic"), (2, "statevector")):
        plan = make_plan(15, 7, k, 0.5)
        for seed in range(5):
            run = run_distributed(plan, backend, np.random.default_rng(seed))
            ledgers_ok &= run.ledger.to_json() == comm_cost(plan).to_json()
    plan = plan_from_bits(8, 4, 0.1, N=253, a=2)
    ledgers_ok &= run_distributed(plan, "analytic", np.random.default_rng(0)).ledger.to_json() == comm_cost(plan).to_json()
    ok = saving == 1789 and cost.epr_pairs == 14336 and cost.classical_bits == 28672 and ledgers_ok
    elapsed = time.perf_counter() - start
    assert report(8, "resource formulas and run ledgers", ok,
                  f"saving={saving:g}, epr={cost.epr_pairs}, cbits={cost.classical_bits}, ledgers match={ledgers_ok}",
                  elapsed)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
