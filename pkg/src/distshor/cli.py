"""Command-line entry point: ``distshor {factor,order,plan,dist}``.

Every command prints a short summary and can write a JSON report with
``--json-out``. Exit codes: 0 success, 1 config/plan error, 2 attempts
exhausted, 3 resource cap.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .combine import within_theorem_bound
from .distsim import (
    CommLedger,
    comm_cost,
    make_plan,
    plan_from_bits,
    anchor_mass,
    qubit_budget,
    run_trials,
    statevector_joint_distribution,
)
from .errors import AttemptsExhausted, OracleCapExceeded, OrderNotFound, PlanError, QubitCapExceeded
from .numtheory import order_bruteforce, recover_order, shor_factor
from .phasedist import JOINT_MAX_CELLS, joint_distribution
from .statevector import default_cap

EXIT_OK, EXIT_CONFIG, EXIT_EXHAUSTED, EXIT_CAP = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _boundaries(text: str | None):
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad boundary list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distshor", description="Distributed order finding simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_n=True):
        if needs_n:
            p.add_argument("--n", type=int, required=True, help="modulus / number to factor")
        p.add_argument("--k", type=int, default=1, help="number of nodes")
        p.add_argument("--epsilon", type=float, default=0.1, help="target failure bound")
        p.add_argument("--boundaries", type=_boundaries, default=None, help="custom l_1,...,l_k (comma separated)")
        p.add_argument("--b", type=int, default=0, help="ancilla qubits of the multiplier, for reports")
        p.add_argument("--qubit-cap", type=int, default=None, help="dense simulator cap (env DISTSHOR_QUBIT_CAP)")
        p.add_argument("--json-out", default=None, help="write the JSON report here")

    def running(p):
        p.add_argument("--backend", choices=("analytic", "statevector"), default="analytic")
        p.add_argument("--seed", type=int, default=None, help="root seed (random if omitted, recorded in report)")
        p.add_argument("--strict", action="store_true", help="statevector: keep every node register live")
        p.add_argument("--lambda-max", type=int, default=64)
        p.add_argument("--max-outcomes", type=int, default=100, help="cap on per-run entries in the report")

    p = sub.add_parser("factor", help="factor N with distributed order finding")
    common(p)
    running(p)
    p.add_argument("--max-attempts", type=int, default=25)

    p = sub.add_parser("order", help="repeat order finding for fixed (N, a)")
    common(p)
    running(p)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)

    p = sub.add_parser("plan", help="node sizing, qubit budget and communication cost")
    common(p, needs_n=False)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-bits", type=int, default=None, help="bit length L (instead of --n)")

    p = sub.add_parser("dist", help="dump the exact joint outcome distribution")
    common(p)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--marginals", action="store_true", help="per-node marginals instead of the joint law")
    p.add_argument("--no-statevector", action="store_true", help="skip the dense cross-check")
    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "json_out"}
    cfg["qubit_cap"] = default_cap() if args.qubit_cap is None else args.qubit_cap
    cfg["rng"] = "numpy.PCG64"
    return cfg


def _validate(args) -> None:
    if args.k < 1:
        raise ConfigError("--k must be at least 1")
    if not 0 < args.epsilon < 1:
        raise ConfigError("--epsilon must lie in (0, 1)")
    if args.b < 0:
        raise ConfigError("--b must be nonnegative")
    for name in ("trials", "max_attempts", "lambda_max"):
        if getattr(args, name, 1) < 1:
            raise ConfigError(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "n", None) is not None and args.n < 3:
        raise ConfigError("--n must be at least 3")


def _report(args, **fields) -> dict:
    base = {
        "config": _config(args),
        "plan": None,
        "ledger": None,
        "outcomes": [],
        "order": None,
        "factors": None,
        "stats": None,
    }
    base.update(fields)
    return base


def _emit(args, report: dict) -> None:
    report = dict(report)
    report["timestamp"] = datetime.now(timezone.utc).isoformat()
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _seed(args) -> int:
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % (1 << 63))
    return args.seed


def _ledger_sum(ledgers) -> dict:
    total = CommLedger()
    for led in ledgers:
        total.epr_pairs += led.epr_pairs
        total.classical_bits += led.classical_bits
        total.teleport_events += led.teleport_events
    d = total.to_json()
    d.pop("node_qubits")
    return d


def cmd_factor(args) -> int:
    # size the plan up front so k/L mismatches fail before any random draw
    plan_from_bits(args.n.bit_length(), args.k, args.epsilon, boundaries=args.boundaries)
    rng = np.random.default_rng(_seed(args))
    try:
        rep = shor_factor(
            args.n, args.k, args.epsilon, args.backend, rng, args.max_attempts,
            lambda_max=args.lambda_max, boundaries=args.boundaries, cap=args.qubit_cap, strict=args.strict,
        )
        code = EXIT_OK
    except AttemptsExhausted as exc:
        rep = exc.report
        code = EXIT_EXHAUSTED
    plan = rep.plans[-1].to_json() if rep.plans else None
    recovered = [r for r in rep.orders if r is not None]
    report = _report(
        args,
        plan=plan,
        ledger=_ledger_sum(run.ledger for run in rep.runs),
        outcomes=[run.to_json() for run in rep.runs[: args.max_outcomes]],
        order=recovered[-1] if recovered else None,
        factors=list(rep.factors) if rep.factors else None,
        stats={"trials": rep.attempts, "success_rate": 1.0 if rep.factors else 0.0},
        method=rep.method,
        a_tried=rep.a_tried,
    )
    _emit(args, report)
    if rep.factors:
        f, g = rep.factors
        print(f"{args.n} = {f} x {g}  ({rep.method}, {rep.attempts} attempt(s))")
    else:
        print(f"no factor of {args.n} after {rep.attempts} attempts", file=sys.stderr)
    return code


def cmd_order(args) -> int:
    plan = make_plan(args.n, args.a, args.k, args.epsilon, args.boundaries)
    r = order_bruteforce(args.n, args.a)
    runs = run_trials(plan, args.trials, _seed(args), args.backend, cap=args.qubit_cap, strict=args.strict)
    hits = recovered = 0
    found = Counter()
    for run in runs:
        if run.m is None:
            continue
        hits += within_theorem_bound(run.m, plan, r)
        try:
            got = recover_order(run.m, plan, args.n, args.a, args.lambda_max).r
        except OrderNotFound:
            continue
        found[got] += 1
        recovered += got == r
    n = len(runs)
    stats = {
        "trials": n,
        "success_rate": hits / n,
        "recovered_rate": recovered / n,
        "combine_failures": sum(run.m is None for run in runs),
        "true_order": r,
    }
    report = _report(
        args,
        plan=plan.to_json(),
        ledger=_ledger_sum(run.ledger for run in runs),
        outcomes=[run.to_json() for run in runs[: args.max_outcomes]],
        order=found.most_common(1)[0][0] if found else None,
        stats=stats,
    )
    _emit(args, report)
    print(f"order of {args.a} mod {args.n}: r={r}; theorem-event rate {stats['success_rate']:.4f}, "
          f"recovered {stats['recovered_rate']:.4f} over {n} trial(s)")
    return EXIT_OK


def cmd_plan(args) -> int:
    if args.n_bits is None and args.n is None:
        raise ConfigError("plan needs --n or --n-bits")
    L = args.n_bits if args.n_bits is not None else args.n.bit_length()
    if L < 1:
        raise ConfigError("--n-bits must be positive")
    plan = plan_from_bits(L, args.k, args.epsilon, boundaries=args.boundaries)
    budget = qubit_budget(plan, args.b)
    cost = comm_cost(plan)
    ledger = cost.to_json()
    ledger.pop("node_qubits")
    report = _report(args, plan=plan.to_json(), ledger=ledger, budget=budget)
    _emit(args, report)
    print(f"L={L} k={args.k} p={plan.p} l={list(plan.l)} t={list(plan.t)} w={list(plan.w)}")
    print(f"node qubits {budget['node_totals']} vs baseline {budget['baseline']}; "
          f"headline saving {budget['headline_reduction']:g}")
    print(f"communication: {cost.epr_pairs} EPR pairs, {cost.classical_bits} classical bits, "
          f"{cost.teleport_events} teleport(s)")
    if plan.custom_boundaries:
        print("note: custom boundaries (extension beyond the equal split)")
    return EXIT_OK


def cmd_dist(args) -> int:
    plan = make_plan(args.n, args.a, args.k, args.epsilon, args.boundaries)
    r = order_bruteforce(args.n, args.a)
    cap = default_cap() if args.qubit_cap is None else args.qubit_cap
    if (1 << sum(plan.w)) > JOINT_MAX_CELLS and not args.marginals:
        raise QubitCapExceeded(f"joint distribution of {sum(plan.w)} bits is too large; try --marginals")
    from .phasedist import node_mixture

    sv_joint = None
    if not args.no_statevector and sum(plan.t) + plan.L <= cap:
        sv_joint = statevector_joint_distribution(plan, cap=cap, strict=True)
    entries = []
    if args.marginals:
        for j in range(plan.k):
            an = node_mixture(plan, r, j)
            svm = None
            if sv_joint is not None:
                svm = sv_joint.sum(axis=tuple(i for i in range(plan.k) if i != j))
            for v, prob in enumerate(an):
                entries.append({
                    "node": j + 1,
                    "m": {"bits": format(v, f"0{plan.w[j]}b"), "width": plan.w[j]},
                    "analytic": float(prob),
                    "statevector": None if svm is None else float(svm[v]),
                })
        tv = None if sv_joint is None else 0.5 * float(np.abs(joint_distribution(plan, r) - sv_joint).sum())
    else:
        joint = joint_distribution(plan, r)
        for idx in np.ndindex(joint.shape):
            entries.append({
                "m": [{"bits": format(v, f"0{w}b"), "width": w} for v, w in zip(idx, plan.w)],
                "analytic": float(joint[idx]),
                "statevector": None if sv_joint is None else float(sv_joint[idx]),
            })
        tv = None if sv_joint is None else 0.5 * float(np.abs(joint - sv_joint).sum())
    mass = anchor_mass(plan, r)
    bound = 1 - args.epsilon / args.k
    ledger = comm_cost(plan).to_json()
    ledger.pop("node_qubits")
    report = _report(
        args,
        plan=plan.to_json(),
        ledger=ledger,
        order=r,
        distribution=entries,
        tv_distance=tv,
        total_probability=float(sum(e["analytic"] for e in entries if e.get("node", 1) == 1)),
        anchor={"mass": mass, "bound": bound, "holds": mass >= bound},
    )
    _emit(args, report)
    print(f"{len(entries)} outcome cells; total probability {report['total_probability']:.12f}")
    print("statevector cross-check skipped" if tv is None else f"total variation vs statevector: {tv:.3e}")
    print(f"last-node anchor mass {mass:.6f} (bound {bound:.6f})")
    return EXIT_OK


COMMANDS = {"factor": cmd_factor, "order": cmd_order, "plan": cmd_plan, "dist": cmd_dist}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        return COMMANDS[args.command](args)
    except (QubitCapExceeded, OracleCapExceeded) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, PlanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
