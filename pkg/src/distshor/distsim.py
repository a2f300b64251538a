"""Distributed order finding across ``k`` serially chained nodes.

Node ``j`` owns a ``t_j``-qubit control register and estimates bits
``l_j .. l_{j+1}+1`` of some ``s/r``; the ``L``-qubit work register is
teleported from node to node. Two backends share one pipeline: an exact
dense statevector (tiny sizes only) and an analytic sampler that draws ``s``
uniformly and each node's reading from the closed-form marginals.

Boundaries follow ``l_1 = 1``: ``l_j = (j-1) L/k + 1`` and ``l_{k+1} = 2L``,
which makes every width and the ``2L+1+p`` output length line up.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import ceil, gcd, log2
from typing import Sequence

import numpy as np

from . import statevector as sv
from .bitmath import BitString
from .combine import combine_results, within_theorem_bound
from .errors import CorrectionMismatch, PlanError, QubitCapExceeded
from .numtheory import order_bruteforce
from .phasedist import node_phase, pe_sample

log = logging.getLogger(__name__)


def _as_fraction(x) -> Fraction:
    # decimal floats such as 0.1 are meant literally
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def extra_bits(epsilon) -> int:
    """Smallest ``p`` with ``2^p >= 2 + 1/(2 epsilon)``, computed exactly."""
    eps = _as_fraction(epsilon)
    if not 0 < eps < 1:
        raise PlanError(f"epsilon must lie in (0, 1), got {epsilon}")
    target = 2 + 1 / (2 * eps)
    p = 0
    while (1 << p) < target:
        p += 1
    return p


@dataclass(frozen=True)
class NodePlan:
    """All sizing parameters of a ``k``-node run.

    ``l`` holds ``l_1..l_{k+1}``; ``t`` and ``w`` hold the register widths and
    measured widths per node.
    """

    L: int
    k: int
    p: int
    l: tuple[int, ...]
    t: tuple[int, ...]
    w: tuple[int, ...]
    epsilon: float | None = None
    N: int | None = None
    a: int | None = None
    custom_boundaries: bool = False

    @property
    def m_width(self) -> int:
        return 2 * self.L + 1 + self.p

    @property
    def epsilon_node(self) -> float | None:
        return None if self.epsilon is None else self.epsilon / self.k

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "k": self.k,
            "epsilon": self.epsilon,
            "p": self.p,
            "l": list(self.l),
            "t": list(self.t),
            "w": list(self.w),
            "custom_boundaries": self.custom_boundaries,
        }


def plan_from_bits(
    L: int,
    k: int,
    epsilon=None,
    *,
    p: int | None = None,
    boundaries: Sequence[int] | None = None,
    N: int | None = None,
    a: int | None = None,
) -> NodePlan:
    """Plan for an ``L``-bit modulus; give either ``epsilon`` or ``p`` directly."""
    if L < 1 or k < 1:
        raise PlanError(f"need L >= 1 and k >= 1, got L={L}, k={k}")
    if p is None:
        if epsilon is None:
            raise PlanError("either epsilon or p is required")
        if not 0 < _as_fraction(epsilon) < 1:
            raise PlanError(f"epsilon must lie in (0, 1), got {epsilon}")
        p = extra_bits(_as_fraction(epsilon) / k)
    elif p < 0:
        raise PlanError("p must be nonnegative")
    if boundaries is None:
        if L % k:
            raise PlanError(f"k={k} does not divide L={L}; pass custom boundaries")
        starts = [(j - 1) * (L // k) + 1 for j in range(1, k + 1)]
        custom = False
    else:
        starts = list(boundaries)
        if len(starts) == k + 1:
            if starts[-1] != 2 * L:
                raise PlanError(f"last boundary must be 2L={2 * L}")
            starts = starts[:-1]
        if len(starts) != k:
            raise PlanError(f"expected {k} boundaries, got {len(boundaries)}")
        if starts[0] != 1:
            raise PlanError("first boundary must be 1")
        if any(b >= c for b, c in zip(starts, starts[1:])):
            raise PlanError(f"boundaries must be strictly increasing: {starts}")
        if starts[-1] > L:
            raise PlanError(f"last node must start at or before bit L={L}")
        custom = True
    bounds = tuple(starts) + (2 * L,)
    t = tuple(bounds[j + 1] + 2 - bounds[j] + p for j in range(k))
    w = tuple(bounds[j + 1] + 2 - bounds[j] for j in range(k - 1)) + (t[-1],)
    eps = None if epsilon is None else float(epsilon)
    return NodePlan(L, k, p, bounds, t, w, eps, N, a, custom)


def make_plan(N: int, a: int, k: int, epsilon, boundaries: Sequence[int] | None = None) -> NodePlan:
    """Plan for order finding of ``a`` modulo ``N`` on ``k`` nodes."""
    if N < 3:
        raise PlanError(f"N must be at least 3, got {N}")
    if not 1 < a < N or gcd(a, N) != 1:
        raise PlanError(f"a={a} must satisfy 1 < a < N and gcd(a, N) = 1")
    return plan_from_bits(N.bit_length(), k, epsilon, boundaries=boundaries, N=N, a=a)


@dataclass
class CommLedger:
    epr_pairs: int = 0
    classical_bits: int = 0
    teleport_events: int = 0
    node_qubits: list[int] = field(default_factory=list)

    def teleport(self, qubits: int) -> None:
        # one EPR pair and two classical bits per teleported qubit
        self.epr_pairs += qubits
        self.classical_bits += 2 * qubits
        self.teleport_events += 1

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class RunOutcome:
    """One pass of the pipeline.

    ``order`` and ``s`` are ground truth known only to the analytic backend;
    they are diagnostics and never feed order recovery.
    """

    plan: NodePlan
    outcomes: list[BitString]
    m: BitString | None
    correction_bits: tuple[int, ...]
    ledger: CommLedger
    backend: str
    error: str | None = None
    order: int | None = None
    s: int | None = None

    @property
    def combined(self) -> bool:
        return self.m is not None

    def theorem_event(self, r: int | None = None) -> bool:
        r = self.order if r is None else r
        if self.m is None or r is None:
            return False
        return within_theorem_bound(self.m, self.plan, r)

    def to_json(self) -> dict:
        return {
            "m_j": [m.to_json() for m in self.outcomes],
            "correction_bits": list(self.correction_bits),
            "m": None if self.m is None else self.m.to_json(),
            "error": self.error,
        }


def comm_cost(plan: NodePlan) -> CommLedger:
    """Projected teleportation cost: ``L`` qubits between each adjacent pair."""
    hops = plan.k - 1
    return CommLedger(
        epr_pairs=hops * plan.L,
        classical_bits=2 * hops * plan.L,
        teleport_events=hops,
        node_qubits=[tj + plan.L for tj in plan.t],
    )


def qubit_budget(plan: NodePlan, b: int = 0) -> dict:
    """Per-node qubit totals against the single-machine baseline.

    ``b`` is the ancilla count of the controlled multiplier, a free parameter.
    """
    if b < 0:
        raise ValueError("ancilla count b must be nonnegative")
    if plan.epsilon is None:
        raise ValueError("qubit_budget needs a plan built from epsilon")
    nodes = [tj + plan.L + b for tj in plan.t]
    baseline = 3 * plan.L + 1 + extra_bits(plan.epsilon) + b
    return {
        "node_totals": nodes,
        "baseline": baseline,
        "node_reduction": [baseline - n for n in nodes],
        "headline_reduction": (1 - 1 / plan.k) * plan.L - log2(plan.k),
        "ancilla": b,
    }


def _resolve_order(plan: NodePlan, order: int | None) -> int:
    if order is not None:
        return order
    if plan.N is None or plan.a is None:
        raise ValueError("analytic backend needs N and a on the plan, or an explicit order")
    return order_bruteforce(plan.N, plan.a)


def _finish(plan, outcomes, ledger, backend, order=None, s=None) -> RunOutcome:
    try:
        report = combine_results(plan, outcomes)
    except CorrectionMismatch as exc:
        return RunOutcome(plan, outcomes, None, (), ledger, backend, str(exc), order, s)
    return RunOutcome(plan, outcomes, report.m, report.correction_bits, ledger, backend, None, order, s)


def _run_analytic(plan: NodePlan, rng: np.random.Generator, order: int | None) -> RunOutcome:
    r = _resolve_order(plan, order)
    ledger = CommLedger(node_qubits=[tj + plan.L for tj in plan.t])
    s = int(rng.integers(r))
    outcomes = []
    for j in range(plan.k):
        outcomes.append(pe_sample(plan.t[j], node_phase(s, r, plan.l[j]), plan.w[j], rng))
        if j < plan.k - 1:
            ledger.teleport(plan.L)
    return _finish(plan, outcomes, ledger, "analytic", r, s)


def _require_modmul(plan: NodePlan) -> None:
    if plan.N is None or plan.a is None:
        raise ValueError("statevector backend needs N and a on the plan")


def node_stage(state: sv.StateVector, plan: NodePlan, j: int) -> sv.StateVector:
    """Superpose, controlled-multiply and inverse-QFT node ``j`` (0-based)."""
    name = f"A{j + 1}"
    state = sv.apply_hadamards(state, name)
    state = sv.apply_controlled_modmul(state, name, "C", sv.ModMulSpec(plan.a, plan.N, plan.l[j] - 1))
    return sv.apply_inverse_qft(state, name)


def strict_final_state(plan: NodePlan, cap: int | None = None) -> sv.StateVector:
    """Every node register kept live; the state right before measurement."""
    _require_modmul(plan)
    regs = [(f"A{j + 1}", plan.t[j]) for j in range(plan.k)] + [("C", plan.L)]
    state = sv.init_state(regs, [0] * plan.k + [1], cap)
    for j in range(plan.k):
        state = node_stage(state, plan, j)
    return state


def statevector_joint_distribution(plan: NodePlan, cap: int | None = None, strict: bool = True) -> np.ndarray:
    """Exact joint law of ``(m_1..m_k)`` from the dense simulator.

    ``strict`` keeps all registers; otherwise each node's register is measured
    and retired after its transform, branching over every reading.
    """
    if strict:
        state = strict_final_state(plan, cap)
        return sv.joint_prefix_distribution(state, [(f"A{j + 1}", plan.w[j]) for j in range(plan.k)])
    _require_modmul(plan)
    out = np.zeros([1 << w for w in plan.w])
    start = sv.init_state([("C", plan.L)], [1], cap)

    def branch(state, j, prefix, weight):
        state = sv.add_register(state, f"A{j + 1}", plan.t[j])
        state = node_stage(state, plan, j)
        probs = sv.prefix_distribution(state, f"A{j + 1}", plan.t[j])
        shift = plan.t[j] - plan.w[j]
        for v in np.flatnonzero(probs > 1e-15):
            idx = prefix + (int(v) >> shift,)
            if j == plan.k - 1:
                out[idx] += weight * probs[v]
                continue
            collapsed = _collapse_full(state, f"A{j + 1}", int(v), probs[v])
            branch(sv.drop_register(collapsed, f"A{j + 1}"), j + 1, idx, weight * probs[v])

    branch(start, 0, (), 1.0)
    return out


def _collapse_full(state: sv.StateVector, name: str, value: int, prob: float) -> sv.StateVector:
    ax = state.axis(name)
    tensor = np.zeros_like(state.tensor)
    index = [slice(None)] * state.tensor.ndim
    index[ax] = value
    tensor[tuple(index)] = state.tensor[tuple(index)] / np.sqrt(prob)
    return sv.StateVector(list(state.registers), tensor, state.cap)


def _run_statevector(plan: NodePlan, rng: np.random.Generator, cap: int | None, strict: bool) -> RunOutcome:
    _require_modmul(plan)
    cap = sv.default_cap() if cap is None else cap
    ledger = CommLedger(node_qubits=[tj + plan.L for tj in plan.t])
    live = sum(plan.t) + plan.L if strict else max(plan.t) + plan.L
    if live > cap:
        raise QubitCapExceeded(f"statevector run needs {live} live qubits, cap is {cap}")
    outcomes: list[BitString] = []
    if strict:
        state = sv.init_state([(f"A{j + 1}", plan.t[j]) for j in range(plan.k)] + [("C", plan.L)], [0] * plan.k + [1], cap)
        for j in range(plan.k):
            state = node_stage(state, plan, j)
            if j < plan.k - 1:
                ledger.teleport(plan.L)
        for j in range(plan.k):
            m, state = sv.measure_prefix(state, f"A{j + 1}", plan.w[j], rng)
            outcomes.append(m)
    else:
        state = sv.init_state([("C", plan.L)], [1], cap)
        for j in range(plan.k):
            name = f"A{j + 1}"
            state = sv.add_register(state, name, plan.t[j])
            state = node_stage(state, plan, j)
            full, state = sv.measure_prefix(state, name, plan.t[j], rng)
            outcomes.append(BitString(plan.w[j], full.value >> (plan.t[j] - plan.w[j])))
            state = sv.drop_register(state, name)
            if j < plan.k - 1:
                ledger.teleport(plan.L)
    return _finish(plan, outcomes, ledger, "statevector")


def run_distributed(
    plan: NodePlan,
    backend: str = "analytic",
    rng: np.random.Generator | None = None,
    *,
    order: int | None = None,
    cap: int | None = None,
    strict: bool = False,
) -> RunOutcome:
    """Execute the serial ``k``-node pipeline once and combine the readings.

    A correction mismatch is reported on the outcome (``m is None``) rather
    than raised, so that drivers can simply retry.
    """
    rng = np.random.default_rng() if rng is None else rng
    if backend == "analytic":
        return _run_analytic(plan, rng, order)
    if backend == "statevector":
        return _run_statevector(plan, rng, cap, strict)
    raise ValueError(f"unknown backend {backend!r}")


def trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    """Independent per-trial generators split deterministically from one seed."""
    return [np.random.default_rng(ss) for ss in np.random.SeedSequence(seed).spawn(trials)]


def run_trials(
    plan: NodePlan, trials: int, seed: int, backend: str = "analytic", **kwargs
) -> list[RunOutcome]:
    return [run_distributed(plan, backend, rng, **kwargs) for rng in trial_rngs(seed, trials)]


def anchor_mass(plan: NodePlan, r: int) -> float:
    """Exact probability that the last node's reading is a valid anchor.

    The event: for some ``s0`` the reading is within ``2^p`` of the true
    window (no wrap) and its first two bits are right.
    """
    from .bitmath import frac_bits
    from .phasedist import node_mixture

    dist = node_mixture(plan, r, plan.k - 1)
    tk = plan.t[-1]
    hits = np.zeros(1 << tk, dtype=bool)
    spread = (1 << plan.p) - 1
    top = tk - 2
    for s0 in range(r):
        tgt = frac_bits(Fraction(s0, r), plan.l[-2], plan.m_width).value
        lo, hi = max(0, tgt - spread), min((1 << tk) - 1, tgt + spread)
        vals = np.arange(lo, hi + 1)
        hits[vals[(vals >> top) == (tgt >> top)]] = True
    return float(dist[hits].sum())
