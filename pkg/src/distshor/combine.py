"""Classical correction and catenation of the per-node measurement strings.

Adjacent nodes overlap on two bits. Working backwards from the last node,
each earlier string is nudged by -1, 0 or +1 so that its last two bits agree
with the first two bits of the already-corrected suffix, then the overlap is
dropped and the pieces are joined.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import TYPE_CHECKING, Sequence

from .bitmath import BitString, dt_distance, frac_bits, slice_bits
from .errors import CorrectionMismatch

if TYPE_CHECKING:
    from .distsim import NodePlan

_CORRECTION = {0: 0, 1: 1, 3: -1}


@dataclass(frozen=True)
class CombineReport:
    m: BitString
    correction_bits: tuple[int, ...]


def correction_bit(last_two: BitString, first_two: BitString, u: int = 0) -> int:
    """The unique ``b`` in {-1, 0, 1} with ``(last_two + b) mod 4 == first_two``."""
    if last_two.width != 2 or first_two.width != 2:
        raise ValueError("correction_bit expects two 2-bit strings")
    diff = (first_two.value - last_two.value) % 4
    if diff == 2:
        raise CorrectionMismatch(u, last_two.value, first_two.value)
    return _CORRECTION[diff]


def _check_widths(plan: NodePlan, outcomes: Sequence[BitString]) -> None:
    if len(outcomes) != plan.k:
        raise ValueError(f"expected {plan.k} outcomes, got {len(outcomes)}")
    for j, (m, w) in enumerate(zip(outcomes, plan.w), start=1):
        if m.width != w:
            raise ValueError(f"m_{j} has width {m.width}, plan expects {w}")


def combine_results(plan: NodePlan, outcomes: Sequence[BitString]) -> CombineReport:
    """Fold ``m_1..m_k`` into one ``2L+1+p``-bit estimate.

    Raises :class:`CorrectionMismatch` (carrying the 1-based node index) when
    an overlap differs by 2 mod 4.
    """
    _check_widths(plan, outcomes)
    suffix = outcomes[-1]
    bits: list[int] = []
    for u in range(plan.k - 1, 0, -1):
        m_u = outcomes[u - 1]
        cb = correction_bit(slice_bits(m_u, m_u.width - 1, m_u.width), slice_bits(suffix, 1, 2), u)
        prefix = BitString(m_u.width, (m_u.value + cb) % (1 << m_u.width))
        suffix = prefix + slice_bits(suffix, 3, suffix.width)
        bits.append(cb)
    return CombineReport(suffix, tuple(reversed(bits)))


def within_theorem_bound(m: BitString, plan: NodePlan, r: int) -> bool:
    """True if ``|m / 2^(2L+1+p) - s/r| <= 2^-(2L+1)`` for some ``s`` in 0..r."""
    x = Fraction(m.value, 1 << m.width)
    bound = Fraction(1, 1 << (2 * plan.L + 1))
    s = round(x * r)
    return any(abs(x - Fraction(c, r)) <= bound for c in (s - 1, s, s + 1) if 0 <= c <= r)


def _targets(plan: NodePlan, r: int, s0: int) -> list[BitString]:
    omega = Fraction(s0, r)
    out = [frac_bits(omega, plan.l[u], plan.l[u + 1] + 1) for u in range(plan.k - 1)]
    out.append(frac_bits(omega, plan.l[-2], plan.m_width))
    return out


def hypothesis_check(plan: NodePlan, r: int, s0: int, outcomes: Sequence[BitString]) -> bool:
    """Whether the outcomes satisfy the conditions under which combining succeeds.

    The last node must be within ``2^p`` of the true window (no wrap-around)
    with correct leading two bits; every other node within circular distance 1
    of its window.
    """
    _check_widths(plan, outcomes)
    if not 0 <= s0 < r:
        raise ValueError(f"need 0 <= s0 < r, got {s0}")
    targets = _targets(plan, r, s0)
    m_k, tgt = outcomes[-1], targets[-1]
    if abs(m_k.value - tgt.value) >= (1 << plan.p):
        return False
    if slice_bits(m_k, 1, 2) != slice_bits(tgt, 1, 2):
        return False
    return all(dt_distance(m, tg) <= 1 for m, tg in zip(outcomes[:-1], targets[:-1]))


def _candidate_tuples(plan: NodePlan, r: int, s0: int):
    targets = _targets(plan, r, s0)
    per_node = []
    for u in range(plan.k - 1):
        w = plan.w[u]
        per_node.append({BitString(w, (targets[u].value + d) % (1 << w)) for d in (-1, 0, 1)})
    tgt = targets[-1]
    size = 1 << plan.t[-1]
    spread = (1 << plan.p) - 1
    lead = slice_bits(tgt, 1, 2)
    last = [
        BitString(plan.t[-1], v)
        for v in range(max(0, tgt.value - spread), min(size, tgt.value + spread + 1))
        if slice_bits(BitString(plan.t[-1], v), 1, 2) == lead
    ]
    per_node.append(last)
    for combo in product(*[sorted(c) for c in per_node]):
        if hypothesis_check(plan, r, s0, combo):
            yield combo


def theorem_oracle(plan: NodePlan, r: int, *, return_count: bool = False):
    """Exhaustively confirm the success theorem for one plan and order ``r``.

    Every outcome tuple that satisfies :func:`hypothesis_check` for some
    ``s0 < r`` must combine without a mismatch into an ``m`` within
    ``2^-(2L+1)`` of ``s0/r``.
    """
    if plan.k > 3 or plan.L > 6 or plan.p > 3:
        raise ValueError("theorem_oracle is limited to k <= 3, L <= 6, p <= 3")
    if r < 1:
        raise ValueError("r must be positive")
    bound = Fraction(1, 1 << (2 * plan.L + 1))
    checked = 0
    for s0 in range(r):
        for combo in _candidate_tuples(plan, r, s0):
            checked += 1
            try:
                m = combine_results(plan, combo).m
            except CorrectionMismatch:
                return (False, checked) if return_count else False
            if abs(Fraction(m.value, 1 << m.width) - Fraction(s0, r)) > bound:
                return (False, checked) if return_count else False
    return (True, checked) if return_count else True
