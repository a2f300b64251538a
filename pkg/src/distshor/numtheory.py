"""Classical number theory: orders, continued fractions and the factoring loop."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from math import gcd as _gcd, isqrt
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .bitmath import BitString
from .errors import AttemptsExhausted, OracleCapExceeded, OrderNotFound

if TYPE_CHECKING:
    from .distsim import NodePlan, RunOutcome

log = logging.getLogger(__name__)

ORACLE_CAP = 1 << 24
DEFAULT_LAMBDA_MAX = 64


def modpow(a: int, e: int, N: int) -> int:
    if N < 1:
        raise ValueError("modulus must be positive")
    return pow(a, e, N)


def gcd(a: int, b: int) -> int:
    return _gcd(a, b)


def order_bruteforce(N: int, a: int, cap: int = ORACLE_CAP) -> int:
    """Smallest ``r >= 1`` with ``a^r = 1 (mod N)``, by iteration."""
    if N > cap:
        raise OracleCapExceeded(f"N={N} exceeds the brute-force oracle cap {cap}")
    return _order(N, a % N if N > 1 else 0)


@lru_cache(maxsize=1024)
def _order(N: int, a: int) -> int:
    if _gcd(a, N) != 1:
        raise ValueError(f"gcd({a}, {N}) != 1; order undefined")
    if N == 1:
        return 1
    x, r = a % N, 1
    while x != 1:
        x = x * a % N
        r += 1
    return r


def continued_fraction(num: int, den: int) -> list[int]:
    terms = []
    while den:
        q, rem = divmod(num, den)
        terms.append(q)
        num, den = den, rem
    return terms


def convergents(num: int, den: int) -> Iterator[Fraction]:
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    for a in continued_fraction(num, den):
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _minimize_order(candidate: int, a: int, N: int) -> int:
    r = candidate
    for q in _prime_factors(candidate):
        while r % q == 0 and pow(a, r // q, N) == 1:
            r //= q
    return r


@dataclass(frozen=True)
class OrderResult:
    r: int
    attempts: int
    source: str  # "convergent" or "multiple"
    convergent: Fraction | None = None


def recover_order(
    m: BitString, plan: NodePlan | None, N: int, a: int, lambda_max: int = DEFAULT_LAMBDA_MAX
) -> OrderResult:
    """Recover the order of ``a`` mod ``N`` from a combined estimate ``m``.

    Each convergent ``p/q`` (``p > 0``, ``q < N``) of ``m / 2^width`` proposes
    ``lambda * q`` for ``lambda <= lambda_max``; the smallest candidate with
    ``a^c = 1`` is reduced to the exact order. Multipliers cover the case
    ``gcd(s, r) > 1`` where the convergent only yields ``r / gcd(s, r)``.
    """
    if plan is not None and m.width != plan.m_width:
        raise ValueError(f"m has width {m.width}, plan expects {plan.m_width}")
    best: tuple[int, int, Fraction] | None = None
    tested = 0
    for conv in convergents(m.value, 1 << m.width):
        q = conv.denominator
        if conv.numerator == 0 or q >= N:
            continue
        for lam in range(1, lambda_max + 1):
            c = lam * q
            if best is not None and c >= best[0]:
                break
            tested += 1
            if pow(a, c, N) == 1:
                best = (c, lam, conv)
                break
    if best is None:
        raise OrderNotFound(f"no convergent of {m.value}/2^{m.width} verified as an order of {a} mod {N}")
    c, lam, conv = best
    r = _minimize_order(c, a, N)
    return OrderResult(r, tested, "convergent" if lam == 1 and r == c else "multiple", conv)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with the first twelve prime bases (deterministic below 3.3e24)."""
    if n < 2:
        return False
    bases = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for b in bases:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in bases:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _iroot(n: int, k: int) -> int:
    lo, hi = 1, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


def perfect_power_base(n: int) -> int | None:
    """Some ``b`` with ``b^k = n`` for ``k >= 2``, or None."""
    for k in range(2, n.bit_length() + 1):
        b = isqrt(n) if k == 2 else _iroot(n, k)
        if b > 1 and b**k == n:
            return b
    return None


@dataclass
class FactorReport:
    N: int
    factors: tuple[int, int] | None
    method: str
    a_tried: list[int] = field(default_factory=list)
    runs: list[RunOutcome] = field(default_factory=list)
    orders: list[int | None] = field(default_factory=list)
    plans: list[NodePlan] = field(default_factory=list)

    @property
    def attempts(self) -> int:
        return len(self.a_tried)


def classical_precheck(N: int) -> tuple[int, int] | None:
    """Factor pair for even numbers and perfect powers; None otherwise."""
    if N % 2 == 0:
        return 2, N // 2
    base = perfect_power_base(N)
    if base is not None:
        return base, N // base
    return None


def shor_factor(
    N: int,
    k: int = 1,
    epsilon=0.1,
    backend: str = "analytic",
    rng: np.random.Generator | None = None,
    max_attempts: int = 25,
    *,
    lambda_max: int = DEFAULT_LAMBDA_MAX,
    boundaries=None,
    cap: int | None = None,
    strict: bool = False,
) -> FactorReport:
    """Shor's reduction on top of distributed order finding.

    Even numbers and perfect powers are answered classically. Raises
    :class:`AttemptsExhausted` (with the partial report attached as
    ``exc.report``) after ``max_attempts`` random bases.
    """
    from .distsim import make_plan, run_distributed

    if N < 4:
        raise ValueError(f"N={N} has no nontrivial factorisation")
    if is_probable_prime(N):
        raise ValueError(f"N={N} is prime")
    pre = classical_precheck(N)
    if pre is not None:
        return FactorReport(N, pre, "classical")
    rng = np.random.default_rng() if rng is None else rng
    report = FactorReport(N, None, "quantum")
    for attempt in range(max_attempts):
        a = int(rng.integers(2, N))
        report.a_tried.append(a)
        g = _gcd(a, N)
        if g > 1:
            report.factors = (min(g, N // g), max(g, N // g))
            report.method = "gcd"
            report.orders.append(None)
            return report
        plan = make_plan(N, a, k, epsilon, boundaries)
        report.plans.append(plan)
        outcome = run_distributed(plan, backend, rng, cap=cap, strict=strict)
        report.runs.append(outcome)
        if outcome.m is None:
            log.debug("attempt %d: %s", attempt, outcome.error)
            report.orders.append(None)
            continue
        try:
            r = recover_order(outcome.m, plan, N, a, lambda_max).r
        except OrderNotFound:
            report.orders.append(None)
            continue
        report.orders.append(r)
        if r % 2:
            continue
        half = pow(a, r // 2, N)
        if half == N - 1:
            continue
        f = _gcd(half - 1, N)
        if 1 < f < N:
            report.factors = (min(f, N // f), max(f, N // f))
            return report
    exc = AttemptsExhausted(f"no factor of {N} after {max_attempts} attempts")
    exc.report = report
    raise exc
