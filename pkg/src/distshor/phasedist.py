"""Closed-form phase-estimation outcome distributions and exact samplers.

Measuring the inverse-QFT output of a t-qubit register phased by ``omega``
gives outcome ``m`` with probability

    |2^-t * sum_j exp(2 pi i j (omega - m / 2^t))|^2

(a Fejer kernel). The offset ``omega - m/2^t`` is always formed as an exact
rational and reduced mod 1 before any trigonometry, so the point-mass case
is decided exactly.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache, reduce
from math import pi, sin
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .bitmath import BitString, PhaseFraction, as_phase

if TYPE_CHECKING:
    from .distsim import NodePlan

# Widths up to this use a cached dense probability vector; larger ones sample
# by walking outward from the peak.
DENSE_MAX_T = 16
# Offsets enumerated exactly on each side of the peak before the tail model.
WALK_SPAN = 1 << 16
# Refuse to materialise joint distributions with more cells than this.
JOINT_MAX_CELLS = 1 << 22


def _split_scaled_phase(t: int, omega: PhaseFraction) -> tuple[int, Fraction]:
    """Integer part and fractional part of ``2^t * omega``."""
    scaled = omega.numerator << t
    base, rem = divmod(scaled, omega.denominator)
    return base, Fraction(rem, omega.denominator)


def pe_prob(t: int, omega, m: BitString) -> float:
    """Probability that a t-qubit phase estimation of ``omega`` reads ``m``."""
    if m.width != t:
        raise ValueError(f"outcome width {m.width} != register width {t}")
    omega = as_phase(omega)
    delta = (omega.as_fraction() - Fraction(m.value, 1 << t)) % 1
    if delta == 0:
        return 1.0
    half = 1 << (t - 1) if t > 0 else 0
    scaled = delta * (1 << t)  # in (0, 2^t)
    if scaled > half:
        scaled -= 1 << t  # nearest representative, |scaled| <= 2^(t-1)
    if abs(scaled) > 1e150:
        return 0.0
    numer = sin(pi * float(scaled % 1))
    y = float(scaled / (1 << t))
    denom = pi * float(scaled) * float(np.sinc(y))
    return (numer / denom) ** 2


def pe_vector(t: int, omega) -> np.ndarray:
    """Probabilities of all ``2^t`` outcomes, indexed by outcome value."""
    omega = as_phase(omega)
    return _pe_vector(t, omega).copy()


@lru_cache(maxsize=256)
def _pe_vector(t: int, omega: PhaseFraction) -> np.ndarray:
    if t > 24:
        raise ValueError(f"dense outcome vector for t={t} is too large")
    size = 1 << t
    base, frac = _split_scaled_phase(t, omega)
    out = np.zeros(size)
    if frac == 0:
        out[base % size] = 1.0
        out.flags.writeable = False
        return out
    f = float(frac)
    m = np.arange(size, dtype=np.int64)
    offset = ((base - m) % size).astype(np.float64) + f
    offset[offset > size / 2] -= size
    denom = size * np.sin(pi * offset / size)
    out = (sin(pi * f) / denom) ** 2
    out.flags.writeable = False
    return out


def marginal_vector(t: int, omega, w: int) -> np.ndarray:
    """Distribution of the leading ``w`` bits, indexed by prefix value."""
    if not 1 <= w <= t:
        raise ValueError(f"need 1 <= w <= t, got w={w}, t={t}")
    omega = as_phase(omega)
    return _pe_vector(t, omega).reshape(1 << w, 1 << (t - w)).sum(axis=1)


def pe_marginal_prob(t: int, omega, w: int, prefix: BitString) -> float:
    """Probability that measuring only the first ``w`` qubits yields ``prefix``.

    Sums the closed form over the ``2^(t-w)`` outcomes sharing the prefix.
    """
    if not 1 <= w <= t:
        raise ValueError(f"need 1 <= w <= t, got w={w}, t={t}")
    if prefix.width != w:
        raise ValueError(f"prefix width {prefix.width} != {w}")
    omega = as_phase(omega)
    tail = t - w
    start = prefix.value << tail
    return float(sum(pe_prob(t, omega, BitString(t, start + y)) for y in range(1 << tail)))


@lru_cache(maxsize=256)
def _marginal_cdf(t: int, omega: PhaseFraction, w: int) -> np.ndarray:
    cdf = np.cumsum(marginal_vector(t, omega, w))
    cdf.flags.writeable = False
    return cdf


def _inverse_cdf(cdf: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(idx, len(cdf) - 1)


@lru_cache(maxsize=32)
def _walk_table(t: int, omega: PhaseFraction):
    size = 1 << t
    base, frac = _split_scaled_phase(t, omega)
    f = float(frac)
    span = min(WALK_SPAN, size >> 1)
    # offset j means outcome base + j; alternate 0, 1, -1, 2, -2, ...
    order = np.empty(2 * span)
    order[0::2] = -np.arange(0, span, dtype=np.float64)
    order[1::2] = np.arange(1, span + 1, dtype=np.float64)
    x = order - f
    c = sin(pi * f) ** 2 / pi**2
    cdf = np.cumsum(c / x**2 / np.sinc(x / size) ** 2)
    if 2 * span == size:
        tail_pos = tail_neg = 0.0
    else:
        # sum_{j >= n} 1/(j - f)^2 ~ 1/(n - f - 1/2)
        tail_pos = c / (span + 1 - f - 0.5)
        tail_neg = c / (span + f - 0.5)
    return base, f, c, span, order, cdf, tail_pos, tail_neg


def _walk_sample(t: int, omega: PhaseFraction, u: float) -> int:
    """Inverse-CDF draw of a full t-bit outcome for wide registers.

    Offsets from the peak are enumerated exactly out to ``WALK_SPAN`` on each
    side; beyond that the mass follows the ``1/j^2`` tail of the kernel, whose
    relative error is below ``(WALK_SPAN / 2^t)^2``.
    """
    size = 1 << t
    base, frac = _split_scaled_phase(t, omega)
    if frac == 0:
        return base % size
    base, f, c, span, order, cdf, tail_pos, tail_neg = _walk_table(t, omega)
    exact_mass = cdf[-1]
    target = u * (exact_mass + tail_pos + tail_neg)
    if target < exact_mass:
        idx = min(int(np.searchsorted(cdf, target, side="right")), 2 * span - 1)
        return (base + int(order[idx])) % size
    rest = target - exact_mass
    limit = size >> 1
    if rest < tail_pos:
        remaining = tail_pos - rest
        j = int(np.ceil(f - 0.5 + c / max(remaining, 1e-300)))
        j = min(max(j, span + 1), limit)
        return (base + j) % size
    remaining = tail_neg - (rest - tail_pos)
    j = int(np.ceil(c / max(remaining, 1e-300) - f - 0.5))
    j = min(max(j, span), limit - 1)
    return (base - j) % size


def pe_sample(t: int, omega, w: int, rng: np.random.Generator) -> BitString:
    """Draw a ``w``-bit prefix with probability ``pe_marginal_prob``.

    Consumes exactly one uniform variate from ``rng``.
    """
    if not 1 <= w <= t:
        raise ValueError(f"need 1 <= w <= t, got w={w}, t={t}")
    omega = as_phase(omega)
    u = float(rng.random())
    if t <= DENSE_MAX_T:
        return BitString(w, _inverse_cdf(_marginal_cdf(t, omega, w), u))
    full = _walk_sample(t, omega, u)
    return BitString(w, full >> (t - w))


def node_phase(s: int, r: int, l_j: int) -> PhaseFraction:
    """Phase ``frac(2^(l_j - 1) * s / r)`` seen by the node starting at bit ``l_j``."""
    if not 0 <= s < r:
        raise ValueError(f"need 0 <= s < r, got s={s}, r={r}")
    if l_j < 1:
        raise ValueError("l_j must be >= 1")
    return PhaseFraction((s << (l_j - 1)) % r, r)


def _check_outcomes(plan: NodePlan, outcomes: Sequence[BitString]) -> None:
    if len(outcomes) != plan.k:
        raise ValueError(f"expected {plan.k} outcomes, got {len(outcomes)}")
    for j, (m, w) in enumerate(zip(outcomes, plan.w), start=1):
        if m.width != w:
            raise ValueError(f"outcome {j} has width {m.width}, plan says {w}")


def joint_outcome_prob(plan: NodePlan, r: int, outcomes: Sequence[BitString]) -> float:
    """Exact probability of the tuple ``(m_1, ..., m_k)``.

    Given ``s`` the node registers are independent (the eigenstates |u_s> are
    orthonormal), so the joint law is a uniform mixture over ``s`` of products
    of per-node marginals.
    """
    _check_outcomes(plan, outcomes)
    total = 0.0
    for s in range(r):
        prod = 1.0
        for j in range(plan.k):
            phase = node_phase(s, r, plan.l[j])
            prod *= pe_marginal_prob(plan.t[j], phase, plan.w[j], outcomes[j])
            if prod == 0.0:
                break
        total += prod
    return total / r


def joint_distribution(plan: NodePlan, r: int) -> np.ndarray:
    """Dense joint law with one axis per node (axis j indexed by m_j's value)."""
    cells = 1 << sum(plan.w)
    if cells > JOINT_MAX_CELLS:
        raise ValueError(f"joint distribution has {cells} cells, above {JOINT_MAX_CELLS}")
    out = np.zeros([1 << w for w in plan.w])
    for s in range(r):
        vecs = [
            marginal_vector(plan.t[j], node_phase(s, r, plan.l[j]), plan.w[j])
            for j in range(plan.k)
        ]
        out += reduce(np.multiply.outer, vecs)
    return out / r


def node_mixture(plan: NodePlan, r: int, j: int) -> np.ndarray:
    """Marginal law of node ``j``'s (0-based) measured prefix, mixed over s."""
    acc = np.zeros(1 << plan.w[j])
    for s in range(r):
        acc += marginal_vector(plan.t[j], node_phase(s, r, plan.l[j]), plan.w[j])
    return acc / r
