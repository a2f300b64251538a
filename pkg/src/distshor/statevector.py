"""Dense statevector simulator used as the ground-truth oracle at tiny sizes.

Amplitudes live in a tensor with one axis per named register; flattening in
C order gives the usual big-endian basis index (first register most
significant). Modular multiplication is applied as an exact index
permutation and the inverse QFT as one dense transform (an orthonormal FFT),
so there is no gate decomposition anywhere.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .bitmath import BitString, as_phase
from .errors import QubitCapExceeded

DEFAULT_QUBIT_CAP = int(os.environ.get("DISTSHOR_QUBIT_CAP", "26"))


def default_cap() -> int:
    return int(os.environ.get("DISTSHOR_QUBIT_CAP", DEFAULT_QUBIT_CAP))


@dataclass(frozen=True)
class ModMulSpec:
    """Multiplication by ``a^(2^e)`` modulo ``N``."""

    a: int
    N: int
    e: int = 0

    def __post_init__(self):
        if self.N < 2 or not 1 <= self.a < self.N:
            raise ValueError(f"need 1 <= a < N, got a={self.a}, N={self.N}")
        if gcd(self.a, self.N) != 1:
            raise ValueError(f"gcd({self.a}, {self.N}) != 1; not a permutation")
        if self.e < 0:
            raise ValueError("e must be nonnegative")

    @property
    def multiplier(self) -> int:
        return pow(self.a, 1 << self.e, self.N)


@dataclass
class StateVector:
    registers: list[tuple[str, int]]
    tensor: np.ndarray
    cap: int = field(default_factory=default_cap)

    @property
    def num_qubits(self) -> int:
        return sum(w for _, w in self.registers)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def axis(self, name: str) -> int:
        for i, (reg, _) in enumerate(self.registers):
            if reg == name:
                return i
        raise KeyError(f"unknown register {name!r}")

    def width(self, name: str) -> int:
        return self.registers[self.axis(name)][1]

    def copy(self) -> StateVector:
        return StateVector(list(self.registers), self.tensor.copy(), self.cap)


def _check_cap(total: int, cap: int) -> None:
    if total > cap:
        raise QubitCapExceeded(f"{total} qubits requested, cap is {cap}")


def init_state(
    registers: Sequence[tuple[str, int]],
    basis_values: Sequence[int],
    cap: int | None = None,
) -> StateVector:
    """Computational basis state with register ``i`` holding ``basis_values[i]``."""
    cap = default_cap() if cap is None else cap
    if len(registers) != len(basis_values):
        raise ValueError("one basis value per register required")
    names = [name for name, _ in registers]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate register names in {names}")
    for (name, width), v in zip(registers, basis_values):
        if width < 1:
            raise ValueError(f"register {name!r} has non-positive width")
        if not 0 <= v < (1 << width):
            raise ValueError(f"value {v} overflows register {name!r} of width {width}")
    _check_cap(sum(w for _, w in registers), cap)
    tensor = np.zeros([1 << w for _, w in registers], dtype=np.complex128)
    tensor[tuple(basis_values)] = 1.0
    return StateVector(list(registers), tensor, cap)


def add_register(state: StateVector, name: str, width: int, value: int = 0) -> StateVector:
    """Tensor a fresh basis register onto the front of ``state``."""
    if any(reg == name for reg, _ in state.registers):
        raise ValueError(f"register {name!r} already exists")
    if not 0 <= value < (1 << width):
        raise ValueError(f"value {value} overflows width {width}")
    _check_cap(state.num_qubits + width, state.cap)
    fresh = np.zeros(1 << width, dtype=np.complex128)
    fresh[value] = 1.0
    return StateVector([(name, width)] + state.registers, np.multiply.outer(fresh, state.tensor), state.cap)


def drop_register(state: StateVector, name: str) -> StateVector:
    """Remove a register that is in a computational basis state."""
    ax = state.axis(name)
    probs = np.sum(np.abs(np.moveaxis(state.tensor, ax, 0)) ** 2, axis=tuple(range(1, state.tensor.ndim)))
    support = np.flatnonzero(probs > 1e-12)
    if len(support) != 1:
        raise ValueError(f"register {name!r} is not in a basis state")
    rest = np.take(state.tensor, int(support[0]), axis=ax)
    regs = [r for r in state.registers if r[0] != name]
    return StateVector(regs, rest / np.linalg.norm(rest), state.cap)


def _on_axis(state: StateVector, name: str, fn) -> StateVector:
    ax = state.axis(name)
    moved = np.moveaxis(state.tensor, ax, -1)
    out = np.moveaxis(fn(moved), -1, ax)
    return StateVector(list(state.registers), np.ascontiguousarray(out), state.cap)


def _walsh_hadamard(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    lead = x.shape[:-1]
    y = x.reshape(-1, n).copy()
    h = 1
    while h < n:
        v = y.reshape(-1, n // (2 * h), 2, h)
        a = v[:, :, 0, :].copy()
        v[:, :, 0, :] += v[:, :, 1, :]
        np.subtract(a, v[:, :, 1, :], out=v[:, :, 1, :])
        h *= 2
    return (y / np.sqrt(n)).reshape(*lead, n)


def apply_hadamards(state: StateVector, register: str) -> StateVector:
    """Apply ``H`` to every qubit of ``register``."""
    return _on_axis(state, register, _walsh_hadamard)


def apply_inverse_qft(state: StateVector, register: str) -> StateVector:
    return _on_axis(state, register, lambda x: np.fft.fft(x, axis=-1, norm="ortho"))


def apply_qft(state: StateVector, register: str) -> StateVector:
    return _on_axis(state, register, lambda x: np.fft.ifft(x, axis=-1, norm="ortho"))


def modmul_permutation(multiplier: int, N: int, width: int) -> np.ndarray:
    """Index map ``x -> multiplier * x mod N`` on ``[0, N)``, identity above."""
    perm = np.arange(1 << width, dtype=np.int64)
    perm[:N] = multiplier * np.arange(N, dtype=np.int64) % N
    return perm


def apply_controlled_modmul(
    state: StateVector, control: str, work: str, spec: ModMulSpec
) -> StateVector:
    """``|j>|x> -> |j>|(a^(2^e))^j x mod N>``; values ``x >= N`` are left alone."""
    wc, ww = state.width(control), state.width(work)
    if (1 << ww) < spec.N:
        raise ValueError(f"work register of width {ww} cannot hold residues mod {spec.N}")
    ci, wi = state.axis(control), state.axis(work)
    x = np.moveaxis(state.tensor, [ci, wi], [-2, -1])
    # one permutation row per control value j, for the multiplier c^j
    powers = np.empty(1 << wc, dtype=np.int64)
    powers[0] = 1
    for j in range(1, 1 << wc):
        powers[j] = powers[j - 1] * spec.multiplier % spec.N
    perms = np.broadcast_to(np.arange(1 << ww, dtype=np.int64), (1 << wc, 1 << ww)).copy()
    perms[:, : spec.N] = powers[:, None] * np.arange(spec.N, dtype=np.int64) % spec.N
    out = np.empty_like(x)
    np.put_along_axis(out, np.broadcast_to(perms, x.shape), x, axis=-1)
    out = np.moveaxis(out, [-2, -1], [ci, wi])
    return StateVector(list(state.registers), np.ascontiguousarray(out), state.cap)


def apply_controlled_phase(state: StateVector, control: str, omega) -> StateVector:
    """Diagonal oracle ``|j> -> exp(2 pi i j omega) |j>`` for a rational phase."""
    omega = as_phase(omega)
    n = 1 << state.width(control)
    # reduce j*num mod den exactly before forming the angle
    residues = np.arange(n, dtype=object) * omega.numerator % omega.denominator
    phases = np.exp(2j * np.pi * residues.astype(np.float64) / omega.denominator)
    return _on_axis(state, control, lambda x: x * phases)


def _prefix_probs(state: StateVector, register: str, w: int) -> np.ndarray:
    width = state.width(register)
    if not 1 <= w <= width:
        raise ValueError(f"prefix width {w} out of range for register of width {width}")
    ax = state.axis(register)
    probs = np.abs(state.tensor) ** 2
    others = tuple(i for i in range(probs.ndim) if i != ax)
    marginal = probs.sum(axis=others) if others else probs
    return marginal.reshape(1 << w, 1 << (width - w)).sum(axis=1)


def prefix_distribution(state: StateVector, register: str, w: int) -> np.ndarray:
    """Born-rule law of the first ``w`` qubits of ``register``, indexed by prefix."""
    return _prefix_probs(state, register, w)


def joint_prefix_distribution(state: StateVector, prefixes: Iterable[tuple[str, int]]) -> np.ndarray:
    """Joint Born-rule law of several register prefixes, one axis per entry."""
    prefixes = list(prefixes)
    axes = [state.axis(name) for name, _ in prefixes]
    probs = np.abs(state.tensor) ** 2
    others = tuple(i for i in range(probs.ndim) if i not in axes)
    marg = probs.sum(axis=others) if others else probs
    kept = sorted(axes)
    marg = np.transpose(marg, [kept.index(ax) for ax in axes])
    for i, (name, w) in enumerate(prefixes):
        width = state.width(name)
        if not 1 <= w <= width:
            raise ValueError(f"prefix width {w} out of range for {name!r}")
        shape = list(marg.shape)
        marg = marg.reshape(shape[:i] + [1 << w, 1 << (width - w)] + shape[i + 1:]).sum(axis=i + 1)
    return marg


def measure_prefix(
    state: StateVector, register: str, w: int, rng: np.random.Generator
) -> tuple[BitString, StateVector]:
    """Measure the first ``w`` qubits of ``register``; collapse and renormalise.

    One uniform variate is drawn and inverted through the prefix CDF.
    """
    probs = _prefix_probs(state, register, w)
    cdf = np.cumsum(probs)
    u = float(rng.random())
    outcome = min(int(np.searchsorted(cdf, u * cdf[-1], side="right")), len(cdf) - 1)
    width = state.width(register)
    ax = state.axis(register)
    moved = np.moveaxis(state.tensor, ax, 0).reshape(1 << w, 1 << (width - w), -1).copy()
    mask = np.zeros(1 << w, dtype=bool)
    mask[outcome] = True
    moved[~mask] = 0.0
    moved /= np.sqrt(probs[outcome])
    rest_shape = [state.tensor.shape[i] for i in range(state.tensor.ndim) if i != ax]
    collapsed = np.moveaxis(moved.reshape(1 << width, *rest_shape), 0, ax)
    return BitString(w, outcome), StateVector(list(state.registers), np.ascontiguousarray(collapsed), state.cap)


def order_eigenstate(N: int, a: int, s: int, width: int) -> np.ndarray:
    """Amplitudes of ``|u_s> = r^-1/2 sum_k exp(-2 pi i s k / r) |a^k mod N>``."""
    orbit = [1]
    while True:
        nxt = orbit[-1] * a % N
        if nxt == 1:
            break
        orbit.append(nxt)
    r = len(orbit)
    vec = np.zeros(1 << width, dtype=np.complex128)
    for k, x in enumerate(orbit):
        vec[x] += np.exp(-2j * np.pi * ((s * k) % r) / r)
    return vec / np.sqrt(r)


def run_phase_estimation(
    t: int,
    oracle,
    eigenstate_value: int = 1,
    rng: np.random.Generator | None = None,
    cap: int | None = None,
) -> BitString:
    """Phase estimation with a ``t``-qubit control register; returns the reading.

    ``oracle`` is either a :class:`ModMulSpec` (the work register starts in the
    basis state ``eigenstate_value``) or a rational phase for a diagonal
    controlled-phase oracle with no work register.
    """
    rng = np.random.default_rng() if rng is None else rng
    state = phase_estimation_state(t, oracle, eigenstate_value, cap)
    m, _ = measure_prefix(state, "A", t, rng)
    return m


def phase_estimation_state(t: int, oracle, eigenstate_value: int = 1, cap: int | None = None) -> StateVector:
    """State just before the final measurement of phase estimation."""
    if isinstance(oracle, ModMulSpec):
        width = oracle.N.bit_length()
        state = init_state([("A", t), ("C", width)], [0, eigenstate_value], cap)
        state = apply_hadamards(state, "A")
        state = apply_controlled_modmul(state, "A", "C", oracle)
    else:
        state = init_state([("A", t)], [0], cap)
        state = apply_hadamards(state, "A")
        state = apply_controlled_phase(state, "A", oracle)
    return apply_inverse_qft(state, "A")


def monolithic_width(N: int, epsilon) -> int:
    from .distsim import extra_bits

    return 2 * N.bit_length() + 1 + extra_bits(epsilon)


def run_order_finding_monolithic(
    N: int, a: int, epsilon, rng: np.random.Generator | None = None, cap: int | None = None
) -> tuple[BitString, int]:
    """Quantum part of single-machine order finding; returns ``(m, t)``."""
    t = monolithic_width(N, epsilon)
    return run_phase_estimation(t, ModMulSpec(a, N), 1, rng, cap), t
