"""Core p-bit and Ising semantics.

Energy convention: E(m) = -sum_{i<j} J_ij m_i m_j - sum_i h_i m_i, each
undirected edge counted once. Under this convention the stochastic update
m_i = sgn(tanh(beta * I_i) - r_U), with local field I_i = sum_j J_ij m_j + h_i
and r_U uniform on (-1, +1), samples the exact Gibbs conditional:
P(m_i = +1) = (1 + tanh(beta * I_i)) / 2.

Two pseudorandom sources are provided. The default is one seedable 64-bit
counter-hash (splitmix64) stream per p-bit. The hardware-faithful option is
one maximal-length linear feedback shift register per p-bit, advanced a full
word per activation. A 10-bit fixed-point activation table models the
quantized tanh threshold used by FPGA builds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .graph import ChimeraGraph

# splitmix64 constants, shared with the compiled kernels
SM64_GAMMA = 0x9E3779B97F4A7C15
SM64_MIX1 = 0xBF58476D1CE4E5B9
SM64_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


def mix64(z: int) -> int:
    """splitmix64 finalizer; bijective hash on 64-bit words."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * SM64_MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * SM64_MIX2) & _MASK64
    return z ^ (z >> 31)


def stream_init(seed: int, index: int) -> int:
    """Initial splitmix64 state for stream `index` under `seed`.

    States are hashed (not arithmetic offsets of one another) so distinct
    streams are not lag-shifted copies of a single sequence.
    """
    return mix64(mix64((seed + SM64_GAMMA * (index + 1)) & _MASK64))


def trial_seed(base: int, instance_id: int, trial: int) -> int:
    """Independent seed for one (instance, trial) cell of a run.

    Hashing (not offsetting) keeps cells statistically unrelated; trial -1
    is reserved for instance-level randomness such as clock assignment.
    """
    key = ((instance_id & 0xFFFFFFFF) << 32) | ((trial + 1) & 0xFFFFFFFF)
    return mix64(base ^ mix64(key))


def stream_next(state: int) -> tuple[int, float]:
    """Advance a splitmix64 stream; returns (new_state, uniform on (-1, 1))."""
    state = (state + SM64_GAMMA) & _MASK64
    u = mix64(state)
    # 53 mantissa bits, centered half-steps: strictly inside (-1, 1)
    r = ((u >> 11) + 0.5) * (2.0 ** -52) - 1.0
    return state, r


@dataclass
class IsingProblem:
    """Sparse symmetric Ising problem in adjacency (CSR) form.

    J is stored once per undirected edge in `couplings` and expanded to both
    directions in the CSR arrays used by the samplers. `e_ground` is the
    known ground energy when available (planted instances), else None.
    """

    num_spins: int
    couplings: dict[tuple[int, int], float]  # keys (i, j) with i < j
    h: np.ndarray
    e_ground: float | None = None

    def __post_init__(self):
        for (i, j) in self.couplings:
            if not (0 <= i < j < self.num_spins):
                raise ValueError(f"coupling key ({i}, {j}) invalid for {self.num_spins} spins")
        self.h = np.asarray(self.h, dtype=np.float64)
        if self.h.shape != (self.num_spins,):
            raise ValueError("h must have one entry per spin")

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, indices, weights) with both edge directions present."""
        n = self.num_spins
        deg = np.zeros(n, dtype=np.int64)
        for i, j in self.couplings:
            deg[i] += 1
            deg[j] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.zeros(indptr[-1], dtype=np.int32)
        weights = np.zeros(indptr[-1], dtype=np.float64)
        cursor = indptr[:-1].copy()
        for (i, j), w in sorted(self.couplings.items()):
            indices[cursor[i]] = j
            weights[cursor[i]] = w
            cursor[i] += 1
            indices[cursor[j]] = i
            weights[cursor[j]] = w
            cursor[j] += 1
        indices.setflags(write=False)
        weights.setflags(write=False)
        indptr.setflags(write=False)
        return indptr, indices, weights

    def neighbors(self, i: int) -> np.ndarray:
        indptr, indices, _ = self.csr
        return indices[indptr[i]:indptr[i + 1]]

    @property
    def problem(self) -> "IsingProblem":
        return self

    @classmethod
    def from_graph(cls, g: ChimeraGraph, couplings: dict[tuple[int, int], float],
                   h: np.ndarray | None = None, e_ground: float | None = None) -> "IsingProblem":
        edge_set = set(g.edges)
        for key in couplings:
            if key not in edge_set:
                raise ValueError(f"coupling {key} is not an edge of the graph")
        if h is None:
            h = np.zeros(g.num_nodes)
        return cls(num_spins=g.num_nodes, couplings=dict(couplings), h=h, e_ground=e_ground)


def local_field(state: np.ndarray, inst, i: int) -> float:
    """I_i = sum_j J_ij m_j + h_i over the neighbors of i."""
    prob: IsingProblem = inst.problem
    if not 0 <= i < prob.num_spins:
        raise IndexError(f"node {i} out of range [0, {prob.num_spins})")
    indptr, indices, weights = prob.csr
    lo, hi = indptr[i], indptr[i + 1]
    acc = prob.h[i]
    for k in range(lo, hi):
        acc += weights[k] * state[indices[k]]
    return float(acc)


def pbit_update(I: float, beta: float, r_U: float) -> int:
    """Stochastic p-bit activation: +1 if tanh(beta * I) > r_U else -1."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return 1 if math.tanh(beta * I) > r_U else -1


def energy(state: np.ndarray, inst) -> float:
    """E(m) = -sum_{i<j} J_ij m_i m_j - sum_i h_i m_i."""
    prob: IsingProblem = inst.problem
    acc = 0.0
    for (i, j), w in prob.couplings.items():
        acc -= w * state[i] * state[j]
    acc -= float(np.dot(prob.h, state))
    return acc


def flip_cost(state: np.ndarray, inst, i: int) -> float:
    """Energy change from flipping spin i: 2 * m_i * I_i."""
    return 2.0 * float(state[i]) * local_field(state, inst, i)


# Maximal-length tap sets (stage numbers, 1-based), Fibonacci form.
LFSR_TAPS_32 = (32, 22, 2, 1)
LFSR_TAPS_8 = (8, 6, 5, 4)


@dataclass
class Lfsr:
    """Fibonacci linear feedback shift register of configurable width.

    One `next_word` call advances the register `width` steps, i.e. a full
    word refresh per activation, and `next_uniform` maps the refreshed word
    to a value strictly inside (-1, +1) by signed scaling.
    """

    width: int = 32
    taps: tuple[int, ...] = LFSR_TAPS_32
    register: int = 1

    def __post_init__(self):
        if not all(1 <= t <= self.width for t in self.taps):
            raise ValueError(f"taps {self.taps} outside register width {self.width}")
        self._mask = (1 << self.width) - 1
        self.register &= self._mask
        if self.register == 0:
            raise ValueError("LFSR register must be nonzero")

    def step(self) -> int:
        """Advance one bit; returns the new register value."""
        fb = 0
        for t in self.taps:
            fb ^= self.register >> (t - 1)
        self.register = ((self.register << 1) | (fb & 1)) & self._mask
        return self.register

    def next_word(self) -> int:
        for _ in range(self.width):
            self.step()
        return self.register

    def next_uniform(self) -> float:
        """Full word refresh mapped to the open interval (-1, +1)."""
        w = self.next_word()
        half = 1 << (self.width - 1)
        v = w - (1 << self.width) if w >= half else w
        return (v + 0.5) / half


def Lfsr32(seed: int) -> Lfsr:
    """Standard 32-bit maximal-length register (taps 32, 22, 2, 1)."""
    return Lfsr(width=32, taps=LFSR_TAPS_32, register=seed)


def lfsr_next(s: Lfsr) -> tuple[Lfsr, float]:
    """Advance a full word; returns (same register object, uniform in (-1, 1))."""
    return s, s.next_uniform()


def lfsr_uniforms(seed: int, count: int) -> np.ndarray:
    """Successive Lfsr32(seed).next_uniform() outputs, batch-computed.

    Bit-identical to the per-call path; exists because uniformity
    diagnostics over millions of draws are too slow in a Python loop.
    """
    if seed & 0xFFFFFFFF == 0:
        raise ValueError("LFSR register must be nonzero")
    from . import _kernels  # deferred: keeps plain model use free of numba
    regs = np.array([seed & 0xFFFFFFFF], dtype=np.uint32)
    out = np.empty(count)
    _kernels.lfsr_fill(regs, out)
    return out


@dataclass
class FixedActivation:
    """Fixed-point activation: quantized tanh threshold lookup.

    The input x = beta * I is quantized to a signed `total_bits` grid with
    `frac_bits` fraction bits, saturating at +-(2^(total_bits-1) - 1). The
    table stores round(2^(total_bits-1) * tanh(q / 2^frac_bits)) clipped to
    the same signed range, odd-symmetric around 0. A draw r uniform over
    the 2^total_bits signed integers gives
    P(+1) = (threshold + 2^(total_bits-1)) / 2^total_bits, which matches the
    floating activation to within the quantization error.
    """

    total_bits: int = 10
    frac_bits: int = 7
    table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.frac_bits < self.total_bits:
            raise ValueError("frac_bits must lie in [1, total_bits)")
        qmax = self.qmax
        q = np.arange(-qmax, qmax + 1)
        raw = np.rint((1 << (self.total_bits - 1)) * np.tanh(q / float(1 << self.frac_bits)))
        self.table = np.clip(raw, -qmax, qmax).astype(np.int16)
        self.table.setflags(write=False)

    @property
    def qmax(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    def quantize(self, x: float) -> int:
        """Input grid index for x = beta * I, clipped to +-qmax."""
        q = int(np.rint(x * (1 << self.frac_bits)))
        return max(-self.qmax, min(self.qmax, q))

    def saturated(self, x: float) -> bool:
        return abs(np.rint(x * (1 << self.frac_bits))) > self.qmax

    def threshold(self, q: int) -> int:
        return int(self.table[q + self.qmax])

    def prob_plus(self, x: float) -> float:
        """Exact P(+1) of the fixed-point activation at input x."""
        if self.saturated(x):
            return 1.0 if x > 0 else 0.0
        half = 1 << (self.total_bits - 1)
        return (self.threshold(self.quantize(x)) + half) / (2.0 * half)


def dense_couplings(inst) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric dense (J, h) of a problem, zero diagonal."""
    prob: IsingProblem = inst.problem
    n = prob.num_spins
    J = np.zeros((n, n))
    for (i, j), w in prob.couplings.items():
        J[i, j] = w
        J[j, i] = w
    return J, prob.h.copy()


def state_energies(inst) -> np.ndarray:
    """Energy of every state, indexed by code = sum_i (m_i == +1) << i."""
    prob: IsingProblem = inst.problem
    n = prob.num_spins
    if n > 20:
        raise ValueError("full energy tables are limited to 20 spins")
    J, h = dense_couplings(inst)
    out = np.empty(1 << n)
    chunk = 1 << 14
    for lo in range(0, 1 << n, chunk):
        codes = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        m = (((codes[:, None] >> np.arange(n)) & 1) * 2 - 1).astype(np.float64)
        out[lo:lo + codes.size] = -0.5 * np.einsum("si,si->s", m @ J, m) - m @ h
    return out


def exact_boltzmann(inst, beta: float) -> np.ndarray:
    """Exact Boltzmann distribution over all states at inverse temperature beta."""
    e = state_energies(inst)
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


def exhaustive_ground_energy(inst) -> tuple[float, int]:
    """(minimum energy, code of a minimizer) by enumerating all 2^n states."""
    prob: IsingProblem = inst.problem
    n = prob.num_spins
    if n > 24:
        raise ValueError("exhaustive search is limited to 24 spins")
    J, h = dense_couplings(inst)
    best = np.inf
    best_code = 0
    chunk = 1 << 14
    for lo in range(0, 1 << n, chunk):
        codes = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        m = (((codes[:, None] >> np.arange(n)) & 1) * 2 - 1).astype(np.float64)
        e = -0.5 * np.einsum("si,si->s", m @ J, m) - m @ h
        k = int(np.argmin(e))
        if e[k] < best:
            best = float(e[k])
            best_code = int(codes[k])
    return best, best_code


def fixed_activation(I: float, beta: float, fa: FixedActivation, r_int: int) -> int:
    """Fixed-point p-bit activation.

    r_int must be uniform over the signed total_bits range
    [-2^(total_bits-1), 2^(total_bits-1) - 1]. Inputs beyond the saturation
    grid give a deterministic sign(I).
    """
    x = beta * I
    if fa.saturated(x):
        return 1 if x > 0 else -1
    return 1 if fa.threshold(fa.quantize(x)) > r_int else -1
