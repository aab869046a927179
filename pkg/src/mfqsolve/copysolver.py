"""
Multi-copy mean-field emulation of the quantum nonlinear ODE solver.

A scalar x is carried by the two-component copy vector (1, x). N copies
live in the 2**N dimensional tensor product space, and the interaction
operator

    F = c * sum_i n_i  -  (alpha / P) * sum_i sum_{j<k; j,k != i} n_i s_j s_k

with n = |1><1|, s = |0><1| and P = (N-1)(N-2)/2 acts on it. Contracting
all spectator copies with e0 = (1, 0) reduces F on a product state to the
single-copy update (0, c*x - alpha*x**3), so one step of (1 + dt F)
reproduces forward Euler exactly. Later steps leave the product manifold
and accumulate mean-field error.

The history of all steps is the solution of a block lower-bidiagonal
linear system; solve_history performs its forward substitution, and
assemble_block_system / residual build the explicit system to check it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .baselines import euler
from .errors import ConfigurationError, DomainError, ReadoutSingularError, ResourceError
from .ode import OdeSpec
from .rng import generator

SINGULAR_TOL = 1e-14
# caps on tensor entries: one streamed block, and the explicit block system
STREAM_BUDGET = 2**20
SYSTEM_BUDGET = 2**24


@dataclass(frozen=True)
class CopyEnsembleState:
    n_copies: int
    tensor: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.tensor, dtype=float).reshape(-1)
        if t.size != 2**self.n_copies:
            raise DomainError(f"tensor length {t.size} does not match 2**{self.n_copies}")
        t.flags.writeable = False
        object.__setattr__(self, "tensor", t)

    def __add__(self, other):
        _check_same(self, other)
        return CopyEnsembleState(self.n_copies, self.tensor + other.tensor)

    def __mul__(self, scalar: float):
        return CopyEnsembleState(self.n_copies, scalar * self.tensor)

    __rmul__ = __mul__


def _check_same(a: CopyEnsembleState, b: CopyEnsembleState):
    if a.n_copies != b.n_copies:
        raise DomainError(f"copy count mismatch: {a.n_copies} vs {b.n_copies}")


def _check_copies(n_copies: int, cubic_coeff: float):
    if int(n_copies) != n_copies or n_copies < 1:
        raise ConfigurationError(f"n_copies must be a positive integer, got {n_copies}")
    if cubic_coeff != 0 and n_copies < 3:
        raise ConfigurationError(
            f"a cubic term needs N >= 3 copies (one target plus a spectator pair), got N={n_copies}"
        )
    if 2**n_copies > STREAM_BUDGET:
        raise ResourceError(
            f"N={n_copies} copies need a tensor of dimension 2**{n_copies}, "
            f"above the budget of {STREAM_BUDGET}"
        )


def encode_copy(x: float) -> np.ndarray:
    return np.array([1.0, float(x)])


def encode_ensemble(x: float, n_copies: int, cubic_coeff: float = 0.0) -> CopyEnsembleState:
    _check_copies(n_copies, cubic_coeff)
    v = encode_copy(x)
    t = np.ones(1)
    for _ in range(n_copies):
        t = np.kron(t, v)
    return CopyEnsembleState(n_copies, t)


@dataclass(frozen=True)
class InteractionOperator:
    n_copies: int
    linear_weight: float
    cubic_weight: float

    def __post_init__(self):
        _check_copies(self.n_copies, self.cubic_weight)

    @property
    def pair_count(self) -> int:
        return math.comb(self.n_copies - 1, 2)

    @cached_property
    def linear_terms(self) -> tuple[int, ...]:
        return tuple(range(self.n_copies)) if self.linear_weight != 0 else ()

    @cached_property
    def triple_terms(self) -> tuple[tuple[int, int, int], ...]:
        """(i, j, k) with i the target copy and j < k the lowered spectators, ascending."""
        if self.cubic_weight == 0:
            return ()
        n = self.n_copies
        return tuple(
            (i, j, k) for i in range(n) for j, k in combinations([c for c in range(n) if c != i], 2)
        )

    @property
    def triple_weight(self) -> float:
        return -self.cubic_weight / self.pair_count if self.triple_terms else 0.0

    def apply(self, tensor: np.ndarray) -> np.ndarray:
        """F @ tensor, one structural term at a time in canonical order."""
        n = self.n_copies
        psi = np.asarray(tensor, dtype=float).reshape([2] * n)
        out = np.zeros_like(psi)
        for i in self.linear_terms:
            sel = _index(n, {i: 1})
            out[sel] += self.linear_weight * psi[sel]
        w = self.triple_weight
        for i, j, k in self.triple_terms:
            out[_index(n, {i: 1, j: 0, k: 0})] += w * psi[_index(n, {i: 1, j: 1, k: 1})]
        return out.reshape(-1)

    def sparse_matrix(self) -> sp.csr_matrix:
        """Explicit F from basis-index bit arithmetic, independent of ``apply``."""
        n = self.n_copies
        dim = 2**n
        idx = np.arange(dim)

        def bit(c):
            return (idx >> (n - 1 - c)) & 1

        rows, cols, vals = [], [], []
        if self.linear_weight != 0:
            occ = sum(bit(c) for c in range(n))
            nz = occ > 0
            rows.append(idx[nz])
            cols.append(idx[nz])
            vals.append(self.linear_weight * occ[nz].astype(float))
        w = self.triple_weight
        for i, j, k in self.triple_terms:
            src = idx[(bit(i) == 1) & (bit(j) == 1) & (bit(k) == 1)]
            dst = src & ~((1 << (n - 1 - j)) | (1 << (n - 1 - k)))
            rows.append(dst)
            cols.append(src)
            vals.append(np.full(src.size, w))
        if not rows:
            return sp.csr_matrix((dim, dim))
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        ).tocsr()


def _index(n: int, fixed: dict[int, int]) -> tuple:
    sel = [slice(None)] * n
    for axis, v in fixed.items():
        sel[axis] = v
    return tuple(sel)


def build_interaction(ode: OdeSpec, n_copies: int) -> InteractionOperator:
    return InteractionOperator(n_copies, ode.linear_coeff, ode.cubic_coeff)


def step(state: CopyEnsembleState, op: InteractionOperator, dt: float) -> CopyEnsembleState:
    """One forward-Euler step (1 + dt F) applied to ``state``."""
    if state.n_copies != op.n_copies:
        raise DomainError(f"state has {state.n_copies} copies, operator {op.n_copies}")
    if dt == 0:
        return state
    return CopyEnsembleState(state.n_copies, state.tensor + dt * op.apply(state.tensor))


def marginal(state: CopyEnsembleState, copy_index: int = 0) -> tuple[float, float, float]:
    """Contract every spectator copy with e0; return (s0, s1, s1/s0)."""
    n = state.n_copies
    if not 0 <= copy_index < n:
        raise DomainError(f"copy_index {copy_index} out of range for N={n}")
    psi = state.tensor.reshape([2] * n)
    sel = [0] * n
    sel[copy_index] = slice(None)
    s0, s1 = (float(v) for v in psi[tuple(sel)])
    if abs(s0) < SINGULAR_TOL:
        raise ReadoutSingularError(f"reference component vanished (s0 = {s0!r})")
    return s0, s1, s1 / s0


@dataclass(frozen=True)
class HistoryState:
    blocks: tuple[CopyEnsembleState, ...]
    dt: float = 1.0

    @property
    def n_copies(self) -> int:
        return self.blocks[0].n_copies

    @property
    def steps(self) -> int:
        return len(self.blocks) - 1

    def x_est(self, copy_index: int = 0) -> np.ndarray:
        return np.array([marginal(b, copy_index)[2] for b in self.blocks])

    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.blocks))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([b.tensor for b in self.blocks])

    @classmethod
    def from_vector(cls, vec: np.ndarray, n_copies: int, dt: float = 1.0) -> "HistoryState":
        vec = np.asarray(vec, dtype=float)
        d = 2**n_copies
        if vec.size % d:
            raise DomainError(f"vector length {vec.size} is not a multiple of block size {d}")
        return cls(tuple(CopyEnsembleState(n_copies, vec[i:i + d]) for i in range(0, vec.size, d)), dt)


def solve_history(ode: OdeSpec, n_copies: int) -> HistoryState:
    """Forward substitution through the block history system, block by block."""
    op = build_interaction(ode, n_copies)
    state = encode_ensemble(ode.x0, n_copies, ode.cubic_coeff)
    blocks = [state]
    for _ in range(ode.steps):
        state = step(state, op, ode.dt)
        blocks.append(state)
    return HistoryState(tuple(blocks), ode.dt)


@dataclass(frozen=True)
class BlockHistorySystem:
    matrix: sp.csr_matrix = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    block_dim: int
    n_blocks: int

    def block(self, row: int, col: int) -> sp.csr_matrix:
        d = self.block_dim
        return self.matrix[row * d:(row + 1) * d, col * d:(col + 1) * d]

    def rhs_block(self, row: int) -> np.ndarray:
        d = self.block_dim
        return self.rhs[row * d:(row + 1) * d]


def assemble_block_system(ode: OdeSpec, n_copies: int, budget: int = SYSTEM_BUDGET) -> BlockHistorySystem:
    d = 2**n_copies
    n_blocks = ode.steps + 1
    if n_blocks * d > budget:
        raise ResourceError(
            f"block system of dimension {n_blocks * d} ({n_blocks} blocks of {d}) exceeds budget {budget}"
        )
    op = build_interaction(ode, n_copies)
    propagator = sp.identity(d, format="csr") + ode.dt * op.sparse_matrix()
    a = sp.identity(n_blocks * d, format="csr") - sp.kron(sp.eye(n_blocks, k=-1), propagator)
    rhs = np.zeros(n_blocks * d)
    rhs[:d] = encode_ensemble(ode.x0, n_copies, ode.cubic_coeff).tensor
    return BlockHistorySystem(a.tocsr(), rhs, d, n_blocks)


def residual(system: BlockHistorySystem, candidate: HistoryState) -> float:
    vec = candidate.as_vector()
    if vec.size != system.rhs.size:
        raise DomainError(f"candidate has dimension {vec.size}, system {system.rhs.size}")
    return float(np.linalg.norm(system.matrix @ vec - system.rhs))


def sample_readout(state: CopyEnsembleState, copy_index: int, shots: int, seed: int = 0) -> float:
    """Estimate |x| of one copy from Born sampling of its normalised marginal.

    Only moduli are observable, so the sign of x is lost.
    """
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    s0, s1, _ = marginal(state, copy_index)
    p1 = s1**2 / (s0**2 + s1**2)
    ones = int(generator(seed).binomial(shots, p1))
    zeros = shots - ones
    if zeros == 0:
        raise ReadoutSingularError("no shot landed on the reference outcome")
    return math.sqrt(ones / zeros)


def deviation_profile(ode: OdeSpec, n_copies: int, copy_index: int = 0) -> list[tuple[int, float]]:
    """Per-step |x_quantum - x_euler| against classical forward Euler."""
    xq = solve_history(ode, n_copies).x_est(copy_index)
    xe = euler(ode).x
    return [(k, float(abs(q - e))) for k, (q, e) in enumerate(zip(xq, xe))]
