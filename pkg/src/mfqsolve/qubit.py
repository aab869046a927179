"""
Minimal statevector simulator.

Basis ordering is big-endian: qubit 0 is the most significant bit of the
basis index, so for two qubits the amplitudes are listed as
|00>, |01>, |10>, |11>.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .rng import generator

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
MAX_QUBITS = 20


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_qubits > MAX_QUBITS:
            raise DomainError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.n_qubits:
            raise ValidationError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.size}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalised (norm = {norm!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Iterable[complex]) -> "StateVector":
        amps = np.asarray(list(amplitudes), dtype=complex)
        n = int(round(math.log2(amps.size))) if amps.size else 0
        return cls(n, amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def kron(self, other: "StateVector") -> "StateVector":
        return StateVector(self.n_qubits + other.n_qubits, np.kron(self.amplitudes, other.amplitudes))

    def to_csv(self) -> str:
        """Serialise as ``index,re,im`` rows in ascending index order."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "re", "im"])
        for i, a in enumerate(self.amplitudes):
            w.writerow([i, repr(float(a.real)), repr(float(a.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StateVector":
        rows = list(csv.DictReader(io.StringIO(text)))
        rows.sort(key=lambda r: int(r["index"]))
        if [int(r["index"]) for r in rows] != list(range(len(rows))):
            raise ValidationError("state dump indices must be 0..2^n-1 without gaps")
        return cls.from_amplitudes(complex(float(r["re"]), float(r["im"])) for r in rows)


@dataclass(frozen=True)
class Gate:
    name: str
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape not in ((2, 2), (4, 4)):
            raise ValidationError(f"gate {self.name!r} must be 2x2 or 4x4, got shape {m.shape}")
        if not np.allclose(m @ m.conj().T, np.eye(m.shape[0]), rtol=0.0, atol=UNITARY_TOL):
            raise ValidationError(f"gate {self.name!r} is not unitary")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return 1 if self.matrix.shape[0] == 2 else 2


_S = 1 / math.sqrt(2)

I = Gate("I", np.eye(2))
X = Gate("X", [[0, 1], [1, 0]])
Z = Gate("Z", [[1, 0], [0, -1]])
H = Gate("H", [[_S, _S], [_S, -_S]])
# control = first target, flipped qubit = second target
CX = Gate("CX", [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
SWAP = Gate("SWAP", [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])


def rotation(theta: float, phi: float, lam: float = 0.0) -> Gate:
    """General single-qubit unitary U3(theta, phi, lam)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    m = [
        [c, -np.exp(1j * lam) * s],
        [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
    ]
    return Gate("U3", m)


def basis_state(n_qubits: int, index: int) -> StateVector:
    if n_qubits < 1 or n_qubits > MAX_QUBITS:
        raise DomainError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    if not 0 <= index < 2**n_qubits:
        raise DomainError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def plus_state() -> StateVector:
    return StateVector(1, [_S, _S])


def minus_state() -> StateVector:
    return StateVector(1, [_S, -_S])


def apply_gate(state: StateVector, gate: Gate, targets: Sequence[int]) -> StateVector:
    """Apply ``gate`` to the qubits listed in ``targets`` (in gate order)."""
    targets = [int(t) for t in targets]
    n = state.n_qubits
    if len(targets) != gate.arity:
        raise DomainError(f"gate {gate.name} acts on {gate.arity} qubit(s), got targets {targets}")
    if len(set(targets)) != len(targets):
        raise DomainError(f"repeated target qubit in {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise DomainError(f"target out of range for {n} qubits: {targets}")

    k = gate.arity
    psi = state.amplitudes.reshape([2] * n)
    u = gate.matrix.reshape([2] * (2 * k))
    # contract the gate's input legs with the target axes, then put the
    # output legs back where the targets were
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), targets))
    out = np.moveaxis(out, list(range(k)), targets)
    return StateVector(n, out.reshape(-1))


def bell_circuit() -> StateVector:
    psi = basis_state(2, 0)
    psi = apply_gate(psi, H, [0])
    return apply_gate(psi, CX, [0, 1])


@dataclass(frozen=True)
class MeasurementRecord:
    shots: int
    counts: dict[int, int]

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValidationError("counts do not sum to shots")

    def frequency(self, index: int) -> float:
        return self.counts.get(index, 0) / self.shots


def measure(state: StateVector, shots: int, seed: int = 0) -> MeasurementRecord:
    """Born-rule sampling of ``shots`` computational-basis outcomes."""
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    p = state.probabilities
    p = p / p.sum()
    drawn = generator(seed).multinomial(shots, p)
    counts = {int(i): int(c) for i, c in enumerate(drawn) if c}
    return MeasurementRecord(int(shots), counts)


def bloch_coords(state: StateVector) -> tuple[float, float]:
    """Polar and azimuthal angle of a single-qubit state.

    The global phase is fixed so that the |0> amplitude is real and
    non-negative; when the |1> amplitude vanishes the azimuth is set to 0.
    """
    if state.n_qubits != 1:
        raise DomainError(f"bloch_coords needs a single qubit, got {state.n_qubits}")
    a, b = state.amplitudes
    if abs(a) > 0:
        b = b * np.conj(a) / abs(a)
    theta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(b) < NORM_TOL or abs(a) < NORM_TOL:
        # azimuth undefined at the poles
        return theta, 0.0
    phi = math.atan2(b.imag, b.real) % (2 * math.pi)
    if phi >= 2 * math.pi:
        phi = 0.0
    return theta, phi


def from_bloch(theta: float, phi: float) -> StateVector:
    return StateVector(1, [math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)])


def product_test(state: StateVector) -> float:
    """|c1 c4 - c2 c3| for a two-qubit state; zero exactly for product states."""
    if state.n_qubits != 2:
        raise DomainError(f"product_test needs two qubits, got {state.n_qubits}")
    a = state.amplitudes
    # c1=|0>|0>, c2=|1>|0>, c3=|0>|1>, c4=|1>|1>
    c1, c2, c3, c4 = a[0], a[2], a[1], a[3]
    return float(abs(c1 * c4 - c2 * c3))
