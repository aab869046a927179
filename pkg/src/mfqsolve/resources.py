"""Hardware resource arithmetic for the history-state solver.

Matrix sizes are astronomically large, so they are only ever held as
logarithms.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from decimal import Decimal

from .errors import DomainError

LN10_OVER_LN2 = math.log2(10)

# Lorenz-63 scenario: 3 variables, 100 steps, ~100 ancillas, 1e29 gates at 1 ns
LORENZ = dict(n_vars=3, steps=100, ancilla=100, depth=1e29, gate_time_s=1e-9)
# figures printed alongside the scenario
PRINTED = dict(log10_matrix_size=200.0, state_qubits=655, runtime_s=1e20, infidelity=1e-29)
NWP_VARIABLES = 1e9
PRINTED_NWP_QUBITS = 30


def matrix_size(n_vars: int, steps: int) -> tuple[float, float]:
    """(log10, log2) of (n_vars * steps) ** steps."""
    if n_vars < 1 or steps < 1:
        raise DomainError(f"n_vars and steps must be >= 1, got {n_vars}, {steps}")
    base = n_vars * steps
    return steps * math.log10(base), steps * math.log2(base)


def qubit_count(log2_size: float, ancilla: int = 0) -> tuple[int, int]:
    if log2_size < 0 or ancilla < 0:
        raise DomainError("log2_size and ancilla must be non-negative")
    state = math.ceil(log2_size)
    return state, state + int(ancilla)


def runtime(depth: float, gate_time_s: float) -> float:
    if depth <= 0 or gate_time_s <= 0:
        raise DomainError("depth and gate_time_s must be positive")
    return depth * gate_time_s


def fidelity_requirement(depth: float) -> tuple[float, float]:
    """Per-gate fidelity 1 - 1/depth, returned as the pair (1, infidelity).

    The infidelity is divided in decimal on the shortest repr of ``depth``
    so that round inputs such as 1e29 give exactly 1e-29.
    """
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    return 1.0, float(Decimal(1) / Decimal(repr(float(depth))))


@dataclass(frozen=True)
class ResourceEstimate:
    log10_matrix_size: float
    log2_matrix_size: float
    state_qubits: int
    ancilla_qubits: int
    total_qubits: int
    circuit_depth: float
    gate_time_s: float
    runtime_s: float
    infidelity: float

    @property
    def fidelity_requirement(self) -> float:
        return 1.0 - self.infidelity

    def to_dict(self) -> dict:
        return asdict(self)


def estimate(n_vars: int, steps: int, ancilla: int, depth: float, gate_time_s: float) -> ResourceEstimate:
    log10, log2 = matrix_size(n_vars, steps)
    state, total = qubit_count(log2, ancilla)
    return ResourceEstimate(
        log10_matrix_size=log10,
        log2_matrix_size=log2,
        state_qubits=state,
        ancilla_qubits=int(ancilla),
        total_qubits=total,
        circuit_depth=float(depth),
        gate_time_s=float(gate_time_s),
        runtime_s=runtime(depth, gate_time_s),
        infidelity=fidelity_requirement(depth)[1],
    )


def nwp_state_qubits(n_variables: float = NWP_VARIABLES) -> int:
    """Qubits to amplitude-encode a model state with ``n_variables`` entries."""
    return qubit_count(math.log2(n_variables))[0]


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    computed: object
    paper_printed: object = None


def report(est: ResourceEstimate, lorenz: bool = False) -> list[ReportRow]:
    """Table rows for an estimate; the Lorenz scenario adds the printed figures.

    For that scenario the printed chain rounds (3*100)**100 to 10**200, so the
    qubit count is shown three ways: exact formula, via 10**200, and as printed.
    """
    p = PRINTED if lorenz else {}
    rows = [
        ReportRow("log10_matrix_size", est.log10_matrix_size, p.get("log10_matrix_size")),
        ReportRow("log2_matrix_size", est.log2_matrix_size),
        ReportRow("state_qubits", est.state_qubits, p.get("state_qubits")),
    ]
    if lorenz:
        via_printed_size = qubit_count(PRINTED["log10_matrix_size"] * LN10_OVER_LN2)[0]
        rows.append(ReportRow("state_qubits_from_10^200", via_printed_size, PRINTED["state_qubits"]))
    rows += [
        ReportRow("ancilla_qubits", est.ancilla_qubits, est.ancilla_qubits if lorenz else None),
        ReportRow("total_qubits", est.total_qubits, p.get("total_qubits")),
        ReportRow("circuit_depth", est.circuit_depth, est.circuit_depth if lorenz else None),
        ReportRow("gate_time_s", est.gate_time_s, est.gate_time_s if lorenz else None),
        ReportRow("runtime_s", est.runtime_s, p.get("runtime_s")),
        ReportRow("infidelity", est.infidelity, p.get("infidelity")),
        ReportRow("nwp_state_qubits_1e9_vars", nwp_state_qubits(), PRINTED_NWP_QUBITS),
    ]
    return rows


def is_lorenz(n_vars, steps, ancilla, depth, gate_time_s) -> bool:
    return (n_vars, steps, ancilla, depth, gate_time_s) == tuple(LORENZ.values())


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_table(rows: list[ReportRow]) -> str:
    header = ("quantity", "computed", "paper_printed")
    body = [(r.quantity, _cell(r.computed), _cell(r.paper_printed)) for r in rows]
    widths = [max(len(x[i]) for x in [header, *body]) for i in range(3)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [header, *body]]
    return "\n".join(lines) + "\n"


def report_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "computed", "paper_printed"])
    for r in rows:
        w.writerow([r.quantity, _cell(r.computed), _cell(r.paper_printed)])
    return buf.getvalue()
