"""Reversible-circuit intermediate representation.

The gate set is {X, CNOT, CCNOT} plus terminal measurement, so every
circuit acts as a permutation of computational basis states. That keeps
a brute-force permutation oracle tractable (:func:`as_permutation`),
which the compiler's correctness tests lean on. Circuits export to an
OpenQASM 2.0 subset and import back losslessly.

Qubit ``k`` corresponds to bit ``k`` of a basis index (q0 is least
significant); classical bits follow the same convention.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import CircuitError, QasmError

__all__ = [
    "X",
    "CNOT",
    "CCNOT",
    "Measure",
    "Gate",
    "Circuit",
    "as_permutation",
    "export_qasm",
    "gate_counts",
    "gate_qubits",
    "import_qasm",
]


@dataclass(frozen=True)
class X:
    target: int

    def __post_init__(self) -> None:
        if self.target < 0:
            raise CircuitError("negative qubit index")


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def __post_init__(self) -> None:
        if min(self.control, self.target) < 0:
            raise CircuitError("negative qubit index")
        if self.control == self.target:
            raise CircuitError(f"control equals target (qubit {self.target})")


@dataclass(frozen=True)
class CCNOT:
    control1: int
    control2: int
    target: int

    def __post_init__(self) -> None:
        qubits = (self.control1, self.control2, self.target)
        if min(qubits) < 0:
            raise CircuitError("negative qubit index")
        if len(set(qubits)) != 3:
            raise CircuitError(f"controls and target must be pairwise distinct, got {qubits}")


@dataclass(frozen=True)
class Measure:
    qubit: int
    clbit: int

    def __post_init__(self) -> None:
        if self.qubit < 0 or self.clbit < 0:
            raise CircuitError("negative index")


Gate = X | CNOT | CCNOT | Measure


def gate_qubits(gate: Gate) -> tuple[int, ...]:
    match gate:
        case X(target):
            return (target,)
        case CNOT(control, target):
            return (control, target)
        case CCNOT(control1, control2, target):
            return (control1, control2, target)
        case Measure(qubit, _):
            return (qubit,)
    raise TypeError(f"not a gate: {gate!r}")


class Circuit:
    """Ordered gate list over ``num_qubits`` qubits and ``num_clbits`` classical bits.

    Structural invariants enforced on :meth:`append`: indices in range,
    no unitary gate touching a qubit after it was measured, and each
    classical bit written by at most one measurement. Labels are
    metadata only and never affect behaviour.
    """

    def __init__(
        self,
        num_qubits: int,
        num_clbits: int = 0,
        qubit_labels: Mapping[int, str] | None = None,
        clbit_labels: Mapping[int, str] | None = None,
    ):
        if num_qubits < 0 or num_clbits < 0:
            raise CircuitError("register sizes must be non-negative")
        self.num_qubits = num_qubits
        self.num_clbits = num_clbits
        self.gates: list[Gate] = []
        self.qubit_labels: dict[int, str] = dict(qubit_labels or {})
        self.clbit_labels: dict[int, str] = dict(clbit_labels or {})
        self._measured: set[int] = set()
        self._written_clbits: set[int] = set()

    def append(self, gate: Gate) -> "Circuit":
        for qubit in gate_qubits(gate):
            if qubit >= self.num_qubits:
                raise CircuitError(
                    f"qubit {qubit} out of range for a {self.num_qubits}-qubit circuit"
                )
        if isinstance(gate, Measure):
            if gate.clbit >= self.num_clbits:
                raise CircuitError(
                    f"classical bit {gate.clbit} out of range "
                    f"({self.num_clbits} classical bits)"
                )
            if gate.clbit in self._written_clbits:
                raise CircuitError(f"classical bit {gate.clbit} already written")
            self._written_clbits.add(gate.clbit)
            self._measured.add(gate.qubit)
        else:
            touched = self._measured.intersection(gate_qubits(gate))
            if touched:
                raise CircuitError(
                    f"unitary gate on qubit {min(touched)} after it was measured"
                )
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for gate in gates:
            self.append(gate)
        return self

    def copy(self) -> "Circuit":
        other = Circuit(self.num_qubits, self.num_clbits, self.qubit_labels, self.clbit_labels)
        other.extend(self.gates)
        return other

    def reversed(self) -> "Circuit":
        """Gates in reverse order; undoes the circuit (every gate is an involution)."""
        if self._measured:
            raise CircuitError("cannot reverse a circuit that contains measurements")
        other = Circuit(self.num_qubits, self.num_clbits, self.qubit_labels, self.clbit_labels)
        other.extend(reversed(self.gates))
        return other

    def __len__(self) -> int:
        return len(self.gates)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.num_qubits == other.num_qubits
            and self.num_clbits == other.num_clbits
            and self.gates == other.gates
        )

    def __repr__(self) -> str:
        return (
            f"Circuit(num_qubits={self.num_qubits}, num_clbits={self.num_clbits}, "
            f"gates={len(self.gates)})"
        )


def as_permutation(circuit: Circuit, max_qubits: int = 16) -> np.ndarray:
    """The circuit's action on every basis index; measurements are ignored.

    Entry ``i`` is where basis state ``i`` ends up. Valid because X,
    CNOT and CCNOT map basis states to basis states.
    """
    n = circuit.num_qubits
    if n > max_qubits:
        raise CircuitError(f"permutation oracle capped at {max_qubits} qubits, got {n}")
    perm = np.arange(1 << n, dtype=np.int64)
    for gate in circuit.gates:
        match gate:
            case X(target):
                perm ^= 1 << target
            case CNOT(control, target):
                perm ^= ((perm >> control) & 1) << target
            case CCNOT(control1, control2, target):
                perm ^= ((perm >> control1) & (perm >> control2) & 1) << target
            case Measure():
                pass
    return perm


def gate_counts(circuit: Circuit) -> dict:
    """Tallies per gate kind plus width summary; JSON-friendly."""
    counts = {"x": 0, "cx": 0, "ccx": 0, "measure": 0}
    for gate in circuit.gates:
        match gate:
            case X():
                counts["x"] += 1
            case CNOT():
                counts["cx"] += 1
            case CCNOT():
                counts["ccx"] += 1
            case Measure():
                counts["measure"] += 1
    counts["total"] = len(circuit.gates)
    counts["num_qubits"] = circuit.num_qubits
    counts["num_clbits"] = circuit.num_clbits
    return counts


# ---------------------------------------------------------------------------
# OpenQASM 2.0 subset interchange
# ---------------------------------------------------------------------------


def export_qasm(circuit: Circuit) -> str:
    """Serialize to the OpenQASM 2.0 subset {x, cx, ccx, measure}.

    Output is deterministic, LF-terminated, one statement per line.
    """
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.num_qubits}];"]
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for gate in circuit.gates:
        match gate:
            case X(target):
                lines.append(f"x q[{target}];")
            case CNOT(control, target):
                lines.append(f"cx q[{control}],q[{target}];")
            case CCNOT(control1, control2, target):
                lines.append(f"ccx q[{control1}],q[{control2}],q[{target}];")
            case Measure(qubit, clbit):
                lines.append(f"measure q[{qubit}] -> c[{clbit}];")
    return "\n".join(lines) + "\n"


_QASM_REG_RE = re.compile(r"(qreg|creg)\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]\Z")
_QASM_REF_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]\Z")
_QASM_GATE_RE = re.compile(r"(x|cx|ccx)\s+(.+)\Z")
_QASM_MEASURE_RE = re.compile(r"measure\s+(.+?)\s*->\s*(.+)\Z")


def import_qasm(text: str) -> Circuit:
    """Parse the exporter's OpenQASM subset back into a :class:`Circuit`."""
    qreg: tuple[str, int] | None = None
    creg: tuple[str, int] | None = None
    pending: list[Gate] = []

    def qubit_ref(token: str) -> int:
        match = _QASM_REF_RE.match(token.strip())
        if not match or qreg is None or match.group(1) != qreg[0]:
            raise QasmError(f"bad qubit reference {token.strip()!r}")
        return int(match.group(2))

    def clbit_ref(token: str) -> int:
        match = _QASM_REF_RE.match(token.strip())
        if not match or creg is None or match.group(1) != creg[0]:
            raise QasmError(f"bad classical bit reference {token.strip()!r}")
        return int(match.group(2))

    statements = []
    for raw in text.splitlines():
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        statements.extend(part.strip() for part in line.split(";") if part.strip())

    if not statements or statements[0] != "OPENQASM 2.0":
        raise QasmError("missing OPENQASM 2.0 header")
    for statement in statements[1:]:
        if statement.startswith("include"):
            continue
        reg = _QASM_REG_RE.match(statement)
        if reg:
            kind, name, size = reg.group(1), reg.group(2), int(reg.group(3))
            if kind == "qreg":
                if qreg is not None:
                    raise QasmError("multiple quantum registers are not supported")
                qreg = (name, size)
            else:
                if creg is not None:
                    raise QasmError("multiple classical registers are not supported")
                creg = (name, size)
            continue
        gate = _QASM_GATE_RE.match(statement)
        if gate:
            args = [qubit_ref(a) for a in gate.group(2).split(",")]
            name = gate.group(1)
            if name == "x" and len(args) == 1:
                pending.append(X(args[0]))
            elif name == "cx" and len(args) == 2:
                pending.append(CNOT(args[0], args[1]))
            elif name == "ccx" and len(args) == 3:
                pending.append(CCNOT(args[0], args[1], args[2]))
            else:
                raise QasmError(f"wrong argument count in {statement!r}")
            continue
        measure = _QASM_MEASURE_RE.match(statement)
        if measure:
            pending.append(Measure(qubit_ref(measure.group(1)), clbit_ref(measure.group(2))))
            continue
        raise QasmError(f"unsupported statement {statement!r}")

    if qreg is None:
        raise QasmError("no quantum register declared")
    circuit = Circuit(qreg[1], creg[1] if creg else 0)
    circuit.extend(pending)
    return circuit
