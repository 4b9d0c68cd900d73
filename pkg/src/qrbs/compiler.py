"""Lowers rule networks onto the reversible gate set.

Each boolean connective becomes a fixed gate block writing into a fresh
ancilla qubit: conjunction is one CCNOT, disjunction is two CNOTs plus a
CCNOT, negation copies then flips. Wider chains fold left to right from
the two-input blocks. Input qubits are only ever used as controls, so
input values survive the run; intermediate ancillae are not uncomputed
(circuits are single feed-forward passes measured at the end, so garbage
qubits are harmless and uncomputation would only inflate gate count).

With subexpression sharing on (the default), structurally identical
subexpressions — compared after flattening associative chains — reuse
one result qubit instead of recomputing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .circuit import CCNOT, CNOT, Circuit, Gate, Measure, X
from .errors import CompileError, NetworkError
from .rules import (
    And,
    Atom,
    BoolExpr,
    Implies,
    Not,
    Or,
    RuleNetwork,
    evaluate_network,
    ordered_rules,
)
from .simulator import run

__all__ = [
    "CompileContext",
    "CompileOptions",
    "CompiledCircuit",
    "Mismatch",
    "VerificationReport",
    "compile_expr",
    "compile_network",
    "verify_compilation",
]


@dataclass(frozen=True)
class CompileOptions:
    """Compilation policy knobs.

    ``share_subexpressions``: reuse result qubits for structurally
    identical subexpressions. ``measure_inputs_directly``: an output
    fact that resolves to a bare input (or a single-literal chain of
    rules) is measured from its source qubit instead of being copied to
    a fresh ancilla first. ``ancilla_budget``: hard cap on extra qubits,
    or None for unlimited.
    """

    share_subexpressions: bool = True
    measure_inputs_directly: bool = True
    ancilla_budget: int | None = None


class CompileContext:
    """Fact-to-qubit bindings, ancilla allocation and the emitted gate list."""

    def __init__(
        self, fact_qubits: Mapping[str, int], first_ancilla: int, options: CompileOptions
    ):
        self.fact_qubits: dict[str, int] = dict(fact_qubits)
        self.options = options
        self.gates: list[Gate] = []
        self._first_ancilla = first_ancilla
        self._next = first_ancilla
        self._memo: dict[tuple, int] = {}

    @property
    def num_qubits(self) -> int:
        return self._next

    @property
    def ancilla_count(self) -> int:
        return self._next - self._first_ancilla

    def fresh(self) -> int:
        budget = self.options.ancilla_budget
        if budget is not None and self.ancilla_count >= budget:
            raise CompileError(f"ancilla budget of {budget} exceeded")
        qubit = self._next
        self._next += 1
        return qubit

    def _shared(self, key: tuple) -> int | None:
        if self.options.share_subexpressions:
            return self._memo.get(key)
        return None


def compile_expr(expr: BoolExpr, context: CompileContext) -> int:
    """Emit gates computing ``expr`` and return the qubit holding the result."""
    match expr:
        case Atom(name):
            if name not in context.fact_qubits:
                raise NetworkError(f"atom {name!r} is not bound to a qubit")
            return context.fact_qubits[name]
        case Not(operand):
            source = compile_expr(operand, context)
            key = ("not", source)
            if (hit := context._shared(key)) is not None:
                return hit
            target = context.fresh()
            context.gates.append(CNOT(source, target))
            context.gates.append(X(target))
            context._memo[key] = target
            return target
        case And() | Or():
            kind = "and" if isinstance(expr, And) else "or"
            operands = _flatten(expr, type(expr))
            qubits = [compile_expr(op, context) for op in operands]
            result = qubits[0]
            for qubit in qubits[1:]:
                result = _emit_pair(kind, result, qubit, context)
            return result
        case Implies(left, right):
            return compile_expr(Or(Not(left), right), context)
    raise TypeError(f"not a boolean expression: {expr!r}")


def _flatten(expr: BoolExpr, cls: type) -> list[BoolExpr]:
    if isinstance(expr, cls):
        return _flatten(expr.left, cls) + _flatten(expr.right, cls)
    return [expr]


def _emit_pair(kind: str, qa: int, qb: int, context: CompileContext) -> int:
    if qa == qb:
        return qa  # x & x == x | x == x
    key = (kind, qa, qb)
    if (hit := context._shared(key)) is not None:
        return hit
    target = context.fresh()
    if kind == "and":
        context.gates.append(CCNOT(qa, qb, target))
    else:
        context.gates.append(CNOT(qa, target))
        context.gates.append(CNOT(qb, target))
        context.gates.append(CCNOT(qa, qb, target))
    context._memo[key] = target
    return target


@dataclass
class CompiledCircuit:
    """A lowered network: the circuit plus its qubit and bit assignments."""

    circuit: Circuit
    input_map: dict[str, int]
    output_map: dict[str, tuple[int, int]]  # fact -> (qubit measured, classical bit)
    ancilla_count: int

    def metadata(self) -> dict:
        """JSON-friendly summary (widths, maps, labels, gate tallies)."""
        from .circuit import gate_counts

        return {
            "num_qubits": self.circuit.num_qubits,
            "num_clbits": self.circuit.num_clbits,
            "ancilla_count": self.ancilla_count,
            "input_map": dict(self.input_map),
            "output_map": {f: list(qc) for f, qc in self.output_map.items()},
            "qubit_labels": {str(k): v for k, v in sorted(self.circuit.qubit_labels.items())},
            "clbit_labels": {str(k): v for k, v in sorted(self.circuit.clbit_labels.items())},
            "gate_counts": gate_counts(self.circuit),
        }


def compile_network(
    network: RuleNetwork, options: CompileOptions | None = None
) -> CompiledCircuit:
    """Lower a rule network to a reversible circuit.

    Input facts take qubits 0..k-1 in declaration order, ancillae follow,
    and each output fact is measured into the classical bit matching its
    position in the output declaration. Deterministic: identical network
    and options give an identical gate list.
    """
    options = options or CompileOptions()
    input_map = {fact: i for i, fact in enumerate(network.input_facts)}
    context = CompileContext(input_map, len(network.input_facts), options)
    result_facts: dict[int, str] = {}
    for rule in ordered_rules(network):
        qubit = compile_expr(rule.antecedent, context)
        context.fact_qubits[rule.consequent] = qubit
        result_facts.setdefault(qubit, rule.consequent)

    num_inputs = len(network.input_facts)
    measure_plan: list[tuple[str, int]] = []
    for fact in network.outputs:
        qubit = context.fact_qubits[fact]
        if qubit < num_inputs and not options.measure_inputs_directly:
            copy = context.fresh()
            context.gates.append(CNOT(qubit, copy))
            result_facts.setdefault(copy, fact)
            qubit = copy
        measure_plan.append((fact, qubit))

    qubit_labels = {i: fact for fact, i in input_map.items()}
    qubit_labels.update({q: f for q, f in result_facts.items() if q >= num_inputs})
    clbit_labels = {i: fact for i, (fact, _) in enumerate(measure_plan)}
    circuit = Circuit(context.num_qubits, len(network.outputs), qubit_labels, clbit_labels)
    circuit.extend(context.gates)
    output_map: dict[str, tuple[int, int]] = {}
    for clbit, (fact, qubit) in enumerate(measure_plan):
        circuit.append(Measure(qubit, clbit))
        output_map[fact] = (qubit, clbit)
    return CompiledCircuit(circuit, input_map, output_map, context.ancilla_count)


# ---------------------------------------------------------------------------
# Verification against the classical evaluator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mismatch:
    assignment: tuple[tuple[str, int], ...]
    fact: str
    expected: int
    actual: int


@dataclass(frozen=True)
class VerificationReport:
    assignments_checked: int
    mismatches: tuple[Mismatch, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __str__(self) -> str:
        if self.ok:
            return f"verified {self.assignments_checked} assignments, no mismatches"
        lines = [
            f"{len(self.mismatches)} mismatches over {self.assignments_checked} assignments:"
        ]
        for m in self.mismatches:
            given = ", ".join(f"{fact}={bit}" for fact, bit in m.assignment)
            lines.append(f"  [{given}] {m.fact}: expected {m.expected}, got {m.actual}")
        return "\n".join(lines)


def verify_compilation(
    network: RuleNetwork,
    compiled: CompiledCircuit,
    max_inputs: int = 16,
    assignments: Iterable[Mapping[str, int]] | None = None,
) -> VerificationReport:
    """Compare circuit semantics against forward evaluation.

    By default every one of the ``2^k`` input assignments is checked
    (``k`` capped at ``max_inputs``); pass ``assignments`` to check a
    chosen subset instead. Ancillae start at 0, as in a real run.
    """
    facts = network.input_facts
    if assignments is None:
        if len(facts) > max_inputs:
            raise CompileError(
                f"exhaustive verification capped at {max_inputs} inputs, got {len(facts)}"
            )
        assignments = (
            {fact: word >> i & 1 for i, fact in enumerate(facts)}
            for word in range(1 << len(facts))
        )

    mismatches: list[Mismatch] = []
    checked = 0
    for assignment in assignments:
        checked += 1
        expected = evaluate_network(network, assignment)
        initial = 0
        for fact, bit in assignment.items():
            if bit:
                initial |= 1 << compiled.input_map[fact]
        result = run(compiled.circuit, initial, engine="fast")
        for fact, (_, clbit) in compiled.output_map.items():
            if result.bits[clbit] != expected[fact]:
                mismatches.append(
                    Mismatch(
                        tuple(sorted(assignment.items())),
                        fact,
                        expected[fact],
                        result.bits[clbit],
                    )
                )
    return VerificationReport(checked, tuple(mismatches))
