"""Categorical differential diagnosis over attribute complexes.

A *complex* is a full truth assignment over all symptoms (or over all
diagnoses), named by the integer it spells with the first attribute as
the most significant bit: with three symptoms, ``S5`` is ``(1, 0, 1)``.
The expanded logic base pairs every symptom complex with every diagnosis
complex; constraint rules then discard the pairs that contradict domain
knowledge, leaving the reduced logic base. Diagnosis is a lookup: the
compatible diagnosis complexes for an observed symptom complex, summed
up per disease as present / absent / uncertain.

Constraint files reuse the rule DSL plus the ``=>`` operator and
``symptoms:`` / ``diagnoses:`` declarations::

    symptoms: s1, s2
    diagnoses: d1, d2
    rule R2: d2 => s1

``rule: any_symptom_implies_diagnosis`` is shorthand for the common
"symptoms require some diagnosis" constraint
``(s1 | ... | sn) => (d1 | ... | dm)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .errors import DslSyntaxError, NetworkError
from .rules import (
    Atom,
    BoolExpr,
    Implies,
    Or,
    _ExprParser,
    _lines,
    _parse_name_list,
    _parse_rule_head,
    atom_names,
    evaluate_expr,
)

__all__ = [
    "MAX_TOTAL_ATTRIBUTES",
    "ANY_SYMPTOM_SHORTHAND",
    "Complex",
    "LogicBase",
    "ConstraintRule",
    "ConstraintSet",
    "Presence",
    "Verdict",
    "build_elb",
    "complex_index",
    "diagnose",
    "index_to_complex",
    "parse_constraints",
    "reduce_to_rlb",
]

# Enumeration is exponential in the attribute count by design; cap it.
MAX_TOTAL_ATTRIBUTES = 20

ANY_SYMPTOM_SHORTHAND = "any_symptom_implies_diagnosis"


def complex_index(bits: Sequence[int]) -> int:
    """Integer value of a bit vector, first attribute most significant."""
    index = 0
    for bit in bits:
        if bit not in (0, 1):
            raise ValueError(f"complex bits must be 0 or 1, got {bit!r}")
        index = index << 1 | bit
    return index


def index_to_complex(index: int, n: int) -> "Complex":
    """Inverse of :func:`complex_index` for ``n`` attributes."""
    if n < 1:
        raise ValueError("a complex needs at least one attribute")
    if not 0 <= index < 1 << n:
        raise ValueError(f"index {index} out of range for {n} attributes")
    return Complex(tuple((index >> (n - 1 - i)) & 1 for i in range(n)))


@dataclass(frozen=True)
class Complex:
    """One full truth assignment over a set of attributes."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits:
            raise ValueError("a complex needs at least one attribute")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("complex bits must be 0 or 1")

    @classmethod
    def from_index(cls, index: int, n: int) -> "Complex":
        return index_to_complex(index, n)

    @property
    def index(self) -> int:
        return complex_index(self.bits)

    def label(self, prefix: str) -> str:
        return f"{prefix}{self.index}"


@dataclass(frozen=True)
class LogicBase:
    """An ordered set of (symptom complex, diagnosis complex) pairs."""

    n_symptoms: int
    n_diagnoses: int
    pairs: tuple[tuple[Complex, Complex], ...]

    def __post_init__(self) -> None:
        for symptom, diagnosis in self.pairs:
            if len(symptom.bits) != self.n_symptoms or len(diagnosis.bits) != self.n_diagnoses:
                raise ValueError("logic-base pair has inconsistent dimensions")
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("duplicate pair in logic base")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[Complex, Complex]]:
        return iter(self.pairs)

    def __contains__(self, pair: tuple[Complex, Complex]) -> bool:
        return pair in set(self.pairs)

    def labels(self) -> tuple[str, ...]:
        return tuple(s.label("S") + d.label("D") for s, d in self.pairs)


def build_elb(
    n_symptoms: int, n_diagnoses: int, max_attributes: int = MAX_TOTAL_ATTRIBUTES
) -> LogicBase:
    """The expanded logic base: every symptom/diagnosis complex pairing.

    Pairs are ordered diagnosis-major: all symptom complexes under D0,
    then all under D1, and so on.
    """
    if n_symptoms < 1 or n_diagnoses < 1:
        raise ValueError("need at least one symptom and one diagnosis")
    if n_symptoms + n_diagnoses > max_attributes:
        raise ValueError(
            f"{n_symptoms + n_diagnoses} attributes exceeds the cap of {max_attributes}"
        )
    pairs = tuple(
        (index_to_complex(s, n_symptoms), index_to_complex(d, n_diagnoses))
        for d in range(1 << n_diagnoses)
        for s in range(1 << n_symptoms)
    )
    return LogicBase(n_symptoms, n_diagnoses, pairs)


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintRule:
    """A boolean formula every surviving pair must satisfy."""

    expr: BoolExpr
    name: str | None = None


@dataclass(frozen=True)
class ConstraintSet:
    """Parsed constraint file: optional declarations plus rule entries.

    An entry with a ``None`` expression is the any-symptom shorthand; it
    expands when the attribute names are known (see :meth:`resolve`).
    """

    symptoms: tuple[str, ...] | None
    diagnoses: tuple[str, ...] | None
    entries: tuple[tuple[str | None, BoolExpr | None], ...]

    def resolve(
        self, n_symptoms: int | None = None, n_diagnoses: int | None = None
    ) -> tuple[tuple[str, ...], tuple[str, ...], tuple[ConstraintRule, ...]]:
        """Fix attribute names and expand shorthands.

        Declared names win; counts passed in must agree with them. With
        no declaration the names default to ``s1..sN`` / ``d1..dM``.
        """
        symptoms = _resolve_names(self.symptoms, n_symptoms, "s", "symptoms")
        diagnoses = _resolve_names(self.diagnoses, n_diagnoses, "d", "diagnoses")
        rules = []
        for name, expr in self.entries:
            if expr is None:
                expr = Implies(_any_of(symptoms), _any_of(diagnoses))
            rules.append(ConstraintRule(expr, name))
        return symptoms, diagnoses, tuple(rules)


def _resolve_names(
    declared: tuple[str, ...] | None, count: int | None, prefix: str, what: str
) -> tuple[str, ...]:
    if declared is None:
        if count is None:
            raise NetworkError(f"number of {what} not declared and not given")
        return tuple(f"{prefix}{i}" for i in range(1, count + 1))
    if count is not None and count != len(declared):
        raise NetworkError(
            f"constraint file declares {len(declared)} {what}, but {count} were requested"
        )
    return declared


def _any_of(names: Sequence[str]) -> BoolExpr:
    expr: BoolExpr = Atom(names[0])
    for name in names[1:]:
        expr = Or(expr, Atom(name))
    return expr


def parse_constraints(text: str) -> ConstraintSet:
    """Parse a constraint file (rule DSL plus ``=>`` and declarations)."""
    symptoms: tuple[str, ...] | None = None
    diagnoses: tuple[str, ...] | None = None
    entries: list[tuple[str | None, BoolExpr | None]] = []
    for lineno, tokens in _lines(text):
        head = tokens[0]
        if head.kind != "ident":
            raise DslSyntaxError(
                "expected 'rule', 'symptoms' or 'diagnoses'", lineno, head.column
            )
        parser = _ExprParser(tokens, lineno, allow_implies=True)
        if head.text == "rule":
            name = _parse_rule_head(parser)
            expr = parser.expr()
            if not parser.at_end():
                parser.fail("unexpected trailing input")
            if expr == Atom(ANY_SYMPTOM_SHORTHAND):
                entries.append((name, None))
            else:
                entries.append((name, expr))
        elif head.text in ("symptoms", "diagnoses"):
            if (head.text == "symptoms" and symptoms is not None) or (
                head.text == "diagnoses" and diagnoses is not None
            ):
                raise DslSyntaxError(f"duplicate {head.text} declaration", lineno, head.column)
            parser.advance()
            parser.expect(":")
            names = tuple(_parse_name_list(parser))
            if len(set(names)) != len(names):
                raise NetworkError(f"duplicate name in {head.text} declaration (line {lineno})")
            if head.text == "symptoms":
                symptoms = names
            else:
                diagnoses = names
        else:
            raise DslSyntaxError(
                f"expected 'rule', 'symptoms' or 'diagnoses', got {head.text!r}",
                lineno,
                head.column,
            )
    return ConstraintSet(symptoms, diagnoses, tuple(entries))


def reduce_to_rlb(
    elb: LogicBase,
    constraints: Iterable[ConstraintRule],
    symptom_names: Sequence[str] | None = None,
    diagnosis_names: Sequence[str] | None = None,
) -> LogicBase:
    """Keep exactly the pairs whose joint assignment satisfies every constraint."""
    symptom_names = tuple(symptom_names or (f"s{i}" for i in range(1, elb.n_symptoms + 1)))
    diagnosis_names = tuple(diagnosis_names or (f"d{i}" for i in range(1, elb.n_diagnoses + 1)))
    if len(symptom_names) != elb.n_symptoms or len(diagnosis_names) != elb.n_diagnoses:
        raise ValueError("attribute name lists do not match the logic base dimensions")
    known = set(symptom_names) | set(diagnosis_names)
    if len(known) != elb.n_symptoms + elb.n_diagnoses:
        raise ValueError("attribute names must be unique")
    constraints = tuple(constraints)
    for constraint in constraints:
        for atom in atom_names(constraint.expr):
            if atom not in known:
                label = constraint.name or "constraint"
                raise NetworkError(f"unknown atom {atom!r} in {label}")
    kept = []
    for symptom, diagnosis in elb.pairs:
        assignment = dict(zip(symptom_names, symptom.bits))
        assignment.update(zip(diagnosis_names, diagnosis.bits))
        if all(evaluate_expr(c.expr, assignment) for c in constraints):
            kept.append((symptom, diagnosis))
    return LogicBase(elb.n_symptoms, elb.n_diagnoses, tuple(kept))


# ---------------------------------------------------------------------------
# Diagnosis
# ---------------------------------------------------------------------------


class Presence(Enum):
    PRESENT = "present"
    ABSENT = "absent"
    UNCERTAIN = "uncertain"


@dataclass(frozen=True)
class Verdict:
    """Differential-diagnosis outcome for one observed symptom complex.

    ``diseases[k]`` is the trivalent verdict for disease ``k``. When the
    symptom complex matches nothing in the logic base, ``compatible`` is
    empty, ``diseases`` is empty and :attr:`consistent` is False; that is
    a reported outcome ("inconsistent with the knowledge base"), not an
    error.
    """

    symptoms: Complex
    compatible: tuple[Complex, ...]
    diseases: tuple[Presence, ...]

    @property
    def consistent(self) -> bool:
        return bool(self.compatible)


def diagnose(symptoms: Complex, logic_base: LogicBase) -> Verdict:
    """Look up the diagnosis complexes compatible with ``symptoms``."""
    if len(symptoms.bits) != logic_base.n_symptoms:
        raise ValueError(
            f"symptom complex has {len(symptoms.bits)} attributes, "
            f"logic base has {logic_base.n_symptoms}"
        )
    compatible = tuple(d for s, d in logic_base.pairs if s == symptoms)
    if not compatible:
        return Verdict(symptoms, (), ())
    diseases = []
    for k in range(logic_base.n_diagnoses):
        values = {d.bits[k] for d in compatible}
        if values == {1}:
            diseases.append(Presence.PRESENT)
        elif values == {0}:
            diseases.append(Presence.ABSENT)
        else:
            diseases.append(Presence.UNCERTAIN)
    return Verdict(symptoms, compatible, tuple(diseases))
