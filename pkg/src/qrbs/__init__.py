"""Rule-based inference compiled to reversible X/CNOT/CCNOT circuits.

The stack, bottom to top: boolean rule networks with a textual DSL
(:mod:`qrbs.rules`), categorical differential diagnosis over attribute
complexes (:mod:`qrbs.categorical`), a reversible-circuit IR with an
OpenQASM 2.0 subset interchange (:mod:`qrbs.circuit`), a compiler from
networks to circuits (:mod:`qrbs.compiler`), dense and basis-state
simulation engines (:mod:`qrbs.simulator`), and a TNM staging
application built on all of it (:mod:`qrbs.idc`).
"""

from .categorical import (
    Complex,
    ConstraintRule,
    ConstraintSet,
    LogicBase,
    Presence,
    Verdict,
    build_elb,
    complex_index,
    diagnose,
    index_to_complex,
    parse_constraints,
    reduce_to_rlb,
)
from .circuit import (
    CCNOT,
    CNOT,
    Circuit,
    Gate,
    Measure,
    X,
    as_permutation,
    export_qasm,
    gate_counts,
    import_qasm,
)
from .compiler import (
    CompiledCircuit,
    CompileOptions,
    VerificationReport,
    compile_expr,
    compile_network,
    verify_compilation,
)
from .errors import (
    CircuitError,
    CompileError,
    CycleError,
    DslSyntaxError,
    NetworkError,
    OneHotError,
    QasmError,
    QrbsError,
    SimulationError,
    StagingError,
    VocabularyError,
)
from .idc import (
    ClinicalFindings,
    StageSet,
    StagingResult,
    TnmClass,
    build_idc_circuit,
    build_idc_network,
    classify_tnm,
    decode_stages,
    stage,
    tnm_to_input_qubit,
    verify_reference_table,
)
from .rules import (
    And,
    Atom,
    BoolExpr,
    Implies,
    Not,
    Or,
    Rule,
    RuleNetwork,
    evaluate_expr,
    evaluate_network,
    format_expr,
    format_network,
    parse_rules,
    topological_order,
)
from .simulator import (
    RunResult,
    StateVector,
    apply_gate,
    engines_agree,
    init_state,
    results_agree,
    run,
)

__version__ = "0.1.0"
