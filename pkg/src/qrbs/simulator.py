"""Two execution engines for reversible circuits.

The dense engine carries all ``2^n`` complex amplitudes; the fast engine
carries a single basis index, which is exact here because X/CNOT/CCNOT
only permute basis states. Measurement is deterministic bit extraction
from a basis state — there is no randomness anywhere, so identical runs
give identical results. Circuits whose state would need probabilistic
measurement are rejected.

Conventions: qubit ``k`` is bit ``k`` of the basis index (q0 least
significant); :attr:`RunResult.bitstring` prints classical bits most
significant first (c-high to c-low), matching the index convention.

The dense kernel swaps amplitude pairs selected by control/target bit
masks. With numba available the swap runs as a parallel jitted loop
(needed to keep wide circuits fast); a pure-numpy strided fallback keeps
the engine functional without it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import CCNOT, CNOT, Circuit, Gate, Measure, X
from .errors import SimulationError

__all__ = [
    "DEFAULT_MAX_QUBITS",
    "BasisIndex",
    "RunResult",
    "StateVector",
    "apply_gate",
    "engines_agree",
    "init_state",
    "results_agree",
    "run",
]

# 2^26 complex128 amplitudes is about 1 GiB; larger needs an explicit override.
DEFAULT_MAX_QUBITS = 26

BasisIndex = int

try:
    import numba

    numba.config.THREADING_LAYER = "workqueue"

    @numba.njit(cache=True, parallel=True)
    def _swap_pairs_jit(amps, control_mask, target_mask):  # pragma: no cover - jitted
        for i in numba.prange(amps.shape[0]):
            if (i & control_mask) == control_mask and (i & target_mask) == 0:
                j = i | target_mask
                a = amps[i]
                amps[i] = amps[j]
                amps[j] = a

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False


def _swap_pairs_numpy(amps: np.ndarray, n: int, control_mask: int, target_mask: int) -> None:
    """Strided-view fallback for the jitted pair swap; bit-identical result."""
    view = amps.reshape((2,) * n) if n else amps
    target = target_mask.bit_length() - 1
    selector: list = [slice(None)] * n
    for q in range(n):
        if control_mask >> q & 1:
            selector[n - 1 - q] = 1
    sub = view[tuple(selector)]
    target_axis = sum(1 for a in range(n - 1 - target) if selector[a] == slice(None))
    lo_index = [slice(None)] * sub.ndim
    hi_index = [slice(None)] * sub.ndim
    lo_index[target_axis] = slice(0, 1)
    hi_index[target_axis] = slice(1, 2)
    lo, hi = sub[tuple(lo_index)], sub[tuple(hi_index)]
    tmp = lo.copy()
    lo[...] = hi
    hi[...] = tmp


def _gate_masks(gate: Gate) -> tuple[int, int]:
    match gate:
        case X(target):
            return 0, 1 << target
        case CNOT(control, target):
            return 1 << control, 1 << target
        case CCNOT(control1, control2, target):
            return (1 << control1) | (1 << control2), 1 << target
    raise SimulationError(f"not a unitary gate: {gate!r}")


def _apply_inplace(amps: np.ndarray, n: int, gate: Gate) -> None:
    control_mask, target_mask = _gate_masks(gate)
    if _HAVE_NUMBA:
        _swap_pairs_jit(amps, control_mask, target_mask)
    else:
        _swap_pairs_numpy(amps, n, control_mask, target_mask)


def _permute_index(index: int, gate: Gate) -> int:
    control_mask, target_mask = _gate_masks(gate)
    if index & control_mask == control_mask:
        index ^= target_mask
    return index


@dataclass
class StateVector:
    """Dense state: ``2^num_qubits`` complex amplitudes."""

    num_qubits: int
    amplitudes: np.ndarray

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def basis_index(self, tol: float = 1e-9) -> BasisIndex:
        """The index of the single occupied basis state.

        Raises :class:`SimulationError` if the amplitude weight is spread
        over more than one basis state (within ``tol``).
        """
        nonzero = np.flatnonzero(self.amplitudes)
        if nonzero.size == 0:
            raise SimulationError("zero state has no basis index")
        magnitudes = np.abs(self.amplitudes[nonzero])
        top = int(np.argmax(magnitudes))
        rest = np.delete(magnitudes, top)
        if abs(magnitudes[top] - 1.0) > tol or (rest.size and float(rest.max()) > tol):
            raise SimulationError("state is not a computational basis state")
        return int(nonzero[top])


def init_state(
    num_qubits: int, basis: BasisIndex = 0, max_qubits: int | None = None
) -> StateVector:
    """A dense state with amplitude 1 at ``basis`` and 0 elsewhere."""
    cap = DEFAULT_MAX_QUBITS if max_qubits is None else max_qubits
    if num_qubits > cap:
        raise SimulationError(
            f"{num_qubits} qubits exceeds the dense-engine cap of {cap} "
            f"(override with max_qubits)"
        )
    if num_qubits < 0:
        raise ValueError("num_qubits must be non-negative")
    if not 0 <= basis < 1 << num_qubits:
        raise ValueError(f"basis index {basis} out of range for {num_qubits} qubits")
    amplitudes = np.zeros(1 << num_qubits, dtype=np.complex128)
    amplitudes[basis] = 1.0
    return StateVector(num_qubits, amplitudes)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one unitary gate; returns a new state, input untouched."""
    if isinstance(gate, Measure):
        raise SimulationError("measurement is not a unitary gate; use run()")
    control_mask, target_mask = _gate_masks(gate)
    if (control_mask | target_mask).bit_length() > state.num_qubits:
        raise SimulationError(f"gate {gate!r} out of range for {state.num_qubits} qubits")
    amplitudes = state.amplitudes.copy()
    _apply_inplace(amplitudes, state.num_qubits, gate)
    return StateVector(state.num_qubits, amplitudes)


@dataclass(frozen=True)
class RunResult:
    """Classical bits plus the final state of one deterministic run.

    ``bits[k]`` is classical bit ``k``; unwritten bits stay 0.
    ``final_state`` is a :class:`StateVector` on the dense engine and a
    plain basis index on the fast engine.
    """

    bits: tuple[int, ...]
    final_state: StateVector | BasisIndex

    @property
    def bitstring(self) -> str:
        return "".join(str(b) for b in reversed(self.bits))


ENGINES = ("fast", "statevector")


def run(
    circuit: Circuit,
    initial: BasisIndex = 0,
    engine: str = "fast",
    max_qubits: int | None = None,
) -> RunResult:
    """Execute ``circuit`` from the basis state ``initial``.

    ``engine="fast"`` tracks one basis index in O(#gates);
    ``engine="statevector"`` updates all amplitudes and is capped at
    ``max_qubits`` (default 26) qubits.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if not 0 <= initial < 1 << circuit.num_qubits:
        raise ValueError(
            f"initial basis index {initial} out of range for {circuit.num_qubits} qubits"
        )
    bits = [0] * circuit.num_clbits

    if engine == "fast":
        index = initial
        for gate in circuit.gates:
            if isinstance(gate, Measure):
                bits[gate.clbit] = index >> gate.qubit & 1
            else:
                index = _permute_index(index, gate)
        return RunResult(tuple(bits), index)

    state = init_state(circuit.num_qubits, initial, max_qubits)
    located: BasisIndex | None = initial
    for gate in circuit.gates:
        if isinstance(gate, Measure):
            if located is None:
                located = state.basis_index()
            bits[gate.clbit] = located >> gate.qubit & 1
        else:
            _apply_inplace(state.amplitudes, state.num_qubits, gate)
            located = None
    return RunResult(tuple(bits), state)


def results_agree(fast: RunResult, dense: RunResult) -> bool:
    """True iff the two runs report the same bits and the same final basis state."""
    if fast.bits != dense.bits:
        return False
    if not isinstance(dense.final_state, StateVector) or isinstance(
        fast.final_state, StateVector
    ):
        raise ValueError("expected one fast result and one dense result")
    try:
        dense_index = dense.final_state.basis_index()
    except SimulationError:
        return False
    return dense_index == fast.final_state


def engines_agree(
    circuit: Circuit, initial: BasisIndex = 0, max_qubits: int | None = None
) -> bool:
    """Cross-validate the two engines on one circuit and input."""
    fast = run(circuit, initial, "fast")
    dense = run(circuit, initial, "statevector", max_qubits)
    return results_agree(fast, dense)
