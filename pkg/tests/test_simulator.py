"""Dense and fast engines: conventions, agreement, norms, reversibility."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_circuit
from qrbs.circuit import CCNOT, CNOT, Circuit, Measure, X, as_permutation
from qrbs.errors import SimulationError
from qrbs.simulator import (
    RunResult,
    StateVector,
    _swap_pairs_numpy,
    apply_gate,
    engines_agree,
    init_state,
    results_agree,
    run,
)


class TestInitState:
    def test_ground_state(self):
        state = init_state(3, 0)
        assert state.amplitudes[0] == 1
        assert np.count_nonzero(state.amplitudes) == 1

    def test_basis_five(self):
        state = init_state(3, 0b101)
        assert state.amplitudes[5] == 1

    def test_single_activated_qubit_at_width_25(self):
        state = init_state(25, 1 << 5)
        assert state.amplitudes[32] == 1
        assert state.amplitudes.size == 1 << 25

    def test_cap(self):
        with pytest.raises(SimulationError, match="cap"):
            init_state(8, max_qubits=7)
        init_state(8, max_qubits=8)  # override admits it

    def test_basis_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            init_state(2, 4)


class TestApplyGate:
    def test_x_flips_ground_state(self):
        state = apply_gate(init_state(1), X(0))
        assert state.amplitudes[1] == 1
        assert state.amplitudes[0] == 0

    def test_cnot_on_superposition(self):
        # (|00> + |10>)/sqrt(2) with control q0 -> (|00> + |11>)/sqrt(2);
        # exercises amplitude handling beyond single basis states.
        amps = np.zeros(4, dtype=np.complex128)
        amps[0b00] = amps[0b01] = 1 / math.sqrt(2)
        state = apply_gate(StateVector(2, amps), CNOT(0, 1))
        expected = np.zeros(4, dtype=np.complex128)
        expected[0b00] = expected[0b11] = 1 / math.sqrt(2)
        assert np.allclose(state.amplitudes, expected)

    def test_toffoli_truth_table(self):
        state = apply_gate(init_state(3, 0b011), CCNOT(0, 1, 2))
        assert state.amplitudes[0b111] == 1

    def test_measure_rejected(self):
        with pytest.raises(SimulationError, match="not a unitary"):
            apply_gate(init_state(1), Measure(0, 0))

    def test_out_of_range_gate(self):
        with pytest.raises(SimulationError, match="out of range"):
            apply_gate(init_state(2), X(5))

    def test_input_state_is_untouched(self):
        state = init_state(1)
        apply_gate(state, X(0))
        assert state.amplitudes[0] == 1


class TestBasisIndex:
    def test_simple(self):
        assert init_state(3, 6).basis_index() == 6

    def test_spread_state_rejected(self):
        amps = np.zeros(4, dtype=np.complex128)
        amps[0] = amps[3] = 1 / math.sqrt(2)
        with pytest.raises(SimulationError, match="not a computational basis state"):
            StateVector(2, amps).basis_index()

    def test_zero_state_rejected(self):
        with pytest.raises(SimulationError, match="zero state"):
            StateVector(2, np.zeros(4, dtype=np.complex128)).basis_index()


class TestRun:
    def test_empty_circuit_fast(self):
        result = run(Circuit(3), 0b101, engine="fast")
        assert result.bits == ()
        assert result.final_state == 0b101

    def test_empty_circuit_dense(self):
        result = run(Circuit(3), 0b101, engine="statevector")
        assert result.bits == ()
        assert result.final_state.basis_index() == 0b101

    def test_measure_extracts_bit(self):
        circuit = Circuit(1, 1).append(X(0)).append(Measure(0, 0))
        for engine in ("fast", "statevector"):
            assert run(circuit, engine=engine).bits == (1,)

    def test_unwritten_bits_stay_zero(self):
        circuit = Circuit(2, 3).append(X(1)).append(Measure(1, 2))
        assert run(circuit).bits == (0, 0, 1)

    def test_bitstring_renders_high_bit_first(self):
        assert RunResult((0, 0, 1), 0).bitstring == "100"

    def test_unknown_engine(self):
        with pytest.raises(ValueError, match="unknown engine"):
            run(Circuit(1), engine="dense")

    def test_initial_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            run(Circuit(2), 4)

    def test_dense_cap_applies(self):
        with pytest.raises(SimulationError, match="cap"):
            run(Circuit(9), engine="statevector", max_qubits=8)

    def test_fast_engine_has_no_width_cap(self):
        circuit = Circuit(40, 1).append(X(39)).append(Measure(39, 0))
        assert run(circuit).bits == (1,)

    def test_measure_between_gates(self):
        circuit = Circuit(2, 2)
        circuit.append(X(0)).append(Measure(0, 0)).append(X(1)).append(Measure(1, 1))
        for engine in ("fast", "statevector"):
            assert run(circuit, engine=engine).bits == (1, 1)


class TestEngineAgreement:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 8), st.integers(0, 30))
    def test_engines_agree_on_random_circuits(self, seed, num_qubits, num_gates):
        rng = random.Random(seed)
        circuit = random_circuit(rng, num_qubits, num_gates)
        initial = rng.randrange(1 << num_qubits)
        assert engines_agree(circuit, initial)

    def test_exhaustive_agreement_on_all_basis_inputs(self):
        rng = random.Random(11)
        for _ in range(5):
            circuit = random_circuit(rng, 6, 25)
            for initial in range(1 << 6):
                assert engines_agree(circuit, initial)

    def test_fast_engine_matches_permutation_oracle_at_width_14(self):
        rng = random.Random(23)
        circuit = random_circuit(rng, 14, 60, with_measures=False)
        perm = as_permutation(circuit)
        for initial in range(1 << 14):
            assert run(circuit, initial).final_state == perm[initial]

    def test_exhaustive_agreement_at_width_10(self):
        rng = random.Random(31)
        circuit = random_circuit(rng, 10, 40)
        for initial in range(1 << 10):
            assert engines_agree(circuit, initial)

    def test_empty_circuit_agrees(self):
        assert engines_agree(Circuit(2), 1)

    def test_mutated_circuit_is_detected(self):
        rng = random.Random(5)
        circuit = random_circuit(rng, 5, 20)
        mutant = Circuit(circuit.num_qubits, circuit.num_clbits)
        dropped = rng.randrange(sum(1 for g in circuit.gates if not isinstance(g, Measure)))
        kept = 0
        for gate in circuit.gates:
            if not isinstance(gate, Measure) and kept == dropped:
                kept += 1
                continue  # drop this one gate
            if not isinstance(gate, Measure):
                kept += 1
            mutant.append(gate)
        fast_mutant = run(mutant, 0b10110, engine="fast")
        dense_original = run(circuit, 0b10110, engine="statevector")
        assert not results_agree(fast_mutant, dense_original)
        assert engines_agree(mutant, 0b10110)  # the mutant itself is still consistent

    def test_results_agree_argument_order(self):
        fast = run(Circuit(1), 0, "fast")
        dense = run(Circuit(1), 0, "statevector")
        with pytest.raises(ValueError):
            results_agree(dense, fast)


class TestNormAndReversal:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 8), st.integers(1, 30))
    def test_norm_is_preserved_after_every_gate(self, seed, num_qubits, num_gates):
        rng = random.Random(seed)
        circuit = random_circuit(rng, num_qubits, num_gates, with_measures=False)
        state = init_state(num_qubits, rng.randrange(1 << num_qubits))
        for gate in circuit.gates:
            state = apply_gate(state, gate)
            assert abs(state.norm_sq() - 1.0) <= 1e-9
            # permutation closure: still a single unit-modulus amplitude
            nonzero = np.flatnonzero(state.amplitudes)
            assert nonzero.size == 1
            assert abs(abs(state.amplitudes[nonzero[0]]) - 1.0) <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 8), st.integers(0, 30))
    def test_reversal_restores_the_initial_state(self, seed, num_qubits, num_gates):
        rng = random.Random(seed)
        circuit = random_circuit(rng, num_qubits, num_gates, with_measures=False)
        initial = rng.randrange(1 << num_qubits)
        composed = circuit.copy().extend(circuit.reversed().gates)
        assert run(composed, initial).final_state == initial
        dense = run(composed, initial, engine="statevector").final_state
        expected = init_state(num_qubits, initial).amplitudes
        assert float(np.linalg.norm(dense.amplitudes - expected)) <= 1e-9


class TestNumpyFallbackKernel:
    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 7))
    def test_matches_reference_permutation_on_random_amplitudes(self, seed, num_qubits):
        rng = random.Random(seed)
        gate = random_circuit(rng, num_qubits, 1, with_measures=False).gates[0]
        values = np.array(
            [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(1 << num_qubits)]
        )
        via_fallback = values.copy()
        match_masks = {
            X: lambda g: (0, 1 << g.target),
            CNOT: lambda g: (1 << g.control, 1 << g.target),
            CCNOT: lambda g: ((1 << g.control1) | (1 << g.control2), 1 << g.target),
        }
        control_mask, target_mask = match_masks[type(gate)](gate)
        _swap_pairs_numpy(via_fallback, num_qubits, control_mask, target_mask)
        perm = as_permutation(Circuit(num_qubits).append(gate))
        expected = np.empty_like(values)
        expected[perm] = values  # amplitude at i moves to perm[i]
        assert np.array_equal(via_fallback, expected)

    def test_single_qubit_flip(self):
        values = np.array([1 + 0j, 2 + 0j])
        _swap_pairs_numpy(values, 1, 0, 1)
        assert list(values) == [2 + 0j, 1 + 0j]

    def test_run_with_fallback_only(self, monkeypatch):
        import qrbs.simulator as sim

        monkeypatch.setattr(sim, "_HAVE_NUMBA", False)
        rng = random.Random(3)
        circuit = random_circuit(rng, 6, 25)
        fast = run(circuit, 0b101010, "fast")
        dense = run(circuit, 0b101010, "statevector")
        assert results_agree(fast, dense)
