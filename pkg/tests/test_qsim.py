import numpy as np
import pytest
from numpy.testing import assert_allclose

from dmkde.density import train_mixed, train_pure
from dmkde.errors import ParameterError
from dmkde.qsim import (
    CircuitState, CircuitTrace, amplitude_encode, apply_unitary, apply_unitary_first_half,
    cnot, cnot_cascade, complete_unitary, embed_block_unitary, first_half_distribution,
    prob_zero_first_half, qubits_for, run_mixed_circuit, run_pure_circuit, sample_shots,
    tensor)


def random_state(num_qubits, rng, complex_=True):
    size = 2 ** num_qubits
    v = rng.standard_normal(size) + (1j * rng.standard_normal(size) if complex_ else 0)
    return CircuitState(v / np.linalg.norm(v), num_qubits)


def random_unit(d, rng):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize('d, n', [(2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (16, 4), (17, 5)])
def test_qubits_for(d, n):
    assert qubits_for(d) == n


@pytest.mark.parametrize('d', [1, 0, 2 ** 12 + 1])
def test_qubits_for_rejects(d):
    with pytest.raises(ParameterError):
        qubits_for(d)


def test_amplitude_encode_pads():
    state = amplitude_encode([0.6, 0., 0.8], 2)
    assert_allclose(state.amplitudes, [0.6, 0., 0.8, 0.])
    with pytest.raises(ParameterError):
        amplitude_encode([1., 1.], 1)
    with pytest.raises(ParameterError):
        amplitude_encode(np.ones(5) / np.sqrt(5), 2)


def test_circuit_state_rejects_unnormalized():
    with pytest.raises(ParameterError):
        CircuitState([1., 1.], 1)
    with pytest.raises(ParameterError):
        CircuitState([1., 0., 0.], 1)


@pytest.mark.parametrize('d', [2, 3, 5, 8])
def test_complete_unitary_first_column(d):
    rng = np.random.default_rng(d)
    for phi in (random_unit(d, rng),
                rng.standard_normal(d) + 1j * rng.standard_normal(d),
                np.eye(d)[0], np.eye(d)[d - 1]):
        phi = phi / np.linalg.norm(phi)
        unitary = complete_unitary(phi)
        padded = np.zeros(2 ** qubits_for(d), dtype=complex)
        padded[:d] = phi
        assert unitary.is_unitary()
        assert_allclose(unitary.matrix[:, 0], padded, atol=1e-12)
        assert_allclose(unitary.dagger().matrix @ padded, np.eye(len(padded))[0], atol=1e-12)


def test_embed_block_unitary():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    block = embed_block_unitary(q.T, 2)
    assert block.is_unitary()
    assert_allclose(block.matrix[:3, :3], q.T)
    assert block.matrix[3, 3] == 1.
    with pytest.raises(ParameterError):
        embed_block_unitary(np.ones((3, 3)), 2)
    with pytest.raises(ParameterError):
        embed_block_unitary(np.eye(2), 2)


def test_tensor_puts_first_state_on_low_qubits():
    rng = np.random.default_rng(1)
    a, b = random_state(2, rng), random_state(1, rng)
    assert_allclose(tensor(a, b).amplitudes, np.kron(b.amplitudes, a.amplitudes))
    basis = tensor(CircuitState(np.eye(4)[1], 2), CircuitState(np.eye(2)[1], 1))
    # qubit 0 and qubit 2 set: index 1 + 4 = 5
    assert np.argmax(np.abs(basis.amplitudes)) == 5


def test_first_half_unitary_matches_kronecker():
    rng = np.random.default_rng(2)
    state = random_state(4, rng)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    unitary = complete_unitary(q[:, 0])
    out = apply_unitary_first_half(state, unitary)
    assert_allclose(out.amplitudes, np.kron(np.eye(4), unitary.matrix) @ state.amplitudes,
                    atol=1e-12)
    with pytest.raises(ParameterError):
        apply_unitary_first_half(random_state(3, rng), unitary)


@pytest.mark.parametrize('control, target', [(0, 1), (2, 0), (1, 3), (3, 2)])
def test_cnot_matches_permutation_matrix(control, target):
    rng = np.random.default_rng(3)
    state = random_state(4, rng)
    matrix = np.zeros((16, 16))
    for i in range(16):
        j = i ^ (1 << target) if (i >> control) & 1 else i
        matrix[j, i] = 1.
    assert_allclose(cnot(state, control, target).amplitudes, matrix @ state.amplitudes)
    with pytest.raises(ParameterError):
        cnot(state, control, control)


def test_cnot_cascade_xors_registers():
    n = 3
    for low in range(2 ** n):
        for high in range(2 ** n):
            basis = np.zeros(2 ** (2 * n))
            basis[low + 2 ** n * high] = 1.
            out = cnot_cascade(CircuitState(basis, 2 * n)).amplitudes
            assert np.argmax(np.abs(out)) == (low ^ high) + 2 ** n * high


def test_first_half_distribution_matches_loop():
    rng = np.random.default_rng(4)
    state = random_state(6, rng)
    expected = np.zeros(8)
    for index, p in enumerate(state.probabilities()):
        expected[index % 8] += p
    assert_allclose(first_half_distribution(state), expected)
    assert prob_zero_first_half(state) == pytest.approx(expected[0])


def test_circuits_match_linear_algebra():
    rng = np.random.default_rng(5)
    for trial in range(200):
        d = (3, 4, 8, 16)[trial % 4]
        states = np.array([random_unit(d, rng) for _ in range(int(rng.integers(1, 12)))])
        psi = random_unit(d, rng)
        mixed = train_mixed(states)
        exact, shots = run_mixed_circuit(mixed, psi)
        assert shots is None
        assert exact == pytest.approx(psi @ mixed.rho @ psi, abs=1e-9)
        pure = train_pure(states)
        exact, _ = run_pure_circuit(pure, psi)
        assert exact == pytest.approx((pure.phi @ psi) ** 2, abs=1e-9)


def test_circuits_reject_mismatch():
    rng = np.random.default_rng(6)
    mixed = train_mixed(np.eye(4))
    with pytest.raises(ParameterError):
        run_mixed_circuit(mixed, random_unit(3, rng))
    with pytest.raises(ParameterError):
        run_pure_circuit(train_pure(np.eye(4)), random_unit(5, rng))


def test_shot_estimates_concentrate():
    rng = np.random.default_rng(7)
    shots = 8192
    inside = total = 0
    for circuit in range(20):
        d = (3, 4, 8)[circuit % 3]
        states = np.array([random_unit(d, rng) for _ in range(5)])
        model = train_mixed(states)
        psi = states[0]
        exact, _ = run_mixed_circuit(model, psi)
        bound = 3 * np.sqrt(exact * (1 - exact) / shots)
        for trial in range(100):
            _, estimate = run_mixed_circuit(model, psi, shots=shots, seed=[circuit, trial])
            inside += abs(estimate - exact) <= bound
            total += 1
    assert inside >= 0.95 * total


def test_shots_are_seeded():
    model = train_mixed(np.eye(4))
    psi = np.ones(4) / 2
    first = run_mixed_circuit(model, psi, shots=100, seed=11)
    second = run_mixed_circuit(model, psi, shots=100, seed=11)
    assert first == second
    with pytest.raises(ParameterError):
        run_mixed_circuit(model, psi, shots=-1)


def test_sample_shots_counts():
    result = sample_shots([0.25, 0.75, 0., 0.], 1000, np.random.default_rng(0))
    assert sum(result.counts.values()) == 1000
    assert set(result.counts) <= {0, 1}
    assert result.frequency(0) == result.counts.get(0, 0) / 1000


def test_trace_lists_operations(tmp_path):
    model = train_mixed(np.eye(4))
    trace = CircuitTrace()
    run_mixed_circuit(model, np.ones(4) / 2, shots=10, seed=0, trace=trace)
    assert trace.lines == [
        'encode 0 1', 'encode 2 3', 'unitary 0 1', 'cx 2 0', 'cx 3 1',
        'measure 0 1 # 10 shots']
    trace.dump(str(tmp_path / 'trace.txt'))
    assert (tmp_path / 'trace.txt').read_text() == trace.to_text()

    pure_trace = CircuitTrace()
    run_pure_circuit(train_pure(np.eye(2)), np.array([1., 0.]), trace=pure_trace)
    assert pure_trace.lines == ['encode 0', 'unitary 0']


def test_apply_unitary_checks_width():
    rng = np.random.default_rng(8)
    with pytest.raises(ParameterError):
        apply_unitary(random_state(2, rng), complete_unitary(random_unit(2, rng)))


def test_shot_error_scales_with_inverse_sqrt_shots():
    rng = np.random.default_rng(8)
    states = np.array([random_unit(4, rng) for _ in range(5)])
    model = train_mixed(states)
    psi = states[0]
    exact, _ = run_mixed_circuit(model, psi)
    spreads = {}
    for shots in (256, 1024, 8192):
        estimates = [run_mixed_circuit(model, psi, shots=shots, seed=[shots, trial])[1]
                     for trial in range(400)]
        spreads[shots] = np.std(estimates)
        expected = np.sqrt(exact * (1 - exact) / shots)
        assert 0.8 * expected <= spreads[shots] <= 1.2 * expected
    assert spreads[256] / spreads[8192] == pytest.approx(np.sqrt(32.), rel=0.25)
