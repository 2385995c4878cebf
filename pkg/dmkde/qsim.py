"""Dense statevector simulation of the two DMKDE circuits.

Bit convention: basis index i = sum_k b_k 2^k, qubit k is the k-th wire from
the top and has weight 2^k, so |5>_4 is the register with qubits 0 and 2 set.
On a 2n-qubit register the first half (qubits 0..n-1) is the low part of the
index and the second half the high part: index = low + 2^n * high.

Pure-state circuit:  |psi>_n  --U_n^dagger--  measure, P(|0>_n) = |<phi|psi>|^2

Mixed-state circuit:  |psi>_n (x) |sqrt(lambda)>_n, apply V^dagger (padded
with an identity block) on the first half, then CNOT(i + n -> i) for
i = 0..n-1; P(first half = |0>_n) = sum_i lambda_i |<v_i|psi>|^2 = <psi|rho|psi>.
"""
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from dmkde.errors import ParameterError

MAX_QUBITS_PER_REGISTER = 12
NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CircuitState:
    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape[0] != 2 ** self.num_qubits:
            raise ParameterError('%d amplitudes do not describe %d qubits' % (
                amplitudes.shape[0], self.num_qubits))
        if abs(np.vdot(amplitudes, amplitudes).real - 1.) > NORM_TOL:
            raise ParameterError('state is not normalized')
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class UnitaryBlock:
    matrix: np.ndarray
    num_qubits: int

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        size = 2 ** self.num_qubits
        if matrix.shape != (size, size):
            raise ParameterError('unitary of shape %s does not act on %d qubits' % (
                matrix.shape, self.num_qubits))
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    def dagger(self):
        return UnitaryBlock(self.matrix.conj().T, self.num_qubits)

    def is_unitary(self, atol=1e-8):
        return np.allclose(self.matrix @ self.matrix.conj().T,
                           np.eye(self.matrix.shape[0]), atol=atol)


@dataclass
class ShotResult:
    counts: Dict[int, int]
    shots: int

    def frequency(self, outcome=0):
        return self.counts.get(outcome, 0) / self.shots


@dataclass
class CircuitTrace:
    """Text trace of the operations of a circuit run, one line each."""
    lines: List[str] = field(default_factory=list)

    def record(self, name, qubits, detail=''):
        line = '%s %s' % (name, ' '.join(str(q) for q in qubits))
        if detail:
            line += ' # ' + detail
        self.lines.append(line)

    def to_text(self):
        return '\n'.join(self.lines) + ('\n' if self.lines else '')

    def dump(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            f.write(self.to_text())


def _record(trace, name, qubits, detail=''):
    if trace is not None:
        trace.record(name, qubits, detail)


def qubits_for(d):
    """Smallest n >= 1 with 2^(n-1) < d <= 2^n."""
    if int(d) != d or d < 2:
        raise ParameterError('circuits need a dimension d >= 2, got %r' % (d,))
    n = int(np.ceil(np.log2(d)))
    if n > MAX_QUBITS_PER_REGISTER:
        raise ParameterError('d=%d needs %d qubits per register, limit is %d' % (
            d, n, MAX_QUBITS_PER_REGISTER))
    return n


def amplitude_encode(v, n, trace=None, qubits=None):
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] > 2 ** n:
        raise ParameterError('vector of length %d does not fit in %d qubits' % (
            v.shape[0], n))
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ParameterError('cannot encode the zero vector')
    if abs(norm - 1.) > 1e-6:
        raise ParameterError('vector norm %.9f is not 1' % norm)
    amplitudes = np.zeros(2 ** n, dtype=np.complex128)
    amplitudes[:v.shape[0]] = v / norm
    _record(trace, 'encode', range(n) if qubits is None else qubits)
    return CircuitState(amplitudes, n)


def complete_unitary(phi, n=None):
    """Householder completion U with U|0>_n = phi (zero-padded).

    With u = conj(alpha) phi, alpha the phase of phi_0, the reflection
    H = I - 2 w w^dagger / (w^dagger w), w = e_0 - u, maps e_0 to u, and
    U = H diag(alpha, 1, ..., 1) maps e_0 to phi.
    """
    phi = np.asarray(phi, dtype=np.complex128).reshape(-1)
    if n is None:
        n = qubits_for(max(phi.shape[0], 2))
    if phi.shape[0] > 2 ** n:
        raise ParameterError('vector of length %d does not fit in %d qubits' % (
            phi.shape[0], n))
    if abs(np.linalg.norm(phi) - 1.) > 1e-6:
        raise ParameterError('phi must have unit norm')
    size = 2 ** n
    padded = np.zeros(size, dtype=np.complex128)
    padded[:phi.shape[0]] = phi / np.linalg.norm(phi)

    alpha = padded[0] / abs(padded[0]) if abs(padded[0]) > 0 else 1.
    u = padded * np.conj(alpha)
    w = -u
    w[0] += 1.
    ww = np.vdot(w, w).real
    householder = np.eye(size, dtype=np.complex128)
    if ww > 1e-30:
        householder -= 2. * np.outer(w, w.conj()) / ww
    householder[:, 0] *= alpha
    return UnitaryBlock(householder, n)


def embed_block_unitary(vdag, n):
    """2^n x 2^n block-diagonal [[V^dagger, 0], [0, I]]."""
    vdag = np.asarray(vdag, dtype=np.complex128)
    d = vdag.shape[0]
    if vdag.shape != (d, d):
        raise ParameterError('V^dagger must be square')
    if not (2 ** (n - 1) < d <= 2 ** n):
        raise ParameterError('d=%d does not need exactly %d qubits' % (d, n))
    if not np.allclose(vdag @ vdag.conj().T, np.eye(d), atol=1e-8):
        raise ParameterError('V^dagger is not unitary')
    matrix = np.eye(2 ** n, dtype=np.complex128)
    matrix[:d, :d] = vdag
    return UnitaryBlock(matrix, n)


def tensor(first, second):
    """|first> (x) |second> with `first` on the low qubits."""
    amplitudes = np.outer(second.amplitudes, first.amplitudes).reshape(-1)
    return CircuitState(amplitudes, first.num_qubits + second.num_qubits)


def apply_unitary(state, unitary, trace=None):
    if state.num_qubits != unitary.num_qubits:
        raise ParameterError('unitary acts on %d qubits, state has %d' % (
            unitary.num_qubits, state.num_qubits))
    _record(trace, 'unitary', range(state.num_qubits))
    return CircuitState(unitary.matrix @ state.amplitudes, state.num_qubits)


def apply_unitary_first_half(state, unitary, trace=None):
    """Applies U (x) I to a 2n-qubit state, U on qubits 0..n-1."""
    n = unitary.num_qubits
    if state.num_qubits != 2 * n:
        raise ParameterError('expected %d qubits, state has %d' % (
            2 * n, state.num_qubits))
    # rows: high part, columns: low part
    amplitudes = state.amplitudes.reshape(2 ** n, 2 ** n) @ unitary.matrix.T
    _record(trace, 'unitary', range(n))
    return CircuitState(amplitudes.reshape(-1), state.num_qubits)


def cnot(state, control, target, trace=None):
    m = state.num_qubits
    if not (0 <= control < m and 0 <= target < m) or control == target:
        raise ParameterError('invalid CNOT(%d -> %d) on %d qubits' % (
            control, target, m))
    index = np.arange(2 ** m)
    flipped = np.where((index >> control) & 1, index ^ (1 << target), index)
    amplitudes = np.empty_like(state.amplitudes)
    amplitudes[flipped] = state.amplitudes
    _record(trace, 'cx', (control, target))
    return CircuitState(amplitudes, m)


def cnot_cascade(state, trace=None):
    """CNOT with control i + n and target i for i = 0..n-1, i.e.
    |low>|high> -> |low XOR high>|high>."""
    if state.num_qubits % 2:
        raise ParameterError('cascade needs an even qubit count, got %d' % state.num_qubits)
    n = state.num_qubits // 2
    for i in range(n):
        state = cnot(state, i + n, i, trace=trace)
    return state


def first_half_distribution(state):
    if state.num_qubits % 2:
        raise ParameterError('expected an even qubit count, got %d' % state.num_qubits)
    n = state.num_qubits // 2
    return state.probabilities().reshape(2 ** n, 2 ** n).sum(axis=0)


def prob_zero_first_half(state):
    return float(first_half_distribution(state)[0])


def sample_shots(probabilities, shots, rng):
    probabilities = np.clip(np.asarray(probabilities, dtype=np.float64), 0., None)
    probabilities = probabilities / probabilities.sum()
    counts = rng.multinomial(shots, probabilities)
    return ShotResult(
        counts={int(i): int(c) for i, c in enumerate(counts) if c},
        shots=int(shots))


def _shots(probabilities, shots, seed, trace):
    if shots < 0:
        raise ParameterError('shots must be non-negative')
    if shots == 0:
        return None
    _record(trace, 'measure', range(int(np.log2(len(probabilities)))),
            '%d shots' % shots)
    result = sample_shots(probabilities, shots, np.random.default_rng(seed))
    return result.frequency(0)


def run_pure_circuit(model, psi, shots=0, seed=None, trace=None):
    """Returns (P(|0>_n), shot estimate or None) for the pure-state circuit."""
    phi = np.asarray(model.phi)
    psi = np.asarray(psi)
    if phi.shape != psi.shape:
        raise ParameterError('model has d=%d, state has %d' % (phi.shape[0], psi.shape[0]))
    n = qubits_for(phi.shape[0])
    state = amplitude_encode(psi, n, trace=trace)
    state = apply_unitary(state, complete_unitary(phi, n).dagger(), trace=trace)
    probabilities = state.probabilities()
    return float(probabilities[0]), _shots(probabilities, shots, seed, trace)


def run_mixed_circuit(model, psi, shots=0, seed=None, trace=None):
    """Returns (P(first half = |0>_n), shot estimate or None) for the
    mixed-state circuit on 2n qubits."""
    psi = np.asarray(psi)
    if psi.shape != (model.dim,):
        raise ParameterError('model has d=%d, state has shape %s' % (model.dim, psi.shape))
    if np.any(model.eigenvalues < 0):
        raise ParameterError('eigenvalues must be non-negative')
    n = qubits_for(model.dim)
    state = tensor(
        amplitude_encode(psi, n, trace=trace),
        amplitude_encode(np.sqrt(model.eigenvalues), n, trace=trace,
                         qubits=range(n, 2 * n)))
    vdag = np.asarray(model.eigenvectors).conj().T
    state = apply_unitary_first_half(state, embed_block_unitary(vdag, n), trace=trace)
    state = cnot_cascade(state, trace=trace)
    probabilities = first_half_distribution(state)
    return float(probabilities[0]), _shots(probabilities, shots, seed, trace)
