"""Statevector and density-matrix state types plus gate-application kernels.

Index convention, used everywhere in this package: qubit ``k`` is bit ``k``
of the basis-state integer, so qubit 0 is the least significant bit. A gate
is applied by bit-masked index iteration over the amplitude array; the full
2^n x 2^n operator is never materialized on the hot path. ``dense_matrix``
builds that operator the naive way (Kronecker embedding / explicit index
loops) and exists so tests can cross-check the kernels against it.

States are plain immutable values. Every operation here is a pure function
from (state, gate) to a new state, so states and gates can be shared freely
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import CircuitError, ConfigError

# GateOp kinds
DENSE_1Q = "dense-1q"
CONTROLLED_1Q = "dense-2q-controlled"
DIAGONAL = "diagonal-global"
CONTROLLED_DIAGONAL = "controlled-diagonal"

_KINDS = (DENSE_1Q, CONTROLLED_1Q, DIAGONAL, CONTROLLED_DIAGONAL)

_UNITARY_ATOL = 1e-10
_STATE_NORM_ATOL = 1e-10

_I2 = np.eye(2, dtype=complex)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class GateOp:
    """A unitary plus the qubit indices it acts on.

    ``payload`` is a dense 2x2 matrix for the dense kinds, or a length-2^k
    diagonal for the diagonal kinds (k = number of targets, target r maps to
    bit r of the diagonal's own index). ``control``, when present, gates the
    payload on the control qubit being |1>.
    """

    kind: str
    payload: np.ndarray
    targets: tuple[int, ...]
    control: int | None = None
    name: str = ""

    def __post_init__(self):
        payload = np.array(self.payload, dtype=complex)
        payload.flags.writeable = False
        object.__setattr__(self, "payload", payload)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))

        if self.kind not in _KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(set(self.targets)) != len(self.targets):
            raise CircuitError(f"duplicate target qubits {self.targets}")
        if any(t < 0 for t in self.targets):
            raise CircuitError(f"negative target index in {self.targets}")
        if self.control is not None:
            if self.control < 0:
                raise CircuitError(f"negative control index {self.control}")
            if self.control in self.targets:
                raise CircuitError(
                    f"control qubit {self.control} collides with targets {self.targets}"
                )

        if self.kind in (DENSE_1Q, CONTROLLED_1Q):
            if payload.shape != (2, 2) or len(self.targets) != 1:
                raise CircuitError(f"{self.kind} needs a 2x2 payload and one target")
            if self.kind == CONTROLLED_1Q and self.control is None:
                raise CircuitError("controlled gate needs a control qubit")
            err = np.max(np.abs(payload @ payload.conj().T - _I2))
        else:
            if payload.ndim != 1 or payload.shape[0] != 1 << len(self.targets):
                raise CircuitError(
                    f"{self.kind} needs a diagonal of length 2^{len(self.targets)}"
                )
            if self.kind == CONTROLLED_DIAGONAL and self.control is None:
                raise CircuitError("controlled diagonal needs a control qubit")
            err = np.max(np.abs(np.abs(payload) ** 2 - 1.0))
        if err > _UNITARY_ATOL:
            raise CircuitError(f"gate payload not unitary (max deviation {err:.2e})")

    @property
    def qubits(self) -> tuple[int, ...]:
        """All qubit indices the gate touches, control included."""
        if self.control is None:
            return self.targets
        return self.targets + (self.control,)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the 2^n computational basis states."""

    n_qubits: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > _STATE_NORM_ATOL:
            raise ValueError(f"state norm {norm} is not 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits


@dataclass(frozen=True)
class DensityMatrix:
    """2^n x 2^n Hermitian unit-trace matrix for mixed-state evolution."""

    n_qubits: int
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        dim = 1 << self.n_qubits
        if rho.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got shape {rho.shape}")
        trace = np.trace(rho)
        if abs(trace - 1.0) > _STATE_NORM_ATOL:
            raise ValueError(f"trace {trace} is not 1")
        if np.max(np.abs(rho - rho.conj().T)) > _STATE_NORM_ATOL:
            raise ValueError("matrix is not Hermitian")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits


def new_zero_state(n_qubits: int) -> StateVector:
    """All-qubits-|0> state on ``n_qubits`` qubits (1 <= n_qubits <= 24)."""
    if not 1 <= n_qubits <= 24:
        raise ConfigError(f"n_qubits must be in [1, 24], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _check_indices(gate: GateOp, n_qubits: int) -> None:
    for q in gate.qubits:
        if q >= n_qubits:
            raise CircuitError(
                f"gate {gate.name or gate.kind} touches qubit {q}, "
                f"register has {n_qubits}"
            )


def _apply_matrix_1q(amps: np.ndarray, m: np.ndarray, qubit: int) -> np.ndarray:
    """Apply an arbitrary 2x2 matrix to ``qubit`` on the last axis of ``amps``.

    Does not require unitarity; noise channels reuse it for Kraus terms.
    Leading axes are treated as a batch.
    """
    dim = amps.shape[-1]
    idx = np.arange(dim)
    i0 = idx[(idx >> qubit) & 1 == 0]
    i1 = i0 | (1 << qubit)
    a0 = amps[..., i0]
    a1 = amps[..., i1]
    out = np.empty_like(amps)
    out[..., i0] = m[0, 0] * a0 + m[0, 1] * a1
    out[..., i1] = m[1, 0] * a0 + m[1, 1] * a1
    return out


def _diag_factor(gate: GateOp, dim: int) -> np.ndarray:
    """Per-basis-state multiplier implementing a (controlled) diagonal gate."""
    idx = np.arange(dim)
    sub = np.zeros(dim, dtype=np.int64)
    for r, q in enumerate(gate.targets):
        sub |= ((idx >> q) & 1) << r
    factor = gate.payload[sub]
    if gate.control is not None:
        factor = np.where((idx >> gate.control) & 1 == 1, factor, 1.0)
    return factor


def _apply_kernel(amps: np.ndarray, gate: GateOp, conjugate: bool = False) -> np.ndarray:
    """Apply ``gate`` (optionally elementwise-conjugated) to the last axis."""
    dim = amps.shape[-1]
    payload = np.conj(gate.payload) if conjugate else gate.payload
    if gate.kind == DENSE_1Q:
        return _apply_matrix_1q(amps, payload, gate.targets[0])
    if gate.kind == CONTROLLED_1Q:
        t, c = gate.targets[0], gate.control
        idx = np.arange(dim)
        i0 = idx[((idx >> c) & 1 == 1) & ((idx >> t) & 1 == 0)]
        i1 = i0 | (1 << t)
        a0 = amps[..., i0]
        a1 = amps[..., i1]
        out = amps.copy()
        out[..., i0] = payload[0, 0] * a0 + payload[0, 1] * a1
        out[..., i1] = payload[1, 0] * a0 + payload[1, 1] * a1
        return out
    # diagonal kinds
    factor = _diag_factor(gate, dim)
    if conjugate:
        factor = np.conj(factor)
    return amps * factor


def _apply_kernel_dm(rhos: np.ndarray, gate: GateOp) -> np.ndarray:
    """rho -> U rho U† on the trailing (dim, dim) axes, batched on the rest."""
    left = np.swapaxes(_apply_kernel(np.swapaxes(rhos, -1, -2), gate), -1, -2)
    return _apply_kernel(left, gate, conjugate=True)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Return the state after ``gate``; the input is left untouched."""
    _check_indices(gate, state.n_qubits)
    return StateVector(state.n_qubits, _apply_kernel(state.amps, gate))


def apply_gate_dm(rho: DensityMatrix, gate: GateOp) -> DensityMatrix:
    """Return U rho U†; trace and Hermiticity are preserved."""
    _check_indices(gate, rho.n_qubits)
    return DensityMatrix(rho.n_qubits, _apply_kernel_dm(rho.rho, gate))


def from_statevector(state: StateVector) -> DensityMatrix:
    """Pure-state density matrix |psi><psi|."""
    return DensityMatrix(state.n_qubits, np.outer(state.amps, state.amps.conj()))


def expectation_projector(state: StateVector | DensityMatrix, qubit: int, outcome: int) -> float:
    """Probability of measuring ``outcome`` (0 or 1) on ``qubit``."""
    if outcome not in (0, 1):
        raise ConfigError(f"outcome must be 0 or 1, got {outcome}")
    if not 0 <= qubit < state.n_qubits:
        raise CircuitError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    idx = np.arange(state.dim)
    sel = ((idx >> qubit) & 1) == outcome
    if isinstance(state, StateVector):
        return float(np.sum(np.abs(state.amps[sel]) ** 2))
    return float(np.real(np.sum(np.diagonal(state.rho)[sel])))


def _kron_embed(factors: list[np.ndarray]) -> np.ndarray:
    """Kronecker product of per-qubit factors, factor k acting on qubit k."""
    return reduce(np.kron, list(reversed(factors)))


def dense_matrix(gate: GateOp, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n operator for ``gate``, built naively.

    This is the slow reference path used by tests and sanity suites; the
    kernels above never call it.
    """
    _check_indices(gate, n_qubits)
    dim = 1 << n_qubits
    if gate.kind == DENSE_1Q:
        factors = [_I2] * n_qubits
        factors[gate.targets[0]] = np.asarray(gate.payload)
        return _kron_embed(factors)
    if gate.kind == CONTROLLED_1Q:
        off = [_I2] * n_qubits
        off[gate.control] = _P0
        on = [_I2] * n_qubits
        on[gate.control] = _P1
        on[gate.targets[0]] = np.asarray(gate.payload)
        return _kron_embed(off) + _kron_embed(on)
    # diagonal kinds: explicit per-index loop, deliberately independent of
    # the vectorized _diag_factor used by the kernels
    diag = np.ones(dim, dtype=complex)
    for i in range(dim):
        sub = 0
        for r, q in enumerate(gate.targets):
            if i & (1 << q):
                sub |= 1 << r
        value = gate.payload[sub]
        if gate.control is not None and not i & (1 << gate.control):
            value = 1.0
        diag[i] = value
    return np.diag(diag)
