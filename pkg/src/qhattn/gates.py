"""Constructors for the gate set used by the hard-attention circuits.

Single-qubit constructors default to qubit 0 but accept an explicit target
so callers can place them anywhere. The multi-qubit constructors take an
explicit qubit tuple for the same reason; by default they act on qubits
0..n-1 of a standalone register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import CircuitError, ConfigError
from .qcore import (
    CONTROLLED_1Q,
    CONTROLLED_DIAGONAL,
    DENSE_1Q,
    DIAGONAL,
    GateOp,
)

_SQRT2_INV = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class DiscretePrimitiveSpec:
    """Which basis state ``b`` of an ``n``-qubit register gets its sign
    flipped when the control fires."""

    b: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise CircuitError(f"register width must be >= 1, got {self.n}")
        if not 0 <= self.b < 1 << self.n:
            raise CircuitError(f"basis index {self.b} out of range for n={self.n}")


def pauli_x(qubit: int = 0) -> GateOp:
    return GateOp(DENSE_1Q, np.array([[0, 1], [1, 0]]), (qubit,), name="x")


def rx(theta: float, qubit: int = 0) -> GateOp:
    """X-axis rotation by ``theta`` radians."""
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return GateOp(DENSE_1Q, np.array([[c, -1j * s], [-1j * s, c]]), (qubit,), name="rx")


def hadamard(qubit: int = 0) -> GateOp:
    return GateOp(
        DENSE_1Q, _SQRT2_INV * np.array([[1, 1], [1, -1]]), (qubit,), name="h"
    )


def cry(theta: float, control: int, target: int) -> GateOp:
    """Y-axis rotation on ``target`` gated on ``control`` being |1>."""
    if control == target:
        raise CircuitError(f"control and target coincide at qubit {control}")
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return GateOp(
        CONTROLLED_1Q, np.array([[c, -s], [s, c]]), (target,), control=control, name="cry"
    )


def mcz(n: int, qubits: tuple[int, ...] | None = None) -> GateOp:
    """Multi-controlled Z over ``n`` qubits: flips the sign of |1...1> only."""
    if n < 1:
        raise CircuitError(f"mcz needs n >= 1, got {n}")
    diag = np.ones(1 << n, dtype=complex)
    diag[-1] = -1.0
    return GateOp(DIAGONAL, diag, qubits if qubits is not None else tuple(range(n)), name="mcz")


def lambda_diag(b: int, n: int, qubits: tuple[int, ...] | None = None) -> GateOp:
    """Diagonal over an ``n``-qubit register with entry ``b`` set to -1."""
    spec = DiscretePrimitiveSpec(b, n)
    diag = np.ones(1 << spec.n, dtype=complex)
    diag[spec.b] = -1.0
    return GateOp(
        DIAGONAL, diag, qubits if qubits is not None else tuple(range(n)), name="lambda"
    )


def discrete_primitive(
    spec: DiscretePrimitiveSpec,
    control: int = 0,
    targets: tuple[int, ...] | None = None,
) -> GateOp:
    """Controlled sign flip of data basis state ``spec.b``.

    Identity while the control qubit is |0>; applies the lambda_diag(spec.b)
    diagonal to the target register when the control is |1>. Defaults place
    the control on qubit 0 and the data register on qubits 1..n.
    """
    diag = np.ones(1 << spec.n, dtype=complex)
    diag[spec.b] = -1.0
    if targets is None:
        targets = tuple(range(1, spec.n + 1))
    if len(targets) != spec.n:
        raise CircuitError(f"need {spec.n} target qubits, got {len(targets)}")
    return GateOp(CONTROLLED_DIAGONAL, diag, targets, control=control, name="dp")


def grover_diffusion_reference(n: int, qubits: tuple[int, ...] | None = None) -> list[GateOp]:
    """Gate sequence for the fixed reflection about the uniform state.

    Composite equals 2|s><s| - I (|s> uniform) up to a global phase. Kept as
    a ground-truth amplitude-amplification check; the trainable diffusion in
    :mod:`qhattn.ansatz` replaces it in the model.
    """
    if n < 2:
        raise ConfigError(f"diffusion needs n >= 2, got {n}")
    if qubits is None:
        qubits = tuple(range(n))
    seq: list[GateOp] = [hadamard(q) for q in qubits]
    seq += [pauli_x(q) for q in qubits]
    seq.append(mcz(n, qubits))
    seq += [pauli_x(q) for q in qubits]
    seq += [hadamard(q) for q in qubits]
    return seq


def grover_marked_probabilities(
    n: int, marked: int, iterations: int | None = None
) -> list[float]:
    """Probability of the marked state after each Grover iteration.

    Starts from the uniform superposition, applies exact-oracle sign flip
    followed by the reference diffusion, and records P(marked) per round.
    ``iterations`` defaults to the optimal round count floor(pi/4 * sqrt(2^n)).
    """
    if n < 2:
        raise ConfigError(f"grover demo needs n >= 2, got {n}")
    if not 0 <= marked < 1 << n:
        raise ConfigError(f"marked index {marked} out of range for n={n}")
    if iterations is None:
        iterations = max(1, math.floor(math.pi / 4.0 * math.sqrt(1 << n)))
    state = qcore.new_zero_state(n)
    for q in range(n):
        state = qcore.apply_gate(state, hadamard(q))
    oracle = lambda_diag(marked, n)
    diffusion = grover_diffusion_reference(n)
    probs = []
    for _ in range(iterations):
        state = qcore.apply_gate(state, oracle)
        for g in diffusion:
            state = qcore.apply_gate(state, g)
        probs.append(float(np.abs(state.amps[marked]) ** 2))
    return probs
