"""The trainable hard-attention circuit.

Layout on n+1 qubits: qubit 0 is the ancilla control register, qubits 1..n
hold the amplitude-encoded data. The circuit is a flexible oracle (per basis
state b: an RX rotation on the ancilla followed by the controlled sign flip
of state b) followed by a trainable diffusion block on the data register,
and a Z-basis readout on the last data qubit.

Two conventions are deliberate and global:

* Oracle block order is RX(theta_b) first, then the controlled flip, in
  ascending b. The ancilla is never reset between blocks, so the RX angles
  act as cumulative toggles: flip b fires whenever the running XOR of
  "theta at an odd multiple of pi" is 1 at block b.
* The readout is the Pauli-Z expectation on qubit n, E = p(0) - p(1) in
  [-1, 1], so the sign of E can separate two classes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import plots
from .encoding import prepare_batch, prepare_initial
from .errors import ConfigError
from .gates import DiscretePrimitiveSpec, cry, discrete_primitive, hadamard, mcz, rx
from .qcore import GateOp, StateVector, _apply_kernel, apply_gate, expectation_projector

DEFAULT_QHAS_EPSILON = 0.05


@dataclass(frozen=True)
class ParamVector:
    """All trainable angles, in radians.

    ``oracle_thetas`` has one entry per controlled flip (2^n of them);
    ``diffusion_thetas`` holds the 2n controlled-Y angles of the diffusion
    block, first ring then mirror ring. For n=3 the total is 14.
    """

    n: int
    oracle_thetas: np.ndarray
    diffusion_thetas: np.ndarray

    def __post_init__(self):
        oracle = np.array(self.oracle_thetas, dtype=float)
        diffusion = np.array(self.diffusion_thetas, dtype=float)
        if self.n < 1:
            raise ConfigError(f"need at least one data qubit, got n={self.n}")
        if oracle.shape != (1 << self.n,):
            raise ConfigError(
                f"expected {1 << self.n} oracle angles for n={self.n}, "
                f"got shape {oracle.shape}"
            )
        if diffusion.shape != (2 * self.n,):
            raise ConfigError(
                f"expected {2 * self.n} diffusion angles for n={self.n}, "
                f"got shape {diffusion.shape}"
            )
        oracle.flags.writeable = False
        diffusion.flags.writeable = False
        object.__setattr__(self, "oracle_thetas", oracle)
        object.__setattr__(self, "diffusion_thetas", diffusion)

    def __len__(self) -> int:
        return (1 << self.n) + 2 * self.n

    def flat(self) -> np.ndarray:
        """Oracle angles followed by diffusion angles, as one vector."""
        return np.concatenate([self.oracle_thetas, self.diffusion_thetas])

    @classmethod
    def from_flat(cls, n: int, values) -> "ParamVector":
        values = np.asarray(values, dtype=float).ravel()
        expected = (1 << n) + 2 * n
        if values.size != expected:
            raise ConfigError(f"expected {expected} parameters for n={n}, got {values.size}")
        return cls(n, values[: 1 << n], values[1 << n :])

    @classmethod
    def zeros(cls, n: int) -> "ParamVector":
        return cls(n, np.zeros(1 << n), np.zeros(2 * n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "ParamVector":
        """Angles drawn uniformly from [0, 2*pi)."""
        return cls.from_flat(n, rng.uniform(0.0, 2.0 * math.pi, (1 << n) + 2 * n))


def _check_n(params: ParamVector, n: int | None) -> int:
    if n is not None and n != params.n:
        raise ConfigError(f"parameter vector is sized for n={params.n}, asked for n={n}")
    return params.n


def flexible_oracle(
    params: ParamVector, n: int | None = None, dp_first: bool = False
) -> list[GateOp]:
    """Oracle gate sequence: per b ascending, RX(theta_b) on the ancilla then
    the controlled flip of data state b.

    ``dp_first`` swaps the order within each block (flip before rotation);
    it exists only for experimentation with the alternate operator-order
    reading and is not used by the trained model.
    """
    n = _check_n(params, n)
    seq: list[GateOp] = []
    for b in range(1 << n):
        block = [
            rx(float(params.oracle_thetas[b]), qubit=0),
            discrete_primitive(DiscretePrimitiveSpec(b, n)),
        ]
        seq.extend(reversed(block) if dp_first else block)
    return seq


def _ring_target(b: int, n: int) -> int:
    return b + 1 if b != n - 1 else 0


def adaptive_diffusion(params: ParamVector, n: int | None = None) -> list[GateOp]:
    """Trainable diffusion block on data qubits 1..n.

    Hadamard layer, controlled-Y ring (control b, target b+1 cyclically),
    multi-controlled Z, mirror controlled-Y ring with its own angles in
    descending order, Hadamard layer. With all angles zero this reduces to
    the H / MCZ / H skeleton.
    """
    n = _check_n(params, n)
    if n < 2:
        raise ConfigError(f"diffusion needs n >= 2 data qubits, got {n}")
    data = tuple(range(1, n + 1))
    seq: list[GateOp] = [hadamard(q) for q in data]
    for b in range(n):
        seq.append(cry(float(params.diffusion_thetas[b]), 1 + b, 1 + _ring_target(b, n)))
    seq.append(mcz(n, data))
    for b in reversed(range(n)):
        seq.append(cry(float(params.diffusion_thetas[n + b]), 1 + b, 1 + _ring_target(b, n)))
    seq += [hadamard(q) for q in data]
    return seq


def build_circuit(params: ParamVector, n: int | None = None) -> list[GateOp]:
    """Full circuit after encoding: flexible oracle then adaptive diffusion."""
    n = _check_n(params, n)
    return flexible_oracle(params, n) + adaptive_diffusion(params, n)


def measured_qubit(n: int) -> int:
    """Global index of the readout qubit (the last data qubit)."""
    return n


def forward(values, params: ParamVector) -> float:
    """Z expectation on the readout qubit for one feature vector.

    Returns E = p(q_n = 0) - p(q_n = 1), a real number in [-1, 1].
    """
    state = prepare_initial(values)
    if state.n_qubits != params.n + 1:
        raise ConfigError(
            f"feature vector needs {state.n_qubits - 1} data qubits, "
            f"parameters are sized for {params.n}"
        )
    for gate in build_circuit(params):
        state = apply_gate(state, gate)
    q = measured_qubit(params.n)
    return expectation_projector(state, q, 0) - expectation_projector(state, q, 1)


def forward_batch(features: np.ndarray, params: ParamVector) -> np.ndarray:
    """Vectorized :func:`forward` over a (batch, l) feature matrix."""
    amps = prepare_batch(features)
    if amps.shape[1] != 2 << params.n:
        raise ConfigError(
            f"feature width {features.shape[1]} does not match n={params.n}"
        )
    for gate in build_circuit(params):
        amps = _apply_kernel(amps, gate)
    return expectations_z(amps, params.n)


def expectations_z(amps: np.ndarray, n: int) -> np.ndarray:
    """Z expectation on the readout qubit for a (batch, 2^(n+1)) amp array."""
    idx = np.arange(amps.shape[-1])
    p1 = np.sum(np.abs(amps[..., (idx >> measured_qubit(n)) & 1 == 1]) ** 2, axis=-1)
    return 1.0 - 2.0 * p1


@dataclass(frozen=True)
class QhasEntry:
    """Hard-attention score of one controlled flip."""

    dp_index: int
    theta: float
    distance_to_selection: float
    hard_score: int


@dataclass(frozen=True)
class QhasReport:
    """Per-flip selection report: which oracle angles sit at an odd multiple
    (4k+1) of pi, i.e. fully excite the ancilla."""

    entries: tuple[QhasEntry, ...]
    epsilon: float

    def scores(self) -> list[int]:
        return [e.hard_score for e in self.entries]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dp_index", "theta", "distance", "score"])
            for e in self.entries:
                writer.writerow(
                    [e.dp_index, f"{e.theta:.10f}", f"{e.distance_to_selection:.10f}", e.hard_score]
                )

    def write_svg(self, path, initial: "QhasReport | None" = None) -> None:
        """Color-map figure: one row per parameter set, red cells selected."""
        rows = []
        if initial is not None:
            rows.append(("initial", initial))
        rows.append(("final", self))
        plots.qhas_svg(path, rows)


def selection_distance(theta: float) -> float:
    """Distance from ``theta`` to the nearest angle of the form (4k+1)*pi."""
    k = round((theta / math.pi - 1.0) / 4.0)
    return min(abs(theta - (4.0 * kk + 1.0) * math.pi) for kk in (k - 1, k, k + 1))


def qhas(params: ParamVector, epsilon: float = DEFAULT_QHAS_EPSILON) -> QhasReport:
    """Score every controlled flip: 1 if its angle is within ``epsilon`` of
    an exact selection point, else 0."""
    if epsilon < 0:
        raise ConfigError(f"epsilon must be >= 0, got {epsilon}")
    entries = []
    for b, theta in enumerate(params.oracle_thetas):
        dist = selection_distance(float(theta))
        entries.append(QhasEntry(b, float(theta), dist, int(dist <= epsilon)))
    return QhasReport(tuple(entries), epsilon)
