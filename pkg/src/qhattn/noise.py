"""Single-qubit Kraus channels and noisy circuit evaluation.

Two channels are supported: bit flip and amplitude damping. The insertion
policy is fixed in this version: the channel hits every qubit after each of
the three circuit stages (encoding, oracle, diffusion). Evolution is exact
on density matrices; there is no trajectory sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import ParamVector, adaptive_diffusion, expectations_z, flexible_oracle
from .encoding import prepare_batch
from .errors import CircuitError, ConfigError
from .qcore import DensityMatrix, _apply_kernel_dm, _apply_matrix_1q

BIT_FLIP = "bit-flip"
AMPLITUDE_DAMPING = "amplitude-damping"
KINDS = (BIT_FLIP, AMPLITUDE_DAMPING)

PLACEMENT_AFTER_EACH_STAGE = "after-each-stage"


@dataclass(frozen=True)
class NoiseSpec:
    """Channel kind, error probability, and insertion policy."""

    kind: str
    p: float
    placement: str = PLACEMENT_AFTER_EACH_STAGE

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}, expected one of {KINDS}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"noise probability must be in [0, 1], got {self.p}")
        if self.placement != PLACEMENT_AFTER_EACH_STAGE:
            raise ConfigError(f"unsupported placement {self.placement!r}")


def kraus_ops(spec: NoiseSpec) -> list[np.ndarray]:
    """Kraus operators of the channel; they satisfy sum K†K = I."""
    p = spec.p
    if spec.kind == BIT_FLIP:
        return [
            np.sqrt(1.0 - p) * np.eye(2, dtype=complex),
            np.sqrt(p) * np.array([[0, 1], [1, 0]], dtype=complex),
        ]
    return [
        np.array([[1, 0], [0, np.sqrt(1.0 - p)]], dtype=complex),
        np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex),
    ]


def _apply_channel_raw(rhos: np.ndarray, kraus: list[np.ndarray], qubit: int) -> np.ndarray:
    """rho -> sum_k K rho K† on the trailing (dim, dim) axes."""
    out = np.zeros_like(rhos)
    for k in kraus:
        left = np.swapaxes(_apply_matrix_1q(np.swapaxes(rhos, -1, -2), k, qubit), -1, -2)
        out += _apply_matrix_1q(left, np.conj(k), qubit)
    return out


def _apply_channel_all(rhos: np.ndarray, kraus: list[np.ndarray], n_qubits: int) -> np.ndarray:
    for q in range(n_qubits):
        rhos = _apply_channel_raw(rhos, kraus, q)
    return rhos


def apply_channel(rho: DensityMatrix, spec: NoiseSpec, qubit: int) -> DensityMatrix:
    """Apply the channel to one qubit of a density matrix."""
    if not 0 <= qubit < rho.n_qubits:
        raise CircuitError(f"qubit {qubit} out of range for {rho.n_qubits} qubits")
    return DensityMatrix(rho.n_qubits, _apply_channel_raw(rho.rho, kraus_ops(spec), qubit))


def noisy_forward_batch(
    features: np.ndarray, params: ParamVector, spec: NoiseSpec
) -> np.ndarray:
    """Z expectation on the readout qubit under noise, per batch row.

    Density-matrix simulation of the full circuit with the channel applied
    to every qubit after encoding, after the oracle, and after the
    diffusion block.
    """
    amps = prepare_batch(features)
    if amps.shape[1] != 2 << params.n:
        raise ConfigError(
            f"feature width {features.shape[1]} does not match n={params.n}"
        )
    n_qubits = params.n + 1
    kraus = kraus_ops(spec)
    rhos = amps[..., :, None] * np.conj(amps[..., None, :])
    rhos = _apply_channel_all(rhos, kraus, n_qubits)
    for gate in flexible_oracle(params):
        rhos = _apply_kernel_dm(rhos, gate)
    rhos = _apply_channel_all(rhos, kraus, n_qubits)
    for gate in adaptive_diffusion(params):
        rhos = _apply_kernel_dm(rhos, gate)
    rhos = _apply_channel_all(rhos, kraus, n_qubits)
    diag = np.real(np.diagonal(rhos, axis1=-2, axis2=-1))
    idx = np.arange(diag.shape[-1])
    p1 = np.sum(diag[..., (idx >> params.n) & 1 == 1], axis=-1)
    return 1.0 - 2.0 * p1


def noisy_forward(values, params: ParamVector, spec: NoiseSpec) -> float:
    """Single-sample convenience wrapper around :func:`noisy_forward_batch`."""
    features = np.asarray(values, dtype=float).reshape(1, -1)
    return float(noisy_forward_batch(features, params, spec)[0])
