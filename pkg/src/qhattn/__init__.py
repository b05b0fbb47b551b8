"""Trainable Grover-style hard-attention circuits for binary classification.

The public surface re-exports the pieces most users touch: state types and
gate application from :mod:`qhattn.qcore`, the circuit and its readout from
:mod:`qhattn.ansatz`, noise channels from :mod:`qhattn.noise`, the training
loop from :mod:`qhattn.train`, and dataset handling from :mod:`qhattn.data`.
"""

__version__ = "0.1.0"

from .ansatz import (
    ParamVector,
    QhasReport,
    adaptive_diffusion,
    build_circuit,
    flexible_oracle,
    forward,
    qhas,
)
from .data import Dataset, PcaModel, Sample, build_dataset, fit_pca, parse_idx
from .encoding import amplitude_encode, prepare_initial
from .errors import (
    CircuitError,
    ConfigError,
    EncodingError,
    IngestError,
    NumericalError,
    QhattnError,
)
from .gates import (
    DiscretePrimitiveSpec,
    cry,
    discrete_primitive,
    grover_diffusion_reference,
    grover_marked_probabilities,
    hadamard,
    lambda_diag,
    mcz,
    pauli_x,
    rx,
)
from .noise import NoiseSpec, apply_channel, kraus_ops, noisy_forward
from .qcore import (
    DensityMatrix,
    GateOp,
    StateVector,
    apply_gate,
    apply_gate_dm,
    dense_matrix,
    expectation_projector,
    from_statevector,
    new_zero_state,
)
from .train import (
    OptimizerState,
    RunRecord,
    TrainConfig,
    accuracy,
    gradient,
    loss,
    nesterov_step,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
