"""Squared loss, exact gradients, Nesterov momentum, and the training loop.

The model is trained on the smooth residual (y' - E)^2 where y' is the
signed label (class 0 -> +1, class 1 -> -1) and E the raw readout
expectation; the sign function enters only when accuracy is evaluated.
Gradients come from exact parameter-shift rules (two-term for the ancilla
rotations, four-term for the controlled-Y angles) or from central finite
differences for cross-checking.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .ansatz import ParamVector, forward_batch
from .data import Dataset, Sample
from .encoding import data_qubits
from .errors import ConfigError
from .noise import NoiseSpec, noisy_forward_batch

PARAMETER_SHIFT = "parameter-shift"
FINITE_DIFFERENCE = "finite-difference"
GRADIENT_METHODS = (PARAMETER_SHIFT, FINITE_DIFFERENCE)

# class label -> signed target used by the loss
LABEL_MAP = {0: 1.0, 1: -1.0}

_FD_STEP = 1e-4
# four-term shift coefficients for controlled rotations
_C_PLUS = (math.sqrt(2.0) + 1.0) / (4.0 * math.sqrt(2.0))
_C_MINUS = (math.sqrt(2.0) - 1.0) / (4.0 * math.sqrt(2.0))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.09
    momentum: float = 0.9
    batch_size: int = 30
    steps: int = 120
    seed: int = 0
    gradient_method: str = PARAMETER_SHIFT
    noise: NoiseSpec | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch_size}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.gradient_method not in GRADIENT_METHODS:
            raise ConfigError(
                f"unknown gradient method {self.gradient_method!r}, "
                f"expected one of {GRADIENT_METHODS}"
            )


@dataclass(frozen=True)
class OptimizerState:
    """Momentum accumulator and step counter."""

    accumulator: np.ndarray
    step: int = 0

    def __post_init__(self):
        acc = np.array(self.accumulator, dtype=float)
        acc.flags.writeable = False
        object.__setattr__(self, "accumulator", acc)


@dataclass(frozen=True)
class StepMetrics:
    step: int
    train_loss: float
    train_accuracy: float
    test_accuracy: float


@dataclass(frozen=True)
class RunRecord:
    """Everything a training run produced, enough to reproduce it."""

    steps: tuple[StepMetrics, ...]
    initial_params: ParamVector
    final_params: ParamVector
    config: TrainConfig
    wall_clock_seconds: float
    e_by_class: dict = field(default_factory=dict)

    def write_metrics_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "train_loss", "train_accuracy", "test_accuracy"])
            for m in self.steps:
                writer.writerow(
                    [m.step, f"{m.train_loss:.8f}", f"{m.train_accuracy:.6f}", f"{m.test_accuracy:.6f}"]
                )

    def final_loss(self) -> float:
        return self.steps[-1].train_loss

    def mean_tail(self, metric: str, window: int = 10) -> float:
        """Mean of a metric over the last ``window`` recorded steps."""
        tail = self.steps[-window:]
        return float(np.mean([getattr(m, metric) for m in tail]))


def signed_labels(samples: list[Sample]) -> np.ndarray:
    return np.array([LABEL_MAP[s.label] for s in samples], dtype=float)


def _features(samples: list[Sample]) -> np.ndarray:
    return np.stack([s.features for s in samples])


def _expectations(features: np.ndarray, params: ParamVector, noise: NoiseSpec | None) -> np.ndarray:
    if noise is None:
        return forward_batch(features, params)
    return noisy_forward_batch(features, params, noise)


def loss(batch: list[Sample], params: ParamVector, noise: NoiseSpec | None = None) -> float:
    """Mean squared residual between signed labels and raw expectations."""
    if not batch:
        raise ConfigError("loss needs a nonempty batch")
    e = _expectations(_features(batch), params, noise)
    return float(np.mean((signed_labels(batch) - e) ** 2))


def _sign_predictions(e: np.ndarray) -> np.ndarray:
    # sgn(0) resolves to +1
    return np.where(e >= 0.0, 1.0, -1.0)


def accuracy(samples: list[Sample], params: ParamVector, noise: NoiseSpec | None = None) -> float:
    """Fraction of samples whose expectation sign matches the signed label."""
    if not samples:
        raise ConfigError("accuracy needs a nonempty sample list")
    e = _expectations(_features(samples), params, noise)
    return float(np.mean(_sign_predictions(e) == signed_labels(samples)))


def _shift_terms(k: int, n: int) -> list[tuple[float, float]]:
    """(shift, coefficient) pairs of the exact gradient rule for parameter k."""
    if k < 1 << n:
        return [(math.pi / 2.0, 0.5), (-math.pi / 2.0, -0.5)]
    return [
        (math.pi / 2.0, _C_PLUS),
        (-math.pi / 2.0, -_C_PLUS),
        (3.0 * math.pi / 2.0, -_C_MINUS),
        (-3.0 * math.pi / 2.0, _C_MINUS),
    ]


def gradient(
    batch: list[Sample],
    params: ParamVector,
    method: str = PARAMETER_SHIFT,
    noise: NoiseSpec | None = None,
) -> np.ndarray:
    """Gradient of the batch loss with respect to every parameter.

    ``parameter-shift`` differentiates the expectations exactly and chains
    through the squared loss; ``finite-difference`` applies central
    differences (step 1e-4) to the loss itself. The two agree to ~1e-4.
    """
    if not batch:
        raise ConfigError("gradient needs a nonempty batch")
    if method not in GRADIENT_METHODS:
        raise ConfigError(f"unknown gradient method {method!r}")
    feats = _features(batch)
    targets = signed_labels(batch)
    flat = params.flat()
    grad = np.zeros(flat.size)

    if method == FINITE_DIFFERENCE:
        for k in range(flat.size):
            for sign in (1.0, -1.0):
                shifted = flat.copy()
                shifted[k] += sign * _FD_STEP
                e = _expectations(feats, ParamVector.from_flat(params.n, shifted), noise)
                grad[k] += sign * float(np.mean((targets - e) ** 2))
        return grad / (2.0 * _FD_STEP)

    e0 = _expectations(feats, params, noise)
    residual = 2.0 * (e0 - targets) / len(batch)  # dL/dE per sample
    for k in range(flat.size):
        de = np.zeros(len(batch))
        for shift, coeff in _shift_terms(k, params.n):
            shifted = flat.copy()
            shifted[k] += shift
            de += coeff * _expectations(feats, ParamVector.from_flat(params.n, shifted), noise)
        grad[k] = float(residual @ de)
    return grad


def nesterov_step(
    params: ParamVector,
    opt_state: OptimizerState,
    grad_at_lookahead: np.ndarray,
    config: TrainConfig,
) -> tuple[ParamVector, OptimizerState]:
    """One momentum update.

    a' = momentum * a + lr * g, theta' = theta - a', where g must have been
    evaluated at the lookahead point theta - momentum * a.
    """
    grad = np.asarray(grad_at_lookahead, dtype=float)
    if grad.shape != opt_state.accumulator.shape or grad.size != len(params):
        raise ConfigError(
            f"gradient shape {grad.shape} does not match accumulator "
            f"{opt_state.accumulator.shape}"
        )
    acc = config.momentum * opt_state.accumulator + config.learning_rate * grad
    new_params = ParamVector.from_flat(params.n, params.flat() - acc)
    return new_params, OptimizerState(acc, opt_state.step + 1)


def lookahead_params(params: ParamVector, opt_state: OptimizerState, config: TrainConfig) -> ParamVector:
    return ParamVector.from_flat(
        params.n, params.flat() - config.momentum * opt_state.accumulator
    )


class _EpochBatcher:
    """Without-replacement batches, reshuffled once per epoch; a trailing
    partial chunk is dropped."""

    def __init__(self, count: int, batch_size: int, rng: np.random.Generator):
        if batch_size > count:
            raise ConfigError(f"batch size {batch_size} exceeds dataset size {count}")
        self.count = count
        self.batch_size = batch_size
        self.rng = rng
        self.perm = np.empty(0, dtype=int)
        self.pos = count

    def next(self) -> np.ndarray:
        if self.pos + self.batch_size > self.count:
            self.perm = self.rng.permutation(self.count)
            self.pos = 0
        out = self.perm[self.pos : self.pos + self.batch_size]
        self.pos += self.batch_size
        return out


def _e_summary(e: np.ndarray, labels: np.ndarray) -> dict:
    out = {}
    for cls in (0, 1):
        vals = e[labels == LABEL_MAP[cls]]
        out[f"class_{cls}"] = {
            "mean": float(np.mean(vals)),
            "min": float(np.min(vals)),
            "max": float(np.max(vals)),
        }
    return out


def train(dataset: Dataset, config: TrainConfig) -> RunRecord:
    """Run the full training loop; deterministic given ``config.seed``.

    Parameters start uniform on [0, 2*pi). Each step draws a batch, takes a
    Nesterov step using the gradient at the lookahead point, then records
    loss and accuracies over the full train and test splits.
    """
    train_samples = list(dataset.train)
    test_samples = list(dataset.test)
    if {s.label for s in train_samples} != {0, 1}:
        raise ConfigError("training split must contain both classes")
    n = data_qubits(len(train_samples[0].features))

    rng = np.random.default_rng(config.seed)
    params = ParamVector.random(n, rng)
    initial_params = params
    opt_state = OptimizerState(np.zeros(len(params)))
    batcher = _EpochBatcher(len(train_samples), config.batch_size, rng)

    train_feats = _features(train_samples)
    train_y = signed_labels(train_samples)
    test_feats = _features(test_samples)
    test_y = signed_labels(test_samples)

    metrics = []
    t0 = time.perf_counter()
    train_e = np.zeros(len(train_samples))
    for step in range(1, config.steps + 1):
        batch = [train_samples[i] for i in batcher.next()]
        grad = gradient(
            batch, lookahead_params(params, opt_state, config), config.gradient_method, config.noise
        )
        params, opt_state = nesterov_step(params, opt_state, grad, config)

        train_e = _expectations(train_feats, params, config.noise)
        test_e = _expectations(test_feats, params, config.noise)
        metrics.append(
            StepMetrics(
                step=step,
                train_loss=float(np.mean((train_y - train_e) ** 2)),
                train_accuracy=float(np.mean(_sign_predictions(train_e) == train_y)),
                test_accuracy=float(np.mean(_sign_predictions(test_e) == test_y)),
            )
        )
    return RunRecord(
        steps=tuple(metrics),
        initial_params=initial_params,
        final_params=params,
        config=config,
        wall_clock_seconds=time.perf_counter() - t0,
        e_by_class=_e_summary(train_e, train_y),
    )
