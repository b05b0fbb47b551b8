"""Deterministic surrogate image data shaped like the real IDX training files.

Real Fashion-MNIST files cannot be downloaded in offline environments, so
tests synthesize a two-class 28x28 corpus with a comparable flavor: class 0
images are broad horizontal-band garments, class 1 images are two vertical
bars. Brightness jitter and pixel noise keep the classes from being
trivially separable. A few images with labels 2..9 are mixed in so class
filtering is actually exercised.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

IMAGES_NAME = "train-images-idx3-ubyte.gz"
LABELS_NAME = "train-labels-idx1-ubyte.gz"


def class_image(cls: int, rng: np.random.Generator) -> np.ndarray:
    base = np.zeros((28, 28))
    if cls == 0:
        r0 = int(rng.integers(5, 9))
        r1 = int(rng.integers(19, 23))
        base[r0:r1, 4:24] = 150.0
        base[r0 + 2 : r0 + 5, 4:24] += 60.0
    elif cls == 1:
        c0 = int(rng.integers(6, 10))
        c1 = int(rng.integers(16, 20))
        base[3:26, c0 : c0 + 4] = 180.0
        base[3:26, c1 : c1 + 4] = 180.0
    else:
        # filler for other labels: diagonal streak
        d = int(rng.integers(0, 8))
        for k in range(20):
            base[4 + k, min(27, d + k)] = 200.0
    base *= rng.uniform(0.7, 1.3)
    base += rng.normal(0.0, 18.0, size=(28, 28))
    return np.clip(base, 0, 255).astype(np.uint8)


def make_corpus(per_class: int = 600, seed: int = 123) -> tuple[np.ndarray, np.ndarray]:
    """Interleaved images/labels with classes 0, 1 and a sprinkle of 2..9."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    fillers = per_class // 10
    for i in range(per_class):
        for cls in (0, 1):
            images.append(class_image(cls, rng))
            labels.append(cls)
        if i < fillers:
            other = int(rng.integers(2, 10))
            images.append(class_image(other, rng))
            labels.append(other)
    return np.stack(images), np.array(labels, dtype=np.uint8)


def write_idx_images(path, images: np.ndarray) -> None:
    n, rows, cols = images.shape
    payload = struct.pack(">IIII", 2051, n, rows, cols) + images.astype(np.uint8).tobytes()
    with gzip.open(path, "wb") as fh:
        fh.write(payload)


def write_idx_labels(path, labels: np.ndarray) -> None:
    payload = struct.pack(">II", 2049, labels.shape[0]) + labels.astype(np.uint8).tobytes()
    with gzip.open(path, "wb") as fh:
        fh.write(payload)


def make_surrogate_dir(directory, per_class: int = 600, seed: int = 123) -> Path:
    """Write the standard gzipped IDX pair into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    images, labels = make_corpus(per_class=per_class, seed=seed)
    write_idx_images(directory / IMAGES_NAME, images)
    write_idx_labels(directory / LABELS_NAME, labels)
    return directory
