"""Image-dataset ingestion and preprocessing.

Reads the standard gzipped IDX container (big-endian header, magic 2051 for
images / 2049 for labels), filters two classes, reduces each image to 8
principal components, and persists the result as a small versioned binary
cache with a CSV mirror. Everything is deterministic given the input files
and the seed. PCA is fitted on the training split only; the test split is
projected with the frozen model.
"""

from __future__ import annotations

import csv
import gzip
import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, IngestError, NumericalError

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049

FEATURE_COUNT = 8
IMAGES_PER_CLASS = 550
TRAIN_PER_CLASS = 500

CACHE_MAGIC = b"QHDS"
CACHE_VERSION = 1


@dataclass(frozen=True)
class Sample:
    """One preprocessed example: 8 PCA features and a binary label."""

    features: np.ndarray
    label: int

    def __post_init__(self):
        feats = np.array(self.features, dtype=float)
        if feats.shape != (FEATURE_COUNT,):
            raise ConfigError(f"expected {FEATURE_COUNT} features, got shape {feats.shape}")
        if self.label not in (0, 1):
            raise ConfigError(f"label must be 0 or 1, got {self.label}")
        feats.flags.writeable = False
        object.__setattr__(self, "features", feats)


@dataclass(frozen=True)
class PcaModel:
    """Frozen projection: mean, orthonormal components (descending explained
    variance), and their eigenvalues."""

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    total_variance: float

    def project(self, matrix: np.ndarray) -> np.ndarray:
        return (np.asarray(matrix, dtype=float) - self.mean) @ self.components.T

    def explained_variance_ratio(self) -> np.ndarray:
        return self.eigenvalues / self.total_variance


@dataclass(frozen=True)
class Dataset:
    train: tuple[Sample, ...]
    test: tuple[Sample, ...]

    def hash(self) -> str:
        return hashlib.sha256(_cache_bytes(self)).hexdigest()


def parse_idx(source) -> np.ndarray:
    """Decode a gzipped IDX tensor from a path or a bytes object.

    Returns a uint8 array shaped per the header. Raises IngestError with a
    byte offset for bad magic numbers, truncated payloads, or absurd
    dimensions; a truncated file never yields a partial tensor.
    """
    if isinstance(source, (bytes, bytearray)):
        compressed = bytes(source)
    else:
        try:
            with open(source, "rb") as fh:
                compressed = fh.read()
        except OSError as exc:
            raise IngestError(f"cannot read {source}: {exc}") from exc
    try:
        raw = gzip.decompress(compressed)
    except (OSError, EOFError) as exc:
        raise IngestError(f"not a valid gzip stream: {exc}") from exc

    if len(raw) < 4:
        raise IngestError(f"truncated header at byte {len(raw)}")
    (magic,) = struct.unpack_from(">I", raw, 0)
    if magic not in (IMAGES_MAGIC, LABELS_MAGIC):
        raise IngestError(f"bad magic {magic} at byte 0 (expected 2051 or 2049)")
    ndims = magic & 0xFF
    header_end = 4 + 4 * ndims
    if len(raw) < header_end:
        raise IngestError(f"truncated dimension header at byte {len(raw)}")
    dims = struct.unpack_from(f">{ndims}I", raw, 4)
    count = 1
    for d in dims:
        count *= d
    if count > 1 << 30:
        raise IngestError(f"dimension overflow: {dims}")
    if len(raw) - header_end != count:
        raise IngestError(
            f"payload has {len(raw) - header_end} bytes at offset {header_end}, "
            f"header promises {count}"
        )
    return np.frombuffer(raw, dtype=np.uint8, offset=header_end).reshape(dims)


def fit_pca(matrix: np.ndarray, k: int) -> PcaModel:
    """Top-k eigenpairs of the sample covariance (1/(N-1) normalization).

    Deterministic: symmetric eigensolver plus a sign convention that makes
    each component's largest-magnitude entry positive.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ConfigError(f"need a (rows>=2, cols) matrix, got shape {x.shape}")
    if not 1 <= k <= min(x.shape):
        raise ConfigError(f"k={k} out of range for shape {x.shape}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1][:k]
    eigenvalues = eigenvalues[order]
    components = eigenvectors[:, order].T
    if eigenvalues[0] <= 1e-12:
        raise NumericalError("degenerate data: covariance has no usable rank")
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(
        mean=mean,
        components=components,
        eigenvalues=eigenvalues,
        total_variance=float(np.trace(cov)),
    )


def build_dataset(
    train_images: np.ndarray,
    train_labels: np.ndarray,
    seed: int,
    scale_pixels: bool = False,
) -> tuple[list[Sample], list[Sample], PcaModel]:
    """Two-class split and projection.

    Takes the first 550 images of class 0 and of class 1 in file order,
    splits each class 500/50 into train/test with the seeded RNG, fits PCA
    on the 1000 training images only, and projects both splits to 8
    features. ``scale_pixels`` divides pixel bytes by 255 first (amplitude
    encoding renormalizes anyway, so this mostly affects PCA eigenvalues).
    """
    images = np.asarray(train_images)
    labels = np.asarray(train_labels).ravel()
    if images.shape[0] != labels.shape[0]:
        raise IngestError(
            f"image/label count mismatch: {images.shape[0]} vs {labels.shape[0]}"
        )
    flat = images.reshape(images.shape[0], -1).astype(float)
    if scale_pixels:
        flat = flat / 255.0

    rng = np.random.default_rng(seed)
    train_rows: list[np.ndarray] = []
    test_rows: list[np.ndarray] = []
    for cls in (0, 1):
        rows = np.flatnonzero(labels == cls)[:IMAGES_PER_CLASS]
        if rows.size < IMAGES_PER_CLASS:
            raise IngestError(
                f"need {IMAGES_PER_CLASS} images of class {cls}, found {rows.size}"
            )
        perm = rng.permutation(IMAGES_PER_CLASS)
        train_rows.append(rows[perm[:TRAIN_PER_CLASS]])
        test_rows.append(rows[perm[TRAIN_PER_CLASS:]])

    train_matrix = np.concatenate([flat[r] for r in train_rows])
    pca = fit_pca(train_matrix, FEATURE_COUNT)

    def project(rows_per_class) -> list[Sample]:
        samples = []
        for cls, rows in zip((0, 1), rows_per_class):
            for feats in pca.project(flat[rows]):
                samples.append(Sample(feats, cls))
        return samples

    return project(train_rows), project(test_rows), pca


def _cache_bytes(dataset: Dataset) -> bytes:
    chunks = [
        CACHE_MAGIC,
        struct.pack(
            "<IIII", CACHE_VERSION, len(dataset.train), len(dataset.test), FEATURE_COUNT
        ),
    ]
    for split in (dataset.train, dataset.test):
        feats = np.stack([s.features for s in split]).astype("<f8")
        labels = np.array([s.label for s in split], dtype=np.uint8)
        chunks.append(feats.tobytes())
        chunks.append(labels.tobytes())
    return b"".join(chunks)


def save_cache(path, dataset: Dataset) -> None:
    with open(path, "wb") as fh:
        fh.write(_cache_bytes(dataset))


def load_cache(path) -> Dataset:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IngestError(f"cannot read cache {path}: {exc}") from exc
    if raw[:4] != CACHE_MAGIC:
        raise IngestError(f"bad cache magic in {path}")
    version, n_train, n_test, n_feat = struct.unpack_from("<IIII", raw, 4)
    if version != CACHE_VERSION:
        raise IngestError(f"unsupported cache version {version}")
    if n_feat != FEATURE_COUNT:
        raise IngestError(f"cache has {n_feat} features, expected {FEATURE_COUNT}")

    offset = 20
    splits = []
    for count in (n_train, n_test):
        feat_bytes = count * n_feat * 8
        if len(raw) < offset + feat_bytes + count:
            raise IngestError(f"truncated cache at byte {len(raw)}")
        feats = np.frombuffer(raw, dtype="<f8", count=count * n_feat, offset=offset)
        labels = np.frombuffer(raw, dtype=np.uint8, count=count, offset=offset + feat_bytes)
        splits.append(
            tuple(Sample(f, int(l)) for f, l in zip(feats.reshape(count, n_feat), labels))
        )
        offset += feat_bytes + count
    if offset != len(raw):
        raise IngestError(f"{len(raw) - offset} trailing bytes in cache")
    return Dataset(splits[0], splits[1])


def write_csv(path, dataset: Dataset) -> None:
    """Human-readable mirror of the cache."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split", "label"] + [f"f{i}" for i in range(FEATURE_COUNT)])
        for name, split in (("train", dataset.train), ("test", dataset.test)):
            for s in split:
                writer.writerow([name, s.label] + [f"{v:.10g}" for v in s.features])
