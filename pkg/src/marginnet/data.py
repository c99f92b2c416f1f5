"""Dataset loading and batching.

Supported sources:
    - IDX image/label file pairs (the classic big-endian binary layout:
      a 4-byte magic, big-endian u32 dimension sizes, then raw unsigned
      bytes).  Gzipped files are detected by their 1f 8b prefix and
      decompressed transparently.  Pixels are scaled to [0, 1].
    - CIFAR-10 binary batches (per record: 1 label byte then 3072 pixel
      bytes, channel-major 3x32x32).
    - Synthetic Gaussian blobs with well-separated, balanced classes.

No loader fetches anything over the network; callers point at files on
disk.
"""

import gzip
from dataclasses import dataclass

import numpy as np

from .tensor import DTYPE, DomainError, ShapeError

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049

SPLITS = ("train", "val", "test")


class IdxFormatError(ValueError):
    """Base for malformed IDX input."""


class IdxMagicError(IdxFormatError):
    """Magic number is not the expected images/labels constant."""


class IdxTruncatedError(IdxFormatError):
    """File ends before the header-declared payload."""


class IdxCountMismatchError(IdxFormatError):
    """Image count and label count disagree."""


@dataclass
class Dataset:
    """A split of examples: float64 inputs plus integer labels.

    inputs is [N, D] (flat features) or [N, C, H, W] (images); labels
    is [N] with values in [0, num_classes).
    """

    inputs: np.ndarray
    labels: np.ndarray
    num_classes: int
    split: str = "train"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise DomainError(f"split must be one of {SPLITS}, got {self.split!r}")
        if self.labels.ndim != 1 or self.inputs.shape[0] != self.labels.shape[0]:
            raise ShapeError(
                f"inputs {self.inputs.shape} vs labels {self.labels.shape}"
            )
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= self.num_classes
        ):
            raise DomainError(
                f"labels must lie in [0, {self.num_classes}), got range "
                f"[{self.labels.min()}, {self.labels.max()}]"
            )

    @property
    def n(self):
        return self.inputs.shape[0]

    def subset(self, indices, split=None):
        return Dataset(
            self.inputs[indices],
            self.labels[indices],
            self.num_classes,
            split or self.split,
        )


def _read_bytes(path):
    with open(path, "rb") as f:
        head = f.read(2)
        f.seek(0)
        if head == b"\x1f\x8b":
            with gzip.open(f) as g:
                return g.read()
        return f.read()


def _parse_idx(raw, path, expected_magic, expected_ndim):
    if len(raw) < 4:
        raise IdxTruncatedError(f"{path}: shorter than a magic number")
    magic = int.from_bytes(raw[0:4], "big")
    if magic != expected_magic:
        raise IdxMagicError(
            f"{path}: magic {magic}, expected {expected_magic}"
        )
    header_len = 4 + 4 * expected_ndim
    if len(raw) < header_len:
        raise IdxTruncatedError(f"{path}: header cut short")
    dims = [
        int.from_bytes(raw[4 + 4 * i : 8 + 4 * i], "big")
        for i in range(expected_ndim)
    ]
    count = int(np.prod(dims)) if dims else 0
    payload = raw[header_len:]
    if len(payload) < count:
        raise IdxTruncatedError(
            f"{path}: payload holds {len(payload)} bytes, header "
            f"declares {count}"
        )
    data = np.frombuffer(payload, dtype=np.uint8, count=count)
    return dims, data


def load_idx(images_path, labels_path, num_classes=10, split="train"):
    """Load an images/labels IDX pair into a Dataset.

    Images come out flat [N, rows*cols], scaled to [0, 1] by /255.
    Distinct errors separate a wrong magic, a truncated payload, and an
    image/label count mismatch.
    """
    img_dims, img_data = _parse_idx(
        _read_bytes(images_path), images_path, IMAGES_MAGIC, 3
    )
    lbl_dims, lbl_data = _parse_idx(
        _read_bytes(labels_path), labels_path, LABELS_MAGIC, 1
    )
    n, rows, cols = img_dims
    if lbl_dims[0] != n:
        raise IdxCountMismatchError(
            f"{images_path} holds {n} images but {labels_path} holds "
            f"{lbl_dims[0]} labels"
        )
    inputs = img_data.astype(DTYPE).reshape(n, rows * cols) / 255.0
    labels = lbl_data.astype(np.int64)
    return Dataset(inputs, labels, num_classes, split)


def write_idx(images_path, labels_path, images_u8, labels):
    """Write an IDX pair (images [N, H, W] uint8, labels [N]); the exact
    inverse of :func:`load_idx` up to the /255 scaling."""
    images_u8 = np.asarray(images_u8, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    if images_u8.ndim != 3:
        raise ShapeError(f"images must be [N, H, W], got {images_u8.shape}")
    if labels.shape != (images_u8.shape[0],):
        raise ShapeError(
            f"labels {labels.shape} vs {images_u8.shape[0]} images"
        )
    n, h, w = images_u8.shape
    with open(images_path, "wb") as f:
        f.write(IMAGES_MAGIC.to_bytes(4, "big"))
        for d in (n, h, w):
            f.write(int(d).to_bytes(4, "big"))
        f.write(images_u8.tobytes())
    with open(labels_path, "wb") as f:
        f.write(LABELS_MAGIC.to_bytes(4, "big"))
        f.write(int(n).to_bytes(4, "big"))
        f.write(labels.tobytes())


CIFAR_RECORD = 1 + 3 * 32 * 32


def load_cifar10(batch_paths, split="train"):
    """Load CIFAR-10 binary batches into a Dataset of [N, 3, 32, 32]
    images scaled to [0, 1]."""
    if not batch_paths:
        raise DomainError("need at least one batch file")
    chunks, labels = [], []
    for path in batch_paths:
        raw = _read_bytes(path)
        if len(raw) == 0 or len(raw) % CIFAR_RECORD:
            raise IdxFormatError(
                f"{path}: {len(raw)} bytes is not a whole number of "
                f"{CIFAR_RECORD}-byte records"
            )
        records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
        labels.append(records[:, 0].astype(np.int64))
        chunks.append(
            records[:, 1:].astype(DTYPE).reshape(-1, 3, 32, 32) / 255.0
        )
    return Dataset(
        np.concatenate(chunks), np.concatenate(labels), 10, split
    )


def make_blobs(n, num_classes, dim, separation, rng, split="train"):
    """Balanced Gaussian blobs with pairwise-separated centers.

    Centers are rejection-sampled in a box until every pair is at least
    ``separation`` apart; each class then gets unit-variance Gaussian
    points around its center.  Class sizes differ by at most one.
    """
    if num_classes < 2:
        raise DomainError(f"need at least 2 classes, got {num_classes}")
    if n < num_classes:
        raise DomainError(f"need at least {num_classes} points, got {n}")
    if dim < 1:
        raise DomainError(f"dim must be positive, got {dim}")
    if separation <= 0:
        raise DomainError(f"separation must be positive, got {separation}")
    half_width = separation * num_classes
    centers = np.empty((num_classes, dim), dtype=DTYPE)
    placed = 0
    while placed < num_classes:
        cand = rng.uniform(-half_width, half_width, size=dim)
        if placed and np.min(
            np.linalg.norm(centers[:placed] - cand, axis=1)
        ) < separation:
            continue
        centers[placed] = cand
        placed += 1
    labels = np.arange(n, dtype=np.int64) % num_classes
    inputs = centers[labels] + rng.normal(size=(n, dim))
    return Dataset(inputs, labels, num_classes, split)


@dataclass
class MinibatchPlan:
    """One epoch's worth of minibatch index arrays over a shuffled permutation."""

    permutation: np.ndarray
    batch_size: int

    @property
    def num_batches(self):
        return -(-len(self.permutation) // self.batch_size)

    def batches(self):
        n = len(self.permutation)
        for start in range(0, n, self.batch_size):
            yield self.permutation[start : start + self.batch_size]

    def __iter__(self):
        return self.batches()


def minibatches(dataset, batch_size, rng):
    """Plan one epoch of minibatches over ``dataset`` (a Dataset or a row count).

    All batches have ``batch_size`` rows except a shorter final batch
    when batch_size does not divide n.  batch_size > n is rejected
    rather than silently shrunk.
    """
    n = dataset.n if isinstance(dataset, Dataset) else int(dataset)
    if batch_size < 1:
        raise DomainError(f"batch_size must be positive, got {batch_size}")
    if batch_size > n:
        raise DomainError(
            f"batch_size {batch_size} exceeds dataset size {n}"
        )
    return MinibatchPlan(rng.permutation(n), batch_size)


def num_batches(n, batch_size):
    return -(-n // batch_size)


def kfold_indices(n, k, rng):
    """Seeded k-fold partition: returns k (train_idx, val_idx) pairs
    from one shuffled permutation, fold sizes differing by at most one."""
    if not 2 <= k <= n:
        raise DomainError(f"k must be in [2, {n}], got {k}")
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    out = []
    for i in range(k):
        val = folds[i]
        train = np.concatenate([folds[j] for j in range(k) if j != i])
        out.append((train, val))
    return out
