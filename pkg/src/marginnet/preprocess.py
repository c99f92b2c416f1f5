"""Input preprocessing: PCA, per-image normalization, per-pixel
standardization, and train-time augmentation.

Everything here is deterministic given its inputs (and the rng handed
to :func:`augment`); fitted transforms are plain dataclasses of arrays
so they serialize alongside model weights.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .tensor import DTYPE, DomainError, ShapeError

# Rank threshold, relative to the largest eigenvalue.
_RANK_RTOL = 1e-12


@dataclass
class PcaModel:
    """Fitted PCA basis: data mean [D], components [D, d] (one column
    per component, unit norm, descending variance), and the per-
    component explained variances [d]."""

    mean: np.ndarray
    components: np.ndarray
    explained_variances: np.ndarray


def pca_fit(x, num_components):
    """Fit PCA by eigendecomposition of the population covariance.

    Deterministic and exactly invariant to row order: rows are sorted
    into a canonical order before any accumulation, so permuting the
    input permutes nothing downstream.  Each component's sign is fixed
    by making its largest-magnitude entry positive (lowest index on
    magnitude ties).  If the data has rank below ``num_components`` the
    trailing components span an arbitrary null-space basis; a warning is
    issued and their variances are ~0.
    """
    x = np.asarray(x, dtype=DTYPE)
    if x.ndim != 2:
        raise ShapeError(f"pca expects [N, D] data, got shape {x.shape}")
    n, d = x.shape
    if not 1 <= num_components <= d:
        raise DomainError(
            f"num_components must be in [1, {d}], got {num_components}"
        )
    if n <= num_components:
        raise DomainError(
            f"need more rows than components, got {n} rows for "
            f"{num_components} components"
        )
    # Canonical row order: float summation is order-sensitive, so sort
    # rows lexicographically to make the fit permutation-invariant bit
    # for bit.
    order = np.lexsort(x.T[::-1])
    xs = x[order]
    mean = xs.mean(axis=0)
    centered = xs - mean
    cov = (centered.T @ centered) / n
    evals, evecs = np.linalg.eigh(cov)
    evals = evals[::-1][:num_components]
    comps = evecs[:, ::-1][:, :num_components].copy()
    for j in range(num_components):
        lead = np.argmax(np.abs(comps[:, j]))
        if comps[lead, j] < 0:
            comps[:, j] = -comps[:, j]
    rank = int(np.sum(evals > _RANK_RTOL * max(evals[0], 0.0)))
    if evals[0] > 0 and rank < num_components:
        warnings.warn(
            f"data rank {rank} is below the {num_components} requested "
            "components; trailing components carry ~zero variance",
            stacklevel=2,
        )
    return PcaModel(mean, comps, np.maximum(evals, 0.0))


def pca_transform(model, x):
    """Project rows onto the fitted basis: (x - mean) @ components."""
    x = np.asarray(x, dtype=DTYPE)
    d = model.mean.shape[0]
    if x.ndim != 2 or x.shape[1] != d:
        raise ShapeError(
            f"pca transform expects [N, {d}] data, got shape {x.shape}"
        )
    return (x - model.mean) @ model.components


def pca_inverse_transform(model, z):
    """Map projections back: z @ components.T + mean (lossy below full rank)."""
    z = np.asarray(z, dtype=DTYPE)
    k = model.components.shape[1]
    if z.ndim != 2 or z.shape[1] != k:
        raise ShapeError(
            f"pca inverse expects [N, {k}] projections, got shape {z.shape}"
        )
    return z @ model.components.T + model.mean


def face_normalize(image, target_norm=100.0):
    """Per-image normalization: subtract the image's own mean, then
    scale the centered vector to the target Euclidean norm.

    Operates on the last axis, so a batch [N, D] normalizes each row.
    Constant images (centered norm ~ 0) have no defined direction and
    are rejected.
    """
    x = np.asarray(image, dtype=DTYPE)
    if x.ndim == 0:
        raise ShapeError("face normalization needs at least a vector")
    centered = x - x.mean(axis=-1, keepdims=True)
    norms = np.linalg.norm(centered, axis=-1, keepdims=True)
    if np.any(norms <= 1e-12):
        raise DomainError(
            "constant image has no direction to normalize"
        )
    return target_norm * centered / norms


class PixelStandardizer:
    """Per-column mean/std standardization fitted on training data.

    Uses the population std (divide by N); stds are floored at
    ``std_floor`` so constant pixels map to exactly 0 instead of NaN.
    """

    def __init__(self, std_floor=1e-8):
        if std_floor <= 0:
            raise DomainError(f"std floor must be positive, got {std_floor}")
        self.std_floor = std_floor
        self.mean = None
        self.std = None

    def fit(self, x):
        x = np.asarray(x, dtype=DTYPE)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ShapeError(
                f"standardizer expects non-empty [N, D] data, got {x.shape}"
            )
        self.mean = x.mean(axis=0)
        self.std = np.maximum(x.std(axis=0), self.std_floor)
        return self

    def apply(self, x):
        if self.mean is None:
            raise DomainError("standardizer must be fitted before apply")
        x = np.asarray(x, dtype=DTYPE)
        if x.ndim != 2 or x.shape[1] != self.mean.shape[0]:
            raise ShapeError(
                f"standardizer fitted on {self.mean.shape[0]} columns, "
                f"got shape {x.shape}"
            )
        return (x - self.mean) / self.std


def augment(x, rng, max_jitter=2, mirror=True):
    """Random horizontal mirror plus integer translation, per image.

    x is NCHW.  Each image is independently mirrored with probability
    0.5 (when ``mirror``) and shifted by (dy, dx) drawn uniformly from
    [-max_jitter, +max_jitter]^2, vacated pixels zero-filled.  Draw
    order is fixed (all mirror coins, then all offsets) so results are
    reproducible for a given rng state.
    """
    x = np.asarray(x, dtype=DTYPE)
    if x.ndim != 4:
        raise ShapeError(f"augment expects NCHW input, got shape {x.shape}")
    n, _, h, w = x.shape
    if max_jitter < 0:
        raise DomainError(f"max_jitter must be non-negative, got {max_jitter}")
    if max_jitter >= min(h, w):
        raise DomainError(
            f"max_jitter {max_jitter} too large for {h}x{w} images"
        )
    out = x.copy()
    if mirror:
        flips = rng.random(n) < 0.5
        out[flips] = out[flips][..., ::-1]
    if max_jitter > 0:
        offsets = rng.integers(-max_jitter, max_jitter + 1, size=(n, 2))
        shifted = np.zeros_like(out)
        for i in range(n):
            dy, dx = int(offsets[i, 0]), int(offsets[i, 1])
            y0, y1 = max(dy, 0), h + min(dy, 0)
            x0, x1 = max(dx, 0), w + min(dx, 0)
            shifted[i, :, y0:y1, x0:x1] = out[i, :, y0 - dy : y1 - dy,
                                              x0 - dx : x1 - dx]
        out = shifted
    return out
