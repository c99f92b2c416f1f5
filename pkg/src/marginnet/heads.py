"""Output objectives: softmax cross-entropy and linear-SVM margin heads.

All three heads score a batch of penultimate activations h [N, D] with a
single weight matrix W [(D+1), K] whose last row is the bias (inputs are
augmented with a constant 1), and they differ only in the loss applied
to those scores.  Multiclass margin heads are one-vs-rest: class k's
machine sees target +1 on rows of class k and -1 elsewhere, and all K
machines share the augmented-input convention.  Prediction is always
the argmax of the raw scores, so heads are drop-in interchangeable at
inference time.

Losses over a minibatch of size N, writing W_k for column k of W with
its bias entry excluded from regularization, s = augment(h) @ W,
margins M = s * T:

    softmax:  mean_n [ -log p_{y_n} ]  +  0.5 * weight_decay * ||W_nobias||^2
    l1svm:    0.5 * ||W_nobias||^2  +  C * sum_{n,k} max(1 - M_{nk}, 0)
    l2svm:    0.5 * ||W_nobias||^2  +  C * sum_{n,k} max(1 - M_{nk}, 0)^2

The margin sums are summed over the minibatch (not averaged), matching
the gradients below; the softmax data term is a per-example mean.

Gradients with respect to the scores, used for both d_W and the
backpropagated d_h:

    softmax:  (p - y) / N
    l1svm:    -C * T * 1{M < 1}          (0 exactly at M == 1)
    l2svm:    -2 * C * T * max(1 - M, 0)

Every gradient here is validated against central finite differences in
the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .tensor import DTYPE, DomainError, ShapeError, argmax

HEAD_KINDS = ("softmax", "l1svm", "l2svm")


@dataclass
class HeadOutput:
    """Loss and exact gradients from one head evaluation.

    loss    scalar objective value (data term plus regularizer)
    scores  [N, K] raw scores, argmax of which is the prediction
    d_w     [(D+1), K] gradient w.r.t. the head weights (bias row included)
    d_h     [N, D] gradient w.r.t. the penultimate activations
    """

    loss: float
    scores: np.ndarray
    d_w: np.ndarray
    d_h: np.ndarray


@dataclass
class HeadSpec:
    """Which objective sits on top of the network, plus its constant.

    ``c`` is the margin-violation weight for l1svm/l2svm (must be > 0);
    ``weight_decay`` is the softmax L2 weight cost (must be >= 0).  Each
    is consulted only by its own head kind.
    """

    kind: str
    num_classes: int
    c: float = 0.01
    weight_decay: float = 0.0
    dim: int | None = None  # penultimate width, recorded when known

    def __post_init__(self):
        if self.kind not in HEAD_KINDS:
            raise DomainError(
                f"head kind must be one of {HEAD_KINDS}, got {self.kind!r}"
            )
        if self.num_classes < 2:
            raise DomainError(
                f"need at least 2 classes, got {self.num_classes}"
            )
        if self.dim is not None and self.dim < 1:
            raise DomainError(f"head dim must be positive, got {self.dim}")
        if self.kind in ("l1svm", "l2svm"):
            _check_c(self.c)
        else:
            _check_weight_decay(self.weight_decay)


def _check_c(c):
    if not c > 0:
        raise DomainError(f"margin penalty C must be positive, got {c}")


def _check_weight_decay(weight_decay):
    if weight_decay < 0:
        raise DomainError(
            f"weight decay must be non-negative, got {weight_decay}"
        )


def init_head_weights(dim, num_classes, rng=None, init_std=0.01):
    """Gaussian weights, zero bias row; layout [(dim+1), num_classes]."""
    w = np.zeros((dim + 1, num_classes), dtype=DTYPE)
    if rng is not None and init_std > 0.0:
        w[:dim] = rng.normal(0.0, init_std, size=(dim, num_classes))
    return w


def augment_ones(h):
    """Append a constant-1 column so the bias lives in the weight matrix."""
    h = np.asarray(h, dtype=DTYPE)
    if h.ndim != 2:
        raise ShapeError(f"activations must be [N, D], got shape {h.shape}")
    return np.hstack([h, np.ones((h.shape[0], 1), dtype=DTYPE)])


def head_scores(w, h):
    """Raw class scores augment(h) @ w for w [(D+1), K], h [N, D]."""
    w = np.asarray(w, dtype=DTYPE)
    ha = augment_ones(h)
    if w.ndim != 2 or w.shape[0] != ha.shape[1]:
        raise ShapeError(
            f"head weights {w.shape} do not match augmented activations "
            f"{ha.shape}: need [{ha.shape[1]}, K]"
        )
    return ha @ w


def softmax_probs(scores):
    """Row-wise softmax, stabilized by subtracting each row's max."""
    scores = np.asarray(scores, dtype=DTYPE)
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(scores):
    shifted = scores - scores.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def encode_targets(labels, num_classes, encoding):
    """Encode integer labels [N] as one-hot {0,1} or sign {-1,+1} targets.

    encoding "one_hot" suits the softmax head, "sign" the margin heads.
    Labels outside [0, num_classes) are rejected.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ShapeError(f"labels must be a vector, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise DomainError(
            f"labels must lie in [0, {num_classes}), got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    one_hot = np.zeros((labels.shape[0], num_classes), dtype=DTYPE)
    one_hot[np.arange(labels.shape[0]), labels] = 1.0
    if encoding == "one_hot":
        return one_hot
    if encoding == "sign":
        return 2.0 * one_hot - 1.0
    raise DomainError(f"unknown target encoding {encoding!r}")


def _check_one_hot(targets, n, k):
    targets = np.asarray(targets, dtype=DTYPE)
    if targets.shape != (n, k):
        raise ShapeError(
            f"one-hot targets must be [{n}, {k}], got {targets.shape}"
        )
    if not (np.all((targets == 0.0) | (targets == 1.0))
            and np.all(targets.sum(axis=1) == 1.0)):
        raise DomainError(
            "one-hot targets must be 0/1 with exactly one 1 per row"
        )
    return targets


def _check_sign(targets, n, k):
    targets = np.asarray(targets, dtype=DTYPE)
    if targets.shape != (n, k):
        raise ShapeError(
            f"sign targets must be [{n}, {k}], got {targets.shape}"
        )
    if not (np.all(np.abs(targets) == 1.0)
            and np.all((targets == 1.0).sum(axis=1) == 1)):
        raise DomainError(
            "sign targets must be +/-1 with exactly one +1 per row"
        )
    return targets


def _reg_and_grad(w):
    # Bias row carries no penalty and no regularizer gradient.
    w_nb = w.copy()
    w_nb[-1] = 0.0
    return 0.5 * float(np.sum(w_nb * w_nb)), w_nb


def softmax_head(w, h, targets_one_hot, weight_decay=0.0):
    """Mean cross-entropy of softmax(scores) plus an L2 weight cost.

    The weight cost 0.5 * weight_decay * ||W_nobias||^2 excludes the
    bias row.  Data gradient w.r.t. scores is (probs - targets) / N.
    """
    _check_weight_decay(weight_decay)
    h = np.asarray(h, dtype=DTYPE)
    scores = head_scores(w, h)
    n, k = scores.shape
    targets = _check_one_hot(targets_one_hot, n, k)
    w = np.asarray(w, dtype=DTYPE)
    log_probs = _log_softmax(scores)
    data_loss = -float(np.sum(targets * log_probs)) / n
    reg, w_nb = _reg_and_grad(w)
    d_scores = (softmax_probs(scores) - targets) / n
    d_w = augment_ones(h).T @ d_scores + weight_decay * w_nb
    d_h = (d_scores @ w.T)[:, :-1]
    return HeadOutput(data_loss + weight_decay * reg, scores, d_w, d_h)


def _svm_head(w, h, targets_sign, c, squared):
    _check_c(c)
    h = np.asarray(h, dtype=DTYPE)
    scores = head_scores(w, h)
    n, k = scores.shape
    targets = _check_sign(targets_sign, n, k)
    w = np.asarray(w, dtype=DTYPE)
    margins = scores * targets
    hinge = np.maximum(1.0 - margins, 0.0)
    reg, w_nb = _reg_and_grad(w)
    if squared:
        data = float(np.sum(hinge * hinge))
        d_scores = -2.0 * c * targets * hinge
    else:
        data = float(np.sum(hinge))
        # Subgradient choice: exactly-at-margin examples (M == 1) get 0.
        d_scores = -c * targets * (margins < 1.0)
    d_w = augment_ones(h).T @ d_scores + w_nb
    d_h = (d_scores @ w.T)[:, :-1]
    return HeadOutput(reg + c * data, scores, d_w, d_h)


def l1svm_head(w, h, targets_sign, c):
    """One-vs-rest hinge loss, summed over the batch:
    0.5 * ||W_nobias||^2 + C * sum max(1 - margin, 0)."""
    return _svm_head(w, h, targets_sign, c, squared=False)


def l2svm_head(w, h, targets_sign, c):
    """One-vs-rest squared hinge loss, summed over the batch:
    0.5 * ||W_nobias||^2 + C * sum max(1 - margin, 0)^2.

    Differentiable everywhere: the gradient -2C * t * max(1 - m, 0)
    approaches 0 as the margin approaches 1 from either side.
    """
    return _svm_head(w, h, targets_sign, c, squared=True)


def apply_head(spec, w, h, labels):
    """Evaluate the head named by ``spec`` on integer labels."""
    if spec.kind == "softmax":
        targets = encode_targets(labels, spec.num_classes, "one_hot")
        return softmax_head(w, h, targets, spec.weight_decay)
    targets = encode_targets(labels, spec.num_classes, "sign")
    if spec.kind == "l1svm":
        return l1svm_head(w, h, targets, spec.c)
    return l2svm_head(w, h, targets, spec.c)


def predict(scores):
    """Argmax class per row; ties go to the lowest class index."""
    scores = np.asarray(scores, dtype=DTYPE)
    if scores.ndim != 2:
        raise ShapeError(f"scores must be [N, K], got shape {scores.shape}")
    return argmax(scores, axis=1)


def error_rate_pct(scores, labels):
    """Percent of rows whose argmax score disagrees with the label."""
    labels = np.asarray(labels)
    pred = predict(scores)
    if pred.shape != labels.shape:
        raise ShapeError(
            f"predictions {pred.shape} vs labels {labels.shape}"
        )
    if labels.size == 0:
        raise DomainError("error rate over an empty batch is undefined")
    return 100.0 * float(np.mean(pred != labels))
