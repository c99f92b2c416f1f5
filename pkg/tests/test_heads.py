import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marginnet import gradcheck as gc
from marginnet.heads import (
    HeadSpec,
    apply_head,
    augment_ones,
    encode_targets,
    error_rate_pct,
    head_scores,
    init_head_weights,
    l1svm_head,
    l2svm_head,
    predict,
    softmax_head,
    softmax_probs,
)
from marginnet.tensor import DomainError

# Softmax of [1, 2, 3], computed once with 50-digit arithmetic and frozen.
SOFTMAX_123 = np.array(
    [0.090030573170380458, 0.24472847105479765, 0.66524095577482189]
)
LN_10 = 2.3025850929940457


class TestSoftmaxProbs:
    def test_frozen_reference_values(self):
        npt.assert_allclose(
            softmax_probs(np.array([[1.0, 2.0, 3.0]]))[0], SOFTMAX_123,
            rtol=0, atol=1e-15,
        )

    def test_zero_scores_are_uniform(self):
        npt.assert_allclose(
            softmax_probs(np.zeros((2, 4))), np.full((2, 4), 0.25),
            rtol=0, atol=1e-15,
        )

    def test_shift_invariance(self):
        rng = np.random.default_rng(0)
        s = rng.normal(size=(5, 6))
        shifted = softmax_probs(s + 123.456)
        npt.assert_allclose(softmax_probs(s), shifted, rtol=0, atol=1e-12)

    def test_huge_scores_do_not_overflow(self):
        p = softmax_probs(np.array([[1000.0, 1001.0, 999.0]]))
        assert np.all(np.isfinite(p))
        npt.assert_allclose(p.sum(), 1.0, rtol=1e-12)


class TestSoftmaxHead:
    def test_zero_weights_give_log_k(self):
        w = np.zeros((8, 10))  # dim 7 plus bias row, 10 classes
        h = np.random.default_rng(1).normal(size=(6, 7))
        one_hot = encode_targets(np.arange(6) % 10, 10, "one_hot")
        out = softmax_head(w, h, one_hot)
        npt.assert_allclose(out.loss, LN_10, rtol=0, atol=1e-12)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(2)
        h = rng.normal(size=(5, 4))
        w = init_head_weights(4, 3, rng=rng, init_std=0.5)
        one_hot = encode_targets(rng.integers(0, 3, size=5), 3, "one_hot")
        out = softmax_head(w, h, one_hot, weight_decay=0.1)

        def loss():
            return softmax_head(w, h, one_hot, weight_decay=0.1).loss

        assert gc.check_gradient("d_w", loss, w, out.d_w).passed
        assert gc.check_gradient("d_h", loss, h, out.d_h).passed

    def test_bias_row_escapes_weight_decay(self):
        w = np.zeros((3, 4))
        w[-1, :] = [5.0, -3.0, 2.0, 0.0]  # bias row only, no real weights
        h = np.random.default_rng(3).normal(size=(2, 2))
        one_hot = encode_targets(np.array([0, 1]), 4, "one_hot")
        with_decay = softmax_head(w, h, one_hot, weight_decay=1.0)
        without = softmax_head(w, h, one_hot, weight_decay=0.0)
        # bias contributes nothing to the regularizer or its gradient
        npt.assert_allclose(with_decay.loss, without.loss, rtol=0, atol=0)
        npt.assert_array_equal(with_decay.d_w[-1], without.d_w[-1])


class TestSvmHeads:
    def test_l2_worked_example(self):
        # one example, one output column, weights [1, -1], zero bias:
        # score 0.1, margin 0.1, hinge 0.9, d_score = -2*0.9 = -1.8
        w = np.array([[1.0], [-1.0], [0.0]])
        h = np.array([[0.2, 0.1]])
        sign = np.array([[1.0]])
        out = l2svm_head(w, h, sign, c=1.0)
        npt.assert_allclose(out.d_h, [[-1.8, 1.8]], rtol=0, atol=1e-15)

    def test_margin_exactly_one_contributes_nothing(self):
        w = np.array([[1.0], [0.0]])
        h = np.array([[1.0]])  # score 1.0, margin exactly 1
        sign = np.array([[1.0]])
        for head in (l1svm_head, l2svm_head):
            out = head(w, h, sign, c=3.0)
            npt.assert_allclose(out.loss, 0.5)  # pure 0.5 * w^2, no data term
            npt.assert_array_equal(out.d_h, [[0.0]])

    def test_l1_gradients_match_fd_away_from_kink(self):
        rng = np.random.default_rng(3)
        h = rng.normal(size=(5, 4))
        w = init_head_weights(4, 3, rng=rng, init_std=0.5)
        sign = encode_targets(rng.integers(0, 3, size=5), 3, "sign")
        margins = head_scores(w, h) * sign
        assert np.min(np.abs(1.0 - margins)) > 1e-3  # kink clearance
        out = l1svm_head(w, h, sign, c=0.7)

        def loss():
            return l1svm_head(w, h, sign, c=0.7).loss

        assert gc.check_gradient("d_w", loss, w, out.d_w).passed
        assert gc.check_gradient("d_h", loss, h, out.d_h).passed

    def test_l2_gradients_match_fd(self):
        rng = np.random.default_rng(4)
        h = rng.normal(size=(5, 4))
        w = init_head_weights(4, 3, rng=rng, init_std=0.5)
        sign = encode_targets(rng.integers(0, 3, size=5), 3, "sign")
        out = l2svm_head(w, h, sign, c=0.7)

        def loss():
            return l2svm_head(w, h, sign, c=0.7).loss

        assert gc.check_gradient("d_w", loss, w, out.d_w).passed
        assert gc.check_gradient("d_h", loss, h, out.d_h).passed

    def test_loss_shrinks_to_weight_norm_as_c_vanishes(self):
        rng = np.random.default_rng(5)
        h = rng.normal(size=(4, 3))
        w = init_head_weights(3, 2, rng=rng, init_std=0.5)
        sign = encode_targets(np.array([0, 1, 0, 1]), 2, "sign")
        reg = 0.5 * float(np.sum(w[:-1] ** 2))
        for head in (l1svm_head, l2svm_head):
            losses = [head(w, h, sign, c=c).loss for c in (1e-2, 1e-5, 1e-9)]
            assert abs(losses[-1] - reg) < 1e-7
            assert abs(losses[-1] - reg) < abs(losses[0] - reg)

    def test_hinge_scales_with_batch_size_not_mean(self):
        # the margin data term is summed over examples, so doubling the
        # batch doubles it
        w = np.array([[1.0], [0.0]])
        sign1 = np.array([[1.0]])
        h1 = np.array([[-1.0]])
        loss1 = l1svm_head(w, h1, sign1, c=1.0).loss
        h2 = np.vstack([h1, h1])
        sign2 = np.vstack([sign1, sign1])
        loss2 = l1svm_head(w, h2, sign2, c=1.0).loss
        npt.assert_allclose(loss2 - 0.5, 2 * (loss1 - 0.5))


@settings(deadline=None, derandomize=True, max_examples=60)
@given(v=st.floats(1e-6, 1 - 1e-6))
def test_small_violations_cost_l2_less_than_l1(v):
    w = np.array([[1.0], [0.0]])
    sign = np.array([[1.0]])
    h = np.array([[1.0 - v]])  # margin 1 - v, violation v
    l1 = l1svm_head(w, h, sign, c=1.0).loss - 0.5
    l2 = l2svm_head(w, h, sign, c=1.0).loss - 0.5
    assert l2 < l1


@settings(deadline=None, derandomize=True, max_examples=60)
@given(v=st.floats(1 + 1e-6, 50))
def test_large_violations_cost_l2_more_than_l1(v):
    w = np.array([[1.0], [0.0]])
    sign = np.array([[1.0]])
    h = np.array([[1.0 - v]])
    l1 = l1svm_head(w, h, sign, c=1.0).loss - 0.5
    l2 = l2svm_head(w, h, sign, c=1.0).loss - 0.5
    assert l2 > l1


class TestTargets:
    def test_one_hot_round_trip(self):
        labels = np.array([2, 0, 1, 2])
        one_hot = encode_targets(labels, 3, "one_hot")
        npt.assert_array_equal(np.argmax(one_hot, axis=1), labels)
        npt.assert_array_equal(one_hot.sum(axis=1), np.ones(4))

    def test_sign_round_trip(self):
        labels = np.array([1, 0])
        sign = encode_targets(labels, 3, "sign")
        npt.assert_array_equal(sign, [[-1.0, 1.0, -1.0], [1.0, -1.0, -1.0]])

    def test_out_of_range_label_rejected(self):
        with pytest.raises(DomainError):
            encode_targets(np.array([0, 3]), 3, "one_hot")
        with pytest.raises(DomainError):
            encode_targets(np.array([-1]), 3, "sign")

    def test_malformed_targets_rejected_by_heads(self):
        w = np.zeros((3, 2))
        h = np.zeros((1, 2))
        with pytest.raises(DomainError):
            softmax_head(w, h, np.array([[0.5, 0.5]]))  # not exact one-hot
        with pytest.raises(DomainError):
            l1svm_head(w, h, np.array([[1.0, 1.0]]), c=1.0)  # two positives
        with pytest.raises(DomainError):
            l2svm_head(w, h, np.array([[0.0, 1.0]]), c=1.0)  # not in {-1,+1}


class TestPredictionRule:
    def test_same_weights_predict_identically_across_heads(self):
        rng = np.random.default_rng(6)
        h = rng.normal(size=(10, 5))
        w = init_head_weights(5, 4, rng=rng, init_std=0.5)
        labels = rng.integers(0, 4, size=10)
        outs = [
            apply_head(HeadSpec(kind, 4, c=1.0, weight_decay=0.1), w, h, labels)
            for kind in ("softmax", "l1svm", "l2svm")
        ]
        # identical scores, hence identical argmax predictions
        for out in outs[1:]:
            npt.assert_array_equal(out.scores, outs[0].scores)
        preds = predict(outs[0].scores)
        npt.assert_array_equal(preds, np.argmax(outs[0].scores, axis=1))

    def test_error_rate(self):
        scores = np.array([[2.0, 1.0], [0.0, 1.0], [3.0, 0.0], [0.0, 2.0]])
        assert error_rate_pct(scores, np.array([0, 1, 0, 1])) == 0.0
        assert error_rate_pct(scores, np.array([1, 1, 0, 1])) == 25.0
        with pytest.raises(DomainError):
            error_rate_pct(np.zeros((0, 2)), np.zeros(0, dtype=int))


class TestHeadSpec:
    def test_validation(self):
        with pytest.raises(DomainError):
            HeadSpec("mse", 3)
        with pytest.raises(DomainError):
            HeadSpec("softmax", 1)
        with pytest.raises(DomainError):
            HeadSpec("l1svm", 3, c=0.0)
        with pytest.raises(DomainError):
            HeadSpec("softmax", 3, weight_decay=-0.1)
        with pytest.raises(DomainError):
            HeadSpec("softmax", 3, dim=0)
        spec = HeadSpec("l2svm", 10, c=0.05, dim=128)
        assert spec.dim == 128

    def test_augment_ones_appends_bias_column(self):
        h = np.array([[1.0, 2.0]])
        npt.assert_array_equal(augment_ones(h), [[1.0, 2.0, 1.0]])
