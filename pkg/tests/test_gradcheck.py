import numpy as np
import numpy.testing as npt
import pytest

from marginnet.gradcheck import (
    EPS,
    TOL,
    compare_gradients,
    check_gradient,
    fd_gradient,
    rel_errors,
)


class TestFdGradient:
    def test_quadratic_matches_analytic(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(4, 3))
        a = rng.normal(size=(4, 3))

        def f():
            return float(np.sum(a * x * x))

        numeric = fd_gradient(f, x)
        npt.assert_allclose(numeric, 2 * a * x, rtol=1e-7, atol=1e-9)

    def test_restores_input_exactly(self):
        x = np.array([1.0, 2.0, 3.0])
        before = x.copy()
        fd_gradient(lambda: float(np.sum(x**3)), x)
        npt.assert_array_equal(x, before)


class TestRelErrors:
    def test_unit_floor_keeps_tiny_values_comparable(self):
        # denominator max(|a|, |n|, 1): near-zero pairs do not explode
        a = np.array([1e-12, 2.0])
        n = np.array([0.0, 2.0 + 2e-7])
        errs = rel_errors(a, n)
        assert errs[0] < 1e-11
        npt.assert_allclose(errs[1], 1e-7, rtol=1e-3)


class TestCompareGradients:
    def test_matching_gradients_pass(self):
        g = np.array([[1.0, -2.0], [0.5, 3.0]])
        result = compare_gradients("w", g, g + 1e-9)
        assert result.passed
        assert result.max_rel_error < TOL

    def test_corrupted_gradient_detected_and_reported(self):
        g = np.array([[1.0, -2.0], [0.5, 3.0]])
        bad = g.copy()
        bad[1, 0] += 0.25
        result = compare_gradients("w", bad, g)
        assert not result.passed
        assert result.worst_index == (1, 0)
        text = result.summary()
        assert "w" in text
        assert "(1, 0)" in text
        # both values appear so the report is actionable on its own
        assert "0.75" in text
        assert "0.5" in text

    def test_check_gradient_end_to_end(self):
        x = np.array([0.3, -1.2, 2.0])

        def f():
            return float(np.sum(np.sin(x)))

        good = check_gradient("sin", f, x, np.cos(x))
        assert good.passed
        bad = check_gradient("sin", f, x, np.cos(x) * 1.01)
        assert not bad.passed


def test_default_constants():
    assert EPS == pytest.approx(1e-5)
    assert TOL == pytest.approx(1e-6)
