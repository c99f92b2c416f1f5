"""Finite-difference gradient verification.

Central differences at 64-bit are the independent oracle for every
analytic backward pass in this library.  Relative error is floored at
unit scale, so for gradients below 1.0 in magnitude the bound acts as an
absolute tolerance; finite-difference noise on near-zero entries then
cannot produce spurious failures.
"""

from dataclasses import dataclass

import numpy as np

EPS = 1e-5
TOL = 1e-6


def fd_gradient(f, x, eps=EPS):
    """Numeric gradient of scalar ``f`` at ``x`` by central differences.

    ``x`` is perturbed in place one entry at a time and restored, so ``f``
    may close over ``x`` itself.
    """
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f()
        flat[i] = orig - eps
        fm = f()
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * eps)
    return grad


def rel_errors(analytic, numeric):
    """|a - n| / max(|a|, |n|, 1) per entry."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1.0)
    return np.abs(a - n) / denom


@dataclass
class GradCheckResult:
    """Outcome of one analytic-vs-numeric comparison."""

    name: str
    max_rel_error: float
    worst_index: tuple
    analytic_at_worst: float
    numeric_at_worst: float
    tol: float

    @property
    def passed(self):
        return self.max_rel_error < self.tol

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name}: max rel err {self.max_rel_error:.3e} "
            f"at {self.worst_index} (analytic {self.analytic_at_worst:.9g}, "
            f"numeric {self.numeric_at_worst:.9g}, tol {self.tol:g})"
        )


def compare_gradients(name, analytic, numeric, tol=TOL):
    """Compare an analytic gradient against its numeric oracle."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.shape != numeric.shape:
        raise ValueError(
            f"{name}: gradient shapes disagree: {analytic.shape} vs {numeric.shape}"
        )
    errs = rel_errors(analytic, numeric)
    if errs.size == 0:
        return GradCheckResult(name, 0.0, (), 0.0, 0.0, tol)
    worst = np.unravel_index(np.argmax(errs), errs.shape)
    return GradCheckResult(
        name,
        float(errs[worst]),
        tuple(int(i) for i in worst),
        float(analytic[worst]),
        float(numeric[worst]),
        tol,
    )


def check_gradient(name, f, x, analytic, eps=EPS, tol=TOL):
    """Check ``analytic`` = dF/dx for the scalar-valued closure ``f``."""
    numeric = fd_gradient(f, x, eps=eps)
    return compare_gradients(name, analytic, numeric, tol=tol)
