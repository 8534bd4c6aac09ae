"""Forward substitution under a controlled rounding model, and the
componentwise backward error of a computed triangular solve.

The reduced-precision mode rounds the result of every scalar operation to a
24-bit significand (round-to-nearest-even), the binary32 rounding model
fl(x op y) = (x op y)(1 + delta) with |delta| < 2^-24.  Rounding is applied
per operation on binary64 carriers rather than by running native float32:
this disables FMA/extended-precision effects by construction and keeps the
binary64 exponent range, so the model never sees spurious overflow on the
huge intermediate values that random ill-conditioned triangles produce.

The inner sum of forward substitution accumulates strictly left to right;
the backward-error bound assumes a fixed sequential summation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf

import numpy as np

from .errors import HypothesisViolated, NotLowerTriangular, ZeroDiagonal


@dataclass(frozen=True)
class PrecisionMode:
    mode: str
    eps_mach: float  # unit roundoff of one rounded operation


WORKING = PrecisionMode("working", 2.0**-53)
REDUCED = PrecisionMode("reduced", 2.0**-24)


def precision_mode(name):
    name = str(name).strip().lower()
    if name == "working":
        return WORKING
    if name == "reduced":
        return REDUCED
    raise ValueError(f"unknown precision mode {name!r}")


def round_reduced(x):
    """Round to the nearest 24-bit significand, ties to even, any exponent."""
    x = np.asarray(x, dtype=np.float64)
    mantissa, exponent = np.frexp(x)
    return np.ldexp(np.rint(mantissa * 2.0**24) * 2.0**-24, exponent)


def _rounder(precision):
    if precision.mode == "working":
        return lambda x: x
    return round_reduced


def _check_lower(lower):
    lower = np.asarray(lower, dtype=np.float64)
    if lower.ndim != 2 or lower.shape[0] != lower.shape[1]:
        raise ValueError("expected a square matrix")
    if np.any(np.triu(lower, 1) != 0.0):
        raise NotLowerTriangular("strict upper triangle must be exactly zero")
    return lower


def forward_substitution(lower, b, precision=WORKING):
    """Solve L x = b by forward substitution in the given precision.

    x_1 = b_1 / l_11 and, for i >= 2, x_i = (b_i - sum_j<i l_ij x_j) / l_ii
    with the sum accumulated left to right.  In reduced mode every product,
    addition, subtraction and division is rounded before the next operation.
    """
    lower = _check_lower(lower)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (lower.shape[0],):
        raise ValueError("right-hand side shape mismatch")
    if np.any(np.diag(lower) == 0.0):
        raise ZeroDiagonal("forward substitution needs nonzero diagonal entries")
    return _forward_substitution_batched(lower[None], b[None], precision)[0]


def _forward_substitution_batched(lower, b, precision):
    """Forward substitution on a stack of systems sharing one size.

    ``lower`` has shape (B, n, n), ``b`` shape (B, n).  Vectorizing across
    systems keeps the per-operation rounding model intact: each scalar
    operation of the algorithm becomes one elementwise array operation.
    """
    rnd = _rounder(precision)
    nb, n = b.shape
    x = np.empty((nb, n))
    x[:, 0] = rnd(b[:, 0] / lower[:, 0, 0])
    for i in range(1, n):
        w = np.zeros(nb)
        for j in range(i):
            w = rnd(w + rnd(lower[:, i, j] * x[:, j]))
        x[:, i] = rnd(rnd(b[:, i] - w) / lower[:, i, i])
    return x


@dataclass
class BackwardErrorReport:
    """Smallest componentwise backward error against the (n+2) eps bound."""

    epsilon_cw: float
    bound: float
    satisfied: bool
    residual: np.ndarray


def componentwise_backward_error(lower, b, x_hat, precision=WORKING):
    """Smallest eps admitting lower-triangular E with (L+E) x_hat = b and
    |e_ij| <= eps |l_ij|.

    Rowwise: eps_i = |b_i - (L x_hat)_i| / (|L| |x_hat|)_i, eps = max_i,
    with 0/0 = 0 and r/0 = inf; evaluated in working precision.  The
    reported bound is (n+2) * eps_mach of ``precision`` (the arithmetic the
    candidate solution is assumed to come from).
    """
    lower = _check_lower(lower)
    b = np.asarray(b, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    n = lower.shape[0]
    residual = b - lower @ x_hat
    eps = _rowwise_eps(np.abs(residual), np.abs(lower) @ np.abs(x_hat))
    bound = (n + 2) * precision.eps_mach
    return BackwardErrorReport(
        epsilon_cw=float(eps), bound=bound, satisfied=bool(eps <= bound), residual=residual
    )


def _rowwise_eps(abs_residual, denom):
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = np.where(
            denom > 0.0,
            abs_residual / np.where(denom > 0.0, denom, 1.0),
            np.where(abs_residual > 0.0, inf, 0.0),
        )
    return np.max(eps, axis=-1)


def hypothesis_gate(n, precision):
    """Enforce (n+2) * eps_mach < 1, the rounding-model smallness hypothesis."""
    if (n + 2) * precision.eps_mach >= 1.0:
        raise HypothesisViolated(
            f"(n+2)*eps_mach = {(n + 2) * precision.eps_mach:g} >= 1 at n={n}"
        )


def verify_backward_stability(lower, b, precision=REDUCED):
    """Solve in ``precision`` and measure the componentwise backward error.

    The report's ``satisfied`` flag checks epsilon_cw <= (n+2) * eps_mach,
    which holds for every valid input when the hypothesis gate passes.
    """
    b = np.asarray(b, dtype=np.float64)
    hypothesis_gate(b.shape[-1], precision)
    x_hat = forward_substitution(lower, b, precision)
    return componentwise_backward_error(lower, b, x_hat, precision)


def _verify_batched(lower, b, precision):
    """Batched verify for same-size stacks; returns (eps array, bound)."""
    n = b.shape[-1]
    hypothesis_gate(n, precision)
    x_hat = _forward_substitution_batched(lower, b, precision)
    residual = b - np.einsum("bij,bj->bi", lower, x_hat)
    denom = np.einsum("bij,bj->bi", np.abs(lower), np.abs(x_hat))
    return _rowwise_eps(np.abs(residual), denom), (n + 2) * precision.eps_mach
