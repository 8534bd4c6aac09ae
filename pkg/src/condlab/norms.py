"""Vector p-norms, dual witnesses, and mixed (r, s) operator norms.

Supported exponents are 1, 2, and inf.  Six of the nine operator-norm pairs
have closed forms (column maxima for r = 1, row dual norms for s = inf, and
the spectral case); the remaining pairs {(inf,1), (inf,2), (2,1)} are
NP-hard in general and are computed exactly here by enumerating sign
vectors, gated by ``max_enum_dim``.

Also provides the rank-one norm interpolator: given unit vectors x, y it
builds B = y u^T with ||B||_rs = 1 and B x = y, the workhorse behind the
worst-case perturbations used elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf

import numpy as np

from .errors import DimensionTooLarge, NotUnitVector, ZeroVector
from .linalg import as_matrix, spectral_norm_attainer

DEFAULT_MAX_ENUM_DIM = 20

_DUAL = {1.0: inf, 2.0: 2.0, inf: 1.0}
_NAMES = {"1": 1.0, "one": 1.0, "2": 2.0, "two": 2.0, "inf": inf, "infinity": inf}

#: Pairs computed by sign-vector enumeration rather than a closed form.
ENUMERATION_PAIRS = ((inf, 1.0), (inf, 2.0), (2.0, 1.0))


def norm_index(value):
    """Canonicalize a norm exponent to 1.0, 2.0 or inf."""
    if isinstance(value, str):
        try:
            return _NAMES[value.strip().lower()]
        except KeyError:
            raise ValueError(f"unsupported norm index {value!r}") from None
    value = float(value)
    if value not in _DUAL:
        raise ValueError(f"unsupported norm index {value!r}; use 1, 2 or inf")
    return value


def dual_exponent(r):
    """The exponent r* with 1/r + 1/r* = 1, under 1* = inf, inf* = 1, 2* = 2."""
    return _DUAL[norm_index(r)]


def vector_norm(x, r):
    """1-, 2- or inf-norm along the last axis.

    The 2-norm is scaled by the largest magnitude first, so extreme inputs
    neither underflow nor overflow when squared.
    """
    r = norm_index(r)
    x = np.asarray(x, dtype=np.float64)
    if r == 1.0:
        return np.sum(np.abs(x), axis=-1)
    if r == 2.0:
        scale = np.max(np.abs(x), axis=-1, keepdims=True)
        y = x / np.where(scale > 0.0, scale, 1.0)
        return scale[..., 0] * np.sqrt(np.sum(y * y, axis=-1))
    return np.max(np.abs(x), axis=-1)


def dual_witness(x, r):
    """A vector u with ||u||_{r*} = 1 and u . x = ||x||_r.

    Ties are broken deterministically: sign(0) = +1 for r = 1, and for
    r = inf the lowest index of maximum magnitude is used.
    """
    r = norm_index(r)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("dual_witness expects a single vector")
    if not np.any(x != 0.0):
        raise ZeroVector("dual witness of the zero vector is undefined")
    if r == 1.0:
        return np.where(x >= 0.0, 1.0, -1.0)
    if r == 2.0:
        return x / vector_norm(x, 2)
    k = int(np.argmax(np.abs(x)))
    u = np.zeros_like(x)
    u[k] = 1.0 if x[k] >= 0.0 else -1.0
    return u


def _sign_vector_blocks(m, block=4096):
    """Yield blocks of sign vectors covering {-1,1}^m up to global sign.

    The first coordinate is pinned to +1 since z and -z give equal norms.
    """
    total = 1 << (m - 1) if m > 1 else 1
    shifts = np.arange(max(m - 1, 1), dtype=np.uint64)
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total), dtype=np.uint64)
        z = np.ones((idx.size, m))
        if m > 1:
            bits = (idx[:, None] >> shifts[None, :]) & np.uint64(1)
            z[:, 1:] = 1.0 - 2.0 * bits.astype(np.float64)
        yield z


@dataclass
class OperatorNormResult:
    """An operator-norm value together with a unit vector attaining it."""

    value: float
    method: str  # "closed_form" or "vertex_enumeration"
    attainer: np.ndarray


def _enum_input_sup(a, s):
    """max over z in {-1,1}^m of ||A z||_s, with the best z."""
    best_val = -1.0
    best_z = None
    for z in _sign_vector_blocks(a.shape[-1]):
        vals = vector_norm(z @ a.T, s)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_z = z[k]
    return best_val, best_z


def operator_norm(a, r, s, max_enum_dim=DEFAULT_MAX_ENUM_DIM):
    """Exact operator norm sup ||A x||_s / ||x||_r with its attainer.

    Closed forms: r = 1 maximizes over columns; s = inf over rows (the
    attainer is the dual witness of the best row); (2,2) is sigma_max with
    its right singular vector.  The pairs (inf,1), (inf,2) and (2,1) are
    solved by exact enumeration over sign vectors and raise
    DimensionTooLarge when the enumerated dimension exceeds
    ``max_enum_dim``.
    """
    r = norm_index(r)
    s = norm_index(s)
    a = as_matrix(a)
    if a.ndim != 2:
        raise ValueError("operator_norm expects a single matrix; see operator_norm_values")
    n, m = a.shape
    if r == 1.0:
        vals = vector_norm(a.T, s)
        j = int(np.argmax(vals))
        attainer = np.zeros(m)
        attainer[j] = 1.0
        return OperatorNormResult(float(vals[j]), "closed_form", attainer)
    if s == inf:
        rstar = dual_exponent(r)
        vals = vector_norm(a, rstar)
        i = int(np.argmax(vals))
        if vals[i] == 0.0:
            attainer = np.zeros(m)
            attainer[0] = 1.0
        else:
            attainer = dual_witness(a[i], rstar)
        return OperatorNormResult(float(vals[i]), "closed_form", attainer)
    if r == 2.0 and s == 2.0:
        sigma, attainer = spectral_norm_attainer(a)
        return OperatorNormResult(sigma, "closed_form", attainer)
    # enumeration regime
    if r == inf:
        if m > max_enum_dim:
            raise DimensionTooLarge(f"(inf,{s:g}) norm needs 2^{m} sign vectors")
        value, attainer = _enum_input_sup(a, s)
        return OperatorNormResult(value, "vertex_enumeration", attainer)
    # (2, 1): sup ||A x||_1 = max over signs z of ||A^T z||_2, x = A^T z / ||.||
    if n > max_enum_dim:
        raise DimensionTooLarge(f"(2,1) norm needs 2^{n} sign vectors")
    value, z = _enum_input_sup(a.T, 2)
    w = a.T @ z
    nw = vector_norm(w, 2)
    if nw == 0.0:
        attainer = np.zeros(m)
        attainer[0] = 1.0
    else:
        attainer = w / nw
    return OperatorNormResult(value, "vertex_enumeration", attainer)


def operator_norm_values(a, r, s, max_enum_dim=DEFAULT_MAX_ENUM_DIM):
    """Operator-norm values for a stack of matrices (no attainers).

    Same exact methods as :func:`operator_norm`, vectorized over leading
    dimensions; used by the sampling estimator.
    """
    r = norm_index(r)
    s = norm_index(s)
    a = as_matrix(a)
    if r == 1.0:
        return np.max(vector_norm(np.swapaxes(a, -2, -1), s), axis=-1)
    if s == inf:
        return np.max(vector_norm(a, dual_exponent(r)), axis=-1)
    if r == 2.0 and s == 2.0:
        from .linalg import singular_values

        return singular_values(a)[..., 0]
    if r == inf:
        enum_dim, target = a.shape[-1], a
    else:  # (2, 1) enumerates over rows of A
        enum_dim, target = a.shape[-2], np.swapaxes(a, -2, -1)
        s = 2.0
    if enum_dim > max_enum_dim:
        raise DimensionTooLarge(f"enumeration needs 2^{enum_dim} sign vectors")
    best = None
    for z in _sign_vector_blocks(enum_dim, block=1024):
        # (..., blocks, out_dim) image of every sign vector
        img = np.einsum("zj,...ij->...zi", z, target)
        vals = np.max(vector_norm(img, s), axis=-1)
        best = vals if best is None else np.maximum(best, vals)
    return best


def rank_one_interpolator(x, y, r, s):
    """The rank-one matrix B = y u^T with ||B||_rs = 1 and B x = y.

    Requires ||x||_r = 1 and ||y||_s = 1 (within 1e-12); u is the dual
    witness of x, so B x = y (u . x) = y and the rank-one norm factors as
    ||y||_s * ||u||_{r*} = 1.
    """
    r = norm_index(r)
    s = norm_index(s)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if abs(vector_norm(x, r) - 1.0) > 1e-12:
        raise NotUnitVector("x must satisfy ||x||_r = 1")
    if abs(vector_norm(y, s) - 1.0) > 1e-12:
        raise NotUnitVector("y must satisfy ||y||_s = 1")
    u = dual_witness(x, r)
    return np.outer(y, u)
