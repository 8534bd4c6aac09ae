"""Closed-form condition numbers for the five matrix problems, distance to
singularity, and the constructive nearest singular perturbation.

Problem kinds:

* ``inversion``      A -> A^-1                      cond = kappa_rs(A)
* ``matvec``         x -> A x (A fixed)             cond = ||A|| ||x|| / ||Ax||
* ``solve_fixed_a``  b -> A^-1 b (A fixed)          cond = ||A^-1|| ||b|| / ||A^-1 b||
* ``solve_fixed_b``  A -> A^-1 b (b fixed)          cond = kappa_rs(A)
* ``solve_both``     (A, b) -> A^-1 b, mixed error  cond = kappa + ||A^-1|| ||b|| / ||A^-1 b||

Input norms are ||.||_rs on matrices and ||.||_r on primal vectors; the
output side uses the transposed pair (s, r).  kappa of a singular matrix is
inf by convention, while distance_to_singularity raises because its formula
divides by ||A^-1||.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf

import numpy as np

from .errors import SingularMatrix, ZeroVector
from .linalg import as_square, invert
from .norms import (
    DEFAULT_MAX_ENUM_DIM,
    norm_index,
    operator_norm,
    rank_one_interpolator,
    vector_norm,
)

PROBLEM_KINDS = ("inversion", "matvec", "solve_fixed_a", "solve_fixed_b", "solve_both")


def problem_kind(kind):
    kind = str(kind).strip().lower().replace("-", "_")
    if kind not in PROBLEM_KINDS:
        raise ValueError(f"unknown problem kind {kind!r}; expected one of {PROBLEM_KINDS}")
    return kind


@dataclass
class ConditionReport:
    """A condition-number value with its formula components.

    ``value = alpha * kappa`` for matvec on square inputs and
    ``value = kappa + mixed_term`` for solve_both; absent components are
    None.
    """

    kind: str
    value: float
    kappa: float | None = None
    alpha: float | None = None
    mixed_term: float | None = None


def kappa(a, r, s, max_enum_dim=DEFAULT_MAX_ENUM_DIM):
    """kappa_rs(A) = ||A||_rs * ||A^-1||_sr, with inf for singular input."""
    r = norm_index(r)
    s = norm_index(s)
    a = as_square(a)
    try:
        inv = invert(a)
    except SingularMatrix:
        return inf
    return (
        operator_norm(a, r, s, max_enum_dim).value
        * operator_norm(inv, s, r, max_enum_dim).value
    )


def _solution_term(inv, vec, r, s, max_enum_dim):
    """||A^-1||_sr * ||b||_s / ||A^-1 b||_r given the explicit inverse."""
    sol = inv @ vec
    denom = vector_norm(sol, r)
    if denom == 0.0:
        return inf
    return operator_norm(inv, s, r, max_enum_dim).value * vector_norm(vec, s) / denom


def condition_closed_form(kind, a, vec=None, r=2, s=2, max_enum_dim=DEFAULT_MAX_ENUM_DIM):
    """Closed-form condition number of ``kind`` at the given instance."""
    kind = problem_kind(kind)
    r = norm_index(r)
    s = norm_index(s)
    a = np.asarray(a, dtype=np.float64)
    if kind != "inversion":
        if vec is None:
            raise ValueError(f"{kind} needs a vector argument")
        vec = np.asarray(vec, dtype=np.float64)
        if not np.any(vec != 0.0):
            raise ZeroVector(f"{kind} requires a nonzero vector")

    if kind == "inversion":
        return ConditionReport(kind, value=kappa(a, r, s, max_enum_dim))

    if kind == "matvec":
        image = a @ vec
        denom = vector_norm(image, s)
        anorm = operator_norm(a, r, s, max_enum_dim).value
        value = inf if denom == 0.0 else anorm * vector_norm(vec, r) / denom
        alpha = kap = None
        if a.shape[-1] == a.shape[-2]:
            try:
                inv = invert(a)
            except SingularMatrix:
                inv = None
            if inv is not None and denom > 0.0:
                inv_norm = operator_norm(inv, s, r, max_enum_dim).value
                kap = anorm * inv_norm
                alpha = vector_norm(vec, r) / (inv_norm * denom)
        return ConditionReport(kind, value=value, kappa=kap, alpha=alpha)

    if kind == "solve_fixed_a":
        inv = invert(as_square(a))
        return ConditionReport(kind, value=_solution_term(inv, vec, r, s, max_enum_dim))

    if kind == "solve_fixed_b":
        return ConditionReport(kind, value=kappa(a, r, s, max_enum_dim))

    return mixed_condition(a, vec, r, s, max_enum_dim)


def mixed_condition(a, b, r=2, s=2, max_enum_dim=DEFAULT_MAX_ENUM_DIM):
    """Mixed condition number of (A, b) -> A^-1 b: kappa plus the solution term.

    Always sandwiched between kappa and 2*kappa.
    """
    r = norm_index(r)
    s = norm_index(s)
    a = as_square(a)
    b = np.asarray(b, dtype=np.float64)
    if not np.any(b != 0.0):
        raise ZeroVector("mixed condition number requires b != 0")
    inv = invert(a)
    anorm = operator_norm(a, r, s, max_enum_dim).value
    inv_norm = operator_norm(inv, s, r, max_enum_dim).value
    kap = anorm * inv_norm
    sol = inv @ b
    denom = vector_norm(sol, r)
    term = inf if denom == 0.0 else inv_norm * vector_norm(b, s) / denom
    return ConditionReport("solve_both", value=kap + term, kappa=kap, mixed_term=term)


def distance_to_singularity(a, r, s, max_enum_dim=DEFAULT_MAX_ENUM_DIM):
    """d_rs(A, singular set) = 1 / ||A^-1||_sr.

    Raises SingularMatrix for singular input (the distance would be zero).
    """
    r = norm_index(r)
    s = norm_index(s)
    inv = invert(as_square(a))
    return 1.0 / operator_norm(inv, s, r, max_enum_dim).value


def _extremal_pair(a, r, s, max_enum_dim):
    """(A^-1, y, A^-1 y) with ||y||_s = 1 and ||A^-1 y||_r = ||A^-1||_sr."""
    inv = invert(as_square(a))
    res = operator_norm(inv, s, r, max_enum_dim)
    y = res.attainer / vector_norm(res.attainer, s)
    return inv, y, inv @ y


def nearest_singular_perturbation(a, r, s, max_enum_dim=DEFAULT_MAX_ENUM_DIM):
    """The rank-one E with A + E singular and ||E||_rs = d_rs(A, singular set).

    With y attaining ||A^-1||_sr and x = A^-1 y / ||A^-1 y||_r, the
    interpolator B maps x to -y, so (A + B/||A^-1 y||_r) x = 0.
    """
    r = norm_index(r)
    s = norm_index(s)
    _, y, w = _extremal_pair(a, r, s, max_enum_dim)
    wnorm = vector_norm(w, r)
    x = w / wnorm
    b = rank_one_interpolator(x, -y, r, s)
    return b / wnorm
