"""Exact-rational linear programming feasibility (phase-I simplex).

Only one question is ever asked here: does a target vector lie in the
convex cone generated by a finite set of vectors?  By Farkas duality this
is exactly the redundancy test for a homogeneous inequality system, so it
backs :func:`elgi.cone.remove_redundant` and the cone-equivalence checks
in the test suite.  Everything is done in ``fractions.Fraction``; Bland's
rule keeps the pivoting finite and deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

__all__ = ["nonneg_combination"]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def nonneg_combination(
    vectors: Sequence[Sequence[Fraction]], target: Sequence[Fraction]
) -> Optional[list[Fraction]]:
    """Coefficients lam >= 0 with sum(lam_i * vectors[i]) == target, or None.

    ``vectors`` is a list of equal-length rational vectors; the returned
    list (when not None) has one coefficient per input vector.
    """
    n_vec = len(vectors)
    dim = len(target)
    for v in vectors:
        if len(v) != dim:
            raise ValueError("all vectors must share the target's dimension")

    if n_vec == 0:
        return [] if all(t == 0 for t in target) else None

    # equality rows: sum_i lam_i * vectors[i][j] == target[j], flipped so rhs >= 0
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for j in range(dim):
        coeffs = [Fraction(vectors[i][j]) for i in range(n_vec)]
        b = Fraction(target[j])
        if b < 0:
            coeffs = [-c for c in coeffs]
            b = -b
        rows.append(coeffs)
        rhs.append(b)

    n_rows = len(rows)
    width = n_vec + n_rows + 1  # lambdas, artificials, rhs
    tableau: list[list[Fraction]] = []
    for j in range(n_rows):
        row = rows[j] + [_ZERO] * n_rows + [rhs[j]]
        row[n_vec + j] = _ONE
        tableau.append(row)
    basis = [n_vec + j for j in range(n_rows)]

    # phase-I objective (minimize sum of artificials), priced out over the basis
    obj = [_ZERO] * width
    for i in range(n_vec + n_rows):
        obj[i] = _ZERO
    for i in range(n_vec, n_vec + n_rows):
        obj[i] = _ONE
    for row in tableau:
        for i in range(width):
            obj[i] -= row[i]

    while True:
        enter = -1
        for i in range(n_vec + n_rows):  # Bland: smallest eligible index
            if obj[i] < 0:
                enter = i
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for j in range(n_rows):
            a = tableau[j][enter]
            if a > 0:
                ratio = tableau[j][-1] / a
                if best is None or ratio < best or (ratio == best and basis[j] < basis[leave]):
                    best = ratio
                    leave = j
        if leave < 0:
            # unbounded phase-I objective cannot happen (bounded below by 0)
            raise RuntimeError("phase-I simplex became unbounded")
        pivot = tableau[leave][enter]
        tableau[leave] = [v / pivot for v in tableau[leave]]
        for j in range(n_rows):
            if j != leave and tableau[j][enter] != 0:
                f = tableau[j][enter]
                tableau[j] = [v - f * p for v, p in zip(tableau[j], tableau[leave])]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [v - f * p for v, p in zip(obj, tableau[leave])]
        basis[leave] = enter

    if -obj[-1] != 0:  # optimal artificial mass
        return None
    lam = [_ZERO] * n_vec
    for j, var in enumerate(basis):
        if var < n_vec:
            lam[var] = tableau[j][-1]
    return lam
