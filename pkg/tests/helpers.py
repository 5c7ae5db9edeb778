"""Shared instance builders for the test suite.

Oracle policy: anything nontrivial is checked against an independent
computation — sympy over ZZ (characteristic polynomials, Smith normal
form, exact inverses for conjugation) or direct construction (systems
built from known solution points).  sympy never touches the code under
test's own data structures.
"""

import random

import sympy

from padicnla.padics import PadicNumber
from padicnla.matrices import PadicMatrix
from padicnla.mpoly import MultiPoly


def rand_unimodular(n, rng, spread=3):
    """A random element of GL_n(Z) built from elementary row operations."""
    m = sympy.eye(n)
    for _ in range(3 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        m[i, :] = m[i, :] + rng.randrange(-spread, spread + 1) * m[j, :]
    return m


def conjugated(diag_or_matrix, p, precision, rng):
    """U D U^{-1} over ZZ as a PadicMatrix, with U unimodular.

    The conjugation happens in exact integer arithmetic, so the
    eigenstructure of the result is known by construction.
    """
    d = diag_or_matrix
    if not isinstance(d, sympy.MatrixBase):
        d = sympy.diag(*d)
    n = d.rows
    u = rand_unimodular(n, rng)
    m = u * d * u.inv()
    rows = [[int(m[i, j]) for j in range(n)] for i in range(n)]
    return PadicMatrix.from_int_rows(p, rows, precision), u


def random_int_matrix(n, p, precision, rng, lo=-50, hi=50, val_choices=(0,)):
    rows = [
        [rng.randrange(lo, hi) * p ** rng.choice(val_choices) for _ in range(n)]
        for _ in range(n)
    ]
    return PadicMatrix.from_int_rows(p, rows, precision)


def split_squarefree_instance(n, p, precision, rng):
    """A matrix whose residue charpoly is square-free and fully split:
    conjugate diag(distinct residues) + p * (random integral)."""
    residues = rng.sample(range(1, p), n)
    d = sympy.diag(*residues)
    pert = sympy.Matrix(n, n, lambda i, j: p * rng.randrange(-5, 6))
    a, _ = conjugated(d + pert, p, precision, rng)
    return a, residues


def grid_system(p, precision, root_lists):
    """f_i = prod_j (x_i - a_ij): the solutions are exactly the grid
    product of the per-variable root lists, each with unit Jacobian when
    the roots are distinct mod p."""
    n = len(root_lists)
    polys = []
    for i, roots in enumerate(root_lists):
        f = MultiPoly.constant(p, n, PadicNumber.one(p, precision))
        xi = MultiPoly.variable(p, n, i, precision)
        for a in roots:
            f = f * (xi - MultiPoly.constant(
                p, n, PadicNumber.from_int(p, a, precision)))
        polys.append(f)
    return polys


def flat_residual(a, v, t):
    """min valuation (or precision, for inexact zeros) over A@V - V@T."""
    r = (a @ v) - (v @ t)
    return min(
        (e.precision if e.is_zero else e.valuation) for row in r.rows for e in row
    )


def zero_at_precision(x):
    return x.is_zero
