"""Linear algebra and polynomial root-finding over F_p.

Everything here works with plain Python integers reduced mod p.
Polynomials are coefficient lists ``[c0, c1, ...]`` with a nonzero
leading coefficient (the zero polynomial is ``[]``).  These routines
seed the iterative p-adic algorithms, so they only need linear factors
and a characteristic polynomial, not full factorization.
"""

from __future__ import annotations

import random


class ResiduePoly:
    """A polynomial over F_p as a trimmed coefficient list."""

    __slots__ = ("prime", "coeffs")

    def __init__(self, prime, coeffs):
        self.prime = prime
        self.coeffs = poly_trim([c % prime for c in coeffs])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.prime
        return acc

    def __eq__(self, other):
        return (
            isinstance(other, ResiduePoly)
            and self.prime == other.prime
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        return f"ResiduePoly(p={self.prime}, {self.coeffs})"


class ResidueMatrix:
    """A dense matrix over F_p."""

    __slots__ = ("prime", "rows")

    def __init__(self, prime, rows):
        self.prime = prime
        self.rows = [[x % prime for x in row] for row in rows]

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def __repr__(self):
        return f"ResidueMatrix(p={self.prime}, {self.rows})"


# ----------------------------------------------------------------------
# polynomial helpers

def poly_trim(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return poly_trim(out)


def poly_divmod(a, b, p):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = a[:]
    inv_lead = pow(b[-1], -1, p)
    q = [0] * max(0, len(a) - len(b) + 1)
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv_lead % p
        if c:
            q[i] = c
            for j, y in enumerate(b):
                a[i + j] = (a[i + j] - c * y) % p
    return poly_trim(q), poly_trim(a)


def poly_gcd(a, b, p):
    while b:
        a, b = b, poly_divmod(a, b, p)[1]
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def poly_pow_mod(base, e, mod, p):
    result = [1]
    base = poly_divmod(base, mod, p)[1]
    while e:
        if e & 1:
            result = poly_divmod(poly_mul(result, base, p), mod, p)[1]
        base = poly_divmod(poly_mul(base, base, p), mod, p)[1]
        e >>= 1
    return result


# ----------------------------------------------------------------------
# matrix operations

def _hessenberg_residue(rows, p):
    """In-place similarity reduction to upper Hessenberg form over F_p."""
    n = len(rows)
    for j in range(n - 2):
        piv = None
        for i in range(j + 1, n):
            if rows[i][j]:
                piv = i
                break
        if piv is None:
            continue
        if piv != j + 1:
            rows[piv], rows[j + 1] = rows[j + 1], rows[piv]
            for r in rows:
                r[piv], r[j + 1] = r[j + 1], r[piv]
        inv = pow(rows[j + 1][j], -1, p)
        for i in range(j + 2, n):
            c = rows[i][j] * inv % p
            if not c:
                continue
            for k in range(n):
                rows[i][k] = (rows[i][k] - c * rows[j + 1][k]) % p
            for k in range(n):
                rows[k][j + 1] = (rows[k][j + 1] + c * rows[k][i]) % p
    return rows


def charpoly_residue(a: ResidueMatrix) -> ResiduePoly:
    """Monic characteristic polynomial det(xI - A) over F_p.

    Reduces to Hessenberg form, then runs the leading-minor recurrence,
    expanding each minor along its last column.
    """
    if a.nrows != a.ncols:
        raise ValueError("characteristic polynomial of a non-square matrix")
    p = a.prime
    n = a.nrows
    h = _hessenberg_residue([row[:] for row in a.rows], p)
    polys = [[1]]  # charpoly of the leading k x k minor
    for k in range(1, n + 1):
        # (x - h[k-1][k-1]) * polys[k-1]
        prev = polys[k - 1]
        cur = [0] + prev
        for i, c in enumerate(prev):
            cur[i] = (cur[i] - h[k - 1][k - 1] * c) % p
        sub = 1
        for m in range(k - 1, 0, -1):
            sub = sub * h[m][m - 1] % p
            if not sub:
                break
            coef = h[m - 1][k - 1] * sub % p
            if coef:
                for i, c in enumerate(polys[m - 1]):
                    cur[i] = (cur[i] - coef * c) % p
        polys.append([c % p for c in cur])
    return ResiduePoly(p, polys[n])


def nullspace_residue(a: ResidueMatrix) -> list:
    """Basis of the right kernel, in reduced echelon form."""
    p = a.prime
    rows = [row[:] for row in a.rows]
    n, m = a.nrows, a.ncols
    pivots = {}
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][c]:
                ci = rows[i][c]
                rows[i] = [(x - ci * y) % p for x, y in zip(rows[i], rows[r])]
        pivots[c] = r
        r += 1
    basis = []
    for c in range(m):
        if c in pivots:
            continue
        v = [0] * m
        v[c] = 1
        for pc, pr in pivots.items():
            v[pc] = (-rows[pr][c]) % p
        basis.append(v)
    return basis


# ----------------------------------------------------------------------
# root finding

def linear_roots_with_multiplicity(f: ResiduePoly, rng=None) -> list:
    """All roots of f in F_p with their exact multiplicities.

    Strips the linear part with gcd(f, x^p - x), splits it by
    equal-degree (Cantor-Zassenhaus style) root search, and recovers
    multiplicities by trial division.  Returns [] when f has no linear
    factors.
    """
    p = f.prime
    coeffs = f.coeffs
    if not coeffs:
        raise ValueError("root-finding on the zero polynomial")
    if len(coeffs) == 1:
        return []
    if rng is None:
        rng = random.Random(0x5EED)
    xp = poly_pow_mod([0, 1], p, coeffs, p)  # x^p mod f
    xp = xp + [0] * max(0, 2 - len(xp))
    xp[1] = (xp[1] - 1) % p  # x^p - x
    g = poly_gcd(coeffs, poly_trim(xp), p)
    roots = []
    _split_distinct_roots(g, p, rng, roots)
    out = []
    for lam in sorted(roots):
        mult = 0
        rem = coeffs
        while True:
            q, r = poly_divmod(rem, [(-lam) % p, 1], p)
            if r:
                break
            mult += 1
            rem = q
        out.append((lam, mult))
    return out


def _split_distinct_roots(g, p, rng, out):
    """Roots of a square-free product of linear factors, by random splitting."""
    if len(g) <= 1:
        return
    if len(g) == 2:
        out.append((-g[0]) * pow(g[1], -1, p) % p)
        return
    if g[0] == 0:
        out.append(0)
        _split_distinct_roots(poly_trim(g[1:]), p, rng, out)
        return
    while True:
        a = rng.randrange(p)
        h = poly_pow_mod([a, 1], (p - 1) // 2, g, p)
        h = poly_trim([(c - (1 if i == 0 else 0)) % p for i, c in enumerate(h + [0])])
        d = poly_gcd(g, h, p)
        if 0 < len(d) - 1 < len(g) - 1:
            _split_distinct_roots(d, p, rng, out)
            _split_distinct_roots(poly_divmod(g, d, p)[0], p, rng, out)
            return


def is_pure_power(f: ResiduePoly):
    """Return lambda when f = (x - lambda)^deg(f), else None."""
    n = f.degree
    if n < 1:
        return None
    roots = linear_roots_with_multiplicity(f)
    if len(roots) == 1 and roots[0][1] == n:
        return roots[0][0]
    return None
