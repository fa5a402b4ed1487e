"""Exact linear algebra over the integers and rationals.

Everything in this module is pure Python over arbitrary-precision ``int`` and
``fractions.Fraction``; no floating point.  Matrices are lists of lists, rows
first.  The three workhorses are the row Hermite normal form, the Smith
normal form, and saturation, with the transformation matrices exposed so
callers can solve lattice membership and completion problems.

Conventions:
  * ``hnf`` returns the unique fully reduced row HNF: pivots positive,
    entries above a pivot reduced into ``[0, pivot)``, zero rows at the
    bottom, pivot columns strictly increasing.
  * kernels are row spans: ``kernel_basis(A)`` spans ``{x : A @ x^T = 0}``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


# ---------------------------------------------------------------------------
# small helpers


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(mat):
    return [list(col) for col in zip(*mat)]


def mat_mul(a, b):
    """Matrix product; entries may be ints or Fractions (mixed is fine)."""
    if not a:
        return []
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def vec_mat(v, a):
    return [sum(x * row[j] for x, row in zip(v, a)) for j in range(len(a[0]))]


def mat_eq(a, b):
    if len(a) != len(b):
        return False
    return all(len(ra) == len(rb) and all(x == y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_copy(mat):
    return [list(row) for row in mat]


def lcm(a, b):
    if a == 0 or b == 0:
        return 0
    return abs(a * b) // gcd(a, b)


def row_content(row):
    g = 0
    for x in row:
        g = gcd(g, abs(x))
    return g


def denominator_lcm(mat):
    """lcm of denominators of all entries (1 for all-integer input)."""
    d = 1
    for row in mat:
        for x in row:
            if isinstance(x, Fraction):
                d = lcm(d, x.denominator)
    return d


def scale_to_int(mat):
    """Return (d, d*mat as ints) where d is the denominator lcm."""
    d = denominator_lcm(mat)
    out = []
    for row in mat:
        out.append([int(x * d) for x in row])
    return d, out


def to_fraction_matrix(mat):
    return [[Fraction(x) for x in row] for row in mat]


# ---------------------------------------------------------------------------
# Hermite normal form


def hnf(mat):
    """Row Hermite normal form with transformation.

    Returns ``(H, U)`` with ``U`` unimodular, ``U @ mat == H``, and ``H`` the
    unique canonical representative of the row lattice of ``mat``: pivot
    entries positive, every entry above a pivot reduced modulo it, zero rows
    last.

    The input must be an integer matrix; rows may be dependent.
    """
    if not mat:
        return [], []
    h = mat_copy(mat)
    m, n = len(h), len(h[0])
    u = identity(m)
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        # gcd-eliminate below position (row, col)
        pivot = None
        for i in range(row, m):
            if h[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        h[row], h[pivot] = h[pivot], h[row]
        u[row], u[pivot] = u[pivot], u[row]
        for i in range(row + 1, m):
            while h[i][col] != 0:
                q = h[row][col] // h[i][col]
                h[row] = [a - q * b for a, b in zip(h[row], h[i])]
                u[row] = [a - q * b for a, b in zip(u[row], u[i])]
                h[row], h[i] = h[i], h[row]
                u[row], u[i] = u[i], u[row]
        if h[row][col] < 0:
            h[row] = [-a for a in h[row]]
            u[row] = [-a for a in u[row]]
        pivots.append((row, col))
        row += 1
    # reduce entries above each pivot
    for prow, pcol in pivots:
        p = h[prow][pcol]
        for i in range(prow):
            q = h[i][pcol] // p
            if q:
                h[i] = [a - q * b for a, b in zip(h[i], h[prow])]
                u[i] = [a - q * b for a, b in zip(u[i], u[prow])]
    return h, u


def hnf_basis(mat):
    """Nonzero rows of ``hnf(mat)``: the canonical basis of the row lattice."""
    h, _ = hnf(mat)
    return [row for row in h if any(row)]


def rank_int(mat):
    return len(hnf_basis(mat)) if mat else 0


# ---------------------------------------------------------------------------
# Smith normal form


def _snf_find_pivot(a, t, m, n):
    best = None
    for i in range(t, m):
        for j in range(t, n):
            if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                best = (i, j)
    return best


def snf(mat):
    """Smith normal form with transformations.

    Returns ``(d, U, V)`` with ``U @ mat @ V`` diagonal, ``d`` the list of
    ``min(m, n)`` diagonal entries, each nonnegative and ``d[i] | d[i+1]``.
    ``U`` and ``V`` are unimodular.
    """
    if not mat:
        return [], [], []
    a = mat_copy(mat)
    m, n = len(a), len(a[0])
    u, v = identity(m), identity(n)

    def row_op(i, j, q):  # row i -= q * row j
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, q):  # col i -= q * col j
        for r in range(m):
            a[r][i] -= q * a[r][j]
        for r in range(n):
            v[r][i] -= q * v[r][j]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        for r in range(m):
            a[r][i], a[r][j] = a[r][j], a[r][i]
        for r in range(n):
            v[r][i], v[r][j] = v[r][j], v[r][i]

    for t in range(min(m, n)):
        while True:
            piv = _snf_find_pivot(a, t, m, n)
            if piv is None:
                break
            pi, pj = piv
            if pi != t:
                row_swap(t, pi)
            if pj != t:
                col_swap(t, pj)
            # clear column t
            dirty = False
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    row_op(i, t, q)
                    if a[i][t]:
                        dirty = True
            # clear row t
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    col_op(j, t, q)
                    if a[t][j]:
                        dirty = True
            if dirty:
                continue
            # pivot must divide every remaining entry
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if a[i][j] % a[t][t]:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            row_op(t, offender, -1)  # fold offending row in and restart
        if t < min(m, n) and a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    d = [a[i][i] for i in range(min(m, n))]
    return d, u, v


def invariant_factors(mat):
    """Nonzero diagonal of the Smith form."""
    d, _, _ = snf(mat)
    return [x for x in d if x]


# ---------------------------------------------------------------------------
# kernels, saturation, completion


def kernel_basis(mat):
    """Canonical basis of the integer kernel ``{x in Z^m_cols : mat @ x^T = 0}``.

    Accepts integer or Fraction entries; returns the HNF basis of the
    (automatically saturated) kernel lattice as rows of length ``n_cols``.
    """
    if not mat:
        return []
    _, imat = scale_to_int(mat)
    h, u = hnf(transpose(imat))
    # rows of u facing zero rows of h span the kernel lattice (saturated);
    # canonicalize for a stable answer.
    out = [u[i] for i in range(len(h)) if not any(h[i])]
    return hnf_basis(out) if out else []


def saturate(basis):
    """Saturation of the row lattice inside Z^n.

    ``basis`` is a k x n integer (or Fraction) matrix of rank k; the result is
    the canonical HNF basis of ``span_Q(rows) ∩ Z^n``.  Raises ``ValueError``
    when the rows are dependent.
    """
    if not basis:
        return []
    _, ibasis = scale_to_int(basis)
    k, n = len(ibasis), len(ibasis[0])
    ker = kernel_basis(ibasis)
    if len(ker) != n - k:
        raise ValueError("saturate: input rows are linearly dependent")
    if not ker:
        return identity(n)
    sat = kernel_basis(ker)
    if len(sat) != k:
        raise ValueError("saturate: rank mismatch")
    return sat


def complete_to_unimodular(c):
    """Extend a saturated k x n integer matrix to a unimodular n x n one.

    Returns an ``n x n`` unimodular matrix whose first ``k`` rows are exactly
    the rows of ``c``.  Requires that the rows of ``c`` span a saturated
    rank-``k`` sublattice of ``Z^n``.
    """
    k, n = len(c), len(c[0])
    d, u, v = snf(c)
    if any(x != 1 for x in d):
        raise ValueError("complete_to_unimodular: input is not saturated")
    vinv = inverse_unimodular(v)
    # rows of v^{-1} form a basis of Z^n whose first k rows span the same
    # lattice as c; swapping those k rows for c itself keeps det = +-1.
    return mat_copy(c) + vinv[k:]


def inverse_unimodular(mat):
    """Inverse of a unimodular integer matrix, as an integer matrix."""
    inv = inverse_fraction(to_fraction_matrix(mat))
    out = []
    for row in inv:
        irow = []
        for x in row:
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
            irow.append(int(x))
        out.append(irow)
    return out


# ---------------------------------------------------------------------------
# fraction Gaussian elimination


def inverse_fraction(mat):
    """Exact inverse of a square matrix over Q (raises on singular input)."""
    n = len(mat)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col]:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [row[n:] for row in a]


def det_fraction(mat):
    """Exact determinant over Q (returns a Fraction; int input gives integral value)."""
    n = len(mat)
    if n == 0:
        return Fraction(1)
    a = [[Fraction(x) for x in row] for row in mat]
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for i in range(col + 1, n):
            if a[i][col]:
                f = a[i][col] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return det


def det_int(mat):
    d = det_fraction(mat)
    assert d.denominator == 1
    return int(d)


def rank_fraction(mat):
    if not mat:
        return 0
    a = [[Fraction(x) for x in row] for row in mat]
    m, n = len(a), len(a[0])
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][col]
        for i in range(r + 1, m):
            if a[i][col]:
                f = a[i][col] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == m:
            break
    return r


def solve_row_coordinates(basis, vector):
    """Coordinates of ``vector`` in the row span of ``basis`` over Q.

    ``basis`` must have independent rows.  Returns the coefficient list ``c``
    with ``c @ basis == vector``, or ``None`` when the vector lies outside
    the span.
    """
    k = len(basis)
    if k == 0:
        return [] if not any(vector) else None
    n = len(basis[0])
    # solve c * basis = vector  <=>  basis^T c^T = vector^T
    at = [[Fraction(basis[i][j]) for i in range(k)] for j in range(n)]
    b = [Fraction(x) for x in vector]
    # gaussian elimination on the n x k system
    rows = [at[j] + [b[j]] for j in range(n)]
    r = 0
    pivcols = []
    for col in range(k):
        piv = next((i for i in range(r, n) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivcols.append(col)
        r += 1
    sol = [Fraction(0)] * k
    for i, col in enumerate(pivcols):
        sol[col] = rows[i][k]
    # consistency: rows beyond rank must have zero rhs
    for i in range(r, n):
        if rows[i][k] != 0:
            return None
    return sol


def lattice_coordinates(basis, vectors):
    """Integer coordinate matrix X with ``X @ basis == vectors`` or None.

    Membership test for a list of vectors in the lattice spanned by ``basis``
    (entries may be rational).  Returns None when some vector is outside the
    lattice (non-integral or inconsistent coordinates).
    """
    out = []
    for vec in vectors:
        c = solve_row_coordinates(basis, vec)
        if c is None:
            return None
        if any(x.denominator != 1 for x in c):
            return None
        out.append([int(x) for x in c])
    return out


def quotient_invariants(sub, sup):
    """Invariant factors of the finite quotient (sup lattice)/(sub lattice).

    Both arguments are basis matrices (integer or rational entries) of
    lattices of the same rank with ``sub ⊆ sup``.  Returns the full list
    ``d_1 | d_2 | ... | d_k`` including unit factors.  Raises ``ValueError``
    when ranks differ or ``sub`` is not a sublattice of ``sup``.
    """
    if len(sub) != len(sup):
        raise ValueError("quotient_invariants: rank mismatch")
    x = lattice_coordinates(sup, sub)
    if x is None:
        raise ValueError("quotient_invariants: first lattice is not contained in second")
    d = invariant_factors(x)
    if len(d) != len(sub):
        raise ValueError("quotient_invariants: sublattice has smaller rank")
    return d


def lattice_index(sub, sup):
    """Index [sup : sub] of one full-rank lattice in another."""
    d = quotient_invariants(sub, sup)
    out = 1
    for x in d:
        out *= x
    return out


# ---------------------------------------------------------------------------
# canonical rational lattice bases


def rational_hnf_basis(rows):
    """Canonical basis of the lattice generated by rational ``rows``.

    Scales to an integer matrix, drops dependent generators via HNF, and
    scales back.  The result is unique for the generated lattice.
    """
    if not rows:
        return []
    d, irows = scale_to_int(rows)
    basis = hnf_basis(irows)
    if d == 1:
        return [list(r) for r in basis]
    return [[Fraction(x, d) for x in row] for row in basis]


def solve_integral(a_rows, rhs):
    """One integer solution ``x`` of ``x @ a_rows == rhs`` or None.

    ``a_rows`` is a k x n matrix over Q, ``rhs`` a length-n rational vector.
    Solves for integer coefficient vectors; used for lattice preimage
    problems.
    """
    if not a_rows:
        return [] if not any(rhs) else None
    # clear denominators jointly so lattice structure is preserved
    all_rows = [list(r) for r in a_rows] + [list(rhs)]
    d, scaled = scale_to_int(all_rows)
    mat = scaled[:-1]
    b = scaled[-1]
    k = len(mat)
    dd, u, v = snf(mat)
    # x @ mat = b  <=>  (x @ U^{-1}) (U mat V) = b V  <=>  y D = c
    c = vec_mat(b, v)
    y = []
    for i in range(k):
        di = dd[i] if i < len(dd) else 0
        ci = c[i]
        if di == 0:
            if ci != 0:
                return None
            y.append(0)
        else:
            if ci % di:
                return None
            y.append(ci // di)
    for i in range(k, len(c)):
        if c[i] != 0:
            return None
    return vec_mat(y, u)


def frac_str(x):
    """Render a rational as the JSON string form 'num/den' (or 'num')."""
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def parse_frac(s):
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(s)
