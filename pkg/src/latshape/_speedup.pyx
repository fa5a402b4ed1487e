# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration of short lattice vectors.

Same contract as ``_kernel_pure``: one representative per sign pair,
sorted output, exact results.  The recursion runs on C doubles with
every pruning interval widened by one step plus a fixed residual slack,
and each candidate that survives is re-checked with exact 64-bit
integer arithmetic, so float error can only cost speed, never
correctness.  That widening argument needs conditioning and magnitude
headroom, hence the envelope below (dimension, entry size, bound, and a
floor on the completion coefficients); inputs outside it are delegated
to the exact pure twin wholesale.
"""

from libc.math cimport llround, sqrt
from libc.stdlib cimport free, malloc

from . import _kernel_pure

DEF SLACK = 0.5
DEF MIN_D = 1e-2

MAXN = 16
MAX_ENTRY = 1 << 16
MAX_BOUND = 1 << 31


def _in_envelope(rows, budget):
    """Python-arithmetic gate: entries must be machine-size ints before
    anything is coerced to C."""
    n = len(rows)
    if n < 1 or n > MAXN or budget > MAX_BOUND:
        return False
    for row in rows:
        for e in row:
            if not isinstance(e, int):
                return False
            if e > MAX_ENTRY or e < -MAX_ENTRY:
                return False
    return True


cdef bint _ldl(list rows, int n, double* d, double* c) except? False:
    """Quadratic completion; False when a pivot drops below MIN_D."""
    cdef int i, j, r, s
    cdef double* a = <double*> malloc(n * n * sizeof(double))
    if a == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            for j in range(n):
                a[i * n + j] = <double> (<long long> rows[i][j])
        for i in range(n):
            d[i] = a[i * n + i]
            if d[i] <= 0.0:
                raise ValueError("gram matrix is not positive definite")
            if d[i] < MIN_D:
                return False
            for j in range(i + 1, n):
                c[i * n + j] = a[i * n + j] / d[i]
            for r in range(i + 1, n):
                for s in range(r, n):
                    a[r * n + s] -= d[i] * c[i * n + r] * c[i * n + s]
    finally:
        free(a)
    return True


cdef long long _exact_norm(list rows, long long* x, int n):
    cdef int i, j
    cdef long long total = 0, xi
    for i in range(n):
        xi = x[i]
        if xi == 0:
            continue
        total += <long long> rows[i][i] * xi * xi
        for j in range(i + 1, n):
            total += 2 * <long long> rows[i][j] * xi * x[j]
    return total


cdef void _emit(list rows, long long* x, int n, long long bound,
                long long target, bint nonzero, list out):
    cdef long long norm
    cdef int j
    if target >= 0 and not nonzero and x[0] <= 0:
        return
    norm = _exact_norm(rows, x, n)
    if norm < 1:
        return
    if target >= 0:
        if norm == target:
            out.append(tuple([x[j] for j in range(n)]))
    elif norm <= bound:
        out.append((norm, tuple([x[j] for j in range(n)])))


cdef void _solve_level0(list rows, int n, double* d, double* c,
                        long long* x, double rem, bint nonzero,
                        long long target, list out):
    """Exact-match mode: d0 (x0 + s)^2 = rem has at most two real roots,
    so only the integers next to them need the exact check."""
    cdef double s = 0.0, root
    cdef long long cand[6]
    cdef long long base, v
    cdef int j, m = 0, t, u
    for j in range(1, n):
        if x[j] != 0:
            s += c[j] * <double> x[j]
    if rem + SLACK < 0.0:
        return
    root = sqrt((rem + SLACK if rem > -SLACK else 0.0) / d[0])
    for t in range(2):
        base = llround((-s) + (root if t == 0 else -root))
        for u in range(-1, 2):
            v = base + u
            for j in range(m):
                if cand[j] == v:
                    break
            else:
                if m < 6:
                    cand[m] = v
                    m += 1
    for j in range(m):
        x[0] = cand[j]
        # nonzero stays the prefix flag so _emit can canonicalize the sign
        _emit(rows, x, n, -1, target, nonzero, out)
    x[0] = 0


cdef void _descend(list rows, int n, double* d, double* c, long long* x,
                   int i, double rem, bint nonzero, long long bound,
                   long long target, list out):
    # target < 0 means "all norms in (0, bound]"; otherwise exact match
    cdef double s, r, centre
    cdef long long lo, hi, xi
    cdef int j
    if target >= 0 and i == 0:
        _solve_level0(rows, n, d, c, x, rem, nonzero, target, out)
        return
    s = 0.0
    for j in range(i + 1, n):
        if x[j] != 0:
            s += c[i * n + j] * <double> x[j]
    if rem + SLACK < 0.0:
        return
    r = sqrt((rem + SLACK if rem > -SLACK else 0.0) / d[i])
    lo = <long long> (-s - r) - 1
    hi = <long long> (-s + r) + 1
    if not nonzero and lo < 0:
        lo = 0
    xi = lo
    while xi <= hi:
        centre = <double> xi + s
        x[i] = xi
        if i == 0:
            _emit(rows, x, n, bound, target, nonzero or xi != 0, out)
            x[i] = 0
        else:
            _descend(rows, n, d, c, x, i - 1,
                     rem - d[i] * centre * centre,
                     nonzero or xi != 0, bound, target, out)
        xi += 1
    x[i] = 0


cdef _run(list rows, long long budget, long long target):
    """Sorted hits, or None when conditioning forces the pure twin."""
    cdef int n = len(rows)
    cdef double* d = <double*> malloc(n * sizeof(double))
    cdef double* c = <double*> malloc(n * n * sizeof(double))
    cdef long long* x = <long long*> malloc(n * sizeof(long long))
    cdef int i
    if d == NULL or c == NULL or x == NULL:
        free(d); free(c); free(x)
        raise MemoryError()
    out = []
    try:
        if not _ldl(rows, n, d, c):
            return None
        for i in range(n):
            x[i] = 0
        if target >= 0 and n == 1:
            _solve_level0(rows, n, d, c, x, <double> budget, False, target, out)
        else:
            _descend(rows, n, d, c, x, n - 1, <double> budget, False,
                     budget, target, out)
    finally:
        free(d); free(c); free(x)
    out.sort()
    return out


def short_vectors(gram, bound):
    """All (norm, v) with 0 < v G v^T <= bound, one per sign pair, sorted."""
    rows = [list(r) for r in gram]
    if bound < 1:
        return []
    if not _in_envelope(rows, bound, len(rows)):
        return _kernel_pure.short_vectors(gram, bound)
    hits = _run(rows, bound, -1)
    if hits is None:
        return _kernel_pure.short_vectors(gram, bound)
    return [(int(norm), tuple(int(t) for t in vec)) for norm, vec in hits]


def vectors_with_norm(gram, target):
    """All v with v G v^T == target exactly, one per sign pair, sorted."""
    rows = [list(r) for r in gram]
    if target < 1:
        return []
    if not _in_envelope(rows, target, len(rows)):
        return _kernel_pure.vectors_with_norm(gram, target)
    hits = _run(rows, target, target)
    if hits is None:
        return _kernel_pure.vectors_with_norm(gram, target)
    return [tuple(int(t) for t in vec) for vec in hits]
