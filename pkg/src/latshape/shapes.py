"""Shape classes of definite lattices and the real moduli pipeline.

The exact half canonicalizes restricted Gram matrices up to unimodular
base change and positive scaling.  The float half builds the matrix data
(rho, alpha, a, m) attached to a subspace and recovers both shapes from
it; exact arithmetic remains the source of truth, the float pipeline is
validated against it by residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import exact
from . import kernel
from . import quadform

_POOL_CAP = 20000


class SearchBoundError(RuntimeError):
    """Raised when an isometry or canonicalization search would need to
    enumerate more candidate vectors than the configured cap."""


@dataclass(frozen=True, eq=False)
class ShapeClass:
    """Similarity class of a definite form: primitive reduced Gram plus
    the positive scale stripped while normalizing.

    Equality and hashing use only canonical_gram: two lattices have the
    same shape exactly when their canonical Grams agree, whatever scale
    they sat at.
    """

    canonical_gram: Tuple[Tuple[int, ...], ...]
    scale: Fraction

    def __post_init__(self):
        object.__setattr__(
            self, "canonical_gram",
            tuple(tuple(int(x) for x in row) for row in self.canonical_gram),
        )
        object.__setattr__(self, "scale", Fraction(self.scale))
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def rank(self) -> int:
        return len(self.canonical_gram)

    def __eq__(self, other):
        if not isinstance(other, ShapeClass):
            return NotImplemented
        return self.canonical_gram == other.canonical_gram

    def __hash__(self):
        return hash(self.canonical_gram)

    def to_json(self):
        return {
            "canonical_gram": [list(r) for r in self.canonical_gram],
            "scale": exact.frac_str(self.scale),
        }


@dataclass(frozen=True)
class UpperHalfPoint:
    """Fundamental-domain representative of a binary shape: |x| <= 1/2
    and x^2 + y^2 >= 1, boundary ties resolved toward x <= 0."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("y must be positive")


def _content_primitive(gram) -> Tuple[Fraction, List[List[int]]]:
    den = 1
    for row in gram:
        for x in row:
            f = Fraction(x)
            den = den * f.denominator // math.gcd(den, f.denominator)
    ig = [[int(Fraction(x) * den) for x in row] for row in gram]
    g = 0
    for row in ig:
        for x in row:
            g = math.gcd(g, x)
    if g == 0:
        raise ValueError("zero form has no shape")
    return Fraction(g, den), [[x // g for x in row] for row in ig]


def _check_pd(ig):
    for t in range(1, len(ig) + 1):
        if exact.det_int([row[:t] for row in ig[:t]]) <= 0:
            raise ValueError("form is not positive definite")


def _gauss_reduce(a: int, b: int, c: int) -> Tuple[int, int, int]:
    # reduced domain: -a < 2b <= a <= c, with b >= 0 on either boundary
    while True:
        if a > c:
            a, c = c, a
        t = round(Fraction(b, a))
        if t:
            c += t * t * a - 2 * t * b
            b -= t * a
            continue
        if a > c:
            continue
        break
    if 2 * b == -a:
        b = -b
    if b < 0 and (2 * b == -a or a == c or 2 * b == a):
        b = -b
    return a, b, c


def _pool_vectors(ig) -> List[Tuple[int, Tuple[int, ...]]]:
    # all +-pairs of norm up to the k-th successive minimum; the basis
    # diagonal bounds that minimum, so one sweep suffices
    k = len(ig)
    bound = max(ig[i][i] for i in range(k))
    vecs = kernel.short_vectors(ig, bound)
    if len(vecs) > _POOL_CAP:
        raise SearchBoundError(
            "canonicalization pool too large: %d vectors" % len(vecs)
        )
    rows: List[List[int]] = []
    lam_k = None
    for norm, v in vecs:
        rows.append(list(v))
        if exact.rank_int([r[:] for r in rows]) < len(rows):
            rows.pop()
        if len(rows) == k:
            lam_k = norm
            break
    assert lam_k is not None
    return [(norm, v) for norm, v in vecs if norm <= lam_k]


def _canonical_gram(ig) -> Tuple[Tuple[int, ...], ...]:
    """Deterministic representative of the GL_k(Z)-class of an integral
    primitive PD Gram.

    The candidate pool is every vector of norm at most the k-th
    successive minimum (a class invariant); a basis within that pool
    exists for k <= 4.  The representative minimizes, column by column,
    (norm, |off-diagonal| entries with positive sign preferred) over
    unimodular tuples from the pool.
    """
    k = len(ig)
    if k == 1:
        return ((1,),)
    if k == 2:
        a, b, c = _gauss_reduce(ig[0][0], ig[0][1], ig[1][1])
        return ((a, b), (b, c))
    if k > 4:
        raise SearchBoundError(
            "canonicalization implemented for rank <= 4, got %d" % k
        )
    pool = []
    for norm, v in _pool_vectors(ig):
        pool.append((norm, v))
        pool.append((norm, tuple(-x for x in v)))
    pool.sort(key=lambda t: (t[0], t[1]))

    def bilin(u, w):
        return sum(u[i] * ig[i][j] * w[j] for i in range(k) for j in range(k))

    best_u: Optional[List[Tuple[int, ...]]] = None
    best_key: Optional[Tuple[Tuple[int, ...], ...]] = None

    # key = per-depth Gram columns; prune against best only while the
    # prefix still ties it
    def extend(rows, key, tied):
        nonlocal best_u, best_key
        depth = len(rows)
        if depth == k:
            if exact.det_int([list(r) for r in rows]) in (1, -1):
                if best_key is None or key < best_key:
                    best_key, best_u = key, rows
            return
        for norm, v in pool:
            col = (norm,) + tuple(
                (abs(x), 0 if x >= 0 else 1)
                for x in (bilin(r, v) for r in rows)
            )
            still = tied
            if tied and best_key is not None:
                if col > best_key[depth]:
                    continue
                still = col == best_key[depth]
            new_rows = rows + [v]
            if exact.rank_int([list(r) for r in new_rows]) <= depth:
                continue
            extend(new_rows, key + (col,), still)

    extend([], (), True)
    assert best_u is not None, "pool contained no unimodular basis"
    u = best_u
    return tuple(
        tuple(bilin(u[i], u[j]) for j in range(k)) for i in range(k)
    )


def shape(q: quadform.QuadraticForm, lam) -> ShapeClass:
    """Similarity class of the form restricted to the lattice.

    Accepts a Lattice, a Subspace (its integer-point lattice is used), or
    raw basis rows.  Content is stripped first, the primitive integral
    Gram is canonicalized, and the stripped factor is reported as scale.
    """
    if isinstance(lam, quadform.Subspace):
        rows = [list(r) for r in lam.basis]
    elif isinstance(lam, quadform.Lattice):
        rows = [list(r) for r in lam.basis]
    else:
        rows = [list(r) for r in lam]
    if not rows:
        raise ValueError("shape of a rank-zero lattice is undefined")
    gram = quadform.gram_restriction(q, rows).gram
    content, ig = _content_primitive(gram)
    _check_pd(ig)
    return ShapeClass(_canonical_gram(ig), content)


def forms_equivalent(g1, g2) -> bool:
    """Whether two integral PD Grams are GL_k(Z)-equivalent, by
    norm-by-norm backtracking over short vectors."""
    a = [[int(x) for x in row] for row in g1]
    b = [[int(x) for x in row] for row in g2]
    if len(a) != len(b):
        return False
    k = len(a)
    if k == 0:
        return True
    _check_pd(a)
    _check_pd(b)
    if exact.det_int([r[:] for r in a]) != exact.det_int([r[:] for r in b]):
        return False

    def bilin(u, w):
        return sum(u[i] * a[i][j] * w[j] for i in range(k) for j in range(k))

    cand: List[List[Tuple[int, ...]]] = []
    for i in range(k):
        vs = list(kernel.vectors_with_norm(a, b[i][i]))
        if len(vs) > _POOL_CAP:
            raise SearchBoundError("isometry search pool too large")
        cand.append([v for v in vs] + [tuple(-x for x in v) for v in vs])

    def extend(rows):
        depth = len(rows)
        if depth == k:
            return True
        for v in cand[depth]:
            if any(bilin(rows[j], v) != b[j][depth] for j in range(depth)):
                continue
            new_rows = rows + [v]
            if exact.rank_int([list(r) for r in new_rows]) <= depth:
                continue
            if extend(new_rows):
                return True
        return False

    return extend([])


def upper_half_point(gram) -> UpperHalfPoint:
    """Fundamental-domain point of a binary PD Gram [[a,b],[b,c]]: the
    root z = (-b + i sqrt(ac - b^2))/a reduced by the modular group.
    Scaling-invariant by construction."""
    a = Fraction(gram[0][0])
    b = Fraction(gram[0][1])
    c = Fraction(gram[1][1])
    if Fraction(gram[1][0]) != b:
        raise ValueError("gram must be symmetric")
    if a <= 0 or a * c - b * b <= 0:
        raise ValueError("form is not positive definite")
    x = -b / a
    y2 = (a * c - b * b) / (a * a)
    # exact modular reduction on (x, y^2)
    while True:
        t = round(x)
        x -= t
        norm2 = x * x + y2
        if norm2 < 1:
            x, y2 = -x / norm2, y2 / (norm2 * norm2)
            continue
        break
    if x * x + y2 == 1 and x > 0:
        x = -x
    if x == Fraction(1, 2):
        x = -x
    return UpperHalfPoint(float(x), math.sqrt(float(y2)))


def grassmann_coordinates(L: quadform.Subspace) -> np.ndarray:
    """Float matrix of the Q-orthogonal projection onto L, acting on
    column vectors: P^2 = P, P M_Q^{-1} symmetric, trace k."""
    p = quadform.projection_matrix(L.form, L)
    return np.array([[float(x) for x in row] for row in p], dtype=float).T


@dataclass(eq=False)
class ModuliPoint:
    """Matrix data (rho, alpha, a, m) realizing a subspace-with-lattice
    pair as a point of the block-triangular coset space."""

    form: quadform.QuadraticForm
    rho: np.ndarray
    alpha: float
    a: np.ndarray
    m: np.ndarray
    g_l: np.ndarray
    g_q: np.ndarray
    k: int
    lam: float

    def residuals(self) -> dict:
        n = self.form.n
        k = self.k
        mq = np.array([[float(x) for x in row] for row in self.form.gram])
        iso = np.abs(self.rho.T @ mq @ self.rho - mq).max()
        lower = np.abs(self.m[k:, :k]).max() if k < n else 0.0
        det1 = abs(abs(np.linalg.det(self.m[:k, :k])) - 1.0)
        det2 = abs(abs(np.linalg.det(self.m[k:, k:])) - 1.0) if k < n else 0.0
        factor = np.abs(
            self.m - self.a @ self.rho @ (self.alpha * self.g_l)
        ).max()
        cho = np.abs(self.g_q.T @ self.g_q - mq).max()
        return {
            "rho_isometry": float(iso),
            "m_lower_block": float(lower),
            "pi1_det": float(det1),
            "pi2_det": float(det2),
            "m_factorization": float(factor),
            "gq_factorization": float(cho),
        }


def _gram_schmidt_q(mq: np.ndarray, cols: np.ndarray) -> np.ndarray:
    n = cols.shape[1]
    out = cols.astype(float).copy()
    for i in range(n):
        v = out[:, i]
        for j in range(i):
            v = v - (out[:, j] @ mq @ v) * out[:, j]
        nrm = math.sqrt(v @ mq @ v)
        out[:, i] = v / nrm
    return out


def moduli_point(
    q: quadform.QuadraticForm,
    L: quadform.Subspace,
    lam: Optional[quadform.Lattice] = None,
) -> ModuliPoint:
    """Builds g_L, alpha_L, rho_L, a_L and m_L = a rho alpha g_L.

    Column convention throughout: columns of g_L are a basis of the
    attached full lattice, the first k of them a basis of L(Z) (so the
    determinant is positive after a sign fix on the last column).
    """
    n, k = q.n, L.k
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    if lam is None:
        lam = quadform.lambda_L(q, L)
    lam_rows = [list(r) for r in lam.basis]
    coords = exact.lattice_coordinates(lam_rows, [list(r) for r in L.basis])
    if coords is None:
        raise ValueError("L(Z) is not inside the given lattice")
    u = exact.complete_to_unimodular(coords)
    basis_rows = exact.mat_mul(u, lam_rows)
    det = exact.det_fraction(exact.to_fraction_matrix(basis_rows))
    if det < 0:
        basis_rows[-1] = [-x for x in basis_rows[-1]]
        det = -det
    g_l = np.array(
        [[float(x) for x in row] for row in basis_rows], dtype=float
    ).T
    alpha = float(det) ** (-1.0 / n)

    mq = np.array([[float(x) for x in row] for row in q.gram])
    perp = quadform.orth_complement(q, L)
    frame_cols = np.array(
        [[float(x) for x in row] for row in list(L.basis) + list(perp.basis)],
        dtype=float,
    ).T
    f = _gram_schmidt_q(mq, frame_cols)
    g_q = np.linalg.cholesky(mq).T
    rho = np.linalg.solve(g_q, np.eye(n)) @ np.linalg.inv(f)
    if np.linalg.det(rho) < 0:
        f[:, -1] = -f[:, -1]
        rho = np.linalg.solve(g_q, np.eye(n)) @ np.linalg.inv(f)

    m0 = rho @ (alpha * g_l)
    lam_scalar = abs(np.linalg.det(m0[:k, :k])) ** (-1.0 / k)
    a = np.diag(
        [lam_scalar] * k + [lam_scalar ** (-k / (n - k))] * (n - k)
    )
    m = a @ m0
    return ModuliPoint(
        form=q, rho=rho, alpha=alpha, a=a, m=m,
        g_l=g_l, g_q=g_q, k=k, lam=lam_scalar,
    )


def shapes_from_moduli(
    q: quadform.QuadraticForm, point: ModuliPoint
) -> Tuple[np.ndarray, np.ndarray]:
    """Real Grams of the two shapes read off the moduli data: the
    upper-left block of g_Q m gives [L(Z)], the inverse-transpose of the
    bottom-right block gives [L^perp(Z)]."""
    k = point.k
    t = point.g_q @ point.m
    a_blk = t[:k, :k]
    d_blk = t[k:, k:]
    gram_l = a_blk.T @ a_blk
    dinv_t = np.linalg.inv(d_blk).T
    gram_perp = dinv_t.T @ dinv_t
    return gram_l, gram_perp


def subspace_shapes(
    q: quadform.QuadraticForm, L: quadform.Subspace
) -> Tuple[ShapeClass, ShapeClass]:
    """Exact shapes of L(Z) and L^perp(Z)."""
    perp = quadform.orth_complement(q, L)
    return shape(q, L), shape(q, perp)
