"""Lattice invariants of rational subspaces of a quadratic space.

A form is given by an integral symmetric positive definite Gram matrix M
acting on row vectors, <x, y> = x M y^T.  A subspace L of Q^n is stored
through the canonical HNF basis of the saturated lattice L(Z) = L ∩ Z^n,
so structurally equal dataclasses describe the same subspace.  Lattices
(full rank or not, rational entries allowed) carry canonical rational
HNF bases with the same property.

The invariants provided here: restricted Gram forms, discriminants
(global and local), dual and projected lattices, glue groups, the index
of L(Z) in L ∩ (Z^n)^#, primitive parts, a distinguished lattice between
Z^n and its dual attached to L, rational rotations, and the stabilizer
of L in the integral special orthogonal group.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from . import exact
from . import kernel


def _freeze(rows):
    return tuple(tuple(r) for r in rows)


def _thaw(rows):
    return [list(r) for r in rows]


@dataclass(frozen=True)
class QuadraticForm:
    """Integral symmetric positive definite form on Z^n."""

    gram: tuple

    def __post_init__(self):
        g = _freeze(self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("gram matrix must be square")
        for i in range(n):
            for j in range(n):
                if not isinstance(g[i][j], int):
                    raise ValueError("gram entries must be integers")
                if g[i][j] != g[j][i]:
                    raise ValueError("gram matrix must be symmetric")
        for k in range(1, n + 1):
            minor = [list(row[:k]) for row in g[:k]]
            if exact.det_int(minor) <= 0:
                raise ValueError("gram matrix must be positive definite")

    @classmethod
    def sum_of_squares(cls, n: int) -> "QuadraticForm":
        return cls(exact.identity(n))

    @classmethod
    def diagonal(cls, entries) -> "QuadraticForm":
        n = len(entries)
        g = [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)]
        return cls(g)

    @property
    def n(self) -> int:
        return len(self.gram)

    def disc(self) -> int:
        return _form_disc(self.gram)

    def bilinear(self, v, w):
        n = self.n
        return sum(v[i] * self.gram[i][j] * w[j] for i in range(n) for j in range(n))

    def norm(self, v):
        return self.bilinear(v, v)

    def inverse_gram(self):
        return _thaw(_inverse_gram(self.gram))

    def to_json(self):
        return {"n": self.n, "gram": _thaw(self.gram)}

    @classmethod
    def from_json(cls, obj) -> "QuadraticForm":
        return cls(obj["gram"])


@lru_cache(maxsize=None)
def _form_disc(gram):
    return exact.det_int(_thaw(gram))


@lru_cache(maxsize=None)
def _inverse_gram(gram):
    return _freeze(exact.inverse_fraction(exact.to_fraction_matrix(_thaw(gram))))


@dataclass(frozen=True)
class Lattice:
    """Lattice in Q^n given by a canonical rational HNF basis (rows)."""

    n: int
    basis: tuple

    @classmethod
    def from_rows(cls, n: int, rows) -> "Lattice":
        canon = exact.rational_hnf_basis(_thaw(rows)) if rows else []
        frozen = tuple(tuple(Fraction(x) for x in row) for row in canon)
        return cls(n, frozen)

    @classmethod
    def standard(cls, n: int) -> "Lattice":
        return cls.from_rows(n, exact.identity(n))

    @property
    def rank(self) -> int:
        return len(self.basis)

    def contains(self, vector) -> bool:
        return exact.lattice_coordinates(_thaw(self.basis), [list(vector)]) is not None

    def contains_lattice(self, other: "Lattice") -> bool:
        if other.rank == 0:
            return True
        return exact.lattice_coordinates(_thaw(self.basis), _thaw(other.basis)) is not None

    def to_json(self):
        return {"n": self.n, "basis": [[exact.frac_str(x) for x in row] for row in self.basis]}

    @classmethod
    def from_json(cls, obj) -> "Lattice":
        rows = [[exact.parse_frac(x) for x in row] for row in obj["basis"]]
        return cls.from_rows(obj["n"], rows)


@dataclass(frozen=True)
class Subspace:
    """Rational subspace, stored as the HNF basis of L(Z) = L ∩ Z^n."""

    form: QuadraticForm
    basis: tuple

    @classmethod
    def from_rows(cls, form: QuadraticForm, rows) -> "Subspace":
        cleared = []
        for row in rows:
            # row scaling preserves the span, so clear denominators per row
            fr = [Fraction(x) for x in row]
            den = 1
            for x in fr:
                den = den * x.denominator // gcd(den, x.denominator)
            cleared.append([int(x * den) for x in fr])
        sat = exact.saturate(cleared) if cleared else []
        return cls(form, _freeze(sat))

    @classmethod
    def from_saturated_rows(cls, form: QuadraticForm, rows) -> "Subspace":
        """Cheap constructor for integer rows already known to be a basis of
        span ∩ Z^n; only canonicalizes.  HNF uniqueness makes the result
        identical to ``from_rows`` whenever the assumption holds."""
        canon = exact.hnf_basis([list(r) for r in rows]) if rows else []
        if len(canon) != len(rows):
            raise ValueError("rows are linearly dependent")
        return cls(form, _freeze(canon))

    @property
    def k(self) -> int:
        return len(self.basis)

    @property
    def n(self) -> int:
        return self.form.n

    def hnf_key(self) -> str:
        return ";".join(str(x) for row in self.basis for x in row)

    def lattice(self) -> Lattice:
        return Lattice.from_rows(self.n, self.basis)

    def to_json(self):
        return {"basis": _thaw(self.basis)}

    @classmethod
    def from_json(cls, form: QuadraticForm, obj) -> "Subspace":
        return cls.from_rows(form, obj["basis"])


@dataclass(frozen=True)
class GlueGroup:
    """Invariant factors d_1 | d_2 | ... | d_k of L(Z)^#/L(Z), units kept."""

    factors: tuple

    @property
    def order(self) -> int:
        out = 1
        for d in self.factors:
            out *= d
        return out

    def local_exponents(self, p: int):
        out = []
        for d in self.factors:
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            out.append(e)
        return out


@dataclass(frozen=True)
class RestrictedForm:
    """Gram matrix of the form restricted to a lattice, with provenance tag."""

    gram: tuple
    tag: str

    def __post_init__(self):
        frozen = tuple(tuple(Fraction(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", frozen)

    @property
    def dim(self) -> int:
        return len(self.gram)

    def disc(self) -> Fraction:
        return exact.det_fraction(_thaw(self.gram))

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self.gram for x in row)

    @property
    def content(self) -> Fraction:
        den = 1
        for row in self.gram:
            for x in row:
                den = den * x.denominator // gcd(den, x.denominator)
        g = 0
        for row in self.gram:
            for x in row:
                g = gcd(g, int(x * den))
        return Fraction(g, den)

    def to_json(self):
        return {
            "dim": self.dim,
            "gram": [[exact.frac_str(x) for x in row] for row in self.gram],
            "content": exact.frac_str(self.content),
            "tag": self.tag,
        }


def _basis_rows(obj):
    if isinstance(obj, (Lattice, Subspace)):
        return _thaw(obj.basis)
    return [list(r) for r in obj]


def gram_restriction(q: QuadraticForm, lat, tag: str = "restriction") -> RestrictedForm:
    """Gram matrix B M B^T of the form on the given lattice basis."""
    rows = _basis_rows(lat)
    bm = exact.mat_mul(rows, _thaw(q.gram))
    return RestrictedForm(_freeze(exact.mat_mul(bm, exact.transpose(rows))), tag)


def disc(q: QuadraticForm, L: Subspace) -> int:
    """disc_Q(L): determinant of the form restricted to L(Z)."""
    g = gram_restriction(q, L).gram
    d = exact.det_fraction(_thaw(g))
    return int(d)


def dual_lattice(q: QuadraticForm, lat: Lattice) -> Lattice:
    """Dual basis (B M B^T)^{-1} B inside span(lat); involutive."""
    rows = _basis_rows(lat)
    if not rows:
        return Lattice.from_rows(lat.n, [])
    g = exact.mat_mul(exact.mat_mul(rows, _thaw(q.gram)), exact.transpose(rows))
    ginv = exact.inverse_fraction(exact.to_fraction_matrix(g))
    return Lattice.from_rows(lat.n, exact.mat_mul(ginv, rows))


def standard_dual(q: QuadraticForm) -> Lattice:
    """(Z^n)^#: the dual of Z^n, with basis M^{-1}."""
    return Lattice.from_rows(q.n, q.inverse_gram())


def orth_complement(q: QuadraticForm, L: Subspace) -> Subspace:
    """L^⊥ with respect to the form, canonical saturated basis."""
    if L.k == 0:
        return Subspace.from_rows(q, exact.identity(q.n))
    bm = exact.mat_mul(_thaw(L.basis), _thaw(q.gram))
    return Subspace(q, _freeze(exact.kernel_basis(bm)))


def projection_matrix(q: QuadraticForm, L: Subspace):
    """Matrix P with x @ P = orthogonal projection of x onto span(L)."""
    b = _thaw(L.basis)
    if not b:
        return [[Fraction(0)] * q.n for _ in range(q.n)]
    m = _thaw(q.gram)
    g = exact.mat_mul(exact.mat_mul(b, m), exact.transpose(b))
    ginv = exact.inverse_fraction(exact.to_fraction_matrix(g))
    return exact.mat_mul(exact.mat_mul(exact.mat_mul(m, exact.transpose(b)), ginv), b)


def project_lattice(q: QuadraticForm, L: Subspace, lat: Lattice) -> Lattice:
    """Image of the lattice under orthogonal projection onto span(L)."""
    p = projection_matrix(q, L)
    rows = [exact.vec_mat(list(r), p) for r in lat.basis]
    rows = [r for r in rows if any(r)]
    return Lattice.from_rows(q.n, rows)


def glue_group(q: QuadraticForm, L: Subspace) -> GlueGroup:
    """Invariant factors of L(Z)^#/L(Z): the SNF of the restricted Gram.

    The Gram matrix is the coordinate matrix of L(Z) inside L(Z)^#, so its
    invariant factors present the quotient; their product is disc_Q(L).
    """
    g = gram_restriction(q, L).gram
    ig = [[int(x) for x in row] for row in g]
    return GlueGroup(tuple(exact.invariant_factors(ig)))


def local_glue(q: QuadraticForm, L: Subspace, p: int):
    """Exponents of p in the glue group factors, in nondecreasing order."""
    return glue_group(q, L).local_exponents(p)


def lattice_intersect_subspace(lat: Lattice, L: Subspace) -> Lattice:
    """The lattice lat ∩ span(L)."""
    rows = _thaw(lat.basis)
    if not rows or L.k == 0:
        return Lattice.from_rows(lat.n, [])
    den, irows = exact.scale_to_int(rows)
    # span(L) = dot-orthogonal complement of kernel_basis(L.basis)
    ker = exact.kernel_basis(_thaw(L.basis))
    if not ker:
        return lat
    prod = exact.mat_mul(irows, exact.transpose(ker))
    coeffs = exact.kernel_basis(exact.transpose(prod))
    if not coeffs:
        return Lattice.from_rows(lat.n, [])
    inter = exact.mat_mul(coeffs, irows)
    if den != 1:
        inter = [[Fraction(x, den) for x in row] for row in inter]
    return Lattice.from_rows(lat.n, inter)


def index_iL(q: QuadraticForm, L: Subspace) -> int:
    """[L ∩ (Z^n)^# : L(Z)], the denominator index of L in the dual."""
    t = lattice_intersect_subspace(standard_dual(q), L)
    if L.k == 0:
        return 1
    return exact.lattice_index(_thaw(L.basis), _thaw(t.basis))


def _unit_square_class(u: int, p: int):
    if p == 2:
        return u % 8
    return 1 if pow(u % p, (p - 1) // 2, p) == 1 else -1


def local_disc(q: QuadraticForm, L: Subspace, p: int):
    """(ord, unit class) of disc_Q(L) at p.

    ord is the p-valuation; the unit class is the Legendre symbol of the
    unit part for odd p and its residue mod 8 for p = 2.
    """
    d = disc(q, L)
    ord_p = 0
    while d % p == 0:
        d //= p
        ord_p += 1
    return ord_p, _unit_square_class(d, p)


def restricted_forms(q: QuadraticForm, L: Subspace):
    """(q_L, q_perp, tau_perp) for the subspace and its complement.

    q_L lives on L(Z), q_perp on L^⊥(Z), and tau_perp on L^⊥ ∩ (Z^n)^#;
    the last Gram matrix is rational in general, with
    disc(q_perp) = i(L^⊥)^2 · disc(tau_perp).
    """
    perp = orth_complement(q, L)
    q_l = gram_restriction(q, L, tag="q_L")
    q_p = gram_restriction(q, perp, tag="q_perp")
    t = lattice_intersect_subspace(standard_dual(q), perp)
    tau = gram_restriction(q, t, tag="tau_perp")
    return q_l, q_p, tau


def content_and_primitive(rf: RestrictedForm):
    """Split an integral form as content * primitive part."""
    if not rf.is_integral():
        raise ValueError("content_and_primitive: form is not integral")
    g = int(rf.content)
    prim = [[int(x) // g for x in row] for row in rf.gram]
    return g, RestrictedForm(_freeze(prim), tag="primitive")


# ---------------------------------------------------------------------------
# the lattice Λ_L between Z^n and (Z^n)^#

# The discriminant group A = (Z^n)^#/Z^n is presented by the SNF of M:
# with U M V = diag(d), the rows u_i/d_i of D^{-1}U generate (Z^n)^# and
# their images generate A with independent orders d_i.  Elements of A are
# coordinate tuples mod (d_1..d_n).

_GROUP_CAP = 1 << 16


def _disc_group(q: QuadraticForm):
    d, u, _ = exact.snf(_thaw(q.gram))
    uinv = exact.inverse_unimodular(u)
    return d, u, uinv


def _group_coords(t_rows, d, uinv):
    """Coordinates mod d of dual vectors: a = t · U^{-1} · D (integral)."""
    out = []
    for t in t_rows:
        a = exact.vec_mat([Fraction(x) for x in t], exact.to_fraction_matrix(uinv))
        coords = []
        for i, x in enumerate(a):
            y = x * d[i]
            if y.denominator != 1:
                raise ValueError("vector is not in the dual lattice")
            coords.append(int(y) % d[i] if d[i] else int(y))
        out.append(tuple(coords))
    return out


def _group_add(a, b, d):
    return tuple((x + y) % m for x, y, m in zip(a, b, d))


def _group_order(a, d):
    o = 1
    for x, m in zip(a, d):
        om = m // gcd(m, x) if m else 1
        o = o * om // gcd(o, om)
    return o


def _subgroup_elements(gens, d, cap=_GROUP_CAP):
    zero = tuple(0 for _ in d)
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = _group_add(a, g, d)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
                    if len(seen) > cap:
                        raise ResourceWarning("discriminant group too large")
        frontier = nxt
    return sorted(seen)


def _group_vector(a, d, u):
    """The dual vector sum a_i u_i / d_i for a coordinate tuple."""
    n = len(d)
    return [
        sum(Fraction(a[i], d[i]) * u[i][j] for i in range(n)) for j in range(n)
    ]


def _complement_lifts(q: QuadraticForm, L: Subspace):
    """Generators of a complement of the image of L ∩ (Z^n)^# in A, or None.

    A complement exists iff the quotient map A -> A/T̄ admits a group
    section; sections are found one cyclic factor at a time by searching
    each generator's coset for an element of the right order.
    """
    d, u, uinv = _disc_group(q)
    if all(x == 1 for x in d):
        return []
    t = lattice_intersect_subspace(standard_dual(q), L)
    tbar_gens = _group_coords(_thaw(t.basis), d, uinv)
    tbar = _subgroup_elements(tbar_gens, d)
    # present A/T̄ by stacking the cyclic relations of A over T̄'s generators
    n = q.n
    rel = [[d[i] if i == j else 0 for j in range(n)] for i in range(n)]
    rel += [list(a) for a in tbar_gens]
    m, _, v = exact.snf(rel)
    vinv = exact.inverse_unimodular(v)
    lifts = []
    for j in range(n):
        mj = m[j] if j < len(m) else 1
        if mj == 1:
            continue
        base = tuple(x % dd if dd else x for x, dd in zip(vinv[j], d))
        found = None
        for tt in tbar:
            cand = _group_add(base, tt, d)
            if mj % _group_order(cand, d) == 0:
                found = cand
                break
        if found is None:
            return None
        lifts.append(_group_vector(found, d, u))
    return lifts


def _lift_construction(q: QuadraticForm, L: Subspace):
    """Basis of L(Z) plus lifts to (Z^n)^# of the dual basis of L^⊥(Z).

    The projection π_{L^⊥} identifies (Z^n)^#/(L ∩ (Z^n)^#) with the dual
    of L^⊥(Z) taken inside L^⊥; lifting its canonical basis through one
    integral preimage, reduced modulo L ∩ (Z^n)^#, is deterministic.
    """
    rows = _thaw(L.basis)
    perp = orth_complement(q, L)
    if perp.k == 0:
        return Lattice.from_rows(q.n, rows)
    dstar = dual_lattice(q, perp.lattice())
    dual_rows = _thaw(standard_dual(q).basis)
    proj = projection_matrix(q, perp)
    system = exact.mat_mul(dual_rows, proj)
    t = lattice_intersect_subspace(standard_dual(q), L)
    t_rows = _thaw(t.basis)
    lifted = []
    for w in dstar.basis:
        y = exact.solve_integral(system, list(w))
        if y is None:
            raise ValueError("dual basis vector has no integral preimage")
        v = exact.vec_mat(y, dual_rows)
        if t_rows:
            s = exact.vec_mat(v, projection_matrix(q, L))
            c = exact.solve_row_coordinates(t_rows, s)
            if c is None:
                raise ValueError("projection left the span of L")
            for ci, trow in zip(c, t_rows):
                shift = ci.__floor__()
                if shift:
                    v = [x - shift * Fraction(y) for x, y in zip(v, trow)]
        lifted.append(v)
    return Lattice.from_rows(q.n, rows + lifted)


def lambda_L(q: QuadraticForm, L: Subspace) -> Lattice:
    """Distinguished full-rank lattice attached to L.

    Contains L(Z) as L ∩ Λ, projects onto the dual of L^⊥(Z), and its own
    dual meets L^⊥ in L^⊥(Z).  When the discriminant group admits a
    complement of the image of L ∩ (Z^n)^#, the result also satisfies
    Z^n ⊆ Λ ⊆ (Z^n)^#; such a complement need not exist, in which case
    the lift construction is used and only [Z^n : Λ ∩ Z^n] ≤ disc(M) is
    guaranteed alongside the three identities.
    """
    return lambda_L_detail(q, L)[0]


def lambda_L_detail(q: QuadraticForm, L: Subspace):
    """(Λ_L, flag): flag is True when Z^n ⊆ Λ_L was achieved."""
    try:
        lifts = _complement_lifts(q, L)
    except ResourceWarning:
        lifts = None
    if lifts is not None:
        rows = exact.identity(q.n) + [list(v) for v in lifts]
        return Lattice.from_rows(q.n, rows), True
    lam = _lift_construction(q, L)
    return lam, lam.contains_lattice(Lattice.standard(q.n))


# ---------------------------------------------------------------------------
# rational rotations and integral stabilizers


def is_special_orthogonal(q: QuadraticForm, g) -> bool:
    """g^T M g = M and det g = 1, over the rationals."""
    gf = exact.to_fraction_matrix(_thaw(g))
    m = exact.to_fraction_matrix(_thaw(q.gram))
    lhs = exact.mat_mul(exact.mat_mul(exact.transpose(gf), m), gf)
    if not exact.mat_eq(lhs, m):
        return False
    return exact.det_fraction(gf) == 1


def rotate_subspace(g, L: Subspace) -> Subspace:
    """Image subspace g·L (columns convention: rows map by v ↦ v g^T)."""
    q = L.form
    if not is_special_orthogonal(q, g):
        raise ValueError("rotate_subspace: matrix is not in SO_Q")
    gt = exact.transpose(_thaw(g))
    rows = exact.mat_mul(_thaw(L.basis), gt)
    return Subspace.from_rows(q, rows)


def _vp(m: int, p: int) -> int:
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def rotation_ord_p(g, p: int) -> int:
    """Smallest ℓ with p^ℓ g and p^ℓ g^{-1} both p-integral."""
    gf = exact.to_fraction_matrix(_thaw(g))
    ginv = exact.inverse_fraction(gf)
    out = 0
    for mat in (gf, ginv):
        for row in mat:
            for x in row:
                out = max(out, _vp(x.denominator, p))
    return out


@lru_cache(maxsize=None)
def _special_orthogonal_group(gram):
    """All g ∈ SO_Q(Z), as row-major tuples.  Finite since M is definite.

    Columns are images of the standard basis vectors; candidates for
    column j are the lattice vectors of norm M_jj, matched back against
    the Gram entries while backtracking.
    """
    n = len(gram)
    m = _thaw(gram)
    cands = {}
    for j in range(n):
        t = gram[j][j]
        if t not in cands:
            half = kernel.vectors_with_norm(m, t)
            cands[t] = [v for v in half] + [tuple(-x for x in v) for v in half]
    out = []
    cols = [None] * n

    def pair(v, w):
        return sum(v[i] * m[i][j] * w[j] for i in range(n) for j in range(n))

    def rec(j):
        if j == n:
            g = [[cols[c][r] for c in range(n)] for r in range(n)]
            if exact.det_int([list(r) for r in g]) == 1:
                out.append(_freeze(g))
            return
        for v in cands[gram[j][j]]:
            if all(pair(cols[i], v) == gram[i][j] for i in range(j)):
                cols[j] = v
                rec(j + 1)
        cols[j] = None

    rec(0)
    return tuple(out)


def special_orthogonal_group(q: QuadraticForm):
    """The finite group SO_Q(Z) as a tuple of integer matrices."""
    return _special_orthogonal_group(q.gram)


def integral_stabilizer_order(q: QuadraticForm, L: Subspace) -> int:
    """|{g ∈ SO_Q(Z) : g·L = L}|."""
    count = 0
    for g in special_orthogonal_group(q):
        gt = exact.transpose(_thaw(g))
        rows = exact.mat_mul(_thaw(L.basis), gt)
        if _freeze(exact.saturate(rows)) == L.basis:
            count += 1
    return count
