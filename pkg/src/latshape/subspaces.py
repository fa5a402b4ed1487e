"""Enumeration of rational subspaces with a fixed discriminant.

Two independent enumerators: a Minkowski-bound vector search valid for
any positive definite integral form, and an inductive hyperplane
recursion for the sum of squares.  They are cross-validated against
each other on overlapping ranges by the test suite.

Canonical output: every subspace is returned through
Subspace.from_rows, so bases are saturated HNF and deduplication is by
that basis; lists are sorted by it as well.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import exact
from . import kernel
from . import quadform

DEFAULT_CANDIDATE_CAP = 2_000_000
_CAP_ENV = "LATSHAPE_MAX_CANDIDATES"


class BoundExceededError(RuntimeError):
    """Raised when an enumeration would exceed the candidate budget."""


class Verdict(enum.Enum):
    EMPTY = "empty"
    NONEMPTY = "nonempty"
    ALWAYS_NONEMPTY = "always-nonempty"
    NO_CLOSED_FORM = "no-closed-form"


@dataclass(frozen=True)
class SchmidtTriple:
    """Hyperplane decomposition data (h, lbar, v) of a subspace.

    h is the positive generator of the projection of L(Z) onto the last
    axis, lbar = L intersected with the hyperplane, and v is the
    projection of a lift (u, h) in L(Z) onto the orthogonal complement
    of lbar inside the hyperplane.
    """

    h: int
    lbar: quadform.Subspace
    v: Tuple[Fraction, ...]

    def __post_init__(self):
        if self.h < 1:
            raise ValueError("h must be a positive integer")
        object.__setattr__(self, "v", tuple(Fraction(x) for x in self.v))
        if len(self.v) != self.lbar.n:
            raise ValueError("v must live in the ambient space of lbar")


@dataclass(frozen=True)
class DiscClassTable:
    """Map D -> sorted tuple of canonical subspaces of discriminant D."""

    table: Dict[int, Tuple[quadform.Subspace, ...]]

    def __post_init__(self):
        for d, subs in self.table.items():
            keys = [s.basis for s in subs]
            if keys != sorted(keys) or len(set(keys)) != len(keys):
                raise ValueError("subspace lists must be sorted and duplicate-free")
    def counts(self) -> Dict[int, int]:
        return {d: len(subs) for d, subs in self.table.items()}

    def get(self, d: int) -> Tuple[quadform.Subspace, ...]:
        return self.table.get(d, ())


def _candidate_cap(explicit: Optional[int]) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get(_CAP_ENV)
    return int(env) if env else DEFAULT_CANDIDATE_CAP


def hermite_bound(k: int, max_disc: int) -> int:
    """ceil((4/3)^(k(k-1)/2) * max_disc); any integral rank-k lattice of
    determinant <= max_disc has a Minkowski-reduced basis with all norms
    below this (norms are >= 1, so each norm is at most the product)."""
    e = k * (k - 1) // 2
    return -((-(4**e) * max_disc) // 3**e)


def _primitive(vec: Sequence[int]) -> bool:
    g = 0
    for x in vec:
        g = math.gcd(g, x)
    return g == 1


def enumerate_by_disc(
    q: quadform.QuadraticForm,
    k: int,
    max_disc: int,
    max_candidates: Optional[int] = None,
) -> DiscClassTable:
    """All of H^{n,k}_q(D) for every D <= max_disc, in one vector sweep."""
    n = q.n
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if max_disc < 1:
        raise ValueError("max_disc must be >= 1")
    cap = _candidate_cap(max_candidates)

    buckets: Dict[int, List[quadform.Subspace]] = {}

    if k == 1:
        cands = kernel.short_vectors(q.gram, max_disc)
        if len(cands) > cap:
            raise BoundExceededError(
                "candidate bound exceeded: %d vectors (cap %d)" % (len(cands), cap)
            )
        for norm, vec in cands:
            if _primitive(vec):
                sub = quadform.Subspace.from_rows(q, [list(vec)])
                buckets.setdefault(norm, []).append(sub)
    elif k == n:
        if max_disc >= q.disc():
            full = quadform.Subspace.from_rows(
                q, [[1 if i == j else 0 for j in range(n)] for i in range(n)]
            )
            buckets.setdefault(q.disc(), []).append(full)
    else:
        e = k * (k - 1) // 2
        bound = hermite_bound(k, max_disc)
        cands = kernel.short_vectors(q.gram, bound)
        if len(cands) > cap:
            raise BoundExceededError(
                "candidate bound exceeded: %d vectors (cap %d)" % (len(cands), cap)
            )
        gram = q.gram
        m = len(cands)
        seen = set()

        def bilin(u, w):
            return sum(u[i] * sum(gram[i][j] * w[j] for j in range(n)) for i in range(n))

        # DFS over index-increasing tuples; candidate list is sorted by
        # norm, so the norm-product prune allows a hard break
        def extend(start, rows, grams, prod, depth):
            for i in range(start, m):
                norm, vec = cands[i]
                nprod = prod * norm
                if nprod * 3**e > 4**e * max_disc:
                    break
                pair = [bilin(vec, r) for r in rows]
                g_rows = [grams[t] + [pair[t]] for t in range(depth)]
                g_rows.append(pair + [norm])
                if exact.det_int([r[:] for r in g_rows]) == 0:
                    continue
                new_rows = rows + [list(vec)]
                if depth + 1 == k:
                    sub = quadform.Subspace.from_rows(q, new_rows)
                    if sub.basis in seen:
                        continue
                    seen.add(sub.basis)
                    d = quadform.disc(q, sub)
                    if d <= max_disc:
                        buckets.setdefault(d, []).append(sub)
                else:
                    extend(i + 1, new_rows, g_rows, nprod, depth + 1)

        extend(0, [], [], 1, 0)

    return DiscClassTable({d: tuple(sorted(subs, key=lambda s: s.basis)) for d, subs in buckets.items()})


def enumerate_subspaces(
    q: quadform.QuadraticForm,
    k: int,
    disc: int,
    max_candidates: Optional[int] = None,
) -> List[quadform.Subspace]:
    """The complete set H^{n,k}_q(disc), canonically sorted."""
    return list(enumerate_by_disc(q, k, disc, max_candidates).get(disc))


def lines_with_disc(
    q: quadform.QuadraticForm,
    disc: int,
    max_candidates: Optional[int] = None,
) -> List[quadform.Subspace]:
    """H^{n,1}_q(disc) from the fixed-norm shell only.

    Unlike enumerate_subspaces this never walks norms below disc, so it
    stays cheap for a single large discriminant.
    """
    if disc < 1:
        raise ValueError("disc must be >= 1")
    cap = _candidate_cap(max_candidates)
    shell = kernel.vectors_with_norm([list(r) for r in q.gram], disc)
    if len(shell) > cap:
        raise BoundExceededError(
            "candidate bound exceeded: %d vectors (cap %d)" % (len(shell), cap)
        )
    out = [
        quadform.Subspace.from_rows(q, [list(v)]) for v in shell if _primitive(v)
    ]
    out.sort(key=lambda s: s.basis)
    return out


def _xgcd_combination(values: Sequence[int]) -> Tuple[int, List[int]]:
    # returns (g, a) with g = gcd(values) > 0 and sum a_i values_i = g
    g, coeffs = 0, [0] * len(values)
    for i, val in enumerate(values):
        if val == 0:
            continue
        if g == 0:
            g = abs(val)
            coeffs = [0] * len(values)
            coeffs[i] = 1 if val > 0 else -1
            continue
        old_g = g
        gg, x, y = _xgcd(g, val)
        coeffs = [c * x for c in coeffs]
        coeffs[i] += y
        g = gg
        assert 0 < g <= old_g
    return g, coeffs


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        qq, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qq * x1
        y0, y1 = y1, y0 - qq * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _require_sum_of_squares(q: quadform.QuadraticForm):
    if q.gram != tuple(
        tuple(1 if i == j else 0 for j in range(q.n)) for i in range(q.n)
    ):
        raise ValueError("hyperplane recursion is implemented for the sum of squares")


def schmidt_decompose(L: quadform.Subspace) -> SchmidtTriple:
    """Split L <= Q^n along the last-coordinate hyperplane.

    Returns (h, lbar, v) with lbar = L meet the hyperplane, h > 0 the
    generator of the projection of L(Z) onto the last axis, and v the
    orthogonal projection of a lift onto the complement of lbar.
    Raises ValueError when L lies inside the hyperplane.
    """
    _require_sum_of_squares(L.form)
    rows = [list(r) for r in L.basis]
    n1 = L.n
    last = [r[-1] for r in rows]
    if not any(last):
        raise ValueError("subspace is contained in the hyperplane")
    h, coeffs = _xgcd_combination(last)
    u_full = [sum(coeffs[t] * rows[t][c] for t in range(len(rows))) for c in range(n1)]
    assert u_full[-1] == h
    small = quadform.QuadraticForm.sum_of_squares(n1 - 1)
    combos = exact.kernel_basis([last])
    lbar_rows = [
        [sum(a[t] * rows[t][c] for t in range(len(rows))) for c in range(n1 - 1)]
        for a in combos
    ]
    lbar = quadform.Subspace.from_rows(small, lbar_rows)
    u = u_full[:-1]
    if lbar.k == 0:
        v = tuple(Fraction(x) for x in u)
    else:
        comp = quadform.orth_complement(small, lbar)
        proj = quadform.projection_matrix(small, comp)
        v = tuple(
            sum(Fraction(u[r]) * proj[r][c] for r in range(n1 - 1))
            for c in range(n1 - 1)
        )
    return SchmidtTriple(h, lbar, v)


def _projection_data(lbar: quadform.Subspace):
    # projected lattice of Z^n onto the complement of lbar: HNF basis
    # rows, integer Gram with its scaling, and integral lifts per row
    q = lbar.form
    n = q.n
    if lbar.k == 0:
        rows = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
        proj = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    else:
        comp = quadform.orth_complement(q, lbar)
        proj = quadform.projection_matrix(q, comp)
        rows = [
            list(r)
            for r in quadform.project_lattice(
                q, comp, quadform.Lattice.standard(n)
            ).basis
        ]
    gram = [
        [sum(rows[i][t] * rows[j][t] for t in range(n)) for j in range(len(rows))]
        for i in range(len(rows))
    ]
    scale, int_gram = exact.scale_to_int(gram)
    lifts = []
    for r in rows:
        u = exact.solve_integral(proj, list(r))
        assert u is not None
        lifts.append([int(x) for x in u])
    return rows, tuple(tuple(row) for row in int_gram), scale, lifts


def schmidt_compose(triple: SchmidtTriple) -> quadform.Subspace:
    """The unique subspace with the given hyperplane decomposition."""
    lbar = triple.lbar
    _require_sum_of_squares(lbar.form)
    n = lbar.n
    rows, int_gram, scale, lifts = _projection_data(lbar)
    # coordinates of v in the projected lattice; must be integral
    coords = exact.lattice_coordinates(rows, [list(triple.v)])
    if coords is None:
        raise ValueError("v is not in the projected lattice")
    c = coords[0]
    content = 0
    for x in c:
        content = math.gcd(content, x)
    if math.gcd(triple.h, content) != 1:
        raise ValueError("triple violates coprimality")
    u = [sum(c[t] * lifts[t][j] for t in range(len(lifts))) for j in range(n)]
    big = quadform.QuadraticForm.sum_of_squares(n + 1)
    new_rows = [list(r) + [0] for r in lbar.basis]
    new_rows.append(u + [triple.h])
    return quadform.Subspace.from_rows(big, new_rows)


@lru_cache(maxsize=None)
def _lbar_cache(n: int, basis: Tuple[Tuple[int, ...], ...]):
    lbar = quadform.Subspace(quadform.QuadraticForm.sum_of_squares(n), basis)
    return _projection_data(lbar)


@lru_cache(maxsize=None)
def _schmidt_sweep(n: int, k: int, max_disc: int):
    """dict D -> tuple of subspaces, for all D <= max_disc at once.

    The recursion factor m = h^2 + Q(v) is rational in general (the
    projected lattice is not integral), so the sweep runs over every
    discriminant D' <= max_disc of the one-lower data and keeps any
    product D'(h^2 + Q(v)) that lands on an integer <= max_disc.
    """
    q = quadform.QuadraticForm.sum_of_squares(n)
    if k == 0:
        return {1: (quadform.Subspace.from_rows(q, []),)}
    if k > n:
        return {}
    if k == n:
        eye = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        return {1: (quadform.Subspace.from_rows(q, eye),)}
    out: Dict[int, Dict[Tuple, quadform.Subspace]] = {}
    for d, subs in _schmidt_sweep(n - 1, k, max_disc).items():
        for sub in subs:
            emb = quadform.Subspace.from_saturated_rows(
                q, [list(r) + [0] for r in sub.basis]
            )
            out.setdefault(d, {})[emb.basis] = emb
    lbar_table = _schmidt_sweep(n - 1, k - 1, max_disc)
    for dprime, lbars in lbar_table.items():
        if dprime > max_disc:
            continue
        for lbar in lbars:
            rows, int_gram, scale, lifts = _lbar_cache(n - 1, lbar.basis)
            rank = len(rows)
            # scale * Q(v) <= scale * (max_disc/dprime - 1)
            norm_cap = (scale * (max_disc - dprime)) // dprime
            sols = [(0, tuple(0 for _ in range(rank)))]
            if norm_cap >= 1:
                for w, c in kernel.short_vectors(int_gram, norm_cap):
                    sols.append((w, c))
                    sols.append((w, tuple(-x for x in c)))
            for w, c in sols:
                content = 0
                for x in c:
                    content = math.gcd(content, x)
                u = [
                    sum(c[t] * lifts[t][j] for t in range(len(lifts)))
                    for j in range(n - 1)
                ]
                h = 1
                while dprime * (h * h * scale + w) <= scale * max_disc:
                    num = dprime * (h * h * scale + w)
                    if num % scale == 0 and math.gcd(h, content) == 1:
                        d = num // scale
                        # rows are a basis of L(Z): the last coordinate maps
                        # L(Z) onto hZ with kernel lbar(Z), and coprimality
                        # blocks any index drop
                        new_rows = [list(r) + [0] for r in lbar.basis]
                        new_rows.append(u + [h])
                        sub = quadform.Subspace.from_saturated_rows(q, new_rows)
                        out.setdefault(d, {})[sub.basis] = sub
                    h += 1
    return {
        d: tuple(sorted(m.values(), key=lambda s: s.basis)) for d, m in out.items()
    }


def schmidt_table(n: int, k: int, max_disc: int) -> DiscClassTable:
    """H^{n,k}(D) for every D <= max_disc, via the hyperplane recursion."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if max_disc < 1:
        raise ValueError("max_disc must be >= 1")
    table = _schmidt_sweep(n, k, max_disc)
    return DiscClassTable({d: subs for d, subs in table.items() if d <= max_disc})


def schmidt_enumerate(n: int, k: int, D: int) -> List[quadform.Subspace]:
    """H^{n,k}(D) for the sum of squares, via the hyperplane recursion."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if D < 1:
        raise ValueError("D must be >= 1")
    # memoized sweeps at power-of-two ceilings keep D-loops near-linear
    ceil = 1 << (D - 1).bit_length() if D > 1 else 1
    return list(_schmidt_sweep(n, k, ceil).get(D, ()))


def nonempty_criterion(n: int, k: int, D: int) -> Verdict:
    """Closed-form emptiness verdict for H^{n,k}(D) over the sum of
    squares, after the duality swap k -> n-k."""
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    if D < 1:
        raise ValueError("D must be >= 1")
    if n >= 5:
        return Verdict.ALWAYS_NONEMPTY
    k = min(k, n - k)
    if (n, k) == (3, 1):
        return Verdict.EMPTY if D % 8 in (0, 4, 7) else Verdict.NONEMPTY
    if (n, k) == (4, 1):
        return Verdict.EMPTY if D % 8 == 0 else Verdict.NONEMPTY
    if (n, k) == (4, 2):
        return Verdict.EMPTY if D % 16 in (0, 7, 12, 15) else Verdict.NONEMPTY
    return Verdict.NO_CLOSED_FORM


def count_small_primitive_shapes(
    q: quadform.QuadraticForm, k: int, D: int, M: int
) -> int:
    """Number of L in H^{n,k}_q(D) whose primitive restricted form, on
    either side, has discriminant at most M."""
    if M < 1:
        return 0
    eye = tuple(tuple(1 if i == j else 0 for j in range(q.n)) for i in range(q.n))
    if q.gram == eye:
        # both restrictions are integral with disc = D (the ambient lattice
        # is unimodular), so only the Gram contents are needed
        count = 0
        for sub in schmidt_enumerate(q.n, k, D):
            rows = [list(r) for r in sub.basis]
            comp = exact.kernel_basis(rows)
            for mat, dim in ((rows, k), (comp, q.n - k)):
                g = 0
                for i in range(dim):
                    for j in range(i, dim):
                        g = math.gcd(g, sum(a * b for a, b in zip(mat[i], mat[j])))
                if D <= M * g**dim:
                    count += 1
                    break
        return count
    count = 0
    for sub in enumerate_subspaces(q, k, D):
        q_l, q_perp, _ = quadform.restricted_forms(q, sub)
        _, prim_l = quadform.content_and_primitive(q_l)
        _, prim_p = quadform.content_and_primitive(q_perp)
        if prim_l.disc() <= M or prim_p.disc() <= M:
            count += 1
    return count
