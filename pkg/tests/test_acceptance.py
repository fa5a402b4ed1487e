"""Acceptance gate: ten end-to-end checks, one pass/fail line each.

Each test prints `criterion N: PASS/FAIL - detail` and then asserts, so
a verbose run shows one line per criterion.  Known-red criteria are left
failing on purpose with the measured numbers in the message rather than
loosened thresholds.
"""

import itertools
import math
import random

import pytest

from latshape import experiment as ex
from latshape import padic as pa
from latshape import quadform as qf
from latshape import shapes
from latshape import subspaces as sp
from latshape import verify as vf
from latshape import exact

from test_padic import hensel_oracle

Q3 = qf.QuadraticForm.sum_of_squares(3)
Q4 = qf.QuadraticForm.sum_of_squares(4)
Q5 = qf.QuadraticForm.sum_of_squares(5)
Q6 = qf.QuadraticForm.sum_of_squares(6)

ODD_PRIMES = (3, 5, 7, 11, 13)


def _line(number: int, ok: bool, detail: str):
    verdict = "PASS" if ok else "FAIL"
    message = "criterion %d: %s - %s" % (number, verdict, detail)
    print(message)
    assert ok, message


def test_criterion_01_nonempty_4_2_mod16():
    table = sp.schmidt_table(4, 2, 200)
    mismatches = []
    for d in range(1, 201):
        want_empty = d % 16 in (0, 7, 12, 15)
        got_empty = len(table.get(d)) == 0
        if want_empty != got_empty:
            mismatches.append(d)
        verdict = sp.nonempty_criterion(4, 2, d)
        if verdict == sp.Verdict.EMPTY and not got_empty:
            mismatches.append(d)
        if verdict in (sp.Verdict.NONEMPTY, sp.Verdict.ALWAYS_NONEMPTY) and got_empty:
            mismatches.append(d)
    _line(1, not mismatches, "(4,2) D<=200 vs mod-16 rule, mismatches=%s" % mismatches)


def test_criterion_02_legendre_3_1_mod8():
    table = sp.enumerate_by_disc(Q3, 1, 500)
    mismatches = []
    for d in range(1, 501):
        want_empty = d % 8 in (0, 4, 7)
        got_empty = len(table.get(d)) == 0
        if want_empty != got_empty:
            mismatches.append(d)
        verdict = sp.nonempty_criterion(3, 1, d)
        if verdict == sp.Verdict.EMPTY and not got_empty:
            mismatches.append(d)
        if verdict in (sp.Verdict.NONEMPTY, sp.Verdict.ALWAYS_NONEMPTY) and got_empty:
            mismatches.append(d)
    _line(2, not mismatches, "(3,1) D<=500 vs mod-8 rule, mismatches=%s" % mismatches)


def test_criterion_03_52_always_nonempty():
    table = sp.schmidt_table(5, 2, 100)
    empty = [d for d in range(1, 101) if len(table.get(d)) == 0]
    bad_verdict = [
        d
        for d in range(1, 101)
        if sp.nonempty_criterion(5, 2, d) != sp.Verdict.ALWAYS_NONEMPTY
    ]
    ok = not empty and not bad_verdict
    _line(3, ok, "(5,2) D<=100 all nonempty, empty=%s bad_verdict=%s" % (empty, bad_verdict))


def test_criterion_04_exact_identity_suite():
    # six exact-identity families, each on 500+ random subspaces spread
    # over seven forms with discriminants {1, 1, 1, 1, 2, 6, 18}
    failures = []
    for suite in ("glue", "duality", "indices", "orders", "primitive", "lambda"):
        rep = vf.verify(suite, samples=500, seed=11)
        if not rep["passed"]:
            bad = [c for c in rep["checks"] if c["failures"]]
            failures.append((suite, bad))
    _line(4, not failures, "6 identity suites x 500 subspaces, failures=%s" % failures)


def test_criterion_05_schmidt_cross_validation():
    problems = []
    pairs = (
        (3, 1, 50, Q3),
        (4, 1, 50, Q4),
        (4, 2, 40, Q4),
    )
    for n, k, top, q in pairs:
        recursion_side = sp.schmidt_table(n, k, top)
        vector_side = sp.enumerate_by_disc(q, k, top)
        for d in range(1, top + 1):
            a = {s.basis for s in recursion_side.get(d)}
            b = {s.basis for s in vector_side.get(d)}
            if a != b:
                problems.append(("sets", n, k, d, len(a), len(b)))
    checked = 0
    for n, k, top, _q in pairs:
        table = sp.schmidt_table(n, k, top)
        for d in range(1, top + 1):
            for L in table.get(d):
                if not any(r[-1] for r in L.basis):
                    continue  # lives in the hyperplane, not decomposable
                triple = sp.schmidt_decompose(L)
                if sp.schmidt_compose(triple).basis != L.basis:
                    problems.append(("roundtrip", n, k, L.hnf_key()))
                    continue
                m = triple.h * triple.h + sum(x * x for x in triple.v)
                if qf.disc(L.form, L) != qf.disc(triple.lbar.form, triple.lbar) * m:
                    problems.append(("recursion", n, k, L.hnf_key()))
                checked += 1
    ok = not problems and checked > 1000
    _line(
        5,
        ok,
        "two enumerators agree on (3,1),(4,1)<=50 and (4,2)<=40; "
        "%d decompositions round-trip; problems=%s" % (checked, problems[:5]),
    )


def test_criterion_06_isotropy_oracle_and_reciprocity():
    pool = (1, -1, 2, -2, 3, -3, 5, -5)
    cache = {}
    cases = 0
    mismatches = []
    for rank in (2, 3, 4):
        for ents in itertools.product(pool, repeat=rank):
            for p in (2, 3, 5, 7):
                cases += 1
                got = pa.is_isotropic_diagonal(list(ents), p)
                key = (tuple(sorted(ents)), p)
                if key not in cache:
                    cache[key] = hensel_oracle(list(key[0]), p)
                if got != cache[key]:
                    mismatches.append((ents, p))
    rng = random.Random(0)
    recip_bad = []
    for _ in range(1000):
        a = rng.randint(-500, 500) or 7
        b = rng.randint(-500, 500) or -11
        prod = pa.hilbert_symbol(a, b, "inf")
        rem = abs(2 * a * b)
        p = 2
        while rem > 1:
            while rem % p:
                p += 1 if p == 2 else 2
            prod *= pa.hilbert_symbol(a, b, p)
            while rem % p == 0:
                rem //= p
        if prod != 1:
            recip_bad.append((a, b))
    ok = not mismatches and not recip_bad and cases == 18688
    _line(
        6,
        ok,
        "%d oracle cases, mismatches=%s; 1000 reciprocity products, bad=%s"
        % (cases, mismatches[:3], recip_bad[:3]),
    )


def test_criterion_07_sufficiency_implies_strong_isotropy():
    # Over a unimodular ambient form both indices i are 1, so
    # disc q_L = disc q_perp = D for the whole discriminant class: the
    # inputs of sufficient_criterion depend on (D, p) alone and one call
    # covers every subspace in the bucket.  The disc equalities are
    # re-verified by exact spot checks, and the conclusion is evaluated
    # through the public API on a spread of subspaces per firing bucket.
    families = (
        (Q4, sp.schmidt_table(4, 2, 200), 200),
        (Q3, sp.enumerate_by_disc(Q3, 1, 500), 500),
        (Q5, sp.schmidt_table(5, 2, 100), 100),
    )
    violations = []
    const_bad = []
    fired = 0
    evaluated = 0
    for q, table, top in families:
        for d in range(1, top + 1):
            subs = table.get(d)
            if not subs:
                continue
            for L in (subs[0], subs[len(subs) // 2]):
                if qf.disc(q, L) != d or qf.disc(q, qf.orth_complement(q, L)) != d:
                    const_bad.append((q.n, L.hnf_key()))
            k = subs[0].k
            for p in ODD_PRIMES:
                if not pa.sufficient_criterion(k, q.n - k, p, d, d):
                    continue
                fired += 1
                step = max(1, len(subs) // 9)
                for L in subs[::step][:9]:
                    evaluated += 1
                    if not pa.stabilizer_strongly_isotropic(q, L, p):
                        violations.append((q.n, k, d, p, L.hnf_key()))
    ok = not violations and not const_bad and fired > 100 and evaluated > 900
    _line(
        7,
        ok,
        "%d firing (D,p) buckets, %d API evaluations, violations=%s, "
        "disc-constancy failures=%s" % (fired, evaluated, violations[:3], const_bad[:3]),
    )


def test_criterion_08_moduli_consistency():
    import numpy as np

    rng = random.Random(2026)
    worst_residual = 0.0
    worst_l = 0.0
    worst_snap = 0.0
    bad = []
    done = 0
    plans = ((Q5, 2, 3, 50), (Q6, 3, 2, 50))
    for q, k, span, quota in plans:
        got = 0
        while got < quota:
            rows = [
                [rng.randint(-span, span) for _ in range(q.n)] for _ in range(k)
            ]
            if exact.rank_int([list(r) for r in rows]) != k:
                continue
            got += 1
            done += 1
            L = qf.Subspace.from_rows(q, rows)
            pt = shapes.moduli_point(q, L)
            res = max(pt.residuals().values())
            worst_residual = max(worst_residual, res)
            gram_l, gram_p = shapes.shapes_from_moduli(q, pt)
            exact_l = np.array(
                [[float(x) for x in row] for row in qf.gram_restriction(q, L).gram]
            )
            err_l = float(np.abs(gram_l / (pt.alpha * pt.lam) ** 2 - exact_l).max())
            worst_l = max(worst_l, err_l)
            perp = qf.orth_complement(q, L)
            exact_p = [
                [int(x) for x in row] for row in qf.gram_restriction(q, perp).gram
            ]
            ratio = np.linalg.det(gram_p) / np.linalg.det(np.array(exact_p, float))
            snapped = gram_p / ratio ** (1.0 / len(exact_p))
            rounded = [[round(v) for v in row] for row in snapped]
            scale = max(1.0, float(np.abs(snapped).max()))
            snap_err = float(np.abs(snapped - np.array(rounded, float)).max()) / scale
            worst_snap = max(worst_snap, snap_err)
            if (
                res >= 1e-9
                or err_l >= 1e-9
                or snap_err >= 1e-9
                or not shapes.forms_equivalent(rounded, exact_p)
            ):
                bad.append((q.n, k, L.hnf_key()))
    ok = not bad and done == 100
    _line(
        8,
        ok,
        "100 subspaces (5,2)/(6,3): worst residual %.2e, worst L-block %.2e, "
        "worst perp snap %.2e (all vs 1e-9), bad=%s" % (worst_residual, worst_l, worst_snap, bad[:3]),
    )


def test_criterion_09_equidistribution_probe():
    discs = (101, 1009, 10009, 100003)
    cfg = ex.ExperimentConfig(form=Q3, k=1, discs=discs, kind="joint", seed=0)
    _, report = ex.run_experiment(cfg)
    z = [sec["sphere_z_ks"] for sec in report["per_disc"]]
    y = [sec["shape_perp_y_ks"] for sec in report["per_disc"]]
    monotone = all(a >= b - 1e-12 for a, b in zip(z, z[1:]))
    sphere_ok = monotone and z[-1] < 0.05
    shape_ok = y[-1] < 0.1
    detail = (
        "sphere z-KS %s monotone=%s final %.4f (<0.05: %s); "
        "perp-shape y-KS final %.4f (<0.1: %s; the %d perp shape classes "
        "at D=100003 are still too coarse for this threshold, while the "
        "nearby prime 100019 with 2316 classes reaches 0.037)"
        % (
            ["%.4f" % v for v in z],
            monotone,
            z[-1],
            sphere_ok,
            y[-1],
            shape_ok,
            _perp_shape_class_count(discs[-1]),
        )
    )
    _line(9, sphere_ok and shape_ok, detail)


def _perp_shape_class_count(d: int) -> int:
    classes = set()
    for L in sp.lines_with_disc(Q3, d):
        classes.add(shapes.shape(Q3, qf.orth_complement(Q3, L)))
    return len(classes)


def test_criterion_10_badly_behaved_chart():
    table = sp.schmidt_table(6, 3, 16)
    chart = []
    violations = []
    # D <= M is excluded: there every subspace counts by construction
    for d in range(3, 17):
        size = len(table.get(d))
        assert size >= 20
        count = sp.count_small_primitive_shapes(Q6, 3, d, 2)
        bound = math.sqrt(size) + 1.0
        chart.append("D=%d:%d/%d(b=%.1f)" % (d, count, size, bound))
        if count > bound:
            violations.append((d, count, size))
    detail = (
        "count(disc<=2 primitive side)/|H| for (6,3): %s; violations=%s "
        "(the classes with cubic content, 8=2^3*1 and 16=2^3*2, semi-scaled "
        "copies of disc 1 and 2 lattices, exceed sqrt(|H|)+1 at desk scale)"
        % ("; ".join(chart), violations)
    )
    _line(10, not violations, detail)
