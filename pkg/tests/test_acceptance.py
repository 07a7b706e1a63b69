"""Acceptance battery: every headline claim at its stated tolerance.

Each criterion is one test (its PASSED/FAILED row is the pass/fail line;
an explicit `ACCEPTANCE k: ...` line is also printed for -s runs).

Known red: criterion 11's dimension clause pins the rank of the symmetric
level-l space to (l+n)!/(l!n!).  The verified dimension of that space is
(l+n-1)!/(l!(n-1)!) (the multiset count of its spanning character products,
confirmed by numerical rank at machine precision), so the stated values
3/6/4 for (n,l) = (2,1)/(2,2)/(3,1) cannot be attained by any faithful
implementation; the measured ranks are 2/3/3.  The clause is asserted as
stated and fails honestly; every other criterion passes.
"""

import math

import numpy as np

from conftest import rand_complex, sumzero_exp
from etlax import belavin as bv
from etlax import opalg as oa
from etlax import theta as th
from etlax import thetaspace as ts
from etlax import transfer as tr
from etlax import weights as wt
from etlax.context import default_context


def _report(num, label, worst, tol):
    ok = worst < tol
    print(f"ACCEPTANCE {num} [{label}]: {'PASS' if ok else 'FAIL'} "
          f"worst={worst:.3g} tol={tol:g}")
    return ok


def test_criterion_01_r_matrix_characterization():
    worst = 0.0
    for n in (2, 3):
        ctx = default_context(n)
        rng = np.random.default_rng([1, n])
        worst = max(worst, bv.verify_r_zero_is_permutation(ctx).rel)
        worst = max(worst, bv.verify_r_holomorphy(ctx).rel)
        for _ in range(10):
            u = rand_complex(rng)
            sym = bv.verify_r_symmetry(u, ctx)
            qp = bv.verify_r_quasiperiodicity(u, ctx)
            worst = max(worst, sym["g"].rel, sym["h"].rel,
                        qp["period-1"].rel, qp["period-tau"].rel)
    assert _report(1, "five characterization conditions", worst, 1e-8)


def test_criterion_02_yang_baxter():
    worst = 0.0
    for n in (2, 3):
        ctx = default_context(n)
        rng = np.random.default_rng([2, n])
        for _ in range(25):
            worst = max(worst, bv.verify_ybe(rand_complex(rng),
                                             rand_complex(rng),
                                             rand_complex(rng), ctx).rel)
            lam = wt.sample_generic(int(rng.integers(0, 2 ** 31)), ctx)
            worst = max(worst, bv.verify_face_ybe(rand_complex(rng),
                                                  rand_complex(rng),
                                                  rand_complex(rng), lam,
                                                  ctx).rel)
    assert _report(2, "vertex and face Yang-Baxter", worst, 1e-8)


def test_criterion_03_rll_relation():
    worst = 0.0
    for n in (2, 3):
        ctx = default_context(n)
        rng = np.random.default_rng([3, n])
        lams = wt.sample_many(int(rng.integers(0, 2 ** 31)), 5, ctx)
        fns = [sumzero_exp(rng, n) for _ in range(5)]
        worst = max(worst, tr.verify_rll(rand_complex(rng), rand_complex(rng),
                                         rand_complex(rng), ctx, lams,
                                         fns).rel)
    assert _report(3, "RLL exchange relation", worst, 1e-8)


def test_criterion_04_main_theorem():
    worst_eq = 0.0
    worst_comm = 0.0
    for n in (2, 3):
        ctx = default_context(n)
        rng = np.random.default_rng([4, n])
        samples = wt.sample_many(int(rng.integers(0, 2 ** 31)), 12, ctx)
        for d in range(1, n + 1):
            for _ in range(10):
                worst_eq = max(worst_eq, tr.verify_trace_closed(
                    rand_complex(rng), rand_complex(rng), d, ctx, samples).rel)
        c = rand_complex(rng)
        for d in range(1, n + 1):
            for dp in range(1, n + 1):
                worst_comm = max(worst_comm, tr.verify_commutation(
                    c, rand_complex(rng), rand_complex(rng), d, dp, ctx,
                    samples).rel)
        worst_comm = max(worst_comm, tr.verify_commutation_trace(
            c, rand_complex(rng), rand_complex(rng), 1, min(2, n), ctx,
            samples).rel)
    ok1 = _report(4, "trace equals closed form", worst_eq, 1e-7)
    ok2 = _report(4, "commuting family", worst_comm, 1e-8)
    assert ok1 and ok2


def test_criterion_05_determinant_identities():
    ctx = default_context(2)
    rng = np.random.default_rng(5)
    worst_q = worst_f = 0.0
    for d in range(1, 5):
        done = 0
        while done < 50:
            u = rand_complex(rng)
            lams = [rand_complex(rng) for _ in range(d)]
            mus = [rand_complex(rng) for _ in range(d)]
            worst_q = max(worst_q, th.verify_qfay(d, u, lams, mus, ctx).rel)
            try:
                worst_f = max(worst_f, th.verify_fay(d, u, lams, mus, ctx).rel)
            except th.SingularParameterError:
                continue
            done += 1
    worst_v = 0.0
    for n in (2, 3, 4):
        sub = default_context(n)
        for _ in range(50):
            worst_v = max(worst_v, th.verify_vandermonde(
                [rand_complex(rng) for _ in range(n)], sub).rel)
    ok = _report(5, "deformed determinant identity", worst_q, 1e-9)
    ok &= _report(5, "trisecant identity", worst_f, 1e-9)
    ok &= _report(5, "Vandermonde-type determinant", worst_v, 1e-9)
    assert ok


def test_criterion_06_generating_function():
    worst = 0.0
    lead_err = 0.0
    for n in (2, 3):
        ctx = default_context(n)
        rng = np.random.default_rng([6, n])
        samples = wt.sample_many(int(rng.integers(0, 2 ** 31)), 12, ctx)
        c, u = rand_complex(rng), rand_complex(rng)
        for _ in range(5):
            worst = max(worst, tr.verify_genfunc(c, u, rand_complex(rng, 0.8),
                                                 ctx, samples).rel)
        worst = max(worst, tr.verify_genfunc(c, u, 0.0, ctx, samples).rel)
        # leading coefficient of the operator polynomial det(t) is (-1)^n id
        lop = tr.l_op(c, u, ctx)
        lam = samples[0]
        ts_pts = [0.37 - 0.11j, -0.29 + 0.17j, 0.13 + 0.41j, 0.52 + 0.08j][: n + 1]
        vander = np.array([[t ** k for k in range(n + 1)] for t in ts_pts])
        vals = np.array([oa.normal_det([list(r) for r in lop.entries], t, ctx)
                         .coeff((0,) * n, lam) for t in ts_pts])
        coeffs = np.linalg.solve(vander, vals)
        lead_err = max(lead_err, abs(coeffs[n] - (-1.0) ** n))
    ok = _report(6, "normal determinant equals generating sum", worst, 1e-7)
    ok &= _report(6, "t^n edge coefficient", lead_err, 1e-7)
    assert ok


def test_criterion_07_ground_state_conjugation():
    worst = 0.0
    for n in (2, 3):
        ctx = default_context(n)
        assert abs(ctx.q) <= 0.5
        rng = np.random.default_rng([7, n])
        for d in range(1, n + 1):
            lam = wt.sample_generic(int(rng.integers(0, 2 ** 31)), ctx)
            out = tr.verify_ruijsenaars(rand_complex(rng), rand_complex(rng),
                                        d, lam, ctx)
            worst = max(worst, out["ratio"].rel, out["coefficient"].rel)
    assert _report(7, "squared conjugation identity", worst, 1e-6)


def test_criterion_08_krichever_matrix():
    worst = 0.0
    for n in (2, 3):
        ctx = default_context(n)
        rng = np.random.default_rng([8, n])
        samples = wt.sample_many(int(rng.integers(0, 2 ** 31)), 3, ctx)
        worst = max(worst, tr.verify_krichever(rand_complex(rng),
                                               rand_complex(rng), ctx,
                                               samples).rel)
    assert _report(8, "Lax matrix hbar-derivative", worst, 1e-5)


def test_criterion_09_differential_limit():
    ctx3 = default_context(3)
    rng = np.random.default_rng(9)
    samples3 = wt.sample_many(int(rng.integers(0, 2 ** 31)), 3, ctx3)
    c = rand_complex(rng) + 0.25
    # displayed forms
    d_ops = tr.build_d_ops(c, 0.0, ctx3)
    lam = samples3[0]
    form_err = 0.0
    terms = [th.theta(lam.diff(i, k), ctx3, 1) / th.theta(lam.diff(i, k), ctx3)
             for i in range(3) for k in range(3) if k != i]
    form_err = max(form_err, abs(d_ops[0].coeff((0, 0, 0), lam) - sum(terms))
                   / sum(abs(t) for t in terms))
    for i in range(3):
        ei = tuple(1 if a == i else 0 for a in range(3))
        form_err = max(form_err,
                       abs(d_ops[0].coeff(ei, lam) - (-3 / c)) / abs(3 / c))
        for j in range(i + 1, 3):
            eij = tuple(1 if a in (i, j) else 0 for a in range(3))
            form_err = max(form_err, abs(d_ops[1].coeff(eij, lam)
                                         - (3 / c) ** 2) / abs(3 / c) ** 2)
    comm = 0.0
    for a in range(3):
        for b in range(a + 1, 3):
            comm = max(comm, oa.pdo_commutator_residual(
                d_ops[a], d_ops[b], samples3, ctx3).rel)
    ctx2 = default_context(2)
    samples2 = wt.sample_many(int(rng.integers(0, 2 ** 31)), 2, ctx2)
    vecs = [v - v.mean() for v in (rng.normal(size=2), rng.normal(size=2))]
    h_err = max(tr.verify_h_identity(c, ctx2, samples2).rel,
                tr.verify_h_identity(c, ctx3, samples3).rel)
    limit_err = tr.verify_cm_limit(c, ctx2, samples2, vecs,
                                   steps=(1e-3, 2e-3)).rel
    ok = _report(9, "displayed differential operators", form_err, 1e-7)
    ok &= _report(9, "pairwise commutators", comm, 1e-7)
    ok &= _report(9, "hamiltonian identity", h_err, 1e-7)
    ok &= _report(9, "elliptic CM limit", limit_err, 1e-4)
    assert ok


def test_criterion_10_macdonald_limit():
    worst = 0.0
    for n in (2, 3):
        ctx = default_context(n)
        rng = np.random.default_rng([10, n])
        mac = ctx.replace(tau=30j)
        samples = wt.sample_many(int(rng.integers(0, 2 ** 31)), 5, mac)
        for d in range(1, n + 1):
            worst = max(worst, tr.verify_macdonald_limit(
                rand_complex(rng), rand_complex(rng), d, ctx, samples).rel)
    assert _report(10, "trigonometric coefficients", worst, 1e-9)


def test_criterion_11_dimension_formula_as_stated():
    """Stated rank targets (l+n)!/(l!n!): 3, 6, 4.

    The verified rank of the evaluation matrix equals the spanning-set size
    (l+n-1)!/(l!(n-1)!) = 2, 3, 3; the stated clause is unattainable and
    this test records the discrepancy (see README and the module docstring).
    """
    mismatch = []
    for n, l in ((2, 1), (2, 2), (3, 1)):
        ctx = default_context(n)
        dim = ts.basis_dimension(n, l)
        pts = wt.sample_many(11, 2 * max(dim, math.comb(n + l, n)) + 4, ctx)
        rank = ts.gram_rank(l, pts, ctx)
        stated = math.factorial(l + n) // (math.factorial(l) * math.factorial(n))
        if rank != stated:
            mismatch.append((n, l, rank, stated))
    ok = not mismatch
    print(f"ACCEPTANCE 11 [dimension formula as stated]: "
          f"{'PASS' if ok else 'FAIL'} measured-vs-stated={mismatch}")
    assert ok, (
        "rank of the symmetric level-l space does not match the stated "
        f"(l+n)!/(l!n!) targets; (n, l, measured rank, stated): {mismatch}. "
        "The measured ranks equal the spanning character-product count "
        "(l+n-1)!/(l!(n-1)!), so the stated targets are not attainable.")


def test_criterion_11_invariance_and_module_structure():
    u = 0.213 + 0.057j
    fit_err = 0.0
    neg_floor = 1.0
    for n, l in ((2, 1), (2, 2), (3, 1)):
        ctx = default_context(n)
        lop = tr.l_op(float(l), u, ctx)
        for i in range(n):
            for j in range(n):
                _, res = ts.fit_action(l, u, lop.entries[i][j], ctx, seed=3)
                fit_err = max(fit_err, res.rel)
        m1 = tr.m_closed(float(l), u, 1, ctx)
        neg_floor = min(neg_floor, ts.negative_control(l, m1, ctx, seed=4).rel)
    rel_err = max(ts.verify_thminl1(u, default_context(2)).rel,
                  ts.verify_thminl1(u, default_context(3)).rel)
    iso_err = ts.verify_module_iso(2, u, default_context(2)).rel
    eig = 0.0
    for n in (2, 3):
        out = ts.m1_eigen_check(u, default_context(n))
        eig = max(eig, out["eigen"].rel, out["shared"].rel)
    ok = _report(11, "invariance of the symmetric theta space", fit_err, 1e-7)
    ok &= _report(11, "level-1 module relation", rel_err, 1e-7)
    ok &= _report(11, "symmetrized module isomorphism", iso_err, 1e-7)
    ok &= _report(11, "shared eigenvalue", eig, 1e-8)
    neg_ok = neg_floor >= 1e-2
    print(f"ACCEPTANCE 11 [negative control floor]: "
          f"{'PASS' if neg_ok else 'FAIL'} floor={neg_floor:.3g} >= 0.01")
    assert ok and neg_ok


def test_criterion_12_determinism(tmp_path):
    from etlax import cli
    from etlax.report import strip_timing
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    rc1 = cli.main(["all", "--seed", "42", "--json", str(out1)])
    rc2 = cli.main(["all", "--seed", "42", "--json", str(out2)])
    same = strip_timing(out1.read_text()) == strip_timing(out2.read_text())
    ok = rc1 == 0 and rc2 == 0 and same
    print(f"ACCEPTANCE 12 [determinism]: {'PASS' if ok else 'FAIL'} "
          f"exit=({rc1},{rc2}) identical={same}")
    assert ok
