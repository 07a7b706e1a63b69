"""Verification suites: named batches of residual checks over random points.

Each suite draws its sample parameters from a seeded generator, runs the
corresponding module checks, and reports per-case relative/absolute
residuals.  Suite tolerances follow the defaults below; the two limit suites
run at looser tolerances reflecting their extrapolation error (documented
per suite function).
"""

from __future__ import annotations

import cmath
import math
import time

import numpy as np

from . import belavin as bv
from . import theta as th
from . import thetaspace as ts
from . import transfer as tr
from .context import ModularContext
from .opalg import (apply_op, commutator_residual, identity_op,
                    pdo_commutator_residual)
from .report import Case, SuiteReport
from .theta import Residual
from .weights import WeightPoint, sample_generic, sample_many


def _case(name: str, res, tol: float) -> Case:
    if isinstance(res, Residual):
        rel, ab = float(res.rel), float(res.abs)
    else:
        rel = ab = float(res)
    return Case(name=name, rel=rel, abs=ab, tol=tol, ok=rel < tol)


def _control_case(name: str, res, floor: float) -> Case:
    """A check that must stay LARGE (negative control); ok iff rel >= floor."""
    rel, ab = float(res.rel), float(res.abs)
    return Case(name=name, rel=rel, abs=ab, tol=floor, ok=rel >= floor,
                control=True)


def _rc(rng, box: float = 0.4) -> complex:
    return complex(rng.uniform(-box, box) + 1j * rng.uniform(-box, box))


def _seed(rng) -> int:
    return int(rng.integers(0, 2 ** 31))


def _sumzero_vec(rng, n: int):
    v = rng.normal(size=n)
    return v - v.mean()


def _exp_fn(vec):
    def fn(lam: WeightPoint) -> complex:
        return cmath.exp(2j * cmath.pi
                         * sum(a * b for a, b in zip(vec, lam.coords)))
    return fn


# ----------------------------------------------------------------- suites

def suite_theta(ctx: ModularContext, rng, tol: float):
    cases = []
    us = [_rc(rng) for _ in range(20)]
    worst1 = worst_tau = worst_odd = Residual(0.0, 0.0)
    fac = lambda u: -cmath.exp(-2j * cmath.pi * (u + ctx.tau / 2.0))
    for u in us:
        r1 = th.residual_pair(th.theta(u + 1, ctx), -th.theta(u, ctx))
        rt = th.residual_pair(th.theta(u + ctx.tau, ctx),
                              fac(u) * th.theta(u, ctx))
        ro = th.residual_pair(th.theta(-u, ctx), -th.theta(u, ctx))
        worst1 = max(worst1, r1, key=lambda r: r.rel)
        worst_tau = max(worst_tau, rt, key=lambda r: r.rel)
        worst_odd = max(worst_odd, ro, key=lambda r: r.rel)
    cases.append(_case("quasi-periodicity-1", worst1, tol))
    cases.append(_case("quasi-periodicity-tau", worst_tau, tol))
    cases.append(_case("oddness", worst_odd, tol))

    worst = Residual(0.0, 0.0)
    for _ in range(10):
        u = _rc(rng)
        worst = max(worst, th.residual_pair(
            th.theta(u, ctx), th.jacobi_theta_triple_product(u, ctx)),
            key=lambda r: r.rel)
    cases.append(_case("triple-product", worst, 1e-12))

    # brute-force reference summation at trunc+10
    worst = Residual(0.0, 0.0)
    tail_ok = True
    for _ in range(6):
        m = float(rng.uniform(-1, 1))
        l = int(rng.integers(1, 4))
        u = _rc(rng)
        got = th.theta_ml(m, l, u, ctx.tau, trunc=ctx.trunc)
        tail_ok = tail_ok and got.tail_bound < ctx.tol_series
        ref = 0.0 + 0.0j
        for k in range(-(ctx.trunc + 10), ctx.trunc + 11):
            mu = m + l * k
            ref += cmath.exp(2j * cmath.pi * (mu * u + mu * mu * ctx.tau / (2 * l)))
        worst = max(worst, th.residual_pair(got.value, ref), key=lambda r: r.rel)
    cases.append(_case("series-vs-reference", worst, 1e-12))
    cases.append(_case("tail-bounds", Residual(0.0 if tail_ok else 1.0, 0.0),
                       tol))

    u = _rc(rng)
    shift_res = th.residual_pair(
        th.theta_ml(0.3 + 1.0, 1, u, ctx.tau, trunc=ctx.trunc).value,
        th.theta_ml(0.3, 1, u, ctx.tau, trunc=ctx.trunc).value)
    cases.append(_case("characteristic-shift", shift_res, 1e-12))

    worst = Residual(0.0, 0.0)
    for j in range(ctx.n):
        z = abs(th.theta_char(j, j * ctx.tau, ctx).value)
        worst = max(worst, Residual(z, z), key=lambda r: r.rel)
        worst = max(worst, th.residual_pair(
            th.theta_char(j + ctx.n, u, ctx).value,
            th.theta_char(j, u, ctx).value), key=lambda r: r.rel)
        worst = max(worst, th.residual_pair(
            th.theta_level_n(j, u, ctx).value,
            th.theta_ml(ctx.n / 2.0 - j, ctx.n, u + 0.5, ctx.tau,
                        trunc=ctx.trunc).value), key=lambda r: r.rel)
    cases.append(_case("character-thetas", worst, tol))

    eta = th.dedekind_eta(ctx.tau, ctx)
    cases.append(_case("eta-log-sum", th.residual_pair(
        eta.value, th.dedekind_eta_logsum(ctx.tau, ctx)), 1e-13))

    worst = Residual(0.0, 0.0)
    for _ in range(10):
        u = _rc(rng)
        d_series = th.theta(u, ctx, 1)
        h = 1e-5
        d_fd = (th.theta(u + h, ctx) - th.theta(u - h, ctx)) / (2 * h)
        err = abs(d_series - d_fd)
        worst = max(worst, Residual(err, err), key=lambda r: r.rel)
    cases.append(_case("derivative-vs-fd", worst, 1e-7))

    u = _rc(rng, 0.3) + 0.05
    wp = th.weierstrass_p
    cases.append(_case("wp-even", th.residual_pair(wp(u, ctx), wp(-u, ctx)), tol))
    cases.append(_case("wp-period", th.residual_pair(wp(u + 1, ctx), wp(u, ctx)),
                       tol))
    u0 = 1e-3 * cmath.exp(0.37j)
    res = abs(u0 * u0 * wp(u0, ctx) - 1.0)
    cases.append(_case("wp-laurent", Residual(res, res), 1e-4))
    return cases


def suite_ybe(ctx: ModularContext, rng, tol: float):
    cases = []
    worst_sym = worst_qp1 = worst_qpt = Residual(0.0, 0.0)
    for _ in range(10):
        u = _rc(rng)
        sym = bv.verify_r_symmetry(u, ctx)
        qp = bv.verify_r_quasiperiodicity(u, ctx)
        worst_sym = max(worst_sym, sym["g"], sym["h"], key=lambda r: r.rel)
        worst_qp1 = max(worst_qp1, qp["period-1"], key=lambda r: r.rel)
        worst_qpt = max(worst_qpt, qp["period-tau"], key=lambda r: r.rel)
    cases.append(_case("gh-symmetry", worst_sym, tol))
    cases.append(_case("period-1", worst_qp1, tol))
    cases.append(_case("period-tau", worst_qpt, tol))
    cases.append(_case("r0-is-permutation", bv.verify_r_zero_is_permutation(ctx),
                       tol))
    cases.append(_case("holomorphy-contour", bv.verify_r_holomorphy(ctx), tol))
    if ctx.n == 2:
        ent = bv.build_r(_rc(rng), ctx).entries
        nz = sum(1 for i in range(2) for j in range(2)
                 for a in range(2) for b in range(2)
                 if abs(ent[i, j, a, b]) > 1e-12)
        cases.append(_case("eight-vertex-pattern",
                           Residual(0.0 if nz == 8 else 1.0, float(nz != 8)),
                           tol))
    worst = Residual(0.0, 0.0)
    for _ in range(25):
        worst = max(worst, bv.verify_ybe(_rc(rng), _rc(rng), _rc(rng), ctx),
                    key=lambda r: r.rel)
    cases.append(_case("vertex-ybe", worst, tol))
    u = _rc(rng)
    cases.append(_case("vertex-ybe-degenerate", bv.verify_ybe(u, u, _rc(rng), ctx),
                       tol))
    return cases


def suite_face_ybe(ctx: ModularContext, rng, tol: float):
    worst = Residual(0.0, 0.0)
    for _ in range(25):
        lam = sample_generic(_seed(rng), ctx)
        worst = max(worst, bv.verify_face_ybe(_rc(rng), _rc(rng), _rc(rng),
                                              lam, ctx), key=lambda r: r.rel)
    cases = [_case("face-ybe", worst, tol)]
    lam = sample_generic(_seed(rng), ctx)
    u0 = _rc(rng)
    w0 = bv.face_weight(lam, 0, 0, "diag", 0.0, ctx)
    cases.append(_case("face-weight-diag-u0",
                       th.residual_pair(w0, 1.0 + 0.0j), tol))
    wt = bv.face_weight(lam, 0, 1, "trans", 0.0, ctx)
    cases.append(_case("face-weight-trans-u0", Residual(abs(wt), abs(wt)), tol))
    wc = bv.face_weight(lam, 0, 1, "cis", 0.0, ctx)
    cases.append(_case("face-weight-cis-u0", th.residual_pair(wc, 1.0 + 0.0j),
                       tol))
    del u0
    return cases


def suite_intertwiner(ctx: ModularContext, rng, tol: float):
    cases = []
    worst_dual = Residual(0.0, 0.0)
    worst_det = Residual(0.0, 0.0)
    for _ in range(10):
        u = _rc(rng)
        lam = sample_generic(_seed(rng), ctx)
        dual = bv.verify_intertwiner_duality(u, lam, ctx)
        worst_dual = max(worst_dual, dual["phibar-phi"], dual["phi-phibar"],
                         key=lambda r: r.rel)
        # det phi against the closed determinant formula
        pair = bv.intertwiners(u, lam, ctx)
        n = ctx.n
        ieta = 1j * th.dedekind_eta(ctx.tau, ctx).value
        got = complex(np.linalg.det(pair.phi))
        us = [u / n - lam.pair_eps(k) for k in range(n)]
        want = th.vandermonde_sign(n) * th.theta(sum(us), ctx) / ieta
        for a in range(n):
            for b in range(a + 1, n):
                want *= th.theta(us[b] - us[a], ctx) / ieta
        # rows 0..n-1 are a cyclic shift of rows 1..n
        want *= (-1) ** (n - 1)
        worst_det = max(worst_det, th.residual_pair(got, want),
                        key=lambda r: r.rel)
    cases.append(_case("duality", worst_dual, 1e-10))
    cases.append(_case("det-closed-form", worst_det, tol))

    worst_ov = worst_iv = Residual(0.0, 0.0)
    for _ in range(4):
        u, v = _rc(rng), _rc(rng)
        lam = sample_generic(_seed(rng), ctx)
        worst_ov = max(worst_ov, bv.verify_vertex_face_intertwining(u, v, lam, ctx),
                       key=lambda r: r.rel)
        worst_iv = max(worst_iv, bv.verify_dual_intertwining(u, v, lam, ctx),
                       key=lambda r: r.rel)
    cases.append(_case("vertex-face-intertwining", worst_ov, tol))
    cases.append(_case("dual-intertwining", worst_iv, tol))

    # fusion operators
    u = _rc(rng)
    for k in range(2, ctx.n + 1):
        pi = bv.antisymmetrizer(k, ctx, u)
        pib = bv.antisymmetrizer(k, ctx, _rc(rng))
        scale = float(np.max(np.abs(pi)))
        dep = float(np.max(np.abs(pi - pib))) / scale
        cases.append(_case(f"fusion-u-independence-k{k}", Residual(dep, dep), tol))
        svals = np.linalg.svd(pi, compute_uv=False)
        rank = int(np.sum(svals > 1e-8 * svals[0]))
        want = math.comb(ctx.n, k)
        cases.append(_case(f"fusion-rank-k{k}",
                           Residual(float(rank != want), float(rank != want)),
                           tol))
        if k == 2:
            perm = bv.permutation_matrix(ctx.n)
            sym = (np.eye(ctx.n ** 2) + perm) @ pi
            rs = float(np.max(np.abs(sym))) / scale
            cases.append(_case("fusion-antisymmetry", Residual(rs, rs), tol))
        lam = sample_generic(_seed(rng), ctx)
        cases.append(_case(f"fusion-intertwining-k{k}",
                           bv.verify_fusion_intertwining(k, u, lam, ctx),
                           1e-9 if k < 3 else 1e-8))
    return cases


def suite_rll(ctx: ModularContext, rng, tol: float):
    cases = []
    c, u, v = _rc(rng), _rc(rng), _rc(rng)
    lams = sample_many(_seed(rng), 5, ctx)
    fns = [_exp_fn(_sumzero_vec(rng, ctx.n)) for _ in range(5)]
    cases.append(_case("rll", tr.verify_rll(c, u, v, ctx, lams, fns), tol))
    cases.append(_case("rll-equal-points", tr.verify_rll(c, u, u, ctx, lams[:2],
                                                         fns[:2]), tol))
    lop0 = tr.l_op(0.0, u, ctx)
    one = lambda lam: 1.0 + 0.0j
    worst = 0.0
    for i in range(ctx.n):
        for j in range(ctx.n):
            val = apply_op(lop0.entries[i][j], one, lams[0], ctx)
            worst = max(worst, abs(val - (1.0 if i == j else 0.0)))
    cases.append(_case("c0-identity", Residual(worst, worst), tol))
    if ctx.n >= 3:
        cases.append(_case("fused-rll-k2",
                           tr.verify_fused_rll(c, u, v, 2, 2, ctx, lams[:2],
                                               fns[:2]), 1e-8))
    return cases


def suite_trace_closed(ctx: ModularContext, rng, tol: float):
    cases = []
    samples = sample_many(_seed(rng), 12, ctx)
    for d in range(1, ctx.n + 1):
        worst = Residual(0.0, 0.0)
        for _ in range(10):
            c, u = _rc(rng), _rc(rng)
            worst = max(worst, tr.verify_trace_closed(c, u, d, ctx, samples),
                        key=lambda r: r.rel)
        cases.append(_case(f"trace-equals-closed-d{d}", worst, tol))
    c, u, v = _rc(rng), _rc(rng), _rc(rng)
    for d in (1, ctx.n):
        cases.append(_case(f"spectral-factorization-d{d}",
                           tr.verify_spectral_factorization(c, u, v, d, ctx,
                                                            samples), tol))
    return cases


def suite_commute(ctx: ModularContext, rng, tol: float):
    cases = []
    samples = sample_many(_seed(rng), 12, ctx)
    c = _rc(rng)
    worst = Residual(0.0, 0.0)
    for d in range(1, ctx.n + 1):
        for dp in range(1, ctx.n + 1):
            u, v = _rc(rng), _rc(rng)
            worst = max(worst, tr.verify_commutation(c, u, v, d, dp, ctx, samples),
                        key=lambda r: r.rel)
    cases.append(_case("closed-form-grid", worst, tol))
    u, v = _rc(rng), _rc(rng)
    cases.append(_case("trace-route-pair",
                       tr.verify_commutation_trace(c, u, v, 1, min(2, ctx.n),
                                                   ctx, samples), tol))
    m1 = tr.m_closed(c, u, 1, ctx)
    cases.append(_case("self-commutator",
                       commutator_residual(m1, m1, samples, ctx), tol))
    full = tr.m_closed(c, u, ctx.n, ctx)
    ident = identity_op(ctx.n)
    pref = th.theta(u + c * ctx.hbar, ctx) / th.theta(u, ctx)
    from .opalg import op_scale, operator_residual
    cases.append(_case("full-set-is-scalar",
                       operator_residual(full, op_scale(ident, pref), samples,
                                         ctx), tol))
    return cases


def suite_qfay(ctx: ModularContext, rng, tol: float):
    cases = []
    for d in range(1, 5):
        worst = Residual(0.0, 0.0)
        for _ in range(50):
            u = _rc(rng)
            lams = [_rc(rng) for _ in range(d)]
            mus = [_rc(rng) for _ in range(d)]
            worst = max(worst, th.verify_qfay(d, u, lams, mus, ctx),
                        key=lambda r: r.rel)
        cases.append(_case(f"qfay-d{d}", worst, tol))
    # hbar -> 0 degeneration towards the Cauchy-type form
    d = 2
    sctx = ctx.replace(hbar=1e-6)
    u = _rc(rng)
    lams = [_rc(rng) for _ in range(d)]
    mus = [_rc(rng) for _ in range(d)]
    lhs = th.qfay_lhs(d, u, lams, mus, sctx)
    fay_scaled = th.theta(u + sum(m - l for m, l in zip(mus, lams)), ctx) \
        * th.theta(u, ctx) ** (d - 1)
    for s in range(d):
        for sp in range(s + 1, d):
            fay_scaled *= th.theta(lams[sp] - lams[s], ctx)
            fay_scaled *= th.theta(mus[s] - mus[sp], ctx)
    cases.append(_case("qfay-hbar0-degeneration",
                       th.residual_pair(lhs, fay_scaled), 1e-4))
    return cases


def suite_fay(ctx: ModularContext, rng, tol: float):
    cases = []
    for d in range(1, 5):
        worst = Residual(0.0, 0.0)
        count = 0
        while count < 50:
            u = _rc(rng)
            lams = [_rc(rng) for _ in range(d)]
            mus = [_rc(rng) for _ in range(d)]
            try:
                res = th.verify_fay(d, u, lams, mus, ctx)
            except th.SingularParameterError:
                continue
            count += 1
            worst = max(worst, res, key=lambda r: r.rel)
        cases.append(_case(f"fay-d{d}", worst, tol))
    return cases


def suite_vandermonde(ctx: ModularContext, rng, tol: float):
    cases = []
    for n in (2, 3, 4):
        sub = ctx.replace(n=n) if n != ctx.n else ctx
        worst = Residual(0.0, 0.0)
        for _ in range(50):
            us = [_rc(rng) for _ in range(n)]
            worst = max(worst, th.verify_vandermonde(us, sub),
                        key=lambda r: r.rel)
        cases.append(_case(f"vandermonde-n{n}", worst, tol))
        # shared zero: sum of arguments an integer
        us = [_rc(rng) for _ in range(n - 1)]
        us.append(1.0 - sum(us))
        res = th.verify_vandermonde(us, sub)
        cases.append(_case(f"vandermonde-degenerate-n{n}", res, tol))
    return cases


def suite_genfunc(ctx: ModularContext, rng, tol: float):
    cases = []
    samples = sample_many(_seed(rng), 12, ctx)
    c, u = _rc(rng), _rc(rng)
    worst = Residual(0.0, 0.0)
    for _ in range(5):
        t = _rc(rng, 0.8)
        worst = max(worst, tr.verify_genfunc(c, u, t, ctx, samples),
                    key=lambda r: r.rel)
    cases.append(_case("det-equals-sum", worst, tol))
    cases.append(_case("t0-det-is-full-trace",
                       tr.verify_genfunc(c, u, 0.0, ctx, samples), tol))
    # the t-derivative of the determinant also matches the generating sum
    from .opalg import normal_det, op_add, op_scale, operator_residual
    lop = tr.l_op(c, u, ctx)
    t1, t2 = _rc(rng, 0.8), _rc(rng, 0.8)
    det1 = normal_det([list(r) for r in lop.entries], t1, ctx)
    det2 = normal_det([list(r) for r in lop.entries], t2, ctx)
    diff_det = op_add(det1, op_scale(det2, -1.0))
    diff_sum = op_add(tr.genfunc_sum(c, u, t1, ctx),
                      op_scale(tr.genfunc_sum(c, u, t2, ctx), -1.0))
    cases.append(_case("t-dependence", operator_residual(diff_det, diff_sum,
                                                         samples, ctx), tol))
    t = _rc(rng, 0.8)
    cases.append(_case("sekiguchi-numerator",
                       tr.verify_sekiguchi(c, u, t, ctx, samples), tol))
    cases.append(_case("lax-det-route",
                       tr.verify_genfunc_ltilde(c, u, t, ctx, samples), tol))
    return cases


def suite_ruijsenaars(ctx: ModularContext, rng, tol: float):
    cases = []
    if abs(ctx.q) >= 1.0:
        raise ValueError("ruijsenaars suite needs Im hbar > 0 (|q| < 1)")
    c, u = _rc(rng), _rc(rng)
    for d in range(1, ctx.n + 1):
        lam = sample_generic(_seed(rng), ctx)
        out = tr.verify_ruijsenaars(c, u, d, lam, ctx)
        cases.append(_case(f"phi-ratio-closed-form-d{d}", out["ratio"], 1e-8))
        cases.append(_case(f"coefficient-identity-d{d}", out["coefficient"],
                           tol))
    lam = sample_generic(_seed(rng), ctx)
    out0 = tr.verify_ruijsenaars(0.0, u, 1, lam, ctx)
    cases.append(_case("c0-trivial", out0["coefficient"], tol))
    return cases


def suite_krichever(ctx: ModularContext, rng, tol: float):
    cases = []
    c, u = _rc(rng), _rc(rng)
    samples = sample_many(_seed(rng), 3, ctx)
    cases.append(_case("lax-derivative-vs-closed-form",
                       tr.verify_krichever(c, u, ctx, samples), tol))
    cases.append(_case("lax-to-identity",
                       tr.verify_ltilde_limit(c, u, ctx, samples[:2]), 0.05))
    cases.append(_case("lax-conjugation-route",
                       tr.verify_ltilde_conjugation(c, u, ctx, samples), 1e-9))
    kmat = tr.krichever_k(0.0, u, ctx)
    worst = 0.0
    lam = samples[0]
    for i in range(ctx.n):
        for j in range(ctx.n):
            for alpha in kmat[i][j].terms:
                val = kmat[i][j].coeff(alpha, lam)
                want = 1.0 if (i == j and sum(alpha) == 1) else 0.0
                worst = max(worst, abs(val - want))
    cases.append(_case("c0-pure-derivative", Residual(worst, worst), tol))
    return cases


def suite_cm_limit(ctx: ModularContext, rng, tol: float):
    """Differential-limit suite; tolerance 1e-4 reflects the two-step
    Richardson extrapolation error in hbar."""
    cases = []
    c = _rc(rng) + 0.25   # keep |c| away from 0 for the 1/c normalizations
    samples = sample_many(_seed(rng), 3, ctx)
    vecs = [_sumzero_vec(rng, ctx.n) for _ in range(2)]
    cases.append(_case("h-identity", tr.verify_h_identity(c, ctx, samples),
                       1e-7))
    steps = (1e-3, 2e-3) if ctx.n == 2 else (5e-4, 1e-3)
    cases.append(_case("elliptic-cm-limit",
                       tr.verify_cm_limit(c, ctx, samples[:2], vecs, steps),
                       tol))
    cases.append(_case("d2-via-second-derivatives",
                       tr.verify_d2_via_mdot(c, ctx, samples[:2], vecs), tol))
    return cases


def suite_macdonald(ctx: ModularContext, rng, tol: float):
    cases = []
    c, u = _rc(rng), _rc(rng)
    mac_ctx = ctx.replace(tau=30j)
    samples = sample_many(_seed(rng), 5, mac_ctx)
    for d in range(1, ctx.n + 1):
        cases.append(_case(f"macdonald-coefficients-d{d}",
                           tr.verify_macdonald_limit(c, u, d, ctx, samples),
                           tol))
    cases.append(_case("c0-trivial",
                       tr.verify_macdonald_limit(0.0, u, 1, ctx, samples), tol))
    return cases


def suite_debiard(ctx: ModularContext, rng, tol: float):
    cases = []
    c, u = _rc(rng) + 0.25, _rc(rng)
    n = ctx.n
    d_ops = tr.build_d_ops(c, u, ctx)
    samples = sample_many(_seed(rng), 3, ctx)
    # displayed forms of the first two operators; sums like sum_i d_i Delta /
    # Delta vanish identically by oddness, so residuals are scaled by the
    # magnitude of the individual terms rather than by the (zero) sum
    lam = samples[0]
    worst = 0.0
    d1 = d_ops[0]
    got = d1.coeff((0,) * n, lam)
    terms = [th.theta(lam.diff(i, k), ctx, 1) / th.theta(lam.diff(i, k), ctx)
             for i in range(n) for k in range(n) if k != i]
    scale = sum(abs(t) for t in terms) + 1e-300
    worst = max(worst, abs(got - sum(terms)) / scale)
    for i in range(n):
        ei = tuple(1 if a == i else 0 for a in range(n))
        worst = max(worst, abs(d1.coeff(ei, lam) - (-n / c)) / abs(n / c))
    cases.append(_case("first-operator-form", Residual(worst, worst), tol))
    if n >= 2:
        d2 = d_ops[1]
        jd = tr.delta_jet(lam, 2, ctx)
        worst = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                eij = tuple(1 if a in (i, j) else 0 for a in range(n))
                got = d2.coeff(eij, lam)
                worst = max(worst, abs(got - (n / c) ** 2) / abs(n / c) ** 2)
                alpha = tuple(1 if a == i else 0 for a in range(n))
                gotl = d2.coeff(alpha, lam)
                # sum over pairs {i, j'} containing i of d_j' Delta/Delta (-n/c)
                lterms = [jd.dshift(jp).value / jd.value * (-n / c)
                          for jp in range(n) if jp != i]
                lscale = sum(abs(t) for t in lterms) + 1e-300
                worst = max(worst, abs(gotl - sum(lterms)) / lscale)
        got0 = d2.coeff((0,) * n, lam)
        zterms = [(jd.dmulti(tuple(1 if a in (i, j) else 0 for a in range(n)))
                   / jd).value
                  for i in range(n) for j in range(i + 1, n)]
        zscale = sum(abs(t) for t in zterms) + 1e-300
        worst = max(worst, abs(got0 - sum(zterms)) / zscale)
        cases.append(_case("second-operator-form", Residual(worst, worst), tol))
    worst = Residual(0.0, 0.0)
    for a in range(n):
        for b in range(a + 1, n):
            worst = max(worst, pdo_commutator_residual(d_ops[a], d_ops[b],
                                                       samples, ctx),
                        key=lambda r: r.rel)
    cases.append(_case("pairwise-commutators", worst, tol))
    return cases


def suite_theta_space(ctx: ModularContext, rng, tol: float):
    cases = []
    n = ctx.n
    levels = (1, 2) if n == 2 else (1,)
    u = _rc(rng)
    for l in levels:
        cases.append(_case(f"quasi-periodicity-l{l}",
                           ts.verify_chi_quasiperiodicity(l, ctx, _seed(rng)),
                           1e-9))
        dim = ts.basis_dimension(n, l)
        pts = sample_many(_seed(rng), 2 * dim + 4, ctx)
        rank = ts.gram_rank(l, pts, ctx)
        bad = float(rank != dim)
        cases.append(_case(f"dimension-rank-l{l}", Residual(bad, bad), tol))
        lop = tr.l_op(float(l), u, ctx)
        worst = Residual(0.0, 0.0)
        for i in range(n):
            for j in range(n):
                _, res = ts.fit_action(l, u, lop.entries[i][j], ctx,
                                       seed=_seed(rng))
                worst = max(worst, res, key=lambda r: r.rel)
        cases.append(_case(f"l-operator-invariance-l{l}", worst, tol))
        m1 = tr.m_closed(float(l), u, 1, ctx)
        _, res = ts.fit_action(l, u, m1, ctx, seed=_seed(rng))
        cases.append(_case(f"m1-invariance-l{l}", res, tol))
        cases.append(_control_case(f"negative-control-l{l}",
                                   ts.negative_control(l, m1, ctx, _seed(rng)),
                                   1e-2))
    cases.append(_case("level1-module-relation", ts.verify_thminl1(u, ctx),
                       tol))
    iso_l = 2 if n == 2 else 1
    cases.append(_case(f"module-isomorphism-l{iso_l}",
                       ts.verify_module_iso(iso_l, u, ctx), tol))
    if n == 2:
        cases.append(_case("symmetrized-ordering",
                           ts.verify_symmetrized_ordering(2, u, ctx), tol))
    return cases


def suite_eigen_l1(ctx: ModularContext, rng, tol: float):
    cases = []
    u = _rc(rng)
    out = ts.m1_eigen_check(u, ctx, seed=_seed(rng))
    cases.append(_case("common-eigenfunction", out["eigen"], tol))
    cases.append(_case("eigenvalue-shared", out["shared"], 1e-9))
    return cases


SUITES = {
    "theta": (suite_theta, 1e-8),
    "ybe": (suite_ybe, 1e-8),
    "face-ybe": (suite_face_ybe, 1e-8),
    "intertwiner": (suite_intertwiner, 1e-8),
    "rll": (suite_rll, 1e-8),
    "trace-closed": (suite_trace_closed, 1e-7),
    "commute": (suite_commute, 1e-8),
    "qfay": (suite_qfay, 1e-9),
    "fay": (suite_fay, 1e-9),
    "vandermonde": (suite_vandermonde, 1e-9),
    "genfunc": (suite_genfunc, 1e-7),
    "ruijsenaars": (suite_ruijsenaars, 1e-6),
    "krichever": (suite_krichever, 1e-5),
    "cm-limit": (suite_cm_limit, 1e-4),
    "macdonald-limit": (suite_macdonald, 1e-9),
    "debiard": (suite_debiard, 1e-7),
    "theta-space": (suite_theta_space, 1e-7),
    "eigen-l1": (suite_eigen_l1, 1e-8),
}

SUITE_ORDER = list(SUITES)


def run_suite(name: str, ctx: ModularContext, seed: int) -> SuiteReport:
    """Execute one named suite against the given context."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITE_ORDER}")
    fn, tol = SUITES[name]
    idx = SUITE_ORDER.index(name)
    rng = np.random.default_rng([seed, idx, ctx.n])
    u, v, t = _rc(rng), _rc(rng), _rc(rng)
    params = {
        "n": ctx.n, "tau": ctx.tau, "hbar": ctx.hbar, "c": ctx.c,
        "u": u, "v": v, "t": t, "trunc": ctx.trunc, "seed": seed,
    }
    rep = SuiteReport(suite=name, params=params, tolerance=tol)
    start = time.perf_counter()
    rep.cases = fn(ctx, rng, tol)
    rep.wall_time_s = time.perf_counter() - start
    return rep.finalize()
