"""Symmetric theta space: characters, rank, invariance, module structure."""

import math

import numpy as np
import pytest

from etlax import thetaspace as ts
from etlax import transfer as tr
from etlax import weights as wt

U0 = 0.213 + 0.057j


def test_chi_root_lattice_periodicity(ctx3, rng):
    lam = wt.sample_generic(1, ctx3)
    alpha = (1, -1, 0)
    for j in range(3):
        base = ts.chi(j, lam, ctx3)
        shifted = ts.chi(j, lam.shifted(alpha, 1.0), ctx3)
        assert abs(shifted - base) / abs(base) < 1e-12


def test_chi_weyl_invariance(ctx3, rng):
    lam = wt.sample_generic(2, ctx3)
    perm = wt.WeightPoint.make([lam.coords[1], lam.coords[2], lam.coords[0]])
    for j in range(3):
        a, b = ts.chi(j, lam, ctx3), ts.chi(j, perm, ctx3)
        assert abs(a - b) / abs(a) < 1e-12


def test_chi_tau_shift_law(ctx3, rng):
    lam = wt.sample_generic(3, ctx3)
    alpha = (0, 1, -1)
    pairing = lam.coords[1] - lam.coords[2]
    factor = np.exp(-2j * np.pi * (pairing + 2.0 * ctx3.tau / 2.0))
    for j in range(3):
        lhs = ts.chi(j, lam.shifted(alpha, ctx3.tau), ctx3)
        rhs = factor * ts.chi(j, lam, ctx3)
        assert abs(lhs - rhs) / abs(rhs) < 1e-9


def test_product_quasi_periodicity(ctx2, ctx3):
    for ctx, levels in ((ctx2, (1, 2)), (ctx3, (1,))):
        for l in levels:
            assert ts.verify_chi_quasiperiodicity(l, ctx, seed=5).rel < 1e-9


def test_basis_dimension_counts():
    assert ts.basis_dimension(2, 1) == 2
    assert ts.basis_dimension(2, 2) == 3
    assert ts.basis_dimension(3, 1) == 3
    assert ts.basis_dimension(3, 2) == 6
    for n, l in ((2, 1), (2, 2), (3, 1), (3, 2)):
        assert ts.basis_dimension(n, l) == math.comb(n + l - 1, l)


def test_gram_rank_matches_basis(ctx2, ctx3):
    for ctx, l in ((ctx2, 1), (ctx2, 2), (ctx3, 1)):
        dim = ts.basis_dimension(ctx.n, l)
        pts = wt.sample_many(6, 2 * dim + 4, ctx)
        assert ts.gram_rank(l, pts, ctx) == dim


def test_gram_rank_needs_enough_points(ctx2):
    pts = wt.sample_many(7, 2, ctx2)
    with pytest.raises(ValueError):
        ts.gram_rank(2, pts, ctx2)


def test_fit_action_invariance(ctx2, ctx3, rng):
    for ctx, l in ((ctx2, 1), (ctx2, 2), (ctx3, 1)):
        lop = tr.l_op(float(l), U0, ctx)
        worst = 0.0
        for i in range(ctx.n):
            for j in range(ctx.n):
                _, res = ts.fit_action(l, U0, lop.entries[i][j], ctx, seed=9)
                worst = max(worst, res.rel)
        assert worst < 1e-7
        m1 = tr.m_closed(float(l), U0, 1, ctx)
        _, res = ts.fit_action(l, U0, m1, ctx, seed=11)
        assert res.rel < 1e-7


def test_negative_control_is_loud(ctx2, ctx3):
    # the control must exceed the invariance residual by >= 5 orders
    for ctx, l in ((ctx2, 1), (ctx2, 2), (ctx3, 1)):
        m1 = tr.m_closed(float(l), U0, 1, ctx)
        res = ts.negative_control(l, m1, ctx, seed=13)
        assert res.rel > 1e-2
        _, fit = ts.fit_action(l, U0, m1, ctx, seed=13)
        assert res.rel / (fit.rel + 1e-300) > 1e5


def test_level1_module_relation(ctx2, ctx3):
    assert ts.verify_thminl1(U0, ctx2).rel < 1e-8
    assert ts.verify_thminl1(U0, ctx3).rel < 1e-8


def test_fit_action_recovers_r_matrix_coefficients(ctx3):
    # the fitted expansion of L(1|u)^i_j acting on the level-1 basis is the
    # R-matrix row theta(hbar)/theta(u) R(u)^{i a}_{j b} in gamma-labels
    from etlax.belavin import build_r
    from etlax.theta import theta
    n = 3
    r4 = build_r(U0, ctx3).entries
    pref = theta(ctx3.hbar, ctx3) / theta(U0, ctx3)
    lop = tr.l_op(1.0, U0, ctx3)
    basis = ts.character_basis(1, ctx3)
    for i in range(n):
        for j in range(n):
            coeffs, res = ts.fit_action(1, U0, lop.entries[i][j], ctx3, seed=21)
            assert res.rel < 1e-8
            for row, js in enumerate(basis.elements):
                a = ts.gamma_index(js[0], n)
                for col, js2 in enumerate(basis.elements):
                    b = ts.gamma_index(js2[0], n)
                    want = pref * r4[i, a, j, b]
                    assert abs(coeffs[row][col] - want) < 1e-8


def test_module_isomorphism(ctx2, ctx3):
    assert ts.verify_module_iso(1, U0, ctx2).rel < 1e-8
    assert ts.verify_module_iso(2, U0, ctx2).rel < 1e-7
    assert ts.verify_module_iso(1, U0, ctx3).rel < 1e-8


def test_symmetrized_ordering(ctx2):
    assert ts.verify_symmetrized_ordering(2, U0, ctx2).rel < 1e-10


def test_m1_eigenfunctions(ctx2, ctx3):
    for ctx in (ctx2, ctx3):
        out = ts.m1_eigen_check(U0, ctx)
        assert out["eigen"].rel < 1e-8
        assert out["shared"].rel < 1e-9


def test_gamma_index_involution():
    for n in (2, 3, 4):
        for j in range(n):
            assert ts.gamma_index(ts.gamma_index(j, n), n) == j
    assert ts.gamma_index(1, 2) == 1    # labels coincide at n = 2
    assert ts.gamma_index(1, 3) == 2
