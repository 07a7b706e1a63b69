"""R-matrix characterization, face weights, intertwiners, fusion."""

import math

import numpy as np
import pytest

from conftest import rand_complex
from etlax.context import ContextError, ModularContext, SingularParameterError
from etlax import belavin as bv
from etlax import weights as wt


def test_r_zero_is_permutation(ctx2, ctx3):
    assert bv.verify_r_zero_is_permutation(ctx2).rel < 1e-12
    assert bv.verify_r_zero_is_permutation(ctx3).rel < 1e-12


def test_eight_vertex_pattern(ctx2, rng):
    ent = bv.build_r(rand_complex(rng), ctx2).entries
    nonzero = [(i, j, a, b) for i in range(2) for j in range(2)
               for a in range(2) for b in range(2)
               if abs(ent[i, j, a, b]) > 1e-12]
    assert len(nonzero) == 8
    for i, j, a, b in nonzero:
        assert (i + j) % 2 == (a + b) % 2


def test_ice_rule(ctx3, rng):
    ent = bv.build_r(rand_complex(rng), ctx3).entries
    for i in range(3):
        for j in range(3):
            for a in range(3):
                for b in range(3):
                    if (i + j) % 3 != (a + b) % 3:
                        assert ent[i, j, a, b] == 0


def test_gh_symmetry(ctx2, ctx3, rng):
    for ctx in (ctx2, ctx3):
        for _ in range(3):
            out = bv.verify_r_symmetry(rand_complex(rng), ctx)
            assert out["g"].rel < 1e-10
            assert out["h"].rel < 1e-10


def test_quasi_periodicity_laws(ctx2, ctx3, rng):
    for ctx in (ctx2, ctx3):
        for _ in range(3):
            out = bv.verify_r_quasiperiodicity(rand_complex(rng), ctx)
            assert out["period-1"].rel < 1e-9
            assert out["period-tau"].rel < 1e-9


def test_quasi_periodicity_composition(ctx3, rng):
    # u -> u+1+tau through either law first agrees with the direct build
    u = rand_complex(rng)
    n = ctx3.n
    rm = bv.build_r(u, ctx3).as_matrix()
    g1 = np.kron(bv.g_matrix(ctx3), np.eye(n))
    h1 = np.kron(bv.h_matrix(ctx3), np.eye(n))
    via_1_then_tau = (-np.exp(2j * np.pi * ((u + 1) + ctx3.hbar / n
                                            + ctx3.tau / 2.0))) ** (-1) \
        * (h1 @ (-np.linalg.inv(g1) @ rm @ g1) @ np.linalg.inv(h1))
    direct = bv.build_r(u + 1 + ctx3.tau, ctx3).as_matrix()
    assert np.max(np.abs(direct - via_1_then_tau)) / np.max(np.abs(direct)) < 1e-9


def test_holomorphy_contour(ctx2, ctx3):
    assert bv.verify_r_holomorphy(ctx2).rel < 1e-10
    assert bv.verify_r_holomorphy(ctx3).rel < 1e-10


def test_resonant_hbar_rejected():
    with pytest.raises(ContextError):
        ModularContext(n=2, tau=0.1 + 0.8j, hbar=1.0 + 0.0j)


def test_ybe(ctx2, ctx3, rng):
    for ctx in (ctx2, ctx3):
        for _ in range(5):
            res = bv.verify_ybe(rand_complex(rng), rand_complex(rng),
                                rand_complex(rng), ctx)
            assert res.rel < 1e-9


def test_ybe_degenerate_equal_points(ctx3, rng):
    u = rand_complex(rng)
    assert bv.verify_ybe(u, u, rand_complex(rng), ctx3).rel < 1e-10


def test_face_weight_values_at_zero(ctx3):
    lam = wt.sample_generic(4, ctx3)
    assert abs(bv.face_weight(lam, 1, 1, "diag", 0.0, ctx3) - 1.0) < 1e-12
    assert abs(bv.face_weight(lam, 0, 2, "cis", 0.0, ctx3) - 1.0) < 1e-12
    assert abs(bv.face_weight(lam, 0, 2, "trans", 0.0, ctx3)) < 1e-12


def test_face_weight_argument_validation(ctx3):
    lam = wt.sample_generic(4, ctx3)
    with pytest.raises(ValueError):
        bv.face_weight(lam, 0, 1, "diag", 0.1, ctx3)
    with pytest.raises(ValueError):
        bv.face_weight(lam, 1, 1, "cis", 0.1, ctx3)
    with pytest.raises(ValueError):
        bv.face_weight(lam, 0, 1, "sideways", 0.1, ctx3)


def test_face_weight_resonant_rejection(ctx3):
    near = wt.WeightPoint.make([1e-12, 0.0, 0.31])
    with pytest.raises(SingularParameterError):
        bv.face_weight(near, 0, 1, "cis", 0.1, ctx3)


def test_face_ybe(ctx2, ctx3, rng):
    for ctx in (ctx2, ctx3):
        for s in range(3):
            lam = wt.sample_generic(30 + s, ctx)
            res = bv.verify_face_ybe(rand_complex(rng), rand_complex(rng),
                                     rand_complex(rng), lam, ctx)
            assert res.rel < 1e-9


def test_intertwiner_duality(ctx2, ctx3, rng):
    for ctx in (ctx2, ctx3):
        for s in range(3):
            lam = wt.sample_generic(50 + s, ctx)
            out = bv.verify_intertwiner_duality(rand_complex(rng), lam, ctx)
            assert out["phibar-phi"].rel < 1e-10
            assert out["phi-phibar"].rel < 1e-10


def test_intertwiner_entries_definition(ctx3, rng):
    from etlax.theta import dedekind_eta, theta_level_n
    u = rand_complex(rng)
    lam = wt.sample_generic(8, ctx3)
    pair = bv.intertwiners(u, lam, ctx3)
    ieta = 1j * dedekind_eta(ctx3.tau, ctx3).value
    for j in range(3):
        for k in range(3):
            want = theta_level_n(j, u / 3 - lam.pair_eps(k), ctx3).value / ieta
            assert abs(pair.phi[j, k] - want) < 1e-13


def test_intertwiner_determinant_closed_form(ctx3, rng):
    from etlax.theta import dedekind_eta, theta, vandermonde_sign
    u = rand_complex(rng)
    lam = wt.sample_generic(8, ctx3)
    pair = bv.intertwiners(u, lam, ctx3)
    n = 3
    ieta = 1j * dedekind_eta(ctx3.tau, ctx3).value
    us = [u / n - lam.pair_eps(k) for k in range(n)]
    want = vandermonde_sign(n) * theta(sum(us), ctx3) / ieta
    for a in range(n):
        for b in range(a + 1, n):
            want *= theta(us[b] - us[a], ctx3) / ieta
    want *= (-1) ** (n - 1)      # rows 0..n-1 vs 1..n ordering
    got = complex(np.linalg.det(pair.phi))
    assert abs(got - want) / abs(want) < 1e-10


def test_intertwiner_condition_rejection(ctx3):
    lam = wt.sample_generic(8, ctx3)
    with pytest.raises(SingularParameterError):
        bv.intertwiners(0.4 + 0.2j, lam, ctx3, cond_limit=1.0)


def test_vertex_face_intertwining(ctx2, ctx3, rng):
    for ctx in (ctx2, ctx3):
        lam = wt.sample_generic(60, ctx)
        res = bv.verify_vertex_face_intertwining(rand_complex(rng),
                                                 rand_complex(rng), lam, ctx)
        assert res.rel < 1e-9


def test_dual_intertwining(ctx2, ctx3, rng):
    for ctx in (ctx2, ctx3):
        lam = wt.sample_generic(61, ctx)
        res = bv.verify_dual_intertwining(rand_complex(rng), rand_complex(rng),
                                          lam, ctx)
        assert res.rel < 1e-9


def test_intertwining_at_equal_points(ctx3):
    lam = wt.sample_generic(62, ctx3)
    res = bv.verify_vertex_face_intertwining(0.21 + 0.08j, 0.21 + 0.08j,
                                             lam, ctx3)
    assert res.rel < 1e-11


def test_antisymmetrizer_image(ctx2, ctx3, rng):
    for ctx in (ctx2, ctx3):
        pi2 = bv.antisymmetrizer(2, ctx, u=rand_complex(rng))
        perm = bv.permutation_matrix(ctx.n)
        sym = (np.eye(ctx.n ** 2) + perm) @ pi2
        assert np.max(np.abs(sym)) / np.max(np.abs(pi2)) < 1e-12


def test_antisymmetrizer_rank(ctx3):
    for k in (2, 3):
        pi = bv.antisymmetrizer(k, ctx3, u=0.13 + 0.21j)
        svals = np.linalg.svd(pi, compute_uv=False)
        assert int(np.sum(svals > 1e-8 * svals[0])) == math.comb(3, k)


def test_antisymmetrizer_u_independence(ctx3, rng):
    for k in (2, 3):
        a = bv.antisymmetrizer(k, ctx3, u=rand_complex(rng))
        b = bv.antisymmetrizer(k, ctx3, u=rand_complex(rng))
        assert np.max(np.abs(a - b)) / np.max(np.abs(a)) < 1e-10


def test_antisymmetrizer_range_validation(ctx3):
    with pytest.raises(ValueError):
        bv.antisymmetrizer(4, ctx3)


def test_fusion_intertwining(ctx3, rng):
    lam = wt.sample_generic(70, ctx3)
    assert bv.verify_fusion_intertwining(2, rand_complex(rng), lam, ctx3).rel \
        < 1e-9
    assert bv.verify_fusion_intertwining(3, rand_complex(rng), lam, ctx3).rel \
        < 1e-8


def test_fused_rcheck_reduces_to_rcheck(ctx3, rng):
    u, v = rand_complex(rng), rand_complex(rng)
    fused = bv.fused_rcheck_matrix(1, 1, u, v, ctx3)
    plain = bv.rcheck_matrix(u - v, ctx3)
    assert np.max(np.abs(fused - plain)) < 1e-12
