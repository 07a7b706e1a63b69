"""Elliptic theta functions with characteristics and their identities.

The whole package is built on the level-(m,l) series

    theta_{m,l}(u, tau) = sum_{mu in m + l Z} exp 2 pi i (mu u + mu^2 tau / (2l)),

truncated to |mu - m| <= l * trunc with a tracked tail estimate.  Three named
specializations appear throughout:

    theta(u)        = theta_{1/2,1}(u + 1/2, tau)        (odd Jacobi theta)
    theta_char_j(u) = theta_{1/2-j/n,1}(u + 1/2, n tau)  (R-matrix characters)
    theta_level_j(u)= theta_{n/2-j,n}(u + 1/2, tau)      (intertwiner entries)

Derivatives are always taken term-wise on the series; finite differences are
used only as independent cross-checks in the test suites.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .context import ContextError, ModularContext, SingularParameterError

TWO_PI_I = 2j * math.pi
_EPS = 1e-300


@dataclass(frozen=True)
class ThetaValue:
    """A truncated series value together with its tail estimate."""

    value: complex
    tail_bound: float

    def __complex__(self) -> complex:
        return self.value


@dataclass(frozen=True)
class Residual:
    """Relative and absolute residual of an identity check."""

    rel: float
    abs: float

    def __float__(self) -> float:
        return self.rel


def residual_pair(lhs: complex, rhs: complex) -> Residual:
    """|lhs-rhs| in absolute and in relative (scale |lhs|+|rhs|) form."""
    d = abs(lhs - rhs)
    return Residual(rel=d / (abs(lhs) + abs(rhs) + _EPS), abs=d)


def _term_magnitude(mu: float, u: complex, tau2l: complex, order: int) -> float:
    ex = -2.0 * math.pi * (mu * u + mu * mu * tau2l).imag
    if ex > 700.0:
        return math.inf
    return math.exp(ex) * (2.0 * math.pi * abs(mu)) ** order if order else math.exp(ex)


def theta_ml(m: float, l: int, u: complex, tau: complex, *,
             trunc: int = 24, deriv_order: int = 0) -> ThetaValue:
    """Truncated theta series with characteristic m at level l.

    Sums mu = m + l*k over k in [-trunc, trunc]; deriv_order differentiates
    each term in u.  Raises ContextError off the upper half-plane.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise ContextError(f"Im tau must be positive, got {tau}")
    k = np.arange(-trunc, trunc + 1, dtype=float)
    mu = m + l * k
    tau2l = tau / (2.0 * l)
    terms = np.exp(TWO_PI_I * (mu * u + mu * mu * tau2l))
    if deriv_order:
        terms = terms * (TWO_PI_I * mu) ** deriv_order
    value = complex(terms.sum())
    tail = 0.0
    for sgn in (1, -1):
        mu1 = m + sgn * l * (trunc + 1)
        mu2 = m + sgn * l * (trunc + 2)
        t1 = _term_magnitude(mu1, u, tau2l, deriv_order)
        t2 = _term_magnitude(mu2, u, tau2l, deriv_order)
        ratio = min(t2 / t1 if t1 > 0 else 0.0, 0.95)
        tail += t1 / (1.0 - ratio)
    return ThetaValue(value, tail)


def jacobi_theta(u: complex, ctx: ModularContext, deriv_order: int = 0) -> ThetaValue:
    """The odd Jacobi theta theta(u) = theta_{1/2,1}(u + 1/2) and u-derivatives."""
    if deriv_order < 0 or deriv_order > 8:
        raise ContextError(f"deriv_order must be in 0..8, got {deriv_order}")
    return ctx.cached(
        ("jt", u, deriv_order),
        lambda: theta_ml(0.5, 1, u + 0.5, ctx.tau, trunc=ctx.trunc,
                         deriv_order=deriv_order))


def theta(u: complex, ctx: ModularContext, deriv_order: int = 0) -> complex:
    """Value shortcut for jacobi_theta."""
    return jacobi_theta(u, ctx, deriv_order).value


def theta_char(j: int, u: complex, ctx: ModularContext,
               deriv_order: int = 0) -> ThetaValue:
    """Level-one character theta theta^(j), characteristic j mod n, modulus n*tau.

    Zeros sit on Z + (j + nZ) tau.
    """
    j = j % ctx.n
    return ctx.cached(
        ("tc", j, u, deriv_order),
        lambda: theta_ml(0.5 - j / ctx.n, 1, u + 0.5, ctx.n * ctx.tau,
                         trunc=ctx.trunc, deriv_order=deriv_order))


def theta_level_n(j: int, u: complex, ctx: ModularContext) -> ThetaValue:
    """Level-n theta theta_j entering the intertwining vectors, j mod n."""
    j = j % ctx.n
    return ctx.cached(
        ("tl", j, u),
        lambda: theta_ml(ctx.n / 2.0 - j, ctx.n, u + 0.5, ctx.tau,
                         trunc=ctx.trunc))


def dedekind_eta(tau: complex, ctx: ModularContext) -> ThetaValue:
    """Dedekind eta p^{1/24} prod (1 - p^m), p = exp(2 pi i tau)."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ContextError(f"Im tau must be positive, got {tau}")
    p = cmath.exp(TWO_PI_I * tau)
    ap = abs(p)
    nterms = max(ctx.trunc, min(6000, int(math.ceil(-46.0 / math.log10(ap)))))
    value = cmath.exp(TWO_PI_I * tau / 24.0)
    for mm in range(1, nterms + 1):
        value *= 1.0 - p ** mm
    tail = abs(value) * ap ** (nterms + 1) / (1.0 - ap) * 2.0
    return ThetaValue(value, tail)


def dedekind_eta_logsum(tau: complex, ctx: ModularContext) -> complex:
    """Independent log-domain route: exp(2 pi i tau/24 + sum log(1 - p^m))."""
    p = cmath.exp(TWO_PI_I * complex(tau))
    nterms = max(ctx.trunc, min(6000, int(math.ceil(-46.0 / math.log10(abs(p))))))
    acc = TWO_PI_I * tau / 24.0
    for mm in range(1, nterms + 1):
        acc += cmath.log(1.0 - p ** mm)
    return cmath.exp(acc)


def jacobi_theta_triple_product(u: complex, ctx: ModularContext) -> complex:
    """Product form i p^{1/8} (z^{1/2} - z^{-1/2}) prod (1-z p^m)(1-p^m/z)(1-p^m).

    Independent oracle for the series evaluation of theta(u);
    z^{1/2} = exp(pi i u), p^{1/8} = exp(pi i tau / 4).
    """
    p = ctx.p
    zh = cmath.exp(1j * math.pi * u)
    z = zh * zh
    nterms = max(ctx.trunc, min(6000, int(math.ceil(-46.0 / math.log10(abs(p))))))
    value = 1j * cmath.exp(1j * math.pi * ctx.tau / 4.0) * (zh - 1.0 / zh)
    for mm in range(1, nterms + 1):
        pm = p ** mm
        value *= (1.0 - z * pm) * (1.0 - pm / z) * (1.0 - pm)
    return value


def eta_tau_log_derivative(ctx: ModularContext) -> complex:
    """d/dtau log eta(tau) = 2 pi i (1/24 - sum m p^m / (1 - p^m))."""
    p = ctx.p
    nterms = max(ctx.trunc, min(6000, int(math.ceil(-46.0 / math.log10(abs(p))))))
    s = sum(mm * p ** mm / (1.0 - p ** mm) for mm in range(1, nterms + 1))
    return TWO_PI_I * (1.0 / 24.0 - s)


def weierstrass_p(u: complex, ctx: ModularContext) -> complex:
    """Weierstrass p-function via -(log theta)''(u) - 2h, h = -2 pi i d_tau log eta.

    The constant follows from sigma(u) = exp(h u^2) theta(u)/theta'(0):
    -(log sigma)'' = -(log theta)'' - 2h.  Pinned against a direct lattice
    summation oracle (a "+h" constant instead leaves a spurious constant
    term 3h in the Laurent expansion at 0).
    """
    from .context import lattice_distance
    if lattice_distance(complex(u), complex(ctx.tau)) <= 10 * ctx.tol_identity:
        raise SingularParameterError(f"u={u} is on the period lattice (pole)")
    t0 = theta(u, ctx)
    t1 = theta(u, ctx, 1)
    t2 = theta(u, ctx, 2)
    h = -TWO_PI_I * eta_tau_log_derivative(ctx)
    return -(t2 * t0 - t1 * t1) / (t0 * t0) - 2.0 * h


def vandermonde_sign(n: int) -> int:
    """Sign relating det[theta_j(u_k)] to theta(sum u) prod theta(u_k - u_j).

    Numerically pinned to (-1)^(n-1) * (-1)^(n(n-1)/2) for n in 2..4 across
    several tau; the closed determinant formulas below always use ratios of
    two such determinants, where this sign cancels.
    """
    return (-1) ** (n - 1) * (-1) ** (n * (n - 1) // 2)


def verify_vandermonde(us, ctx: ModularContext) -> Residual:
    """Determinant identity for the level-n thetas.

    det[theta_j(u_k) / (i eta)]_{j,k=1..n} against
    vandermonde_sign(n) * theta(sum u)/(i eta) * prod_{j<k} theta(u_k-u_j)/(i eta).

    Both sides below tolerance reports as degenerate residual 0.
    """
    n = ctx.n
    if len(us) != n:
        raise ValueError(f"need exactly n={n} points, got {len(us)}")
    ieta = 1j * dedekind_eta(ctx.tau, ctx).value
    mat = np.empty((n, n), dtype=complex)
    for a in range(n):
        for k in range(n):
            mat[a, k] = theta_level_n(a + 1, us[k], ctx).value / ieta
    lhs = complex(np.linalg.det(mat))
    rhs = vandermonde_sign(n) * theta(sum(us), ctx) / ieta
    for j in range(n):
        for k in range(j + 1, n):
            rhs *= theta(us[k] - us[j], ctx) / ieta
    if abs(lhs) < ctx.tol_identity and abs(rhs) < ctx.tol_identity:
        return Residual(0.0, abs(lhs - rhs))
    return residual_pair(lhs, rhs)


def qfay_lhs(d: int, u: complex, lambdas, mus, ctx: ModularContext) -> complex:
    """Determinant side of the hbar-deformed determinant identity."""
    hb = ctx.hbar
    mat = np.empty((d, d), dtype=complex)
    for s in range(1, d + 1):
        for sp in range(1, d + 1):
            prod = 1.0 + 0.0j
            for r in range(1, d + 1):
                arg = mus[r - 1] - lambdas[sp - 1]
                if r < s:
                    arg += hb
                if r == s:
                    arg += u - (s - 1) * hb
                prod *= theta(arg, ctx)
            mat[s - 1, sp - 1] = prod
    return complex(np.linalg.det(mat))


def qfay_rhs(d: int, u: complex, lambdas, mus, ctx: ModularContext) -> complex:
    """Product side of the hbar-deformed determinant identity."""
    hb = ctx.hbar
    value = theta(u + sum(mus[r] - lambdas[r] for r in range(d)), ctx)
    for s in range(1, d):
        value *= theta(u - s * hb, ctx)
    for s in range(d):
        for sp in range(s + 1, d):
            value *= theta(lambdas[sp] - lambdas[s], ctx)
            value *= theta(hb + mus[s] - mus[sp], ctx)
    return value


def verify_qfay(d: int, u: complex, lambdas, mus, ctx: ModularContext) -> Residual:
    """Residual of the deformed determinant identity at the given points."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return residual_pair(qfay_lhs(d, u, lambdas, mus, ctx),
                         qfay_rhs(d, u, lambdas, mus, ctx))


def verify_fay(d: int, u: complex, lambdas, mus, ctx: ModularContext) -> Residual:
    """Residual of the Cauchy-type determinant identity (genus-one trisecant)."""
    tol = ctx.tol_identity
    tu = theta(u, ctx)
    if abs(tu) < tol:
        raise SingularParameterError("theta(u) too close to 0")
    mat = np.empty((d, d), dtype=complex)
    for s in range(d):
        for sp in range(d):
            den = theta(mus[s] - lambdas[sp], ctx)
            if abs(den) < tol:
                raise SingularParameterError("theta(mu_s - lambda_s') too close to 0")
            mat[s, sp] = theta(mus[s] - lambdas[sp] + u, ctx) / (den * tu)
    lhs = complex(np.linalg.det(mat))
    rhs = theta(u + sum(mus[r] - lambdas[r] for r in range(d)), ctx) / tu
    for s in range(d):
        for sp in range(s + 1, d):
            rhs *= theta(mus[s] - mus[sp], ctx) * theta(lambdas[sp] - lambdas[s], ctx)
    for s in range(d):
        for sp in range(d):
            rhs /= theta(mus[s] - lambdas[sp], ctx)
    return residual_pair(lhs, rhs)
