"""Tension fields of maps between chart manifolds, and their weighted
second-order relatives.

For a map phi: (M, g) -> (N, h) and a positive weight f on M the module
computes, at a point:

* tension            tau(phi)      = Tr_g nabla d phi
* f-tension          tau_f(phi)    = f tau(phi) + d phi(grad f)
* bi-tension         tau_2(phi)    = -Tr (nabla^phi)^2 tau - Tr R^N(tau, dphi) dphi
* bi-f-tension       tau_{f,2}     = -f Tr (nabla^phi)^2 tau_f
                                     - nabla^phi_{grad f} tau_f
                                     - f Tr R^N(tau_f, dphi) dphi
* f-bi-tension       tau_{2,f}     = -Tr (nabla^phi)^2 (f tau)
                                     - f Tr R^N(tau, dphi) dphi

The last one is also assembled along an independent second route,
f tau_2 - (Delta f) tau - 2 nabla^phi_{grad f} tau, and the agreement of the
two routes is one of the package's primary machine checks.

Sections along phi are plain callables q -> components at phi(q); everything
here accepts dual-seeded points so that higher operators can differentiate
lower ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import duals, geometry_core as geo
from .geometry_core import ChartManifold


@dataclass(frozen=True)
class SmoothMap:
    domain: ChartManifold
    codomain: ChartManifold
    expr: Callable[[tuple], tuple]
    name: str = ""

    def __call__(self, p):
        return tuple(self.expr(tuple(p)))


@dataclass(frozen=True)
class PullbackSection:
    """Vector field along a map: expr(q) gives components at phi(q)."""
    base_map: SmoothMap
    expr: Callable[[tuple], tuple]
    name: str = ""

    def __call__(self, q):
        return tuple(self.expr(tuple(q)))


@dataclass(frozen=True)
class WeightField:
    fn: Callable[[tuple], object]
    name: str = ""

    def __call__(self, p):
        return self.fn(p)


def as_weight(f):
    if isinstance(f, WeightField):
        return f
    return WeightField(f)


def as_section(phi, S):
    if isinstance(S, PullbackSection):
        return S
    return PullbackSection(phi, S)


def identity_map(M: ChartManifold) -> SmoothMap:
    return SmoothMap(M, M, lambda p: tuple(p), f"id on {M.name}")


# ---------------------------------------------------------------------------
# first-order data

def differential(phi: SmoothMap, p):
    """Rows d phi[i] = d phi(e-coordinate i) as component tuples at phi(p)."""
    n = phi.domain.dim
    return [duals.directional(phi.expr, p, duals.unit(n, i)) for i in range(n)]


def push(phi: SmoothMap, p, X):
    """d phi(X) for a component tuple X."""
    cols = differential(phi, p)
    out = [0.0] * phi.codomain.dim
    for i in range(phi.domain.dim):
        for a in range(phi.codomain.dim):
            out[a] = out[a] + cols[i][a] * X[i]
    return tuple(out)


def pullback_metric(phi: SmoothMap, p):
    """(phi^* h)_{ij} = h(d phi e_i, d phi e_j)."""
    n = phi.domain.dim
    h = geo.metric_at(phi.codomain, phi(p))
    d = differential(phi, p)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            v = duals.dot(duals.mat_vec(h, d[i]), d[j])
            out[i][j] = v
            out[j][i] = v
    return out


def energy_density(phi: SmoothMap, p):
    """e(phi) = (1/2) |d phi|^2 = (1/2) g^{ij} (phi^* h)_{ij}."""
    n = phi.domain.dim
    ginv = geo.inverse_metric_at(phi.domain, p)
    ph = pullback_metric(phi, p)
    s = 0.0
    for i in range(n):
        for j in range(n):
            s = s + ginv[i][j] * ph[i][j]
    return 0.5 * s


# ---------------------------------------------------------------------------
# second fundamental form and tension

def _jet2(phi, q):
    """phi(q), first partials dphi[i], and second partials ddphi[i][j]."""
    n = phi.domain.dim
    val = phi(q)
    d = [duals.directional(phi.expr, q, duals.unit(n, i)) for i in range(n)]
    dd = [[None] * n for _ in range(n)]
    for j in range(n):
        def first(r, j=j):
            return duals.directional(phi.expr, r, duals.unit(n, j))
        for i in range(j + 1):
            dd_ij = duals.directional(first, q, duals.unit(n, i))
            dd[i][j] = dd_ij
            dd[j][i] = dd_ij
    return val, d, dd


def second_fundamental_form(phi: SmoothMap, p, X, Y):
    """nabla d phi (X, Y): symmetric, with values at phi(p)."""
    n, m = phi.domain.dim, phi.codomain.dim
    val, d, dd = _jet2(phi, p)
    gammaM = geo.christoffel(phi.domain, p)
    gammaN = geo.christoffel(phi.codomain, val)
    out = []
    for a in range(m):
        s = 0.0
        for i in range(n):
            for j in range(n):
                term = dd[i][j][a]
                for b in range(m):
                    for c in range(m):
                        term = term + gammaN[a][b][c] * d[i][b] * d[j][c]
                for k in range(n):
                    term = term - gammaM[k][i][j] * d[k][a]
                s = s + term * X[i] * Y[j]
        out.append(s)
    return tuple(out)


def tension(phi: SmoothMap, p):
    """tau(phi) = g^{ij} nabla d phi (d_i, d_j), components at phi(p)."""
    n, m = phi.domain.dim, phi.codomain.dim
    ginv = geo.inverse_metric_at(phi.domain, p)
    val, d, dd = _jet2(phi, p)
    gammaM = geo.christoffel(phi.domain, p)
    gammaN = geo.christoffel(phi.codomain, val)
    out = []
    for a in range(m):
        s = 0.0
        for i in range(n):
            for j in range(n):
                term = dd[i][j][a]
                for b in range(m):
                    for c in range(m):
                        term = term + gammaN[a][b][c] * d[i][b] * d[j][c]
                for k in range(n):
                    term = term - gammaM[k][i][j] * d[k][a]
                s = s + ginv[i][j] * term
        out.append(s)
    return tuple(out)


def tension_section(phi: SmoothMap) -> PullbackSection:
    return PullbackSection(phi, lambda q: tension(phi, q), "tau")


def f_tension(phi: SmoothMap, f, p):
    """tau_f(phi) = f tau(phi) + d phi(grad f)."""
    f = as_weight(f)
    t = tension(phi, p)
    gf = geo.grad_scalar(phi.domain, f.fn, p)
    dgf = push(phi, p, gf)
    fp = f(p)
    return tuple(fp * a + b for a, b in zip(t, dgf))


def f_tension_section(phi: SmoothMap, f) -> PullbackSection:
    f = as_weight(f)
    return PullbackSection(phi, lambda q: f_tension(phi, f, q), "tau_f")


# ---------------------------------------------------------------------------
# pull-back connection and second-order operators

def _coord_pullback_derivative(phi, S, q, j):
    """(nabla^phi_{d_j} S)(q): coordinate-direction pullback derivative."""
    n, m = phi.domain.dim, phi.codomain.dim
    Sq = S(q)
    dS = duals.directional(S, q, duals.unit(n, j))
    gammaN = geo.christoffel(phi.codomain, phi(q))
    dphi_j = duals.directional(phi.expr, q, duals.unit(n, j))
    out = []
    for a in range(m):
        s = dS[a]
        for b in range(m):
            for c in range(m):
                s = s + gammaN[a][b][c] * dphi_j[b] * Sq[c]
        out.append(s)
    return tuple(out)


def pullback_connection(phi: SmoothMap, S, X, p):
    """nabla^phi_X S at p, linear in the component tuple X."""
    S = as_section(phi, S)
    n = phi.domain.dim
    out = [0.0] * phi.codomain.dim
    for j in range(n):
        xj = X[j]
        if isinstance(xj, float) and xj == 0.0:
            continue
        Tj = _coord_pullback_derivative(phi, S, p, j)
        for a in range(phi.codomain.dim):
            out[a] = out[a] + xj * Tj[a]
    return tuple(out)


def rough_laplacian(phi: SmoothMap, S, p):
    """Tr_g (nabla^phi)^2 S, computed in coordinates (frame independent)."""
    S = as_section(phi, S)
    n, m = phi.domain.dim, phi.codomain.dim
    ginv = geo.inverse_metric_at(phi.domain, p)
    gammaM = geo.christoffel(phi.domain, p)
    T = [lambda q, j=j: _coord_pullback_derivative(phi, S, q, j) for j in range(n)]
    Tp = [T[j](p) for j in range(n)]
    out = [0.0] * m
    for i in range(n):
        for j in range(n):
            w = ginv[i][j]
            if isinstance(w, float) and w == 0.0:
                continue
            second = _coord_pullback_derivative(phi, as_section(phi, T[j]), p, i)
            for a in range(m):
                corr = second[a]
                for k in range(n):
                    corr = corr - gammaM[k][i][j] * Tp[k][a]
                out[a] = out[a] + w * corr
    return tuple(out)


def curvature_trace(phi: SmoothMap, S_values, p):
    """Tr_g R^N(S, d phi) d phi for components S_values at phi(p)."""
    n, m = phi.domain.dim, phi.codomain.dim
    ginv = geo.inverse_metric_at(phi.domain, p)
    d = differential(phi, p)
    R = geo.riemann(phi.codomain, phi(p))
    # B^{bc} = g^{ij} dphi_i^b dphi_j^c
    B = [[0.0] * m for _ in range(m)]
    for i in range(n):
        for j in range(n):
            w = ginv[i][j]
            for b in range(m):
                for c in range(m):
                    B[b][c] = B[b][c] + w * d[i][b] * d[j][c]
    out = []
    for l in range(m):
        s = 0.0
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    s = s + R[l][a][b][c] * S_values[a] * B[b][c]
        out.append(s)
    return tuple(out)


def jacobi_operator(phi: SmoothMap, S, p):
    """J^phi(S) = Tr (nabla^phi)^2 S + Tr R^N(S, d phi) d phi."""
    S = as_section(phi, S)
    rough = rough_laplacian(phi, S, p)
    curv = curvature_trace(phi, S(p), p)
    return tuple(a + b for a, b in zip(rough, curv))


def bi_tension(phi: SmoothMap, p):
    """tau_2(phi) = -J^phi(tau)."""
    tau = tension_section(phi)
    out = jacobi_operator(phi, tau, p)
    return tuple(-a for a in out)


def bi_f_tension(phi: SmoothMap, f, p):
    """tau_{f,2}(phi): Euler-Lagrange field of (1/2) int |tau_f|^2."""
    f = as_weight(f)
    tf = f_tension_section(phi, f)
    fp = f(p)
    rough = rough_laplacian(phi, tf, p)
    gf = geo.grad_scalar(phi.domain, f.fn, p)
    along = pullback_connection(phi, tf, gf, p)
    curv = curvature_trace(phi, tf(p), p)
    return tuple(-fp * r - al - fp * c for r, al, c in zip(rough, along, curv))


def f_bi_tension_direct(phi: SmoothMap, f, p):
    """tau_{2,f}(phi) = -Tr (nabla^phi)^2 (f tau) - f Tr R^N(tau, dphi) dphi."""
    f = as_weight(f)
    tau = tension_section(phi)
    ftau = PullbackSection(phi, lambda q: tuple(f(q) * c for c in tau(q)), "f tau")
    rough = rough_laplacian(phi, ftau, p)
    curv = curvature_trace(phi, tau(p), p)
    fp = f(p)
    return tuple(-r - fp * c for r, c in zip(rough, curv))


def f_bi_tension_via_relation(phi: SmoothMap, f, p):
    """tau_{2,f} along the second route:
    f tau_2 - (Delta f) tau - 2 nabla^phi_{grad f} tau."""
    f = as_weight(f)
    tau = tension_section(phi)
    t2 = bi_tension(phi, p)
    lap_f = geo.laplacian_scalar(phi.domain, f.fn, p)
    gf = geo.grad_scalar(phi.domain, f.fn, p)
    along = pullback_connection(phi, tau, gf, p)
    fp = f(p)
    taup = tau(p)
    return tuple(fp * a - lap_f * b - 2.0 * c
                 for a, b, c in zip(t2, taup, along))
