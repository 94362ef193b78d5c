"""Singly warped products M x_lambda N with metric g + lambda(x)^2 h.

Two parallel routes exist for the connection and curvature of the product:

* the flattened route: `as_chart_manifold` produces an ordinary chart whose
  metric is the block matrix, and the generic machinery differentiates it;
* the closed-form route: block formulas in terms of base/fiber geometry and
  the warping function.

The verification harness leans on the closed forms never being trusted
alone: every closed-form routine has the flattened chart as its oracle.

`kind` distinguishes direct products (lambda = mu = 1), base warping
(singly_lambda: metric g + lambda(x)^2 h), fiber warping (singly_mu:
mu(y)^2 g + h) and doubly warped metrics.  Closed forms are provided for
singly_lambda and its direct-product degeneration only; other kinds can
still be flattened and handled generically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import duals, geometry_core as geo
from .geometry_core import ChartManifold

KINDS = ("doubly", "singly_lambda", "singly_mu", "direct")


class WrongKind(Exception):
    """Operation not defined for this warped-product kind."""


@dataclass(frozen=True)
class BlockVector:
    """Tangent vector on a product, split into base and fiber components."""
    x1: tuple
    x2: tuple

    def flat(self):
        return tuple(self.x1) + tuple(self.x2)

    def __add__(self, other):
        return BlockVector(tuple(a + b for a, b in zip(self.x1, other.x1)),
                           tuple(a + b for a, b in zip(self.x2, other.x2)))

    def __sub__(self, other):
        return BlockVector(tuple(a - b for a, b in zip(self.x1, other.x1)),
                           tuple(a - b for a, b in zip(self.x2, other.x2)))

    def scale(self, c):
        return BlockVector(tuple(c * a for a in self.x1),
                           tuple(c * a for a in self.x2))


def block_split(W, flat):
    m = W.base.dim
    return BlockVector(tuple(flat[:m]), tuple(flat[m:]))


@dataclass(frozen=True)
class WarpedProduct:
    base: ChartManifold
    fiber: ChartManifold
    lam: Optional[Callable] = None   # warping function on the base
    mu: Optional[Callable] = None    # warping function on the fiber
    kind: str = "singly_lambda"
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WrongKind(f"unknown warped-product kind {self.kind!r}")
        need_lam = self.kind in ("doubly", "singly_lambda")
        need_mu = self.kind in ("doubly", "singly_mu")
        if need_lam != (self.lam is not None) or need_mu != (self.mu is not None):
            raise WrongKind(f"kind {self.kind!r} disagrees with supplied warp functions")
        for fn, M, label in ((self.lam, self.base, "lambda"),
                             (self.mu, self.fiber, "mu")):
            if fn is None:
                continue
            for p in _probe_points(M):
                if duals.value(fn(p)) <= 0.0:
                    raise ValueError(f"warping function {label} not positive at {p}")

    def lam_at(self, x):
        return self.lam(x) if self.lam is not None else 1.0

    def mu_at(self, y):
        return self.mu(y) if self.mu is not None else 1.0

    def split(self, p):
        m = self.base.dim
        return tuple(p[:m]), tuple(p[m:])


def _probe_points(M, per_axis=3):
    axes = []
    for (lo, hi), per in zip(M.bounds, M.periodic):
        pad = 0.0 if per else 1e-3 * (hi - lo)
        axes.append(np.linspace(lo + pad, hi - pad, per_axis))
    grids = np.meshgrid(*axes, indexing="ij")
    return [tuple(float(g[idx]) for g in grids)
            for idx in np.ndindex(grids[0].shape)]


def warped_metric_at(W: WarpedProduct, p):
    """Block metric [[mu^2 g, 0], [0, lambda^2 h]] at a flat point (x..., y...)."""
    x, y = W.split(p)
    m, n = W.base.dim, W.fiber.dim
    g = geo.metric_at(W.base, x)
    h = geo.metric_at(W.fiber, y)
    lam2 = W.lam_at(x) ** 2
    mu2 = W.mu_at(y) ** 2
    out = [[0.0] * (m + n) for _ in range(m + n)]
    for i in range(m):
        for j in range(m):
            out[i][j] = mu2 * g[i][j]
    for i in range(n):
        for j in range(n):
            out[m + i][m + j] = lam2 * h[i][j]
    return out


def as_chart_manifold(W: WarpedProduct) -> ChartManifold:
    """Flatten the product into a single chart; the generic-engine oracle."""
    name = W.name or f"{W.base.name} x ({W.kind}) {W.fiber.name}"
    return ChartManifold(
        W.base.dim + W.fiber.dim,
        W.base.coords + W.fiber.coords,
        lambda p: warped_metric_at(W, p),
        W.base.bounds + W.fiber.bounds,
        W.base.periodic + W.fiber.periodic,
        name,
    )


def _require_closed_form_kind(W):
    if W.kind not in ("singly_lambda", "direct"):
        raise WrongKind(f"closed forms cover singly_lambda/direct, not {W.kind!r}")


def _lam_sq(W):
    return lambda x: W.lam_at(x) ** 2


def grad_lam_sq(W, x):
    """grad_g lambda^2; identically zero for direct products."""
    if W.lam is None:
        return (0.0,) * W.base.dim
    return geo.grad_scalar(W.base, _lam_sq(W), x)


def closed_form_connection(W: WarpedProduct, X: BlockVector, Y, p):
    """Product-field connection: block formula for nabla_X Y at p.

    Y is a lifted product field given as a pair (Y1, Y2) of callables on the
    base and fiber factors; X holds tangent components at p.  Returns a
    BlockVector.
    """
    _require_closed_form_kind(W)
    Y1, Y2 = Y
    x, y = W.split(p)
    m = W.base.dim

    base_term = geo.covariant_derivative_vf(W.base, X.x1, Y1, x)
    fiber_term = geo.covariant_derivative_vf(W.fiber, X.x2, Y2, y)

    if W.lam is None:
        return BlockVector(base_term, fiber_term)

    lam2 = W.lam_at(x) ** 2
    gl2 = grad_lam_sq(W, x)
    h_x2y2 = geo.inner(W.fiber, y, X.x2, Y2(y))
    X1_lam2 = duals.directional(_lam_sq(W), x, X.x1)
    Y1_lam2 = duals.directional(_lam_sq(W), x, Y1(x))

    top = tuple(base_term[i] - 0.5 * h_x2y2 * gl2[i] for i in range(m))
    y2p = Y2(y)
    bottom = tuple(fiber_term[a]
                   + X1_lam2 / (2.0 * lam2) * y2p[a]
                   + Y1_lam2 / (2.0 * lam2) * X.x2[a]
                   for a in range(W.fiber.dim))
    return BlockVector(top, bottom)


def _hess_vec(W, x, v):
    """nabla^M_v grad lambda^2 - (1/(2 lambda^2)) v(lambda^2) grad lambda^2."""
    lam2 = W.lam_at(x) ** 2
    gl2_field = lambda q: geo.grad_scalar(W.base, _lam_sq(W), q)
    nabla = geo.covariant_derivative_vf(W.base, v, gl2_field, x)
    v_lam2 = duals.directional(_lam_sq(W), x, v)
    gl2 = gl2_field(x)
    return tuple(nabla[i] - v_lam2 / (2.0 * lam2) * gl2[i] for i in range(W.base.dim))


def closed_form_curvature(W: WarpedProduct, X: BlockVector, Y: BlockVector,
                          Z: BlockVector, p):
    """R(X, Y) Z via the warping-function Hessian form."""
    _require_closed_form_kind(W)
    x, y = W.split(p)
    m, n = W.base.dim, W.fiber.dim

    topR = geo.riemann_apply(W.base, x, X.x1, Y.x1, Z.x1)
    botR = geo.riemann_apply(W.fiber, y, X.x2, Y.x2, Z.x2)
    if W.lam is None:
        return BlockVector(topR, botR)

    lam = W.lam_at(x)
    hXZ = geo.inner(W.fiber, y, X.x2, Z.x2)
    hYZ = geo.inner(W.fiber, y, Y.x2, Z.x2)
    grad_lam_field = lambda q: geo.grad_scalar(W.base, W.lam, q)
    nabla_X = geo.covariant_derivative_vf(W.base, X.x1, grad_lam_field, x)
    nabla_Y = geo.covariant_derivative_vf(W.base, Y.x1, grad_lam_field, x)
    H = geo.hessian_scalar(W.base, W.lam, x)
    hess_XZ = sum(H[i][j] * X.x1[i] * Z.x1[j] for i in range(m) for j in range(m))
    hess_YZ = sum(H[i][j] * Y.x1[i] * Z.x1[j] for i in range(m) for j in range(m))
    gl = grad_lam_field(x)
    gl_norm2 = geo.inner(W.base, x, gl, gl)

    top = tuple(topR[i] + lam * hXZ * nabla_Y[i] - lam * hYZ * nabla_X[i]
                for i in range(m))
    bot = tuple(botR[a]
                + hess_XZ / lam * Y.x2[a] - hess_YZ / lam * X.x2[a]
                + gl_norm2 * (hXZ * Y.x2[a] - hYZ * X.x2[a])
                for a in range(n))
    return BlockVector(top, bot)


def closed_form_curvature_grad_sq(W: WarpedProduct, X: BlockVector, Y: BlockVector,
                                  Z: BlockVector, p):
    """R(X, Y) Z via the grad-lambda^2 form (same tensor, different grouping)."""
    _require_closed_form_kind(W)
    x, y = W.split(p)
    m, n = W.base.dim, W.fiber.dim

    topR = geo.riemann_apply(W.base, x, X.x1, Y.x1, Z.x1)
    botR = geo.riemann_apply(W.fiber, y, X.x2, Y.x2, Z.x2)
    if W.lam is None:
        return BlockVector(topR, botR)

    lam2 = W.lam_at(x) ** 2
    hXZ = geo.inner(W.fiber, y, X.x2, Z.x2)
    hYZ = geo.inner(W.fiber, y, Y.x2, Z.x2)
    AX = _hess_vec(W, x, X.x1)
    AY = _hess_vec(W, x, Y.x1)
    gAX_Z = geo.inner(W.base, x, AX, Z.x1)
    gAY_Z = geo.inner(W.base, x, AY, Z.x1)
    gl2 = grad_lam_sq(W, x)
    gl2_norm2 = geo.inner(W.base, x, gl2, gl2)

    top = tuple(topR[i] + 0.5 * hXZ * AY[i] - 0.5 * hYZ * AX[i] for i in range(m))
    bot = tuple(botR[a]
                + gAX_Z / (2.0 * lam2) * Y.x2[a] - gAY_Z / (2.0 * lam2) * X.x2[a]
                + gl2_norm2 / (4.0 * lam2) * (hXZ * Y.x2[a] - hYZ * X.x2[a])
                for a in range(n))
    return BlockVector(top, bot)


def wedge(W: WarpedProduct, X: BlockVector, Y: BlockVector, Z: BlockVector, p):
    """(X wedge Y) Z = gbar(Y, Z) X - gbar(X, Z) Y in the warped metric."""
    gbar = warped_metric_at(W, p)
    Xf, Yf, Zf = X.flat(), Y.flat(), Z.flat()
    gYZ = duals.dot(duals.mat_vec(gbar, Yf), Zf)
    gXZ = duals.dot(duals.mat_vec(gbar, Xf), Zf)
    out = tuple(gYZ * a - gXZ * b for a, b in zip(Xf, Yf))
    return block_split(W, out)


def closed_form_curvature_wedge(W: WarpedProduct, X: BlockVector, Y: BlockVector,
                                Z: BlockVector, p):
    """R(X, Y) Z as product curvature plus wedge corrections."""
    _require_closed_form_kind(W)
    x, y = W.split(p)

    topR = geo.riemann_apply(W.base, x, X.x1, Y.x1, Z.x1)
    botR = geo.riemann_apply(W.fiber, y, X.x2, Y.x2, Z.x2)
    prod = BlockVector(topR, botR)
    if W.lam is None:
        return prod

    m = W.base.dim
    lam2 = W.lam_at(x) ** 2
    zero_m = (0.0,) * m
    zero_n = (0.0,) * W.fiber.dim
    AX = BlockVector(_hess_vec(W, x, X.x1), zero_n)
    AY = BlockVector(_hess_vec(W, x, Y.x1), zero_n)
    X2 = BlockVector(zero_m, X.x2)
    Y2 = BlockVector(zero_m, Y.x2)
    gl2 = grad_lam_sq(W, x)
    gl2_norm2 = geo.inner(W.base, x, gl2, gl2)

    w1 = wedge(W, AY, X2, Z, p)
    w2 = wedge(W, AX, Y2, Z, p)
    w3 = wedge(W, X2, Y2, Z, p)
    corr = (w1 - w2 - w3.scale(gl2_norm2 / (2.0 * lam2))).scale(1.0 / (2.0 * lam2))
    return prod + corr
