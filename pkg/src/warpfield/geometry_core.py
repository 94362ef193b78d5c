"""Chart-level Riemannian geometry.

A manifold here is a single coordinate chart: a dimension, a box of valid
coordinates (each axis optionally periodic), and a callable producing the
metric matrix at a point.  Everything downstream (warped products, map
tension fields, energies) is built from the primitives in this module.

Conventions, fixed once for the whole package:

* curvature  R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
  so the unit sphere has sectional curvature +1 and Ric(v) = v;
* Laplacian  Delta f = Tr_g Hess f  (negative spectrum on a torus);
* orthonormal frames come from the Cholesky factor of the metric, which makes
  them deterministic functions of the point.

All computational routines accept coordinates that are floats or nested
`duals.Dual` values, so they can be differentiated through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import duals
from .duals import value


class SingularMetric(Exception):
    """Metric matrix failed to be positive definite / invertible at a point."""


@dataclass(frozen=True)
class ChartManifold:
    dim: int
    coords: tuple[str, ...]
    metric_fn: Callable[[tuple], list]
    bounds: tuple[tuple[float, float], ...]
    periodic: tuple[bool, ...] = ()
    name: str = ""

    def __post_init__(self):
        if len(self.coords) != self.dim or len(self.bounds) != self.dim:
            raise ValueError("coords/bounds length must match dim")
        if not self.periodic:
            object.__setattr__(self, "periodic", (False,) * self.dim)
        if len(self.periodic) != self.dim:
            raise ValueError("periodic flags length must match dim")

    def wrap(self, p):
        """Map periodic coordinates back into their fundamental interval."""
        q = []
        for x, (lo, hi), per in zip(p, self.bounds, self.periodic):
            if per:
                span = hi - lo
                x = (x - lo) % span + lo
            q.append(x)
        return tuple(q)

    def contains(self, p):
        p = self.wrap(p)
        return all(lo <= x <= hi for x, (lo, hi) in zip(p, self.bounds))

    def point(self, *p):
        """Validated point constructor: wraps periodic axes, checks the box."""
        if len(p) == 1 and isinstance(p[0], (tuple, list)):
            p = tuple(p[0])
        q = self.wrap(p)
        if not all(lo <= x <= hi for x, (lo, hi) in zip(q, self.bounds)):
            raise ValueError(f"point {p} outside chart domain of {self.name or 'manifold'}")
        return q


@dataclass(frozen=True)
class TangentVector:
    base: tuple
    components: tuple


@dataclass(frozen=True)
class ScalarField:
    fn: Callable[[tuple], object]
    name: str = ""

    def __call__(self, p):
        return self.fn(p)


def as_scalar_field(f, name=""):
    if isinstance(f, ScalarField):
        return f
    return ScalarField(f, name)


# ---------------------------------------------------------------------------
# metric-level primitives, generic over dual-valued points

def metric_at(M: ChartManifold, p):
    g = M.metric_fn(tuple(p))
    return [list(row) for row in g]


def inverse_metric_at(M: ChartManifold, p):
    try:
        return duals.mat_inv(metric_at(M, p))
    except ZeroDivisionError as e:
        raise SingularMetric(f"metric not invertible at {tuple(map(value, p))}") from e


def christoffel(M: ChartManifold, p):
    """Christoffel symbols Gamma[k][i][j] of the Levi-Civita connection."""
    n = M.dim
    ginv = inverse_metric_at(M, p)
    dg = [duals.directional(lambda q, M=M: _flat_metric(M, q), p, duals.unit(n, l))
          for l in range(n)]
    # dg[l] is the flattened row-major derivative of g along coordinate l
    gamma = [[[0.0] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i + 1):
                s = 0.0
                for l in range(n):
                    s = s + ginv[k][l] * (dg[i][j * n + l] + dg[j][i * n + l] - dg[l][i * n + j])
                s = 0.5 * s
                gamma[k][i][j] = s
                gamma[k][j][i] = s
    return gamma


def _flat_metric(M, q):
    g = M.metric_fn(tuple(q))
    return tuple(g[i][j] for i in range(M.dim) for j in range(M.dim))


def riemann(M: ChartManifold, p):
    """Curvature components R[l][i][j][k], where R(d_i, d_j) d_k = R^l_ijk d_l."""
    n = M.dim
    gamma = christoffel(M, p)
    dgamma = [duals.directional(lambda q, M=M: _flat_christoffel(M, q), p, duals.unit(n, i))
              for i in range(n)]

    def dG(i, k, j, l):
        # d_i Gamma^l_{jk}
        return dgamma[i][(l * n + j) * n + k]

    R = [[[[0.0] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for l in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    s = dG(i, k, j, l) - dG(j, k, i, l)
                    for m in range(n):
                        s = s + gamma[l][i][m] * gamma[m][j][k] - gamma[l][j][m] * gamma[m][i][k]
                    R[l][i][j][k] = s
    return R


def _flat_christoffel(M, q):
    gamma = christoffel(M, q)
    n = M.dim
    return tuple(gamma[l][j][k] for l in range(n) for j in range(n) for k in range(n))


def riemann_apply(M: ChartManifold, p, X, Y, Z):
    """Components of R(X, Y) Z at p for component tuples X, Y, Z."""
    n = M.dim
    R = riemann(M, p)
    out = []
    for l in range(n):
        s = 0.0
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    s = s + R[l][i][j][k] * X[i] * Y[j] * Z[k]
        out.append(s)
    return tuple(out)


def ricci_apply(M: ChartManifold, p, v):
    """Ricci operator: sum_i R(v, e_i) e_i over an orthonormal frame.

    Computed as the frame-free contraction g^{jk} R(v, d_j) d_k, which equals
    the frame sum for any orthonormal frame.
    """
    n = M.dim
    R = riemann(M, p)
    ginv = inverse_metric_at(M, p)
    out = []
    for l in range(n):
        s = 0.0
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    s = s + ginv[j][k] * R[l][i][j][k] * v[i]
        out.append(s)
    return tuple(out)


def orthonormal_frame(M: ChartManifold, p):
    """Deterministic orthonormal frame at p via the metric's Cholesky factor.

    Returns a tuple of component tuples e_1 .. e_n with g(e_i, e_j) = delta_ij.
    """
    try:
        L = duals.cholesky(metric_at(M, p))
    except ValueError as e:
        raise SingularMetric(f"metric not positive definite at {tuple(map(value, p))}") from e
    E = duals.mat_inv(L)  # row i of L^{-1} is the i-th frame vector
    return tuple(tuple(row) for row in E)


def grad_scalar(M: ChartManifold, F, p):
    n = M.dim
    ginv = inverse_metric_at(M, p)
    dF = [duals.partial(F, p, j) for j in range(n)]
    return tuple(sum(ginv[i][j] * dF[j] for j in range(n)) for i in range(n))


def hessian_scalar(M: ChartManifold, F, p):
    """Hess F (X, Y) = X(Y F) - (nabla_X Y) F, as the matrix over d_i, d_j."""
    n = M.dim
    gamma = christoffel(M, p)
    dF = [duals.partial(F, p, j) for j in range(n)]
    H = [[0.0] * n for _ in range(n)]
    for i in range(n):
        ddF = duals.directional(lambda q, F=F: tuple(duals.partial(F, q, j) for j in range(n)),
                                p, duals.unit(n, i))
        for j in range(n):
            s = ddF[j]
            for k in range(n):
                s = s - gamma[k][i][j] * dF[k]
            H[i][j] = s
    return H


def laplacian_scalar(M: ChartManifold, F, p):
    n = M.dim
    ginv = inverse_metric_at(M, p)
    H = hessian_scalar(M, F, p)
    s = 0.0
    for i in range(n):
        for j in range(n):
            s = s + ginv[i][j] * H[i][j]
    return s


def covariant_derivative_vf(M: ChartManifold, X, W, p):
    """nabla_X W at p: X is a component tuple, W a field p -> components."""
    n = M.dim
    gamma = christoffel(M, p)
    Wp = W(p)
    dW = duals.directional(W, p, tuple(X))
    out = []
    for k in range(n):
        s = dW[k]
        for i in range(n):
            for j in range(n):
                s = s + gamma[k][i][j] * X[i] * Wp[j]
        out.append(s)
    return tuple(out)


def inner(M: ChartManifold, p, X, Y):
    g = metric_at(M, p)
    return duals.dot(duals.mat_vec(g, X), Y)


def norm_sq(M: ChartManifold, p, X):
    return inner(M, p, X, X)


# ---------------------------------------------------------------------------
# stock charts

def flat_box(dim, bounds=None, name="flat box"):
    if bounds is None:
        bounds = ((-5.0, 5.0),) * dim
    ident = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    return ChartManifold(dim, tuple(f"x{i}" for i in range(dim)),
                         lambda p, I=ident: [row[:] for row in I],
                         tuple(bounds), (False,) * dim, name)


def flat_torus(dim, side=2.0 * math.pi, name="flat torus"):
    ident = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    return ChartManifold(dim, tuple(f"x{i}" for i in range(dim)),
                         lambda p, I=ident: [row[:] for row in I],
                         ((0.0, side),) * dim, (True,) * dim, name)


def sphere_chart(cap=0.1, name="unit sphere"):
    """Round unit sphere in colatitude/longitude, away from the poles."""

    def g(p):
        s = duals.sin(p[0])
        return [[1.0, 0.0], [0.0, s * s]]

    return ChartManifold(2, ("theta", "phi"), g,
                         ((cap, math.pi - cap), (0.0, 2.0 * math.pi)),
                         (False, True), name)


def hyperbolic_chart(bounds=((-2.0, 2.0), (-2.0, 2.0)), name="hyperbolic plane"):
    """Curvature -1 model dt^2 + e^{2t} dy^2."""

    def g(p):
        e = duals.exp(2.0 * p[0])
        return [[1.0, 0.0], [0.0, e]]

    return ChartManifold(2, ("t", "y"), g, tuple(bounds), (False, False), name)


def circle_chart(radius=1.0, name="circle"):
    r2 = radius * radius
    return ChartManifold(1, ("y",), lambda p: [[r2]],
                         ((0.0, 2.0 * math.pi),), (True,), name)
