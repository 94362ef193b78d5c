"""Forward-mode dual numbers that nest.

Every derivative in this package is computed by seeding points with `Dual`
values.  A `Dual` holds a value part and a tangent part, and either part may
itself be a `Dual`, so k-th derivatives are taken by nesting k levels deep.
The geometry code needs metrics differentiated three times and maps four
times, which rules out one-level AD tricks and makes float64 nesting the
simplest honest engine.

Only the elementary functions the metric/map vocabulary needs are provided
(sin, cos, exp, log, sqrt, atan, atan2, powers).  Calling `math.sin` on a
`Dual` by accident raises instead of silently truncating the derivative.
"""

from __future__ import annotations

import math


class Dual:
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a  # value part (float or Dual)
        self.b = b  # tangent part (float or Dual)

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a + other.a, self.b + other.b)
        return Dual(self.a + other, self.b)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a - other.a, self.b - other.b)
        return Dual(self.a - other, self.b)

    def __rsub__(self, other):
        return Dual(other - self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a * other.a, self.a * other.b + self.b * other.a)
        return Dual(self.a * other, self.b * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.a
            return Dual(self.a * inv, (self.b - self.a * inv * other.b) * inv)
        return Dual(self.a / other, self.b / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.a
        return Dual(other * inv, -other * inv * inv * self.b)

    def __pow__(self, n):
        if isinstance(n, int):
            if n == 0:
                return Dual(1.0, 0.0 * self.b)
            if n == 1:
                return self
            return Dual(self.a ** n, n * self.a ** (n - 1) * self.b)
        # real exponent: only sensible for positive value part
        return Dual(self.a ** n, n * self.a ** (n - 1.0) * self.b)

    # comparisons act on the deep value, which is what pivoting and domain
    # checks care about
    def __lt__(self, other):
        return value(self) < value(other)

    def __le__(self, other):
        return value(self) <= value(other)

    def __gt__(self, other):
        return value(self) > value(other)

    def __ge__(self, other):
        return value(self) >= value(other)

    def __abs__(self):
        return -self if value(self) < 0.0 else self

    def __float__(self):
        raise TypeError("Dual cannot be coerced to float; use duals.value()")


def value(x):
    """Deep value part: strips every Dual level."""
    while isinstance(x, Dual):
        x = x.a
    return x


def tangent(x):
    """Tangent slot of the outermost level (0.0 for plain numbers)."""
    return x.b if isinstance(x, Dual) else 0.0


def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.a), cos(x.a) * x.b)
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.a), -sin(x.a) * x.b)
    return math.cos(x)


def tan(x):
    return sin(x) / cos(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.a)
        return Dual(e, e * x.b)
    return math.exp(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(log(x.a), x.b / x.a)
    return math.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        r = sqrt(x.a)
        return Dual(r, x.b / (2.0 * r))
    return math.sqrt(x)


def atan(x):
    if isinstance(x, Dual):
        return Dual(atan(x.a), x.b / (1.0 + x.a * x.a))
    return math.atan(x)


def atan2(y, x):
    if isinstance(y, Dual) or isinstance(x, Dual):
        ya, yb = (y.a, y.b) if isinstance(y, Dual) else (y, 0.0)
        xa, xb = (x.a, x.b) if isinstance(x, Dual) else (x, 0.0)
        r2 = xa * xa + ya * ya
        return Dual(atan2(ya, xa), (xa * yb - ya * xb) / r2)
    return math.atan2(y, x)


def cosh(x):
    if isinstance(x, Dual):
        return Dual(cosh(x.a), sinh(x.a) * x.b)
    return math.cosh(x)


def sinh(x):
    if isinstance(x, Dual):
        return Dual(sinh(x.a), cosh(x.a) * x.b)
    return math.sinh(x)


# ---------------------------------------------------------------------------
# seeding helpers

def lift(p, v):
    """Seed point p along direction v: one fresh Dual level per coordinate."""
    return tuple(Dual(pi, vi) for pi, vi in zip(p, v))


def unit(dim, i):
    return tuple(1.0 if j == i else 0.0 for j in range(dim))


def directional(f, p, v):
    """Derivative of f along v at p.  f maps a coordinate tuple to a scalar
    or a sequence of scalars; the result has the same shape."""
    out = f(lift(p, v))
    if isinstance(out, (tuple, list)):
        return tuple(tangent(c) for c in out)
    return tangent(out)


def partial(f, p, i):
    return directional(f, p, unit(len(p), i))


# ---------------------------------------------------------------------------
# dense linear algebra over the dual field
#
# Matrices are lists of row lists whose entries are floats or Duals.  Sizes
# here are tiny (manifold dimension), so cubic algorithms with partial
# pivoting on the deep value are plenty.

def mat_vec(A, x):
    return tuple(sum(A[i][j] * x[j] for j in range(len(x))) for i in range(len(A)))


def dot(x, y):
    return sum(xi * yi for xi, yi in zip(x, y))


def mat_inv(A):
    n = len(A)
    M = [list(row) + [1.0 if i == j else 0.0 for j in range(n)]
         for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value(M[r][col])))
        if value(M[piv][col]) == 0.0:
            raise ZeroDivisionError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = 1.0 / M[col][col]
        M[col] = [e * inv for e in M[col]]
        for r in range(n):
            if r == col:
                continue
            factor = M[r][col]
            if isinstance(factor, Dual) or factor != 0.0:
                M[r] = [e - factor * c for e, c in zip(M[r], M[col])]
    return [row[n:] for row in M]


def cholesky(A):
    """Lower factor of a symmetric positive definite matrix.

    Raises ValueError when a pivot's value part is not strictly positive,
    which is how metric degeneracy surfaces.
    """
    n = len(A)
    L = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = A[i][j]
            for k in range(j):
                s = s - L[i][k] * L[j][k]
            if i == j:
                if value(s) <= 0.0:
                    raise ValueError("matrix is not positive definite")
                L[i][j] = sqrt(s)
            else:
                L[i][j] = s / L[j][j]
    return L


def det_spd(A):
    L = cholesky(A)
    d = 1.0
    for i in range(len(A)):
        d = d * L[i][i]
    return d * d
