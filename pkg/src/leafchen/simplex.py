"""Simplices in decreasing coordinates and smooth simplex maps.

The model k-simplex is the ordered cube slice
Delta^k = {1 >= t_1 >= t_2 >= ... >= t_k >= 0}.  Vertex v_i has i leading
ones.  Coface i inserts a coordinate (prepend 1 for i=0, duplicate t_i for
middle i, append 0 for i=k+1); codegeneracy i deletes coordinate i.  Front
faces append zeros, back faces prepend ones.

A simplex map must expose dim, chart, eval_points(T) -> (N, n) and
jacobian(T) -> (N, n, dim); symbolic maps add expression-level composition.
"""

from __future__ import annotations

import numpy as np

from . import expressions as ex
from .charts import FoliatedChart

_DOMAIN_PREFIX = "t"


def domain_names(k):
    return tuple("%s%d" % (_DOMAIN_PREFIX, i + 1) for i in range(k))


def vertex_point(i, k):
    """Vertex v_i of Delta^k: i ones then k-i zeros."""
    if not (0 <= i <= k):
        raise ValueError("vertex index out of range")
    return np.array([1.0] * i + [0.0] * (k - i))


def coface_point(i, p):
    """Apply coface i to a point of Delta^k, landing in Delta^{k+1}."""
    p = list(p)
    k = len(p)
    if not (0 <= i <= k + 1):
        raise ValueError("coface index out of range")
    if i == 0:
        return tuple([1.0] + p)
    if i == k + 1:
        return tuple(p + [0.0])
    return tuple(p[:i] + [p[i - 1]] + p[i - 1:])


def codegeneracy_point(i, p):
    """Delete coordinate i (1-based) of a point of Delta^k."""
    p = list(p)
    k = len(p)
    if not (1 <= i <= k):
        raise ValueError("codegeneracy index out of range")
    return tuple(p[:i - 1] + p[i:])


def coface_affine(i, k):
    """Affine data (A, b) of coface i: Delta^k -> Delta^{k+1}."""
    A = np.zeros((k + 1, k))
    b = np.zeros(k + 1)
    if i == 0:
        b[0] = 1.0
        A[1:, :] = np.eye(k)
    elif i == k + 1:
        A[:k, :] = np.eye(k)
    elif 1 <= i <= k:
        for r in range(k + 1):
            src = r if r < i else (i - 1 if r == i else r - 1)
            A[r, src] = 1.0
    else:
        raise ValueError("coface index out of range")
    return A, b


def codegeneracy_affine(i, k):
    """Affine data of the degeneracy Delta^{k+1} -> Delta^k deleting input i."""
    if not (1 <= i <= k + 1):
        raise ValueError("codegeneracy index out of range")
    A = np.zeros((k, k + 1))
    for r in range(k):
        A[r, r if r < i - 1 else r + 1] = 1.0
    return A, np.zeros(k)


def front_affine(i, k):
    """V_i: Delta^i -> Delta^k, (t_1..t_i) |-> (t_1..t_i, 0..0)."""
    A = np.zeros((k, i))
    A[:i, :] = np.eye(i)
    return A, np.zeros(k)


def back_affine(i, k):
    """U_i: Delta^i -> Delta^k, (t_1..t_i) |-> (1..1, t_1..t_i)."""
    A = np.zeros((k, i))
    A[k - i:, :] = np.eye(i)
    b = np.zeros(k)
    b[:k - i] = 1.0
    return A, b


class SmoothSimplexMap:
    """Symbolic map Delta^k -> chart, one expression per target coordinate.

    :param chart: target FoliatedChart
    :param dim: domain simplex dimension k
    :param components: chart.dim expressions in t1..tk
    """

    def __init__(self, chart, dim, components):
        self.chart = chart
        self.dim = int(dim)
        self.names = domain_names(self.dim)
        comps = [ex.as_expr(c) for c in components]
        if len(comps) != chart.dim:
            raise ValueError("need one component per chart coordinate")
        for c in comps:
            bad = c.free_coords() - set(self.names)
            if bad:
                raise ValueError("component uses unknown coordinates %r"
                                 % sorted(bad))
        self.components = comps
        self._jac = None

    @property
    def domain_chart(self):
        return FoliatedChart(self.dim, 0, prefix=_DOMAIN_PREFIX)

    def jacobian_exprs(self):
        if self._jac is None:
            self._jac = [[c.diff(name) for name in self.names]
                         for c in self.components]
        return self._jac

    def _env(self, T):
        T = np.asarray(T, dtype=float)
        return {name: T[..., j] for j, name in enumerate(self.names)}

    def eval_points(self, T):
        T = np.asarray(T, dtype=float)
        env = self._env(T)
        n = T.shape[0]
        cols = [np.broadcast_to(np.asarray(c.evaluate(env), dtype=float), (n,))
                for c in self.components]
        return np.stack(cols, axis=-1)

    def jacobian(self, T):
        T = np.asarray(T, dtype=float)
        env = self._env(T)
        n = T.shape[0]
        jac = np.zeros((n, self.chart.dim, self.dim))
        for r, row in enumerate(self.jacobian_exprs()):
            for c, e in enumerate(row):
                if not ex.is_zero(e):
                    jac[:, r, c] = np.broadcast_to(
                        np.asarray(e.evaluate(env), dtype=float), (n,))
        return jac

    def precompose_exprs(self, new_dim, exprs):
        """sigma composed with the map whose components are exprs in t1..t_{new_dim}."""
        env = {self.names[j]: ex.as_expr(exprs[j]) for j in range(self.dim)}
        comps = [c.subs(env) for c in self.components]
        return SmoothSimplexMap(self.chart, new_dim, comps)

    def _precompose_affine(self, A, b):
        in_dim = A.shape[1]
        names = domain_names(in_dim)
        exprs = []
        for r in range(A.shape[0]):
            e = ex.Const(b[r])
            for j in range(in_dim):
                if A[r, j]:
                    e = ex.add(e, ex.mul(ex.Const(A[r, j]), ex.Coord(names[j])))
            exprs.append(e)
        return self.precompose_exprs(in_dim, exprs)

    def face(self, i):
        return self._precompose_affine(*coface_affine(i, self.dim - 1))

    def degenerate(self, i):
        return self._precompose_affine(*codegeneracy_affine(i, self.dim))

    def front_face(self, i):
        return self._precompose_affine(*front_affine(i, self.dim))

    def back_face(self, i):
        return self._precompose_affine(*back_affine(i, self.dim))

    def vertex(self, i):
        return self.eval_points(vertex_point(i, self.dim)[None, :])[0]

    def __repr__(self):
        comps = ", ".join(ex.to_str(c) for c in self.components)
        return "SmoothSimplexMap(dim=%d, [%s])" % (self.dim, comps)


def constant_map(chart, point, dim=0):
    """Constant simplex at a chart point."""
    return SmoothSimplexMap(chart, dim, [ex.Const(v) for v in point])


def affine_simplex(chart, vertices):
    """Affine simplex through the listed k+1 chart points, in vertex order."""
    vertices = [np.asarray(v, dtype=float) for v in vertices]
    k = len(vertices) - 1
    names = domain_names(k)
    comps = []
    for r in range(chart.dim):
        e = ex.Const(vertices[0][r])
        for i in range(1, k + 1):
            step = vertices[i][r] - vertices[i - 1][r]
            if step:
                e = ex.add(e, ex.mul(ex.Const(step), ex.Coord(names[i - 1])))
        comps.append(e)
    return SmoothSimplexMap(chart, k, comps)


class AffinePrecomposedMap:
    """Any simplex map precomposed with an affine simplex-to-simplex map."""

    def __init__(self, base, A, b):
        self.base = base
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.dim = self.A.shape[1]
        self.chart = base.chart

    def _push(self, T):
        return np.asarray(T, dtype=float) @ self.A.T + self.b

    def eval_points(self, T):
        return self.base.eval_points(self._push(T))

    def jacobian(self, T):
        return self.base.jacobian(self._push(T)) @ self.A


class ConeMap:
    """Cone of a simplex map toward the leaf origin.

    Leaf coordinates of the base map are scaled by (1 - u) where u is the
    new last simplex coordinate; transverse coordinates ride along
    unchanged.  The base face (u = 0) recovers the original map; the apex
    (u = 1, the all-ones vertex) sits at the leaf origin.  Evaluation
    stays off u = 1; quadrature nodes are interior so the rescaled
    argument (t_i - u)/(1 - u) is always defined.
    """

    def __init__(self, base):
        self.base = base
        self.dim = base.dim + 1
        self.chart = base.chart

    def _split(self, T):
        T = np.asarray(T, dtype=float)
        u = T[:, -1]
        denom = 1.0 - u
        # at the apex itself any base argument works: the leaf part is
        # scaled by zero; pick 0 to keep evaluation finite
        safe = np.where(np.abs(denom) < 1e-12, 1.0, denom)
        s = np.where(np.abs(denom[:, None]) < 1e-12, 0.0,
                     (T[:, :-1] - u[:, None]) / safe[:, None])
        return s, u, denom

    def eval_points(self, T):
        s, u, denom = self._split(T)
        P = self.base.eval_points(s).copy()
        nl = self.chart.leaf_dim
        P[:, :nl] *= denom[:, None]
        return P

    def jacobian(self, T):
        s, u, denom = self._split(T)
        k = self.base.dim
        P = self.base.eval_points(s)
        J = self.base.jacobian(s)  # (N, n, k)
        n = self.chart.dim
        nl = self.chart.leaf_dim
        out = np.zeros((T.shape[0], n, k + 1))
        # radial direction: d s_i / du = (T_i - 1)/(1-u)^2
        rad = (np.asarray(T, dtype=float)[:, :-1] - 1.0) / denom[:, None] ** 2
        du_base = np.einsum("nij,nj->ni", J, rad)
        out[:, :nl, :k] = J[:, :nl, :]
        out[:, :nl, k] = -P[:, :nl] + denom[:, None] * du_base[:, :nl]
        if nl < n:
            out[:, nl:, :k] = J[:, nl:, :] / denom[:, None, None]
            out[:, nl:, k] = du_base[:, nl:]
        return out


def face(m, i):
    """i-th face of any simplex map."""
    if isinstance(m, SmoothSimplexMap):
        return m.face(i)
    return AffinePrecomposedMap(m, *coface_affine(i, m.dim - 1))


def degenerate(m, i):
    """Degenerate simplex: precompose with the codegeneracy deleting input i."""
    if isinstance(m, SmoothSimplexMap):
        return m.degenerate(i)
    return AffinePrecomposedMap(m, *codegeneracy_affine(i, m.dim))


def front_face(m, i):
    if isinstance(m, SmoothSimplexMap):
        return m.front_face(i)
    return AffinePrecomposedMap(m, *front_affine(i, m.dim))


def back_face(m, i):
    if isinstance(m, SmoothSimplexMap):
        return m.back_face(i)
    return AffinePrecomposedMap(m, *back_affine(i, m.dim))


def vertex_of(m, i):
    return m.eval_points(vertex_point(i, m.dim)[None, :])[0]
