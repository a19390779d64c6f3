"""Foliated charts and leafwise differential forms.

A chart is R^n carrying the product foliation R^{n-q} x R^q: coordinates
x1..x_{n-q} run along leaves, x_{n-q+1}..xn are transverse.  Leafwise forms
only ever contain leaf differentials; their coefficients may depend on every
coordinate.  The leafwise exterior derivative differentiates along leaf
coordinates only.  The associated dg algebra uses -d as its differential;
callers negate where the algebra (not the geometry) is meant.
"""

from __future__ import annotations

import numpy as np

from . import expressions as ex


class FoliatedChart:
    """Product-foliated chart R^{n-q} x R^q.

    :param dim: ambient dimension n
    :param codim: foliation codimension q (0 <= q <= n)
    """

    def __init__(self, dim, codim=0, prefix="x"):
        if not (0 <= codim <= dim):
            raise ValueError("codimension must satisfy 0 <= q <= n")
        self.dim = int(dim)
        self.codim = int(codim)
        self.prefix = prefix
        self.coord_names = tuple("%s%d" % (prefix, i + 1) for i in range(dim))

    @property
    def leaf_dim(self):
        return self.dim - self.codim

    @property
    def leaf_indices(self):
        """1-based indices of leaf coordinates."""
        return tuple(range(1, self.leaf_dim + 1))

    def is_leaf_index(self, i):
        return 1 <= i <= self.leaf_dim

    def coord(self, i):
        """Coordinate expression x_i (1-based)."""
        return ex.Coord(self.coord_names[i - 1])

    def env(self, points):
        """Evaluation environment from a (N, n) point array."""
        points = np.asarray(points, dtype=float)
        return {name: points[..., j] for j, name in enumerate(self.coord_names)}

    def __eq__(self, other):
        return (isinstance(other, FoliatedChart)
                and other.dim == self.dim and other.codim == self.codim
                and other.prefix == self.prefix)

    def __hash__(self):
        return hash((self.dim, self.codim, self.prefix))

    def __repr__(self):
        return "FoliatedChart(dim=%d, codim=%d)" % (self.dim, self.codim)


def _merge_sign(left, right):
    """Sign of merging two strictly increasing index tuples, or 0 on overlap."""
    sign = 1
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] == right[j]:
            return 0, ()
        if left[i] < right[j]:
            merged.append(left[i])
            i += 1
        else:
            # right[j] jumps over the remaining left entries
            sign *= (-1) ** (len(left) - i)
            merged.append(right[j])
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return sign, tuple(merged)


def _insert_sign(i, idx):
    """Sign and tuple for inserting leaf index i into increasing tuple idx."""
    return _merge_sign((i,), idx)


class LeafForm:
    """Leafwise differential form on a foliated chart.

    Terms map strictly increasing tuples of 1-based leaf indices to
    coefficient expressions.  Degree-0 forms use the empty tuple.

    :param chart: FoliatedChart
    :param degree: form degree p
    :param terms: dict[tuple[int, ...], Expr]
    """

    def __init__(self, chart, degree, terms):
        self.chart = chart
        self.degree = int(degree)
        clean = {}
        for idx, coeff in terms.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.degree:
                raise ValueError("index tuple %r does not match degree %d"
                                 % (idx, self.degree))
            if any(not chart.is_leaf_index(i) for i in idx):
                raise ValueError("non-leaf differential index in %r" % (idx,))
            if list(idx) != sorted(set(idx)):
                raise ValueError("indices must be strictly increasing: %r" % (idx,))
            coeff = ex.as_expr(coeff)
            if not ex.is_zero(coeff):
                clean[idx] = coeff
        self.terms = clean

    @classmethod
    def zero(cls, chart, degree=0):
        return cls(chart, degree, {})

    @classmethod
    def function(cls, chart, coeff):
        return cls(chart, 0, {(): ex.as_expr(coeff)})

    @classmethod
    def monomial(cls, chart, coeff, indices):
        return cls(chart, len(indices), {tuple(indices): ex.as_expr(coeff)})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if other.degree != self.degree or other.chart != self.chart:
            raise ValueError("cannot add forms of different degree/chart")
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = ex.add(terms.get(idx, ex.ZERO), c)
        return LeafForm(self.chart, self.degree, terms)

    def __neg__(self):
        return LeafForm(self.chart, self.degree,
                        {i: ex.neg(c) for i, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        s = ex.as_expr(s)
        return LeafForm(self.chart, self.degree,
                        {i: ex.mul(s, c) for i, c in self.terms.items()})

    def wedge(self, other):
        if other.chart != self.chart:
            raise ValueError("wedge across charts")
        terms = {}
        for i1, c1 in self.terms.items():
            for i2, c2 in other.terms.items():
                sign, idx = _merge_sign(i1, i2)
                if sign == 0:
                    continue
                contrib = ex.mul(ex.Const(sign), ex.mul(c1, c2))
                terms[idx] = ex.add(terms.get(idx, ex.ZERO), contrib)
        return LeafForm(self.chart, self.degree + other.degree, terms)

    def d(self):
        """Leafwise exterior derivative (geometric sign convention)."""
        terms = {}
        for idx, c in self.terms.items():
            for i in self.chart.leaf_indices:
                dc = c.diff(self.chart.coord_names[i - 1])
                if ex.is_zero(dc):
                    continue
                sign, new_idx = _insert_sign(i, idx)
                if sign == 0:
                    continue
                contrib = ex.mul(ex.Const(sign), dc)
                terms[new_idx] = ex.add(terms.get(new_idx, ex.ZERO), contrib)
        return LeafForm(self.chart, self.degree + 1, terms)

    def coefficients_at(self, points):
        """Evaluate every coefficient on a (N, n) point array.

        Returns dict idx -> (N,) array.
        """
        env = self.chart.env(points)
        n = np.asarray(points).shape[0]
        out = {}
        for idx, c in self.terms.items():
            out[idx] = np.broadcast_to(np.asarray(c.evaluate(env), dtype=float),
                                       (n,)).copy()
        return out

    def apply(self, points, vectors):
        """Contract the form with tangent vectors at given points.

        :param points: (N, n) array of base points
        :param vectors: list of degree-many (N, n) arrays
        :return: (N,) array of values
        """
        points = np.asarray(points, dtype=float)
        if len(vectors) != self.degree:
            raise ValueError("need exactly %d vectors" % self.degree)
        n_pts = points.shape[0]
        total = np.zeros(n_pts)
        if self.degree == 0:
            if not self.terms:
                return total
            coeff = self.terms[()]
            vals = np.asarray(coeff.evaluate(self.chart.env(points)), dtype=float)
            return np.broadcast_to(vals, (n_pts,)).copy()
        coeffs = self.coefficients_at(points)
        for idx, cvals in coeffs.items():
            cols = [np.asarray(v, dtype=float)[:, [i - 1 for i in idx]]
                    for v in vectors]
            minor = np.stack(cols, axis=1)  # (N, p, p): rows = vectors
            total += cvals * _dets(minor)
        return total

    def pullback(self, mapping):
        """Symbolic pullback along a smooth map into this chart.

        The mapping needs .dim, .domain_chart, .components and
        .jacobian_exprs().  The result is a leafwise form on the domain
        chart; only leaf differentials of the domain are kept, which is
        the honest pullback whenever the map is leafwise.
        """
        dom = mapping.domain_chart
        comp = mapping.components
        jac = mapping.jacobian_exprs()
        subs_env = {self.chart.coord_names[j]: comp[j]
                    for j in range(self.chart.dim)}
        from itertools import combinations
        terms = {}
        for idx, c in self.terms.items():
            c_pulled = c.subs(subs_env)
            for jdx in combinations(dom.leaf_indices, self.degree):
                rows = [[jac[i - 1][j - 1] for j in jdx] for i in idx]
                det = _sym_det(rows)
                if ex.is_zero(det):
                    continue
                contrib = ex.mul(c_pulled, det)
                terms[jdx] = ex.add(terms.get(jdx, ex.ZERO), contrib)
        return LeafForm(dom, self.degree, terms)

    def __repr__(self):
        if not self.terms:
            return "LeafForm(0, degree=%d)" % self.degree
        bits = []
        for idx, c in sorted(self.terms.items()):
            wedge = "^".join("dx%d" % i for i in idx) or "1"
            bits.append("(%s) %s" % (ex.to_str(c), wedge))
        return " + ".join(bits)


def _dets(mats):
    """Determinants of a stacked (N, p, p) array, fast for p <= 3."""
    p = mats.shape[-1]
    if p == 1:
        return mats[:, 0, 0]
    if p == 2:
        return mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    if p == 3:
        return (mats[:, 0, 0] * (mats[:, 1, 1] * mats[:, 2, 2] - mats[:, 1, 2] * mats[:, 2, 1])
                - mats[:, 0, 1] * (mats[:, 1, 0] * mats[:, 2, 2] - mats[:, 1, 2] * mats[:, 2, 0])
                + mats[:, 0, 2] * (mats[:, 1, 0] * mats[:, 2, 1] - mats[:, 1, 1] * mats[:, 2, 0]))
    return np.linalg.det(mats)


class ChartMap:
    """Leafwise smooth map between foliated charts.

    Components are expressions in the domain coordinates; transverse
    components must only involve transverse coordinates so leaves map
    into leaves.

    :param domain: FoliatedChart
    :param codomain: FoliatedChart
    :param components: codomain.dim expressions in domain coordinates
    """

    def __init__(self, domain, codomain, components):
        self.domain_chart = domain
        self.codomain_chart = codomain
        self.dim = domain.dim
        comps = tuple(ex.as_expr(c) for c in components)
        if len(comps) != codomain.dim:
            raise ValueError("need %d components" % codomain.dim)
        leaf_names = set(domain.coord_names[:domain.leaf_dim])
        for j, c in enumerate(comps, start=1):
            bad = c.free_coords() - set(domain.coord_names)
            if bad:
                raise ValueError("component %d uses unknown coordinates %r"
                                 % (j, sorted(bad)))
            if not codomain.is_leaf_index(j) and c.free_coords() & leaf_names:
                raise ValueError("transverse component %d depends on leaf "
                                 "coordinates; the map is not leafwise" % j)
        self.components = comps
        self._jac = None

    def jacobian_exprs(self):
        if self._jac is None:
            names = self.domain_chart.coord_names
            self._jac = [[c.diff(n) for n in names] for c in self.components]
        return self._jac

    def compose_simplex(self, sigma):
        """The composite simplex map (self after sigma)."""
        from .simplex import SmoothSimplexMap
        env = {self.domain_chart.coord_names[j]: sigma.components[j]
               for j in range(self.domain_chart.dim)}
        comps = [c.subs(env) for c in self.components]
        return SmoothSimplexMap(self.codomain_chart, sigma.dim, comps)


def _sym_det(rows):
    """Determinant of a small matrix of expressions (Laplace expansion)."""
    p = len(rows)
    if p == 0:
        return ex.ONE
    if p == 1:
        return rows[0][0]
    if p == 2:
        return ex.sub(ex.mul(rows[0][0], rows[1][1]),
                      ex.mul(rows[0][1], rows[1][0]))
    total = ex.ZERO
    for j in range(p):
        minor = [[rows[r][c] for c in range(p) if c != j] for r in range(1, p)]
        term = ex.mul(rows[0][j], _sym_det(minor))
        if j % 2:
            term = ex.neg(term)
        total = ex.add(total, term)
    return total
