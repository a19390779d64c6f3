"""Graded vector spaces, endomorphism-valued leafwise forms, Z-connections.

An endomorphism-valued form here is homogeneous in both form degree and
endomorphism degree; entry (r, c) may be nonzero only when
deg(row r) - deg(col c) equals the endomorphism degree.  Composition uses
the sign (-1)^(form degree of the left factor times endomorphism degree
of the right factor) next to matrix multiplication and wedge of form
parts.

A Z-connection is a family A_i of i-forms with endomorphism degree 1-i;
its curvature is -dA + A o A collected by form degree, and flatness asks
every component to vanish.
"""

from __future__ import annotations

import numpy as np

from . import expressions as ex
from .charts import LeafForm, _merge_sign, _insert_sign


class GradedVectorSpace:
    """Finite-dimensional graded space given by per-basis-vector degrees."""

    def __init__(self, degrees):
        self.degrees = tuple(int(d) for d in degrees)
        self.total_dim = len(self.degrees)

    def shifted(self, m=1):
        """Degree shift [m]: new degrees are old degrees minus m."""
        return GradedVectorSpace(tuple(d - m for d in self.degrees))

    def parity(self):
        """Vector of (-1)^degree per basis vector."""
        return np.array([(-1) ** d for d in self.degrees], dtype=float)

    def __eq__(self, other):
        return (isinstance(other, GradedVectorSpace)
                and other.degrees == self.degrees)

    def __hash__(self):
        return hash(self.degrees)

    def __repr__(self):
        return "GradedVectorSpace(%r)" % (self.degrees,)


def _zero_matrix(r):
    return [[ex.ZERO for _ in range(r)] for _ in range(r)]


def _clean_matrix(mat, r):
    out = []
    for row in range(r):
        out.append([ex.as_expr(mat[row][col]) for col in range(r)])
    return out


def _matrix_is_zero(mat):
    return all(ex.is_zero(e) for row in mat for e in row)


class HomValuedForm:
    """Endomorphism-valued leafwise form, homogeneous in both degrees.

    :param chart: FoliatedChart
    :param space: GradedVectorSpace
    :param degree: form degree
    :param endo_degree: endomorphism degree
    :param terms: dict[index tuple -> matrix (list of list) of Expr]
    """

    def __init__(self, chart, space, degree, endo_degree, terms):
        self.chart = chart
        self.space = space
        self.degree = int(degree)
        self.endo_degree = int(endo_degree)
        r = space.total_dim
        clean = {}
        for idx, mat in terms.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.degree:
                raise ValueError("index tuple %r does not match degree %d"
                                 % (idx, self.degree))
            if any(not chart.is_leaf_index(i) for i in idx):
                raise ValueError("non-leaf differential index in %r" % (idx,))
            mat = _clean_matrix(mat, r)
            for row in range(r):
                for col in range(r):
                    if ex.is_zero(mat[row][col]):
                        continue
                    if space.degrees[row] - space.degrees[col] != self.endo_degree:
                        raise ValueError(
                            "entry (%d, %d) violates endomorphism degree %d"
                            % (row, col, self.endo_degree))
            if not _matrix_is_zero(mat):
                clean[idx] = mat
        self.terms = clean

    @classmethod
    def zero(cls, chart, space, degree, endo_degree):
        return cls(chart, space, degree, endo_degree, {})

    @classmethod
    def from_matrix(cls, chart, space, indices, matrix, endo_degree=None):
        """Single-term form coeff * d(indices) from a numeric/expr matrix."""
        indices = tuple(indices)
        mat = [[ex.as_expr(v) for v in row] for row in matrix]
        if endo_degree is None:
            endo_degree = _infer_endo_degree(space, mat)
        return cls(chart, space, len(indices), endo_degree, {indices: mat})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if (other.degree != self.degree or other.chart != self.chart
                or other.space != self.space
                or other.endo_degree != self.endo_degree):
            raise ValueError("cannot add mismatched forms")
        r = self.space.total_dim
        terms = {idx: [row[:] for row in mat] for idx, mat in self.terms.items()}
        for idx, mat in other.terms.items():
            if idx not in terms:
                terms[idx] = [row[:] for row in mat]
            else:
                cur = terms[idx]
                for row in range(r):
                    for col in range(r):
                        cur[row][col] = ex.add(cur[row][col], mat[row][col])
        return HomValuedForm(self.chart, self.space, self.degree,
                             self.endo_degree, terms)

    def __neg__(self):
        terms = {idx: [[ex.neg(e) for e in row] for row in mat]
                 for idx, mat in self.terms.items()}
        return HomValuedForm(self.chart, self.space, self.degree,
                             self.endo_degree, terms)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        s = ex.as_expr(s)
        terms = {idx: [[ex.mul(s, e) for e in row] for row in mat]
                 for idx, mat in self.terms.items()}
        return HomValuedForm(self.chart, self.space, self.degree,
                             self.endo_degree, terms)

    def compose(self, other):
        """Graded composition: sign (-1)^(p_left * e_right), matrix product."""
        if other.chart != self.chart or other.space != self.space:
            raise ValueError("compose across charts or spaces")
        sign = -1 if (self.degree * other.endo_degree) % 2 else 1
        r = self.space.total_dim
        terms = {}
        for i1, m1 in self.terms.items():
            for i2, m2 in other.terms.items():
                msign, idx = _merge_sign(i1, i2)
                if msign == 0:
                    continue
                coeff = ex.Const(sign * msign)
                prod = _zero_matrix(r)
                for row in range(r):
                    for col in range(r):
                        acc = ex.ZERO
                        for mid in range(r):
                            acc = ex.add(acc, ex.mul(m1[row][mid], m2[mid][col]))
                        prod[row][col] = ex.mul(coeff, acc)
                if idx not in terms:
                    terms[idx] = prod
                else:
                    cur = terms[idx]
                    for row in range(r):
                        for col in range(r):
                            cur[row][col] = ex.add(cur[row][col], prod[row][col])
        return HomValuedForm(self.chart, self.space,
                             self.degree + other.degree,
                             self.endo_degree + other.endo_degree, terms)

    def d(self):
        """Leafwise exterior derivative on every entry."""
        r = self.space.total_dim
        terms = {}
        for idx, mat in self.terms.items():
            for i in self.chart.leaf_indices:
                name = self.chart.coord_names[i - 1]
                dmat = [[e.diff(name) for e in row] for row in mat]
                if all(ex.is_zero(e) for row in dmat for e in row):
                    continue
                sign, new_idx = _insert_sign(i, idx)
                if sign == 0:
                    continue
                signed = [[ex.mul(ex.Const(sign), e) for e in row] for row in dmat]
                if new_idx not in terms:
                    terms[new_idx] = signed
                else:
                    cur = terms[new_idx]
                    for row in range(r):
                        for col in range(r):
                            cur[row][col] = ex.add(cur[row][col],
                                                   signed[row][col])
        return HomValuedForm(self.chart, self.space, self.degree + 1,
                             self.endo_degree, terms)

    def apply(self, points, vectors):
        """Contract with tangent vectors: (N, r, r) matrix values."""
        points = np.asarray(points, dtype=float)
        if len(vectors) != self.degree:
            raise ValueError("need exactly %d vectors" % self.degree)
        npts = points.shape[0]
        r = self.space.total_dim
        env = self.chart.env(points)
        total = np.zeros((npts, r, r))
        from .charts import _dets
        for idx, mat in self.terms.items():
            if self.degree:
                cols = [np.asarray(v, dtype=float)[:, [i - 1 for i in idx]]
                        for v in vectors]
                dets = _dets(np.stack(cols, axis=1))
            else:
                dets = np.ones(npts)
            for row in range(r):
                for col in range(r):
                    e = mat[row][col]
                    if ex.is_zero(e):
                        continue
                    vals = np.broadcast_to(
                        np.asarray(e.evaluate(env), dtype=float), (npts,))
                    total[:, row, col] += vals * dets
        return total

    def value_at(self, point):
        """Matrix value of a 0-form at one chart point."""
        if self.degree != 0:
            raise ValueError("value_at needs a 0-form")
        return self.apply(np.asarray(point, dtype=float)[None, :], [])[0]

    def norm_bound(self, points):
        """Max over points of the entrywise-absolute operator norm."""
        points = np.asarray(points, dtype=float)
        env = self.chart.env(points)
        npts = points.shape[0]
        r = self.space.total_dim
        acc = np.zeros((npts, r, r))
        for mat in self.terms.values():
            for row in range(r):
                for col in range(r):
                    e = mat[row][col]
                    if not ex.is_zero(e):
                        acc[:, row, col] += np.abs(np.broadcast_to(
                            np.asarray(e.evaluate(env), dtype=float), (npts,)))
        if not self.terms:
            return 0.0
        return float(max(np.linalg.norm(acc[i], 2) for i in range(npts)))

    def __repr__(self):
        return ("HomValuedForm(degree=%d, endo=%d, %d terms)"
                % (self.degree, self.endo_degree, len(self.terms)))


def _infer_endo_degree(space, mat):
    r = space.total_dim
    seen = set()
    for row in range(r):
        for col in range(r):
            if not ex.is_zero(ex.as_expr(mat[row][col])):
                seen.add(space.degrees[row] - space.degrees[col])
    if len(seen) > 1:
        raise ValueError("matrix mixes endomorphism degrees %r" % sorted(seen))
    return seen.pop() if seen else 0


def identity_form(chart, space):
    """The identity endomorphism as a 0-form."""
    r = space.total_dim
    mat = [[ex.ONE if i == j else ex.ZERO for j in range(r)] for i in range(r)]
    return HomValuedForm(chart, space, 0, 0, {(): mat})


def scalar_times_identity(chart, space, coeff, indices):
    """coeff * d(indices) times the identity endomorphism."""
    r = space.total_dim
    coeff = ex.as_expr(coeff)
    mat = [[coeff if i == j else ex.ZERO for j in range(r)] for i in range(r)]
    return HomValuedForm(chart, space, len(indices), 0,
                         {tuple(indices): mat})


class ZConnection:
    """Family of i-forms A_i with endomorphism degree 1 - i.

    :param chart: FoliatedChart
    :param space: GradedVectorSpace
    :param terms: dict[int -> HomValuedForm], form degree i, endo 1-i
    """

    def __init__(self, chart, space, terms):
        self.chart = chart
        self.space = space
        clean = {}
        for i, form in terms.items():
            i = int(i)
            if form.degree != i or form.endo_degree != 1 - i:
                raise ValueError("component %d must be an %d-form of "
                                 "endomorphism degree %d" % (i, i, 1 - i))
            if form.chart != chart or form.space != space:
                raise ValueError("component %d on wrong chart or space" % i)
            if not form.is_zero():
                clean[i] = form
        self.terms = clean

    @property
    def max_degree(self):
        return max(self.terms) if self.terms else 0

    def component(self, i):
        if i in self.terms:
            return self.terms[i]
        return HomValuedForm.zero(self.chart, self.space, i, 1 - i)

    def flatness_defect(self):
        """Curvature -dA + A o A, collected by form degree.

        Returns dict[int -> HomValuedForm]; empty dict means flat.
        """
        leaf_dim = self.chart.leaf_dim
        out = {}
        for s in range(0, min(2 * self.max_degree, leaf_dim) + 1):
            acc = HomValuedForm.zero(self.chart, self.space, s, 2 - s)
            if s >= 1 and (s - 1) in self.terms:
                acc = acc + (-(self.terms[s - 1].d()))
            for a in range(0, s + 1):
                b = s - a
                if a in self.terms and b in self.terms:
                    acc = acc + self.terms[a].compose(self.terms[b])
            if not acc.is_zero():
                out[s] = acc
        return out

    def defect_norm(self, points):
        """Largest coefficient-norm bound among curvature components."""
        defect = self.flatness_defect()
        if not defect:
            return 0.0
        return max(form.norm_bound(points) for form in defect.values())

    def shift(self, m=1):
        """Degree shift: space degrees drop by m, A_i picks (-1)^(m(i+1))."""
        space = self.space.shifted(m)
        terms = {}
        for i, form in self.terms.items():
            sign = -1 if (m * (i + 1)) % 2 else 1
            mat_terms = {idx: [[ex.mul(ex.Const(sign), e) for e in row]
                               for row in mat]
                         for idx, mat in form.terms.items()}
            terms[i] = HomValuedForm(self.chart, space, i, 1 - i, mat_terms)
        return ZConnection(self.chart, space, terms)

    def __repr__(self):
        return "ZConnection(degrees=%r)" % sorted(self.terms)


def cone_connection(e_terms, c0, c1):
    """Mapping cone of a morphism e: c0 -> c1 of Z-connections.

    :param e_terms: dict[int -> morphism component of form degree i], each
        component given as dict[index tuple -> (dim1 x dim0) expr matrix];
        a bare matrix is accepted for the 0-form component
    :param c0: source connection (gets shifted by one)
    :param c1: target connection
    :return: ZConnection on shifted-source plus target

    The shifted source block carries the shift twist; the morphism block
    carries the same twist so that a closed morphism between flat inputs
    gives a flat cone.
    """
    if c0.chart != c1.chart:
        raise ValueError("cone across charts")
    chart = c0.chart
    shifted = c0.shift(1)
    d0 = c0.space.total_dim
    d1 = c1.space.total_dim
    r = d0 + d1
    space = GradedVectorSpace(shifted.space.degrees + c1.space.degrees)
    degrees = sorted(set(list(shifted.terms) + list(c1.terms)
                         + [int(i) for i in e_terms]))
    terms = {}
    for i in degrees:
        mat_by_idx = {}

        def add_entry(idx, row, col, value):
            tgt = mat_by_idx.setdefault(idx, _zero_matrix(r))
            tgt[row][col] = ex.add(tgt[row][col], value)

        if i in shifted.terms:
            for idx, mat in shifted.terms[i].terms.items():
                for rr in range(d0):
                    for cc in range(d0):
                        add_entry(idx, rr, cc, mat[rr][cc])
        if i in c1.terms:
            for idx, mat in c1.terms[i].terms.items():
                for rr in range(d1):
                    for cc in range(d1):
                        add_entry(idx, d0 + rr, d0 + cc, mat[rr][cc])
        if i in e_terms:
            sign = -1 if (i + 1) % 2 else 1
            comp = e_terms[i]
            if not isinstance(comp, dict):
                if i != 0:
                    raise ValueError("bare matrix only valid for the "
                                     "0-form morphism component")
                comp = {(): comp}
            for idx, mat in comp.items():
                if len(tuple(idx)) != i:
                    raise ValueError("morphism component %d has index "
                                     "tuple %r" % (i, idx))
                for rr in range(d1):
                    for cc in range(d0):
                        v = ex.as_expr(mat[rr][cc])
                        if sign == -1:
                            v = ex.neg(v)
                        add_entry(tuple(idx), d0 + rr, cc, v)
        if mat_by_idx:
            terms[i] = HomValuedForm(chart, space, i, 1 - i, mat_by_idx)
    return ZConnection(chart, space, terms)
