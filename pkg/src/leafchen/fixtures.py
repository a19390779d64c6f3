"""Shared example data: flat connections, charts, and random builders.

Four connection fixtures cover the verification suites: an abelian line,
a determinant-one polynomial gauge transform in 2x2 matrices, a curved
pair of constant noncommuting matrices (negative control), and a graded
two-term complex whose flatness needs all three component equations.
Random builders produce leafwise simplex maps, forms, and words with a
caller-supplied generator so every suite is reproducible from its seed.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import expressions as ex
from .bundles import GradedVectorSpace, HomValuedForm, ZConnection
from .charts import FoliatedChart, LeafForm
from .simplex import SmoothSimplexMap, affine_simplex


def chart_line():
    return FoliatedChart(1, 0)


def chart_plane():
    return FoliatedChart(2, 0)


def chart_foliated(dim=3, codim=1):
    return FoliatedChart(dim, codim)


def abelian_line(c=1):
    """Connection c * dx1 on the trivial line bundle over R^1."""
    chart = chart_line()
    space = GradedVectorSpace((0,))
    a1 = HomValuedForm(chart, space, 1, 0, {(1,): [[ex.Const(c)]]})
    return ZConnection(chart, space, {1: a1})


def gauge_matrix_exprs():
    """The polynomial gauge g = [[1 + x1 x2, x1], [x2, 1]], det 1."""
    x1, x2 = ex.coords(["x1", "x2"])
    return [[ex.add(ex.ONE, ex.mul(x1, x2)), x1], [x2, ex.ONE]]


def polynomial_flat_2x2():
    """Flat connection (dg) g^{-1} for the polynomial gauge above.

    Written out: dx1 * [[0,1],[0,0]] + dx2 * [[x1, -x1^2], [1, -x1]].
    Parallel transport along any leaf path from p to q is
    g(q) g(p)^{-1}, which tests integrate against.
    """
    chart = chart_plane()
    space = GradedVectorSpace((0, 0))
    x1 = ex.Coord("x1")
    a = HomValuedForm(chart, space, 1, 0, {
        (1,): [[ex.ZERO, ex.ONE], [ex.ZERO, ex.ZERO]],
        (2,): [[x1, ex.neg(ex.power(x1, 2))], [ex.ONE, ex.neg(x1)]],
    })
    return ZConnection(chart, space, {1: a})


def gauge_value(points):
    """Evaluate the polynomial gauge at (N, 2) points, returns (N, 2, 2)."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    out = np.empty((n, 2, 2))
    out[:, 0, 0] = 1.0 + points[:, 0] * points[:, 1]
    out[:, 0, 1] = points[:, 0]
    out[:, 1, 0] = points[:, 1]
    out[:, 1, 1] = 1.0
    return out


def curved_pair():
    """Constant noncommuting connection; curvature [N1, N2] dx1^dx2 != 0."""
    chart = chart_plane()
    space = GradedVectorSpace((0, 0))
    a = HomValuedForm(chart, space, 1, 0, {
        (1,): [[ex.ZERO, ex.ONE], [ex.ZERO, ex.ZERO]],
        (2,): [[ex.ZERO, ex.ZERO], [ex.ONE, ex.ZERO]],
    })
    return ZConnection(chart, space, {1: a})


def graded_flat():
    """Flat Z-connection on a graded rank-2 bundle with three components.

    Degrees (0, 1); A_0 is the lower shift, A_1 = x1 x2 dx2 * Id, and
    A_2 = x2 [[0,1],[0,0]] dx1^dx2.  Flatness mixes all three:
    the degree-1 equation cancels through the composition sign, the
    degree-2 equation balances dA_1 against the anticommutator of A_0
    with A_2.
    """
    chart = chart_plane()
    space = GradedVectorSpace((0, 1))
    x1, x2 = ex.coords(["x1", "x2"])
    a0 = HomValuedForm(chart, space, 0, 1, {
        (): [[ex.ZERO, ex.ZERO], [ex.ONE, ex.ZERO]],
    })
    a1 = HomValuedForm(chart, space, 1, 0, {
        (2,): [[ex.mul(x1, x2), ex.ZERO], [ex.ZERO, ex.mul(x1, x2)]],
    })
    a2 = HomValuedForm(chart, space, 2, -1, {
        (1, 2): [[ex.ZERO, x2], [ex.ZERO, ex.ZERO]],
    })
    return ZConnection(chart, space, {0: a0, 1: a1, 2: a2})


def three_term_flat():
    """Flat connection on a three-degree complex with nonzero psi_3.

    On the two-term fixture every word with two copies of A_2 dies
    because the single off-diagonal block squares to zero.  Here the
    degrees are (0, 1, 2) and A_2 carries both lowering blocks, so
    (A_2, A_2) words compose through the middle degree and the level-3
    holonomy is nonzero; with A_0 nonzero as well, the level-3
    Maurer-Cartan identity is sensitive to the k = 3 holonomy sign.
    Flatness: the degree-1 equation cancels through the composition
    sign, the degree-2 one balances dA_1 = (E11 + E22) dx1^dx2 against
    A_0 A_2 + A_2 A_0 = (E22 + E11) dx1^dx2, and every higher wedge
    repeats dx2.
    """
    chart = chart_foliated(3, 0)
    space = GradedVectorSpace((0, 1, 2))
    x1 = ex.coords(["x1"])[0]
    z = ex.ZERO
    a0 = HomValuedForm(chart, space, 0, 1, {
        (): [[z, z, z], [z, z, z], [z, ex.ONE, z]],
    })
    a1 = HomValuedForm(chart, space, 1, 0, {
        (2,): [[z, z, z], [z, x1, z], [z, z, x1]],
    })
    a2 = HomValuedForm(chart, space, 2, -1, {
        (1, 2): [[z, ex.ONE, z], [z, z, ex.ONE], [z, z, z]],
    })
    return ZConnection(chart, space, {0: a0, 1: a1, 2: a2})


def connection_fixtures():
    """Name -> flat connection used across the verification suites."""
    return {
        "abelian": abelian_line(Fraction(3, 4)),
        "polynomial": polynomial_flat_2x2(),
        "graded": graded_flat(),
    }


def random_polynomial(rng, names, degree=2, terms=3, scale=2):
    """Random polynomial with small rational coefficients."""
    total = ex.ZERO
    for _ in range(terms):
        num = int(rng.integers(-scale, scale + 1))
        if num == 0:
            num = 1
        coeff = ex.Const(Fraction(num, int(rng.integers(1, 4))))
        mono = coeff
        if names:
            for _ in range(int(rng.integers(0, degree + 1))):
                name = names[int(rng.integers(0, len(names)))]
                mono = ex.mul(mono, ex.Coord(name))
        total = ex.add(total, mono)
    return total


def random_leafwise_simplex(chart, k, rng, degree=2, terms=3):
    """Random polynomial simplex map with constant transverse part.

    Every leaf component carries a guaranteed linear term so the map
    never collapses onto a coordinate slice, which would make whole
    verification instances vacuously zero.
    """
    names = ["t%d" % (i + 1) for i in range(k)]
    comps = []
    leaf_seen = 0
    for j in range(chart.dim):
        if chart.is_leaf_index(j + 1):
            poly = random_polynomial(rng, names, degree, terms)
            if names:
                # denominator 5 cannot be produced (or canceled) by the
                # random terms, whose coefficients have denominator 1-3
                t = ex.coords([names[leaf_seen % k]])[0]
                poly = ex.add(poly, ex.mul(ex.Const(Fraction(7, 5)), t))
            comps.append(poly)
            leaf_seen += 1
        else:
            comps.append(ex.Const(Fraction(int(rng.integers(-2, 3)), 2)))
    return SmoothSimplexMap(chart, k, comps)


def random_affine_simplex(chart, k, rng, scale=1.0):
    """Random affine simplex with constant transverse coordinates."""
    verts = rng.uniform(-scale, scale, size=(k + 1, chart.dim))
    verts[:, chart.leaf_dim:] = verts[0, chart.leaf_dim:]
    return affine_simplex(chart, verts)


def random_leaf_form(chart, q, rng, degree=2, terms=2):
    """Random leafwise q-form with polynomial coefficients."""
    from itertools import combinations
    names = list(chart.coord_names)
    out = {}
    for idx in combinations(chart.leaf_indices, q):
        if rng.random() < 0.25 and q > 0:
            continue
        out[idx] = random_polynomial(rng, names, degree, terms)
    if not out:
        idx = tuple(chart.leaf_indices[:q])
        out[idx] = random_polynomial(rng, names, degree, terms)
    return LeafForm(chart, q, out)


def random_scalar_word(chart, rng, length=None, max_degree=None):
    """Random word of leafwise forms with positive degrees."""
    if length is None:
        length = int(rng.integers(1, 4))
    if max_degree is None:
        max_degree = chart.leaf_dim
    word = []
    for _ in range(length):
        q = int(rng.integers(1, max_degree + 1))
        word.append(random_leaf_form(chart, q, rng))
    return tuple(word)


def random_hom_form(chart, space, q, endo_degree, rng, degree=2):
    """Random endomorphism-valued q-form of the given endomorphism degree."""
    from itertools import combinations
    r = space.total_dim
    names = list(chart.coord_names)
    terms = {}
    for idx in combinations(chart.leaf_indices, q):
        mat = [[ex.ZERO] * r for _ in range(r)]
        hit = False
        for row in range(r):
            for col in range(r):
                if space.degrees[row] - space.degrees[col] != endo_degree:
                    continue
                mat[row][col] = random_polynomial(rng, names, degree, 2)
                hit = True
        if hit:
            terms[idx] = mat
    return HomValuedForm(chart, space, q, endo_degree, terms)
