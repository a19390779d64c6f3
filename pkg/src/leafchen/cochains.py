"""Smooth singular cochains on foliated charts.

A k-cochain is a pure evaluator on smooth k-simplex maps, scalar or
matrix valued.  The differential restores the alternating face signs,
the cup product is the front-face/back-face one, and the contracting
cone toward the leaf origin gives the homotopy operator whose residual
test realizes the leafwise Poincare lemma.

The Maurer-Cartan residual for matrix systems keeps a sign variant
toggle: the verbatim reading of the inner endomorphism term and the
graded-commutator reading differ by (-1)^k, and the flat-holonomy suite
selects the one that vanishes (recorded in reports).
"""

from __future__ import annotations

import numpy as np

from .simplex import ConeMap, constant_map, face, front_face, back_face, vertex_of


class Cochain:
    """Degree-k evaluator on smooth k-simplex maps.

    :param degree: simplex dimension consumed
    :param evaluator: map from simplex map to float or (r, r) array
    :param endo_degree: grading of matrix values, if meaningful
    """

    def __init__(self, degree, evaluator, endo_degree=None):
        self.degree = int(degree)
        self.evaluator = evaluator
        self.endo_degree = endo_degree

    def __call__(self, sigma):
        if sigma.dim != self.degree:
            raise ValueError("cochain of degree %d applied to a %d-simplex"
                             % (self.degree, sigma.dim))
        return self.evaluator(sigma)


def constant_cochain(degree, value):
    return Cochain(degree, lambda sigma: value)


def unit_cochain():
    """The constant-1 0-cochain, the cup unit."""
    return constant_cochain(0, 1.0)


def delta(phi):
    """Simplicial differential with alternating face signs."""
    k = phi.degree

    def ev(sigma):
        total = None
        for i in range(k + 2):
            val = phi(face(sigma, i))
            if i % 2:
                val = -val
            total = val if total is None else total + val
        return total

    return Cochain(k + 1, ev, endo_degree=phi.endo_degree)


def _compose_values(a, b):
    if np.ndim(a) == 2 and np.ndim(b) == 2:
        return np.matmul(a, b)
    return a * b


def cup(phi, psi):
    """Front-face/back-face cup product."""
    i, j = phi.degree, psi.degree

    def ev(sigma):
        left = phi(front_face(sigma, i))
        right = psi(back_face(sigma, j))
        return _compose_values(left, right)

    endo = None
    if phi.endo_degree is not None and psi.endo_degree is not None:
        endo = phi.endo_degree + psi.endo_degree
    return Cochain(i + j, ev, endo_degree=endo)


class InfinityLocalSystem:
    """Fiber differential plus a family of transport cochains.

    :param space: GradedVectorSpace
    :param f0: HomValuedForm of form degree 0 and endomorphism degree +1
        (may vary over the chart), or None for an ungraded bundle
    :param components: dict[int -> Cochain], degree k, endo degree 1-k
    """

    def __init__(self, space, f0, components):
        self.space = space
        self.f0 = f0
        if f0 is not None and (f0.degree != 0 or f0.endo_degree != 1):
            raise ValueError("fiber differential must be a 0-form of "
                             "endomorphism degree +1")
        self.components = {int(k): c for k, c in components.items()}
        for k, c in self.components.items():
            if c.degree != k:
                raise ValueError("component %d has degree %d" % (k, c.degree))

    def component(self, k):
        if k in self.components:
            return self.components[k]
        r = self.space.total_dim
        return Cochain(k, lambda sigma: np.zeros((r, r)), endo_degree=1 - k)

    def f0_at(self, point):
        if self.f0 is None:
            return np.zeros((self.space.total_dim, self.space.total_dim))
        return self.f0.value_at(point)

    def f0_squared_norm(self, points):
        """Largest norm of F0(x)^2 over sample points; 0 means a complex."""
        if self.f0 is None:
            return 0.0
        sq = self.f0.compose(self.f0)
        return sq.norm_bound(np.asarray(points, dtype=float))


MC_VARIANTS = ("graded_commutator", "verbatim")


def _mc_inner_sign(k, variant):
    if variant == "verbatim":
        return -1.0 if k % 2 else 1.0
    if variant == "graded_commutator":
        return 1.0 if k % 2 else -1.0
    raise ValueError("unknown variant %r" % (variant,))


def hat_delta(F, k, variant="graded_commutator"):
    """Differential part of the level-k Maurer-Cartan combination.

    Fiber-differential terms evaluated at the first and last vertex
    bracket the inner-face alternating sum.
    """

    def ev(sigma):
        fk = F.component(k)(sigma)
        e_left = F.f0_at(vertex_of(sigma, 0))
        e_right = F.f0_at(vertex_of(sigma, k))
        s = _mc_inner_sign(k, variant)
        total = e_left @ fk - s * (fk @ e_right)
        lower = F.component(k - 1)
        for i in range(1, k):
            val = lower(face(sigma, i))
            total = total - ((-val) if i % 2 else val)
        return total

    return Cochain(k, ev, endo_degree=2 - k)


def mc_residual(F, sigma, variant="graded_commutator"):
    """Level-k Maurer-Cartan residual of an infinity-local-system candidate.

    Zero (to tolerance) at every level exactly when the data is a genuine
    infinity local system.
    """
    k = sigma.dim
    if k < 1:
        raise ValueError("Maurer-Cartan levels start at k = 1")
    total = hat_delta(F, k, variant=variant)(sigma)
    for i in range(1, k):
        val = F.component(i)(front_face(sigma, i)) @ \
            F.component(k - i)(back_face(sigma, k - i))
        total = total + ((-val) if i % 2 else val)
    return total


def normalized_check(phi, base_maps, tol=1e-9):
    """True iff phi vanishes on every degeneracy of the sampled maps.

    :param phi: Cochain of degree k >= 1
    :param base_maps: (k-1)-simplex maps to degenerate
    """
    k = phi.degree
    if k < 1:
        raise ValueError("normalization concerns positive-degree cochains")
    for m in base_maps:
        if m.dim != k - 1:
            raise ValueError("need (k-1)-simplices to degenerate")
        for i in range(1, k + 1):
            val = phi(degenerate_map(m, i))
            if np.max(np.abs(np.asarray(val))) > tol:
                return False
    return True


def degenerate_map(m, i):
    from .simplex import degenerate
    return degenerate(m, i)


def cone_adjoint(phi):
    """Pullback of a cochain along the leaf cone operator."""

    def ev(sigma):
        return phi(ConeMap(sigma))

    return Cochain(phi.degree - 1, ev, endo_degree=phi.endo_degree)


def homotopy_L_residual(phi, sigma, exponent="k"):
    """Residual of the contracting-homotopy identity at sigma.

    Evaluates sign * ((delta L - L delta) phi)(sigma) - phi(sigma) where
    L is the cone adjoint and sign is (-1)^k for exponent "k" (the
    reading under which the identity holds with our face conventions) or
    (-1)^(k+1) for exponent "k+1".

    For k = 0 the missing L on 0-cochains is the augmentation through
    the cone apex, making the identity hold there too.
    """
    k = phi.degree
    if sigma.dim != k:
        raise ValueError("simplex dimension must match cochain degree")
    if exponent == "k":
        sign = -1.0 if k % 2 else 1.0
    elif exponent == "k+1":
        sign = 1.0 if k % 2 else -1.0
    else:
        raise ValueError("exponent must be 'k' or 'k+1'")

    cone = ConeMap(sigma)
    if k == 0:
        delta_L = phi(face(cone, 0))
    else:
        L_phi = cone_adjoint(phi)
        delta_L = delta(L_phi)(sigma)
    L_delta = delta(phi)(cone)
    residual = sign * (delta_L - L_delta) - phi(sigma)
    if np.ndim(residual) == 0:
        return float(residual)
    return residual
