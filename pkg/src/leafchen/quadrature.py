"""Gauss-Legendre quadrature on cubes, simplices, and time grids.

The ordered simplex {1 >= t_1 >= ... >= t_k >= 0} is integrated through
the substitution t_i = u_1 u_2 ... u_i with Jacobian prod u_j^{k-j}, which
maps the unit cube onto it and keeps Gauss accuracy for smooth integrands.
Time grids support spectral cumulative integration: per panel, a matrix
exact on polynomials below the node count maps sampled values of g to
sampled values of t -> int_0^t g.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np


class QuadratureRule:
    """Gauss order per panel and dyadic subdivision depth.

    :param order: Gauss-Legendre points per panel
    :param depth: each unit interval is split into 2**depth panels
    """

    def __init__(self, order=8, depth=2):
        if order < 1:
            raise ValueError("order must be positive")
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.order = int(order)
        self.depth = int(depth)

    @property
    def panels(self):
        return 2 ** self.depth

    def refined(self):
        return QuadratureRule(self.order, self.depth + 1)

    def __repr__(self):
        return "QuadratureRule(order=%d, depth=%d)" % (self.order, self.depth)


@functools.lru_cache(maxsize=None)
def _leggauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@functools.lru_cache(maxsize=None)
def _axis_rule(order, depth):
    """Composite nodes/weights on [0, 1]."""
    x, w = _leggauss(order)
    panels = 2 ** depth
    h = 1.0 / panels
    nodes = np.concatenate([(x + 1.0) * (h / 2.0) + p * h for p in range(panels)])
    weights = np.tile(w * (h / 2.0), panels)
    return nodes, weights


def axis_nodes(rule, a=0.0, b=1.0):
    """Composite Gauss nodes and weights on [a, b]."""
    nodes, weights = _axis_rule(rule.order, rule.depth)
    return a + (b - a) * nodes, (b - a) * weights


def cube_nodes(k, rule):
    """Tensor grid on the unit k-cube: points (N, k), weights (N,)."""
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    nodes, weights = _axis_rule(rule.order, rule.depth)
    grids = np.meshgrid(*([nodes] * k), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=-1)
    wts = functools.reduce(np.multiply.outer, [weights] * k).reshape(-1)
    return pts, wts


def simplex_nodes(k, rule):
    """Nodes and weights on the ordered simplex, with the mapping Jacobian."""
    pts, wts = cube_nodes(k, rule)
    if k == 0:
        return pts, wts
    t = np.cumprod(pts, axis=1)
    jac = np.ones(len(pts))
    for j in range(k - 1):
        jac *= pts[:, j] ** (k - 1 - j)
    return t, wts * jac


def integrate_cube(f, k, rule):
    pts, wts = cube_nodes(k, rule)
    return float(np.dot(wts, np.asarray(f(pts), dtype=float)))


def integrate_simplex(f, k, rule):
    """Integral of f over the ordered k-simplex."""
    pts, wts = simplex_nodes(k, rule)
    return float(np.dot(wts, np.asarray(f(pts), dtype=float)))


def integrate_cube_piecewise(f, k, rule):
    """Integral over the k-cube of a function smooth on each ordering cell.

    Splits the cube along the hyperplanes x_i = x_j and integrates every
    ordering cell with the simplex rule.
    """
    if k == 0:
        return integrate_cube(f, k, rule)
    pts, wts = simplex_nodes(k, rule)
    total = 0.0
    for perm in itertools.permutations(range(k)):
        cell_pts = np.empty_like(pts)
        cell_pts[:, list(perm)] = pts
        total += float(np.dot(wts, np.asarray(f(cell_pts), dtype=float)))
    return total


@functools.lru_cache(maxsize=None)
def cumulative_matrix(order):
    """Matrix Q with (Qg)_i ~ int_{-1}^{x_i} g, exact below the node count.

    Built by integrating the Legendre interpolant: coefficients from the
    inverse Vandermonde, antiderivatives from the three-term recurrence
    int_{-1}^x P_l = (P_{l+1} - P_{l-1})/(2l+1).
    """
    x, _ = _leggauss(order)
    V = np.polynomial.legendre.legvander(x, order - 1)
    Vext = np.polynomial.legendre.legvander(x, order)
    B = np.zeros((order, order))
    B[:, 0] = x + 1.0
    for l in range(1, order):
        B[:, l] = (Vext[:, l + 1] - Vext[:, l - 1]) / (2 * l + 1)
    return B @ np.linalg.inv(V)


class TimeGrid:
    """Composite Gauss grid on [0, 1] with cumulative integration.

    :param breakpoints: increasing sequence 0 = b_0 < ... < b_M = 1 marking
        smoothness boundaries; each span is further split per the rule
    :param rule: QuadratureRule
    """

    def __init__(self, breakpoints, rule):
        bp = [float(b) for b in breakpoints]
        if bp[0] != 0.0 or bp[-1] != 1.0 or any(b1 > b2 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must increase from 0 to 1")
        self.rule = rule
        edges = []
        for a, b in zip(bp, bp[1:]):
            h = (b - a) / rule.panels
            edges.extend((a + i * h, a + (i + 1) * h) for i in range(rule.panels))
        self.panel_edges = edges
        x, w = _leggauss(rule.order)
        nodes, weights, slices = [], [], []
        pos = 0
        for a, b in edges:
            half = (b - a) / 2.0
            nodes.append(a + (x + 1.0) * half)
            weights.append(w * half)
            slices.append(slice(pos, pos + rule.order))
            pos += rule.order
        self.nodes = np.concatenate(nodes)
        self.weights = np.concatenate(weights)
        self.panel_slices = slices

    def total(self, vals):
        """int_0^1 of node-sampled values; vals shape (..., NT)."""
        return np.tensordot(np.asarray(vals), self.weights, axes=([-1], [0]))

    def cumulative(self, vals):
        """Node samples of t -> int_0^t vals, shape preserved."""
        vals = np.asarray(vals)
        out = np.empty_like(vals, dtype=float)
        Q = cumulative_matrix(self.rule.order)
        carry = np.zeros(vals.shape[:-1])
        for (a, b), sl in zip(self.panel_edges, self.panel_slices):
            half = (b - a) / 2.0
            chunk = vals[..., sl]
            out[..., sl] = carry[..., None] + np.tensordot(chunk, Q * half,
                                                           axes=([-1], [1]))
            carry = carry + np.tensordot(chunk, self.weights[sl],
                                         axes=([-1], [0]))
        return out
