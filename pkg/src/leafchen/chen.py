"""Iterated integrals of leafwise forms over path families.

A word of forms is integrated over a family of paths by expanding which
parameter directions feed which factor (ordered partitions with shuffle
signs), evaluating each factor on the time vector plus its parameter
vectors, and running the nested time integrals as a spectral recursion
J_i(t) = int_0^t g_i J_{i+1}.  Factor 1 sits at the latest time and, for
endomorphism values, leftmost in the product.  The suspension sign from
the definition cancels the differential-reordering sign for scalar
factors; what survives for graded endomorphism factors is the word sign
(-1)^(sum_{i<j} e_i + p_i e_j) with p the form degree and e the
endomorphism degree.
"""

from __future__ import annotations

import itertools

import numpy as np

from .quadrature import TimeGrid


def total_degree(form):
    return form.degree + getattr(form, "endo_degree", 0)


def spade_sign(word):
    """(-1)^spade, spade = sum (T(a_i) - 1)(k - i) over i < k."""
    k = len(word)
    exponent = sum((total_degree(a) - 1) * (k - (i + 1))
                   for i, a in enumerate(word[:-1]))
    return -1 if exponent % 2 else 1


def word_sign(word):
    """Residual Koszul sign of a graded endomorphism word."""
    exponent = 0
    for i in range(len(word)):
        for j in range(i + 1, len(word)):
            ei = getattr(word[i], "endo_degree", 0)
            ej = getattr(word[j], "endo_degree", 0)
            exponent += ei + word[i].degree * ej
    return -1 if exponent % 2 else 1


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def ordered_partitions(block_sizes, total):
    """All splits of (1..total) into ordered blocks of the given sizes.

    Yields (blocks, sign) with sign the parity of the concatenated
    arrangement against the identity.
    """
    indices = tuple(range(1, total + 1))

    def rec(remaining, sizes):
        if not sizes:
            yield []
            return
        for block in itertools.combinations(remaining, sizes[0]):
            rest = tuple(b for b in remaining if b not in block)
            for tail in rec(rest, sizes[1:]):
                yield [block] + tail

    for blocks in rec(indices, list(block_sizes)):
        flat = [b for block in blocks for b in block]
        yield blocks, _perm_sign(flat)


def _word_zero(word):
    space = getattr(word[0], "space", None)
    if space is None:
        return 0.0
    r = space.total_dim
    return np.zeros((r, r))


def _is_matrix(vals):
    return vals.ndim == 3


def _cum(grid, arr):
    """Cumulative integral along the time axis (axis 1)."""
    moved = np.moveaxis(arr, 1, -1)
    return np.moveaxis(grid.cumulative(moved), -1, 1)


def _tot(grid, arr):
    """Total time integral, removing axis 1."""
    return grid.total(np.moveaxis(arr, 1, -1))


def chen_eval(word, family, rule, warp=None, reverse_order=False):
    """Iterated integral of a word over a path family.

    :param word: form factors, scalar or endomorphism valued
    :param family: ChartPathFamily or ChartPath
    :param rule: QuadratureRule
    :param warp: optional (phi, dphi) time reparametrization per piece
    :param reverse_order: multiply endomorphism factors in reversed order
    :return: float for scalar words, (r, r) array for endomorphism words

    Returns exact 0 when the parameter-degree balance fails or any factor
    has degree 0.
    """
    if not word:
        raise ValueError("empty word")
    degs = [f.degree for f in word]
    if any(p == 0 for p in degs):
        return _word_zero(word)
    D = sum(p - 1 for p in degs)
    if D != family.D:
        return _word_zero(word)

    sizes = [p - 1 for p in degs]
    partitions = list(ordered_partitions(sizes, D))
    result = None
    for cell in family.cells:
        W, wts = cell.param_nodes(rule)
        P = len(cell.pieces)
        grid = TimeGrid([i / P for i in range(P + 1)], rule)
        nodes_per_piece = grid.nodes.reshape(P, -1)
        pos_parts, vel_parts, dw_parts = [], [], []
        for pi in range(P):
            s = nodes_per_piece[pi] * P - pi
            pos, vel, dw = family.eval_piece(cell, pi, W, s, warp=warp)
            pos_parts.append(pos)
            vel_parts.append(vel * P)
            dw_parts.append(dw)
        pos = np.concatenate(pos_parts, axis=1)
        vel = np.concatenate(vel_parts, axis=1)
        dw = np.concatenate(dw_parts, axis=1)
        nw, nt, n = pos.shape
        flat_pos = pos.reshape(-1, n)

        for blocks, sign in partitions:
            gs = []
            for i, form in enumerate(word):
                vectors = [vel.reshape(-1, n)]
                vectors.extend(dw[:, :, b - 1, :].reshape(-1, n)
                               for b in blocks[i])
                vals = form.apply(flat_pos, vectors)
                gs.append(vals.reshape((nw, nt) + vals.shape[1:]))
            if reverse_order:
                gs = gs[::-1]
            J = None
            for g in reversed(gs[1:]):
                H = g if J is None else _mul(g, J)
                J = _cum(grid, H)
            top = gs[0] if J is None else _mul(gs[0], J)
            time_val = _tot(grid, top)  # (NW, ...) parameter-indexed
            cell_val = np.tensordot(wts, time_val, axes=([0], [0]))
            contrib = sign * cell_val
            result = contrib if result is None else result + contrib
    if result is None:
        return _word_zero(word)
    result = result * word_sign(word)
    if np.ndim(result) == 0:
        return float(result)
    return result


def _mul(g, J):
    if g.ndim == 2:
        return g * J
    return np.matmul(g, J)


def chen_eval_adaptive(word, family, rule, tol=1e-8, max_refine=2, warp=None):
    """chen_eval with dyadic refinement until two depths agree.

    Returns (value, disagreement) where disagreement compares the last two
    refinement levels.
    """
    current = chen_eval(word, family, rule, warp=warp)
    disagreement = np.inf
    for _ in range(max_refine):
        rule = rule.refined()
        finer = chen_eval(word, family, rule, warp=warp)
        disagreement = float(np.max(np.abs(np.asarray(finer) - np.asarray(current))))
        current = finer
        if disagreement <= tol:
            break
    return current, disagreement


def bar_differential(word):
    """Formal sum D-bar of a word: differential and merge terms.

    Returns a list of (sign, word) pairs following the suspension-degree
    sign rule; the differential term carries the inner minus.
    """
    out = []
    susp = [total_degree(a) - 1 for a in word]
    for i in range(len(word)):
        sign = -1 if sum(susp[:i]) % 2 else 1
        da = word[i].d()
        new = list(word)
        new[i] = -da
        out.append((sign, new))
    for i in range(len(word) - 1):
        sign = -1 if sum(susp[:i + 1]) % 2 else 1
        new = list(word[:i]) + [_product(word[i], word[i + 1])] + list(word[i + 2:])
        out.append((sign, new))
    return out


def _product(a, b):
    if hasattr(a, "compose"):
        return a.compose(b)
    return a.wedge(b)


def smoothstep_warp():
    """A smooth monotone clock fixing the endpoints, with flat ends."""
    def phi(s):
        return s * s * (3.0 - 2.0 * s)

    def dphi(s):
        return 6.0 * s * (1.0 - s)

    return phi, dphi


def power_warp(exponent):
    def phi(s):
        return s ** exponent

    def dphi(s):
        return exponent * s ** (exponent - 1.0)

    return phi, dphi


def reparam_invariance_defect(word, family, rule, warp):
    """Absolute gap between the warped and unwarped evaluations."""
    plain = chen_eval(word, family, rule)
    warped = chen_eval(word, family, rule, warp=warp)
    return float(np.max(np.abs(np.asarray(plain) - np.asarray(warped))))
