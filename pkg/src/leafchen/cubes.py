"""Cube-to-simplex machinery: retraction, staircase paths, path surgery.

The retraction sends x in the k-cube to its suffix maxima, landing in the
ordered simplex.  A staircase path for weights w in I^{k-1} (the last
weight is pinned to 1) walks backwards through the anchor points
0 <- w_1 e_1 <- w_1 e_1 + w_2 e_2 <- ..., one cube coordinate per segment
with uniform time per segment.  Composing the two gives the path family
that parametrizes a simplex by families of vertex-to-vertex paths; its
adjoint is a piecewise-linear map from the k-cube (time coordinate first)
onto the simplex.
"""

from __future__ import annotations

import numpy as np


def suffix_max_projection(x):
    """Retraction cube -> ordered simplex, t_i = max(x_i, ..., x_k)."""
    x = np.asarray(x, dtype=float)
    return np.flip(np.maximum.accumulate(np.flip(x, -1), -1), -1)


def staircase_anchors(w):
    """Anchor points 0, w_1 e_1, w_1 e_1 + w_2 e_2, ..., with w_k := 1.

    :param w: k-1 weights
    :return: (k+1, k) array, row j the j-th anchor
    """
    w = np.asarray(w, dtype=float)
    k = w.shape[-1] + 1
    full = np.concatenate([w, [1.0]])
    anchors = np.zeros((k + 1, k))
    for j in range(1, k + 1):
        anchors[j, :j] = full[:j]
    return anchors


def staircase_path(w, times):
    """The backwards staircase path at times in [0, 1].

    Time 0 sits at the full anchor sum, time 1 at the origin; segment j
    (uniform length 1/k) retracts coordinate k-j+1 to zero.
    """
    times = np.asarray(times, dtype=float)
    anchors = staircase_anchors(w)
    k = anchors.shape[1]
    seg = np.clip(np.ceil(times * k).astype(int), 1, k)
    s = times * k - (seg - 1)
    start = anchors[k - seg + 1]
    end = anchors[k - seg]
    return start + s[:, None] * (end - start)


def theta_points(uw):
    """Adjoint cube-to-simplex map, time coordinate first.

    :param uw: (N, k) array of (u, w_1..w_{k-1}) cube points
    :return: (N, k) simplex points theta(w)(u)
    """
    uw = np.asarray(uw, dtype=float)
    n, k = uw.shape
    u = uw[:, 0]
    full = np.concatenate([uw[:, 1:], np.ones((n, 1))], axis=1)
    seg = np.clip(np.ceil(u * k).astype(int), 1, k)
    c = k - seg + 1
    s = u * k - (seg - 1)
    idx = np.arange(1, k + 1)[None, :]
    moving = (1.0 - s)[:, None] * np.take_along_axis(full, c[:, None] - 1, axis=1)
    x = np.where(idx < c[:, None], full,
                 np.where(idx == c[:, None], moving, 0.0))
    return suffix_max_projection(x)


def theta_path_points(w, times):
    """Points of the simplex path theta(w) at the given times."""
    return suffix_max_projection(staircase_path(w, times))


def plateau_warp(i, k, t):
    """Time reparametrization with a flat plateau on [(i-1)/k, i/k].

    Outside the plateau the clock runs at speed k/(k-1); on it the value
    freezes at (i-1)/(k-1).
    """
    t = np.asarray(t, dtype=float)
    lo = (i - 1) / k
    hi = i / k
    before = t * k / (k - 1)
    after = (t * k - 1) / (k - 1)
    flat = (i - 1) / (k - 1)
    return np.where(t <= lo, before, np.where(t >= hi, after, flat))


def omega_reparam(i, k, path):
    """Insert the i-th plateau into a path callable t -> points."""
    def reparametrized(t):
        return path(plateau_warp(i, k, t))
    return reparametrized


def mu_concat(i, k, alpha, beta):
    """Path composition in a k-simplex: back-face part first.

    :param i: front dimension, 1 <= i <= k-1
    :param alpha: path callable into the i-simplex (front factor)
    :param beta: path callable into the (k-i)-simplex (back factor)
    :return: path callable into the k-simplex

    The first k-i segments run the back face embedding of beta, the rest
    the front face embedding of alpha, matching uniform time per segment.
    """
    cut = (k - i) / k

    def composed(t):
        t = np.asarray(t, dtype=float)
        t_beta = np.clip(t / cut, 0.0, 1.0)
        t_alpha = np.clip((t - cut) / (1.0 - cut), 0.0, 1.0)
        pb = np.asarray(beta(t_beta), dtype=float)
        pa = np.asarray(alpha(t_alpha), dtype=float)
        n = pb.shape[0]
        out_b = np.concatenate([np.ones((n, i)), pb], axis=1)
        out_a = np.concatenate([pa, np.zeros((n, k - i))], axis=1)
        return np.where((t <= cut)[:, None], out_b, out_a)

    return composed
