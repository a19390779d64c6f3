"""Piecewise-smooth families of paths for iterated integration.

A family over parameters w in I^D is stored as cells, one per ordering of
the parameters; on a cell the family is a list of time pieces on each of
which every simplex coordinate is either a constant, one of the w's, or
the single moving coordinate sliding between two such levels.  Values,
time derivatives, and parameter derivatives are exact on every piece, so
the only numerical error anywhere downstream is quadrature truncation.

Level specs: ("const", v) or ("w", b) with b a 1-based parameter index.
"""

from __future__ import annotations

import numpy as np

from . import quadrature


def _spec_values(spec, W):
    kind, val = spec
    n = W.shape[0]
    if kind == "const":
        return np.full(n, float(val))
    return W[:, val - 1].astype(float)


def _spec_wgrad(spec, b):
    return 1.0 if spec == ("w", b) else 0.0


class PathPiece:
    """One smooth piece: coordinate specs plus the moving level interval.

    :param coord_specs: per simplex coordinate, ("const", v), ("w", b), or
        ("move",) for the sliding coordinate(s)
    :param hi: level spec where the sliding coordinate starts
    :param lo: level spec where it ends
    """

    def __init__(self, coord_specs, hi, lo):
        self.coord_specs = list(coord_specs)
        self.hi = hi
        self.lo = lo

    def eval(self, W, s, D, warp=None):
        """Evaluate on the parameter/time grid.

        :param W: (NW, D) parameter points
        :param s: (NS,) piece-local times in [0, 1]
        :param warp: optional (phi, dphi) callables reparametrizing s
        :return: t (NW, NS, k), dt_ds (NW, NS, k), dt_dw (NW, NS, D, k)
        """
        W = np.asarray(W, dtype=float)
        s = np.asarray(s, dtype=float)
        nw, ns = W.shape[0], s.shape[0]
        k = len(self.coord_specs)
        if warp is None:
            phi, dphi = s, np.ones_like(s)
        else:
            phi, dphi = warp[0](s), warp[1](s)
        hi_v = _spec_values(self.hi, W)
        lo_v = _spec_values(self.lo, W)
        span = lo_v - hi_v
        x = hi_v[:, None] + phi[None, :] * span[:, None]
        dx_ds = span[:, None] * dphi[None, :]

        t = np.empty((nw, ns, k))
        dt_ds = np.zeros((nw, ns, k))
        dt_dw = np.zeros((nw, ns, D, k))
        for a, spec in enumerate(self.coord_specs):
            if spec[0] == "move":
                t[:, :, a] = x
                dt_ds[:, :, a] = dx_ds
                for b in range(1, D + 1):
                    ghi = _spec_wgrad(self.hi, b)
                    glo = _spec_wgrad(self.lo, b)
                    if ghi or glo:
                        dt_dw[:, :, b - 1, a] = ghi + phi[None, :] * (glo - ghi)
            else:
                t[:, :, a] = _spec_values(spec, W)[:, None]
                if spec[0] == "w":
                    dt_dw[:, :, spec[1] - 1, a] = 1.0
        return t, dt_ds, dt_dw


class FamilyCell:
    """Ordering cell of the parameter cube with its time pieces.

    :param D: parameter dimension
    :param order: parameter indices sorted by decreasing value on the cell
    :param pieces: PathPiece list in path-time order
    """

    def __init__(self, D, order, pieces):
        self.D = D
        self.order = tuple(order)
        self.pieces = list(pieces)

    def param_nodes(self, rule):
        """Quadrature points (NW, D) and weights on the ordering cell."""
        if self.D == 0:
            return np.zeros((1, 0)), np.ones(1)
        u, wts = quadrature.simplex_nodes(self.D, rule)
        W = np.empty_like(u)
        for pos, b in enumerate(self.order):
            W[:, b - 1] = u[:, pos]
        return W, wts


def _require_leafwise(sigma, samples=9, tol=1e-12):
    """Reject simplex maps whose transverse coordinates vary."""
    chart = sigma.chart
    if chart.codim == 0 or sigma.dim == 0:
        return
    rng = np.random.default_rng(7)
    T = rng.uniform(0.05, 0.95, size=(samples, sigma.dim))
    T.sort(axis=1)
    jac = sigma.jacobian(T[:, ::-1])
    worst = float(np.max(np.abs(jac[:, chart.leaf_dim:, :])))
    if worst > tol:
        raise ValueError("simplex map is not leafwise; transverse "
                         "derivative reaches %.3e" % worst)


def _value_rank(spec, rank):
    """Totally order level specs on a cell; smaller tuple = larger value."""
    kind, val = spec
    if kind == "const":
        return (0,) if val >= 1.0 else (2,)
    return (1, rank[val])


def _theta_cell(k, order):
    """Pieces of the staircase family on one ordering cell."""
    rank = {b: pos for pos, b in enumerate(order)}
    pieces = []
    for j in range(1, k + 1):
        c = k - j + 1
        start = ("w", c) if c <= k - 1 else ("const", 1.0)
        levels = []
        for a in range(1, c):
            candidates = range(a, c)
            m = min(candidates, key=lambda b: rank[b])
            levels.append(("w", m))
        crossed = []
        for spec in levels:
            if _value_rank(spec, rank) > _value_rank(start, rank):
                if spec not in crossed:
                    crossed.append(spec)
        crossed.sort(key=lambda sp: _value_rank(sp, rank))
        boundaries = [start] + crossed + [("const", 0.0)]
        for hi, lo in zip(boundaries, boundaries[1:]):
            specs = []
            for a in range(1, c):
                m_spec = levels[a - 1]
                if _value_rank(m_spec, rank) <= _value_rank(hi, rank):
                    specs.append(m_spec)
                else:
                    specs.append(("move", None))
            specs.append(("move", None))
            specs.extend(("const", 0.0) for _ in range(c + 1, k + 1))
            pieces.append(PathPiece(specs, hi, lo))
    return pieces


def theta_simplex_family(k):
    """The staircase path family of the k-simplex, one cell per ordering."""
    import itertools
    D = k - 1
    cells = []
    if D == 0:
        cells.append(FamilyCell(0, (), _theta_cell(k, ())))
    else:
        for perm in itertools.permutations(range(1, D + 1)):
            cells.append(FamilyCell(D, perm, _theta_cell(k, perm)))
    return SimplexPathFamily(k, cells)


class SimplexPathFamily:
    """Family of piecewise-linear paths in the k-simplex."""

    def __init__(self, k, cells):
        self.k = k
        self.D = cells[0].D if cells else 0
        self.cells = cells


class ChartPathFamily:
    """A simplex path family pushed into a chart along a simplex map."""

    def __init__(self, simplex_family, sigma):
        if sigma.dim != simplex_family.k:
            raise ValueError("simplex map dimension mismatch")
        _require_leafwise(sigma)
        self.base = simplex_family
        self.sigma = sigma
        self.D = simplex_family.D
        self.chart = sigma.chart

    @property
    def cells(self):
        return self.base.cells

    def eval_piece(self, cell, piece_idx, W, s, warp=None):
        """Positions, piece-time velocities, and parameter derivatives.

        Returns pos (NW, NS, n), vel (NW, NS, n), dw (NW, NS, D, n).
        """
        piece = cell.pieces[piece_idx]
        t, dt_ds, dt_dw = piece.eval(W, s, self.D, warp=warp)
        nw, ns, k = t.shape
        flat = t.reshape(-1, k)
        n = self.chart.dim
        pos = self.sigma.eval_points(flat).reshape(nw, ns, n)
        jac = self.sigma.jacobian(flat)  # (NW*NS, n, k)
        vel = np.einsum("pnk,pk->pn", jac, dt_ds.reshape(-1, k))
        dw = np.einsum("pnk,pbk->pbn", jac,
                       dt_dw.reshape(nw * ns, self.D, k))
        return pos, vel.reshape(nw, ns, n), dw.reshape(nw, ns, self.D, n)


def theta_chart_family(sigma):
    """Paths of the simplex map's staircase family inside its chart."""
    return ChartPathFamily(theta_simplex_family(sigma.dim), sigma)


class ChartPath:
    """A single piecewise-smooth path in a chart (trivial parameter space).

    :param chart: target chart
    :param pieces: callables s -> (pos (NS, n), vel (NS, n)) on [0, 1]
    """

    def __init__(self, chart, pieces):
        self.chart = chart
        self.D = 0
        self.cells = [FamilyCell(0, (), list(pieces))]

    def eval_piece(self, cell, piece_idx, W, s, warp=None):
        fn = cell.pieces[piece_idx]
        s = np.asarray(s, dtype=float)
        if warp is None:
            phi, dphi = s, np.ones_like(s)
        else:
            phi, dphi = warp[0](s), warp[1](s)
        pos, vel = fn(phi)
        pos = np.asarray(pos, dtype=float)[None, :, :]
        vel = (np.asarray(vel, dtype=float) * dphi[:, None])[None, :, :]
        nw, ns, n = pos.shape
        return pos, vel, np.zeros((nw, ns, 0, n))

    def concat(self, other):
        """This path followed by the other; endpoints must meet."""
        return ChartPath(self.chart,
                         self.cells[0].pieces + other.cells[0].pieces)

    @classmethod
    def from_edge(cls, sigma):
        """The path of a 1-simplex, time 0 at vertex 1 and time 1 at vertex 0."""
        if sigma.dim != 1:
            raise ValueError("need a 1-simplex")

        def piece(s):
            t = (1.0 - s)[:, None]
            pos = sigma.eval_points(t)
            vel = -sigma.jacobian(t)[:, :, 0]
            return pos, vel

        return cls(sigma.chart, [piece])

    def endpoint(self, end=1.0):
        cell = self.cells[0]
        idx = len(cell.pieces) - 1 if end >= 1.0 else 0
        s = np.array([1.0 if end >= 1.0 else 0.0])
        pos, _, _ = self.eval_piece(cell, idx, np.zeros((1, 0)), s)
        return pos[0, 0]
