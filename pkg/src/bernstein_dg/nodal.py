"""Legendre-Gauss-Lobatto nodes, weights and nodal differentiation."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre


def lgl_nodes_weights(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the ``N + 1`` Legendre-Gauss-Lobatto nodes and weights on [-1, 1].

    Interior nodes are the roots of ``P_N'``, refined by Newton's method;
    weights are ``2 / (N (N + 1) P_N(x_k)^2)``.
    """
    if N < 1:
        raise ValueError(f"LGL rule needs N >= 1, got {N}")
    cN = np.zeros(N + 1)
    cN[N] = 1.0
    if N == 1:
        interior = np.empty(0)
    else:
        dcN = legendre.legder(cN)
        ddcN = legendre.legder(dcN)
        interior = np.sort(legendre.legroots(dcN).real)
        for _ in range(3):
            interior = interior - legendre.legval(interior, dcN) / legendre.legval(interior, ddcN)
    x = np.concatenate(([-1.0], interior, [1.0]))
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 2.0 / (N * (N + 1) * legendre.legval(x, cN) ** 2)
    return x, w


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise ValueError("nodes must be distinct")
    return 1.0 / np.prod(diff, axis=1)


def diff_matrix(nodes) -> np.ndarray:
    """Nodal differentiation matrix ``D[i, j] = l_j'(x_i)``.

    Uses the barycentric form; diagonal entries are set by the negative
    row-sum trick so that constants are differentiated to exactly zero.
    """
    x = np.asarray(nodes, dtype=float)
    lam = barycentric_weights(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (lam[None, :] / lam[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def interpolation_matrix(nodes, points) -> np.ndarray:
    """Matrix mapping values at ``nodes`` to the interpolant's values at ``points``."""
    x = np.asarray(nodes, dtype=float)
    p = np.atleast_1d(np.asarray(points, dtype=float))
    lam = barycentric_weights(x)
    diff = p[:, None] - x[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = lam[None, :] / diff
    E = terms / terms.sum(axis=1, keepdims=True)
    rows = np.any(exact, axis=1)
    E[rows] = exact[rows].astype(float)
    return E
