"""Phase-one simplex for feasibility of A z <= b with free z.

Dense tableau, Bland's rule for entering and leaving variables so the
method cannot cycle on degenerate vertices.
"""
import numpy as np

PIVOT_EPS = 1e-12


def feasible_point(a, b, tol: float = 1e-9, max_pivots: int = 10_000):
    """Return z with A z <= b (up to ``tol`` after row scaling), or None.

    Rows are scaled so that max(|A_i|, |b_i|) = 1 before solving; ``tol`` is
    the largest total infeasibility accepted at the end of phase one.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rows, k = a.shape
    scale = np.maximum(np.max(np.abs(a), axis=1), np.abs(b))
    scale[scale == 0] = 1.0
    a = a / scale[:, None]
    b = b / scale

    # columns: z+ (k) | z- (k) | slack (rows) | artificial (one per negative row)
    neg = np.flatnonzero(b < 0)
    n_art = len(neg)
    width = 2 * k + rows + n_art
    t = np.zeros((rows, width + 1))
    t[:, :k] = a
    t[:, k:2 * k] = -a
    t[:, 2 * k:2 * k + rows] = np.eye(rows)
    t[:, -1] = b
    t[neg] *= -1
    basis = np.arange(2 * k, 2 * k + rows)
    for j, i in enumerate(neg):
        col = 2 * k + rows + j
        t[i, col] = 1.0
        basis[i] = col

    # phase-one objective: minimize the sum of artificials
    cost = np.zeros(width + 1)
    cost[2 * k + rows:width] = 1.0
    red = cost - t[neg].sum(axis=0) if n_art else cost.copy()

    for _ in range(max_pivots):
        enter = np.flatnonzero(red[:width] < -PIVOT_EPS)
        if len(enter) == 0:
            break
        e = enter[0]
        col = t[:, e]
        ok = col > PIVOT_EPS
        if not np.any(ok):
            break  # unbounded direction; objective is bounded below by 0 so unreachable
        ratios = np.full(rows, np.inf)
        ratios[ok] = t[ok, -1] / col[ok]
        best = ratios.min()
        tied = np.flatnonzero(ratios <= best + 1e-15 * max(1.0, abs(best)))
        leave = tied[np.argmin(basis[tied])]
        t[leave] /= t[leave, e]
        others = np.arange(rows) != leave
        t[others] -= np.outer(t[others, e], t[leave])
        red -= red[e] * t[leave]
        basis[leave] = e

    infeas = -red[-1]
    if infeas > tol:
        return None
    x = np.zeros(width)
    x[basis] = t[:, -1]
    return x[:k] - x[k:2 * k]
