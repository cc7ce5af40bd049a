"""Search utilities over the probability simplex.

Multistart projected gradient ascent plus a dense-grid scan for small
alphabets.  Objectives are supplied as batched callables mapping an
(S, k) block of simplex rows to (values (S,), gradients (S, k)); rows may
report -inf to mark infeasible points.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

BatchObjective = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of v onto the probability simplex."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n = v.shape[1]
    u = np.sort(v, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, n + 1)
    cond = u - css / idx > 0
    rho = np.count_nonzero(cond, axis=1)
    theta = css[np.arange(v.shape[0]), rho - 1] / rho
    return np.maximum(v - theta[:, None], 0.0)


def simplex_grid(dim: int, resolution: int) -> np.ndarray:
    """All probability vectors with entries at multiples of 1/resolution."""
    if dim == 1:
        return np.ones((1, 1))
    if dim == 2:
        i = np.arange(resolution + 1)
        return np.column_stack([i, resolution - i]) / resolution
    if dim == 3:
        i, j = np.meshgrid(np.arange(resolution + 1), np.arange(resolution + 1), indexing="ij")
        keep = (i + j) <= resolution
        i, j = i[keep], j[keep]
        return np.column_stack([i, j, resolution - i - j]) / resolution
    raise ValueError(f"dense grid supported for dim <= 3, got {dim}")


def default_starts(dim: int, n_starts: int = 20, seed: int = 0) -> np.ndarray:
    """Uniform point, smoothed vertices, then Dirichlet(1) fills."""
    starts = [np.full(dim, 1.0 / dim)]
    eps = 1e-4
    for j in range(dim):
        v = np.full(dim, eps / dim)
        v[j] += 1.0 - eps
        starts.append(v)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    while len(starts) < n_starts:
        starts.append(rng.dirichlet(np.ones(dim)))
    return np.array(starts[:n_starts])


def _best_row(values: np.ndarray, points: np.ndarray) -> tuple[float, np.ndarray]:
    """Best value; ties within 1e-12 broken by lexicographic smallest point."""
    best = np.max(values)
    tied = np.nonzero(values >= best - 1e-12)[0]
    order = np.lexsort(points[tied].T[::-1])
    return float(best), points[tied[order[0]]].copy()


def maximize_on_simplex(
    objective: BatchObjective,
    dim: int,
    *,
    starts: np.ndarray | None = None,
    n_starts: int = 20,
    seed: int = 0,
    max_iter: int = 600,
    min_step: float = 1e-14,
) -> tuple[float, np.ndarray]:
    """Projected gradient ascent from multiple starts; returns (value, argmax)."""
    x = np.array(starts if starts is not None else default_starts(dim, n_starts, seed))
    val, grad = objective(x)
    step = np.full(x.shape[0], 0.25)
    for _ in range(max_iter):
        live = step > min_step
        if not live.any():
            break
        g = np.where(np.isfinite(grad), grad, 0.0)
        cand = project_to_simplex(x + step[:, None] * g)
        cval, cgrad = objective(cand)
        improved = live & (cval > val + 1e-16)
        x[improved] = cand[improved]
        val[improved] = cval[improved]
        grad[improved] = cgrad[improved]
        step[improved] = np.minimum(step[improved] * 1.3, 1.0)
        stalled = live & ~improved
        step[stalled] *= 0.5
    finite = np.isfinite(val)
    if not finite.any():
        raise ValueError("objective infeasible at every start")
    return _best_row(val[finite], x[finite])


def grid_scan(
    objective: BatchObjective, dim: int, resolution: int = 400, chunk: int = 8192
) -> tuple[float, np.ndarray]:
    """Exhaustive scan of the 1/resolution simplex grid (dim <= 3)."""
    pts = simplex_grid(dim, resolution)
    best_v, best_x = -np.inf, pts[0]
    for i in range(0, pts.shape[0], chunk):
        block = pts[i : i + chunk]
        v, _ = objective(block)
        j = int(np.argmax(v))
        if v[j] > best_v:
            best_v, best_x = float(v[j]), block[j].copy()
    return best_v, best_x
