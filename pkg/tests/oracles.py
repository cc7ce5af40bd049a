"""Independent optimization oracles used to cross-check the analytic paths.

The library solves its constrained problems through the exponential-family
parametrization; these oracles attack the same problems head-on with a
general-purpose constrained optimizer (SLSQP over the flattened
conditional), so agreement is a real check rather than a tautology.
"""

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from remcode.channel import Channel


def random_channel(rng, n_in=None, n_out=None) -> Channel:
    n_in = int(rng.integers(2, 5)) if n_in is None else n_in
    n_out = int(rng.integers(2, 5)) if n_out is None else n_out
    return Channel(rng.dirichlet(np.ones(n_out), size=n_in))


def _cond_entropy(q_flat: np.ndarray, q_out: np.ndarray, n_in: int, n_out: int) -> float:
    m = q_flat.reshape(n_in, n_out)
    h_cols = -xlogy(m, m).sum(axis=0)
    return float(q_out @ h_cols)


def _mean_energy(q_flat: np.ndarray, q_out: np.ndarray, d_masked: np.ndarray) -> float:
    m = q_flat.reshape(d_masked.shape)
    return float(q_out @ (m * d_masked).sum(axis=0))


def _solve(ch: Channel, q_out, objective, constraints, seed, n_starts):
    n_in, n_out = ch.input_size, ch.output_size
    support = ch.p > 0.0
    bounds = [(0.0, 1.0 if support[i, j] else 0.0) for i in range(n_in) for j in range(n_out)]
    rng = np.random.default_rng(seed)
    starts = [np.full((n_in, n_out), 1.0 / n_in)]
    starts += [rng.dirichlet(np.ones(n_in), size=n_out).T for _ in range(n_starts - 1)]
    best = None
    for s in starts:
        s = np.where(support, s, 0.0)
        s = s / s.sum(axis=0, keepdims=True)
        res = minimize(
            objective,
            s.ravel(),
            method="SLSQP",
            bounds=bounds,
            constraints=constraints,
            options={"maxiter": 800, "ftol": 1e-14},
        )
        if not res.success:
            continue
        ok = all(
            (c["fun"](res.x) >= -1e-8) if c["type"] == "ineq" else abs(c["fun"](res.x)) <= 1e-8
            for c in constraints
        )
        if ok and (best is None or res.fun < best):
            best = res.fun
    if best is None:
        raise RuntimeError("SLSQP oracle failed from every start")
    return best


def max_tradeoff_oracle(
    ch: Channel, q_out: np.ndarray, beta: float, rate: float, seed: int = 0, n_starts: int = 5
) -> float:
    """max H_Q(X|Y) - beta E_Q[d] subject to H_Q(X|Y) >= ln|X| - rate."""
    n_in, n_out = ch.input_size, ch.output_size
    d_masked = np.where(ch.p > 0, -np.log(np.maximum(ch.p, 1e-300)), 0.0)
    target = np.log(n_in) - rate

    def neg_objective(x):
        return -(_cond_entropy(x, q_out, n_in, n_out) - beta * _mean_energy(x, q_out, d_masked))

    constraints = [
        {"type": "eq", "fun": (lambda x, j=j: x.reshape(n_in, n_out)[:, j].sum() - 1.0)}
        for j in range(n_out)
    ]
    constraints.append(
        {"type": "ineq", "fun": lambda x: _cond_entropy(x, q_out, n_in, n_out) - target}
    )
    return -_solve(ch, q_out, neg_objective, constraints, seed, n_starts)


def min_energy_oracle(
    ch: Channel, q_out: np.ndarray, rate: float, seed: int = 0, n_starts: int = 5
) -> float:
    """min E_Q[d] subject to H_Q(X|Y) = ln|X| - rate (glassy free energy)."""
    n_in, n_out = ch.input_size, ch.output_size
    d_masked = np.where(ch.p > 0, -np.log(np.maximum(ch.p, 1e-300)), 0.0)
    target = np.log(n_in) - rate

    def objective(x):
        return _mean_energy(x, q_out, d_masked)

    constraints = [
        {"type": "eq", "fun": (lambda x, j=j: x.reshape(n_in, n_out)[:, j].sum() - 1.0)}
        for j in range(n_out)
    ]
    constraints.append(
        {"type": "eq", "fun": lambda x: _cond_entropy(x, q_out, n_in, n_out) - target}
    )
    return _solve(ch, q_out, objective, constraints, seed, n_starts)


def max_entropy_oracle(
    ch: Channel, q_out: np.ndarray, energy: float, seed: int = 0, n_starts: int = 5
) -> float:
    """max H_Q(X|Y) subject to E_Q[d] = energy."""
    n_in, n_out = ch.input_size, ch.output_size
    d_masked = np.where(ch.p > 0, -np.log(np.maximum(ch.p, 1e-300)), 0.0)

    def neg_objective(x):
        return -_cond_entropy(x, q_out, n_in, n_out)

    constraints = [
        {"type": "eq", "fun": (lambda x, j=j: x.reshape(n_in, n_out)[:, j].sum() - 1.0)}
        for j in range(n_out)
    ]
    constraints.append(
        {"type": "eq", "fun": lambda x: _mean_energy(x, q_out, d_masked) - energy}
    )
    return -_solve(ch, q_out, neg_objective, constraints, seed, n_starts)
