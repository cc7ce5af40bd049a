"""Gibbs conditionals over the input alphabet and derived solves.

For a channel with energies d(x, y) = -ln p(y|x), the tilted conditional

    Q_beta(x|y) = exp(-beta d(x, y)) / sum_x' exp(-beta d(x', y))

is the maximizer of H(Q) - beta * E_Q[d].  Everything here is computed in
the log domain so large |beta| never overflows; the numerical stand-in for
beta -> infinity is BETA_MAX, beyond which the frozen quantities are flat
to double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .channel import (
    Channel,
    ConditionalDistribution,
    OutputDistribution,
    output_marginal_uniform,
)

BETA_MAX = 500.0
BETA_TOL = 1e-10
VALUE_TOL = 1e-12


class UnreachableOutputError(ValueError):
    """An output symbol carries mass but no input can produce it."""


class InfeasibleRateError(ValueError):
    """The requested conditional-entropy level is not achievable."""


class InfeasibleEnergyError(ValueError):
    """The requested mean energy is outside the achievable interval."""


def _resolve_output(ch: Channel, out_dist: OutputDistribution | None) -> np.ndarray:
    if out_dist is None:
        return output_marginal_uniform(ch).q
    if out_dist.size != ch.output_size:
        raise ValueError(
            f"output distribution has {out_dist.size} entries, channel has {ch.output_size}"
        )
    return out_dist.q


def log_transitions(ch: Channel) -> tuple[np.ndarray, np.ndarray]:
    """(log p(y|x) with -inf off support, support mask)."""
    support = ch.p > 0.0
    with np.errstate(divide="ignore"):
        logp = np.where(support, np.log(np.maximum(ch.p, 1e-300)), -np.inf)
    return logp, support


def conditional_stats(
    ch: Channel, beta: np.ndarray | float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-output entropy H_y(beta), mean energy D_y(beta), and log Q_beta.

    ``beta`` may be a scalar or an array of shape (...,); the returned
    H and D have shape (..., |Y|) and log Q has shape (..., |X|, |Y|).
    Outputs with empty support get H = 0, D = +inf.
    """
    logp, support = log_transitions(ch)
    b = np.asarray(beta, dtype=float)
    logw = np.where(support, b[..., None, None] * logp, -np.inf)
    with np.errstate(invalid="ignore"):
        log_z = logsumexp(logw, axis=-2)
    empty = ~support.any(axis=0)
    log_q = logw - np.where(np.isfinite(log_z), log_z, 0.0)[..., None, :]
    q = np.exp(log_q)
    # D_y = -sum_x Q(x|y) log p(y|x) on the support
    d_y = np.where(support, -q * logp, 0.0).sum(axis=-2)
    h_y = np.where(np.isfinite(log_z), log_z, 0.0) + b[..., None] * d_y
    # entropy is exactly zero outside the support-weighted sum; clip the
    # tiny negatives that cancellation can produce
    h_y = np.maximum(h_y, 0.0)
    if np.any(empty):
        d_y = np.where(empty, np.inf, d_y)
        h_y = np.where(empty, 0.0, h_y)
    return h_y, d_y, log_q


@dataclass(frozen=True)
class GibbsState:
    """The Gibbs conditional at one inverse temperature plus its averages.

    The averages are taken under the supplied output distribution:
    mean_energy = sum_y q(y) E_Q[d | y], cond_entropy = sum_y q(y) H(Q(.|y)),
    and rate = ln|X| - cond_entropy.
    """

    beta: float
    conditional: ConditionalDistribution
    mean_energy: float
    cond_entropy: float
    rate: float
    output_dist: OutputDistribution
    entropy_by_output: np.ndarray
    energy_by_output: np.ndarray


def gibbs_state(
    ch: Channel, out_dist: OutputDistribution | None, beta: float
) -> GibbsState:
    """Normalized Gibbs family Q_beta and its three averages.

    At beta = 0 the conditional is uniform on the support of each column.
    Raises UnreachableOutputError when some y has positive mass but
    p(y|x) = 0 for every x.
    """
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta!r}")
    q = _resolve_output(ch, out_dist)
    empty = ~(ch.p > 0.0).any(axis=0)
    if np.any(empty & (q > 0.0)):
        y = int(np.nonzero(empty & (q > 0.0))[0][0])
        raise UnreachableOutputError(
            f"unreachable output symbol y={y}: p(y|x) = 0 for every x"
        )
    h_y, d_y, log_q = conditional_stats(ch, float(beta))
    cond = np.exp(log_q)
    if np.any(empty):
        # dead columns carry no mass; pad uniform so columns stay stochastic
        cond[:, empty] = 1.0 / ch.input_size
    mean_energy = float(q @ np.where(q > 0.0, d_y, 0.0))
    cond_entropy = float(q @ h_y)
    return GibbsState(
        beta=float(beta),
        conditional=ConditionalDistribution(cond),
        mean_energy=mean_energy,
        cond_entropy=cond_entropy,
        rate=ch.log_input_size - cond_entropy,
        output_dist=OutputDistribution(q),
        entropy_by_output=h_y,
        energy_by_output=d_y,
    )


class BetaSolve(NamedTuple):
    """Root of a monotone-in-beta equation, with a saturation marker."""

    beta: float
    saturated: bool


def _avg_entropy(ch: Channel, q: np.ndarray, beta: float) -> float:
    h_y, _, _ = conditional_stats(ch, beta)
    return float(q @ np.where(q > 0.0, h_y, 0.0))


def _avg_energy(ch: Channel, q: np.ndarray, beta: float) -> float:
    _, d_y, _ = conditional_stats(ch, beta)
    return float(q @ np.where(q > 0.0, d_y, 0.0))


def beta_at_rate(
    ch: Channel, out_dist: OutputDistribution | None, rate: float
) -> BetaSolve:
    """Smallest beta >= 0 with cond_entropy(beta) <= ln|X| - rate.

    The conditional entropy is nonincreasing in beta, so this is a
    predicate bisection; ties on flat stretches resolve toward smaller
    beta.  Saturates at BETA_MAX (flag set) when even the frozen Gibbs
    family has more entropy removed than requested -- i.e. beta -> inf.
    Raises InfeasibleRateError when ln|X| - rate exceeds the entropy of
    the uniform-on-support conditional.
    """
    q = _resolve_output(ch, out_dist)
    target = ch.log_input_size - float(rate)
    h0 = _avg_entropy(ch, q, 0.0)
    if target > h0 + 1e-12:
        raise InfeasibleRateError(
            f"ln|X| - rate = {target:.12g} exceeds the attainable conditional "
            f"entropy {h0:.12g} (zero-probability structure)"
        )
    if _avg_entropy(ch, q, BETA_MAX) > target + VALUE_TOL:
        return BetaSolve(BETA_MAX, True)
    lo, hi = 0.0, BETA_MAX
    if h0 <= target + VALUE_TOL:
        return BetaSolve(0.0, False)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _avg_entropy(ch, q, mid) <= target:
            hi = mid
        else:
            lo = mid
        if hi - lo <= BETA_TOL:
            break
    return BetaSolve(hi, False)


def min_typical_energy(
    ch: Channel, out_dist: OutputDistribution | None, rate: float
) -> float:
    """Smallest typically populated energy density at the given rate.

    This is D_Y(beta) evaluated at the beta matching conditional entropy
    ln|X| - rate; for the BSC it reduces (in energy units) to the
    Gilbert-Varshamov distance.
    """
    q = _resolve_output(ch, out_dist)
    root = beta_at_rate(ch, out_dist, rate)
    return _avg_energy(ch, q, root.beta)


def max_entropy_at_energy(
    ch: Channel, out_dist: OutputDistribution | None, energy: float
) -> float:
    """Largest conditional entropy among Q with mean energy exactly ``energy``.

    Solved through the exponential family: find beta* (possibly negative,
    to reach mean energies above the uniform-conditional value) with
    D_Y(beta*) = energy, and return H_Y(beta*).  Raises
    InfeasibleEnergyError outside the achievable interval.
    """
    q = _resolve_output(ch, out_dist)
    logp, support = log_transitions(ch)
    active = q > 0.0
    if not np.all(support.any(axis=0)[active]):
        y = int(np.nonzero(~support.any(axis=0) & active)[0][0])
        raise UnreachableOutputError(f"unreachable output symbol y={y}")
    d = np.where(support, -logp, np.nan)
    d_min = float(q[active] @ np.nanmin(d, axis=0)[active])
    d_max = float(q[active] @ np.nanmax(d, axis=0)[active])
    e = float(energy)
    if e < d_min - 1e-9 or e > d_max + 1e-9:
        raise InfeasibleEnergyError(
            f"mean energy {e:.12g} outside achievable interval "
            f"[{d_min:.12g}, {d_max:.12g}]"
        )
    lo, hi = -BETA_MAX, BETA_MAX
    if _avg_energy(ch, q, lo) <= e:
        return _avg_entropy(ch, q, lo)
    if _avg_energy(ch, q, hi) >= e:
        return _avg_entropy(ch, q, hi)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if _avg_energy(ch, q, mid) <= e:
            hi = mid
        else:
            lo = mid
        if hi - lo <= BETA_TOL:
            break
    return _avg_entropy(ch, q, 0.5 * (lo + hi))


def entropy_energy_max(
    ch: Channel, out_dist: OutputDistribution | None, beta: float, rate: float
) -> float:
    """max of H(Q) - beta E_Q[d] over conditionals with H(Q) >= ln|X| - rate.

    Concavity in the rate makes the inequality bind exactly when
    rate <= ln|X| - H_Y(beta), which splits the computation into two
    closed branches instead of a generic constrained optimizer:

      unconstrained (rate above the Gibbs rate):  H_Y(beta) - beta D_Y(beta)
      binding:  ln|X| - rate - beta D_Y(beta_rate)
    """
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta!r}")
    if not -1e-12 <= rate <= ch.log_input_size + 1e-12:
        raise ValueError(f"rate {rate!r} outside [0, ln|X|]")
    q = _resolve_output(ch, out_dist)
    target = ch.log_input_size - float(rate)
    h0 = _avg_entropy(ch, q, 0.0)
    if target > h0 + 1e-12:
        raise InfeasibleRateError(
            f"constraint H >= {target:.12g} infeasible; attainable maximum is {h0:.12g}"
        )
    h_beta = _avg_entropy(ch, q, float(beta))
    if h_beta > target:  # constraint slack: unconstrained Gibbs optimum
        return h_beta - float(beta) * _avg_energy(ch, q, float(beta))
    root = beta_at_rate(ch, out_dist, rate)
    return target - float(beta) * _avg_energy(ch, q, root.beta)


def bsc_flip_probability(p: float, beta: float) -> float:
    """Gibbs flip probability p_beta = p^beta / (p^beta + (1-p)^beta)."""
    lp, lq = beta * math.log(p), beta * math.log1p(-p)
    m = max(lp, lq)
    return math.exp(lp - m) / (math.exp(lp - m) + math.exp(lq - m))
