"""Phase structure of finite-temperature decoding in the (rate, T) plane.

Three competing free-energy densities decide the phase at a point:

  ferro  F_c        = H(Y|X), the correct codeword's typical energy density
  glassy F_g        = smallest typically populated energy density (beta-free)
  para   F_p(beta)  = D_Y(beta) + (ln|X| - R - H_Y(beta)) / beta

The incorrect-codeword branch is glassy for beta above the critical
inverse temperature (where the conditional entropy of the Gibbs family
drops to ln|X| - R) and paramagnetic below it; the point is ferromagnetic
when F_c undercuts that branch value.  Boundary ties within BOUNDARY_TOL
resolve to the lower-temperature phase so grid sweeps classify
reproducibly.

F_c always uses the true channel law (uniform input), regardless of the
output distribution the incorrect-codeword quantities are averaged under;
by default that distribution is the uniform-input output marginal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    Channel,
    OutputDistribution,
    binary_entropy,
    gv_distance_bsc,
    mutual_information_uniform,
    uniform_input_information,
)
from .gibbs import (
    BETA_MAX,
    BetaSolve,
    beta_at_rate,
    gibbs_state,
    min_typical_energy,
)

BOUNDARY_TOL = 1e-9

FERROMAGNETIC = "ferromagnetic"
PARAMAGNETIC = "paramagnetic"
GLASSY = "glassy"


@dataclass(frozen=True)
class PhasePoint:
    """Classification of one (rate, temperature) point."""

    rate: float
    temperature: float
    phase: str
    f_ferro: float
    f_incorrect: float
    f_glassy: float
    f_para: float
    output_dist: OutputDistribution


@dataclass(frozen=True)
class BoundaryCurve:
    """Sampled boundary: kind in {glassy_para, ferro_para, ferro_glassy}."""

    kind: str
    samples: tuple[tuple[float, float], ...]  # (rate, temperature) pairs


def ferro_free_energy(ch: Channel) -> float:
    """Correct-codeword free energy density: H(Y|X) under uniform input."""
    return uniform_input_information(ch).cond_output_entropy


def free_energy_glassy(
    ch: Channel, out_dist: OutputDistribution | None, rate: float
) -> float:
    """Frozen-branch free energy; equals the minimum typical energy density."""
    return min_typical_energy(ch, out_dist, rate)


def free_energy_para(
    ch: Channel, out_dist: OutputDistribution | None, beta: float, rate: float
) -> float:
    """Disordered-branch free energy D_Y(beta) + (ln|X| - R - H_Y(beta)) / beta."""
    if beta <= 0:
        raise ValueError(f"paramagnetic free energy needs beta > 0, got {beta!r}")
    g = gibbs_state(ch, out_dist, beta)
    return g.mean_energy + (ch.log_input_size - rate - g.cond_entropy) / beta


def critical_beta(
    ch: Channel, out_dist: OutputDistribution | None, rate: float
) -> BetaSolve:
    """Glassy-paramagnetic critical inverse temperature at the given rate."""
    if not 0.0 < rate < ch.log_input_size:
        raise ValueError(f"rate {rate!r} outside (0, ln|X|)")
    return beta_at_rate(ch, out_dist, rate)


def _ferro_para_gap(
    ch: Channel, out_dist: OutputDistribution | None, beta: float, rate: float
) -> float:
    """beta * (F_p(beta) - F_c); positive inside the ferromagnetic region."""
    g = gibbs_state(ch, out_dist, beta)
    lhs = beta * g.mean_energy + ch.log_input_size - rate - g.cond_entropy
    return lhs - beta * ferro_free_energy(ch)


def ferro_boundary_beta(
    ch: Channel, out_dist: OutputDistribution | None, rate: float
) -> float:
    """Inverse temperature where the ferro and para free energies cross.

    Root of beta*F_c = beta*F_p(beta), bracketed in (1e-6, critical beta];
    requires rate < I(X;Y), where the crossing exists.
    """
    mi = mutual_information_uniform(ch)
    if rate >= mi:
        raise ValueError(
            f"ferro-para boundary needs rate < I(X;Y) = {mi:.12g}, got {rate!r}"
        )
    lo = 1e-6
    hi = critical_beta(ch, out_dist, rate).beta
    g_lo = _ferro_para_gap(ch, out_dist, lo, rate)
    g_hi = _ferro_para_gap(ch, out_dist, hi, rate)
    if abs(g_hi) <= BOUNDARY_TOL:
        return hi
    if g_lo >= 0.0 or g_hi <= 0.0:
        raise ValueError(
            "no ferro-para crossing in the bracket: "
            f"gap({lo:.3g}) = {g_lo:.6g}, gap({hi:.6g}) = {g_hi:.6g}"
        )
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _ferro_para_gap(ch, out_dist, mid, rate) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13:
            break
    return 0.5 * (lo + hi)


def classify(
    ch: Channel, out_dist: OutputDistribution | None, rate: float, temperature: float
) -> PhasePoint:
    """Phase label plus all competing free energies at (rate, T)."""
    if not 0.0 < rate < ch.log_input_size:
        raise ValueError(f"rate {rate!r} outside (0, ln|X|)")
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    beta = 1.0 / temperature
    f_c = ferro_free_energy(ch)
    f_g = free_energy_glassy(ch, out_dist, rate)
    f_p = free_energy_para(ch, out_dist, beta, rate)
    g = gibbs_state(ch, out_dist, beta)
    glassy_branch = (g.cond_entropy <= ch.log_input_size - rate) or (
        abs(f_p - f_g) <= BOUNDARY_TOL
    )
    f_e = f_g if glassy_branch else f_p
    if f_c < f_e - BOUNDARY_TOL:
        phase = FERROMAGNETIC
    else:
        phase = GLASSY if glassy_branch else PARAMAGNETIC
    return PhasePoint(
        rate=float(rate),
        temperature=float(temperature),
        phase=phase,
        f_ferro=f_c,
        f_incorrect=f_e,
        f_glassy=f_g,
        f_para=f_p,
        output_dist=g.output_dist,
    )


def universal_classify(
    ch: Channel, out_dist: OutputDistribution | None, rate: float, temperature: float
) -> PhasePoint:
    """Phase point for the minimum-conditional-entropy (universal) decoder.

    The incorrect-codeword branches collapse to channel-free expressions:
    F_p = ln|X| - R/beta for beta < 1 and F_g = ln|X| - R for beta > 1, so
    the glassy-para boundary is the horizontal line T = 1.  The correct
    codeword's typical empirical conditional entropy is H(X|Y).
    """
    if not 0.0 < rate < ch.log_input_size:
        raise ValueError(f"rate {rate!r} outside (0, ln|X|)")
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    beta = 1.0 / temperature
    f_c = uniform_input_information(ch).cond_input_entropy
    f_g = ch.log_input_size - rate
    f_p = ch.log_input_size - rate / beta
    glassy_branch = beta >= 1.0 or abs(f_p - f_g) <= BOUNDARY_TOL
    f_e = f_g if glassy_branch else f_p
    if f_c < f_e - BOUNDARY_TOL:
        phase = FERROMAGNETIC
    else:
        phase = GLASSY if glassy_branch else PARAMAGNETIC
    q = out_dist if out_dist is not None else None
    g = gibbs_state(ch, q, 1.0)
    return PhasePoint(
        rate=float(rate),
        temperature=float(temperature),
        phase=phase,
        f_ferro=f_c,
        f_incorrect=f_e,
        f_glassy=f_g,
        f_para=f_p,
        output_dist=g.output_dist,
    )


_CURVE_KINDS = ("glassy_para", "ferro_para", "ferro_glassy")


def boundary_curves(
    ch: Channel,
    out_dist: OutputDistribution | None,
    kind: str,
    r_grid: np.ndarray,
    decoder: str = "map",
) -> BoundaryCurve:
    """Sample one phase boundary over a strictly increasing rate grid.

    The ferro-glassy boundary is the vertical segment R = I(X;Y), emitted
    as a two-point curve from T = 1/BETA_MAX up to T = 1.
    """
    if kind not in _CURVE_KINDS:
        raise ValueError(f"unknown boundary kind {kind!r}")
    if decoder not in ("map", "universal"):
        raise ValueError(f"unknown decoder {decoder!r}")
    grid = np.asarray(r_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty rate grid")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("rate grid must be strictly increasing")
    mi = mutual_information_uniform(ch)
    if kind == "ferro_glassy":
        return BoundaryCurve(kind, ((mi, 1.0 / BETA_MAX), (mi, 1.0)))
    if np.any(grid <= 0) or np.any(grid >= ch.log_input_size):
        raise ValueError("rate grid outside (0, ln|X|)")
    samples: list[tuple[float, float]] = []
    if kind == "glassy_para":
        for r in grid:
            if decoder == "universal":
                samples.append((float(r), 1.0))
            else:
                samples.append((float(r), 1.0 / critical_beta(ch, out_dist, r).beta))
    else:  # ferro_para
        if np.any(grid >= mi):
            bad = float(grid[grid >= mi][0])
            raise ValueError(
                f"ferro-para boundary defined for rates below I(X;Y) = {mi:.12g}; "
                f"grid contains {bad:.12g}"
            )
        for r in grid:
            if decoder == "universal":
                samples.append((float(r), mi / float(r)))
            else:
                samples.append((float(r), 1.0 / ferro_boundary_beta(ch, out_dist, r)))
    return BoundaryCurve(kind, tuple(samples))


# ---------------------------------------------------------------------------
# BSC closed forms (cross-checks for the general engine)
# ---------------------------------------------------------------------------

def bsc_glassy_free_energy(p: float, rate: float) -> float:
    d = gv_distance_bsc(rate)
    return d * math.log(1.0 / p) + (1.0 - d) * math.log(1.0 / (1.0 - p))


def bsc_para_free_energy(p: float, beta: float, rate: float) -> float:
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    return (math.log(2.0) - rate - _log_pow_sum(p, beta)) / beta


def bsc_critical_beta(p: float, rate: float) -> float:
    d = gv_distance_bsc(rate)
    return math.log((1.0 - d) / d) / math.log((1.0 - p) / p)


def bsc_ferro_boundary_beta(p: float, rate: float) -> float:
    """Root of beta*h(p) = ln2 - rate - ln(p^beta + (1-p)^beta)."""
    hp = binary_entropy(p)

    def gap(beta: float) -> float:
        return math.log(2.0) - rate - _log_pow_sum(p, beta) - beta * hp

    lo, hi = 1e-6, bsc_critical_beta(p, rate)
    g_hi = gap(hi)
    if abs(g_hi) <= BOUNDARY_TOL:
        return hi
    if gap(lo) >= 0.0 or g_hi <= 0.0:
        raise ValueError(f"no crossing in ({lo}, {hi}): endpoints {gap(lo)}, {g_hi}")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _log_pow_sum(p: float, beta: float) -> float:
    """ln(p^beta + (1-p)^beta) without underflow for large beta."""
    a, b = beta * math.log(p), beta * math.log1p(-p)
    m = max(a, b)
    return m + math.log(math.exp(a - m) + math.exp(b - m))
