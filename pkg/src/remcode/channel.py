"""Finite-alphabet channel and distribution primitives.

Everything downstream (Gibbs conditionals, phase boundaries, exponents,
spectrum simulation) is built on a discrete memoryless channel given by a
row-stochastic transition matrix p(y|x) with a uniform input distribution.
All information quantities are in nats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

LOG2 = math.log(2.0)

# Constructor tolerance: deviations below this are renormalized silently,
# anything larger is rejected.
INPUT_TOL = 1e-9


class ChannelFormatError(ValueError):
    """Raised on malformed channel matrices or channel files."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Channel:
    """A DMC: transition matrix p of shape (input_size, output_size).

    Rows are indexed by the input letter x and sum to one over y.  For a
    binary symmetric channel built via :func:`bsc` the crossover parameter
    is kept in ``bsc_p`` so that closed-form fast paths can recognize it.
    """

    p: np.ndarray
    bsc_p: float | None = None

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] < 2 or p.shape[1] < 2:
            raise ChannelFormatError(
                f"transition matrix must be at least 2x2, got shape {p.shape}"
            )
        for i in range(p.shape[0]):
            for j in range(p.shape[1]):
                v = p[i, j]
                if not np.isfinite(v) or v < -1e-12 or v > 1.0 + INPUT_TOL:
                    raise ChannelFormatError(
                        f"entry p[{i}][{j}]={v!r} is not a probability"
                    )
        p = np.clip(p, 0.0, 1.0)
        sums = p.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > INPUT_TOL)[0]
        if bad.size:
            i = int(bad[0])
            raise ChannelFormatError(
                f"row {i} sums to {sums[i]!r}, expected 1 within {INPUT_TOL}"
            )
        object.__setattr__(self, "p", _frozen(p / sums[:, None]))

    @property
    def input_size(self) -> int:
        return self.p.shape[0]

    @property
    def output_size(self) -> int:
        return self.p.shape[1]

    @property
    def log_input_size(self) -> float:
        return math.log(self.input_size)


def bsc(p: float) -> Channel:
    """Binary symmetric channel with crossover probability p."""
    if not 0.0 <= p <= 1.0:
        raise ChannelFormatError(f"crossover probability {p!r} outside [0, 1]")
    return Channel(np.array([[1.0 - p, p], [p, 1.0 - p]]), bsc_p=float(p))


def energy_matrix(ch: Channel) -> np.ndarray:
    """Per-letter energy d(x, y) = -ln p(y|x); +inf where p(y|x) = 0."""
    with np.errstate(divide="ignore"):
        return np.where(ch.p > 0.0, -np.log(np.maximum(ch.p, 1e-300)), np.inf)


@dataclass(frozen=True)
class OutputDistribution:
    """Probability vector over the output alphabet."""

    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1 or q.size < 2:
            raise ChannelFormatError(f"output distribution must be a vector, got shape {q.shape}")
        if np.any(q < -1e-12) or not np.all(np.isfinite(q)):
            j = int(np.argmin(q))
            raise ChannelFormatError(f"entry q[{j}]={q[j]!r} is negative")
        q = np.clip(q, 0.0, None)
        s = q.sum()
        if abs(s - 1.0) > INPUT_TOL:
            raise ChannelFormatError(f"distribution sums to {s!r}, expected 1 within {INPUT_TOL}")
        object.__setattr__(self, "q", _frozen(q / s))

    @property
    def size(self) -> int:
        return self.q.size


@dataclass(frozen=True)
class ConditionalDistribution:
    """Conditional Q(x|y): columns indexed by y, each summing to one over x."""

    q_xy: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.q_xy, dtype=float)
        if m.ndim != 2:
            raise ChannelFormatError("conditional must be a matrix")
        if np.any(m < -1e-12) or not np.all(np.isfinite(m)):
            raise ChannelFormatError("conditional has negative or non-finite entries")
        m = np.clip(m, 0.0, None)
        sums = m.sum(axis=0)
        bad = np.nonzero(np.abs(sums - 1.0) > INPUT_TOL)[0]
        if bad.size:
            j = int(bad[0])
            raise ChannelFormatError(
                f"column y={j} sums to {sums[j]!r}, expected 1 within {INPUT_TOL}"
            )
        object.__setattr__(self, "q_xy", _frozen(m / sums[None, :]))


def output_marginal_uniform(ch: Channel) -> OutputDistribution:
    """Output law q(y) = sum_x p(y|x) / |X| induced by a uniform input."""
    return OutputDistribution(ch.p.mean(axis=0))


# ---------------------------------------------------------------------------
# Scalar information quantities
# ---------------------------------------------------------------------------

def binary_entropy(delta: float) -> float:
    """h(delta) = -delta ln delta - (1-delta) ln(1-delta), with h(0)=h(1)=0."""
    d = float(delta)
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"binary_entropy argument {delta!r} outside [0, 1]")
    if d == 0.0 or d == 1.0:
        return 0.0
    return -(d * math.log(d) + (1.0 - d) * math.log1p(-d))


def binary_divergence(a: float, b: float) -> float:
    """D(a||b) = a ln(a/b) + (1-a) ln((1-a)/(1-b)) with limit conventions.

    Returns +inf when b is 0 or 1 while a disagrees.
    """
    a = float(a)
    b = float(b)
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError(f"binary_divergence arguments ({a!r}, {b!r}) outside [0, 1]")
    if a == b:
        return 0.0
    if b == 0.0 or b == 1.0:
        return math.inf
    first = 0.0 if a == 0.0 else a * math.log(a / b)
    second = 0.0 if a == 1.0 else (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return first + second


def _entropy(q: np.ndarray) -> float:
    qq = q[q > 0.0]
    return float(-(qq * np.log(qq)).sum())


@dataclass(frozen=True)
class ChannelInformation:
    """Entropies of the joint law (X uniform, Y|X per the channel)."""

    mutual_information: float
    output_entropy: float          # H(Y)
    cond_output_entropy: float     # H(Y|X)
    cond_input_entropy: float      # H(X|Y)


def uniform_input_information(ch: Channel) -> ChannelInformation:
    """I(X;Y), H(Y), H(Y|X), H(X|Y) for a uniform input distribution."""
    n_in = ch.input_size
    joint = ch.p / n_in
    q_y = joint.sum(axis=0)
    h_y = _entropy(q_y)
    h_y_given_x = float(sum(_entropy(row) for row in ch.p)) / n_in
    mi = h_y - h_y_given_x
    h_x_given_y = math.log(n_in) - mi
    return ChannelInformation(mi, h_y, h_y_given_x, h_x_given_y)


def mutual_information_uniform(ch: Channel) -> float:
    return uniform_input_information(ch).mutual_information


def gv_distance_bsc(rate: float) -> float:
    """Normalized GV distance: the delta in [0, 1/2] with h(delta) = ln2 - rate.

    Bisection rather than Newton: h' blows up at 0, bisection is robust at
    the boundary.
    """
    r = float(rate)
    if not -1e-12 <= r <= LOG2 + 1e-12:
        raise ValueError(f"rate {rate!r} outside [0, ln 2]")
    target = LOG2 - min(max(r, 0.0), LOG2)
    lo, hi = 0.0, 0.5
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Channel files
# ---------------------------------------------------------------------------

def channel_from_json(obj: dict) -> Channel:
    """Build a channel from a parsed JSON object.

    Either {"input_size": n, "output_size": m, "p": [[...], ...]} with rows
    over x, or the shorthand {"bsc": {"p": value}}.
    """
    if "bsc" in obj:
        spec = obj["bsc"]
        if not isinstance(spec, dict) or "p" not in spec:
            raise ChannelFormatError('"bsc" entry must be an object {"p": value}')
        return bsc(float(spec["p"]))
    for key in ("input_size", "output_size", "p"):
        if key not in obj:
            raise ChannelFormatError(f'missing required key "{key}"')
    rows = obj["p"]
    n_in, n_out = int(obj["input_size"]), int(obj["output_size"])
    if len(rows) != n_in:
        raise ChannelFormatError(f"expected {n_in} rows, got {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != n_out:
            raise ChannelFormatError(f"row {i}: expected {n_out} entries, got {len(row)}")
        for j, v in enumerate(row):
            if not isinstance(v, (int, float)):
                raise ChannelFormatError(f"entry p[{i}][{j}]={v!r} is not a number")
    return Channel(np.array(rows, dtype=float))


def load_channel(path: str) -> Channel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ChannelFormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ChannelFormatError(f"{path}: top-level JSON value must be an object")
    return channel_from_json(obj)
