"""Monte Carlo verification of the random-codebook free-energy picture.

Two sampling modes:

  enumerate      draw an explicit i.i.d. uniform codebook (any DMC, small
                 blocklengths; guarded by the |X|^n * M <= 2^26 work bound);
  bsc_spectrum   draw the Hamming distance spectrum of a fair-coin codebook
                 directly - one multinomial when the codebook size fits an
                 integer, otherwise a per-distance Poisson / Gaussian-in-log
                 hybrid - which reaches blocklengths in the thousands.

Randomness is organized as one counter-based (Philox) stream per trial
index, so results are bit-identical for a given (seed, trial) no matter
how trials are distributed over workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.special import gammaln, logsumexp

from .channel import Channel, OutputDistribution, binary_entropy, energy_matrix, gv_distance_bsc
from .gibbs import log_transitions, max_entropy_at_energy, min_typical_energy

WORK_BOUND_LOG = 26.0 * math.log(2.0)
_EXACT_LOG_LIMIT = 62.0 * math.log(2.0)
_POISSON_MEAN_LIMIT = 1e12

MODE_ENUMERATE = "enumerate"
MODE_BSC_SPECTRUM = "bsc_spectrum"


class WorkBoundError(ValueError):
    """The requested enumeration exceeds the |X|^n * M <= 2^26 budget."""


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent across trial indices."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class SimConfig:
    """One simulation campaign: block length, rate, temperature, channel."""

    n: int
    rate: float
    beta: float
    channel: Channel
    trials: int
    seed: int
    mode: str

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"block length must be >= 1, got {self.n!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials!r}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        if self.rate < 0:
            raise ValueError(f"rate must be nonnegative, got {self.rate!r}")
        if self.mode not in (MODE_ENUMERATE, MODE_BSC_SPECTRUM):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == MODE_BSC_SPECTRUM and self.channel.bsc_p is None:
            raise ValueError("bsc_spectrum mode requires a BSC channel")
        m = self.m
        if m is not None and m < 2:
            raise ValueError(
                f"codebook must hold at least 2 codewords; n*rate = {self.n * self.rate:.6g}"
            )
        if self.mode == MODE_ENUMERATE:
            work = self.n * math.log(self.channel.input_size) + self.log_m
            if work > WORK_BOUND_LOG:
                raise WorkBoundError(
                    f"enumerate work |X|^n * M = exp({work:.3f}) exceeds 2^26; "
                    "use bsc_spectrum mode or shrink n"
                )

    @property
    def m(self) -> int | None:
        """Codebook size round(e^{n R}) when it fits an exact integer."""
        nr = self.n * self.rate
        if nr <= _EXACT_LOG_LIMIT:
            return int(round(math.exp(nr)))
        return None

    @property
    def log_m(self) -> float:
        m = self.m
        return math.log(m) if m is not None else self.n * self.rate


@dataclass(frozen=True)
class SpectrumBin:
    """One populated energy level: key, total energy, codeword count.

    ``key`` is the Hamming distance for BSC sampling and the flattened
    joint (x, y) count matrix for general enumeration, so distinct types
    never collide even when their float energies do.  ``count`` is None on
    the large-blocklength path where counts exceed integer range; the log
    count is always present.
    """

    key: object
    energy: float
    count: int | None
    log_count: float


@dataclass(frozen=True)
class SpectrumSample:
    """One codebook draw: distance spectrum, partition values, rank."""

    mode: str
    n: int
    beta: float
    bins: tuple[SpectrumBin, ...]
    energy_correct: float
    log_z_correct: float
    log_z_error: float
    log_z_total: float
    f_empirical: float
    rank_correct: int | None
    log_num_closer: float
    x0: np.ndarray
    y: np.ndarray
    codebook: np.ndarray | None = None

    def hamming_counts(self) -> np.ndarray | None:
        """Dense count-per-Hamming-distance vector (BSC-keyed bins only)."""
        if not all(isinstance(b.key, (int, np.integer)) for b in self.bins):
            return None
        out = np.zeros(self.n + 1)
        for b in self.bins:
            out[int(b.key)] = b.count if b.count is not None else math.exp(b.log_count)
        return out


def _binomial_log_pmf(n: int) -> np.ndarray:
    d = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(d + 1) - gammaln(n - d + 1) - n * math.log(2.0)


def _bsc_energies(n: int, p: float) -> np.ndarray:
    d = np.arange(n + 1)
    return d * (-math.log(p)) + (n - d) * (-math.log1p(-p))


def _draw_bsc_counts(
    cfg: SimConfig, rng: np.random.Generator, n_words_log: float, n_words: int | None
) -> tuple[np.ndarray | None, np.ndarray]:
    """Spectrum over Hamming distances: (exact counts or None, log counts)."""
    log_pmf = _binomial_log_pmf(cfg.n)
    if n_words is not None:
        counts = rng.multinomial(n_words, np.exp(log_pmf))
        with np.errstate(divide="ignore"):
            return counts, np.where(counts > 0, np.log(np.maximum(counts, 1)), -np.inf)
    # Counts beyond integer range: per-distance hybrid.  Huge means get a
    # Gaussian fluctuation applied in the log domain; moderate means are
    # Poisson (the binomial -> Poisson limit is exact to within ~1/M here).
    log_mu = n_words_log + log_pmf
    big = log_mu > math.log(_POISSON_MEAN_LIMIT)
    z = rng.standard_normal(cfg.n + 1)
    lam = np.where(big, 0.0, np.exp(np.minimum(log_mu, 700.0)))
    pois = rng.poisson(lam)
    with np.errstate(divide="ignore"):
        log_pois = np.where(pois > 0, np.log(np.maximum(pois, 1)), -np.inf)
    relative_sd = np.exp(-np.where(big, log_mu, 0.0) / 2.0)
    log_big = log_mu + np.log1p(np.where(big, z * relative_sd, 0.0))
    return None, np.where(big, log_big, log_pois)


def _general_type_bins(
    ch: Channel, codebook: np.ndarray, y: np.ndarray
) -> tuple[list[SpectrumBin], np.ndarray]:
    """Bin codewords by exact joint type with y; returns bins and per-word energies."""
    n_words, n = codebook.shape
    k = ch.input_size * ch.output_size
    pair = codebook * ch.output_size + y[None, :]
    flat = (pair + np.arange(n_words)[:, None] * k).ravel()
    counts = np.bincount(flat, minlength=n_words * k).reshape(n_words, k)
    d_flat = energy_matrix(ch).ravel()
    finite = np.isfinite(d_flat)
    energies = counts[:, finite] @ d_flat[finite]
    energies = np.where(counts[:, ~finite].sum(axis=1) > 0, np.inf, energies)
    uniq, inverse = np.unique(counts, axis=0, return_inverse=True)
    bins = []
    for i, row in enumerate(uniq):
        cnt = int((inverse == i).sum())
        e = float(row[finite] @ d_flat[finite]) if row[~finite].sum() == 0 else math.inf
        bins.append(
            SpectrumBin(
                key=tuple(int(v) for v in row),
                energy=e,
                count=cnt,
                log_count=math.log(cnt),
            )
        )
    bins.sort(key=lambda b: (b.energy, str(b.key)))
    return bins, energies


def sample_spectrum(
    cfg: SimConfig,
    rng: np.random.Generator | None = None,
    *,
    trial: int = 0,
    keep_codebook: bool = False,
    include_correct: bool = False,
) -> SpectrumSample:
    """Draw one transmitted word, one channel output, and one codebook spectrum.

    ``include_correct`` sizes the spectrum at M rather than M - 1 words
    (all drawn independently of y), for calculations that treat every
    codeword as unconditioned.
    """
    if rng is None:
        rng = trial_rng(cfg.seed, trial)
    ch = cfg.channel
    n = cfg.n
    x0 = rng.integers(0, ch.input_size, size=n)

    if cfg.mode == MODE_BSC_SPECTRUM:
        p = ch.bsc_p
        flips = rng.random(n) < p
        y = np.bitwise_xor(x0, flips.astype(np.int64))
        energies_by_d = _bsc_energies(n, p)
        d0 = float(energies_by_d[int(flips.sum())])
        n_words = None if cfg.m is None else cfg.m - (0 if include_correct else 1)
        extra = 0.0 if include_correct else math.log1p(-math.exp(-cfg.log_m))
        counts, log_counts = _draw_bsc_counts(cfg, rng, cfg.log_m + extra, n_words)
        populated = np.isfinite(log_counts)
        bins = tuple(
            SpectrumBin(
                key=int(d),
                energy=float(energies_by_d[d]),
                count=None if counts is None else int(counts[d]),
                log_count=float(log_counts[d]),
            )
            for d in np.nonzero(populated)[0]
        )
        log_z_error = float(logsumexp(log_counts[populated] - cfg.beta * energies_by_d[populated])) if populated.any() else -math.inf
        closer = populated & (energies_by_d < d0)
        log_num_closer = float(logsumexp(log_counts[closer])) if closer.any() else -math.inf
        if counts is not None:
            rank: int | None = 1 + int(counts[energies_by_d < d0].sum())
        else:
            rank = None
        codebook = None
    else:
        cum = np.cumsum(ch.p, axis=1)
        u = rng.random(n)
        y = np.minimum((u[:, None] > cum[x0]).sum(axis=1), ch.output_size - 1)
        n_words = cfg.m - (0 if include_correct else 1)
        codebook = rng.integers(0, ch.input_size, size=(n_words, n))
        bin_list, energies = _general_type_bins(ch, codebook, y)
        bins = tuple(bin_list)
        d0 = float(_general_type_bins(ch, x0[None, :], y)[1][0])
        finite = np.isfinite(energies)
        log_z_error = (
            float(logsumexp(-cfg.beta * energies[finite])) if finite.any() else -math.inf
        )
        rank = 1 + int((energies < d0).sum())
        log_num_closer = math.log(rank - 1) if rank > 1 else -math.inf
        if not keep_codebook:
            codebook = None

    log_z_correct = -cfg.beta * d0
    log_z_total = float(np.logaddexp(log_z_correct, log_z_error))
    f_empirical = -log_z_error / (n * cfg.beta)
    return SpectrumSample(
        mode=cfg.mode,
        n=n,
        beta=cfg.beta,
        bins=bins,
        energy_correct=d0,
        log_z_correct=log_z_correct,
        log_z_error=log_z_error,
        log_z_total=log_z_total,
        f_empirical=f_empirical,
        rank_correct=rank,
        log_num_closer=log_num_closer,
        x0=x0,
        y=y,
        codebook=codebook,
    )


# ---------------------------------------------------------------------------
# Trial fan-out
# ---------------------------------------------------------------------------

def worker_count() -> int:
    """Worker cap from REMCODE_THREADS (default 1, i.e. serial)."""
    try:
        w = int(os.environ.get("REMCODE_THREADS", "1"))
    except ValueError:
        w = 1
    return max(1, min(w, os.cpu_count() or 1))


def _trial_range_samples(args: tuple[SimConfig, int, int]) -> list[SpectrumSample]:
    cfg, lo, hi = args
    return [sample_spectrum(cfg, trial=t) for t in range(lo, hi)]


def collect_samples(cfg: SimConfig, trials: int | None = None) -> list[SpectrumSample]:
    """All trial samples in trial order; fans out when REMCODE_THREADS > 1."""
    t = cfg.trials if trials is None else trials
    workers = worker_count()
    if workers == 1 or t < 4 * workers:
        return [sample_spectrum(cfg, trial=i) for i in range(t)]
    edges = np.linspace(0, t, workers + 1).astype(int)
    chunks = [(cfg, int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    out: list[SpectrumSample] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_trial_range_samples, chunks):
            out.extend(part)
    return out


@dataclass(frozen=True)
class FreeEnergySummary:
    trials: int
    mean: float
    stderr: float
    values: np.ndarray


def empirical_free_energy(cfg: SimConfig, trials: int | None = None) -> FreeEnergySummary:
    """Mean and standard error of -ln Z_e / (n beta) across trials."""
    values = np.array([s.f_empirical for s in collect_samples(cfg, trials)])
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return FreeEnergySummary(values.size, float(values.mean()), stderr, values)


# ---------------------------------------------------------------------------
# Large-deviation events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PopulatedDistanceStat:
    """Occupancy of one Hamming distance below the typical minimum."""

    d: int
    delta: float
    pr_empirical: float
    pr_exact: float        # exact binomial tail 1 - (1 - q_d)^(M-1)
    pr_asymptotic: float   # e^{-n [ln2 - R - h(delta)]}, capped at 1


@dataclass(frozen=True)
class EventSummary:
    trials: int
    epsilon: float
    pr_overshoot_empirical: float   # some level exponentially above its mean
    overshoot_log_bound: float      # ln of the double-exponential bound, -e^{n eps}
    pr_any_populated_below: float   # some level below the typical minimum occupied
    populated: tuple[PopulatedDistanceStat, ...] | None


def bsc_populated_tail_exact(n: int, rate: float, d: int) -> float:
    """Exact Pr{N(d) >= 1} = 1 - (1 - q_d)^(M-1) for fair-coin codewords."""
    m_log = n * rate
    log_q = float(_binomial_log_pmf(n)[d])
    if m_log <= _EXACT_LOG_LIMIT:
        m_minus_1 = round(math.exp(m_log)) - 1
        return -math.expm1(m_minus_1 * math.log1p(-math.exp(log_q)))
    log_mu = m_log + log_q  # ln((M-1) q_d) to within e^{-m_log}
    if log_mu > 50.0:
        return 1.0
    return -math.expm1(-math.exp(log_mu))


def event_probabilities(
    cfg: SimConfig, epsilon: float, trials: int | None = None
) -> EventSummary:
    """Monte Carlo frequencies of the two spectrum large-deviation events.

    Overshoot: some energy level holds at least exp{n([R - ln|X| +
    h0(d/n)]_+ + epsilon)} codewords (theory: double-exponentially rare).
    Population below the typical minimum: some level below n * delta(R)
    is occupied at all (theory: exponentially rare).  For BSC channels a
    per-distance table with exact binomial tails is included.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    t = cfg.trials if trials is None else trials
    n, rate = cfg.n, cfg.rate
    if cfg.channel.bsc_p is not None:
        return _event_probabilities_bsc(cfg, epsilon, t)
    if cfg.mode != MODE_ENUMERATE:
        raise ValueError("general-channel event analysis requires enumerate mode")
    # General DMC: thresholds recomputed from each trial's empirical output law.
    overshoot_hits = 0
    below_hits = 0
    for i in range(t):
        s = sample_spectrum(cfg, trial=i)
        q_emp = OutputDistribution(np.bincount(s.y, minlength=cfg.channel.output_size) / n)
        d0 = n * min_typical_energy(cfg.channel, q_emp, rate)
        got_over = False
        got_below = False
        for b in s.bins:
            if not math.isfinite(b.energy):
                continue
            h0 = max_entropy_at_energy(cfg.channel, q_emp, b.energy / n)
            thr = n * (max(0.0, rate - cfg.channel.log_input_size + h0) + epsilon)
            if b.log_count >= thr:
                got_over = True
            if b.energy < d0 and b.log_count >= 0.0:
                got_below = True
        overshoot_hits += got_over
        below_hits += got_below
    return EventSummary(
        trials=t,
        epsilon=epsilon,
        pr_overshoot_empirical=overshoot_hits / t,
        overshoot_log_bound=-math.exp(n * epsilon),
        pr_any_populated_below=below_hits / t,
        populated=None,
    )


def _event_probabilities_bsc(cfg: SimConfig, epsilon: float, t: int) -> EventSummary:
    n, rate = cfg.n, cfg.rate
    delta_gv = gv_distance_bsc(rate)
    d = np.arange(n + 1)
    h_vec = np.array([binary_entropy(v) for v in d / n])
    thr = n * (np.maximum(0.0, rate - math.log(2.0) + h_vec) + epsilon)
    below = d < n * delta_gv
    overshoot_hits = 0
    below_hits = 0
    populated_hits = np.zeros(n + 1)
    n_words = None if cfg.m is None else cfg.m - 1
    extra = math.log1p(-math.exp(-cfg.log_m))
    for i in range(t):
        rng = trial_rng(cfg.seed, i)
        rng.integers(0, 2, size=n)      # transmitted word (stream layout parity)
        rng.random(n)                   # channel flips
        _, log_counts = _draw_bsc_counts(cfg, rng, cfg.log_m + extra, n_words)
        populated = log_counts >= 0.0
        overshoot_hits += bool(np.any(log_counts >= thr))
        below_hits += bool(np.any(populated & below))
        populated_hits += populated
    table = []
    for dd in np.nonzero(below)[0]:
        delta = dd / n
        log_rate = -n * (math.log(2.0) - rate - h_vec[dd])
        table.append(
            PopulatedDistanceStat(
                d=int(dd),
                delta=float(delta),
                pr_empirical=float(populated_hits[dd] / t),
                pr_exact=bsc_populated_tail_exact(n, rate, int(dd)),
                pr_asymptotic=min(1.0, math.exp(min(log_rate, 0.0))),
            )
        )
    return EventSummary(
        trials=t,
        epsilon=epsilon,
        pr_overshoot_empirical=overshoot_hits / t,
        overshoot_log_bound=-math.exp(n * epsilon),
        pr_any_populated_below=below_hits / t,
        populated=tuple(table),
    )


# ---------------------------------------------------------------------------
# Posterior marginals and rank statistics
# ---------------------------------------------------------------------------

def symbolwise_marginal(
    cfg: SimConfig,
    codebook: np.ndarray,
    y: np.ndarray,
    beta: float,
    position: int,
) -> np.ndarray:
    """Exact tempered posterior marginal of the symbol at ``position``.

    Sums the tempered likelihood over the explicit codebook in the log
    domain; at beta = 1 this is the true symbolwise posterior, and for
    very large beta it concentrates on the maximum-likelihood codeword.
    """
    if cfg.mode != MODE_ENUMERATE:
        raise ValueError("symbolwise marginals need an explicit codebook (enumerate mode)")
    codebook = np.asarray(codebook)
    if not 0 <= position < cfg.n:
        raise ValueError(f"position {position!r} outside [0, {cfg.n})")
    logp, _ = log_transitions(cfg.channel)
    word_log_lik = logp[codebook, np.asarray(y)[None, :]].sum(axis=1)
    weights = beta * word_log_lik
    total = float(logsumexp(weights))
    if not math.isfinite(total):
        raise ValueError("codebook has no likelihood support at this output word")
    out = np.zeros(cfg.channel.input_size)
    symbols = codebook[:, position]
    for a in range(cfg.channel.input_size):
        sel = weights[symbols == a]
        if sel.size:
            out[a] = math.exp(float(logsumexp(sel)) - total)
    return out


@dataclass(frozen=True)
class RankSummary:
    trials: int
    ranks: np.ndarray
    median_rank: float
    mean_log_rank_over_n: float
    reference_rate: float  # R - I(X;Y), the predicted log-rank density


def rank_statistics(cfg: SimConfig, trials: int | None = None) -> RankSummary:
    """Likelihood rank of the transmitted codeword across trials."""
    if cfg.mode != MODE_ENUMERATE:
        raise ValueError("rank statistics need enumerate mode")
    from .channel import mutual_information_uniform

    samples = collect_samples(cfg, trials)
    ranks = np.array([s.rank_correct for s in samples], dtype=float)
    return RankSummary(
        trials=ranks.size,
        ranks=ranks,
        median_rank=float(np.median(ranks)),
        mean_log_rank_over_n=float(np.log(ranks).mean() / cfg.n),
        reference_rate=cfg.rate - mutual_information_uniform(cfg.channel),
    )
