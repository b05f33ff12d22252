"""Count-rate bookkeeping and heralded photon statistics.

The forward model is a pulse-by-pulse Monte Carlo of a pair source read
out by binary (click / no-click) detectors: one herald detector on the
signal arm and two detectors behind a splitter on the idler arm.  Only
pulses that carry at least one pair are materialized; the number of such
pulses in a block is itself drawn binomially, which keeps the statistics
exact while skipping the ~99% of empty pulses.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, astuple, dataclass

import numpy as np

from .errors import UnphysicalEfficiency, ZeroDenominator

MAX_HERALDING_EFFICIENCY = 1.05
BLOCK_PULSES = 1 << 24
N_MAX = 64


class PairStatistics(enum.Enum):
    POISSONIAN = "poissonian"
    THERMAL = "thermal"  # single Schmidt mode


@dataclass(frozen=True)
class DetectionChain:
    path_efficiency_signal: float
    path_efficiency_idler: float
    detector_efficiency: float

    def __post_init__(self):
        for name, v in asdict(self).items():
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    @property
    def signal_total(self) -> float:
        return self.path_efficiency_signal * self.detector_efficiency

    @property
    def idler_total(self) -> float:
        return self.path_efficiency_idler * self.detector_efficiency


@dataclass(frozen=True)
class CountRates:
    signal: float  # Hz
    idler: float
    coincidence: float
    threefold: float | None = None
    duration: float | None = None  # s

    def __post_init__(self):
        if min(self.signal, self.idler, self.coincidence) < 0:
            raise ValueError("count rates must be non-negative")
        if self.coincidence > min(self.signal, self.idler):
            raise ValueError("coincidence rate exceeds a singles rate")


@dataclass(frozen=True)
class SourceRateModel:
    mean_pairs_per_pulse: float
    repetition_rate: float  # Hz
    statistics: PairStatistics = PairStatistics.POISSONIAN

    def __post_init__(self):
        if not 0 <= self.mean_pairs_per_pulse <= 0.5:
            raise ValueError(f"mean pairs per pulse must lie in [0, 0.5], got {self.mean_pairs_per_pulse}")
        if self.repetition_rate <= 0:
            raise ValueError("repetition rate must be positive")

    def pgf(self, z):
        """Probability generating function E[z^n] of the pair number."""
        mu = self.mean_pairs_per_pulse
        z = np.asarray(z, dtype=float)
        if self.statistics is PairStatistics.POISSONIAN:
            return np.exp(mu * (z - 1.0))
        return 1.0 / (1.0 + mu * (1.0 - z))

    def pmf(self, n_max: int = N_MAX) -> np.ndarray:
        n = np.arange(n_max + 1)
        mu = self.mean_pairs_per_pulse
        if mu == 0:
            return (n == 0).astype(float)
        if self.statistics is PairStatistics.POISSONIAN:
            logp = -mu + n * math.log(mu) - np.array([math.lgamma(k + 1) for k in n])
            return np.exp(logp)
        q = mu / (1.0 + mu)
        return (1.0 - q) * q**n


def heralding_efficiency(rates: CountRates, detector_efficiency: float) -> float:
    """eta_h = R_c / (R_s eta_d): idler collection probability given a herald,
    corrected for detector efficiency only."""
    if rates.signal <= 0 or detector_efficiency <= 0:
        raise ZeroDenominator("heralding efficiency needs R_s > 0 and eta_d > 0")
    eta = rates.coincidence / (rates.signal * detector_efficiency)
    if eta > MAX_HERALDING_EFFICIENCY:
        raise UnphysicalEfficiency(f"heralding efficiency {eta:.3f} exceeds {MAX_HERALDING_EFFICIENCY}")
    return eta


def overall_detection_efficiency(rates: CountRates) -> float:
    if rates.signal <= 0:
        raise ZeroDenominator("overall efficiency needs R_s > 0")
    return rates.coincidence / rates.signal


def herald_probability_per_pulse(eta_h: float, signal_rate: float, rep_rate: float) -> float:
    if rep_rate <= 0:
        raise ZeroDenominator("repetition rate must be positive")
    return eta_h * signal_rate / rep_rate


def heralded_g2(n_herald: float, n_h_i1: float, n_h_i2: float, n_h_i1_i2: float) -> float:
    """g2 = N_h * N_hi1i2 / (N_hi1 * N_hi2)."""
    if n_h_i1 <= 0 or n_h_i2 <= 0:
        raise ZeroDenominator("g2 needs non-zero herald-idler coincidences on both detectors")
    return n_h_i1_i2 * n_herald / (n_h_i1 * n_h_i2)


def invert_rates(signal: float, idler: float, coincidence: float, rep_rate: float) -> tuple[float, float, float]:
    """First-order inversion of measured rates into (mu, eta_signal, eta_idler).

    R_s = f mu eta_s, R_i = f mu eta_i, R_c = f mu eta_s eta_i.
    """
    if coincidence <= 0 or rep_rate <= 0:
        raise ZeroDenominator("inversion needs R_c > 0 and f_rep > 0")
    mu = signal * idler / (coincidence * rep_rate)
    return mu, coincidence / idler, coincidence / signal


def poisson_interval(count: float, duration: float, z: float = 1.0) -> tuple[float, float]:
    """Rate and its z-sigma Poisson half-width."""
    return count / duration, z * math.sqrt(count) / duration


@dataclass(frozen=True)
class ClickCounts:
    pulses: int
    herald: int
    idler: int  # either idler detector
    coincidence: int  # herald and either idler detector
    herald_idler1: int
    herald_idler2: int
    threefold: int  # herald and both idler detectors

    def __add__(self, other: ClickCounts) -> ClickCounts:
        return ClickCounts(*(a + b for a, b in zip(astuple(self), astuple(other))))


@dataclass(frozen=True)
class ClickProbabilities:
    herald: float
    idler: float
    coincidence: float
    herald_idler1: float
    herald_idler2: float
    threefold: float


def click_probabilities(model: SourceRateModel, chain: DetectionChain, idler_split: float = 0.5) -> ClickProbabilities:
    """Exact per-pulse click probabilities via the pair-number generating function.

    Each pair independently reaches the herald with probability a and idler
    detector k with probability b_k; the probability that a set of detectors
    stays dark is G(prod of per-pair dark probabilities).
    """
    g = model.pgf
    a = chain.signal_total
    b1 = chain.idler_total * idler_split
    b2 = chain.idler_total * (1.0 - idler_split)
    b = b1 + b2
    dark_s = g(1 - a)
    dark_1 = g(1 - b1)
    dark_2 = g(1 - b2)
    dark_i = g(1 - b)
    dark_s1 = g((1 - a) * (1 - b1))
    dark_s2 = g((1 - a) * (1 - b2))
    dark_si = g((1 - a) * (1 - b))
    herald = 1 - dark_s
    idler = 1 - dark_i
    coinc = 1 - dark_s - dark_i + dark_si
    h1 = 1 - dark_s - dark_1 + dark_s1
    h2 = 1 - dark_s - dark_2 + dark_s2
    three = 1 - dark_s - dark_1 - dark_2 + dark_s1 + dark_s2 + dark_i - dark_si
    return ClickProbabilities(*(float(x) for x in (herald, idler, coinc, h1, h2, three)))


def first_order_rates(model: SourceRateModel, chain: DetectionChain) -> CountRates:
    f, mu = model.repetition_rate, model.mean_pairs_per_pulse
    a, b = chain.signal_total, chain.idler_total
    return CountRates(f * mu * a, f * mu * b, f * mu * a * b)


@dataclass(frozen=True)
class ForwardCountResult:
    counts: ClickCounts
    rates: CountRates
    expected: ClickProbabilities
    first_order: CountRates
    g2: float | None
    duration: float
    seed: int

    def expected_counts(self) -> dict[str, float]:
        n = self.counts.pulses
        return {k: n * v for k, v in asdict(self.expected).items()}

    def sigma(self) -> dict[str, float]:
        n = self.counts.pulses
        return {k: math.sqrt(n * v * (1 - v)) for k, v in asdict(self.expected).items()}


def _simulate_block(rng: np.random.Generator, pulses: int, cdf: np.ndarray, a: float, b1: float, b2: float) -> ClickCounts:
    p_nonzero = 1.0 - cdf[0]
    busy = int(rng.binomial(pulses, p_nonzero)) if p_nonzero > 0 else 0
    if busy == 0:
        return ClickCounts(pulses, 0, 0, 0, 0, 0, 0)
    # inverse-CDF draw from the zero-truncated pair-number distribution
    u = cdf[0] + rng.random(busy) * p_nonzero
    n = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    n = np.maximum(n, 1)
    s = rng.binomial(n, a) > 0
    split = rng.multinomial(n, [b1, b2, max(0.0, 1.0 - b1 - b2)])
    i1 = split[:, 0] > 0
    i2 = split[:, 1] > 0
    ii = i1 | i2
    return ClickCounts(
        pulses,
        int(s.sum()),
        int(ii.sum()),
        int((s & ii).sum()),
        int((s & i1).sum()),
        int((s & i2).sum()),
        int((s & i1 & i2).sum()),
    )


def forward_count_model(
    model: SourceRateModel,
    chain: DetectionChain,
    duration: float,
    seed: int,
    idler_split: float = 0.5,
) -> ForwardCountResult:
    """Monte Carlo of ``duration`` seconds of pulses.

    Pulses are processed in blocks of ``BLOCK_PULSES``; block k draws from
    ``SeedSequence(seed).spawn(...)[k]`` so the result depends only on the
    seed, not on how the work is partitioned in time.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if not 0 <= idler_split <= 1:
        raise ValueError("idler split must lie in [0, 1]")
    total = int(round(model.repetition_rate * duration))
    cdf = np.cumsum(model.pmf())
    cdf /= cdf[-1]
    a = chain.signal_total
    b1 = chain.idler_total * idler_split
    b2 = chain.idler_total * (1.0 - idler_split)
    n_blocks = max(1, -(-total // BLOCK_PULSES))
    seqs = np.random.SeedSequence(seed).spawn(n_blocks)
    counts = ClickCounts(0, 0, 0, 0, 0, 0, 0)
    for k, ss in enumerate(seqs):
        pulses = min(BLOCK_PULSES, total - k * BLOCK_PULSES)
        counts = counts + _simulate_block(np.random.default_rng(ss), pulses, cdf, a, b1, b2)
    t = counts.pulses / model.repetition_rate
    rates = CountRates(counts.herald / t, counts.idler / t, counts.coincidence / t, counts.threefold / t, t)
    g2 = None
    if counts.herald_idler1 > 0 and counts.herald_idler2 > 0:
        g2 = heralded_g2(counts.herald, counts.herald_idler1, counts.herald_idler2, counts.threefold)
    return ForwardCountResult(
        counts,
        rates,
        click_probabilities(model, chain, idler_split),
        first_order_rates(model, chain),
        g2,
        t,
        seed,
    )
