"""Two-source Hong-Ou-Mandel interference of heralded idler photons."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, PlateauNotReached
from .jsa import HeraldedState
from .phasematch import fwhm

PLATEAU_TOL = 1e-2


@dataclass(frozen=True, eq=False)
class HomScan:
    delays: np.ndarray  # s
    coincidence_probability: np.ndarray
    visibility: float


@dataclass(frozen=True, eq=False)
class FourfoldScan:
    delays: np.ndarray  # s
    coincidence_probability: np.ndarray
    expected_counts: np.ndarray
    background_counts: float
    sampled_counts: np.ndarray | None = None
    seed: int | None = None


@dataclass(frozen=True)
class BackgroundEstimate:
    counts: float
    delta_v: float | None


def _check_axes(rho_a: HeraldedState, rho_b: HeraldedState) -> np.ndarray:
    a, b = rho_a.idler_axis, rho_b.idler_axis
    if a.shape != b.shape or not np.allclose(a, b, rtol=1e-12, atol=0.0):
        raise GridMismatch("heralded states live on different idler frequency axes")
    return a


def hom_overlap(rho_a: HeraldedState, rho_b: HeraldedState, tau):
    """Tr[rho_a Phi(tau) rho_b Phi(tau)^+], Phi(tau) = diag(exp(-i omega tau)).

    ``tau`` may be a scalar or an array of delays in seconds.
    """
    omega = _check_axes(rho_a, rho_b)
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    # only frequency differences enter, so reference to the axis centre
    w = omega - omega[omega.size // 2]
    kernel = rho_a.rho.T * rho_b.rho
    u = np.exp(-1j * np.outer(tau_arr, w))
    v = u.conj() @ kernel.T
    overlap = np.clip(np.real(np.sum(u * v, axis=1)), 0.0, 1.0)
    return overlap if np.ndim(tau) else float(overlap[0])


def coincidence_probability(rho_a: HeraldedState, rho_b: HeraldedState, tau):
    """Balanced-splitter coincidence probability 0.5 (1 - overlap)."""
    return 0.5 * (1.0 - hom_overlap(rho_a, rho_b, tau))


def visibility(scan: HomScan | np.ndarray, delays: np.ndarray | None = None) -> float:
    """Dip visibility (P_inf - P_min) / P_inf, with P_inf averaged over the
    outer 10% of delay samples."""
    if isinstance(scan, HomScan):
        delays, prob = scan.delays, scan.coincidence_probability
    else:
        prob = np.asarray(scan, dtype=float)
        if delays is None:
            raise ValueError("delays are required when passing a bare probability array")
    delays = np.asarray(delays, dtype=float)
    n_edge = max(2, int(round(0.1 * delays.size)))
    edge = np.argsort(np.abs(delays))[-n_edge:]
    dev = np.max(np.abs(prob[edge] - 0.5))
    if dev > PLATEAU_TOL:
        raise PlateauNotReached(f"scan edges deviate from 0.5 by {dev:.3g}; widen the delay range")
    p_inf = float(np.mean(prob[edge]))
    v = (p_inf - float(np.min(prob))) / p_inf
    return min(max(v, 0.0), 1.0)


def hom_scan(rho_a: HeraldedState, rho_b: HeraldedState, delays) -> HomScan:
    delays = np.asarray(delays, dtype=float)
    prob = coincidence_probability(rho_a, rho_b, delays)
    return HomScan(delays, prob, visibility(prob, delays))


def dip_fwhm(scan: HomScan) -> float:
    """Full width at half depth of the dip, in seconds."""
    order = np.argsort(scan.delays)
    depth = 0.5 - scan.coincidence_probability[order]
    return fwhm(scan.delays[order], depth)


def multi_pair_background(
    threefold_rate_a: float,
    signal_rate_b: float,
    threefold_rate_b: float,
    signal_rate_a: float,
    coincidence_window: float,
    duration: float,
    baseline_counts: float | None = None,
) -> BackgroundEstimate:
    """Accidental fourfolds from a threefold in one source coinciding with a
    herald from the other: (R3a Rs_b + R3b Rs_a) * window * duration.

    With ``baseline_counts`` (the dip plateau) also returns the visibility
    floor the background imposes, background / baseline.
    """
    rates = (threefold_rate_a, signal_rate_b, threefold_rate_b, signal_rate_a)
    if min(rates) < 0:
        raise ValueError("rates must be non-negative")
    if coincidence_window <= 0 or duration < 0:
        raise ValueError("window must be positive and duration non-negative")
    counts = (threefold_rate_a * signal_rate_b + threefold_rate_b * signal_rate_a) * coincidence_window * duration
    delta_v = None
    if baseline_counts is not None:
        if baseline_counts <= 0:
            raise ValueError("baseline counts must be positive")
        delta_v = counts / baseline_counts
    return BackgroundEstimate(counts, delta_v)


def simulate_fourfold_scan(
    rho_a: HeraldedState,
    rho_b: HeraldedState,
    delays,
    baseline_counts: float,
    background: float = 0.0,
    seed: int | None = None,
) -> FourfoldScan:
    """Expected fourfold counts per delay, baseline * 2 P_c + background.

    With a ``seed`` the counts are also Poisson-sampled from a generator
    created for this call only.
    """
    if baseline_counts <= 0:
        raise ValueError("baseline counts must be positive")
    if background < 0:
        raise ValueError("background must be non-negative")
    delays = np.asarray(delays, dtype=float)
    prob = coincidence_probability(rho_a, rho_b, delays)
    expected = baseline_counts * 2.0 * prob + background
    sampled = None
    if seed is not None:
        sampled = np.random.default_rng(seed).poisson(expected)
    return FourfoldScan(delays, prob, expected, float(background), sampled, seed)
