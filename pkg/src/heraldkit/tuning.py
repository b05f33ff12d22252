"""Design-space exploration: pump tuning, birefringence tuning and
pump-bandwidth optimization."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import BirefringentFiber
from .errors import BoundaryMaximum, EmptyCurve, NoSolution
from .hom import hom_overlap
from .jsa import (
    SpectralFilter,
    SpectralGrid,
    build_jsa,
    default_grid,
    heralded_density_matrix,
    schmidt,
)
from .phasematch import PumpEnvelope, PumpShape, solve_central

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class TuningCurve:
    rows: np.ndarray  # (K, 3): lambda_p, lambda_s, lambda_i in nm
    failed: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class PressureScanResult:
    offsets: np.ndarray  # delta_n offsets applied to fiber A
    idler_nm: np.ndarray
    visibility: np.ndarray

    @property
    def total_shift_nm(self) -> float:
        return float(self.idler_nm[-1] - self.idler_nm[0])


@dataclass
class BandwidthOptimum:
    optimal_fwhm: float  # nm
    purity: float
    brackets: list[tuple[float, float]] = field(default_factory=list)
    evaluations: dict[float, float] = field(default_factory=dict)


def pump_tuning_curve(fiber: BirefringentFiber, lambda_p_range: tuple[float, float], steps: int) -> TuningCurve:
    rows, failed = [], []
    for lp in np.linspace(lambda_p_range[0], lambda_p_range[1], steps):
        try:
            sol = solve_central(fiber, float(lp))
        except NoSolution:
            failed.append(float(lp))
            continue
        rows.append((sol.lambda_p, sol.lambda_s, sol.lambda_i))
    if failed:
        log.info("no phase matching at %d pump wavelengths: %s", len(failed), failed)
    if not rows:
        raise EmptyCurve(f"no phase-matched solutions in {lambda_p_range} nm")
    return TuningCurve(np.array(rows), tuple(failed))


def birefringence_sensitivity(fiber: BirefringentFiber, lambda_p: float, step: float = 1e-7) -> float:
    """d(lambda_i)/d(delta_n) in nm per unit birefringence (central difference)."""
    up = solve_central(fiber.with_delta_n(fiber.delta_n + step), lambda_p).lambda_i
    down = solve_central(fiber.with_delta_n(fiber.delta_n - step), lambda_p).lambda_i
    return (up - down) / (2.0 * step)


def pressure_scan(
    fiber_a: BirefringentFiber,
    fiber_b: BirefringentFiber,
    offsets,
    pump: PumpEnvelope,
    herald_filter: SpectralFilter | None = None,
    grid: SpectralGrid | None = None,
) -> PressureScanResult:
    """Zero-delay HOM visibility between source A, whose birefringence is
    shifted by each offset, and the untouched source B."""
    offsets = np.asarray(offsets, dtype=float)
    if grid is None:
        grid = default_grid(fiber_b, pump)
    rho_b = heralded_density_matrix(build_jsa(fiber_b, pump, grid), herald_filter)
    idler, vis = [], []
    for off in offsets:
        fa = fiber_a.with_delta_n(fiber_a.delta_n + off)
        idler.append(solve_central(fa, pump.center_nm).lambda_i)
        rho_a = heralded_density_matrix(build_jsa(fa, pump, grid), herald_filter)
        vis.append(hom_overlap(rho_a, rho_b, 0.0))
    return PressureScanResult(offsets, np.array(idler), np.array(vis))


def unfiltered_purity(fiber: BirefringentFiber, pump: PumpEnvelope, n: int = 512, span_factor: float = 4.0) -> float:
    grid = default_grid(fiber, pump, n, n, span_factor)
    return schmidt(build_jsa(fiber, pump, grid)).purity


def golden_section_max(f, lo: float, hi: float, tol: float, max_iter: int = 200):
    """Maximize a unimodal ``f`` on [lo, hi]; returns (x, f(x), brackets)."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    brackets = [(a, b)]
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        brackets.append((a, b))
    x = 0.5 * (a + b)
    return x, f(x), brackets


def optimize_pump_bandwidth(
    fiber: BirefringentFiber,
    lambda_p: float,
    bounds: tuple[float, float] = (0.1, 1.0),
    tolerance: float = 0.005,
    shape: PumpShape = PumpShape.SECH2,
    n: int = 512,
    span_factor: float = 4.0,
) -> BandwidthOptimum:
    """Pump FWHM (nm) maximizing the unfiltered heralded purity."""
    lo, hi = bounds
    if not 0.05 <= lo < hi <= 2.0:
        raise ValueError(f"bandwidth bounds must satisfy 0.05 <= lo < hi <= 2.0 nm, got {bounds}")
    cache: dict[float, float] = {}

    def purity(bw: float) -> float:
        if bw not in cache:
            cache[bw] = unfiltered_purity(fiber, PumpEnvelope(lambda_p, bw, shape), n, span_factor)
        return cache[bw]

    x, px, brackets = golden_section_max(purity, lo, hi, tolerance)
    p_lo, p_hi = purity(lo), purity(hi)
    if p_lo >= px or p_hi >= px or x - lo <= tolerance or hi - x <= tolerance:
        raise BoundaryMaximum(
            f"purity maximum at the edge of [{lo}, {hi}] nm (P(lo)={p_lo:.4f}, P(opt)={px:.4f}, P(hi)={p_hi:.4f})"
        )
    return BandwidthOptimum(x, px, brackets, dict(sorted(cache.items())))


def filter_tradeoff_curve(
    fiber: BirefringentFiber,
    pump: PumpEnvelope,
    filter_widths,
    template: SpectralFilter | None = None,
    grid: SpectralGrid | None = None,
) -> np.ndarray:
    """Rows of (width nm, heralded purity, herald probability).

    Filters share every property of ``template`` except the width; by default
    a unit-peak order-4 super-Gaussian centred on the phase-matched signal.
    """
    widths = np.asarray(filter_widths, dtype=float)
    if np.any(widths <= 0):
        raise ValueError("filter widths must be positive")
    if grid is None:
        grid = default_grid(fiber, pump)
    if template is None:
        template = SpectralFilter(solve_central(fiber, pump.center_nm).lambda_s, 1.0)
    jsa = build_jsa(fiber, pump, grid)
    rows = []
    for w in widths:
        flt = SpectralFilter(template.center_nm, float(w), template.shape, template.order, template.peak_transmission)
        state = heralded_density_matrix(jsa, flt)
        rows.append((float(w), state.purity, state.herald_probability))
    return np.array(rows)
