"""Birefringent four-wave-mixing phase matching.

The pump travels on the slow axis, signal and idler on the fast axis.
Signal is always the blue (higher-frequency) photon.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np
from scipy.constants import c
from scipy.signal import fftconvolve

from .dispersion import (
    FUSED_SILICA,
    Axis,
    BirefringentFiber,
    SellmeierModel,
    nm_to_omega,
    omega_to_nm,
    refractive_index,
    wavenumber,
)
from .errors import InconsistentTriple, NonPositiveBirefringence, NoSolution

SCAN_STEPS = 2000
DK_TOL = 1e-6  # rad/m
ARCCOSH_SQRT2 = float(np.arccosh(np.sqrt(2.0)))


class PumpShape(enum.Enum):
    SECH2 = "sech2"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PumpEnvelope:
    center_nm: float
    fwhm_nm: float  # intensity FWHM
    shape: PumpShape = PumpShape.SECH2

    def __post_init__(self):
        if self.fwhm_nm <= 0:
            raise ValueError(f"pump bandwidth must be positive, got {self.fwhm_nm}")
        if self.center_nm <= 0:
            raise ValueError(f"pump wavelength must be positive, got {self.center_nm}")

    @property
    def fwhm_hz(self) -> float:
        lam = self.center_nm * 1e-9
        return c * self.fwhm_nm * 1e-9 / lam**2

    @property
    def omega0(self) -> float:
        return float(nm_to_omega(self.center_nm))

    def with_fwhm(self, fwhm_nm: float) -> PumpEnvelope:
        return PumpEnvelope(self.center_nm, fwhm_nm, self.shape)


@dataclass(frozen=True)
class PhaseMatchSolution:
    lambda_p: float
    lambda_s: float
    lambda_i: float
    residual_delta_k: float


def delta_k(fiber: BirefringentFiber, omega_s, omega_i):
    """2 k_slow(omega_p) - k_fast(omega_s) - k_fast(omega_i), omega_p the mean."""
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    omega_p = 0.5 * (omega_s + omega_i)
    return (
        2.0 * wavenumber(fiber, Axis.SLOW, omega_p)
        - wavenumber(fiber, Axis.FAST, omega_s)
        - wavenumber(fiber, Axis.FAST, omega_i)
    )


def _max_detuning(fiber: BirefringentFiber, omega_p: float) -> float:
    lo, hi = fiber.base.window
    omega_hi = float(nm_to_omega(lo * 1e3))
    omega_lo = float(nm_to_omega(hi * 1e3))
    return min(omega_hi - omega_p, omega_p - omega_lo) * (1.0 - 1e-12)


def solve_central(fiber: BirefringentFiber, lambda_p_nm: float) -> PhaseMatchSolution:
    """Find the non-trivial detuning where the mismatch vanishes.

    Scans ``SCAN_STEPS`` detunings out to the edge of the dispersion window,
    then bisects the first sign change.
    """
    omega_p = float(nm_to_omega(lambda_p_nm))
    fiber.base.check_window(lambda_p_nm * 1e-3)
    if fiber.delta_n <= 0:
        raise NoSolution("no birefringence: only the trivial degenerate root exists")
    d_max = _max_detuning(fiber, omega_p)
    if d_max <= 0:
        raise NoSolution(f"pump at {lambda_p_nm} nm sits on the edge of the dispersion window")

    def f(d):
        return delta_k(fiber, omega_p + d, omega_p - d)

    grid = d_max * np.arange(1, SCAN_STEPS + 1) / SCAN_STEPS
    vals = f(grid)
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if vals[0] == 0.0:
        lo = hi = grid[0]
    elif flips.size == 0:
        raise NoSolution(f"mismatch never changes sign for pump at {lambda_p_nm} nm")
    else:
        lo, hi = grid[flips[0]], grid[flips[0] + 1]
    f_lo = float(f(lo))
    d = lo
    for _ in range(200):
        d = 0.5 * (lo + hi)
        fd = float(f(d))
        if abs(fd) < DK_TOL or hi - lo <= 4 * np.finfo(float).eps * hi:
            break
        if np.sign(fd) == np.sign(f_lo):
            lo, f_lo = d, fd
        else:
            hi = d
    residual = float(f(d))
    if abs(residual) >= DK_TOL:
        raise NoSolution(f"bisection stalled at |dk| = {abs(residual):.3g} rad/m")
    return PhaseMatchSolution(
        lambda_p=float(lambda_p_nm),
        lambda_s=float(omega_to_nm(omega_p + d)),
        lambda_i=float(omega_to_nm(omega_p - d)),
        residual_delta_k=residual,
    )


def calibrate_delta_n(
    lambda_p_nm: float,
    lambda_s_nm: float,
    lambda_i_nm: float,
    model: SellmeierModel = FUSED_SILICA,
) -> float:
    """Birefringence that phase-matches the given (pump, signal, idler) triple.

    The triple is first projected onto exact energy conservation with the
    idler held fixed, so rounded experimental wavelengths are accepted.
    """
    lhs = 2.0 / lambda_p_nm
    rhs = 1.0 / lambda_s_nm + 1.0 / lambda_i_nm
    mismatch = abs(lhs - rhs) / lhs
    lambda_s_proj = 1.0 / (lhs - 1.0 / lambda_i_nm) if lhs > 1.0 / lambda_i_nm else np.inf
    shift = abs(lambda_s_proj - lambda_s_nm)
    if mismatch > 1e-4 or shift > 1.0:
        raise InconsistentTriple(
            "energy conservation 2/lambda_p = 1/lambda_s + 1/lambda_i violated: "
            f"relative mismatch {mismatch:.2e}, signal shift {shift:.3g} nm"
        )
    fiber = BirefringentFiber(model, 0.0, 1.0)
    omega_p = float(nm_to_omega(lambda_p_nm))
    omega_i = float(nm_to_omega(lambda_i_nm))
    omega_s = 2.0 * omega_p - omega_i
    n_p = float(refractive_index(fiber, Axis.FAST, lambda_p_nm * 1e-3))
    k_sum = float(wavenumber(fiber, Axis.FAST, omega_s) + wavenumber(fiber, Axis.FAST, omega_i))
    dn = (k_sum - 2.0 * n_p * omega_p / c) * c / (2.0 * omega_p)
    if dn <= 0:
        raise NonPositiveBirefringence(f"triple requires delta_n = {dn:.3g} <= 0")
    if dn >= 1e-2:
        raise NonPositiveBirefringence(f"triple requires delta_n = {dn:.3g}, outside the fiber model")
    return dn


def _sech_width(fwhm_hz: float) -> float:
    return fwhm_hz / (2.0 * ARCCOSH_SQRT2)


def _amplitude(shape: PumpShape, fwhm_hz: float, nu):
    if shape is PumpShape.SECH2:
        x = np.abs(nu) / _sech_width(fwhm_hz)
        # 2 e^-x / (1 + e^-2x) avoids overflow of cosh
        e = np.exp(-x)
        return 2.0 * e / (1.0 + e * e)
    return np.exp(-2.0 * np.log(2.0) * (nu / fwhm_hz) ** 2)


def pump_amplitude(pump: PumpEnvelope, nu):
    """Real, transform-limited spectral amplitude with unit peak; ``nu`` in Hz
    offset from the pump center."""
    return _amplitude(pump.shape, pump.fwhm_hz, np.asarray(nu, dtype=float))


@functools.lru_cache(maxsize=64)
def _self_convolution(shape: PumpShape, fwhm_hz: float, points: int = 2**15 + 1):
    if shape is PumpShape.SECH2:
        half = 80.0 * _sech_width(fwhm_hz)
    else:
        half = 12.0 * fwhm_hz
    nu = np.linspace(-half, half, points)
    amp = _amplitude(shape, fwhm_hz, nu)
    conv = fftconvolve(amp, amp, mode="same")
    conv = np.clip(conv, 0.0, None)
    conv = 0.5 * (conv + conv[::-1])
    conv /= conv[points // 2]
    nu.flags.writeable = False
    conv.flags.writeable = False
    return nu, conv


def two_photon_envelope(pump: PumpEnvelope, nu_sum, mode: str = "convolution"):
    """Pump contribution to the pair amplitude at sum-frequency offset
    ``nu_sum`` (Hz).

    ``mode="convolution"`` (default) uses the self-convolution of the pump
    amplitude, since two pump photons are annihilated; ``mode="substitution"``
    evaluates the single-photon amplitude at ``nu_sum`` directly.
    """
    nu_sum = np.asarray(nu_sum, dtype=float)
    if mode == "substitution":
        return pump_amplitude(pump, nu_sum)
    if mode != "convolution":
        raise ValueError(f"unknown envelope mode {mode!r}")
    nu, conv = _self_convolution(pump.shape, float(pump.fwhm_hz))
    return np.interp(nu_sum, nu, conv, left=0.0, right=0.0)


def envelope_fwhm_hz(pump: PumpEnvelope, mode: str = "convolution") -> float:
    """Intensity FWHM of ``two_photon_envelope`` along the sum-frequency axis."""
    if mode == "substitution":
        return pump.fwhm_hz
    nu, conv = _self_convolution(pump.shape, float(pump.fwhm_hz))
    return fwhm(nu, conv**2)


def fwhm(x, y) -> float:
    """Interpolated full width at half maximum of a single-peaked sampled curve."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    k = int(np.argmax(y))
    half = 0.5 * y[k]
    above = np.nonzero(y >= half)[0]
    a, b = above[0], above[-1]
    if a == 0 or b == len(y) - 1:
        return float(x[-1] - x[0])
    xl = x[a - 1] + (half - y[a - 1]) * (x[a] - x[a - 1]) / (y[a] - y[a - 1])
    xr = x[b] + (half - y[b]) * (x[b + 1] - x[b]) / (y[b + 1] - y[b])
    return float(xr - xl)


def phase_matching_function(fiber: BirefringentFiber, omega_s, omega_i):
    """sinc(dk L / 2) exp(i dk L / 2)."""
    x = 0.5 * delta_k(fiber, omega_s, omega_i) * fiber.length
    return np.sinc(x / np.pi) * np.exp(1j * x)
