"""Chromatic and birefringent dispersion of a polarization-maintaining fiber.

The base material index comes from a three-term Sellmeier model with the
wavelength in microns.  The slow (high-index) axis is the fast-axis index
shifted by a wavelength-independent birefringence ``delta_n``.

All functions in this module take wavelengths in microns and angular
frequencies in rad/s, and broadcast over numpy arrays.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.constants import c

from .errors import OutOfDispersionWindow

GVM_RTOL = 1e-6


@dataclass(frozen=True)
class SellmeierModel:
    """n^2 = 1 + sum_i b_i L^2 / (L^2 - c_i), L in um, c_i in um^2."""

    b: tuple[float, float, float]
    c: tuple[float, float, float]
    window: tuple[float, float] = (0.25, 2.0)
    name: str = "custom"

    def __post_init__(self):
        if len(self.b) != 3 or len(self.c) != 3:
            raise ValueError("Sellmeier model needs exactly three b and three c terms")
        if min(self.b) <= 0 or min(self.c) <= 0:
            raise ValueError("Sellmeier coefficients must be positive")
        lo, hi = self.window
        if not 0 < lo < hi:
            raise ValueError(f"invalid validity window {self.window}")
        # a resonance inside the window would make n blow up or go imaginary
        for ci in self.c:
            if lo <= np.sqrt(ci) <= hi:
                raise ValueError(f"Sellmeier resonance at {np.sqrt(ci):.4g} um lies inside the window")
        probe = np.linspace(lo, hi, 257)
        n2 = self._n_squared(probe)
        if np.any(n2 <= 1.0):
            raise ValueError("Sellmeier model gives n <= 1 inside its window")

    def _n_squared(self, lam_um):
        lam2 = np.square(lam_um)
        return 1.0 + sum(bi * lam2 / (lam2 - ci) for bi, ci in zip(self.b, self.c))

    def check_window(self, lam_um):
        lam = np.asarray(lam_um, dtype=float)
        lo, hi = self.window
        if np.any(~np.isfinite(lam)) or np.any(lam < lo) or np.any(lam > hi):
            bad = lam[(lam < lo) | (lam > hi) | ~np.isfinite(lam)]
            raise OutOfDispersionWindow(
                f"wavelength {float(np.ravel(bad)[0]):.6g} um outside Sellmeier window [{lo}, {hi}] um"
            )

    def index(self, lam_um):
        self.check_window(lam_um)
        return np.sqrt(self._n_squared(lam_um))

    def dindex(self, lam_um):
        """Closed-form dn/dlambda in 1/um."""
        self.check_window(lam_um)
        lam = np.asarray(lam_um, dtype=float)
        lam2 = lam * lam
        dn2 = sum(-2.0 * bi * ci * lam / (lam2 - ci) ** 2 for bi, ci in zip(self.b, self.c))
        return dn2 / (2.0 * np.sqrt(self._n_squared(lam)))


# Malitson (1965) fused silica, 20 C
FUSED_SILICA = SellmeierModel(
    b=(0.6961663, 0.4079426, 0.8974794),
    c=(0.0684043**2, 0.1162414**2, 9.896161**2),
    name="fused_silica",
)

BUILTIN_MODELS = {"fused_silica": FUSED_SILICA}


class Axis(enum.Enum):
    FAST = "fast"
    SLOW = "slow"  # high-index axis, carries the pump


@dataclass(frozen=True)
class BirefringentFiber:
    base: SellmeierModel
    delta_n: float
    length: float  # m

    def __post_init__(self):
        # zero is accepted so degenerate configurations stay expressible;
        # solvers that need birefringence check for it themselves
        if not 0.0 <= self.delta_n < 1e-2:
            raise ValueError(f"delta_n must lie in [0, 1e-2), got {self.delta_n}")
        if self.length <= 0:
            raise ValueError(f"fiber length must be positive, got {self.length}")

    def with_delta_n(self, delta_n: float) -> BirefringentFiber:
        return BirefringentFiber(self.base, delta_n, self.length)

    def with_length(self, length: float) -> BirefringentFiber:
        return BirefringentFiber(self.base, self.delta_n, length)


def _offset(fiber: BirefringentFiber, axis: Axis) -> float:
    return fiber.delta_n if axis is Axis.SLOW else 0.0


def omega_to_um(omega):
    return 2e6 * np.pi * c / np.asarray(omega, dtype=float)


def um_to_omega(lam_um):
    return 2e6 * np.pi * c / np.asarray(lam_um, dtype=float)


def nm_to_omega(lam_nm):
    return 2e9 * np.pi * c / np.asarray(lam_nm, dtype=float)


def omega_to_nm(omega):
    return 2e9 * np.pi * c / np.asarray(omega, dtype=float)


def refractive_index(fiber: BirefringentFiber, axis: Axis, wavelength):
    """Phase index on ``axis`` at ``wavelength`` (um)."""
    return fiber.base.index(wavelength) + _offset(fiber, axis)


def wavenumber(fiber: BirefringentFiber, axis: Axis, omega):
    """k = n(omega) * omega / c in rad/m."""
    omega = np.asarray(omega, dtype=float)
    return refractive_index(fiber, axis, omega_to_um(omega)) * omega / c


def group_index(fiber: BirefringentFiber, axis: Axis, wavelength):
    lam = np.asarray(wavelength, dtype=float)
    n = refractive_index(fiber, axis, lam)
    return n - lam * fiber.base.dindex(lam)


def group_velocity(fiber: BirefringentFiber, axis: Axis, wavelength):
    """v_g = c / (n - lambda dn/dlambda) in m/s."""
    return c / group_index(fiber, axis, wavelength)


class GvmRegime(enum.Enum):
    PUMP_MATCHES_SIGNAL = "pump_matches_signal"
    PUMP_BETWEEN = "pump_between"
    PUMP_MATCHES_IDLER = "pump_matches_idler"
    OUTSIDE = "outside"


class GvmClassification(NamedTuple):
    regime: GvmRegime
    degenerate: bool
    v_pump: float
    v_signal: float
    v_idler: float


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= GVM_RTOL * max(abs(a), abs(b))


def gvm_classify(fiber: BirefringentFiber, lam_p, lam_s, lam_i) -> GvmClassification:
    """Classify the group-velocity arrangement of pump (slow axis) against
    signal and idler (fast axis).  Wavelengths in um.

    When signal and idler travel at the same speed the configuration is
    reported as OUTSIDE with ``degenerate=True``.
    """
    vp = float(group_velocity(fiber, Axis.SLOW, lam_p))
    vs = float(group_velocity(fiber, Axis.FAST, lam_s))
    vi = float(group_velocity(fiber, Axis.FAST, lam_i))
    if _close(vs, vi):
        return GvmClassification(GvmRegime.OUTSIDE, True, vp, vs, vi)
    if _close(vp, vs):
        regime = GvmRegime.PUMP_MATCHES_SIGNAL
    elif _close(vp, vi):
        regime = GvmRegime.PUMP_MATCHES_IDLER
    elif min(vs, vi) < vp < max(vs, vi):
        regime = GvmRegime.PUMP_BETWEEN
    else:
        regime = GvmRegime.OUTSIDE
    return GvmClassification(regime, False, vp, vs, vi)
