"""Discretized joint spectral amplitude and the heralded idler state.

Amplitudes live on a uniform (signal x idler) angular-frequency grid.  The
midpoint quadrature weight sqrt(d_omega_s * d_omega_i) is folded in whenever
a matrix is handed to linear algebra, so singular values and density-matrix
traces are probabilities directly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.constants import c

from .dispersion import BirefringentFiber, omega_to_nm
from .errors import FilterOutsideGrid, GridTooCoarse, SvdFailure
from .phasematch import (
    PumpEnvelope,
    envelope_fwhm_hz,
    fwhm,
    phase_matching_function,
    solve_central,
    two_photon_envelope,
)

MIN_POINTS = 64
MIN_ENVELOPE_CELLS = 8


class Arm(enum.Enum):
    SIGNAL = "signal"
    IDLER = "idler"


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    signal_axis: np.ndarray  # rad/s
    idler_axis: np.ndarray  # rad/s

    def __post_init__(self):
        for name in ("signal_axis", "idler_axis"):
            ax = np.array(getattr(self, name), dtype=float)
            if ax.ndim != 1 or ax.size < MIN_POINTS:
                raise ValueError(f"{name} needs at least {MIN_POINTS} points")
            step = np.diff(ax)
            if np.any(step <= 0):
                raise ValueError(f"{name} must be strictly increasing")
            if np.ptp(step) > 1e-6 * step.mean():
                raise ValueError(f"{name} must be uniformly spaced")
            ax.flags.writeable = False
            object.__setattr__(self, name, ax)

    @classmethod
    def centered(cls, omega_s0, omega_i0, half_span_s, half_span_i, n=512, m=512):
        return cls(
            omega_s0 + np.linspace(-half_span_s, half_span_s, n),
            omega_i0 + np.linspace(-half_span_i, half_span_i, m),
        )

    @property
    def d_signal(self) -> float:
        return float(self.signal_axis[1] - self.signal_axis[0])

    @property
    def d_idler(self) -> float:
        return float(self.idler_axis[1] - self.idler_axis[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.signal_axis.size, self.idler_axis.size

    def refined(self, factor: int = 2) -> SpectralGrid:
        """Same span, ``factor`` times as many points per axis."""
        n, m = self.shape
        return SpectralGrid(
            np.linspace(self.signal_axis[0], self.signal_axis[-1], factor * n),
            np.linspace(self.idler_axis[0], self.idler_axis[-1], factor * m),
        )


@dataclass(frozen=True, eq=False)
class JointSpectralAmplitude:
    grid: SpectralGrid
    amplitude: np.ndarray  # (N, M) complex, rows = signal
    norm_weight: float = 1.0

    def weighted(self) -> np.ndarray:
        """Amplitude with the quadrature weights folded in; sum |.|^2 is the
        retained pair probability."""
        return self.amplitude * np.sqrt(self.grid.d_signal * self.grid.d_idler)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.weighted()) ** 2))

    def transpose(self) -> JointSpectralAmplitude:
        return JointSpectralAmplitude(
            SpectralGrid(self.grid.idler_axis, self.grid.signal_axis),
            self.amplitude.T.copy(),
            self.norm_weight,
        )


@dataclass(frozen=True)
class SchmidtDecomposition:
    schmidt_probabilities: np.ndarray
    purity: float
    schmidt_number: float


class FilterShape(enum.Enum):
    RECTANGULAR = "rectangular"
    SUPERGAUSSIAN = "supergaussian"


@dataclass(frozen=True)
class SpectralFilter:
    """Band-pass filter defined on vacuum wavelength.

    Super-Gaussian of order N: ``peak * exp(-ln2 |2 (lam - center) / fwhm|^N)``,
    so order 2 is a Gaussian and larger orders flatten the top.
    """

    center_nm: float
    fwhm_nm: float
    shape: FilterShape = FilterShape.SUPERGAUSSIAN
    order: int = 4
    peak_transmission: float = 1.0

    def __post_init__(self):
        if self.fwhm_nm <= 0:
            raise ValueError(f"filter FWHM must be positive, got {self.fwhm_nm}")
        if not 0 < self.peak_transmission <= 1:
            raise ValueError(f"peak transmission must lie in (0, 1], got {self.peak_transmission}")
        if self.order < 2:
            raise ValueError(f"super-Gaussian order must be >= 2, got {self.order}")

    def transmission(self, lam_nm):
        x = 2.0 * np.abs(np.asarray(lam_nm, dtype=float) - self.center_nm) / self.fwhm_nm
        if self.shape is FilterShape.RECTANGULAR:
            return np.where(x <= 1.0, self.peak_transmission, 0.0)
        return self.peak_transmission * np.exp(-np.log(2.0) * x**self.order)

    def transmission_omega(self, omega):
        return self.transmission(omega_to_nm(omega))


@dataclass(frozen=True, eq=False)
class HeraldedState:
    idler_axis: np.ndarray  # rad/s
    rho: np.ndarray  # (M, M) complex, unit trace
    herald_probability: float

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho.conj().T, self.rho)))


@dataclass(frozen=True)
class MarginalSpectrum:
    omega: np.ndarray
    wavelength_nm: np.ndarray
    intensity: np.ndarray  # probability density per rad/s
    fwhm_omega: float
    fwhm_nm: float


def build_jsa(
    fiber: BirefringentFiber,
    pump: PumpEnvelope,
    grid: SpectralGrid,
    mode: str = "convolution",
) -> JointSpectralAmplitude:
    """Pump envelope times phase-matching function, L2-normalized on ``grid``."""
    env_fwhm = 2.0 * np.pi * envelope_fwhm_hz(pump, mode)
    cells = env_fwhm / (grid.d_signal + grid.d_idler)
    if cells < MIN_ENVELOPE_CELLS:
        raise GridTooCoarse(
            f"pump envelope spans {cells:.1f} grid cells along the diagonal (< {MIN_ENVELOPE_CELLS})"
        )
    ws = grid.signal_axis[:, None]
    wi = grid.idler_axis[None, :]
    nu_sum = (ws + wi - 2.0 * pump.omega0) / (2.0 * np.pi)
    amp = two_photon_envelope(pump, nu_sum, mode) * phase_matching_function(fiber, ws, wi)
    jsa = JointSpectralAmplitude(grid, amp)
    total = jsa.norm()
    if not np.isfinite(total) or total <= 0:
        raise GridTooCoarse("joint spectral amplitude vanishes on the grid")
    amp = amp / np.sqrt(total)
    amp.flags.writeable = False
    return JointSpectralAmplitude(grid, amp, 1.0)


def default_grid(
    fiber: BirefringentFiber,
    pump: PumpEnvelope,
    n: int = 512,
    m: int = 512,
    span_factor: float = 4.0,
    mode: str = "convolution",
    probe_points: int = 256,
) -> SpectralGrid:
    """Grid centred on the phase-matched pair, spanning +-``span_factor`` times
    the wider unfiltered marginal FWHM.

    The marginal width is measured on a coarse probe grid that is rescaled
    until the requested span sits comfortably inside it.
    """
    sol = solve_central(fiber, pump.center_nm)
    ws0 = 2e9 * np.pi * c / sol.lambda_s
    wi0 = 2e9 * np.pi * c / sol.lambda_i
    env = 2.0 * np.pi * envelope_fwhm_hz(pump, mode)
    half = 4.0 * env
    target = half
    for _ in range(12):
        # enough probe points to keep the envelope resolved at any span
        pts = max(probe_points, int(np.ceil(4.0 * MIN_ENVELOPE_CELLS * half / env)) + 1)
        probe = SpectralGrid.centered(ws0, wi0, half, half, pts, pts)
        f = build_jsa(fiber, pump, probe, mode)
        target = span_factor * max(
            marginal_spectrum(f, Arm.SIGNAL).fwhm_omega,
            marginal_spectrum(f, Arm.IDLER).fwhm_omega,
        )
        if 0.25 * half <= target <= 0.8 * half:
            break
        half = 2.0 * target
    return SpectralGrid.centered(ws0, wi0, target, target, n, m)


def schmidt(jsa: JointSpectralAmplitude) -> SchmidtDecomposition:
    a = jsa.weighted()
    if not np.all(np.isfinite(a)):
        raise SvdFailure("amplitude matrix contains non-finite entries")
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    p = s**2
    total = p.sum()
    if total <= 0:
        raise SvdFailure("amplitude matrix is identically zero")
    p = p / total
    purity = float(np.sum(p**2))
    return SchmidtDecomposition(p, purity, 1.0 / purity)


def apply_filter(jsa: JointSpectralAmplitude, arm: Arm, spectral_filter: SpectralFilter) -> JointSpectralAmplitude:
    """Multiply one arm by the amplitude transmission sqrt(T).  The result is
    not renormalized; ``norm_weight`` tracks the retained probability."""
    if arm is Arm.SIGNAL:
        t = spectral_filter.transmission_omega(jsa.grid.signal_axis)[:, None]
    else:
        t = spectral_filter.transmission_omega(jsa.grid.idler_axis)[None, :]
    before = np.sum(np.abs(jsa.amplitude) ** 2)
    amp = jsa.amplitude * np.sqrt(t)
    retained = float(np.sum(np.abs(amp) ** 2) / before) if before > 0 else 0.0
    if retained < 1e-6:
        raise FilterOutsideGrid(
            f"filter at {spectral_filter.center_nm} nm keeps only {retained:.2e} of the pair probability"
        )
    amp.flags.writeable = False
    return JointSpectralAmplitude(jsa.grid, amp, jsa.norm_weight * retained)


def heralded_density_matrix(
    jsa: JointSpectralAmplitude, herald_filter: SpectralFilter | None = None
) -> HeraldedState:
    """Idler state conditioned on a signal click behind ``herald_filter``."""
    filtered = jsa if herald_filter is None else apply_filter(jsa, Arm.SIGNAL, herald_filter)
    a = filtered.weighted()
    rho = a.T @ a.conj()
    trace = float(np.real(np.trace(rho)))
    rho = rho / trace
    rho = 0.5 * (rho + rho.conj().T)
    return HeraldedState(jsa.grid.idler_axis, rho, filtered.norm_weight)


def marginal_spectrum(jsa: JointSpectralAmplitude, arm: Arm) -> MarginalSpectrum:
    inten = np.abs(jsa.amplitude) ** 2
    if arm is Arm.SIGNAL:
        omega, density = jsa.grid.signal_axis, inten.sum(axis=1) * jsa.grid.d_idler
    else:
        omega, density = jsa.grid.idler_axis, inten.sum(axis=0) * jsa.grid.d_signal
    width = fwhm(omega, density)
    center = omega[int(np.argmax(density))]
    lam = omega_to_nm(omega)
    width_nm = float(omega_to_nm(center - 0.5 * width) - omega_to_nm(center + 0.5 * width))
    return MarginalSpectrum(omega, lam, density, width, width_nm)

