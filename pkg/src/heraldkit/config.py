"""JSON run configuration.

Every section maps onto one domain object; unknown keys are rejected and
validation errors carry the dotted key path.  Units are in the key names.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .counts import DetectionChain, PairStatistics, SourceRateModel, invert_rates
from .dispersion import BUILTIN_MODELS, BirefringentFiber, SellmeierModel
from .jsa import FilterShape, SpectralFilter
from .phasematch import PumpEnvelope, PumpShape, calibrate_delta_n

SCHEMA_VERSION = 1


class ConfigError(Exception):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SellmeierSpec(_Strict):
    b: tuple[float, float, float]
    c_um2: tuple[float, float, float]
    window_um: tuple[float, float] = (0.25, 2.0)


class CalibrationSpec(_Strict):
    pump_nm: float
    signal_nm: float
    idler_nm: float


class FiberSpec(_Strict):
    sellmeier: str | SellmeierSpec = "fused_silica"
    delta_n: Optional[float] = None
    calibration: Optional[CalibrationSpec] = None
    length_m: float = Field(gt=0)

    @model_validator(mode="after")
    def _one_birefringence_source(self):
        if (self.delta_n is None) == (self.calibration is None):
            raise ValueError("give exactly one of delta_n or calibration")
        return self


class PumpSpec(_Strict):
    center_nm: float = Field(gt=0)
    fwhm_nm: float = Field(gt=0)
    shape: Literal["sech2", "gaussian"] = "sech2"


class GridSpec(_Strict):
    n_signal: int = Field(512, ge=64)
    n_idler: int = Field(512, ge=64)
    span_factor: float = Field(4.0, gt=0)


class FilterSpec(_Strict):
    center_nm: Optional[float] = None  # None: phase-matched signal wavelength
    fwhm_nm: float = Field(gt=0)
    shape: Literal["supergaussian", "rectangular"] = "supergaussian"
    order: int = Field(4, ge=2)
    peak_transmission: float = Field(1.0, gt=0, le=1)


class HomSpec(_Strict):
    delay_min_ps: float = -30.0
    delay_max_ps: float = 30.0
    n_delays: int = Field(241, ge=11)
    delta_n_offset: float = 0.0  # applied to source A
    baseline_counts: float = Field(300.0, gt=0)
    background_counts: float = Field(0.0, ge=0)


class MonteCarloSpec(_Strict):
    duration_s: float = Field(1.0, gt=0)
    statistics: Literal["poissonian", "thermal"] = "poissonian"
    idler_split: float = Field(0.5, ge=0, le=1)


class RatesSpec(_Strict):
    signal_hz: float = Field(ge=0)
    idler_hz: float = Field(ge=0)
    coincidence_hz: float = Field(ge=0)
    detector_efficiency: float = Field(gt=0, le=1)
    rep_rate_hz: float = Field(gt=0)
    monte_carlo: Optional[MonteCarloSpec] = None


class TuneSpec(_Strict):
    pump_min_nm: float
    pump_max_nm: float
    steps: int = Field(21, ge=1)
    pressure_shift_nm: float = 0.2
    pressure_points: int = Field(5, ge=2)
    filter_widths_nm: list[float] = [5.0, 3.0, 2.0, 1.5, 1.0, 0.5, 0.3, 0.2, 0.15, 0.1]


class OptimizeSpec(_Strict):
    bounds_nm: tuple[float, float] = (0.1, 1.0)
    tolerance_nm: float = Field(0.005, gt=0)


class RunConfig(_Strict):
    schema_version: Literal[1]
    fiber: FiberSpec
    pump: Optional[PumpSpec] = None
    grid: GridSpec = GridSpec()
    herald_filter: Optional[FilterSpec] = None
    hom: Optional[HomSpec] = None
    rates: Optional[RatesSpec] = None
    tune: Optional[TuneSpec] = None
    optimize: Optional[OptimizeSpec] = None
    seed: int = Field(0, ge=0, lt=2**64)

    def require(self, section: str):
        value = getattr(self, section)
        if value is None:
            raise ConfigError(f"missing config key: {section}")
        return value


def _format_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{path}: {e['msg']}")
    return "; ".join(lines)


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from exc


def sellmeier_model(spec: FiberSpec) -> SellmeierModel:
    if isinstance(spec.sellmeier, str):
        try:
            return BUILTIN_MODELS[spec.sellmeier]
        except KeyError:
            raise ConfigError(
                f"fiber.sellmeier: unknown model {spec.sellmeier!r} (known: {sorted(BUILTIN_MODELS)})"
            ) from None
    s = spec.sellmeier
    try:
        return SellmeierModel(s.b, s.c_um2, s.window_um)
    except ValueError as exc:
        raise ConfigError(f"fiber.sellmeier: {exc}") from exc


def build_fiber(spec: FiberSpec) -> BirefringentFiber:
    """Domain errors from calibration propagate unchanged."""
    model = sellmeier_model(spec)
    if spec.calibration is not None:
        cal = spec.calibration
        dn = calibrate_delta_n(cal.pump_nm, cal.signal_nm, cal.idler_nm, model)
    else:
        dn = spec.delta_n
    try:
        return BirefringentFiber(model, dn, spec.length_m)
    except ValueError as exc:
        raise ConfigError(f"fiber: {exc}") from exc


def build_pump(spec: PumpSpec) -> PumpEnvelope:
    return PumpEnvelope(spec.center_nm, spec.fwhm_nm, PumpShape(spec.shape))


def build_filter(spec: FilterSpec, default_center_nm: float) -> SpectralFilter:
    center = spec.center_nm if spec.center_nm is not None else default_center_nm
    return SpectralFilter(center, spec.fwhm_nm, FilterShape(spec.shape), spec.order, spec.peak_transmission)


def build_rate_model(spec: RatesSpec) -> tuple[SourceRateModel, DetectionChain]:
    """Invert the measured rates into a forward model at first order."""
    mc = spec.monte_carlo or MonteCarloSpec()
    mu, eta_s, eta_i = invert_rates(spec.signal_hz, spec.idler_hz, spec.coincidence_hz, spec.rep_rate_hz)
    d = spec.detector_efficiency
    try:
        chain = DetectionChain(min(1.0, eta_s / d), min(1.0, eta_i / d), d)
        model = SourceRateModel(mu, spec.rep_rate_hz, PairStatistics(mc.statistics))
    except ValueError as exc:
        raise ConfigError(f"rates: {exc}") from exc
    return model, chain
