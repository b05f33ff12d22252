"""File formats.

Binary JSA dump (all little-endian)::

    offset  type            content
    0       8 bytes         magic b"HKJSA001"
    8       uint32          N (signal points)
    12      uint32          M (idler points)
    16      float64         norm_weight
    24      float64[N]      signal axis, rad/s
    ..      float64[M]      idler axis, rad/s
    ..      complex128[N*M] amplitude, row-major (signal index slowest),
                            each entry as (real, imag) float64 pair
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .jsa import JointSpectralAmplitude, SpectralGrid

MAGIC = b"HKJSA001"
_HEADER = struct.Struct("<8sIId")


def write_jsa_csv(jsa: JointSpectralAmplitude, path: str | Path) -> Path:
    path = Path(path)
    ws, wi = np.meshgrid(jsa.grid.signal_axis, jsa.grid.idler_axis, indexing="ij")
    data = np.column_stack([ws.ravel(), wi.ravel(), jsa.amplitude.real.ravel(), jsa.amplitude.imag.ravel()])
    with path.open("w", newline="") as fh:
        fh.write("omega_s_rad_per_s,omega_i_rad_per_s,re_f,im_f\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")
    return path


def write_jsa_binary(jsa: JointSpectralAmplitude, path: str | Path) -> Path:
    path = Path(path)
    n, m = jsa.grid.shape
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, m, float(jsa.norm_weight)))
        fh.write(np.ascontiguousarray(jsa.grid.signal_axis, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(jsa.grid.idler_axis, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(jsa.amplitude, dtype="<c16").tobytes())
    return path


def read_jsa_binary(path: str | Path) -> JointSpectralAmplitude:
    raw = Path(path).read_bytes()
    magic, n, m, weight = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a JSA dump (magic {magic!r})")
    expected = _HEADER.size + 8 * (n + m) + 16 * n * m
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    off = _HEADER.size
    ws = np.frombuffer(raw, "<f8", n, off)
    off += 8 * n
    wi = np.frombuffer(raw, "<f8", m, off)
    off += 8 * m
    amp = np.frombuffer(raw, "<c16", n * m, off).reshape(n, m).astype(complex)
    return JointSpectralAmplitude(SpectralGrid(ws.copy(), wi.copy()), amp, weight)


def write_table(path: str | Path, header: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> Path:
    """Write a table as CSV (header row carries units) or as a JSON list of records."""
    path = Path(path)
    rows = [[_plain(v) for v in r] for r in rows]
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in r])
    elif fmt == "json":
        write_json(path, [dict(zip(header, r)) for r in rows])
    else:
        raise ValueError(f"unknown table format {fmt!r}")
    return path


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n")
    return path
