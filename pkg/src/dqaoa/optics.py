"""Thin-film optics: structure decoding, transfer-matrix transmission, FOM.

Planar multilayer stacks are described by an ordered list of (material,
thickness) layers between two semi-infinite media. Transmittance and
reflectance at normal incidence come from the standard characteristic
2x2 matrix per layer (phase delta = 2 pi N d / lambda, complex index
N = n + i k), composed across the stack.

Candidate filter structures are encoded as bitstrings: two bits per
layer select the material ('00' SiO2, '01' Si3N4, '10' Al2O3, '11'
TiO2, big-endian within the pair) and the fixed 1200 nm total budget is
split equally across layers.

The design figure of merit compares transmitted solar irradiance
against an ideal visible-band filter:

    fom = 10 * integral[(T_ideal*S)^2 - (T_designed*S)^2] / integral[S^2]

integrated over the shared wavelength grid (default 300-2500 nm).
Lower is better; the ideal filter itself scores exactly 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError
from .qubo import check_bits

TOTAL_THICKNESS_NM = 1200.0
MIN_LAYERS, MAX_LAYERS = 3, 50
VISIBLE_BAND_NM = (400.0, 700.0)

# two-bit material codes, big-endian within each pair
CODE_TO_MATERIAL = {(0, 0): "sio2", (0, 1): "si3n4", (1, 0): "al2o3", (1, 1): "tio2"}
MATERIAL_TO_CODE = {m: c for c, m in CODE_TO_MATERIAL.items()}


def default_grid(start: float = 300.0, stop: float = 2500.0, step: float = 5.0) -> np.ndarray:
    """Wavelength grid in nm, inclusive of both endpoints."""
    count = int(round((stop - start) / step)) + 1
    return start + step * np.arange(count)


@dataclass(frozen=True)
class Spectrum:
    """Real-valued samples on a strictly increasing wavelength grid (nm)."""

    wavelengths: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelengths, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if wl.ndim != 1 or wl.shape != vals.shape or wl.size < 1:
            raise ValueError("wavelengths and values must be equal-length 1-d arrays")
        if wl.size > 1 and np.any(np.diff(wl) <= 0):
            raise ValueError("wavelengths must be strictly increasing")
        if not (np.all(np.isfinite(wl)) and np.all(np.isfinite(vals))):
            raise ValueError("spectrum entries must be finite")
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "values", vals)

    def value_at(self, lam) -> np.ndarray:
        """Linear interpolation; exact at tabulated points."""
        lam = np.asarray(lam, dtype=np.float64)
        if np.any(lam < self.wavelengths[0]) or np.any(lam > self.wavelengths[-1]):
            raise ValueError("wavelength outside the tabulated range")
        return np.interp(lam, self.wavelengths, self.values)

    def resample(self, grid) -> "Spectrum":
        return Spectrum(np.asarray(grid, dtype=np.float64), self.value_at(grid))


@dataclass
class MaterialDb:
    """Complex refractive-index tables keyed by material name.

    "air" (n=1, k=0) is always available. Tables are (wavelength nm,
    n, k) triples with strictly increasing wavelengths and k >= 0;
    lookups interpolate linearly and reject out-of-range wavelengths.
    """

    tables: dict = field(default_factory=dict)

    def add(self, name: str, wavelengths, n, k) -> None:
        wl = np.asarray(wavelengths, dtype=np.float64)
        nn = np.asarray(n, dtype=np.float64)
        kk = np.asarray(k, dtype=np.float64)
        if wl.ndim != 1 or wl.shape != nn.shape or wl.shape != kk.shape or wl.size < 2:
            raise DataError(f"material {name!r}: need matching 1-d tables with >= 2 rows")
        if np.any(np.diff(wl) <= 0):
            raise DataError(f"material {name!r}: wavelengths must be strictly increasing")
        if np.any(kk < 0):
            raise DataError(f"material {name!r}: extinction k must be >= 0")
        if not (np.all(np.isfinite(wl)) and np.all(np.isfinite(nn)) and np.all(np.isfinite(kk))):
            raise DataError(f"material {name!r}: table entries must be finite")
        self.tables[name.lower()] = (wl, nn, kk)

    def add_constant(self, name: str, n: float, k: float = 0.0) -> None:
        self.add(name, [1.0, 1e9], [n, n], [k, k])

    def names(self) -> list[str]:
        return sorted(set(self.tables) | {"air"})

    def index(self, name: str, lam) -> np.ndarray:
        """Complex refractive index n + i k at wavelength(s) in nm."""
        key = name.lower()
        if key == "air" and key not in self.tables:
            return np.ones_like(np.asarray(lam, dtype=np.float64)) + 0j
        if key not in self.tables:
            raise DataError(f"material {name!r} not in database (have {self.names()})")
        wl, nn, kk = self.tables[key]
        lam = np.asarray(lam, dtype=np.float64)
        if np.any(lam < wl[0]) or np.any(lam > wl[-1]):
            raise ValueError(
                f"wavelength outside {name!r} coverage [{wl[0]:g}, {wl[-1]:g}] nm"
            )
        return np.interp(lam, wl, nn) + 1j * np.interp(lam, wl, kk)


@dataclass(frozen=True)
class LayerStack:
    """Ordered (material, thickness nm) layers between two semi-infinite media."""

    layers: tuple
    incident: str = "air"
    exit: str = "air"

    def __post_init__(self):
        layers = tuple((str(m), float(d)) for m, d in self.layers)
        for m, d in layers:
            if d <= 0:
                raise ValueError(f"layer {m!r} has non-positive thickness {d}")
        object.__setattr__(self, "layers", layers)

    @property
    def total_thickness(self) -> float:
        return sum(d for _, d in self.layers)


def decode_structure(bits, total_thickness: float = TOTAL_THICKNESS_NM) -> LayerStack:
    """Bitstring -> equal-thickness multilayer stack (two bits per layer)."""
    b = check_bits(bits)
    if b.size % 2 != 0:
        raise ValueError(f"bit count must be even, got {b.size}")
    nl = b.size // 2
    if not MIN_LAYERS <= nl <= MAX_LAYERS:
        raise ValueError(f"layer count {nl} outside [{MIN_LAYERS}, {MAX_LAYERS}]")
    per_layer = total_thickness / nl
    layers = [
        (CODE_TO_MATERIAL[(int(b[2 * j]), int(b[2 * j + 1]))], per_layer)
        for j in range(nl)
    ]
    return LayerStack(layers=tuple(layers))


def encode_structure(stack: LayerStack) -> np.ndarray:
    """Inverse of :func:`decode_structure` (materials only)."""
    bits = []
    for m, _ in stack.layers:
        if m not in MATERIAL_TO_CODE:
            raise ValueError(f"material {m!r} has no two-bit code")
        bits.extend(MATERIAL_TO_CODE[m])
    return np.asarray(bits, dtype=np.int8)


def _characteristic_rt(stack: LayerStack, db: MaterialDb, lam: np.ndarray):
    """Vectorized normal-incidence reflectance and transmittance."""
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    n0 = db.index(stack.incident, lam)
    if np.any(n0.imag != 0):
        raise DataError("incident medium must be non-absorbing")
    # the matrix algebra below uses the n - ik sign convention, so tables
    # stored as n + ik (k >= 0 absorbing) are conjugated on entry
    ns = np.conj(db.index(stack.exit, lam))
    # [B; C] = M_1 ... M_L [1; ns], built right to left
    b = np.ones_like(lam, dtype=np.complex128)
    c = ns.astype(np.complex128).copy()
    for mat, d in reversed(stack.layers):
        nm = np.conj(db.index(mat, lam))
        delta = 2.0 * np.pi * nm * d / lam
        cd = np.cos(delta)
        sd = np.sin(delta)
        b, c = cd * b + 1j * sd / nm * c, 1j * nm * sd * b + cd * c
    denom = n0 * b + c
    r = (n0 * b - c) / denom
    reflectance = np.abs(r) ** 2
    transmittance = 4.0 * n0.real * ns.real / np.abs(denom) ** 2
    return reflectance, transmittance


def tmm_transmittance(stack: LayerStack, db: MaterialDb, lambda_nm: float) -> float:
    """Power transmittance of the stack at one wavelength."""
    _, t = _characteristic_rt(stack, db, np.asarray([float(lambda_nm)]))
    return float(t[0])


def tmm_reflectance(stack: LayerStack, db: MaterialDb, lambda_nm: float) -> float:
    """Power reflectance of the stack at one wavelength."""
    r, _ = _characteristic_rt(stack, db, np.asarray([float(lambda_nm)]))
    return float(r[0])


def transmission_spectrum(stack: LayerStack, db: MaterialDb, grid=None) -> Spectrum:
    """Transmittance sampled over a wavelength grid (default 300-2500 nm)."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    _, t = _characteristic_rt(stack, db, grid)
    return Spectrum(grid, t)


def rt_spectra(stack: LayerStack, db: MaterialDb, grid=None) -> tuple[Spectrum, Spectrum]:
    """(reflectance, transmittance) spectra over the grid."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    r, t = _characteristic_rt(stack, db, grid)
    return Spectrum(grid, r), Spectrum(grid, t)


def ideal_filter_spectrum(grid=None, band: tuple[float, float] = VISIBLE_BAND_NM) -> Spectrum:
    """Unit transmission inside the band, zero outside."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    lo, hi = band
    return Spectrum(grid, ((grid >= lo) & (grid <= hi)).astype(np.float64))


def fom(t_designed: Spectrum, t_ideal: Spectrum, solar: Spectrum) -> float:
    """Squared transmitted-irradiance mismatch versus the ideal filter.

    Trapezoidal quadrature over the shared grid; lower is better, and
    identical designed/ideal spectra give exactly 0.
    """
    grids = (t_designed.wavelengths, t_ideal.wavelengths, solar.wavelengths)
    if not (np.array_equal(grids[0], grids[1]) and np.array_equal(grids[0], grids[2])):
        raise ValueError("all three spectra must share one wavelength grid")
    lam = grids[0]
    s = solar.values
    num = np.trapezoid((t_ideal.values * s) ** 2 - (t_designed.values * s) ** 2, lam)
    den = np.trapezoid(s ** 2, lam)
    if den == 0:
        raise ValueError("solar spectrum integrates to zero")
    return float(10.0 * num / den)


def load_spectrum(path) -> Spectrum:
    """Read a CSV with header ``wavelength_nm,value``."""
    rows = _read_csv(path, ("wavelength_nm", "value"))
    return Spectrum(rows[:, 0], rows[:, 1])


def load_material_table(path, name: str | None = None) -> tuple[str, np.ndarray, np.ndarray, np.ndarray]:
    """Read one material CSV with header ``wavelength_nm,n,k``."""
    rows = _read_csv(path, ("wavelength_nm", "n", "k"))
    mat = name if name is not None else Path(path).stem.lower()
    return mat, rows[:, 0], rows[:, 1], rows[:, 2]


def load_materials(path) -> MaterialDb:
    """Load every ``*.csv`` dispersion table in a directory."""
    p = Path(path)
    if not p.is_dir():
        raise DataError(f"materials directory not found: {p}")
    db = MaterialDb()
    files = sorted(p.glob("*.csv"))
    if not files:
        raise DataError(f"no material CSV files in {p}")
    for f in files:
        mat, wl, n, k = load_material_table(f)
        db.add(mat, wl, n, k)
    return db


def _read_csv(path, expected_header: tuple[str, ...]) -> np.ndarray:
    p = Path(path)
    if not p.exists():
        raise DataError(f"file not found: {p}")
    out = []
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != expected_header:
            raise DataError(f"{p}: line 1: expected header {','.join(expected_header)}")
        ncol = len(expected_header)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != ncol:
                raise DataError(f"{p}: line {lineno}: expected {ncol} columns")
            try:
                out.append([float(v) for v in row])
            except ValueError as exc:
                raise DataError(f"{p}: line {lineno}: non-numeric value") from exc
    if not out:
        raise DataError(f"{p}: no data rows")
    arr = np.asarray(out, dtype=np.float64)
    if arr.shape[0] > 1 and np.any(np.diff(arr[:, 0]) <= 0):
        bad = int(np.argmax(np.diff(arr[:, 0]) <= 0)) + 3  # header + 1-based + offset
        raise DataError(f"{p}: line {bad}: wavelengths must be strictly increasing")
    return arr


def _data_root():
    return resources.files("dqaoa") / "data"


def default_material_db() -> MaterialDb:
    """Bundled dispersion tables for the four candidate materials."""
    db = MaterialDb()
    root = _data_root() / "materials"
    for mat in ("sio2", "si3n4", "al2o3", "tio2"):
        with resources.as_file(root / f"{mat}.csv") as f:
            name, wl, n, k = load_material_table(f, mat)
            db.add(name, wl, n, k)
    return db


def default_solar_spectrum() -> Spectrum:
    """Bundled smooth solar irradiance model on the default grid."""
    with resources.as_file(_data_root() / "solar_am15_synthetic.csv") as f:
        return load_spectrum(f)
