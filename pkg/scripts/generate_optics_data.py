"""Regenerate the bundled dispersion tables and solar spectrum.

The dispersion tables are analytic models with standard handbook
coefficients (Sellmeier fits for SiO2, Si3N4 and Al2O3; a Cauchy fit
plus a UV absorption tail for TiO2), sampled on the default 300-2500 nm
grid. The solar file is a smooth analytic stand-in for terrestrial
irradiance: a 5772 K blackbody envelope with ozone cutoff and the main
O2/H2O absorption bands, normalized to ~900 W/m^2 over the grid. These
are adequate for demonstrations and tests; swap in measured tables via
the materials-directory / solar-file options for quantitative work.

Run from the repository root:  python scripts/generate_optics_data.py
"""

import csv
from pathlib import Path

import numpy as np

GRID = 300.0 + 5.0 * np.arange(441)  # 300..2500 nm inclusive
DATA = Path(__file__).resolve().parent.parent / "src" / "dqaoa" / "data"


def sellmeier(lam_um, terms):
    lam2 = lam_um ** 2
    n2 = 1.0 + sum(b * lam2 / (lam2 - c) for b, c in terms)
    return np.sqrt(n2)


def material_tables():
    um = GRID / 1000.0
    # fused silica (Malitson 1965)
    sio2 = sellmeier(um, [(0.6961663, 0.0684043**2),
                          (0.4079426, 0.1162414**2),
                          (0.8974794, 9.896161**2)])
    # LPCVD silicon nitride (Luke 2015)
    si3n4 = sellmeier(um, [(3.0249, 0.1353406**2),
                           (40314.0, 1239.842**2)])
    # sapphire, ordinary ray (Malitson 1962)
    al2o3 = sellmeier(um, [(1.4313493, 0.0726631**2),
                           (0.65054713, 0.1193242**2),
                           (5.3414021, 18.028251**2)])
    # amorphous titania film: Cauchy fit plus a band-edge absorption tail
    tio2 = 2.27 + 0.034 / um**2 + 0.0045 / um**4
    tio2_k = 0.2 * np.exp(-(GRID - 300.0) / 35.0)
    tio2_k[tio2_k < 1e-8] = 0.0
    zeros = np.zeros_like(GRID)
    return {
        "sio2": (sio2, zeros),
        "si3n4": (si3n4, zeros),
        "al2o3": (al2o3, zeros),
        "tio2": (tio2, tio2_k),
    }


def solar_model():
    lam = GRID
    # blackbody envelope at the solar effective temperature
    x = 1.43877e7 / (lam * 5772.0)
    envelope = lam ** -5.0 / np.expm1(x)
    # ozone cutoff in the UV
    uv = np.where(lam < 340.0, np.exp(-2.5 * ((340.0 - lam) / 30.0) ** 2), 1.0)
    # main O2 and H2O bands
    bands = [(760.0, 0.25, 9.0), (940.0, 0.35, 25.0), (1130.0, 0.45, 28.0),
             (1380.0, 0.78, 45.0), (1870.0, 0.85, 55.0), (2350.0, 0.30, 60.0)]
    absorb = np.ones_like(lam)
    for center, depth, width in bands:
        absorb *= 1.0 - depth * np.exp(-0.5 * ((lam - center) / width) ** 2)
    s = envelope * uv * absorb
    s *= 900.0 / np.trapezoid(s, lam)
    return s


def write_csv(path, header, columns):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([f"{v:.6g}" for v in row])


def main():
    for name, (n, k) in material_tables().items():
        write_csv(DATA / "materials" / f"{name}.csv", ["wavelength_nm", "n", "k"],
                  [GRID, n, k])
    write_csv(DATA / "solar_am15_synthetic.csv", ["wavelength_nm", "value"],
              [GRID, solar_model()])
    print(f"wrote tables under {DATA}")


if __name__ == "__main__":
    main()
