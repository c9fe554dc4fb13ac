#!/usr/bin/env python3
"""Writes the mini-Nordic fixture: 11 bidding zones, 15 interconnectors, 24 hours.

Exchanges with countries outside the fixture are folded into the zones' fixed injections.
HVDC loss coefficients and linear factors are the published ones; AC lines carry
resistance-derived coefficients and a synthetic flow history for calibration.
"""

import argparse
import csv
import json
import math
import random
from pathlib import Path

ZONES = ["NO1", "NO2", "NO3", "NO5", "SE1", "SE2", "SE3", "SE4", "FI", "DK1", "DK2"]

# id, kind, from, to, rated, a, b, c, alpha, beta
LINES = [
    ("NO1-NO2", "AC", "NO1", "NO2", 2200, 1.2e-5, 0, 0, None, None),
    ("NO1-NO3", "AC", "NO1", "NO3", 500, 4.0e-5, 0, 0, None, None),
    ("NO1-NO5", "AC", "NO1", "NO5", 600, 3.5e-5, 0, 0, None, None),
    ("NO2-NO5", "AC", "NO2", "NO5", 500, 3.0e-5, 0, 0, None, None),
    ("NO3-SE2", "AC", "NO3", "SE2", 1000, 2.0e-5, 0, 0, None, None),
    ("NO1-SE3", "AC", "NO1", "SE3", 2100, 1.5e-5, 0, 0, None, None),
    ("SE1-SE2", "AC", "SE1", "SE2", 3300, 0.8e-5, 0, 0, None, None),
    ("SE2-SE3", "AC", "SE2", "SE3", 7300, 0.4e-5, 0, 0, None, None),
    ("SE3-SE4", "AC", "SE3", "SE4", 5400, 0.5e-5, 0, 0, None, None),
    ("SE1-FI", "AC", "SE1", "FI", 1500, 1.0e-5, 0, 0, None, None),
    ("SE4-DK2", "AC", "SE4", "DK2", 1300, 1.8e-5, 0, 0, None, None),
    ("Skagerrak", "HVDC", "NO2", "DK1", 1700, 0.000017, 0, 8.2405, 0.0159, 8.2405),
    ("KontiSkan", "HVDC", "SE3", "DK1", 740, 0.000035, 0, 2.1616, 0.0156, 2.1616),
    ("Storebaelt", "HVDC", "DK1", "DK2", 600, 0.000025, 0, 1.7590, 0.0142, 1.7590),
    ("FennoSkan", "HVDC", "SE3", "FI", 1200, 0.000026, 0, 4.6490, 0.0124, 4.6490),
]

# zone -> [(id suffix, cost EUR/MWh, capacity MW)]
GENERATORS = {
    "NO1": [("hydro", 24.0, 3500), ("peak", 180.0, 3000)],
    "NO2": [("hydro", 22.0, 7500), ("peak", 180.0, 3000)],
    "NO3": [("hydro", 25.0, 3000), ("peak", 180.0, 3000)],
    "NO5": [("hydro", 23.0, 4500), ("peak", 180.0, 3000)],
    "SE1": [("hydro", 20.0, 4000), ("peak", 190.0, 3000)],
    "SE2": [("hydro", 21.0, 7000), ("peak", 190.0, 3000)],
    "SE3": [("nuclear", 9.0, 6500), ("chp", 45.0, 2500), ("peak", 190.0, 4000)],
    "SE4": [("chp", 48.0, 1200), ("peak", 200.0, 3000)],
    "FI": [("nuclear", 9.5, 2800), ("chp", 41.0, 3500), ("peak", 200.0, 4000)],
    "DK1": [("coal", 36.0, 2500), ("gas", 58.0, 1200), ("peak", 210.0, 2000)],
    "DK2": [("coal", 38.0, 1600), ("gas", 61.0, 900), ("peak", 210.0, 2000)],
}

# zone -> (base demand MW, daily swing share)
DEMAND = {
    "NO1": (3600, 0.18), "NO2": (3500, 0.15), "NO3": (2700, 0.12), "NO5": (1900, 0.12),
    "SE1": (1200, 0.10), "SE2": (1900, 0.12), "SE3": (9500, 0.20), "SE4": (2600, 0.20),
    "FI": (9400, 0.16), "DK1": (2300, 0.25), "DK2": (1600, 0.25),
}

# Fixed exchanges with the rest of Europe plus wind, MW (positive = into the zone).
NEIGHBOURS = {
    "NO2": -650.0,   # NorNed, exporting
    "SE4": -900.0,   # SwePol, Baltic Cable, NordBalt
    "FI": 700.0,     # Estlink and imports from the east
    "DK1": -400.0,   # exchange with Germany
    "DK2": -300.0,   # Kontek
}
WIND = {"DK1": 1500.0, "DK2": 450.0, "SE3": 900.0, "SE4": 500.0, "FI": 300.0}


def hour_shape(h):
    """Daily load shape: night trough around 03:00, peak around 17:00."""
    return math.sin((h - 9) / 24.0 * 2.0 * math.pi)


def fmt(v):
    return repr(round(v, 3)) if isinstance(v, float) else str(v)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "mini_nordic")
    ap.add_argument("--hours", type=int, default=24)
    ap.add_argument("--seed", type=int, default=2017)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "zones.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id"])
        for z in ZONES:
            w.writerow([z])

    with open(out / "generators.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "zone", "cost", "p_min", "p_max"])
        for z in ZONES:
            for suffix, cost, cap in GENERATORS[z]:
                w.writerow([f"{z}_{suffix}", z, fmt(cost), 0, cap])

    with open(out / "interconnectors.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "kind", "from", "to", "rated", "quad_a", "quad_b", "quad_c", "alpha", "beta"])
        for lid, kind, a, b, rated, qa, qb, qc, alpha, beta in LINES:
            w.writerow([lid, kind, a, b, rated, qa, qb, qc,
                        "" if alpha is None else alpha, "" if beta is None else beta])

    with open(out / "atc.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["hour", "line", "fwd", "rev"])
        for h in range(args.hours):
            for lid, _, _, _, rated, *_ in LINES:
                fwd = rated * rng.choice([1.0, 1.0, 1.0, 0.9, 0.75])
                rev = rated * rng.choice([1.0, 1.0, 1.0, 0.9, 0.75])
                w.writerow([h, lid, fmt(float(round(fwd))), fmt(float(round(rev)))])

    with open(out / "demand.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["hour", "zone", "mw"])
        for h in range(args.hours):
            for z in ZONES:
                base, swing = DEMAND[z]
                mw = base * (1.0 + swing * hour_shape(h)) * rng.uniform(0.98, 1.02)
                w.writerow([h, z, fmt(round(mw, 1))])

    with open(out / "injections.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["hour", "zone", "mw"])
        for h in range(args.hours):
            for z in ZONES:
                mw = NEIGHBOURS.get(z, 0.0) * rng.uniform(0.8, 1.2)
                if z in WIND:
                    mw += WIND[z] * max(0.0, 0.5 + 0.4 * math.sin(h / 7.0 + ZONES.index(z)) + rng.uniform(-0.1, 0.1))
                if mw != 0.0:
                    w.writerow([h, z, fmt(round(mw, 1))])

    # Synthetic flow history for the AC lines, one year at a coarse weekly sampling.
    with open(out / "flows.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["hour", "line", "mw"])
        for h in range(0, 8760, 168):
            for lid, kind, _, _, rated, *_ in LINES:
                if kind != "AC":
                    continue
                mw = 0.0 if rng.random() < 0.05 else rng.gauss(0.2 * rated, 0.3 * rated)
                w.writerow([h, lid, fmt(round(max(-rated, min(rated, mw)), 1))])

    manifest = {
        "zones": "zones.csv",
        "generators": "generators.csv",
        "interconnectors": "interconnectors.csv",
        "atc": "atc.csv",
        "demand": "demand.csv",
        "injections": "injections.csv",
        "flows": "flows.csv",
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
