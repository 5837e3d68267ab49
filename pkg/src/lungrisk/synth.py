"""License-free synthetic inputs with known ground truth.

Patients get uniform ordinal scores; a latent severity score is a weighted
sum of the standardized *planted* features plus Gaussian noise, and levels
are assigned by cutting the latent score at fixed class proportions.  With
no planted effects the level is independent of every feature.
"""

from __future__ import annotations

import csv
import io
from typing import Mapping

import numpy as np

from .ingest import FEATURE_COLUMNS, LEVELS

PROFILES: dict[str, dict[str, float]] = {
    "planted": {"Passive Smoker": 2.0, "Obesity": 2.0},
    "none": {},
    # broad monotone dependence, loosely shaped like the real data
    "graded": {
        "Passive Smoker": 1.6, "Coughing of Blood": 1.5, "Obesity": 1.4, "Alcohol use": 1.3,
        "Wheezing": 1.1, "Chest Pain": 1.1, "Balanced Diet": 1.0, "Genetic Risk": 0.9,
        "Dust Allergy": 0.9, "Air Pollution": 0.8, "Fatigue": 0.6, "Dry Cough": 0.5,
    },
}

# canonical class shares: Low 303, Medium 332, High 365 out of 1000
DEFAULT_SHARES = (0.303, 0.332, 0.365)
ORDINAL_MAX = 8
AGES = np.arange(15, 80, 5)


def _resolve(effects: Mapping[str, float] | str | None) -> dict[str, float]:
    if effects is None:
        return dict(PROFILES["planted"])
    if isinstance(effects, str):
        if effects not in PROFILES:
            raise ValueError(f"unknown effect profile {effects!r}; choose from {sorted(PROFILES)}")
        return dict(PROFILES[effects])
    names = {c.lower(): c for c in (*FEATURE_COLUMNS, "Age", "Gender")}
    out = {}
    for k, v in effects.items():
        if k.lower() not in names:
            raise ValueError(f"unknown feature {k!r} in effect profile")
        out[names[k.lower()]] = float(v)
    return out


def generate_patients(n: int, effects: Mapping[str, float] | str | None = None, seed: int = 0,
                      noise: float = 1.0, shares=DEFAULT_SHARES) -> tuple[str, dict]:
    """Return (CSV text in the patient schema, ground-truth description)."""
    if n < 10:
        raise ValueError("synthetic tables need n >= 10")
    eff = _resolve(effects)
    rng = np.random.default_rng(seed)
    age = rng.choice(AGES, size=n)
    gender = rng.integers(1, 3, size=n)
    ords = rng.integers(1, ORDINAL_MAX + 1, size=(n, len(FEATURE_COLUMNS)))
    cols = {"Age": age, "Gender": gender, **{f: ords[:, j] for j, f in enumerate(FEATURE_COLUMNS)}}

    latent = noise * rng.standard_normal(n)
    for name, w in eff.items():
        x = cols[name].astype(float)
        latent += w * (x - x.mean()) / (x.std() or 1.0)
    cuts = np.quantile(latent, np.cumsum(shares)[:-1])
    level_idx = np.searchsorted(cuts, latent, side="right")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Patient Id", "Age", "Gender", *FEATURE_COLUMNS, "Level"])
    for i in range(n):
        w.writerow([f"P{i + 1}", int(age[i]), int(gender[i]), *(int(v) for v in ords[i]),
                    LEVELS[int(level_idx[i])]])
    truth = {"n": n, "seed": seed, "noise": noise, "effects": eff, "shares": list(shares)}
    return buf.getvalue(), truth


def generate_environment(seed: int = 0) -> dict[str, str]:
    """Synthetic incidence, forest-status and tree-cover-loss CSVs.

    Year coverage mirrors the real sources: sparse incidence years, forest
    status 2002-2023, tree cover loss 2001-2023.
    """
    rng = np.random.default_rng(seed)
    inc_years = [2000, 2012, 2018, 2020, 2022]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Year", "Number", "Total", "Rate"])
    for y in inc_years:
        cases = int(8000 + 800 * (y - 2000) + rng.integers(-500, 500))
        total = int(cases / (0.13 + 0.01 * rng.random()))
        w.writerow([y, f"{cases:,}", f"{total:,}", f"{cases / total:.6f}"])
    incidence = buf.getvalue()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Year", "Total area of forested land", "Natural forest", "Planted forest"])
    for y in range(2002, 2024):
        natural = 9800 + 60 * (y - 2002) + rng.normal(0, 20)
        planted = 1900 + 150 * (y - 2002) + rng.normal(0, 20)
        natural, planted = round(natural, 2), round(planted, 2)
        w.writerow([f"{y}.0", f"{natural + planted:,.2f}", f"{natural:,.2f}", f"{planted:,.2f}"])
    forest = buf.getvalue()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iso", "umd_tree_cover_loss__year", "umd_tree_cover_loss__ha",
                "gfw_gross_emissions_co2e_all_gases__Mg"])
    for y in range(2001, 2024):
        loss = 45000 + 9000 * (y - 2001) + rng.normal(0, 8000)
        co2 = loss * (480 + rng.normal(0, 30))
        w.writerow(["VNM", y, f"{max(loss, 0.0):.5f}", f"{max(co2, 0.0):.2f}"])
    loss_csv = buf.getvalue()
    return {"incidence": incidence, "forest": forest, "tree_cover_loss": loss_csv}
