#!/usr/bin/env python3
"""Writes data/birthweight_synth.csv: 1168 synthetic births with the response and eight
covariates of a typical birthweight quantile regression. Values are simulated, not real."""

import csv
import math
import random
import sys
from pathlib import Path

N = 1168
SEED = 20240611


def draw(rng):
    age = min(45.0, max(15.0, rng.gauss(27.0, 5.5)))
    age = round(age + rng.random() / 12.0, 3)
    black = 1 if rng.random() < 0.17 else 0
    married = 1 if rng.random() < (0.45 if black else 0.75) else 0
    educ = min(17, max(8, round(rng.gauss(12.8 + 0.6 * married, 2.2))))
    boy = 1 if rng.random() < 0.513 else 0
    smoker = rng.random() < (0.22 if married else 0.3)
    cigar = 0 if not smoker else rng.choice([2, 3, 5, 5, 10, 10, 10, 15, 20, 20, 30])
    novisit = 1 if rng.random() < 0.012 else 0
    wtgain = max(0, min(98, round(rng.gauss(30.5, 12.0))))

    mean = (3350.0 + 0.9 * (age - 27.0) - 1.6 * (age - 27.0) ** 2 + 9.5 * (wtgain - 30.0)
            - 11.0 * cigar + 115.0 * boy - 210.0 * black + 60.0 * married - 230.0 * novisit
            + 12.0 * (educ - 12.0))
    # skewed to the left with spread growing in wtgain, like observed birthweights
    scale = 430.0 * (1.0 + 0.004 * abs(wtgain - 30.0))
    e = rng.gauss(0.0, 1.0)
    if rng.random() < 0.08:
        e -= abs(rng.gauss(0.0, 2.5))
    weight = max(500.0, round(mean + scale * e))
    return [weight, age, wtgain, cigar, boy, black, married, novisit, educ]


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "birthweight_synth.csv"
    rng = random.Random(SEED)
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["weight", "age", "wtgain", "cigar", "boy", "black", "married", "novisit", "educ"])
        for _ in range(N):
            w.writerow(draw(rng))


if __name__ == "__main__":
    main()
