"""Winding number against zero count, and the planar bound, on seeded random cubic fields.

    python3 scripts/random_planar_fields.py --count 200 --seed 0
"""

import argparse
from collections import Counter
from dataclasses import dataclass

import numpy as np

from isoblock import verify as V
from isoblock.degree import winding_degree, zero_count_degree
from isoblock.errors import NumericalError
from isoblock.field import random_polynomial_field
from isoblock.region import Ball


@dataclass
class RandomFieldConfig:
    count: int = 50
    seed: int = 0
    degree: int = 3
    radius: float = 1.0


def run(cfg: RandomFieldConfig) -> dict:
    disk = Ball((0, 0), cfg.radius)
    tally = Counter()
    degrees = Counter()
    for k in range(cfg.count):
        f = random_polynomial_field(np.random.default_rng(cfg.seed + k), 2, cfg.degree)
        try:
            w = winding_degree(f, disk).degree
            z = zero_count_degree(f, disk)
        except NumericalError as exc:
            tally[f"error: {type(exc).__name__}"] += 1
            continue
        degrees[w] += 1
        tally["agree" if w == z.degree else "disagree"] += 1
        if len(z.zeros) <= 1:
            verdict = V.check_planar_bound(f, disk, chi_K=len(z.zeros)).verdict
            tally[f"planar bound {verdict}"] += 1
        else:
            tally["planar bound skipped"] += 1
    return {"tally": dict(tally), "degrees": dict(sorted(degrees.items()))}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree", type=int, default=3)
    a = p.parse_args()
    res = run(RandomFieldConfig(a.count, a.seed, a.degree))
    for key, v in sorted(res["tally"].items()):
        print(f"{key:<24} {v}")
    print("degree histogram", res["degrees"])


if __name__ == "__main__":
    main()
