"""Lorenz degrees over a sweep of r: global ball, origin box, equilibrium indices.

    python3 scripts/lorenz_degrees.py --r 20 24 28 --out lorenz.json
"""

import argparse
import json
import math
import time
from dataclasses import asdict, dataclass, field

from isoblock.degree import kronecker_degree, zero_count_degree
from isoblock.field import catalog
from isoblock.region import Ball, Box


@dataclass
class LorenzConfig:
    r_values: list = field(default_factory=lambda: [15.0, 20.0, 24.0, 28.0])
    sigma: float = 10.0
    b: float = 8.0 / 3.0
    ball_radius: float = 60.0
    box_half_width: float = 6.0


def run(cfg: LorenzConfig) -> list:
    rows = []
    for r in cfg.r_values:
        f = catalog("lorenz", {"sigma": cfg.sigma, "b": cfg.b, "r": r})
        ball = Ball((0, 0, 0), cfg.ball_radius)
        w = cfg.box_half_width
        box = Box((-w, -w, -w), (w, w, w))
        t0 = time.perf_counter()
        big, small = kronecker_degree(f, ball), kronecker_degree(f, box)
        zeros = zero_count_degree(f, ball).zeros
        rows.append({
            "r": r,
            "ball_degree": big.degree, "ball_raw": big.raw,
            "box_degree": small.degree, "box_raw": small.raw,
            "equilibria": [{"point": z.point, "index": z.index} for z in zeros],
            "expected_C": math.sqrt(cfg.b * (r - 1)) if r > 1 else None,
            "seconds": time.perf_counter() - t0,
        })
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--r", type=float, nargs="+")
    p.add_argument("--out")
    a = p.parse_args()
    cfg = LorenzConfig(r_values=a.r) if a.r else LorenzConfig()
    rows = run(cfg)
    for row in rows:
        idx = sorted(e["index"] for e in row["equilibria"])
        print(f"r={row['r']:<5g} ball {row['ball_degree']:+d} (raw {row['ball_raw']:+.9f})  "
              f"box {row['box_degree']:+d}  indices {idx}  {row['seconds']:.2f} s")
    if a.out:
        with open(a.out, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
