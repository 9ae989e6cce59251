"""Run the catalog verification matrix and print a table (same cases as ``isoblock suite``).

    python3 scripts/verify_catalog.py [--quick] [--csv table.csv]
"""

import argparse
import csv
import time
from dataclasses import dataclass

from isoblock.cli import check_args, run_check, suite_cases
from isoblock.config import DEFAULTS
from isoblock.errors import NumericalError
from isoblock.field import catalog
from isoblock.region import parse_region


@dataclass
class SuiteConfig:
    quick: bool = False
    csv_path: str | None = None


def run(cfg: SuiteConfig) -> list:
    rows = []
    for name, check, spec, kw in suite_cases(cfg.quick):
        t0 = time.perf_counter()
        try:
            rep = run_check(check, catalog(name), parse_region(spec), DEFAULTS, check_args(**kw))
            verdict, lhs, rhs = rep.verdict, rep.lhs, rep.rhs
        except NumericalError as exc:
            verdict, lhs, rhs = f"error: {exc}", None, None
        rows.append({"field": name, "region": spec, "check": check, "lhs": lhs, "rhs": rhs,
                     "verdict": verdict, "seconds": round(time.perf_counter() - t0, 3)})
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--quick", action="store_true")
    p.add_argument("--csv")
    a = p.parse_args()
    cfg = SuiteConfig(a.quick, a.csv)
    rows = run(cfg)
    for r in rows:
        print(f"{r['check']:<14} {r['field']:<14} {r['region']:<22} {str(r['lhs']):>8} {str(r['rhs']):>8}  "
              f"{r['verdict']}")
    if cfg.csv_path:
        with open(cfg.csv_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
