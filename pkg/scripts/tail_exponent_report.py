"""Fit the far-field decay exponent of N(x, 1) and compare with -(1 + alpha).

    python3 scripts/tail_exponent_report.py --alphas 0.75 1 1.5 1.9 --betas 0.5 1
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

from fracdiff.kernels import KernelSpec, tail_exponent


@dataclass
class TailConfig:
    alphas: tuple[float, ...] = (0.75, 1.0, 1.5, 1.9)
    betas: tuple[float, ...] = (0.5, 1.0)
    lo: float = 1e2
    hi: float = 1e4
    npts: int = 41


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--alphas", type=float, nargs="+", default=TailConfig.alphas)
    p.add_argument("--betas", type=float, nargs="+", default=TailConfig.betas)
    p.add_argument("--lo", type=float, default=TailConfig.lo)
    p.add_argument("--hi", type=float, default=TailConfig.hi)
    a = p.parse_args(argv)
    cfg = TailConfig(tuple(a.alphas), tuple(a.betas), a.lo, a.hi)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["alpha", "beta", "measured", "predicted", "deviation"])
    for alpha in cfg.alphas:
        for beta in cfg.betas:
            s = tail_exponent(KernelSpec(alpha, beta), 1.0, cfg.lo, cfg.hi, cfg.npts)
            w.writerow([alpha, beta, f"{s:.6f}", -(1 + alpha), f"{s + 1 + alpha:.2e}"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
