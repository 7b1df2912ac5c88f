"""Invariants of the Table 1 representatives: lambda, qK signature, orbit label."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from _config import parse

from mastruct import hitchin


@dataclass
class Config:
    """Classify the nine representatives at one value of gamma."""
    gamma: str = "2"


def main(cfg: Config):
    g = Fraction(cfg.gamma)
    print(f"gamma = {g}")
    print(f"{'row':>3}  {'lambda':>10}  {'signature qK':>13}  {'ann':>3}  label")
    for row in range(1, 10):
        w = hitchin.table1_representative(row, g)
        c = hitchin.classify(w)
        print(f"{row:>3}  {str(c.extra['lambda']):>10}  {str(c.signature):>13}  "
              f"{c.annihilator_dim:>3}  {c.label}")


if __name__ == "__main__":
    main(parse(Config))
