"""Residual of the staged matrix integrator against step size."""
from __future__ import annotations

from dataclasses import dataclass

from _config import parse

from mastruct import matode


@dataclass
class Config:
    """Convergence table on the manufactured case exp(x1 M1) exp(x2 M2) exp(x3 M3)."""
    seed: int = 3
    m: int = 3
    half_width: float = 0.5
    finest: int = 64
    levels: int = 4


def main(cfg: Config):
    C, _ = matode.manufactured(matode.random_generators(cfg.seed, cfg.m))
    steps = [1 / (cfg.finest >> k) for k in range(cfg.levels - 1, -1, -1)]
    out = matode.convergence(C, cfg.half_width, steps)
    print(f"{'step':>8}  {'residual':>10}  order")
    for k, (s, r) in enumerate(zip(out["steps"], out["residuals"])):
        order = f"{out['orders'][k - 1]:.2f}" if k else ""
        print(f"1/{round(1 / s):<6}  {r:10.3e}  {order}")


if __name__ == "__main__":
    main(parse(Config))
