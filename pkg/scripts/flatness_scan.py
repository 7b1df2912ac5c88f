"""Curvature of potential metrics: separable A = G(x) F(y) against a non-separable control."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from _config import parse

from mastruct import fields


@dataclass
class Config:
    """Scan |Riemann| / scale over seeds and random points."""
    seeds: int = 5
    points: int = 3
    half: float = 0.4
    richardson: bool = False


def _scan(gen, cfg):
    vals = []
    for seed in range(cfg.seeds):
        A, dA = gen(seed)
        g = fields.potential_metric(A, dA)
        for x in fields.Box.cube(cfg.half).random(cfg.points, seed):
            R, scale = fields._curvature(g, x, g.h, cfg.richardson)
            vals.append(fields.norm(R) / scale)
    return np.array(vals)


def main(cfg: Config):
    for name, gen in (("separable", fields.separable_potential),
                      ("non-separable", fields.nonseparable_potential)):
        v = _scan(gen, cfg)
        print(f"{name:>14}: |R|/scale min {v.min():.2e}  median {np.median(v):.2e}  "
              f"max {v.max():.2e}")


if __name__ == "__main__":
    main(parse(Config))
