"""Stenzel structure on T*S^3: Calabi-Yau ratio, Darboux check and curvature."""
from __future__ import annotations

import time
from dataclasses import dataclass

from _config import parse

from mastruct import jsonio, stenzel


@dataclass
class Config:
    """Run the Stenzel non-flatness report."""
    c: float = 1.0
    tau_max: float = 3.0
    step: float = 1e-3
    samples: int = 50
    curvature_samples: int = 12
    seed: int = 7
    json: str = ""


def main(cfg: Config):
    t0 = time.perf_counter()
    ode = stenzel.solve_ode(cfg.c, cfg.tau_max, cfg.step)
    rep = stenzel.stenzel_report(ode, cfg.samples, cfg.seed, cfg.curvature_samples)
    d = rep.to_dict()
    print(f"ODE residual          {d['odeMaxResidual']:.2e}")
    print(f"cy ratio              {d['cyRatio']['min']:.10g} .. {d['cyRatio']['max']:.10g}"
          f"  (spread {d['cyRatio']['relativeSpread']:.1e})")
    print(f"max lambda            {d['lambdaMax']:.4g}")
    print(f"closedness            {d['maxClosednessDefectOmega']:.1e} / "
          f"{d['maxClosednessDefectDual']:.1e}")
    print(f"max |Riemann|         {d['maxRiemannNorm']:.3f}  (flat floor "
          f"{d['flatNoiseFloor']:.1e}, ratio {d['curvatureOverNoise']:.1e})")
    for k, v in d["darbouxDefect"].items():
        print(f"Darboux defect, tau = {k:<9} {v:.1e}")
    print(f"verdict               {d['verdict']}  ({time.perf_counter() - t0:.1f} s)")
    if cfg.json:
        with open(cfg.json, "w") as fh:
            fh.write(jsonio.dumps(d))


if __name__ == "__main__":
    main(parse(Config))
