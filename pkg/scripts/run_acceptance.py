"""Run the acceptance criteria and print one line each."""
from __future__ import annotations

import runpy
import sys
from dataclasses import dataclass
from pathlib import Path

from _config import parse


@dataclass
class Config:
    """Select criteria by number (comma separated), default all."""
    only: str = ""


def main(cfg: Config) -> int:
    mod = runpy.run_path(str(Path(__file__).resolve().parents[1] / "tests" / "test_acceptance.py"))
    wanted = {int(x) for x in cfg.only.split(",") if x} or set(mod["CRITERIA"])
    failed = 0
    for n, fn in mod["CRITERIA"].items():
        if n in wanted:
            ok, detail = fn()
            failed += not ok
            print(f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(parse(Config)))
