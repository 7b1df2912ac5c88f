"""Build an argparse parser from a dataclass so every field is a flag."""
from __future__ import annotations

import argparse
import dataclasses


def parse(cls, argv=None):
    p = argparse.ArgumentParser(description=(cls.__doc__ or "").strip().splitlines()[0])
    for f in dataclasses.fields(cls):
        flag = "--" + f.name.replace("_", "-")
        if f.type in (bool, "bool"):
            p.add_argument(flag, action=argparse.BooleanOptionalAction, default=f.default)
        else:
            conv = {"int": int, "float": float, "str": str}.get(str(f.type), str)
            p.add_argument(flag, type=conv, default=f.default)
    return cls(**vars(p.parse_args(argv)))
