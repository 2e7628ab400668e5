"""Design artifact files: JSON documents that round-trip bit-exactly."""

import json

import numpy as np

from ..codesign.types import Design
from ..errors import SchemaError

_REQUIRED_KEYS = ("K", "Q", "L", "values", "function_kind", "x", "C",
                  "solver_trace", "seed")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def design_to_dict(design: Design) -> dict:
    return {
        "K": design.K,
        "Q": design.Q,
        "L": design.L,
        "values": design.values.tolist(),
        "function_kind": design.kind,
        "x": [[float(z.real), float(z.imag)] for z in design.x],
        "C": design.C.reshape(-1).astype(int).tolist(),   # row-major
        "solver_trace": _jsonable(design.meta),
        "seed": design.seed,
    }


def design_from_dict(raw: dict) -> Design:
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise SchemaError(f"design artifact is missing keys {missing}")
    x = np.array([complex(re, im) for re, im in raw["x"]],
                 dtype=np.complex128)
    L = int(raw["L"])
    C = np.array(raw["C"], dtype=np.int8).reshape(len(x), L)
    return Design(x=x, C=C, L=L, K=int(raw["K"]), Q=int(raw["Q"]),
                  values=np.array(raw["values"], dtype=np.float64),
                  kind=raw["function_kind"], seed=raw["seed"],
                  meta=raw["solver_trace"])


def save_design(design: Design, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(design_to_dict(design), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_design(path) -> Design:
    with open(path, "r", encoding="utf-8") as fh:
        return design_from_dict(json.load(fh))
