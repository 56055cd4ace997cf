"""JSON interchange: complex numbers as [re, im], half-integers as twice_* integers."""
import json

import numpy as np

from .harmonic import FourierCoefficients, GroupFunction, grid_twice
from .symbolspace import LeftInvariantSymbol, XDependentSymbol


class InputError(ValueError):
    """Malformed interchange document."""


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return np.stack([M.real, M.imag], axis=-1).tolist()


def decode_matrix(data):
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad matrix: {exc}") from None
    if a.ndim < 1 or a.shape[-1] != 2:
        raise InputError("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise InputError(f"bad complex value {v!r}")


def coefficients_to_json(c):
    return {"kind": "fourier_coefficients", "twice_ell_max": c.twice_max,
            "blocks": [{"twice_ell": tl, "matrix": encode_matrix(c.blocks[tl])}
                       for tl in range(c.twice_max + 1)]}


def coefficients_from_json(d):
    try:
        blocks = {int(b["twice_ell"]): decode_matrix(b["matrix"]) for b in d["blocks"]}
        tmax = int(d.get("twice_ell_max", max(blocks)))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad coefficients: {exc}") from None
    for tl, b in blocks.items():
        if b.shape != (tl + 1, tl + 1):
            raise InputError(f"block {tl} has shape {b.shape}")
    return FourierCoefficients.from_blocks(blocks, tmax)


def function_to_json(f):
    return {"kind": "function", "twice_band": f.grid.twice_band,
            "shape": list(f.samples.shape), "values": encode_matrix(f.samples)}


def function_from_json(d):
    try:
        grid = grid_twice(int(d["twice_band"]))
        vals = decode_matrix(d["values"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad function: {exc}") from None
    if vals.shape != grid.shape:
        raise InputError(f"samples have shape {vals.shape}, grid needs {grid.shape}")
    return GroupFunction(grid, vals)


def symbol_to_json(s):
    if isinstance(s, LeftInvariantSymbol):
        return {"kind": "left_invariant", "twice_ell_max": s.twice_max,
                "twice_ell_reliable": s.twice_reliable,
                "blocks": [{"twice_ell": tl, "matrix": encode_matrix(s.blocks[tl]),
                            "edge": tl > s.twice_reliable}
                           for tl in range(s.twice_max + 1)]}
    return {"kind": "x_dependent", "twice_ell_max": s.twice_max,
            "twice_ell_reliable": s.twice_reliable,
            "terms": [{"coefficient": coefficients_to_json(c), "symbol": symbol_to_json(b)}
                      for c, b in s.terms]}


def symbol_from_json(d, twice_max=None):
    from .opcatalog import builtin
    kind = d.get("kind") if isinstance(d, dict) else None
    try:
        if kind == "left_invariant":
            blocks = {int(b["twice_ell"]): decode_matrix(b["matrix"]) for b in d["blocks"]}
            tmax = int(d.get("twice_ell_max", max(blocks)))
            if sorted(blocks) != list(range(tmax + 1)):
                raise InputError("left-invariant symbol needs every block up to twice_ell_max")
            return LeftInvariantSymbol(blocks, tmax, d.get("twice_ell_reliable"))
        if kind == "x_dependent":
            return XDependentSymbol(tuple((coefficients_from_json(t["coefficient"]),
                                           symbol_from_json(t["symbol"])) for t in d["terms"]))
        if kind == "builtin":
            tmax = int(d.get("twice_ell_max", twice_max if twice_max is not None else 32))
            return builtin(d["name"], tmax, decode_complex(d.get("c", 0.0)), int(d.get("k", 1)))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad symbol: {exc}") from None
    raise InputError(f"unknown symbol kind {kind!r}")


def load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from None


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, complex):
        return encode_complex(o)
    if hasattr(o, "twice"):
        return o.twice
    raise TypeError(f"not serialisable: {type(o).__name__}")


def dumps(obj):
    return json.dumps(obj, default=_default, allow_nan=False)
