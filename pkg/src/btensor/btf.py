"""BTF v1: plain-text tensor interchange format.

Grammar::

    btf 1
    <d1> <d2> ... <dN>
    <v1> <v2> ...          (whitespace-separated, column-major, count = prod dims)
"""
from __future__ import annotations

import os

import numpy as np

from .tensor import DenseTensor, make_tensor

__all__ = ["BtfFormatError", "read_btf", "write_btf"]


class BtfFormatError(ValueError):
    """Raised on malformed BTF input."""


def write_btf(t: DenseTensor, path: str | os.PathLike) -> None:
    """Write a tensor as BTF v1 with full float64 round-trip precision."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("btf 1\n")
        fh.write(" ".join(str(d) for d in t.shape) + "\n")
        vals = t.data
        for start in range(0, vals.size, 8):
            fh.write(" ".join(format(v, ".17g") for v in vals[start : start + 8]) + "\n")


def read_btf(path: str | os.PathLike) -> DenseTensor:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "btf 1":
            raise BtfFormatError(f"bad header {header!r}, expected 'btf 1'")
        dims_line = fh.readline().split()
        if not dims_line:
            raise BtfFormatError("missing dims line")
        try:
            dims = [int(d) for d in dims_line]
        except ValueError as exc:
            raise BtfFormatError(f"bad dims line {dims_line!r}") from exc
        body = fh.read().split()
    expected = int(np.prod(dims))
    if len(body) != expected:
        raise BtfFormatError(
            f"expected {expected} values for dims {tuple(dims)}, got {len(body)}"
        )
    try:
        values = [float(v) for v in body]
    except ValueError as exc:
        raise BtfFormatError("non-numeric value in BTF body") from exc
    return make_tensor(dims, values)
