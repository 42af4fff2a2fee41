"""Binary field checkpoints.

Layout (little-endian)::

    magic    4 bytes  b"ANS1"
    version  u32      1
    n1 n2 n3 u32 x 3
    L1 L2 L3 f64 x 3
    nu1..3   f64 x 3
    time     f64
    coeffs   3*n1*n2*n3 complex values as (re f64, im f64), C order:
             component, then the three FFT indices (frequency = fftfreq order)
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .dynamics import ViscosityTriple
from .fields import Grid3, VectorField3

MAGIC = b"ANS1"
VERSION = 1
_HEADER = struct.Struct("<4sI3I3d3dd")


class CheckpointError(OSError):
    pass


def write_checkpoint(u: VectorField3, t: float, nu: ViscosityTriple, path) -> None:
    g = u.grid
    header = _HEADER.pack(MAGIC, VERSION, g.n1, g.n2, g.n3, g.L1, g.L2, g.L3,
                          nu.nu1, nu.nu2, nu.nu3, float(t))
    payload = np.ascontiguousarray(u.coeffs, dtype="<c16").tobytes()
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    os.replace(tmp, path)


def read_checkpoint(path) -> tuple[VectorField3, float, ViscosityTriple]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        if data[:4] != MAGIC[: len(data[:4])]:
            raise CheckpointError(f"{path}: bad magic {data[:4]!r}")
        raise CheckpointError(f"{path}: truncated header ({len(data)} of {_HEADER.size} bytes)")
    magic, version, n1, n2, n3, L1, L2, L3, nu1, nu2, nu3, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version} (this reader handles {VERSION})")
    grid = Grid3(n1, n2, n3, L1, L2, L3)
    expected = 3 * grid.size * 16
    body = data[_HEADER.size:]
    if len(body) != expected:
        raise CheckpointError(
            f"{path}: truncated payload, {len(body)} bytes for {expected} expected"
            if len(body) < expected else f"{path}: {len(body) - expected} trailing bytes"
        )
    coeffs = np.frombuffer(body, dtype="<c16").astype(np.complex128).reshape((3,) + grid.shape)
    return VectorField3(grid, coeffs), t, ViscosityTriple(nu1, nu2, nu3)
