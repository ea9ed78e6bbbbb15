"""Binary snapshot files and their plain-text sidecars.

Layout: a 64-byte little-endian header

    bytes  0-3   magic b"CHNS"
    bytes  4-7   format version (uint32, currently 1)
    bytes  8-11  dimension (uint32, 1 or 2)
    bytes 12-15  M, cells per axis (uint32)
    bytes 16-23  simulation time t (float64)
    bytes 24-27  field count (uint32): 3 in 1D, 4 in 2D
    bytes 28-63  reserved, zero

followed by the raw float64 field arrays rho, m1, (m2,) q in
lexicographic order k = M(i-1)+j.  The sidecar <file>.meta echoes the
run configuration, the seed and a build id.
"""

import hashlib
import struct

import numpy as np

from .errors import ChnsError
from .fields import Grid, State

MAGIC = b"CHNS"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdI36x")
assert _HEADER.size == 64


class SnapshotFormatError(ChnsError):
    pass


def write_snapshot(path, state, t):
    grid = state.grid
    fields = state.components()
    header = _HEADER.pack(MAGIC, VERSION, grid.dim, grid.M, float(t),
                          len(fields))
    with open(path, "wb") as fh:
        fh.write(header)
        for f in fields:
            fh.write(np.ascontiguousarray(f, dtype="<f8").tobytes())


def read_snapshot(path):
    """Parse a snapshot; returns (state, t)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header")
    magic, version, dim, M, t, nfields = _HEADER.unpack(raw[:_HEADER.size])
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    grid = Grid(int(dim), int(M))
    expected = 3 if dim == 1 else 4
    if nfields != expected:
        raise SnapshotFormatError(
            f"{path}: field count {nfields}, expected {expected}")
    count = grid.ncells
    need = _HEADER.size + 8 * count * nfields
    if len(raw) != need:
        raise SnapshotFormatError(
            f"{path}: payload is {len(raw)} bytes, expected {need}")
    arrays = []
    off = _HEADER.size
    for _ in range(nfields):
        a = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
        arrays.append(a.reshape(grid.shape).copy())
        off += 8 * count
    nm = nfields - 2
    state = State(grid, arrays[0], tuple(arrays[1:1 + nm]), arrays[1 + nm])
    return state, float(t)


def build_id(config_text):
    """Short content hash standing in for a VCS revision."""
    return hashlib.sha256(config_text.encode()).hexdigest()[:12]


def write_sidecar(path, config_text, seed):
    meta = (
        f"build_id = {build_id(config_text)}\n"
        f"seed = {seed}\n"
        "# configuration echo\n"
        + config_text
    )
    with open(str(path) + ".meta", "w") as fh:
        fh.write(meta)
