"""Reader/writer for CHNS solver snapshot files.

Independent implementation of the on-disk format: a 64-byte
little-endian header (magic "CHNS", version, dim, M, time, field
count, zero padding) followed by float64 field arrays rho, m1, (m2,) q
in lexicographic order.  Parsing then re-serializing a valid file
reproduces it byte for byte.
"""

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"CHNS"
VERSION = 1
HEADER = struct.Struct("<4sIIIdI36x")

FIELD_NAMES_1D = ("rho", "m1", "q")
FIELD_NAMES_2D = ("rho", "m1", "m2", "q")


class SnapshotError(Exception):
    pass


@dataclass
class Snapshot:
    dim: int
    M: int
    t: float
    fields: dict  # name -> array, shape (M,) or (M, M) with x as axis 0

    @property
    def field_names(self):
        return FIELD_NAMES_1D if self.dim == 1 else FIELD_NAMES_2D

    def velocity(self):
        rho = self.fields["rho"]
        if self.dim == 1:
            return (self.fields["m1"] / rho,)
        return (self.fields["m1"] / rho, self.fields["m2"] / rho)

    def concentration(self):
        return self.fields["q"] / self.fields["rho"]

    def cell_centers(self):
        return (np.arange(self.M) + 0.5) / self.M


def read_snapshot(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER.size:
        raise SnapshotError(f"{path}: file shorter than the 64-byte header")
    magic, version, dim, M, t, nfields = HEADER.unpack(raw[:HEADER.size])
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported format version {version}")
    if dim not in (1, 2):
        raise SnapshotError(f"{path}: bad dimension {dim}")
    names = FIELD_NAMES_1D if dim == 1 else FIELD_NAMES_2D
    if nfields != len(names):
        raise SnapshotError(
            f"{path}: field count {nfields}, expected {len(names)}")
    count = M**dim
    expected_size = HEADER.size + 8 * count * nfields
    if len(raw) != expected_size:
        raise SnapshotError(
            f"{path}: size {len(raw)} bytes, expected {expected_size}")
    shape = (M,) if dim == 1 else (M, M)
    fields = {}
    off = HEADER.size
    for name in names:
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
        fields[name] = arr.reshape(shape).copy()
        off += 8 * count
    return Snapshot(int(dim), int(M), float(t), fields)


def write_snapshot(path, snap):
    names = snap.field_names
    header = HEADER.pack(MAGIC, VERSION, snap.dim, snap.M, snap.t, len(names))
    with open(path, "wb") as fh:
        fh.write(header)
        for name in names:
            fh.write(np.ascontiguousarray(snap.fields[name],
                                          dtype="<f8").tobytes())


def serialize(snap):
    names = snap.field_names
    out = [HEADER.pack(MAGIC, VERSION, snap.dim, snap.M, snap.t, len(names))]
    out += [np.ascontiguousarray(snap.fields[n], dtype="<f8").tobytes()
            for n in names]
    return b"".join(out)
