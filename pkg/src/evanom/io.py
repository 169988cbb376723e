"""Binary file formats: EVOL (discretized volumes) and EVCK (checkpoints).

Both are little-endian throughout and round-trip bit-exactly.
"""
from __future__ import annotations

import struct
from typing import Mapping

import numpy as np

from .representation import MODES, DiscretizedVolume

EVOL_MAGIC = b"EVOL"
EVCK_MAGIC = b"EVCK"
FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def write_evol(vol: DiscretizedVolume) -> bytes:
    """Serialize: magic, version u32, B/H/W u32, mode u8, t0/bin_dt u64,
    then B*H*W float32 values in bin-major, row-major order."""
    head = EVOL_MAGIC + struct.pack(
        "<IIIIBQQ", FORMAT_VERSION, vol.bins, vol.height, vol.width,
        MODES.index(vol.mode), vol.t0, vol.bin_dt)
    return head + np.ascontiguousarray(vol.data, dtype="<f4").tobytes()


def read_evol(blob: bytes) -> DiscretizedVolume:
    if blob[:4] != EVOL_MAGIC:
        raise FormatError("not an EVOL blob")
    version, bins, height, width, mode_tag, t0, bin_dt = struct.unpack_from(
        "<IIIIBQQ", blob, 4)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported EVOL version {version}")
    if mode_tag >= len(MODES):
        raise FormatError(f"unknown mode tag {mode_tag}")
    off = 4 + struct.calcsize("<IIIIBQQ")
    n = bins * height * width
    data = np.frombuffer(blob, dtype="<f4", count=n, offset=off)
    if len(data) != n:
        raise FormatError("truncated EVOL payload")
    return DiscretizedVolume(bins, height, width, int(t0), int(bin_dt),
                             MODES[mode_tag], data.reshape(bins, height, width).copy())


def write_evck(tensors: Mapping[str, np.ndarray]) -> bytes:
    """Serialize named float32 tensors: magic, version u32, count u32;
    per tensor: name (u32 length + UTF-8), rank u32, extents u32, values."""
    parts = [EVCK_MAGIC, struct.pack("<II", FORMAT_VERSION, len(tensors))]
    for name, arr in tensors.items():
        raw = name.encode("utf-8")
        arr = np.ascontiguousarray(arr, dtype="<f4")
        parts.append(struct.pack("<I", len(raw)) + raw)
        parts.append(struct.pack("<I", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    return b"".join(parts)


def read_evck(blob: bytes) -> dict[str, np.ndarray]:
    if blob[:4] != EVCK_MAGIC:
        raise FormatError("not an EVCK blob")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported EVCK version {version}")
    off = 12
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", blob, off)
        off += 4
        name = blob[off:off + nlen].decode("utf-8")
        off += nlen
        (rank,) = struct.unpack_from("<I", blob, off)
        off += 4
        shape = struct.unpack_from(f"<{rank}I", blob, off)
        off += 4 * rank
        n = int(np.prod(shape)) if rank else 1
        vals = np.frombuffer(blob, dtype="<f4", count=n, offset=off)
        if len(vals) != n:
            raise FormatError(f"truncated tensor {name!r}")
        off += 4 * n
        out[name] = vals.reshape(shape).copy()
    return out
