"""Binary checkpoints of a FlowState.

Layout::

    b"DIOMHDCK"                 8-byte magic
    uint32 little-endian        header length H
    H bytes of UTF-8 JSON       {"format_version", "modes_per_dim", "t" (float.hex),
                                 "fields", "endianness", "dtype", "k_order"}
    payload                     4 * M * M pairs of little-endian float64 (re, im),
                                fields u1, u2, b1, b2, each row-major in FFT k-order
"""

import json
import os
import struct
import tempfile

import numpy as np

from .errors import (
    CheckpointInvariantError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    LatticeMismatchError,
)
from .mhd import FlowState
from .spectral import get_lattice

MAGIC = b"DIOMHDCK"
FORMAT_VERSION = 1
FIELDS = ("u1", "u2", "b1", "b2")


def checkpoint_write(state, path):
    """Write atomically (temp file + rename)."""
    M = state.lattice.modes_per_dim
    header = json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "modes_per_dim": M,
            "t": float(state.t).hex(),
            "fields": list(FIELDS),
            "endianness": "little",
            "dtype": "complex128",
            "k_order": "fft-row-major",
        },
        sort_keys=True,
    ).encode("utf-8")
    payload = np.ascontiguousarray(state.as_array(), dtype="<c16").tobytes()
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def checkpoint_read(path, modes_per_dim=None, tol=1e-10):
    """Read a checkpoint; ``modes_per_dim`` pins the expected lattice.

    Raises:
        CheckpointVersionError: bad magic, unparseable header, or unknown version.
        CheckpointTruncatedError: payload shorter than declared.
        LatticeMismatchError: file lattice differs from ``modes_per_dim``.
        CheckpointInvariantError: decoded fields not divergence-free / mean-zero.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + 4 or data[: len(MAGIC)] != MAGIC:
        raise CheckpointVersionError(f"{path}: not a checkpoint (bad magic)")
    (hlen,) = struct.unpack("<I", data[len(MAGIC): len(MAGIC) + 4])
    start = len(MAGIC) + 4
    if len(data) < start + hlen:
        raise CheckpointTruncatedError(f"{path}: header truncated")
    try:
        header = json.loads(data[start: start + hlen].decode("utf-8"))
        version = header["format_version"]
        M = int(header["modes_per_dim"])
        t = float.fromhex(header["t"])
    except (ValueError, KeyError, TypeError, UnicodeDecodeError) as exc:
        raise CheckpointVersionError(f"{path}: corrupted header ({exc})") from None
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    if header.get("endianness") != "little" or tuple(header.get("fields", ())) != FIELDS:
        raise CheckpointVersionError(f"{path}: unsupported field layout")
    if modes_per_dim is not None and M != int(modes_per_dim):
        raise LatticeMismatchError(f"{path}: checkpoint has M={M}, expected M={modes_per_dim}")
    need = 4 * M * M * 16
    body = data[start + hlen:]
    if len(body) < need:
        raise CheckpointTruncatedError(f"{path}: payload has {len(body)} of {need} bytes")
    arr = np.frombuffer(body[:need], dtype="<c16").reshape(4, M, M).astype(np.complex128)
    lattice = get_lattice(M)
    try:
        return FlowState.from_array(t, lattice, arr, check=True)
    except ValueError as exc:
        raise CheckpointInvariantError(f"{path}: {exc}") from None
