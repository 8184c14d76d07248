"""Point-cloud serialization: CSV, JSON lines and the CMAP binary layout."""
from __future__ import annotations

import io
import json
import struct

import numpy as np

MAGIC = b"CMAP"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")
FORMATS = ("csv", "jsonl", "bin")


def to_csv(rows: np.ndarray, header=None) -> bytes:
    rows = np.atleast_2d(rows)
    if header is None:
        header = [f"x{j}" for j in range(rows.shape[1])]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    if rows.size:
        np.savetxt(buf, rows, fmt="%.17g", delimiter=",", newline="\n")
    return buf.getvalue().encode()


def to_jsonl(rows: np.ndarray) -> bytes:
    return "".join(json.dumps([float(v) for v in r]) + "\n" for r in rows).encode()


def to_binary(rows: np.ndarray) -> bytes:
    rows = np.asarray(rows, dtype="<f8")
    count, dim = rows.shape
    return _HEADER.pack(MAGIC, VERSION, dim, count) + rows.tobytes(order="C")


def from_binary(data: bytes) -> np.ndarray:
    magic, version, dim, count = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise ValueError("not a CMAP v1 file")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != dim * count:
        raise ValueError("truncated CMAP file")
    return body.reshape(count, dim).copy()


def from_csv(data: bytes) -> np.ndarray:
    lines = data.decode().splitlines()[1:]
    return np.array([[float(v) for v in ln.split(",")] for ln in lines])


def from_jsonl(data: bytes) -> np.ndarray:
    return np.array([json.loads(ln) for ln in data.decode().splitlines() if ln])


def encode(rows, fmt: str) -> bytes:
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "jsonl":
        return to_jsonl(rows)
    if fmt == "bin":
        return to_binary(rows)
    raise ValueError(f"unknown format {fmt!r}")


def decode(data: bytes, fmt: str) -> np.ndarray:
    return {"csv": from_csv, "jsonl": from_jsonl, "bin": from_binary}[fmt](data)
