"""Reader and writer for the length-prefixed JSON + raw buffer tensor container.

Layout::

    [u64 little-endian header length n][n bytes UTF-8 JSON header][data buffer]

The header maps tensor name -> ``{"dtype", "shape", "data_offsets": [begin, end]}``
with offsets relative to the start of the data buffer, plus an optional
``"__metadata__"`` string map. Reading maps the file into memory, so tensor
bytes are only paged in when a tensor is actually touched.
"""
from __future__ import annotations

import json
import math
import mmap
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .exceptions import CorruptContainer, IoError, ParseError, UnsupportedDtype

DTYPE_WIDTH = {"F64": 8, "F32": 4, "F16": 2, "BF16": 2}
_NUMPY_DTYPE = {"F64": np.dtype("<f8"), "F32": np.dtype("<f4"), "F16": np.dtype("<f2")}
_HEADER_ALIGN = 8
METADATA_KEY = "__metadata__"


def _check_dtype(dtype):
    if dtype not in DTYPE_WIDTH:
        raise UnsupportedDtype(f"unsupported dtype {dtype!r}; expected one of {sorted(DTYPE_WIDTH)}")


@dataclass(frozen=True)
class TensorRecord:
    name: str
    dtype: str
    shape: tuple[int, ...]
    data: bytes | memoryview = field(repr=False)

    def __post_init__(self):
        _check_dtype(self.dtype)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        if any(s < 0 for s in self.shape):
            raise CorruptContainer(f"tensor {self.name!r}: negative dimension in shape {self.shape}")
        expected = self.numel * DTYPE_WIDTH[self.dtype]
        if len(self.data) != expected:
            raise CorruptContainer(
                f"tensor {self.name!r}: {len(self.data)} data bytes, expected {expected} "
                f"for {self.dtype}{list(self.shape)}"
            )

    @property
    def numel(self) -> int:
        return math.prod(self.shape)

    @property
    def nbytes(self) -> int:
        return len(self.data)

    def tobytes(self) -> bytes:
        return bytes(self.data)

    def renamed(self, name: str) -> "TensorRecord":
        return TensorRecord(name, self.dtype, self.shape, self.data)


@dataclass
class Checkpoint:
    """Ordered collection of tensor records plus optional string metadata."""

    tensors: dict[str, TensorRecord] = field(default_factory=dict)
    metadata: dict[str, str] | None = None
    _source: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for key, rec in self.tensors.items():
            if key != rec.name:
                raise CorruptContainer(f"tensor keyed {key!r} carries name {rec.name!r}")

    def __len__(self):
        return len(self.tensors)

    def __iter__(self) -> Iterator[TensorRecord]:
        return iter(self.tensors.values())

    def __getitem__(self, name: str) -> TensorRecord:
        return self.tensors[name]

    @property
    def names(self) -> list[str]:
        return list(self.tensors)

    def numel(self) -> int:
        return sum(rec.numel for rec in self.tensors.values())

    @classmethod
    def from_records(cls, records, metadata=None) -> "Checkpoint":
        tensors: dict[str, TensorRecord] = {}
        for rec in records:
            if rec.name in tensors:
                raise CorruptContainer(f"duplicate tensor name {rec.name!r}")
            tensors[rec.name] = rec
        return cls(tensors, dict(metadata) if metadata is not None else None)

    def close(self):
        if self._source is not None:
            try:
                self._source.close()
            except BufferError:
                # live views still reference the map; the OS reclaims it on exit
                pass
            self._source = None


def record_from_array(name: str, array, dtype: str = "F32") -> TensorRecord:
    """Encode a numpy array as a record. BF16 uses round-to-nearest-even from f32."""
    _check_dtype(dtype)
    arr = np.asarray(array)
    if dtype == "BF16":
        if arr.dtype == np.uint16:
            raw = arr.astype("<u2")
        else:
            bits = np.ascontiguousarray(arr, dtype="<f4").view("<u4").astype(np.uint64)
            nan = np.isnan(arr.astype("<f4"))
            rounded = (bits + 0x7FFF + ((bits >> 16) & 1)) >> 16
            # keep NaN quiet and NaN: truncation keeps the sign and top payload bits
            rounded = np.where(nan, (bits >> 16) | 0x40, rounded)
            raw = rounded.astype("<u2")
        return TensorRecord(name, dtype, arr.shape, raw.tobytes())
    return TensorRecord(name, dtype, arr.shape, np.ascontiguousarray(arr, dtype=_NUMPY_DTYPE[dtype]).tobytes())


def tensor_as_f64(rec: TensorRecord) -> np.ndarray:
    """Exact widening of the stored values to float64, flattened in storage order."""
    _check_dtype(rec.dtype)
    if rec.dtype == "BF16":
        bits = np.frombuffer(rec.data, dtype="<u2").astype("<u4") << 16
        with np.errstate(invalid="ignore"):  # signalling NaN payloads
            return bits.view("<f4").astype(np.float64)
    with np.errstate(invalid="ignore"):
        return np.frombuffer(rec.data, dtype=_NUMPY_DTYPE[rec.dtype]).astype(np.float64)


def _parse_header(raw: bytes, buffer_len: int):
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"container header is not valid UTF-8 JSON: {exc}") from exc
    if not isinstance(header, dict):
        raise ParseError("container header must be a JSON object")

    metadata = header.pop(METADATA_KEY, None)
    if metadata is not None:
        if not isinstance(metadata, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
        ):
            raise ParseError("__metadata__ must map strings to strings")

    entries = []
    for name, info in header.items():
        if not isinstance(info, dict) or not {"dtype", "shape", "data_offsets"} <= info.keys():
            raise ParseError(f"tensor {name!r}: header entry needs dtype, shape and data_offsets")
        dtype, shape, offsets = info["dtype"], info["shape"], info["data_offsets"]
        if not isinstance(dtype, str):
            raise ParseError(f"tensor {name!r}: dtype must be a string")
        _check_dtype(dtype)
        if not isinstance(shape, list) or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in shape):
            raise ParseError(f"tensor {name!r}: shape must be a list of non-negative integers")
        if (
            not isinstance(offsets, list)
            or len(offsets) != 2
            or not all(isinstance(o, int) and not isinstance(o, bool) for o in offsets)
        ):
            raise ParseError(f"tensor {name!r}: data_offsets must be [begin, end]")
        begin, end = offsets
        if not 0 <= begin <= end <= buffer_len:
            raise CorruptContainer(
                f"tensor {name!r}: data_offsets [{begin}, {end}) out of bounds for a {buffer_len}-byte buffer"
            )
        expected = math.prod(shape) * DTYPE_WIDTH[dtype]
        if end - begin != expected:
            raise CorruptContainer(
                f"tensor {name!r}: data_offsets span {end - begin} bytes, {dtype}{shape} needs {expected}"
            )
        entries.append((name, dtype, tuple(shape), begin, end))

    spans = sorted((e for e in entries if e[4] > e[3]), key=lambda e: (e[3], e[4]))
    for prev, cur in zip(spans, spans[1:]):
        if cur[3] < prev[4]:
            raise CorruptContainer(
                f"tensor {cur[0]!r}: data_offsets [{cur[3]}, {cur[4]}) overlap tensor {prev[0]!r} "
                f"[{prev[3]}, {prev[4]})"
            )
    return entries, metadata


def read_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        size = path.stat().st_size
        fh = open(path, "rb")
    except OSError as exc:
        raise IoError(f"cannot open {path}: {exc}") from exc
    with fh:
        prefix = fh.read(8)
        if len(prefix) < 8:
            raise ParseError(f"{path}: file too short for a container header")
        (header_len,) = struct.unpack("<Q", prefix)
        if header_len > size - 8:
            raise CorruptContainer(f"{path}: header length {header_len} exceeds file size {size}")
        entries, metadata = _parse_header(fh.read(header_len), size - 8 - header_len)
        mm = mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)

    base = 8 + header_len
    view = memoryview(mm)
    tensors = {
        name: TensorRecord(name, dtype, shape, view[base + begin : base + end])
        for name, dtype, shape, begin, end in entries
    }
    return Checkpoint(tensors, metadata, _source=mm)


def encode_header(ckpt: Checkpoint) -> bytes:
    header: dict = {}
    if ckpt.metadata is not None:
        header[METADATA_KEY] = dict(ckpt.metadata)
    offset = 0
    for rec in ckpt.tensors.values():
        header[rec.name] = {"dtype": rec.dtype, "shape": list(rec.shape), "data_offsets": [offset, offset + rec.nbytes]}
        offset += rec.nbytes
    raw = json.dumps(header, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    return raw + b" " * (-len(raw) % _HEADER_ALIGN)


def write_checkpoint(ckpt: Checkpoint, path) -> None:
    """Write atomically: a temp file in the target directory is renamed into place."""
    path = Path(path)
    header = encode_header(ckpt)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(struct.pack("<Q", len(header)))
                fh.write(header)
                for rec in ckpt.tensors.values():
                    fh.write(rec.data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def checkpoint_from_arrays(arrays: Mapping[str, object], dtype: str = "F32", metadata=None) -> Checkpoint:
    return Checkpoint.from_records((record_from_array(k, v, dtype) for k, v in arrays.items()), metadata)
