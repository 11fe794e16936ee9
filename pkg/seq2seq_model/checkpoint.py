"""Checkpoint container.

Layout (little-endian):
    magic   8 bytes  b"ASYMCKPT"
    version u16
    flags   u16      bit 0 set when the tensor table is zstd-compressed
    config  u32 length + orjson-encoded ModelConfig
    table   u64 length + bytes; decompressed it is
            u32 count, then per tensor: u16 name length, utf-8 name,
            u8 ndim, u64 per dim, raw float64 ('<f8') values
"""

import io
import logging
import os
import struct
from pathlib import Path
from typing import Union

import numpy as np
import orjson
import zstandard

from seq2seq_model.schemas import ModelConfig, ModelWeights
from tensor_autodiff.tensor import Tensor
from utils.errors import CheckpointError

logger = logging.getLogger(__name__)

MAGIC = b"ASYMCKPT"
VERSION = 1
FLAG_ZSTD = 1


def _encode_table(weights: ModelWeights) -> bytes:
    buf = io.BytesIO()
    buf.write(struct.pack("<I", len(weights.tensors)))
    for name, tensor in weights.tensors.items():
        raw = name.encode("utf-8")
        buf.write(struct.pack("<H", len(raw)))
        buf.write(raw)
        buf.write(struct.pack("<B", tensor.ndim))
        buf.write(struct.pack(f"<{tensor.ndim}Q", *tensor.shape))
        buf.write(np.ascontiguousarray(tensor.data, dtype="<f8").tobytes())
    return buf.getvalue()


def dumps(weights: ModelWeights, compress: bool = False) -> bytes:
    table = _encode_table(weights)
    flags = 0
    if compress:
        table = zstandard.ZstdCompressor(level=3).compress(table)
        flags |= FLAG_ZSTD
    config = orjson.dumps(weights.config.model_dump(mode="json"))
    return b"".join([
        MAGIC,
        struct.pack("<HH", VERSION, flags),
        struct.pack("<I", len(config)),
        config,
        struct.pack("<Q", len(table)),
        table,
    ])


def loads(payload: bytes) -> ModelWeights:
    view = memoryview(payload)
    if bytes(view[:8]) != MAGIC:
        raise CheckpointError("not a checkpoint: bad magic")
    try:
        version, flags = struct.unpack_from("<HH", view, 8)
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (config_len,) = struct.unpack_from("<I", view, 12)
        offset = 16
        config = ModelConfig.from_mapping(orjson.loads(bytes(view[offset:offset + config_len])))
        offset += config_len
        (table_len,) = struct.unpack_from("<Q", view, offset)
        offset += 8
        table = bytes(view[offset:offset + table_len])
        if len(table) != table_len:
            raise CheckpointError("truncated tensor table")
        if flags & FLAG_ZSTD:
            table = zstandard.ZstdDecompressor().decompress(table)
        return ModelWeights(config=config, tensors=_decode_table(table))
    except struct.error as e:
        raise CheckpointError(f"truncated checkpoint: {e}") from e


def _decode_table(table: bytes) -> dict:
    view = memoryview(table)
    (count,) = struct.unpack_from("<I", view, 0)
    offset = 4
    tensors = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", view, offset)
        offset += 2
        name = bytes(view[offset:offset + name_len]).decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<B", view, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}Q", view, offset)
        offset += 8 * ndim
        numel = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(view, dtype="<f8", count=numel, offset=offset).astype(np.float64).reshape(shape)
        offset += 8 * numel
        tensors[name] = Tensor(data, name=name)
    if offset != len(table):
        raise CheckpointError(f"{len(table) - offset} trailing bytes after tensor table")
    return tensors


def save_checkpoint(weights: ModelWeights, path: Union[str, Path], compress: bool = False) -> Path:
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    payload = dumps(weights, compress=compress)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)
    logger.info(f"Saved checkpoint {path} ({len(payload)} bytes, {weights.total_params()} params)")
    return path


def load_checkpoint(path: Union[str, Path]) -> ModelWeights:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint {path} does not exist")
    return loads(path.read_bytes())
