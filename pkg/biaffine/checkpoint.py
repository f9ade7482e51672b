"""
Parser checkpoint container.

Layout (little-endian):
    b"SCUDPARSE"                magic
    uint32                      format version
    uint32                      header length in bytes
    header                      UTF-8 JSON: config, words, labels, blocks [name, shape]
    float32 blocks              row-major, in header order
    uint32                      CRC-32 of everything above
"""
import json
import logging
import struct
import zlib
from pathlib import Path

import numpy as np

from .model import ParserConfig, ParserConfigError, ParserModel, block_shapes

log = logging.getLogger(__name__)

MAGIC = b"SCUDPARSE"
FORMAT_VERSION = 1
_U32 = struct.Struct("<I")


class CheckpointError(ValueError):
    """A checkpoint file that cannot be trusted. `code` names the failure."""

    CODES = ("bad-magic", "bad-version", "truncated", "checksum", "bad-shape", "bad-header")

    def __init__(self, message: str, code: str):
        self.code = code
        super().__init__(f"[{code}] {message}")


def _serialize(model: ParserModel) -> bytes:
    names = list(block_shapes(model.config, len(model.words), len(model.labels)))
    header = {
        "config": model.config.to_dict(),
        "words": list(model.words),
        "labels": list(model.labels),
        "blocks": [[name, list(model.params[name].shape)] for name in names],
    }
    header_bytes = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    parts = [MAGIC, _U32.pack(FORMAT_VERSION), _U32.pack(len(header_bytes)), header_bytes]
    parts += [np.ascontiguousarray(model.params[name], dtype="<f4").tobytes() for name in names]
    body = b"".join(parts)
    return body + _U32.pack(zlib.crc32(body))


def save_checkpoint(model: ParserModel, path: str | Path) -> Path:
    """Write the model; the same model always produces the same bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = _serialize(model)
    path.write_bytes(data)
    log.info("saved checkpoint %s (%d bytes)", path, len(data))
    return path


def _deserialize(data: bytes, source: str) -> ParserModel:
    if len(data) < len(MAGIC) or data[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{source}: not a parser checkpoint", "bad-magic")
    offset = len(MAGIC)
    if len(data) < offset + 2 * _U32.size:
        raise CheckpointError(f"{source}: file ends inside the preamble", "truncated")
    (version,) = _U32.unpack_from(data, offset)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{source}: format version {version}, expected {FORMAT_VERSION}", "bad-version")
    (header_len,) = _U32.unpack_from(data, offset + _U32.size)
    offset += 2 * _U32.size
    if len(data) < offset + header_len + _U32.size:
        raise CheckpointError(f"{source}: file ends inside the header", "truncated")

    try:
        header = json.loads(data[offset:offset + header_len].decode("utf-8"))
        config = ParserConfig.from_dict(header["config"])
        words = tuple(header["words"])
        labels = tuple(header["labels"])
        blocks = [(name, tuple(shape)) for name, shape in header["blocks"]]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError, ParserConfigError) as e:
        raise CheckpointError(f"{source}: unreadable header ({e})", "bad-header") from e
    offset += header_len

    expected = block_shapes(config, len(words), len(labels))
    if dict(blocks) != expected or [name for name, _ in blocks] != list(expected):
        raise CheckpointError(f"{source}: parameter blocks do not match the stored config", "bad-shape")

    payload = sum(int(np.prod(shape)) for _, shape in blocks) * 4
    if len(data) != offset + payload + _U32.size:
        raise CheckpointError(
            f"{source}: expected {offset + payload + _U32.size} bytes, found {len(data)}", "truncated"
        )
    (stored_crc,) = _U32.unpack_from(data, len(data) - _U32.size)
    if zlib.crc32(data[:-_U32.size]) != stored_crc:
        raise CheckpointError(f"{source}: checksum mismatch", "checksum")

    params = {}
    for name, shape in blocks:
        count = int(np.prod(shape))
        block = np.frombuffer(data, dtype="<f4", count=count, offset=offset).reshape(shape)
        params[name] = block.astype(np.float32)
        offset += count * 4
    return ParserModel(config, words, labels, params)


def load_checkpoint(path: str | Path) -> ParserModel:
    """Read a checkpoint, raising CheckpointError with a distinct code on any damage."""
    path = Path(path)
    model = _deserialize(path.read_bytes(), str(path))
    log.info("loaded checkpoint %s: %d words, %d labels", path, len(model.words), len(model.labels))
    return model
