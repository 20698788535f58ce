"""Wire formats: the binary frame record and the JSON control channel.

Binary frame record (little-endian), one per scan:

    offset  size  field
    0       4     magic "RSWT"
    4       1     version (1)
    5       1     rows
    6       1     cols
    7       1     reserved (0)
    8       8     t_start_us (u64)
    16      2*N   ADC codes, u16, row-major

The control/UI channel rides a WebSocket; every message is a JSON object
with a "type" field: "inject_contact" and "command" flow client->server,
"frame" and "robot_state" flow server->client (plus a "command"
action="config" greeting). Full schema in docs/protocol.md.
"""

from __future__ import annotations

import json
import struct
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .core import Frame, SensorConfig

MAGIC = b"RSWT"
VERSION = 1
_HEADER = struct.Struct("<4sBBBBQ")

MESSAGE_TYPES = ("inject_contact", "frame", "robot_state", "command")


def encode_frame(frame: Frame) -> bytes:
    rows, cols = frame.shape
    if rows > 255 or cols > 255:
        raise ValueError("grid too large for the wire format")
    header = _HEADER.pack(MAGIC, VERSION, rows, cols, 0, int(frame.t_start_us))
    body = frame.counts.astype("<u2").tobytes()
    return header + body


def decode_frame(buf: bytes, offset: int = 0) -> tuple[Frame, int]:
    """Decode one frame record; returns (frame, next_offset)."""
    magic, version, rows, cols, _, t_start = _HEADER.unpack_from(buf, offset)
    if magic != MAGIC:
        raise ValueError("bad magic; not a frame stream")
    if version != VERSION:
        raise ValueError(f"unsupported frame version {version}")
    start = offset + _HEADER.size
    end = start + 2 * rows * cols
    if end > len(buf):
        raise ValueError("truncated frame record")
    counts = np.frombuffer(buf[start:end], dtype="<u2").reshape(rows, cols)
    return Frame(t_start_us=t_start, counts=counts.astype(np.int64)), end


def write_frames(fh: BinaryIO, frames: Iterable[Frame]) -> int:
    n = 0
    for frame in frames:
        fh.write(encode_frame(frame))
        n += 1
    return n


def read_frames(fh: BinaryIO) -> Iterator[Frame]:
    buf = fh.read()
    offset = 0
    while offset < len(buf):
        frame, offset = decode_frame(buf, offset)
        yield frame


# --- JSON channel ----------------------------------------------------------

def frame_message(frame: Frame, events: list | None = None, seq: int = 0) -> dict:
    rows, cols = frame.shape
    msg = {
        "type": "frame",
        "seq": seq,
        "t_start_us": int(frame.t_start_us),
        "rows": int(rows),
        "cols": int(cols),
        "counts": frame.counts.tolist(),
    }
    if events is not None:
        msg["events"] = events
    return msg


def config_message(
    config: SensorConfig, frame_period_us: float, robot_mode: str
) -> dict:
    """Server greeting: geometry the client needs to draw and aim touches."""
    return {
        "type": "command",
        "action": "config",
        "preset": config.name,
        "rows": config.rows,
        "cols": config.cols,
        "taxel_pitch_mm": config.taxel_pitch_mm,
        "taxel_size_mm": config.taxel_size_mm,
        "surface_mm": [config.surface_width_mm, config.surface_height_mm],
        "grid_origin_mm": list(config.grid_origin_mm),
        "frame_period_us": frame_period_us,
        "robot_mode": robot_mode,
    }


def parse_message(text: str | bytes) -> dict:
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON message: {exc}") from exc
    if not isinstance(msg, dict) or msg.get("type") not in MESSAGE_TYPES:
        raise ValueError("message must be an object with a known 'type'")
    return msg


def dump_message(msg: dict) -> str:
    if msg.get("type") not in MESSAGE_TYPES:
        raise ValueError("refusing to send message with unknown 'type'")
    return json.dumps(msg, separators=(",", ":"))
