# coding=utf-8

import json
import struct
import typing as t
from pathlib import Path

import numpy as np

from errors import ConfigError, MissingArtifactError, SarError


MAGIC = b"SARCKPT"
VERSION = 1

# magic, version, header length
_PREFIX = struct.Struct("<7sHI")


def save_checkpoint(
        path: t.Union[str, Path],
        arrays: t.Mapping[str, np.ndarray],
        config_hash: str,
        step: int
) -> Path:
    """
    Write a flat key -> array map

    Layout: magic b"SARCKPT", u16 version, u32 header length, JSON header
    (config_hash, step, ordered keys with shapes), then every array as
    little-endian float64 in header order.
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    keys = list(arrays)
    header = json.dumps(
        {
            "config_hash": config_hash,
            "step": int(step),
            "arrays": [{"key": key, "shape": list(np.shape(arrays[key]))} for key in keys]
        },
        sort_keys=True
    ).encode("utf-8")

    with open(path, "wb") as checkpoint_file:
        checkpoint_file.write(_PREFIX.pack(MAGIC, VERSION, len(header)))
        checkpoint_file.write(header)

        for key in keys:
            checkpoint_file.write(np.ascontiguousarray(arrays[key], dtype="<f8").tobytes())

    return path


def load_checkpoint(
        path: t.Union[str, Path],
        expected_hash: t.Optional[str] = None
) -> t.Tuple[t.Dict[str, np.ndarray], t.Dict[str, t.Any]]:
    """
    Read a checkpoint container

    Args:
        path (t.Union[str, Path]): Checkpoint file
        expected_hash (t.Optional[str]): If given, must equal the stored config hash

    Returns:
        t.Tuple[t.Dict[str, np.ndarray], t.Dict[str, t.Any]]: arrays and header

    Raises:
        MissingArtifactError: If the file does not exist
        ConfigError: If the config hash differs
        SarError: If the file is not a checkpoint of a supported version
    """

    path = Path(path)

    if not path.is_file():
        raise MissingArtifactError(f"checkpoint {path} not found")

    data = path.read_bytes()

    if len(data) < _PREFIX.size:
        raise SarError(f"{path} is not a checkpoint file")

    magic, version, header_length = _PREFIX.unpack_from(data)

    if magic != MAGIC:
        raise SarError(f"{path} is not a checkpoint file")

    if version != VERSION:
        raise SarError(f"{path} has checkpoint version {version}, supported {VERSION}")

    offset = _PREFIX.size
    header = json.loads(data[offset:offset + header_length].decode("utf-8"))
    offset += header_length

    if expected_hash is not None and header["config_hash"] != expected_hash:
        raise ConfigError(
            f"checkpoint {path} was written for config {header['config_hash']}, current config is {expected_hash}"
        )

    arrays: t.Dict[str, np.ndarray] = {}

    for entry in header["arrays"]:
        count = int(np.prod(entry["shape"], dtype=np.int64))
        arrays[entry["key"]] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(entry["shape"]).astype(np.float64)
        offset += 8 * count

    return arrays, header


def checkpoint_path(run_dir: t.Union[str, Path], step: int) -> Path:
    return Path(run_dir) / "checkpoints" / f"step_{int(step)}.bin"


def latest_checkpoint(run_dir: t.Union[str, Path]) -> Path:
    """
    Checkpoint with the highest step in a run directory

    Raises:
        MissingArtifactError: If the run has no checkpoint
    """

    paths = [
        path for path in (Path(run_dir) / "checkpoints").glob("step_*.bin")
        if path.stem[len("step_"):].isdigit()
    ]

    if not paths:
        raise MissingArtifactError(f"no checkpoint in {Path(run_dir) / 'checkpoints'}")

    return max(paths, key=lambda path: int(path.stem[len("step_"):]))


def prefixed(prefix: str, state: t.Mapping[str, np.ndarray]) -> t.Dict[str, np.ndarray]:
    return {f"{prefix}.{key}": value for key, value in state.items()}


def unprefixed(prefix: str, arrays: t.Mapping[str, np.ndarray]) -> t.Dict[str, np.ndarray]:
    start = len(prefix) + 1
    return {key[start:]: value for key, value in arrays.items() if key.startswith(prefix + ".")}


__all__ = (
    "MAGIC",
    "VERSION",
    "save_checkpoint",
    "load_checkpoint",
    "checkpoint_path",
    "latest_checkpoint",
    "prefixed",
    "unprefixed"
)
