# coding=utf-8

import hashlib
import typing as t

import numpy as np


# Named streams derived from the global seed
STREAM_NAMES = (
    "env",
    "policy-init",
    "generator-init",
    "permutation",
    "augmentation",
    "policy",
    "minibatch",
    "eval",
    "analysis"
)


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "little")


def make_stream(global_seed: int, name: str) -> np.random.Generator:
    """
    Counter-based generator keyed by (global_seed, name)
    """

    key = np.array([int(global_seed) & 0xFFFFFFFFFFFFFFFF, _name_key(name)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class SeedStreams:
    """
    Independent random streams of one run

    Stream state is not stored in checkpoints: a reloaded run restarts every stream
    from its seed.
    """

    def __init__(self, global_seed: int) -> None:
        self.global_seed = int(global_seed)
        self._streams: t.Dict[str, np.random.Generator] = {}

    def get(self, name: str) -> np.random.Generator:
        """
        Shared stream of a given name (created on first use)
        """

        if name not in self._streams:
            self._streams[name] = make_stream(self.global_seed, name)

        return self._streams[name]

    def spawn(self, name: str, index: int) -> np.random.Generator:
        """
        Fresh stream for one member of a family (evaluation episodes)
        """

        return make_stream(self.global_seed, f"{name}/{int(index)}")

    def __getitem__(self, name: str) -> np.random.Generator:
        return self.get(name)


def seed_everything(global_seed: int) -> SeedStreams:
    """
    Derive every named stream of a run from one seed
    """

    streams = SeedStreams(global_seed)

    for name in STREAM_NAMES:
        streams.get(name)

    return streams


__all__ = (
    "STREAM_NAMES",
    "make_stream",
    "SeedStreams",
    "seed_everything"
)
