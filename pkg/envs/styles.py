# coding=utf-8

import typing as t
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from errors import PoolError


OBS_SIZE = 32
CELL = 4

BACKGROUNDS = ("solid", "checker", "stripes", "noise")

# Fixed foreground colors (border, core) per entity class
ENTITY_COLORS: t.Dict[str, t.Tuple[t.Tuple[float, float, float], t.Tuple[float, float, float]]] = {
    "agent": ((1.0, 1.0, 1.0), (0.0, 0.0, 0.0)),
    "collectible": ((1.0, 0.8, 0.0), (1.0, 1.0, 0.6)),
    "hazard": ((1.0, 0.0, 0.0), (0.4, 0.0, 0.0))
}

TRAIN_IDS = range(0, 200)
TEST_IDS = range(10_000, 10_100)

POOLS: t.Dict[str, range] = {
    "train": TRAIN_IDS,
    "test": TEST_IDS
}


@dataclass(frozen=True, eq=False)
class StyleSpec:
    """
    Rendering parameters of one visual style

    Attributes:
        style_id (int): Seed of the style
        palette (np.ndarray): 3 RGB base colors, 3 x 3 in [0, 1]
        background (str): Pattern kind (solid, checker, stripes, noise)
        phase (int): Pattern offset in pixels
        jitter (float): Per-pixel noise amplitude in [0, 0.1]
    """

    style_id: int
    palette: np.ndarray
    background: str
    phase: int
    jitter: float

    @classmethod
    def from_id(cls, style_id: int) -> "StyleSpec":
        return _style_spec(int(style_id))

    def background_image(self, size: int = OBS_SIZE) -> np.ndarray:
        """
        Pattern without jitter, 3 x size x size
        """

        rows, cols = np.mgrid[0:size, 0:size]

        if self.background == "solid":
            index = np.zeros((size, size), dtype=np.int64)

        elif self.background == "checker":
            index = ((rows + self.phase) // CELL + (cols + self.phase) // CELL) % 2

        elif self.background == "stripes":
            index = ((cols + self.phase) // CELL) % 3

        else:
            index = np.random.default_rng([self.style_id, self.phase]).integers(0, 3, (size, size))

        return self.palette[index].transpose(2, 0, 1).copy()

    def jitter_noise(self, timestep: int, size: int = OBS_SIZE) -> np.ndarray:
        """
        Background noise seeded by (style_id, timestep)
        """

        if self.jitter == 0.0:
            return np.zeros((3, size, size))

        rng = np.random.default_rng([self.style_id, int(timestep)])
        return rng.uniform(-self.jitter, self.jitter, (3, size, size))


@lru_cache(maxsize=512)
def _style_spec(style_id: int) -> StyleSpec:
    rng = np.random.default_rng(style_id)

    palette = rng.uniform(0.0, 1.0, (3, 3))
    background = BACKGROUNDS[int(rng.integers(len(BACKGROUNDS)))]
    phase = int(rng.integers(0, 2 * CELL))
    jitter = float(rng.uniform(0.0, 0.1))

    palette.setflags(write=False)
    return StyleSpec(style_id, palette, background, phase, jitter)


def quantize(image: np.ndarray) -> np.ndarray:
    """
    Clamp into [0, 1] and snap to 8-bit levels
    """

    return np.round(np.clip(image, 0.0, 1.0) * 255.0) / 255.0


def draw_entity(image: np.ndarray, mask: np.ndarray, kind: str, top: int, left: int) -> None:
    """
    Paint one CELL x CELL entity (border color, 2 x 2 core) in place
    """

    border, core = ENTITY_COLORS[kind]

    image[:, top:top + CELL, left:left + CELL] = np.asarray(border)[:, None, None]
    image[:, top + 1:top + CELL - 1, left + 1:left + CELL - 1] = np.asarray(core)[:, None, None]
    mask[top:top + CELL, left:left + CELL] = True


def compose(
        style: StyleSpec,
        timestep: int,
        entities: t.Iterable[t.Tuple[str, int, int]],
        size: int = OBS_SIZE
) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Styled background with entities on top

    Args:
        style (StyleSpec): Background style
        timestep (int): Episode step (seeds the jitter)
        entities (t.Iterable[t.Tuple[str, int, int]]): (kind, top, left) pixel positions, drawn in order
        size (int): Image side

    Returns:
        t.Tuple[np.ndarray, np.ndarray]: Image 3 x size x size in [0, 1] and foreground mask
    """

    image = np.clip(style.background_image(size) + style.jitter_noise(timestep, size), 0.0, 1.0)
    mask = np.zeros((size, size), dtype=bool)

    for kind, top, left in entities:
        draw_entity(image, mask, kind, top, left)

    return quantize(image), mask


def pool_ids(pool: str) -> range:
    """
    Style ids of a pool

    Raises:
        PoolError: If pool is unknown
    """

    if pool not in POOLS:
        raise PoolError(f"unknown style pool {pool!r}, expected one of {', '.join(POOLS)}")

    return POOLS[pool]


def check_style_id(style_id: int) -> int:
    """
    Raises:
        PoolError: If style_id belongs to no pool
    """

    if not any(int(style_id) in ids for ids in POOLS.values()):
        raise PoolError(f"style id {style_id} is in neither the train nor the test pool")

    return int(style_id)


class StylePool:
    """
    Style ids available to a run (a prefix of the train pool, or the whole test pool)
    """

    def __init__(self, pool: str, num_styles: t.Optional[int] = None) -> None:
        ids = pool_ids(pool)

        if num_styles is not None:
            if not 1 <= num_styles <= len(ids):
                raise PoolError(f"{pool} pool holds {len(ids)} styles, {num_styles} requested")

            ids = ids[:num_styles]

        self.name = pool
        self.ids = ids

    def sample(self, rng: np.random.Generator) -> int:
        return int(self.ids[int(rng.integers(len(self.ids)))])

    def __contains__(self, style_id: int) -> bool:
        return style_id in self.ids

    def __len__(self) -> int:
        return len(self.ids)

    def __repr__(self) -> str:
        return f"StylePool({self.name!r}, {len(self)} styles)"


__all__ = (
    "OBS_SIZE",
    "CELL",
    "BACKGROUNDS",
    "ENTITY_COLORS",
    "TRAIN_IDS",
    "TEST_IDS",
    "StyleSpec",
    "StylePool",
    "quantize",
    "draw_entity",
    "compose",
    "pool_ids",
    "check_style_id"
)
