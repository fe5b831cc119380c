# coding=utf-8

import typing as t

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from .styles import OBS_SIZE, StylePool, StyleSpec, check_style_id


MAX_LAYOUT_SEED = 2 ** 31 - 1


class StyledEnv(gym.Env):
    """
    Environment whose observations are rendered under a per-episode visual style

    reset(seed=..., options={"layout_seed": ..., "style_id": ...}) fixes the episode;
    a missing layout seed or style id is drawn from the env's np_random
    (layout first, then style from the pool).
    """

    metadata = {"render_modes": ["rgb_array"]}

    def __init__(self, style_pool: t.Optional[StylePool] = None, render_mode: t.Optional[str] = None) -> None:
        self.style_pool = style_pool if style_pool is not None else StylePool("train")
        self.render_mode = render_mode
        self.observation_space = spaces.Box(0.0, 1.0, (3, OBS_SIZE, OBS_SIZE), dtype=np.float64)
        self.style: t.Optional[StyleSpec] = None
        self.layout_seed: t.Optional[int] = None

    def reset(
            self,
            *,
            seed: t.Optional[int] = None,
            options: t.Optional[t.Dict[str, t.Any]] = None
    ) -> t.Tuple[np.ndarray, t.Dict[str, t.Any]]:
        """
        Raises:
            PoolError: If the requested style id belongs to no pool
        """

        super().reset(seed=seed)
        options = options or {}

        if "layout_seed" in options:
            layout_seed = int(options["layout_seed"])
        else:
            layout_seed = int(self.np_random.integers(0, MAX_LAYOUT_SEED))

        if "style_id" in options:
            style_id = check_style_id(options["style_id"])
        else:
            style_id = self.style_pool.sample(self.np_random)

        self.layout_seed = layout_seed
        self.style = StyleSpec.from_id(style_id)
        self.start(layout_seed)

        return self.observation(), {"layout_seed": layout_seed, "style_id": style_id}

    def start(self, layout_seed: int) -> None:
        raise NotImplementedError

    def rendered(self) -> t.Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def observation(self) -> np.ndarray:
        return self.rendered()[0]

    def entity_mask(self) -> np.ndarray:
        return self.rendered()[1]

    def render(self) -> np.ndarray:
        # H x W x 3 uint8
        return np.round(self.observation().transpose(1, 2, 0) * 255.0).astype(np.uint8)


__all__ = (
    "MAX_LAYOUT_SEED",
    "StyledEnv"
)
