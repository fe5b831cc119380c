# coding=utf-8

import typing as t

import numpy as np


MAX_SHIFT = 4
CUTOUT_MIN, CUTOUT_MAX = 4, 12


def translate(obs: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """
    Shift image content by (dx, dy) pixels (right and down positive), zero padding

    Args:
        obs (np.ndarray): Image(s) ... x H x W

    Returns:
        np.ndarray: Shifted copy, same shape
    """

    height, width = obs.shape[-2:]
    out = np.zeros_like(obs)

    if abs(dx) >= width or abs(dy) >= height:
        return out

    out[..., max(dy, 0):height + min(dy, 0), max(dx, 0):width + min(dx, 0)] = \
        obs[..., max(-dy, 0):height - max(dy, 0), max(-dx, 0):width - max(dx, 0)]

    return out


def cutout(obs: np.ndarray, x: int, y: int, w: int, h: int, color: t.Sequence[float]) -> np.ndarray:
    """
    Fill one rectangle with an RGB color (repeated for every stacked frame)

    Args:
        obs (np.ndarray): Image C x H x W with C a multiple of 3
        x (int): Left column
        y (int): Top row
        w (int): Width
        h (int): Height
        color (t.Sequence[float]): RGB in [0, 1]
    """

    channels = obs.shape[-3]
    out = obs.copy()
    fill = np.tile(np.asarray(color, dtype=np.float64), channels // 3)

    out[..., y:y + h, x:x + w] = fill[:, None, None]
    return out


def aug_random_translate(obs: np.ndarray, rng: np.random.Generator, max_shift: int = MAX_SHIFT) -> np.ndarray:
    """
    Pad-and-crop shift of every image by an independent (dx, dy) in [-max_shift, max_shift]

    Args:
        obs (np.ndarray): Batch B x C x H x W
    """

    shifts = rng.integers(-max_shift, max_shift + 1, size=(obs.shape[0], 2))
    return np.stack([translate(image, int(dx), int(dy)) for image, (dx, dy) in zip(obs, shifts)])


def aug_color_cutout(obs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    One random rectangle per image (sides in [4, 12] px) filled with one random color

    Args:
        obs (np.ndarray): Batch B x C x H x W
    """

    height, width = obs.shape[-2:]
    out = []

    for image in obs:
        w, h = (int(side) for side in rng.integers(CUTOUT_MIN, CUTOUT_MAX + 1, size=2))
        x = int(rng.integers(0, width - w + 1))
        y = int(rng.integers(0, height - h + 1))

        out.append(cutout(image, x, y, w, h, rng.uniform(0.0, 1.0, 3)))

    return np.stack(out)


AUGMENTATIONS: t.Dict[str, t.Callable[[np.ndarray, np.random.Generator], np.ndarray]] = {
    "trans": aug_random_translate,
    "color": aug_color_cutout
}


def augment_batch(obs: np.ndarray, kind: str, rng: np.random.Generator) -> np.ndarray:
    """
    Apply a named augmentation to a training batch ("none" returns obs unchanged)
    """

    if kind == "none":
        return obs

    if kind not in AUGMENTATIONS:
        raise ValueError(f"unknown augmentation {kind!r}, expected none, {', '.join(AUGMENTATIONS)}")

    return AUGMENTATIONS[kind](obs, rng)


__all__ = (
    "MAX_SHIFT",
    "translate",
    "cutout",
    "aug_random_translate",
    "aug_color_cutout",
    "augment_batch"
)
