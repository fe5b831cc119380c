# coding=utf-8

import itertools
import json
import logging
import typing as t
from pathlib import Path
from time import perf_counter

import numpy as np

from errors import ConfigError
from envs import MAX_LAYOUT_SEED, StylePool, make
from tensor import no_grad

from .seeding import SeedStreams
from .trainer import restore


logger = logging.getLogger(__name__)

ANALYSIS_SCHEMA_VERSION = 1

Encode = t.Callable[[np.ndarray], np.ndarray]


class StyleGap(t.NamedTuple):
    cross_style_dist: float
    cross_state_dist: float
    index: float


def _mean_pairwise(rows: np.ndarray) -> float:
    pairs = list(itertools.combinations(range(len(rows)), 2))

    if not pairs:
        return 0.0

    return float(np.mean([np.linalg.norm(rows[i] - rows[j]) for i, j in pairs]))


def embedding_style_gap(
        encode: Encode,
        env_id: str,
        n_states: int,
        n_styles: int,
        rng: np.random.Generator,
        frame_stack: int = 1,
        style_ids: t.Optional[t.Sequence[int]] = None
) -> StyleGap:
    """
    Style sensitivity of an encoder

    Renders n_states initial states under n_styles styles and compares embeddings:
    cross_style_dist is the mean pairwise L2 distance between styles of the same state,
    cross_state_dist between states under the same style. index = cross_style / cross_state
    (0 when cross_state is 0).

    Args:
        encode (Encode): Observations B x C x H x W -> embeddings B x ...
        env_id (str): Environment id
        n_states (int): Layouts compared (at least 2)
        n_styles (int): Styles drawn from the test pool
        rng (np.random.Generator): Draws layouts and styles
        frame_stack (int): Frames per observation
        style_ids (t.Optional[t.Sequence[int]]): Explicit styles instead of drawing n_styles

    Raises:
        ConfigError: If n_states < 2
    """

    if n_states < 2:
        raise ConfigError(f"embedding analysis needs at least 2 states, got {n_states}")

    if style_ids is None:
        pool = StylePool("test")
        style_ids = [pool.sample(rng) for _ in range(n_styles)]

    layout_seeds = [int(rng.integers(0, MAX_LAYOUT_SEED)) for _ in range(n_states)]
    env = make(env_id, frame_stack)

    # states x styles x features
    observations = np.stack([
        np.stack([env.reset(options={"layout_seed": layout_seed, "style_id": style_id})[0] for style_id in style_ids])
        for layout_seed in layout_seeds
    ])
    embeddings = encode(observations.reshape(-1, *observations.shape[2:]))
    embeddings = np.asarray(embeddings, dtype=np.float64).reshape(n_states, len(style_ids), -1)

    cross_style = float(np.mean([_mean_pairwise(embeddings[state]) for state in range(n_states)]))
    cross_state = float(np.mean([_mean_pairwise(embeddings[:, style]) for style in range(len(style_ids))]))

    return StyleGap(cross_style, cross_state, cross_style / cross_state if cross_state > 0 else 0.0)


def analyze_run(
        run_dir: t.Union[str, Path],
        n_states: int = 16,
        n_styles: int = 8,
        seed: t.Optional[int] = None
) -> t.Dict[str, t.Any]:
    """
    Style sensitivity of a trained encoder at the branch point, written to analysis.json
    """

    started = perf_counter()
    cfg, model, _, header = restore(run_dir)
    seed = cfg.seed if seed is None else seed

    def encode(obs: np.ndarray) -> np.ndarray:
        with no_grad():
            return model.encode_to_branch(obs).data.reshape(len(obs), -1)

    gap = embedding_style_gap(
        encode, cfg.env_id, n_states, n_styles, SeedStreams(seed).get("analysis"), cfg.frame_stack
    )

    result = {
        "schema_version": ANALYSIS_SCHEMA_VERSION,
        "step": header["step"],
        "n_states": n_states,
        "n_styles": n_styles,
        "seed": seed,
        **gap._asdict()
    }

    with open(Path(run_dir) / "analysis.json", "wt") as analysis_file:
        json.dump(result, analysis_file, indent=2)

    logger.info(f"Successfully analyzed {run_dir}: index {gap.index:.4f} ({perf_counter() - started:.3f} s)")
    return result


__all__ = (
    "StyleGap",
    "embedding_style_gap",
    "analyze_run"
)
