# coding=utf-8

import typing as t
from dataclasses import dataclass, replace

import numpy as np
from gymnasium import spaces

from errors import EnvError

from .base import StyledEnv
from .styles import CELL, OBS_SIZE, StylePool, StyleSpec, compose


DT = 0.1
HORIZON = 200
ARENA = 1.0
MAX_SPEED = 2.0
ACTION_DIM = 2


@dataclass(frozen=True, eq=False)
class PointState:
    position: np.ndarray
    velocity: np.ndarray
    goal: np.ndarray
    timestep: int = 0
    done: bool = False


def initial_state(layout_seed: int) -> PointState:
    """
    Start and goal uniform in the inner 80% of the arena, at rest
    """

    rng = np.random.default_rng(int(layout_seed))

    return PointState(
        position=rng.uniform(-0.8 * ARENA, 0.8 * ARENA, ACTION_DIM),
        velocity=np.zeros(ACTION_DIM),
        goal=rng.uniform(-0.8 * ARENA, 0.8 * ARENA, ACTION_DIM)
    )


def reward_at(state: PointState) -> float:
    return float(np.exp(-np.sum((state.position - state.goal) ** 2)))


def transition(state: PointState, action: np.ndarray) -> t.Tuple[PointState, float, bool, bool]:
    """
    Double integrator step with clamped action, speed and position

    Returns:
        t.Tuple[PointState, float, bool, bool]: next state, reward, done, clamped
    """

    action = np.asarray(action, dtype=np.float64).reshape(ACTION_DIM)

    if not np.all(np.isfinite(action)):
        raise EnvError(f"action must be finite, got {action.tolist()}")

    applied = np.clip(action, -1.0, 1.0)
    clamped = bool(np.any(applied != action))

    velocity = np.clip(state.velocity + applied * DT, -MAX_SPEED, MAX_SPEED)
    position = state.position + velocity * DT

    # Walls stop the mass
    hit = np.abs(position) > ARENA
    position = np.clip(position, -ARENA, ARENA)
    velocity = np.where(hit, 0.0, velocity)

    timestep = state.timestep + 1
    next_state = replace(state, position=position, velocity=velocity, timestep=timestep, done=timestep >= HORIZON)

    return next_state, reward_at(next_state), next_state.done, clamped


def _pixel(coordinate: np.ndarray) -> t.Tuple[int, int]:
    # Arena -> top-left pixel of a CELL x CELL sprite (row from y, col from x)
    span = OBS_SIZE - CELL
    col, row = np.round((coordinate / ARENA + 1.0) / 2.0 * span).astype(int)

    return int(span - row), int(col)


def render_styled(state: PointState, style: StyleSpec) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Observation 3 x 32 x 32 (goal, then the mass on top) and its foreground mask
    """

    entities = [("collectible", *_pixel(state.goal)), ("agent", *_pixel(state.position))]
    return compose(style, state.timestep, entities)


class StyledPointMass(StyledEnv):
    """
    Reach a goal with a 2-D point mass rendered under a visual style
    """

    action_dim = ACTION_DIM

    def __init__(self, style_pool: t.Optional[StylePool] = None, render_mode: t.Optional[str] = None) -> None:
        super().__init__(style_pool, render_mode)
        self.action_space = spaces.Box(-1.0, 1.0, (ACTION_DIM, ), dtype=np.float64)
        self.state: t.Optional[PointState] = None

    def start(self, layout_seed: int) -> None:
        self.state = initial_state(layout_seed)

    def step(self, action: np.ndarray) -> t.Tuple[np.ndarray, float, bool, bool, t.Dict[str, t.Any]]:
        """
        Apply a force in [-1, 1]^2 (values outside are clamped and flagged in info)

        Raises:
            EnvError: If called before reset, after the horizon or with a non-finite action
        """

        if self.state is None or self.state.done:
            raise EnvError("step() called on a finished episode, call reset() first")

        self.state, reward, done, clamped = transition(self.state, action)

        # Horizon cut only
        return self.observation(), reward, False, done, {"clamped": clamped}

    def rendered(self) -> t.Tuple[np.ndarray, np.ndarray]:
        return render_styled(self.state, self.style)


__all__ = (
    "DT",
    "HORIZON",
    "ARENA",
    "ACTION_DIM",
    "PointState",
    "initial_state",
    "reward_at",
    "transition",
    "render_styled",
    "StyledPointMass"
)
