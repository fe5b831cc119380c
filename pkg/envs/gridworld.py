# coding=utf-8

import typing as t
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
from gymnasium import spaces

from errors import EnvError

from .base import StyledEnv
from .styles import CELL, StylePool, StyleSpec, compose


GRID = 8
NUM_COLLECTIBLES = 3
NUM_HAZARDS = 2
STEP_BUDGET = 64

# up, down, left, right as (row, col) offsets
MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))

Cell = t.Tuple[int, int]


@dataclass(frozen=True)
class Layout:
    """
    Entity placement generated from a layout seed
    """

    agent: Cell
    collectibles: t.Tuple[Cell, ...]
    hazards: t.Tuple[Cell, ...]

    @classmethod
    def generate(cls, layout_seed: int) -> "Layout":
        rng = np.random.default_rng(int(layout_seed))
        cells = rng.choice(GRID * GRID, size=1 + NUM_COLLECTIBLES + NUM_HAZARDS, replace=False)
        cells = [(int(cell) // GRID, int(cell) % GRID) for cell in cells]

        return cls(
            agent=cells[0],
            collectibles=tuple(cells[1:1 + NUM_COLLECTIBLES]),
            hazards=tuple(cells[1 + NUM_COLLECTIBLES:])
        )


@dataclass(frozen=True)
class GridState:
    layout: Layout
    agent: Cell
    collected: t.Tuple[bool, ...] = field(default=(False, ) * NUM_COLLECTIBLES)
    timestep: int = 0
    done: bool = False


def _move(cell: Cell, action: int) -> Cell:
    row, col = cell[0] + MOVES[action][0], cell[1] + MOVES[action][1]

    if 0 <= row < GRID and 0 <= col < GRID:
        return row, col

    # Wall
    return cell


def transition(state: GridState, action: int) -> t.Tuple[GridState, float, bool, bool]:
    """
    Apply one action (rules only, no rendering)

    Returns:
        t.Tuple[GridState, float, bool, bool]: next state, reward, done, terminated (not a budget cut)
    """

    agent = _move(state.agent, action)
    collected = list(state.collected)
    reward, terminated = 0.0, False

    if agent in state.layout.hazards:
        reward, terminated = -1.0, True

    elif agent in state.layout.collectibles:
        index = state.layout.collectibles.index(agent)

        if not collected[index]:
            collected[index] = True
            reward = 1.0

        terminated = all(collected)

    timestep = state.timestep + 1
    done = terminated or timestep >= STEP_BUDGET

    return replace(state, agent=agent, collected=tuple(collected), timestep=timestep, done=done), reward, done, terminated


def render_styled(state: GridState, style: StyleSpec) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Observation 3 x 32 x 32 and its foreground mask

    Collectibles disappear once taken, the agent is drawn last.
    """

    entities = [
        ("collectible", row * CELL, col * CELL)
        for (row, col), taken in zip(state.layout.collectibles, state.collected)
        if not taken
    ]
    entities += [("hazard", row * CELL, col * CELL) for row, col in state.layout.hazards]
    entities.append(("agent", state.agent[0] * CELL, state.agent[1] * CELL))

    return compose(style, state.timestep, entities, GRID * CELL)


def solve(layout: Layout, budget: int = STEP_BUDGET) -> t.Tuple[float, t.List[int]]:
    """
    Best achievable return and an action sequence reaching it

    Breadth-first search over (position, collected set), never entering hazards.

    Returns:
        t.Tuple[float, t.List[int]]: optimal return, actions of a shortest optimal trajectory
    """

    start = (layout.agent, 0)
    parents: t.Dict[t.Tuple[Cell, int], t.Optional[t.Tuple[t.Tuple[Cell, int], int]]] = {start: None}
    depth = {start: 0}
    queue = deque([start])
    full = (1 << len(layout.collectibles)) - 1
    best = start

    while queue:
        node = queue.popleft()
        cell, mask = node

        if bin(mask).count("1") > bin(best[1]).count("1"):
            # BFS order => first reached is shortest
            best = node

        if mask == full or depth[node] == budget:
            continue

        for action in range(len(MOVES)):
            target = _move(cell, action)

            if target in layout.hazards:
                continue

            next_mask = mask

            if target in layout.collectibles:
                next_mask |= 1 << layout.collectibles.index(target)

            child = (target, next_mask)

            if child not in depth:
                depth[child] = depth[node] + 1
                parents[child] = (node, action)
                queue.append(child)

    actions: t.List[int] = []
    node = best

    while parents[node] is not None:
        node, action = parents[node]
        actions.append(action)

    return float(bin(best[1]).count("1")), actions[::-1]


class StyledGridworld(StyledEnv):
    """
    Collect every coin on an 8 x 8 grid while avoiding hazards, rendered under a visual style

    Reward +1 per coin, -1 on a hazard (terminates). The episode terminates once all coins
    are taken and is truncated at STEP_BUDGET steps.
    """

    def __init__(self, style_pool: t.Optional[StylePool] = None, render_mode: t.Optional[str] = None) -> None:
        super().__init__(style_pool, render_mode)
        self.action_space = spaces.Discrete(len(MOVES))
        self.state: t.Optional[GridState] = None

    def start(self, layout_seed: int) -> None:
        layout = Layout.generate(layout_seed)
        self.state = GridState(layout=layout, agent=layout.agent)

    def step(self, action: int) -> t.Tuple[np.ndarray, float, bool, bool, t.Dict[str, t.Any]]:
        """
        Raises:
            EnvError: On a finished episode or an action outside 0..3
        """

        if self.state is None or self.state.done:
            raise EnvError("step() called on a finished episode, call reset() first")

        if not self.action_space.contains(action):
            raise EnvError(f"gridworld action must be one of 0..{len(MOVES) - 1}, got {action!r}")

        self.state, reward, done, terminated = transition(self.state, int(action))

        return self.observation(), reward, terminated, done and not terminated, {}

    def rendered(self) -> t.Tuple[np.ndarray, np.ndarray]:
        return render_styled(self.state, self.style)

    def optimal_return(self) -> float:
        return solve(self.state.layout)[0]



__all__ = (
    "GRID",
    "NUM_COLLECTIBLES",
    "NUM_HAZARDS",
    "STEP_BUDGET",
    "MOVES",
    "Layout",
    "GridState",
    "transition",
    "render_styled",
    "solve",
    "StyledGridworld"
)
