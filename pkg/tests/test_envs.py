# coding=utf-8

import gymnasium as gym
import numpy as np
import pytest
from numpy.testing import assert_array_equal

from envs import (
    ENTITY_COLORS, Layout, StylePool, StyleSpec, StyledGridworld, StyledPointMass,
    aug_color_cutout, aug_random_translate, augment_batch, compose, cutout, env_spaces, is_discrete, make,
    make_vector, translate
)
from envs.gridworld import STEP_BUDGET, GridState, solve, transition
from envs.pointmass import HORIZON, PointState, reward_at, transition as point_transition
from errors import EnvError, PoolError


# Styles and pools


def test_pools_are_disjoint():
    train, test = StylePool("train"), StylePool("test")

    assert len(train) == 200 and len(test) == 100
    assert not set(train.ids) & set(test.ids)
    assert min(test.ids) >= 10000


def test_pool_errors():
    with pytest.raises(PoolError):
        StylePool("validation")

    with pytest.raises(PoolError):
        StylePool("train", 201)


def test_train_prefix_sampling(rng):
    pool = StylePool("train", 3)
    assert {pool.sample(rng) for _ in range(100)} <= {0, 1, 2}


def test_solid_style_has_two_colors_per_entity():
    style = StyleSpec(7, np.full((3, 3), 0.3), "solid", 0, 0.0)

    for kind in ENTITY_COLORS:
        image, mask = compose(style, 0, [(kind, 8, 12)])
        colors = {tuple(pixel) for pixel in image[:, mask].T}

        assert len(colors) == 2


# Gridworld


def _options(layout_seed, style_id):
    return {"layout_seed": layout_seed, "style_id": style_id}


def test_reset_is_deterministic():
    first, second = StyledGridworld(), StyledGridworld()

    obs_a, info_a = first.reset(options=_options(11, 3))
    obs_b, info_b = second.reset(options=_options(11, 3))

    assert_array_equal(obs_a, obs_b)
    assert info_a == info_b == {"layout_seed": 11, "style_id": 3}


def test_seeded_reset_draws_from_pool():
    pool = StylePool("train", 2)
    first, second = StyledGridworld(pool), StyledGridworld(pool)

    _, info_a = first.reset(seed=42)
    _, info_b = second.reset(seed=42)

    assert info_a == info_b
    assert info_a["style_id"] in pool

    # Options override the drawn values
    _, info = first.reset(seed=42, options={"style_id": 10007})
    assert info == {"layout_seed": info_a["layout_seed"], "style_id": 10007}


def test_styles_change_background_only():
    env = StyledGridworld()

    obs_a, _ = env.reset(options=_options(11, 3))
    mask_a = env.entity_mask()
    obs_b, _ = env.reset(options=_options(11, 10042))
    mask_b = env.entity_mask()

    assert_array_equal(mask_a, mask_b)
    assert_array_equal(obs_a[:, mask_a], obs_b[:, mask_b])
    assert np.any(obs_a[:, ~mask_a] != obs_b[:, ~mask_b])


def test_observation_in_space():
    env = make("gridworld-v0")
    obs, _ = env.reset(options=_options(5, 17))

    assert obs.shape == (3, 32, 32)
    assert obs.min() >= 0.0 and obs.max() <= 1.0
    assert env.observation_space.contains(obs)


def test_step_into_collectible():
    layout = Layout(agent=(0, 0), collectibles=((0, 1), (5, 5), (6, 6)), hazards=((7, 7), (7, 6)))
    state, reward, done, terminated = transition(GridState(layout=layout, agent=layout.agent), 3)

    assert reward == 1.0
    assert state.collected == (True, False, False)
    assert not done and not terminated


def test_hazard_ends_episode():
    layout = Layout(agent=(0, 0), collectibles=((5, 5), (6, 6), (4, 4)), hazards=((1, 0), (7, 7)))
    _, reward, done, terminated = transition(GridState(layout=layout, agent=layout.agent), 1)

    assert reward == -1.0 and done and terminated


def test_walls_keep_agent_inside():
    layout = Layout(agent=(0, 0), collectibles=((5, 5), (6, 6), (4, 4)), hazards=((3, 3), (7, 7)))
    state, reward, _, _ = transition(GridState(layout=layout, agent=layout.agent), 0)

    assert state.agent == (0, 0) and reward == 0.0


@pytest.mark.parametrize("layout_seed", [0, 1, 2, 3, 4])
def test_optimal_trajectory_matches_bfs(layout_seed):
    env = StyledGridworld()
    env.reset(options=_options(layout_seed, 0))
    optimum, actions = solve(env.state.layout)

    total = 0.0

    for action in actions:
        _, reward, _, _, _ = env.step(action)
        total += reward

    assert total == optimum == env.optimal_return()


def test_random_policy_is_bounded_by_bfs(rng):
    env = StyledGridworld()

    for layout_seed in range(5):
        env.reset(options=_options(layout_seed, 1))
        optimum, total, steps = env.optimal_return(), 0.0, 0
        terminated = truncated = False

        while not (terminated or truncated):
            _, reward, terminated, truncated, _ = env.step(int(rng.integers(4)))
            total, steps = total + reward, steps + 1

        assert total <= optimum
        assert steps <= STEP_BUDGET
        assert truncated == (steps == STEP_BUDGET and not terminated)


def test_finished_episode_refuses_steps():
    env = StyledGridworld()

    with pytest.raises(EnvError):
        env.step(0)

    env.reset(options=_options(1, 1))

    with pytest.raises(EnvError):
        env.step(7)


def test_unknown_style_is_rejected():
    with pytest.raises(PoolError):
        StyledGridworld().reset(options=_options(0, 5000))


# Point mass


def test_point_mass_reward_at_goal():
    goal = np.array([0.3, -0.2])
    assert reward_at(PointState(position=goal.copy(), velocity=np.zeros(2), goal=goal)) == 1.0


def test_point_mass_clamps_actions():
    state = PointState(position=np.zeros(2), velocity=np.zeros(2), goal=np.ones(2) * 0.5)
    next_state, _, done, clamped = point_transition(state, np.array([3.0, 0.0]))

    assert clamped and not done
    assert next_state.velocity[0] == pytest.approx(0.1)


def test_point_mass_is_truncated_at_horizon():
    env = StyledPointMass()
    env.reset(options=_options(3, 2))
    steps, terminated, truncated = 0, False, False

    while not truncated:
        _, reward, terminated, truncated, info = env.step(np.zeros(2))
        steps += 1

        assert 0.0 < reward <= 1.0
        assert terminated is False and info["clamped"] is False

    assert steps == HORIZON


def test_point_mass_rejects_non_finite_action():
    env = StyledPointMass()
    env.reset(options=_options(3, 2))

    with pytest.raises(EnvError):
        env.step(np.array([np.nan, 0.0]))


# Augmentations


def test_translate_examples(rng):
    obs = rng.uniform(size=(3, 32, 32))

    assert_array_equal(translate(obs, 0, 0), obs)

    shifted = translate(obs, 4, 0)
    assert np.all(shifted[:, :, :4] == 0.0)
    assert_array_equal(shifted[:, :, 4:], obs[:, :, :-4])

    shifted = translate(obs, -2, 3)
    assert_array_equal(shifted[:, 3:, :-2], obs[:, :-3, 2:])


def test_random_translate_keeps_shape(rng):
    batch = rng.uniform(size=(4, 6, 32, 32))
    assert aug_random_translate(batch, rng).shape == batch.shape


def test_cutout_examples(rng):
    obs = rng.uniform(size=(6, 32, 32))
    out = cutout(obs, 5, 7, 4, 6, (0.1, 0.2, 0.3))

    inside = np.zeros((32, 32), dtype=bool)
    inside[7:13, 5:9] = True

    assert_array_equal(out[:, ~inside], obs[:, ~inside])
    assert {tuple(pixel) for pixel in out[:, inside].T} == {(0.1, 0.2, 0.3, 0.1, 0.2, 0.3)}


def test_color_cutout_rectangles(rng):
    batch = rng.uniform(size=(16, 3, 32, 32))
    out = aug_color_cutout(batch, rng)

    for before, after in zip(batch, out):
        changed = np.any(before != after, axis=0)
        rows, cols = np.nonzero(changed)

        assert 4 <= rows.ptp() + 1 <= 12 and 4 <= cols.ptp() + 1 <= 12
        assert len({tuple(pixel) for pixel in after[:, changed].T}) == 1


def test_augment_batch_dispatch(rng):
    batch = rng.uniform(size=(2, 3, 32, 32))

    assert augment_batch(batch, "none", rng) is batch

    with pytest.raises(ValueError):
        augment_batch(batch, "blur", rng)



# Registry and vectorization


def test_registered_with_gymnasium():
    env = gym.make("pointmass-v0")

    assert isinstance(env.unwrapped, StyledPointMass)
    assert env.spec.max_episode_steps is None


def test_env_spaces():
    observation_space, action_space = env_spaces("pointmass-v0", 3)

    assert observation_space.shape == (9, 32, 32)
    assert isinstance(action_space, gym.spaces.Box) and action_space.shape == (2, )

    assert is_discrete("gridworld-v0") and not is_discrete("pointmass-v0")
    assert env_spaces("gridworld-v0")[1].n == 4

    with pytest.raises(EnvError):
        env_spaces("cartpole-v1")


def test_frame_stack():
    env = make("gridworld-v0", 3)
    obs, _ = env.reset(options=_options(2, 4))

    assert obs.shape == (9, 32, 32)
    assert_array_equal(obs[:3], obs[6:])

    obs, *_ = env.step(0)
    assert_array_equal(obs[6:], env.unwrapped.observation())


def test_vector_env_auto_reset():
    envs = make_vector("gridworld-v0", 2, StylePool("train", 2))
    obs, infos = envs.reset(seed=[0, 1])
    finished = []

    assert obs.shape == (2, 3, 32, 32)
    assert set(infos["style_id"]) <= {0, 1}

    for _ in range(70):
        obs, rewards, terminated, truncated, infos = envs.step(np.array([0, 1]))
        assert rewards.shape == (2, ) and terminated.dtype == bool

        for index in np.flatnonzero(terminated | truncated):
            assert infos["_final_obs"][index]
            finished.append(infos["final_obs"][index])

    # Every copy hits the step budget at the latest
    assert len(finished) >= 2
    assert all(final.shape == (3, 32, 32) for final in finished)
