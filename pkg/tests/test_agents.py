# coding=utf-8

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from agents import (
    Categorical, DiagGaussian, ParamGroup, PPOActorCritic, SarLossBundle, SarSettings, TanhGaussian, gae, l_div,
    polyak_update, ppo_actor_loss, ppo_critic_loss, sac_losses, sar_losses, soft_value, td_target, update_step
)
from errors import NumericError, SarError, ShapeError
from harness import ReplayBatch, RolloutBatch
from style import PerturbGenerator, StyleStats, style_perturb
from tensor import Adam, Module, Tensor, backward, gradcheck, square


# Distributions


def test_categorical_log_prob_and_entropy():
    dist = Categorical(Tensor([[0.0, 0.0], [0.0, math.log(3.0)]]))

    assert_allclose(dist.log_prob(np.array([0, 1])).data, [math.log(0.5), math.log(0.75)])
    assert dist.entropy().data[0] == pytest.approx(math.log(2.0))
    assert_array_equal(dist.mode(), [0, 1])


def test_categorical_sampling_frequencies():
    dist = Categorical(Tensor(np.log(np.tile([[0.2, 0.8]], (20000, 1)))))
    samples = dist.sample(np.random.default_rng(0))

    assert samples.mean() == pytest.approx(0.8, abs=0.02)


def test_l_div_examples():
    clean = Categorical(Tensor(np.log([[0.5, 0.5]])))
    adv = Categorical(Tensor(np.log([[0.25, 0.75]])))

    expected = 0.5 * math.log(2.0) + 0.5 * math.log(2.0 / 3.0)
    assert l_div(clean, adv).item() == pytest.approx(expected)
    assert expected == pytest.approx(0.1438, abs=1e-4)

    gauss = DiagGaussian(Tensor([[0.0]]), Tensor([[0.0]]))
    shifted = DiagGaussian(Tensor([[1.0]]), Tensor([[0.0]]))
    assert l_div(gauss, shifted).item() == pytest.approx(0.5)


def test_l_div_of_identical_categoricals_is_zero(rng):
    for _ in range(20):
        logits = Tensor(rng.normal(size=(5, 4)))
        assert l_div(Categorical(logits), Categorical(logits)).item() == 0.0


def test_l_div_family_and_arity_checks():
    with pytest.raises(TypeError):
        l_div(Categorical(Tensor([[0.0, 0.0]])), DiagGaussian(Tensor([[0.0]]), Tensor([[0.0]])))

    with pytest.raises(ShapeError):
        l_div(Categorical(Tensor([[0.0, 0.0]])), Categorical(Tensor([[0.0, 0.0, 0.0]])))


def test_tanh_gaussian_log_prob(rng):
    mean, log_std = rng.normal(size=(3, 2)), rng.normal(size=(3, 2)) * 0.3
    noise = rng.normal(size=(3, 2))

    action, logp = TanhGaussian(Tensor(mean), Tensor(log_std)).rsample_with_log_prob(noise)
    pre_tanh = mean + np.exp(log_std) * noise

    gaussian = -0.5 * (noise ** 2 + math.log(2.0 * math.pi)) - log_std
    expected = (gaussian - np.log(1.0 - np.tanh(pre_tanh) ** 2 + 1e-6)).sum(axis=1)

    assert_allclose(action.data, np.tanh(pre_tanh))
    assert_allclose(logp.data, expected)
    assert np.all(np.abs(action.data) < 1.0)


# Networks


def test_encoder_branch_shape(rng):
    model = PPOActorCritic((3, 32, 32), 4, rng, channels=(4, 6, 4), embedding_dim=8)
    z = model.encode_to_branch(np.zeros((2, 3, 32, 32)))

    assert z.shape == (2, 6, 8, 8)
    assert np.all(np.isfinite(z.data))

    with pytest.raises(ShapeError):
        model.encode_to_branch(np.zeros((2, 9, 32, 32)))


def test_identical_observations_give_identical_rows(rng, tiny_ppo):
    obs = np.repeat(rng.uniform(size=(1, 3, 8, 8)), 3, axis=0)
    dist, values = tiny_ppo(obs)

    assert_array_equal(dist.probs.data[0], dist.probs.data[2])
    assert_array_equal(values.data[0], values.data[1])
    assert_allclose(dist.probs.data.sum(axis=1), np.ones(3), atol=1e-9)


def test_equal_logits_give_uniform_policy(rng, tiny_ppo):
    tiny_ppo.policy_head.weight.data = np.zeros_like(tiny_ppo.policy_head.weight.data)
    dist, _ = tiny_ppo(rng.uniform(size=(2, 3, 8, 8)))

    assert_allclose(dist.probs.data, np.full((2, 4), 0.25))


def test_act_is_not_recorded(rng, tiny_ppo):
    actions, logp, values = tiny_ppo.act(rng.uniform(size=(3, 3, 8, 8)), rng)

    assert actions.shape == logp.shape == values.shape == (3, )
    assert np.all((actions >= 0) & (actions < 4))


def test_sac_targets_start_as_copies(tiny_sac):
    assert_array_equal(tiny_sac.target_q_1.layers[0].weight.data, tiny_sac.q_1.layers[0].weight.data)
    assert_array_equal(tiny_sac.target_encoder.head.weight.data, tiny_sac.encoder.head.weight.data)
    assert tiny_sac.alpha == pytest.approx(0.1)
    assert tiny_sac.target_entropy == -2.0


# PPO


def brute_force_gae(rewards, values, dones, last_values, gamma, lam):
    steps, envs = rewards.shape
    advantages = np.zeros((steps, envs))

    for env in range(envs):
        next_value, running = float(last_values[env]), 0.0

        for step in reversed(range(steps)):
            live = 1.0 - float(dones[step, env])
            delta = float(rewards[step, env]) + gamma * live * next_value - float(values[step, env])
            running = delta + gamma * lam * live * running

            advantages[step, env] = running
            next_value = float(values[step, env])

    return advantages


def test_gae_single_terminal_step():
    advantages, targets = gae(np.ones((1, 1)), np.zeros((1, 1)), np.ones((1, 1)), np.zeros(1), 0.99, 0.95)

    assert advantages[0, 0] == 1.0
    assert targets[0, 0] == 1.0


def test_gae_lambda_zero_is_td(rng):
    rewards, values = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    last = rng.normal(size=3)
    advantages, _ = gae(rewards, values, np.zeros((5, 3)), last, 0.9, 0.0)

    next_values = np.concatenate([values[1:], last[None]])
    assert_allclose(advantages, rewards + 0.9 * next_values - values)


def test_gae_matches_brute_force(rng):
    for _ in range(1000):
        rewards, values = rng.normal(size=(5, 2)), rng.normal(size=(5, 2))
        dones = rng.random((5, 2)) < 0.3
        last = rng.normal(size=2)

        advantages, targets = gae(rewards, values, dones, last, 0.99, 0.95)

        assert_array_equal(advantages, brute_force_gae(rewards, values, dones, last, 0.99, 0.95))
        assert_array_equal(targets, advantages + values)


def test_gae_rejects_empty_rollout():
    with pytest.raises(ShapeError):
        gae(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(2), 0.99, 0.95)


def test_ppo_actor_loss_examples(rng):
    dist = Categorical(Tensor(rng.normal(size=(4, 3))))
    actions = np.array([0, 1, 2, 1])
    logp = dist.log_prob(actions).data
    advantages = rng.normal(size=4)

    loss = ppo_actor_loss(dist, actions, logp, advantages, entropy_coef=0.0)
    assert loss.item() == pytest.approx(-advantages.mean())

    # ratio 1.5, advantage 1 => objective clipped to 1.2
    loss = ppo_actor_loss(dist, actions[:1], logp[:1] - math.log(1.5), np.ones(1), 0.2, 0.0)
    assert loss.item() == pytest.approx(-1.2)

    # ratio 0.5, advantage -1 => objective -0.8
    loss = ppo_actor_loss(dist, actions[:1], logp[:1] - math.log(0.5), -np.ones(1), 0.2, 0.0)
    assert loss.item() == pytest.approx(0.8)


def test_ppo_actor_loss_non_finite_ratio(rng):
    dist = Categorical(Tensor(rng.normal(size=(2, 3))))

    with pytest.raises(NumericError):
        ppo_actor_loss(dist, np.array([0, 1]), np.array([-1e6, 0.0]), np.ones(2))


def test_ppo_critic_loss_examples(rng):
    values = rng.normal(size=6)

    assert ppo_critic_loss(values, values).item() == 0.0
    assert ppo_critic_loss(np.zeros(1), np.array([2.0])).item() == pytest.approx(4.0)

    targets = rng.normal(size=6)
    halves = (ppo_critic_loss(values[:3], targets[:3]).item() + ppo_critic_loss(values[3:], targets[3:]).item()) / 2
    assert ppo_critic_loss(values, targets).item() == pytest.approx(halves)


# SAC


def test_soft_value_and_td_target():
    assert soft_value(np.array([2.0]), np.array([-1.0]), 0.1).data[0] == pytest.approx(2.1)
    assert td_target(np.array([1.0]), np.array([1.0]), np.array([123.0]), 0.99)[0] == 1.0
    assert_array_equal(td_target(np.array([0.5, -1.0]), np.zeros(2), np.array([3.0, 4.0]), 0.0), [0.5, -1.0])


def replay_batch(rng: np.random.Generator, size: int = 3) -> ReplayBatch:
    return ReplayBatch(
        obs=rng.uniform(size=(size, 3, 8, 8)),
        actions=rng.uniform(-1.0, 1.0, (size, 2)),
        rewards=rng.normal(size=size),
        next_obs=rng.uniform(size=(size, 3, 8, 8)),
        dones=(rng.random(size) < 0.5).astype(np.float64)
    )


def test_sac_losses_are_finite_scalars(rng, tiny_sac):
    losses = sac_losses(replay_batch(rng), tiny_sac, 0.99, rng.normal(size=(3, 2)), rng.normal(size=(3, 2)))

    for loss in (losses.actor_loss, losses.critic_loss, losses.alpha_loss):
        assert loss.size == 1 and np.isfinite(loss.item())

    backward(losses.critic_loss)
    assert tiny_sac.encoder.block_1.conv.weight.grad is not None
    assert tiny_sac.target_encoder.block_1.conv.weight.grad is None


def test_polyak_update(rng, tiny_sac):
    tiny_sac.q_1.layers[0].weight.data = tiny_sac.q_1.layers[0].weight.data + 1.0
    before = tiny_sac.target_q_1.layers[0].weight.data.copy()

    polyak_update(tiny_sac.target_q_1, tiny_sac.q_1, 0.0)
    assert_array_equal(tiny_sac.target_q_1.layers[0].weight.data, before)

    polyak_update(tiny_sac.target_q_1, tiny_sac.q_1, 0.25)
    assert_allclose(tiny_sac.target_q_1.layers[0].weight.data, before + 0.25)

    polyak_update(tiny_sac.target_q_1, tiny_sac.q_1, 1.0)
    assert_array_equal(tiny_sac.target_q_1.layers[0].weight.data, tiny_sac.q_1.layers[0].weight.data)


# Style-agnostic losses


def rollout_batch(model: PPOActorCritic, rng: np.random.Generator, size: int = 4) -> RolloutBatch:
    obs = rng.uniform(size=(size, 3, 8, 8))
    actions, logp, values = model.act(obs, rng)

    return RolloutBatch(obs, actions, logp, rng.normal(size=size), values + rng.normal(size=size))


def test_gen_loss_is_negated_divergence(rng, tiny_ppo, tiny_generator):
    for lambda_gen in (0.01, 0.37, 2.0):
        settings = SarSettings(lambda_actor=0.1, lambda_gen=lambda_gen, kappa=0.2)
        bundle = sar_losses(tiny_ppo, rollout_batch(tiny_ppo, rng), tiny_generator, settings, perm=rng.permutation(4))

        assert bundle.gen_loss.item() == -lambda_gen * bundle.l_div.item()
        assert bundle.l_div.item() >= 0.0


def test_without_adversarial_terms_reduces_to_mixing(rng, tiny_ppo):
    batch = rollout_batch(tiny_ppo, rng)
    settings = SarSettings(lambda_actor=0.0, lambda_gen=0.0, kappa=0.0)

    assert not settings.adversarial

    bundle = sar_losses(tiny_ppo, batch, None, settings, perm=np.array([1, 0, 3, 2]))
    assert bundle.l_div.item() == 0.0 and bundle.g_critic.item() == 0.0

    with pytest.raises(SarError):
        sar_losses(tiny_ppo, batch, None, settings)


def test_warmup_disables_adversarial_terms():
    assert not SarSettings(active=False).adversarial
    assert SarSettings(active=True).adversarial


def test_identity_perturbation_has_no_effect(rng, tiny_ppo):
    z = tiny_ppo.encode_to_branch(rng.uniform(size=(4, 3, 8, 8)))

    dist, values = tiny_ppo.heads_from_branch(z)
    dist_adv, values_adv = tiny_ppo.heads_from_branch(style_perturb(z, StyleStats.of(z)))

    assert abs(l_div(dist, dist_adv).item()) < 1e-10
    assert square(values - values_adv).mean().item() < 1e-10


def test_identity_perturbation_gives_zero_critic_gradient(rng, tiny_ppo, tiny_generator, monkeypatch):
    monkeypatch.setattr("agents.sar.generate_perturbation", lambda gen, z: StyleStats.of(z))
    settings = SarSettings(lambda_actor=0.5, lambda_gen=0.5, kappa=0.5, style_mixing=False)

    bundle = sar_losses(tiny_ppo, rollout_batch(tiny_ppo, rng), tiny_generator, settings)
    assert bundle.g_critic.item() < 1e-12

    tiny_ppo.zero_grad()
    backward(bundle.g_critic)

    for param in tiny_ppo.critic_parameters():
        grad = param.grad if param.grad is not None else np.zeros_like(param.data)
        assert np.abs(grad).max() < 1e-8


def test_generator_gradient_is_negated_divergence_gradient(rng, tiny_ppo, tiny_generator):
    batch, perm = rollout_batch(tiny_ppo, rng), rng.permutation(4)
    settings = SarSettings(lambda_actor=0.1, lambda_gen=0.37, kappa=0.2)

    def generator_grads(name):
        tiny_ppo.zero_grad()
        tiny_generator.zero_grad()
        backward(getattr(sar_losses(tiny_ppo, batch, tiny_generator, settings, perm), name))

        return [param.grad.copy() for param in tiny_generator.parameters()]

    gen_grads, div_grads = generator_grads("gen_loss"), generator_grads("l_div")
    assert any(np.any(grad != 0.0) for grad in div_grads)

    for gen_grad, div_grad in zip(gen_grads, div_grads):
        assert_allclose(gen_grad, -0.37 * div_grad, rtol=1e-9, atol=1e-15)



def test_ppo_sar_graph_gradients(rng, tiny_ppo, tiny_generator):
    batch = rollout_batch(tiny_ppo, rng, 3)
    settings = SarSettings(lambda_actor=0.5, lambda_gen=0.5, kappa=0.5)
    perm = np.array([2, 0, 1])

    def loss(name):
        return lambda: getattr(sar_losses(tiny_ppo, batch, tiny_generator, settings, perm), name)

    gradcheck(loss("actor_loss"), [tiny_ppo.policy_head.weight, tiny_ppo.encoder.block_2.conv.weight])
    gradcheck(loss("critic_loss"), [tiny_ppo.value_head.layers[0].weight, tiny_ppo.encoder.head.weight])
    gradcheck(loss("gen_loss"), [tiny_generator.hidden_1.weight, tiny_generator.gamma_head.weight, tiny_generator.beta_head.bias])


def test_sac_sar_graph_gradients(rng, tiny_sac, tiny_generator):
    batch = replay_batch(rng)
    noise, noise_next = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    settings = SarSettings(lambda_actor=0.5, lambda_gen=0.5, kappa=0.5)

    def loss(name):
        return lambda: getattr(
            sar_losses(tiny_sac, batch, tiny_generator, settings, np.array([1, 2, 0]), noise, noise_next), name
        )

    gradcheck(loss("critic_loss"), [tiny_sac.q_1.layers[0].weight, tiny_sac.encoder.block_2.conv.bias])
    gradcheck(loss("actor_loss"), [tiny_sac.actor.layers[-1].weight])
    gradcheck(loss("gen_loss"), [tiny_generator.hidden_2.weight])
    gradcheck(loss("alpha_loss"), [tiny_sac.log_alpha])


def test_sac_requires_noise(rng, tiny_sac, tiny_generator):
    with pytest.raises(SarError):
        sar_losses(tiny_sac, replay_batch(rng), tiny_generator, SarSettings())


# Update step


def ppo_groups(model, generator, settings, lr=1e-2):
    return [
        ParamGroup("critic", "critic_loss", Adam(model.critic_parameters(), lr)),
        ParamGroup("generator", "gen_loss", Adam(generator.parameters(), lr), enabled=settings.adversarial),
        ParamGroup("actor", "actor_loss", Adam(model.actor_parameters(), lr))
    ]


def test_disabled_generator_is_untouched(rng, tiny_ppo, tiny_generator):
    settings = SarSettings(lambda_actor=0.0, lambda_gen=0.0, kappa=0.0)
    before = tiny_generator.state_dict()
    policy_before = tiny_ppo.policy_head.weight.data.copy()
    batch, perm = rollout_batch(tiny_ppo, rng), rng.permutation(4)

    update_step(
        lambda: sar_losses(tiny_ppo, batch, tiny_generator, settings, perm),
        ppo_groups(tiny_ppo, tiny_generator, settings),
        (tiny_ppo, tiny_generator)
    )

    for name, value in tiny_generator.state_dict().items():
        assert_array_equal(value, before[name])

    assert np.any(tiny_ppo.policy_head.weight.data != policy_before)


def test_generator_ascends_divergence(rng, tiny_ppo, tiny_generator):
    settings = SarSettings(lambda_actor=0.1, lambda_gen=0.1, kappa=0.1)
    before = tiny_generator.state_dict()
    batch, perm = rollout_batch(tiny_ppo, rng), rng.permutation(4)

    bundle = update_step(
        lambda: sar_losses(tiny_ppo, batch, tiny_generator, settings, perm),
        ppo_groups(tiny_ppo, tiny_generator, settings),
        (tiny_ppo, tiny_generator)
    )

    assert np.isfinite(bundle.l_div.item())
    assert any(np.any(value != before[name]) for name, value in tiny_generator.state_dict().items())


class Quadratic(Module):

    def __init__(self) -> None:
        self.w = Tensor(np.array([[0.0, 1.0]]), requires_grad=True)

    def forward(self) -> SarLossBundle:
        loss = square(self.w - 3.0).sum()
        zero = Tensor(0.0)
        return SarLossBundle(loss, zero, zero, zero, zero, zero)


def test_update_step_descends_quadratic():
    stub = Quadratic()
    first = update_step(stub, [ParamGroup("actor", "actor_loss", Adam(stub.parameters(), 0.1))], (stub, ))

    assert stub().actor_loss.item() < first.actor_loss.item()


def test_update_step_rejects_non_finite():
    stub = Quadratic()
    stub.w.data = np.array([[np.inf, 0.0]])
    optimizer = Adam(stub.parameters(), 0.1)

    with pytest.raises(NumericError):
        update_step(stub, [ParamGroup("actor", "actor_loss", optimizer)], (stub, ))

    assert optimizer.steps == 0


def test_update_steps_are_reproducible(rng):
    def run():
        model_rng = np.random.default_rng(7)
        model = PPOActorCritic((3, 8, 8), 4, model_rng, channels=(2, 3, 2), embedding_dim=4, hidden=4)
        generator = PerturbGenerator(3, model_rng, hidden=4)
        settings = SarSettings()
        groups = ppo_groups(model, generator, settings)
        data_rng = np.random.default_rng(11)

        for _ in range(3):
            batch, perm = rollout_batch(model, data_rng), data_rng.permutation(4)
            update_step(lambda: sar_losses(model, batch, generator, settings, perm), groups, (model, generator))

        return {**model.state_dict(), **{f"gen.{k}": v for k, v in generator.state_dict().items()}}

    first, second = run(), run()

    for name in first:
        assert_array_equal(first[name], second[name])
