# coding=utf-8

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from errors import ShapeError
from style import EPS_GAMMA, PerturbGenerator, StyleStats, adain, generate_perturbation, instance_norm, normalize, style_mix_batch, style_perturb
from tensor import Tensor, channel_stats


def feature_map(rng: np.random.Generator, batch: int = 4, channels: int = 8, size: int = 8) -> np.ndarray:
    scale = rng.uniform(0.8, 1.5, (batch, channels, 1, 1))
    shift = rng.uniform(-2.0, 2.0, (batch, channels, 1, 1))
    return rng.normal(size=(batch, channels, size, size)) * scale + shift


def stats(beta, gamma) -> StyleStats:
    return StyleStats(beta=Tensor(np.asarray(beta, dtype=np.float64)), gamma=Tensor(np.asarray(gamma, dtype=np.float64)))


def test_instance_norm_hand_values():
    z = np.array([1.0, 2.0, 3.0, 4.0]).reshape(1, 1, 2, 2)
    out = instance_norm(Tensor(z), stats([[0.0]], [[1.0]]))

    assert_allclose(out.data.reshape(-1), [-1.3416, -0.4472, 0.4472, 1.3416], atol=1e-4)


def test_instance_norm_inverse_identity(rng):
    z = Tensor(feature_map(rng))
    assert_allclose(instance_norm(z, StyleStats.of(z)).data, z.data, atol=1e-10)


def test_instance_norm_zero_scale(rng):
    z = Tensor(feature_map(rng, 2, 3))
    beta = rng.normal(size=(2, 3))

    out = instance_norm(z, stats(beta, np.zeros((2, 3))))
    assert_allclose(out.data, np.broadcast_to(beta[:, :, None, None], z.shape))


def test_normalized_maps_are_standard(rng):
    for _ in range(100):
        batch, channels = int(rng.integers(1, 5)), int(rng.integers(1, 9))
        mu, sigma = channel_stats(normalize(Tensor(feature_map(rng, batch, channels))), 0.0)

        assert np.all(np.abs(mu.data) < 1e-6)
        assert np.all(np.abs(sigma.data - 1.0) < 1e-4)


def test_adain_examples(rng):
    z = Tensor(feature_map(rng))
    assert_allclose(adain(z, z).data, z.data, atol=1e-6)

    content = np.array([0.0, 2.0]).reshape(1, 1, 1, 2)
    source = np.array([4.0, 8.0]).reshape(1, 1, 1, 2)
    assert_allclose(adain(content, source).data.reshape(-1), [4.0, 8.0], atol=1e-4)


def test_adain_transfers_source_stats(rng):
    for _ in range(100):
        batch, channels = int(rng.integers(1, 5)), int(rng.integers(1, 9))
        z, z_src = feature_map(rng, batch, channels), feature_map(rng, batch, channels)

        mu, sigma = channel_stats(adain(z, z_src))
        mu_src, sigma_src = channel_stats(z_src)

        assert_allclose(mu.data, mu_src.data, atol=1e-4)
        assert_allclose(sigma.data, sigma_src.data, atol=1e-4)


def test_adain_is_idempotent(rng):
    z, z_src = feature_map(rng), feature_map(rng)
    once = adain(z, z_src)

    assert_allclose(adain(once, z_src).data, once.data, atol=1e-4)


def test_adain_preserves_normalized_content(rng):
    z, z_src = feature_map(rng), feature_map(rng)

    assert_allclose(normalize(adain(z, z_src)).data, normalize(Tensor(z)).data, atol=1e-4)



def test_adain_shape_mismatch(rng):
    with pytest.raises(ShapeError):
        adain(feature_map(rng, 2, 3), feature_map(rng, 2, 4))


def test_style_mix_single_sample(rng):
    z = Tensor(feature_map(rng, 1))
    assert_allclose(style_mix_batch(z, rng).data, z.data, atol=1e-6)


def test_style_mix_is_seeded(rng):
    z = Tensor(feature_map(rng))

    first = style_mix_batch(z, np.random.default_rng(9))
    second = style_mix_batch(z, np.random.default_rng(9))
    assert_array_equal(first.data, second.data)


def test_style_mix_rows_take_existing_stats(rng):
    z = Tensor(feature_map(rng))
    mu, sigma = channel_stats(style_mix_batch(z, rng))
    mu_in, sigma_in = channel_stats(z)

    for row in range(z.shape[0]):
        distance = np.abs(mu_in.data - mu.data[row]).max(axis=1) + np.abs(sigma_in.data - sigma.data[row]).max(axis=1)
        assert distance.min() < 1e-4


def test_style_mix_rejects_non_permutation(rng):
    with pytest.raises(ShapeError):
        style_mix_batch(Tensor(feature_map(rng, 3)), perm=np.array([0, 0, 1]))


def test_zero_initialized_generator(rng):
    generator = PerturbGenerator(8, rng)
    out = generate_perturbation(generator, Tensor(feature_map(rng)))

    assert_allclose(out.gamma.data, np.full((4, 8), math.log(2.0) + EPS_GAMMA))
    assert_array_equal(out.beta.data, np.zeros((4, 8)))


def test_generator_is_deterministic_per_row(rng, tiny_generator):
    z = feature_map(rng, 2, 3)
    first = generate_perturbation(tiny_generator, Tensor(z))
    again = generate_perturbation(tiny_generator, Tensor(z))

    assert_array_equal(first.gamma.data, again.gamma.data)

    changed = z.copy()
    changed[1] = feature_map(rng, 1, 3)[0]
    other = generate_perturbation(tiny_generator, Tensor(changed))

    assert_array_equal(other.beta.data[0], first.beta.data[0])
    assert np.any(other.beta.data[1] != first.beta.data[1])
    assert np.all(other.gamma.data > 0)


def test_generator_channel_mismatch(rng, tiny_generator):
    with pytest.raises(ShapeError):
        generate_perturbation(tiny_generator, Tensor(feature_map(rng, 2, 5)))


def test_style_perturb_identity(rng):
    z = Tensor(feature_map(rng))
    assert_allclose(style_perturb(z, StyleStats.of(z)).data, z.data, atol=1e-10)


def test_style_perturb_collapse(rng):
    z = Tensor(feature_map(rng, 2, 3))
    beta = rng.normal(size=(2, 3))
    out = style_perturb(z, stats(beta, np.full((2, 3), EPS_GAMMA)))

    spread = np.abs(out.data - beta[:, :, None, None]).max()
    assert spread < 10 * EPS_GAMMA


def test_style_perturb_sets_target_stats(rng):
    z = Tensor(feature_map(rng))
    beta, gamma = rng.normal(size=(4, 8)), rng.uniform(0.5, 2.0, (4, 8))

    mu, sigma = channel_stats(style_perturb(z, stats(beta, gamma)))

    assert_allclose(mu.data, beta, atol=1e-4)
    assert_allclose(sigma.data, gamma, atol=1e-4)


def test_style_stats_shape_checks(rng):
    with pytest.raises(ShapeError):
        stats(np.zeros((2, 3)), np.ones((2, 4)))

    with pytest.raises(ShapeError):
        instance_norm(Tensor(feature_map(rng, 2, 3)), stats(np.zeros((2, 4)), np.ones((2, 4))))
