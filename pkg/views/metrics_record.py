# coding=utf-8

from models import BaseSchema
from models.types import *


class MetricsRecord(BaseSchema):
    """
    One logging interval of a training run
    """

    __version__ = 1

    timestep = Integer[0, None]("timestep")

    # Returns (empty until available)
    episode_return = Float[None, None]("episode_return", required=False)
    eval_return_train_styles = Float[None, None]("eval_return_train_styles", required=False)
    eval_return_test_styles = Float[None, None]("eval_return_test_styles", required=False)

    # Losses
    l_div = Float[0.0, None]("l_div", default=0.0)
    g_critic = Float[0.0, None]("g_critic", default=0.0)
    actor_loss = Float[None, None]("actor_loss", default=0.0)
    critic_loss = Float[None, None]("critic_loss", default=0.0)
    gen_loss = Float[None, None]("gen_loss", default=0.0)
    entropy = Float[None, None]("entropy", default=0.0)

    # Kept out of metrics.csv (written to timing.csv)
    wall_time = Float[0.0, None]("wall_time", default=0.0)

    # Columns of metrics.csv, in order
    CSV_FIELDS = (
        "timestep",
        "episode_return",
        "eval_return_train_styles",
        "eval_return_test_styles",
        "l_div",
        "g_critic",
        "actor_loss",
        "critic_loss",
        "gen_loss",
        "entropy"
    )


__all__ = (
    "MetricsRecord",
)
