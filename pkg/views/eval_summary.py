# coding=utf-8

from models import BaseSchema
from models.types import *


class EvalSummary(BaseSchema):
    """
    Evaluation result on one style pool
    """

    __version__ = 1

    pool = Choice["train", "test"]("pool")
    mean = Float[None, None]("mean")
    std = Float[0.0, None]("std")
    episodes = Integer[1, None]("episodes")
    seed = Integer[0, None]("seed")


__all__ = (
    "EvalSummary",
)
