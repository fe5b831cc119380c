# coding=utf-8

from models import BaseSchema
from models.types import *


class CompareRow(BaseSchema):
    """
    One (variant, pool) cell of a comparison report
    """

    __version__ = 1

    variant = String[64]("variant")
    pool = Choice["train", "test"]("pool")
    mean = Float[None, None]("mean")
    std = Float[0.0, None]("std")
    seeds = Integer[1, None]("seeds")
    rank = Integer[1, None]("rank")


__all__ = (
    "CompareRow",
)
