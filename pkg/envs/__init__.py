# coding=utf-8

from .styles import *
from .base import *
from .gridworld import StyledGridworld, Layout, GridState, solve
from .pointmass import StyledPointMass, PointState
from .augment import *
from .registry import *
