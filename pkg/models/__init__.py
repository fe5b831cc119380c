# coding=utf-8

from .core import *
from .types import *
