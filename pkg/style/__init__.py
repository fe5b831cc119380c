# coding=utf-8

from .layers import *
from .generator import *
