# coding=utf-8

from .distributions import *
from .networks import *
from .ppo import *
from .sac import *
from .sar import *
