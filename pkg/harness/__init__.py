# coding=utf-8

from .seeding import *
from .buffers import *
from .normalization import *
from .checkpoint import *
from .metrics import *
from .evaluation import *
from .trainer import *
from .analysis import *
