# coding=utf-8

from .core import *
from .functional import *
from .nn import *
from .optim import *
from .gradcheck import *
