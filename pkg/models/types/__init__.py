# coding=utf-8

from .bool import *
from .string import *
from .numeric import *
