# coding=utf-8

import sys
from pathlib import Path


# Top-level packages are imported by name
sys.path.insert(0, str(Path(__file__).resolve().parent))
