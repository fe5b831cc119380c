# coding=utf-8

from .run_config import RunConfig
from .metrics_record import MetricsRecord
from .eval_summary import EvalSummary
from .compare_row import CompareRow
