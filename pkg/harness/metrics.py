# coding=utf-8

import csv
import math
import typing as t
from pathlib import Path

from errors import MetricError, MissingArtifactError
from views import MetricsRecord


def format_number(value: t.Optional[float]) -> str:
    """
    17 significant digits, empty for missing values
    """

    if value is None:
        return ""

    if isinstance(value, int):
        return str(value)

    return format(float(value), ".17g")


class MetricsWriter:
    """
    Single appender of metrics.csv and timing.csv

    wall_time goes to timing.csv only, so metrics.csv is reproducible.
    """

    def __init__(self, run_dir: t.Union[str, Path]) -> None:
        run_dir = Path(run_dir)

        self.metrics_path = run_dir / "metrics.csv"
        self.timing_path = run_dir / "timing.csv"
        self.last_timestep: t.Optional[int] = None

        with open(self.metrics_path, "wt", newline="") as metrics_file:
            csv.writer(metrics_file).writerow(MetricsRecord.CSV_FIELDS)

        with open(self.timing_path, "wt", newline="") as timing_file:
            csv.writer(timing_file).writerow(("timestep", "wall_time"))

    def append(self, record: MetricsRecord) -> None:
        """
        Append one row

        Raises:
            ValueError: If timestep does not increase
        """

        if self.last_timestep is not None and record.timestep <= self.last_timestep:
            raise ValueError(f"metrics timestep {record.timestep} does not follow {self.last_timestep}")

        self.last_timestep = record.timestep

        with open(self.metrics_path, "at", newline="") as metrics_file:
            csv.writer(metrics_file).writerow([format_number(getattr(record, name)) for name in MetricsRecord.CSV_FIELDS])

        with open(self.timing_path, "at", newline="") as timing_file:
            csv.writer(timing_file).writerow((record.timestep, format(record.wall_time, ".6f")))


def read_metrics(path: t.Union[str, Path]) -> t.Dict[str, t.List[t.Optional[float]]]:
    """
    Columns of a metrics CSV (missing cells as None)

    Raises:
        MissingArtifactError: If the file does not exist
    """

    path = Path(path)

    if not path.is_file():
        raise MissingArtifactError(f"metrics file {path} not found")

    with open(path, "rt", newline="") as metrics_file:
        reader = csv.DictReader(metrics_file)
        columns: t.Dict[str, t.List[t.Optional[float]]] = {name: [] for name in reader.fieldnames or ()}

        for row in reader:
            for name in columns:
                columns[name].append(float(row[name]) if row[name] not in ("", None) else None)

    return columns


def metric_series(
        columns: t.Mapping[str, t.List[t.Optional[float]]],
        metric: str
) -> t.Tuple[t.List[float], t.List[float]]:
    """
    (timesteps, values) of one metric, rows without a value dropped

    Raises:
        MetricError: If metric is not a column
    """

    if metric not in columns or metric == "timestep":
        available = ", ".join(name for name in columns if name != "timestep")
        raise MetricError(f"unknown metric {metric!r}, available columns: {available}")

    pairs = [
        (step, value) for step, value in zip(columns["timestep"], columns[metric])
        if value is not None and step is not None
    ]

    return [step for step, _ in pairs], [value for _, value in pairs]


def ema(values: t.Sequence[float], coefficient: float = 0.98) -> t.List[float]:
    """
    s_0 = x_0, s_t = c * s_{t-1} + (1 - c) * x_t
    """

    if not 0.0 <= coefficient <= 1.0:
        raise ValueError(f"smoothing coefficient must be in [0, 1], got {coefficient}")

    smoothed: t.List[float] = []

    for value in values:
        smoothed.append(value if not smoothed else coefficient * smoothed[-1] + (1.0 - coefficient) * value)

    return smoothed


def mean_std(values: t.Sequence[float]) -> t.Tuple[float, float]:
    """
    Mean and population std
    """

    mean = math.fsum(values) / len(values)
    return mean, math.sqrt(math.fsum((value - mean) ** 2 for value in values) / len(values))


__all__ = (
    "format_number",
    "MetricsWriter",
    "read_metrics",
    "metric_series",
    "ema",
    "mean_std"
)
