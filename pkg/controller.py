# coding=utf-8

import argparse
import csv
import json
import logging
import os
import typing as t
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "sar"
import matplotlib.pyplot as plt  # noqa: E402
from tabulate import tabulate  # noqa: E402

from errors import ConfigError, MissingArtifactError  # noqa: E402
from harness import analyze_run, ema, evaluate, format_number, metric_series, mean_std, read_metrics, read_run_config, restore, train  # noqa: E402
from views import CompareRow, EvalSummary, RunConfig  # noqa: E402


logger = logging.getLogger(__name__)

EVAL_SCHEMA_VERSION = 1
COMPARE_SCHEMA_VERSION = 1
MIN_SEEDS = 3

# Flag -> RunConfig field
_TRAIN_OVERRIDES = {
    "algo": "algorithm",
    "env": "env_id",
    "seed": "seed",
    "total_timesteps": "total_timesteps",
    "lambda_actor": "lambda_actor",
    "lambda_gen": "lambda_gen",
    "kappa": "kappa",
    "warmup": "warmup_timesteps",
    "augmentation": "augmentation",
    "num_train_styles": "num_train_styles",
    "num_envs": "num_envs"
}


def runs_root(settings: t.Mapping[str, t.Any]) -> Path:
    """
    Default output root (SAR_RUNS_DIR wins over config.json)
    """

    return Path(os.environ.get("SAR_RUNS_DIR") or settings.get("runs_dir", "runs"))


def _parse_assignment(text: str) -> t.Tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")

    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def _write_json(path: Path, document: t.Mapping[str, t.Any]) -> None:
    with open(path, "wt") as json_file:
        json.dump(document, json_file, indent=2, sort_keys=True)
        json_file.write("\n")


def train_settings(args: argparse.Namespace) -> t.Dict[str, t.Any]:
    """
    Raw run settings: config file, then flags, then --set assignments

    Raises:
        MissingArtifactError: If --config names no file
        ConfigError: If the config file is not valid JSON
    """

    raw: t.Dict[str, t.Any] = {}

    if args.config is not None:
        if not Path(args.config).is_file():
            raise MissingArtifactError(f"config file {args.config} not found")

        with open(args.config, "rt") as config_file:
            try:
                raw.update(json.load(config_file))

            except json.JSONDecodeError as error:
                raise ConfigError(f"Could not parse {args.config}: {error}")

    for flag, name in _TRAIN_OVERRIDES.items():
        value = getattr(args, flag, None)

        if value is not None:
            raw[name] = value

    if args.no_style_mixing:
        raw["style_mixing"] = False

    for key, value in args.set or ():
        raw[key] = value

    return raw


def cmd_train(args: argparse.Namespace, settings: t.Mapping[str, t.Any]) -> Path:
    """
    Train one configuration and print its run directory
    """

    raw = train_settings(args)
    cfg = t.cast(RunConfig, RunConfig.from_dict(raw))

    run_dir = train(cfg, runs_root(settings), args.out, raw)
    print(run_dir)

    return run_dir


def read_eval(run_dir: t.Union[str, Path]) -> t.Dict[str, EvalSummary]:
    """
    Pool summaries stored in eval.json

    Raises:
        MissingArtifactError: If the run was never evaluated
    """

    path = Path(run_dir) / "eval.json"

    if not path.is_file():
        raise MissingArtifactError(f"{path} not found (run eval first)")

    with open(path, "rt") as eval_file:
        document = json.load(eval_file)

    return {
        pool: t.cast(EvalSummary, EvalSummary.from_dict(summary))
        for pool, summary in document.get("pools", {}).items()
    }


def cmd_eval(args: argparse.Namespace, settings: t.Mapping[str, t.Any]) -> t.List[EvalSummary]:
    """
    Evaluate the latest (or given) checkpoint and merge results into eval.json
    """

    run_dir = Path(args.run_dir)
    cfg, model, _, header = restore(run_dir, args.checkpoint)
    pools = ["train", "test"] if args.pool == "both" else [args.pool]

    summaries = [evaluate(model, cfg, pool, args.episodes, args.seed) for pool in pools]

    try:
        stored = read_eval(run_dir)

    except MissingArtifactError:
        stored = {}

    stored.update({summary.pool: summary for summary in summaries})
    _write_json(run_dir / "eval.json", {
        "schema_version": EVAL_SCHEMA_VERSION,
        "step": header["step"],
        "pools": {pool: stored[pool].to_dict() for pool in sorted(stored)}
    })
    logger.info(f"Successfully wrote {run_dir / 'eval.json'} (step {header['step']})")

    print(EvalSummary.print(summaries))
    return summaries


def rank_rows(cells: t.Mapping[t.Tuple[str, str], t.Sequence[float]]) -> t.List[CompareRow]:
    """
    Aggregate seed means per (variant, pool) and rank variants within each pool

    Higher mean ranks first; ties go to the lower std, then to the variant name.
    """

    rows = []

    for pool in ("train", "test"):
        stats = [
            (variant, *mean_std(values), len(values))
            for (variant, cell_pool), values in cells.items() if cell_pool == pool
        ]
        stats.sort(key=lambda item: (-item[1], item[2], item[0]))

        for rank, (variant, mean, std, seeds) in enumerate(stats, start=1):
            rows.append(CompareRow(variant=variant, pool=pool, mean=mean, std=std, seeds=seeds, rank=rank))

    return rows


def compare_runs(run_dirs: t.Sequence[t.Union[str, Path]], min_seeds: int = MIN_SEEDS) -> t.Tuple[str, t.List[CompareRow]]:
    """
    Comparison report over evaluated runs

    Returns:
        t.Tuple[str, t.List[CompareRow]]: Environment id and ranked rows

    Raises:
        ConfigError: If fewer than two runs are given, environments differ or a cell has too few seeds
        MissingArtifactError: If a run has no eval.json
    """

    if len(run_dirs) < 2:
        raise ConfigError(f"compare needs at least 2 run directories, got {len(run_dirs)}")

    env_ids = set()
    cells: t.Dict[t.Tuple[str, str], t.List[float]] = defaultdict(list)

    for run_dir in run_dirs:
        cfg = read_run_config(run_dir)
        env_ids.add(cfg.env_id)

        for pool, summary in read_eval(run_dir).items():
            cells[(cfg.variant, pool)].append(summary.mean)

    if len(env_ids) > 1:
        raise ConfigError(f"refusing to compare runs of different environments: {', '.join(sorted(env_ids))}")

    thin = {f"{variant}/{pool}": f"{len(values)} seed(s)" for (variant, pool), values in cells.items() if len(values) < min_seeds}

    if thin:
        raise ConfigError(f"every compared cell needs at least {min_seeds} seeds", thin)

    return env_ids.pop(), rank_rows(cells)


def cmd_compare(args: argparse.Namespace, settings: t.Mapping[str, t.Any]) -> t.List[CompareRow]:
    """
    Print ranked comparison table and write compare.json
    """

    env_id, rows = compare_runs(args.run_dirs, args.min_seeds)
    out = Path(args.out) if args.out is not None else runs_root(settings) / "compare.json"
    out.parent.mkdir(parents=True, exist_ok=True)

    _write_json(out, {
        "schema_version": COMPARE_SCHEMA_VERSION,
        "schema": CompareRow.schema(),
        "env_id": env_id,
        "rows": [row.to_dict() for row in rows]
    })
    logger.info(f"Successfully compared {len(args.run_dirs)} runs into {out}")

    print(CompareRow.print(rows))
    return rows


def cmd_analyze(args: argparse.Namespace, settings: t.Mapping[str, t.Any]) -> t.Dict[str, t.Any]:
    """
    Embedding style-sensitivity of a trained encoder
    """

    result = analyze_run(args.run_dir, args.states, args.styles, args.seed)
    print(tabulate(
        [(name, result[name]) for name in ("cross_style_dist", "cross_state_dist", "index")],
        headers=("measure", "value"),
        tablefmt="grid"
    ))

    return result


def plot_runs(
        run_dirs: t.Sequence[t.Union[str, Path]],
        metric: str,
        smooth: float,
        out: Path
) -> t.Tuple[Path, Path]:
    """
    Learning curves of one metric (EMA-smoothed) as a vector image, plus the smoothed series as CSV

    Raises:
        MetricError: If metric is not a metrics.csv column
    """

    series = []

    for run_dir in run_dirs:
        steps, values = metric_series(read_metrics(Path(run_dir) / "metrics.csv"), metric)
        series.append((Path(run_dir).name, steps, values, ema(values, smooth)))

    figure, axes = plt.subplots(figsize=(7, 4.5))

    for label, steps, _, smoothed in series:
        axes.plot(steps, smoothed, label=label)

    axes.set_xlabel("timestep")
    axes.set_ylabel(metric)
    axes.set_title(f"{metric} (EMA {smooth})")
    axes.legend(fontsize="small")

    out.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(out, metadata={"Date": None} if out.suffix == ".svg" else None)
    plt.close(figure)
    logger.info(f"Successfully plotted {metric} of {len(series)} runs to {out}")

    table = out.with_suffix(".csv")

    with open(table, "wt", newline="") as table_file:
        writer = csv.writer(table_file)
        writer.writerow(("run", "timestep", metric, "smoothed"))

        for label, steps, values, smoothed in series:
            for row in zip(steps, values, smoothed):
                writer.writerow((label, *map(format_number, row)))

    return out, table


def cmd_plot(args: argparse.Namespace, settings: t.Mapping[str, t.Any]) -> t.Tuple[Path, Path]:
    """
    Plot learning curves of run directories
    """

    fmt = settings.get("plot_format", "svg")
    out = Path(args.out) if args.out is not None else runs_root(settings) / f"plot_{args.metric}.{fmt}"

    image, table = plot_runs(args.run_dirs, args.metric, args.smooth, out)
    print(image)
    print(table)

    return image, table


# Existing commands
_actions = {
    "train": ("Train one configuration into a run directory", cmd_train),
    "eval": ("Evaluate a run on a style pool and write eval.json", cmd_eval),
    "compare": ("Rank evaluated runs by variant and pool", cmd_compare),
    "analyze": ("Measure style sensitivity of a trained encoder", cmd_analyze),
    "plot": ("Plot EMA-smoothed learning curves", cmd_plot)
}


def build_parser() -> argparse.ArgumentParser:
    """
    Command-line parser with one subcommand per action
    """

    parser = argparse.ArgumentParser(prog="main.py", description="Style-agnostic actor-critic training")
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)
    parsers = {name: commands.add_parser(name, help=text, description=text) for name, (text, _) in _actions.items()}

    train_parser = parsers["train"]
    train_parser.add_argument("--config", type=Path, help="JSON file with run settings")
    train_parser.add_argument("--algo", choices=("ppo", "sac"), help="base algorithm")
    train_parser.add_argument("--env", help="environment id (gridworld-v0, pointmass-v0)")
    train_parser.add_argument("--seed", type=int, help="global seed")
    train_parser.add_argument("--total-timesteps", type=int, help="environment steps")
    train_parser.add_argument("--lambda", dest="lambda_actor", type=float, help="actor divergence weight")
    train_parser.add_argument("--lambda-gen", type=float, help="generator weight (defaults to --lambda)")
    train_parser.add_argument("--kappa", type=float, help="value similarity weight")
    train_parser.add_argument("--warmup", type=int, help="timestep at which adversarial terms start")
    train_parser.add_argument("--augmentation", choices=("none", "trans", "color"), help="minibatch augmentation")
    train_parser.add_argument("--no-style-mixing", action="store_true", help="disable in-batch style mixing")
    train_parser.add_argument("--num-train-styles", type=int, help="styles drawn from the train pool")
    train_parser.add_argument("--num-envs", type=int, help="parallel environment instances")
    train_parser.add_argument("--set", type=_parse_assignment, action="append", metavar="KEY=VALUE", help="any run setting")
    train_parser.add_argument("--out", type=Path, help="explicit run directory")

    eval_parser = parsers["eval"]
    eval_parser.add_argument("run_dir", type=Path, help="run directory")
    eval_parser.add_argument("--pool", choices=("train", "test", "both"), default="test", help="style pool")
    eval_parser.add_argument("--episodes", type=int, default=10, help="episodes per pool")
    eval_parser.add_argument("--seed", type=int, help="evaluation seed (defaults to the run seed)")
    eval_parser.add_argument("--checkpoint", type=Path, help="checkpoint file (defaults to the latest)")

    compare_parser = parsers["compare"]
    compare_parser.add_argument("run_dirs", nargs="+", type=Path, help="evaluated run directories")
    compare_parser.add_argument("--min-seeds", type=int, default=MIN_SEEDS, help="seeds required per cell")
    compare_parser.add_argument("--out", type=Path, help="report path (defaults to <runs_dir>/compare.json)")

    analyze_parser = parsers["analyze"]
    analyze_parser.add_argument("run_dir", type=Path, help="run directory")
    analyze_parser.add_argument("--states", type=int, default=16, help="initial states compared")
    analyze_parser.add_argument("--styles", type=int, default=8, help="test styles per state")
    analyze_parser.add_argument("--seed", type=int, help="analysis seed (defaults to the run seed)")

    plot_parser = parsers["plot"]
    plot_parser.add_argument("run_dirs", nargs="+", type=Path, help="run directories")
    plot_parser.add_argument("--metric", default="episode_return", help="metrics.csv column")
    plot_parser.add_argument("--smooth", type=float, default=0.98, help="EMA coefficient in [0, 1]")
    plot_parser.add_argument("--out", type=Path, help="image path (defaults to <runs_dir>/plot_<metric>.<format>)")

    return parser


def dispatch(args: argparse.Namespace, settings: t.Mapping[str, t.Any]) -> t.Any:
    """
    Run the action selected on the command line
    """

    func = _actions[args.command][1]
    return func(args, settings)


__all__ = (
    "runs_root",
    "train_settings",
    "read_eval",
    "rank_rows",
    "compare_runs",
    "plot_runs",
    "build_parser",
    "dispatch",
    "cmd_train",
    "cmd_eval",
    "cmd_compare",
    "cmd_analyze",
    "cmd_plot"
)
