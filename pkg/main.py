# coding=utf-8

import json
import logging
import sys
import typing as t
from pathlib import Path
from traceback import format_exc

from errors import SarError
from controller import build_parser, dispatch


SETTINGS_PATH = Path(__file__).resolve().parent / "config.json"
DEFAULT_SETTINGS = {
    "runs_dir": "runs",
    "echo": True,
    "debug": False,
    "plot_format": "svg"
}


def load_settings(path: Path = SETTINGS_PATH) -> t.Dict[str, t.Any]:
    """
    Application settings (defaults for missing keys or a missing file)
    """

    settings = dict(DEFAULT_SETTINGS)

    if path.is_file():
        with open(path, "rt") as config_file:
            settings.update(json.load(config_file))

    return settings


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    # Load config
    settings = load_settings()

    logging.basicConfig(
        level=logging.INFO if settings["echo"] else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )

    # Unknown flags exit with code 2 here
    args = build_parser().parse_args(argv)

    try:
        dispatch(args, settings)

    except Exception as error:
        # Failed

        if settings["debug"]:
            # Full traceback
            print(format_exc(), file=sys.stderr)

        else:
            # Only error message
            print(f"ERROR: {error}", file=sys.stderr)

        return error.exit_code if isinstance(error, SarError) else 1

    except KeyboardInterrupt:
        # Exit signal
        return 130

    return 0


if __name__ == "__main__":
    sys.exit(main())
