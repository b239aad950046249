"""
Command-line driver: ``holifd <command> --config <path> [--out <dir>] [--check]``.

Exit codes: 0 on success, 1 when a --check gate or a computation fails, 2 for an
invalid configuration or usage.
"""
import logging
import sys
from argparse import ArgumentParser
from typing import List, Optional

from holifd.exceptions import AcceptanceError, ConfigError, HolifdError
from holifd.tasks.compare import CompareTask
from holifd.tasks.derive import DeriveTask
from holifd.tasks.moments import MomentsTask
from holifd.tasks.project import ProjectTask
from holifd.tasks.reconstruct import ReconstructTask
from holifd.tasks.simulate import SimulateTask
from holifd.utils.log import set_logger_config

TASKS = {
    "derive": DeriveTask,
    "project": ProjectTask,
    "simulate": SimulateTask,
    "moments": MomentsTask,
    "compare": CompareTask,
    "reconstruct": ReconstructTask,
}

log = logging.getLogger(__name__)


def _parser() -> ArgumentParser:
    p = ArgumentParser(prog="holifd", description="Holistic finite differences for Burgers' equation")
    p.add_argument("command", choices=sorted(TASKS))
    p.add_argument("--config", "--conf-file", dest="config", required=True, type=str)
    p.add_argument("--out", required=False, type=str)
    p.add_argument("--check", action="store_true")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    set_logger_config()
    argv = sys.argv[1:] if argv is None else argv
    args = _parser().parse_args(argv)
    try:
        task = TASKS[args.command](argv=argv)
        task.launch()
    except ConfigError as ex:
        log.error(f"Invalid configuration: {ex}")
        return 2
    except AcceptanceError as ex:
        log.error(str(ex))
        return 1
    except HolifdError as ex:
        log.error(f"{type(ex).__name__}: {ex}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
