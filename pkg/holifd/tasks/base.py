import json
import logging
import sys
from abc import ABC, abstractmethod
from argparse import ArgumentParser
from logging import Logger
from typing import Any, Dict, List, Optional

from holifd.core.diagnostics import initial_state
from holifd.core.grid import GridState
from holifd.core.projector import (
    InitialField,
    PointMasses,
    initial_field_from_spec,
    point_release_ic,
    project_linear,
)
from holifd.exceptions import AcceptanceError, ConfigError
from holifd.hooks.files import FileHook
from holifd.utils.config import RunConfig
from holifd.utils.log import set_logger_config

DEFAULT_OUT_DIR = "out"
METHODS = ("project", "linear", "average", "naive", "point_release")


# abstract class for tasks
class BaseTask(ABC):
    command: str = None

    def __init__(self, init_conf: Dict = None, out_dir: str = None, check: bool = False, argv: List[str] = None):
        self.logger = self._prepare_logger()
        namespace = self._parse_args(sys.argv[1:] if argv is None else argv)
        if init_conf is not None:
            self.conf = init_conf
        else:
            self.conf = self._provide_config(namespace.config)
        self.out_dir = out_dir or namespace.out or self.conf.get("out_dir", DEFAULT_OUT_DIR)
        self.check = check or namespace.check
        self._log_conf()
        self.run_config = RunConfig.from_dict(self.command, self.conf)
        self.files = FileHook(self.out_dir)

    @staticmethod
    def _parse_args(argv: List[str]):
        p = ArgumentParser()
        p.add_argument("--config", "--conf-file", dest="config", required=False, type=str)
        p.add_argument("--out", required=False, type=str)
        p.add_argument("--check", action="store_true")
        return p.parse_known_args(argv)[0]

    def _provide_config(self, conf_file: Optional[str]) -> Dict[str, Any]:
        self.logger.info("Reading configuration from --config task option")
        if not conf_file:
            self.logger.info("No conf file was provided, setting configuration to empty dict.")
            return {}
        self.logger.info(f"Conf file was provided, reading configuration from {conf_file}")
        return self._read_config(conf_file)

    @staticmethod
    def _read_config(conf_file: str) -> Dict[str, Any]:
        try:
            with open(conf_file) as fh:
                config = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"Configuration file {conf_file} does not exist")
        except json.JSONDecodeError as ex:
            raise ConfigError(f"Configuration file {conf_file} is not valid JSON: {ex}")
        if not isinstance(config, dict):
            raise ConfigError(f"Configuration file {conf_file} must hold a JSON object")
        return config

    def _prepare_logger(self) -> Logger:
        set_logger_config()
        return logging.getLogger(self.__class__.__name__)

    def _log_conf(self):
        # log parameters
        self.logger.info("Launching task with configuration parameters:")
        for key, item in self.conf.items():
            self.logger.info("\t Parameter: %-30s with value => %-30s" % (key, item))

    @property
    def header(self) -> Dict[str, Any]:
        return {"command": self.command, **self.run_config.to_dict()}

    def initial_field(self) -> InitialField:
        rc = self.run_config
        return initial_field_from_spec({"quadrature_order": rc.quadrature_order, **rc.initial_field}, rc.grid())

    def initial_state(self, u0: Optional[InitialField] = None) -> GridState:
        """Initial amplitudes by the configured ``method`` (default: holistic projection)"""
        rc = self.run_config
        grid, params = rc.grid(), rc.params()
        u0 = u0 or self.initial_field()
        method = rc.extra.get("method", "project")
        if method not in METHODS:
            raise ConfigError(f"Unknown initial-condition method {method!r}; expected one of {METHODS}")
        self.logger.info(f"Initial amplitudes by method {method!r}")
        if method == "point_release":
            if not isinstance(u0, PointMasses):
                raise ConfigError("Method point_release needs an initial field of kind points")
            return GridState(grid, sum(point_release_ic(pt.k, pt.eta, pt.w, params, grid).u for pt in u0.points))
        if method == "linear":
            return project_linear(u0, params, grid)
        return initial_state({"project": "projection"}.get(method, method), u0, params, grid)

    def require(self, condition: bool, message: str):
        """Gate for --check runs"""
        if not condition:
            raise AcceptanceError(f"Check failed: {message}")
        self.logger.info(f"Check passed: {message}")

    @abstractmethod
    def launch(self):
        """
        Main method of the task.
        :return:
        """
        pass
