import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import pandas as pd

from holifd.hooks.base import BaseHook

HEADER_PREFIX = "# config: "


def config_header(config: Mapping[str, Any]) -> str:
    return HEADER_PREFIX + json.dumps(config, sort_keys=True, default=str) + "\n"


class FileHook(BaseHook):
    """
    Write CSV tables and JSON documents. Every CSV starts with one comment line holding
    the full run configuration, so outputs are self-describing and identical for
    identical configurations.
    """

    def write_frame(self, frame: pd.DataFrame, name: str, config: Optional[Mapping[str, Any]] = None) -> Path:
        """
        Write a DataFrame as CSV.
        :param frame: table to write
        :param name: file name inside the output directory
        :param config: configuration embedded in the header comment
        :return: path written
        """
        path = self.path(name)
        with open(path, "w", newline="") as fh:
            fh.write(config_header(config or {}))
            frame.to_csv(fh, index=False, float_format="%.17g")
        self.log.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_json(self, data: Dict[str, Any], name: str) -> Path:
        path = self.path(name)
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        self.log.info(f"Wrote {path}")
        return path

    @staticmethod
    def read_frame(path) -> pd.DataFrame:
        """Read a CSV written by ``write_frame``, skipping the config header"""
        return pd.read_csv(path, comment="#")

    @staticmethod
    def read_config(path) -> Dict[str, Any]:
        with open(path) as fh:
            first = fh.readline()
        if not first.startswith(HEADER_PREFIX):
            return {}
        return json.loads(first[len(HEADER_PREFIX):])
