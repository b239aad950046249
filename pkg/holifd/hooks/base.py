from pathlib import Path
from typing import Union

from holifd.utils.log import LoggingMixin


class BaseHook(LoggingMixin):
    """
    Base class for hooks writing run artifacts into an output directory.
    :param out_dir: directory the artifacts are written to; created when missing
    """

    def __init__(self, out_dir: Union[str, Path]):
        super(BaseHook, self).__init__()
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        """
        Resolve an artifact name inside the output directory.
        :param name: file name
        :return: full path
        """
        return self.out_dir / name
