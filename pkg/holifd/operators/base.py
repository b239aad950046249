from abc import ABC, abstractmethod
from time import perf_counter

from holifd.utils.log import LoggingMixin


class BaseOperator(LoggingMixin, ABC):
    """A unit of work inside a task; ``run`` wraps ``execute`` with timing logs"""

    def run(self):
        name = type(self).__name__
        self.log.info(f"{name} started")
        start = perf_counter()
        result = self.execute()
        self.log.info(f"{name} finished in {perf_counter() - start:.2f}s")
        return result

    @abstractmethod
    def execute(self):
        pass
