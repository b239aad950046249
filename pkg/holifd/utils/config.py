import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from holifd.core.grid import Grid
from holifd.core.model import IntegrationConfig
from holifd.core.subgrid import ModelParams
from holifd.exceptions import ConfigError

COMMANDS = ("derive", "project", "simulate", "moments", "compare", "reconstruct")


def get_threads() -> int:
    raw = os.environ.get("HOLIFD_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"HOLIFD_THREADS must be an integer, got {raw!r}")
    return max(1, threads)


def _number(conf: Mapping, key: str, default, kind=float):
    value = conf.get(key, default)
    if value is None:
        return None
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"Parameter {key!r} must be a {kind.__name__}, got {value!r}")


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters shared by every command; unknown keys are kept in ``extra``"""

    command: str
    m: int = 32
    h: float = 1.0
    origin: float = 0.0
    a: float = 0.0
    gamma: float = 1.0
    dt: Optional[float] = None
    T: float = 2.0
    order: int = 2
    k: Optional[int] = None
    samples: int = 32
    fine_factor: int = 64
    quadrature_order: int = 16
    window: Optional[Tuple[float, float]] = None
    sweep: Tuple[int, ...] = (16, 32, 64)
    seed: int = 0
    allow_unstable: bool = False
    initial_field: Dict[str, Any] = field(default_factory=dict)
    output: Dict[str, str] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, command: str, conf: Mapping) -> "RunConfig":
        if command not in COMMANDS:
            raise ConfigError(f"Unknown command {command!r}; expected one of {COMMANDS}")
        known = {f for f in cls.__dataclass_fields__ if f not in ("command", "extra")}
        m = _number(conf, "m", 32, int)
        h = _number(conf, "h", 1.0)
        T = _number(conf, "T", 2.0)
        window = conf.get("window")
        if window is not None:
            if len(window) != 2 or float(window[0]) >= float(window[1]):
                raise ConfigError(f"window must be [start, stop] with start < stop, got {window}")
            window = (float(window[0]), float(window[1]))
        sweep = tuple(int(s) for s in conf.get("sweep", (16, 32, 64)))
        config = cls(
            command=command,
            m=m,
            h=h,
            origin=_number(conf, "origin", 0.0),
            a=_number(conf, "a", 0.0),
            gamma=_number(conf, "gamma", 1.0),
            dt=_number(conf, "dt", None),
            T=T,
            order=_number(conf, "order", 2, int),
            k=_number(conf, "k", None, int),
            samples=_number(conf, "samples", 32, int),
            fine_factor=_number(conf, "fine_factor", 64, int),
            quadrature_order=_number(conf, "quadrature_order", 16, int),
            window=window,
            sweep=sweep,
            seed=_number(conf, "seed", 0, int),
            allow_unstable=bool(conf.get("allow_unstable", False)),
            initial_field=dict(conf.get("initial_field", {})),
            output=dict(conf.get("output", {})),
            extra={key: value for key, value in conf.items() if key not in known},
        )
        config.validate()
        return config

    def validate(self):
        self.grid()
        self.params()
        if self.T < 0:
            raise ConfigError(f"T must be non-negative, got {self.T}")
        if self.samples < 1:
            raise ConfigError(f"samples must be positive, got {self.samples}")
        if self.quadrature_order < 1:
            raise ConfigError(f"quadrature_order must be positive, got {self.quadrature_order}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.sweep or min(self.sweep) < 4:
            raise ConfigError(f"sweep must list grid sizes of at least 4, got {list(self.sweep)}")
        needs_field = self.command in ("project", "simulate", "moments", "compare") or (
            self.command == "reconstruct" and "etas" not in self.extra
        )
        if needs_field and not self.initial_field:
            raise ConfigError(f"Command {self.command!r} needs an initial_field")

    def grid(self) -> Grid:
        return Grid(m=self.m, h=self.h, origin=self.origin)

    def params(self) -> ModelParams:
        return ModelParams(a=self.a, gamma=self.gamma, h=self.h)

    @property
    def centre_element(self) -> int:
        return self.m // 2 if self.k is None else self.k

    @property
    def step(self) -> float:
        return self.h ** 2 / 8 if self.dt is None else self.dt

    @property
    def fit_window(self) -> Tuple[float, float]:
        return self.window or (0.2, self.T)

    def integration(self) -> IntegrationConfig:
        return IntegrationConfig(dt=self.step, T=self.T, allow_unstable=self.allow_unstable)

    def output_name(self, key: str, default: str) -> str:
        return self.output.get(key, default)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["sweep"] = list(self.sweep)
        data["window"] = list(self.window) if self.window else None
        return data

