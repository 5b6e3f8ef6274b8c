"""Python bindings for the steersman sensor-steering toolkit."""

from ._core import (
    ConfigError,
    Env,
    FormatError,
    InvalidArgument,
    Library,
    SingularityError,
    SteersmanError,
    build_library,
    evaluate,
    load_config,
    parse_config,
    read_metrics,
    train,
)

__all__ = [
    "ConfigError",
    "Env",
    "FormatError",
    "InvalidArgument",
    "Library",
    "SingularityError",
    "SteersmanError",
    "build_library",
    "evaluate",
    "load_config",
    "parse_config",
    "read_metrics",
    "train",
]
