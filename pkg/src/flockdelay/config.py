from __future__ import annotations

import collections
import dataclasses
import os
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, ClassVar, Iterator, Mapping, MutableMapping, cast

import platformdirs
import rich.theme
import tomlkit

from flockdelay import termui
from flockdelay.exceptions import ConfigError, NoConfigError

ui = termui.UI()

_NOT_SET = object()


def flatten(table: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    """Turn nested TOML tables into dotted keys, ``[sweep] workers`` becomes ``sweep.workers``."""
    result: dict[str, Any] = {}
    for key, value in table.items():
        if isinstance(value, Mapping):
            result.update(flatten(value, f"{prefix}{key}."))
        else:
            result[f"{prefix}{key}"] = value
    return result


def nest(flat: Mapping[str, Any]) -> dict[str, Any]:
    result: dict[str, Any] = {}
    for key, value in flat.items():
        *tables, last = key.split(".")
        target = result
        for table in tables:
            target = target.setdefault(table, {})
        target[last] = value
    return result


def positive_int(val: Any) -> int:
    try:
        result = int(val)
    except (TypeError, ValueError):
        raise ConfigError(f"Expect a positive integer, got {val!r}") from None
    if result < 1:
        raise ConfigError(f"Expect a positive integer, got {val!r}")
    return result


@dataclasses.dataclass
class ConfigItem:
    """A configuration key declaration.

    Args:
        description: shown by ``flockdelay config -v``
        default: the value used when neither the file nor the environment sets one;
            items without a default are hidden from the listing
        env_var: an environment variable that takes precedence over the file
        coerce: turns a raw file, environment or command line value into the stored type
    """

    description: str
    default: Any = _NOT_SET
    env_var: str | None = None
    coerce: Callable[[Any], Any] = str

    def should_show(self) -> bool:
        return self.default is not _NOT_SET


class Config(MutableMapping[str, Any]):
    """Layered configuration: environment variables, then the TOML file, then defaults.

    Only declared keys can be read or written; plugins declare theirs through
    ``Core.add_config``. Writes go to the file and are saved immediately.
    """

    _config_map: ClassVar[dict[str, ConfigItem]] = {
        "output_root": ConfigItem(
            "The directory under which run artifacts are written",
            "flockdelay-runs",
            env_var="FLOCKDELAY_OUTPUT_ROOT",
        ),
        "log_dir": ConfigItem(
            "Where the integration log of a failed command is kept",
            platformdirs.user_log_dir("flockdelay"),
            env_var="FLOCKDELAY_LOG_DIR",
        ),
        "sweep.workers": ConfigItem(
            "The number of sweep grid points run concurrently",
            1,
            env_var="FLOCKDELAY_WORKERS",
            coerce=positive_int,
        ),
        "record_stride": ConfigItem(
            "Emit every k-th integrator step to the trajectory outputs",
            1,
            env_var="FLOCKDELAY_RECORD_STRIDE",
            coerce=positive_int,
        ),
        "quadrature.nodes": ConfigItem(
            "Default Gauss-Legendre node count for distributed delay kernels",
            8,
            coerce=positive_int,
        ),
    }
    _config_map.update(
        (f"theme.{name}", ConfigItem(f"Theme color for {name}", default=color))
        for name, color in termui.DEFAULT_THEME.items()
    )

    @classmethod
    def get_defaults(cls) -> dict[str, Any]:
        return {key: item.default for key, item in cls._config_map.items() if item.should_show()}

    @classmethod
    def add_config(cls, name: str, item: ConfigItem) -> None:
        cls._config_map[name] = item

    @classmethod
    def default_path(cls) -> Path:
        return platformdirs.user_config_path("flockdelay") / "config.toml"

    def __init__(self, config_file: Path) -> None:
        self.config_file = config_file.resolve()
        self._file_data: dict[str, Any] = {}
        if self.config_file.is_file():
            document = tomlkit.parse(self.config_file.read_text("utf-8"))
            self._file_data = flatten(document.unwrap())
        self._data = collections.ChainMap(
            cast(MutableMapping[str, Any], self.env_map),
            self._file_data,
            self.get_defaults(),
        )

    @cached_property
    def env_map(self) -> Mapping[str, Any]:
        return EnvMap(self._config_map)

    @property
    def self_data(self) -> dict[str, Any]:
        """The values set in the config file"""
        return dict(self._file_data)

    def load_theme(self) -> rich.theme.Theme:
        colors = {key.partition(".")[2]: value for key, value in self.items() if key.startswith("theme.")}
        return rich.theme.Theme(colors)

    def is_overridden(self, key: str) -> bool:
        """Whether the file or the environment sets ``key``"""
        return key in self._file_data or key in self.env_map

    def _item(self, key: str) -> ConfigItem:
        try:
            return self._config_map[key]
        except KeyError:
            raise NoConfigError(key) from None

    def _save(self) -> None:
        self.config_file.parent.mkdir(parents=True, exist_ok=True)
        with self.config_file.open("w", encoding="utf-8") as fp:
            tomlkit.dump(nest(self._file_data), fp)

    def _warn_shadowed(self, item: ConfigItem) -> None:
        if item.env_var is not None and item.env_var in os.environ:
            ui.warn(f"the config is shadowed by env var '{item.env_var}', the new value has no effect.")

    def __getitem__(self, key: str) -> Any:
        item = self._item(key)
        if key not in self._data:
            raise NoConfigError(key)
        return item.coerce(self._data[key])

    def __setitem__(self, key: str, value: Any) -> None:
        item = self._item(key)
        self._file_data[key] = item.coerce(value)
        self._warn_shadowed(item)
        self._save()

    def __delitem__(self, key: str) -> None:
        item = self._item(key)
        self._file_data.pop(key, None)
        self._warn_shadowed(item)
        self._save()

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self) -> Iterator[str]:
        return iter(set(self._data))


class EnvMap(Mapping[str, Any]):
    """Declared keys whose environment variable is set, with coerced values."""

    def __init__(self, config_items: Mapping[str, ConfigItem]) -> None:
        self._config_map = config_items

    def __repr__(self) -> str:
        return repr(dict(self))

    def __getitem__(self, key: str) -> Any:
        item = self._config_map.get(key)
        if item is None or item.env_var is None or item.env_var not in os.environ:
            raise KeyError(key)
        return item.coerce(os.environ[item.env_var])

    def __iter__(self) -> Iterator[str]:
        return (key for key, item in self._config_map.items() if item.env_var and item.env_var in os.environ)

    def __len__(self) -> int:
        return sum(1 for _ in self)
