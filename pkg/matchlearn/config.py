# matchlearn - Learning Matchgate Hierarchy operations from black-box access
# Copyright (C) 2026 The matchlearn developers
# 
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 3 of the License, or
# (at your option) any later version.
# 
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
# 
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

"""
Configuration files.

Two forms are accepted and mirror the command-line flags: a JSON object with
camelCase keys (see ``config_example.json``) and a plain text file of
``key = value`` lines, where ``#`` starts a comment and list values are
separated by commas or spaces. Keys are normalized to snake_case.
"""

import json
import re

from .errors import ConfigError

_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z0-9])([A-Z])")


def to_snake_case(key: str) -> str:
    return _CAMEL_BOUNDARY.sub(r"_\1", key.strip()).replace("-", "_").lower()


def to_camel_case(key: str) -> str:
    head, *rest = key.split("_")
    return head + "".join(part.capitalize() for part in rest)


def _parse_value(text: str):
    text = text.strip()
    if "," in text or (" " in text and not text.startswith(("[", "{", '"'))):
        return [_parse_value(part) for part in re.split(r"[,\s]+", text) if part]
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_key_value_text(text: str) -> dict:
    settings = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Line {number}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        if not key.strip():
            raise ConfigError(f"Line {number}: empty key")
        settings[to_snake_case(key)] = _parse_value(value)
    return settings


def parse_config_text(text: str) -> dict:
    if text.lstrip().startswith("{"):
        try:
            config = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Malformed JSON config: {e}") from e
        if not isinstance(config, dict):
            raise ConfigError("JSON config must be an object")
        return {to_snake_case(key): value for key, value in config.items()}
    return parse_key_value_text(text)


def read_config_file(path: str) -> dict:
    try:
        with open(path, "r") as config_file:
            config_text = config_file.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    return parse_config_text(config_text)


def merge_settings(defaults: dict, *layers: dict, strict: bool = False) -> dict:
    """
    Later layers win; None values in a layer leave the earlier value in place.
    With ``strict`` every key of a layer must be one of the defaults.
    """
    merged = dict(defaults)
    for layer in layers:
        unknown = sorted(set(layer) - set(defaults)) if strict else []
        if unknown:
            raise ConfigError(f"Unknown setting{'s' if len(unknown) > 1 else ''}: {', '.join(unknown)}")
        merged.update({key: value for key, value in layer.items() if value is not None})
    return merged


def _has_type(value, expected: type) -> bool:
    if expected is bool or isinstance(value, bool):
        return expected is bool and isinstance(value, bool)
    if expected is float:
        return isinstance(value, (int, float))
    return isinstance(value, expected)


def check_setting_types(settings: dict, defaults: dict) -> None:
    """Each setting must have the type of its default; list defaults also take a single item."""
    for key, default in defaults.items():
        value = settings.get(key)
        if default is None or value is None:
            continue
        if isinstance(default, list):
            expected, items = type(default[0]), value if isinstance(value, list) else [value]
        else:
            expected, items = type(default), [value]
        for item in items:
            if not _has_type(item, expected):
                raise ConfigError(f"Setting {key!r} expects {expected.__name__}, got {item!r}")
