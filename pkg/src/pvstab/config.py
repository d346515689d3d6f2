"""Flat key = value run configuration with optional [section] headers.

Keys before the first header belong to the top level (the background state and
``seed``). Values are decimal numbers or bare words; ``#`` starts a comment.
Every error carries the offending line number.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from pvstab.background import BackgroundState

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_WORD = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_SECTION = re.compile(r"^\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]$")

STATE_KEYS = ("v2", "v3", "H2", "H3", "Hv2", "Hv3", "E1", "eps")
SECTIONS = ("check", "scan", "certify", "solve", "sweep")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line


@dataclass
class Entry:
    value: object
    line: int


@dataclass
class RawConfig:
    top: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)
    path: str | None = None

    def section(self, name: str) -> "Section":
        return Section(name, self.sections.get(name, {}), self.path)


@dataclass
class Section:
    name: str
    entries: dict
    path: str | None = None
    used: set = field(default_factory=set)

    def _get(self, key):
        self.used.add(key)
        return self.entries.get(key)

    def number(self, key: str, default=None, *, minimum=None, positive=False, required=False) -> float:
        e = self._get(key)
        if e is None:
            if required:
                raise ConfigError(f"missing required key '{key}' in [{self.name}]", path=self.path)
            return default
        if not isinstance(e.value, float):
            raise ConfigError(f"'{key}' must be a number, got '{e.value}'", e.line, self.path)
        v = e.value
        if positive and not v > 0:
            raise ConfigError(f"'{key}' must be > 0, got {v:g}", e.line, self.path)
        if minimum is not None and v < minimum:
            raise ConfigError(f"'{key}' must be >= {minimum:g}, got {v:g}", e.line, self.path)
        return v

    def integer(self, key: str, default=None, *, minimum=None, required=False) -> int:
        v = self.number(key, default, minimum=minimum, required=required)
        if v is None:
            return None
        if float(v) != int(v):
            e = self.entries[key]
            raise ConfigError(f"'{key}' must be an integer, got {v:g}", e.line, self.path)
        return int(v)

    def word(self, key: str, default=None, choices=None) -> str:
        e = self._get(key)
        if e is None:
            return default
        if not isinstance(e.value, str):
            raise ConfigError(f"'{key}' must be a word, got {e.value:g}", e.line, self.path)
        if choices is not None and e.value not in choices:
            raise ConfigError(f"'{key}' must be one of {', '.join(choices)}, got '{e.value}'", e.line, self.path)
        return e.value

    def check_unknown(self, allowed) -> None:
        for key, e in self.entries.items():
            if key not in allowed:
                raise ConfigError(f"unknown key '{key}' in [{self.name}]", e.line, self.path)


def parse_text(text: str, path: str | None = None) -> RawConfig:
    cfg = RawConfig(path=path)
    current = cfg.top
    current_name = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current_name = m.group(1)
            if current_name not in SECTIONS:
                raise ConfigError(f"unknown section [{current_name}]", lineno, path)
            if current_name in cfg.sections:
                raise ConfigError(f"duplicate section [{current_name}]", lineno, path)
            current = cfg.sections[current_name] = {}
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", lineno, path)
        key, value = (s.strip() for s in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"invalid key '{key}'", lineno, path)
        if key in current:
            raise ConfigError(f"duplicate key '{key}' (first set on line {current[key].line})", lineno, path)
        if _NUMBER.match(value):
            parsed = float(value)
            if not math.isfinite(parsed):
                raise ConfigError(f"'{key}' is not finite", lineno, path)
        elif _WORD.match(value):
            parsed = value
        else:
            raise ConfigError(f"'{key}': expected a decimal number or a word, got '{value}'", lineno, path)
        current[key] = Entry(parsed, lineno)
    return cfg


def load(path: str) -> RawConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=path) from None
    return parse_text(text, path)


def state_from(cfg: RawConfig) -> BackgroundState:
    top = Section("top level", cfg.top, cfg.path)
    values = {}
    for key in STATE_KEYS:
        values[key] = top.number(key, 0.0, required=(key == "eps"))
    e = cfg.top["eps"]
    if not values["eps"] > 0:
        raise ConfigError(f"'eps' must be > 0, got {values['eps']:g}", e.line, cfg.path)
    return BackgroundState(**values)


def seed_from(cfg: RawConfig) -> int:
    return Section("top level", cfg.top, cfg.path).integer("seed", 0, minimum=0)


def check_top(cfg: RawConfig) -> None:
    Section("top level", cfg.top, cfg.path).check_unknown(set(STATE_KEYS) | {"seed"})
