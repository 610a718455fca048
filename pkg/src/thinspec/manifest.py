"""Line-based scenario manifests.

::

    # comment
    [scenario]
    name = figure1          # a built-in name starts from that built-in
    t_max = 1.0

    [scenario]
    name = cold-squeeze
    base = figure4          # or start from any built-in explicitly
    zetas = 0.5, 0.5j

A section without a built-in name or ``base`` must set ``model``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .scenarios import BUILTINS, Scenario, ScenarioError

SHIPPED = ("paper-figures.manifest",)


class ManifestError(ValueError):
    def __init__(self, message: str, path: str = "", line: int = 0):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if line else (f"{path}: " if path else "")
        super().__init__(where + message)


def _float(text: str) -> float:
    return float(text)


def _int(text: str) -> int:
    return int(text)


def _complex(text: str) -> complex:
    value = complex(text.replace(" ", ""))
    return value.real if value.imag == 0 else value


def _tuple(conv):
    def parse(text: str) -> tuple:
        parts = [p.strip() for p in text.split(",")]
        return tuple(conv(p) for p in parts if p)

    return parse


def _words(text: str) -> tuple:
    return tuple(p.strip() for p in text.split(",") if p.strip())


PARSERS = {
    "model": str,
    "alpha": _complex,
    "zetas": _tuple(_complex),
    "temperatures_nK": _tuple(_float),
    "occupations": _words,
    "N": _float,
    "a_s": _float,
    "a_ho": _float,
    "rho": _float,
    "omega_tr": _float,
    "deltas": _tuple(_float),
    "coupling": _float,
    "m": _int,
    "q_times": _tuple(_float),
    "grid_points": _int,
    "t_max": _float,
    "n_points": _int,
    "tol": _float,
    "output": str,
}
assert set(PARSERS) | {"name"} == {f.name for f in fields(Scenario)}

KEYS = ("name", "base") + tuple(PARSERS)


@dataclass
class _Section:
    line: int
    values: dict
    lines: dict


def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def parse_manifest(text: str, path: str = "<manifest>") -> list[Scenario]:
    sections: list[_Section] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            if line != "[scenario]":
                raise ManifestError(f"unknown section header {line!r}; expected [scenario]", path, lineno)
            sections.append(_Section(lineno, {}, {}))
            continue
        if "=" not in line:
            raise ManifestError(f"expected 'key = value', got {line!r}", path, lineno)
        if not sections:
            raise ManifestError("key outside a [scenario] section", path, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ManifestError(f"unknown key {key!r}", path, lineno)
        sec = sections[-1]
        if key in sec.values:
            raise ManifestError(f"duplicate key {key!r}", path, lineno)
        sec.values[key] = value
        sec.lines[key] = lineno

    scenarios, seen = [], {}
    for sec in sections:
        name = sec.values.get("name")
        if not name:
            raise ManifestError("section has no 'name'", path, sec.line)
        if name in seen:
            raise ManifestError(f"duplicate scenario name {name!r} (first at line {seen[name]})", path, sec.line)
        seen[name] = sec.line
        base_name = sec.values.get("base", name if name in BUILTINS else None)
        changes = {}
        for key, text in sec.values.items():
            if key in ("name", "base"):
                continue
            try:
                changes[key] = PARSERS[key](text)
            except ValueError as exc:
                raise ManifestError(f"bad value for {key!r}: {text!r} ({exc})", path, sec.lines[key]) from None
        if base_name is not None:
            if base_name not in BUILTINS:
                raise ManifestError(f"unknown base {base_name!r}", path, sec.lines.get("base", sec.line))
            base = BUILTINS[base_name]
            merged = {f.name: getattr(base, f.name) for f in fields(Scenario)}
        elif "model" not in changes:
            raise ManifestError(f"scenario {name!r} needs 'model' or 'base'", path, sec.line)
        else:
            merged = {}
        merged.update(changes)
        merged["name"] = name
        try:
            scenarios.append(Scenario(**merged).validate())
        except ScenarioError as exc:
            line = sec.lines.get(exc.field, sec.line)
            raise ManifestError(str(exc), path, line) from None
    if not scenarios:
        raise ManifestError("no [scenario] sections", path)
    return scenarios


def resolve_manifest(path: str | os.PathLike) -> Path:
    """The path itself if it exists, else a shipped manifest of the same basename."""
    p = Path(path)
    if p.exists():
        return p
    if p.name in SHIPPED:
        shipped = resources.files("thinspec") / "manifests" / p.name
        with resources.as_file(shipped) as real:
            return Path(real)
    raise FileNotFoundError(f"manifest not found: {path}")


def load_manifest(path: str | os.PathLike) -> list[Scenario]:
    real = resolve_manifest(path)
    try:
        text = real.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}", str(path)) from None
    return parse_manifest(text, str(path))
