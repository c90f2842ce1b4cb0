"""Experiment configuration: flat ``key = value`` INI text with three sections.

::

    [model]
    name = lz            ; lz | ising | sphere
    delta = 2            ; lz only
    lambda_start = -10   ; lz, ising
    lambda_end = 10
    n_sites = 50         ; ising only
    coupling = 1         ; ising only

    [protocol]
    kind = optimal, linear   ; lz/ising: optimal | linear | file; sphere: small | large
    file = my_protocol.csv   ; required when kind includes "file"

    [run]
    tau = 10, 20             ; explicit list, or
    tau_start = 10           ; an evenly spaced range
    tau_stop = 100
    tau_count = 10
    level = 0
    abs_tol = 1e-10
    rel_tol = 1e-10
    samples = 201
    workers = 1
    out = results
"""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


MODELS = ("lz", "ising", "sphere")
KINDS = {"lz": ("optimal", "linear", "file"), "ising": ("optimal", "linear", "file"), "sphere": ("small", "large")}

ALLOWED = {
    "model": {"name", "delta", "lambda_start", "lambda_end", "n_sites", "coupling"},
    "protocol": {"kind", "file"},
    "run": {"tau", "tau_start", "tau_stop", "tau_count", "level", "abs_tol", "rel_tol",
            "samples", "workers", "out"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    kinds: tuple
    taus: tuple
    delta: float = 2.0
    lambda_start: float = -10.0
    lambda_end: float = 10.0
    n_sites: int = 50
    coupling: float = 1.0
    protocol_file: str | None = None
    level: int = 0
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    samples: int = 201
    workers: int = 1
    out: str = "results"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if not self.kinds:
            raise ConfigError("protocol kind list is empty")
        for kind in self.kinds:
            if kind not in KINDS[self.model]:
                raise ConfigError(f"protocol kind {kind!r} not valid for model {self.model!r}")
        if "file" in self.kinds and not self.protocol_file:
            raise ConfigError("protocol kind 'file' needs [protocol] file = ...")
        if any(not t > 0 for t in self.taus):
            raise ConfigError("tau values must be positive")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.model == "lz" and not self.delta > 0:
            raise ConfigError("delta must be positive")
        if self.model == "ising" and (self.n_sites < 4 or self.n_sites % 2):
            raise ConfigError("n_sites must be even and >= 4")

    def to_ini(self) -> str:
        """Canonical text echo; parsing it back yields an equal config."""
        lines = ["[model]", f"name = {self.model}"]
        if self.model == "lz":
            lines.append(f"delta = {self.delta!r}")
        if self.model in ("lz", "ising"):
            lines += [f"lambda_start = {self.lambda_start!r}", f"lambda_end = {self.lambda_end!r}"]
        if self.model == "ising":
            lines += [f"n_sites = {self.n_sites}", f"coupling = {self.coupling!r}"]
        lines += ["", "[protocol]", f"kind = {', '.join(self.kinds)}"]
        if self.protocol_file:
            lines.append(f"file = {self.protocol_file}")
        lines += [
            "", "[run]",
            f"tau = {', '.join(repr(float(t)) for t in self.taus)}",
            f"level = {self.level}",
            f"abs_tol = {self.abs_tol!r}",
            f"rel_tol = {self.rel_tol!r}",
            f"samples = {self.samples}",
            f"workers = {self.workers}",
            f"out = {self.out}",
        ]
        return "\n".join(lines) + "\n"

    def as_dict(self):
        return asdict(self)

    def with_(self, **changes):
        return replace(self, **changes)


def _get(section, key, conv, default):
    if key not in section:
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def _float_list(raw):
    return tuple(float(x) for x in raw.replace(";", ",").split(",") if x.strip())


def parse_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for name in parser.sections():
        if name not in ALLOWED:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(parser[name]) - ALLOWED[name]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    model = parser["model"] if parser.has_section("model") else {}
    proto = parser["protocol"] if parser.has_section("protocol") else {}
    run = parser["run"] if parser.has_section("run") else {}
    if "name" not in model:
        raise ConfigError("[model] name is required")

    name = model["name"].strip()
    default_kind = "small, large" if name == "sphere" else "optimal"
    kinds = tuple(k.strip() for k in proto.get("kind", default_kind).split(",") if k.strip())

    if "tau" in run:
        taus = _get(run, "tau", _float_list, ())
    elif {"tau_start", "tau_stop", "tau_count"} <= set(run):
        count = _get(run, "tau_count", int, 0)
        taus = tuple(float(t) for t in np.linspace(_get(run, "tau_start", float, 0.0),
                                                   _get(run, "tau_stop", float, 0.0), count))
    else:
        taus = ()

    protocol_file = proto.get("file")
    if protocol_file and base_dir is not None and not Path(protocol_file).is_absolute():
        protocol_file = str(Path(base_dir) / protocol_file)

    lam_default = (2.0, 0.0) if name == "ising" else (-10.0, 10.0)
    return ExperimentConfig(
        model=name,
        kinds=kinds,
        taus=taus,
        delta=_get(model, "delta", float, 2.0),
        lambda_start=_get(model, "lambda_start", float, lam_default[0]),
        lambda_end=_get(model, "lambda_end", float, lam_default[1]),
        n_sites=_get(model, "n_sites", int, 50),
        coupling=_get(model, "coupling", float, 1.0),
        protocol_file=protocol_file,
        level=_get(run, "level", int, 0),
        abs_tol=_get(run, "abs_tol", float, 1e-10),
        rel_tol=_get(run, "rel_tol", float, 1e-10),
        samples=_get(run, "samples", int, 201),
        workers=_get(run, "workers", int, 1),
        out=run.get("out", "results").strip(),
    )


def load_config(filename) -> ExperimentConfig:
    """Read an INI config, or the ``config`` echo stored in a run manifest."""
    filename = Path(filename)
    text = filename.read_text(encoding="utf-8")
    if filename.suffix == ".json":
        try:
            text = json.loads(text)["config"]
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{filename} is not a run manifest") from exc
    return parse_config(text, base_dir=filename.parent)
