"""Single runs and tau sweeps driven by an :class:`ExperimentConfig`."""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .. import __version__
from ..dynamics import first_order, ising_first_order, ising_ground_transition, propagate, transition_probability
from ..geometry import Path as ControlPath
from ..geometry import adiabatic_length, ising_length
from ..hamiltonians import LandauZener, TwoLevel
from ..protocols import (
    IDENTITY_TIMING,
    Protocol,
    constant_rate_reparametrize,
    ising_optimal_protocol_finite,
    linear_protocol,
    lz_optimal,
    read_protocol_csv,
    sphere_circle_paths,
)
from .config import ConfigError, ExperimentConfig, parse_config

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Variant:
    """A model + protocol pair with the adiabatic length of its path."""

    kind: str
    model: object
    protocol: Protocol
    length: float
    chain: tuple | None = None  # (N, J) for the Ising chain


def build_variant(cfg: ExperimentConfig, kind: str) -> Variant:
    if cfg.model == "sphere":
        small, large = sphere_circle_paths()
        path = small if kind == "small" else large
        model = TwoLevel()
        return Variant(kind, model, Protocol(path, IDENTITY_TIMING, kind), adiabatic_length(model, path, cfg.level))

    start, end = cfg.lambda_start, cfg.lambda_end
    if kind == "file":
        protocol = read_protocol_csv(cfg.protocol_file)
    elif kind == "linear":
        protocol = linear_protocol([start], [end])
    elif cfg.model == "ising":
        protocol = ising_optimal_protocol_finite(cfg.n_sites, cfg.coupling, start, end)
    elif start == -end and end > 0:
        protocol = lz_optimal(end)
    else:
        protocol = constant_rate_reparametrize(LandauZener(cfg.delta), ControlPath.linear([start], [end]), cfg.level)

    if cfg.model == "ising":
        if cfg.level != 0:
            raise ConfigError("the Ising chain supports the ground state (level = 0) only")
        a, b = float(protocol(0.0)[0]), float(protocol(1.0)[0])
        length = ising_length(cfg.n_sites, cfg.coupling, a, b, "rss")
        return Variant(kind, None, protocol, length, (cfg.n_sites, cfg.coupling))
    model = LandauZener(cfg.delta)
    return Variant(kind, model, protocol, adiabatic_length(model, protocol.path, cfg.level))


@lru_cache(maxsize=32)
def _cached_variant(ini_text: str, kind: str) -> Variant:
    return build_variant(parse_config(ini_text), kind)


def evolve_columns(variant: Variant, tau: float, cfg: ExperimentConfig) -> dict:
    """Trajectory table: t, s, lambda_i, P, P_minus, P_plus, first_order."""
    times = np.linspace(0.0, tau, cfg.samples)
    if variant.chain:
        N, J = variant.chain
        res = ising_ground_transition(N, J, variant.protocol, tau, cfg.abs_tol, cfg.rel_tol, times=times)
        fo = ising_first_order(N, J, variant.protocol, tau, times)
        P, s = res.probability, times / tau
        lam = variant.protocol(s)
    else:
        tr = propagate(variant.model, variant.protocol, tau, cfg.level, cfg.abs_tol, cfg.rel_tol, times=times)
        fo = first_order(variant.model, variant.protocol, tau, cfg.level, times)
        P, s, lam = transition_probability(tr), tr.s, tr.lam
    cols = {"t": times, "s": s}
    for i in range(lam.shape[1]):
        cols[f"lambda_{i + 1}"] = lam[:, i]
    cols.update(P=P, P_minus=fo.lower, P_plus=fo.upper, first_order=fo.probability)
    return cols


def final_probability(variant: Variant, tau: float, cfg: ExperimentConfig) -> float:
    times = np.array([0.0, tau])
    if variant.chain:
        N, J = variant.chain
        res = ising_ground_transition(N, J, variant.protocol, tau, cfg.abs_tol, cfg.rel_tol, times=times)
        return float(res.probability[-1])
    tr = propagate(variant.model, variant.protocol, tau, cfg.level, cfg.abs_tol, cfg.rel_tol, times=times)
    return float(transition_probability(tr)[-1])


def fmt(x) -> str:
    """Shortest round-trip decimal; locale independent."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_csv(filename, columns: dict):
    names = list(columns)
    n = len(columns[names[0]])
    with open(filename, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(fmt(columns[c][i]) for c in names) + "\n")


def write_manifest(out: Path, cfg_text: str, command: str, outputs: list, started: float, extra=None):
    """Write ``<command>.manifest.json``: config echo, version, wall time, outputs."""
    manifest = {
        "command": command,
        "config": cfg_text,
        "outputs": sorted(outputs),
        "version": __version__,
        "wall_time_s": round(time.time() - started, 3),
    }
    if extra:
        manifest.update(extra)
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (out / f"{command.split()[0]}.manifest.json").write_text(text, encoding="utf-8")


def _tau_tag(tau: float) -> str:
    return f"{tau:g}".replace(".", "p")


def run_single(cfg: ExperimentConfig, out: Path | None = None) -> list[Path]:
    """Write one trajectory CSV per (protocol kind, tau) plus a manifest."""
    if not cfg.taus:
        raise ConfigError("no tau values given")
    started = time.time()
    out = Path(out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in cfg.kinds:
        variant = build_variant(cfg, kind)
        for tau in cfg.taus:
            name = out / f"evolve_{kind}_tau{_tau_tag(tau)}.csv"
            write_csv(name, evolve_columns(variant, tau, cfg))
            written.append(name)
    write_manifest(out, cfg.to_ini(), "evolve", [p.name for p in written], started)
    return written


def _sweep_job(ini_text: str, kind: str, tau: float):
    cfg = parse_config(ini_text)
    try:
        return final_probability(_cached_variant(ini_text, kind), tau, cfg), "ok"
    except Exception as exc:  # noqa: BLE001 - recorded in the output row
        return float("nan"), f"failed: {type(exc).__name__}: {exc}".replace(",", ";")


def sweep_table(cfg: ExperimentConfig, workers: int | None = None) -> dict:
    """Final probabilities for every (kind, tau), rows in tau order."""
    if len(cfg.taus) < 2:
        raise ConfigError("a sweep needs at least two tau values")
    workers = workers or cfg.workers
    text = cfg.to_ini()
    jobs = [(text, kind, tau) for kind in cfg.kinds for tau in cfg.taus]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_job, *zip(*jobs)))
    else:
        results = [_sweep_job(*job) for job in jobs]
    by_job = dict(zip([(k, t) for _, k, t in jobs], results))

    taus = np.array(cfg.taus)
    cols = {"tau": taus}
    status = ["ok"] * len(taus)
    for kind in cfg.kinds:
        length = _cached_variant(text, kind).length
        cols[f"P_{kind}"] = np.array([by_job[(kind, t)][0] for t in cfg.taus])
        cols[f"est_{kind}"] = 2 * length**2 / taus**2
        cols[f"bound_{kind}"] = 4 * length**2 / taus**2
        for i, t in enumerate(cfg.taus):
            if by_job[(kind, t)][1] != "ok":
                status[i] = by_job[(kind, t)][1]
    cols["status"] = status
    return cols


def run_sweep(cfg: ExperimentConfig, out: Path | None = None, workers: int | None = None) -> Path:
    started = time.time()
    cols = sweep_table(cfg, workers)
    out = Path(out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    name = out / "sweep.csv"
    write_csv(name, cols)
    failed = [s for s in cols["status"] if s != "ok"]
    write_manifest(out, cfg.to_ini(), "sweep", [name.name], started, {"failed_rows": len(failed)})
    if failed:
        raise SweepFailure(f"{len(failed)} sweep row(s) failed; see {name}")
    return name


class SweepFailure(RuntimeError):
    """Some sweep rows could not be computed; partial results were written."""
