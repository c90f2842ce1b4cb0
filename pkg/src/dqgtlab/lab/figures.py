"""Recipes that generate the figure data sets (fig2 to fig5).

Each recipe writes a set of CSV files (the contract) and one SVG line chart
per CSV (a convenience for eyeballing). ``quick=True`` thins the tau grids so
a recipe finishes in seconds; the parameters themselves are unchanged.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..protocols import ising_optimal_protocol_finite, ising_optimal_protocol_thermo
from .config import ConfigError, ExperimentConfig
from .experiments import build_variant, evolve_columns, sweep_table, write_csv, write_manifest

RECIPES = ("fig2", "fig3", "fig4", "fig5")

# sphere sweep grids for the short- and long-time panels
FIG5_SHORT = np.linspace(0.25, 20, 80)
FIG5_LONG = np.linspace(20, 50, 121)


def _plot(filename: Path, columns: dict, x: str, title: str, logy: bool = False):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "dqgtlab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        xs = np.asarray(columns[x], dtype=float)
        for name, ys in columns.items():
            if name == x or name == "status":
                continue
            ys = np.asarray(ys, dtype=float)
            if logy:
                ys = np.where(ys > 0, ys, np.nan)
            ax.plot(xs, ys, label=name, lw=1)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(x)
        ax.set_title(title)
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(filename, format="svg", metadata={"Date": None})
        plt.close(fig)


@dataclass
class _Record:
    """Files written by a recipe and the config behind each panel."""

    files: list = field(default_factory=list)
    panels: dict = field(default_factory=dict)


def _emit(out: Path, stem: str, columns: dict, x: str, title: str, rec: _Record, cfg=None, logy=False):
    csv_path = out / f"{stem}.csv"
    write_csv(csv_path, columns)
    _plot(out / f"{stem}.svg", columns, x, title, logy)
    rec.files += [csv_path.name, f"{stem}.svg"]
    if cfg is not None:
        rec.panels[stem] = cfg.to_ini()


def _sweep(out, stem, cfg: ExperimentConfig, taus, workers, title, rec, logy=False):
    cfg = cfg.with_(taus=tuple(float(t) for t in taus))
    _emit(out, stem, sweep_table(cfg, workers), "tau", title, rec, cfg, logy)


def fig2(out: Path, quick: bool, workers: int, rec: _Record):
    cfg = ExperimentConfig(model="lz", kinds=("optimal", "linear"), taus=(10.0,),
                           delta=2.0, lambda_start=-10.0, lambda_end=10.0)
    opt, lin = build_variant(cfg, "optimal"), build_variant(cfg, "linear")
    s = np.linspace(0, 1, 201 if quick else 1001)
    _emit(out, "fig2a", {"s": s, "lambda_optimal": opt.protocol(s)[:, 0], "lambda_linear": lin.protocol(s)[:, 0]},
          "s", "LZ protocols", rec, cfg)

    tau = 10.0
    run = cfg.with_(samples=201 if quick else 1001)
    c_opt = evolve_columns(opt, tau, run)
    c_lin = evolve_columns(lin, tau, run)
    L = opt.length
    _emit(out, "fig2b", {
        "t": c_opt["t"],
        "P_optimal": c_opt["P"],
        "P_linear": c_lin["P"],
        "first_order_optimal": c_opt["first_order"],
        "bound": np.full_like(c_opt["t"], 4 * L**2 / tau**2),
    }, "t", "LZ P_g(t), tau = 10", rec, run)

    short = np.linspace(0.5, 20, 8 if quick else 160)
    long_ = np.linspace(20, 100, 5 if quick else 161)
    _sweep(out, "fig2c", cfg, short, workers, "LZ P_g(tau), short times", rec)
    _sweep(out, "fig2d", cfg, long_, workers, "LZ P_g(tau), long times", rec, logy=True)


def fig3(out: Path, quick: bool, workers: int, rec: _Record):
    lam_end = 5.0
    c = lam_end / np.sqrt(1 + lam_end**2)
    s = np.linspace(0, 1, 201 if quick else 1001)
    cols = {"s_prime": -c + 2 * c * s}
    for N in (4, 50, 100):
        cols[f"lambda_N{N}"] = ising_optimal_protocol_finite(N, 1.0, -lam_end, lam_end)(s)[:, 0]
    _emit(out, "fig3a", cols, "s_prime", "Ising optimal protocols, finite N", rec)

    inner = np.linspace(-5, 5, 201 if quick else 1001)
    _emit(out, "fig3b_inner", {"s": inner, "lambda_inner": ising_optimal_protocol_thermo("inner", inner)},
          "s", "thermodynamic limit, |lambda| < 1", rec)
    outer = np.linspace(1.05, 6, 199 if quick else 991)
    _emit(out, "fig3b_outer", {
        "s": outer,
        "lambda_lower": ising_optimal_protocol_thermo("lower", outer),
        "lambda_upper": ising_optimal_protocol_thermo("upper", outer),
    }, "s", "thermodynamic limit, |lambda| > 1", rec)


def fig4(out: Path, quick: bool, workers: int, rec: _Record):
    for N, tau, (sweep_panel, time_panel) in ((50, 30.0, "ab"), (100, 80.0, "cd")):
        cfg = ExperimentConfig(model="ising", kinds=("optimal", "linear"), taus=(tau,), n_sites=N,
                               coupling=1.0, lambda_start=2.0, lambda_end=0.0)
        taus = np.linspace(10, 100, 4 if quick else 19) * (N / 50)
        _sweep(out, f"fig4{sweep_panel}", cfg, taus, workers, f"Ising N={N}: P_g(tau)", rec, logy=True)
        if quick and N == 100:
            continue
        run = cfg.with_(samples=101 if quick else 401)
        opt = build_variant(cfg, "optimal")
        c_opt = evolve_columns(opt, tau, run)
        c_lin = evolve_columns(build_variant(cfg, "linear"), tau, run)
        _emit(out, f"fig4{time_panel}", {
            "t_over_tau": c_opt["t"] / tau,
            "P_optimal": c_opt["P"],
            "P_linear_x10": 10 * c_lin["P"],
            "estimate": np.full_like(c_opt["t"], 2 * opt.length**2 / tau**2),
        }, "t_over_tau", f"Ising N={N}: P_g(t), tau = {tau:g}", rec, run)


def fig5(out: Path, quick: bool, workers: int, rec: _Record):
    cfg = ExperimentConfig(model="sphere", kinds=("small", "large"), taus=(1.0,))
    short = np.linspace(0.25, 20, 8) if quick else FIG5_SHORT
    long_ = np.linspace(20, 50, 4) if quick else FIG5_LONG
    _sweep(out, "fig5a", cfg, short, workers, "sphere P_g(tau), short times", rec)
    _sweep(out, "fig5b", cfg, long_, workers, "sphere P_g(tau), long times", rec, logy=True)


_RUNNERS = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}


def run_figure(recipe: str, out, quick: bool = False, workers: int = 1) -> list[str]:
    """Run one recipe into ``out``; returns the names of the files written."""
    if recipe not in _RUNNERS:
        raise ConfigError(f"unknown recipe {recipe!r}; available: {', '.join(RECIPES)}")
    started = time.time()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rec = _Record()
    _RUNNERS[recipe](out, quick, workers, rec)
    text = f"[figure]\nrecipe = {recipe}\nquick = {quick}\n"
    write_manifest(out, text, f"figure {recipe}", rec.files, started, {"panels": rec.panels})
    return rec.files
