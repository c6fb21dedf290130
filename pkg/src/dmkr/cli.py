"""Command-line front end.

Each subcommand resolves its configuration (JSON config file, overridden by
flags), runs one pipeline and writes CSV data plus a JSON sidecar with the
resolved config and seeds next to the outputs; optional SVG plots.  Outputs
are bit-reproducible from the sidecar at default settings.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analysis, classical, io, kernels, observables
from . import spectra as spectra_mod
from . import svgplot, ulam
from .params import MapParams, NoiseSpec
from .quantum import HilbertSpace, PropagatorConfig, coherent_state, density_from_state, evolve_period

OUTPUT_ENV = "DMKR_OUT"

_CONFIG_KEYS = {
    "K", "gamma", "hbar", "N", "T", "grid", "seed", "jobs", "out", "format",
    "times", "n_eigs", "samples_per_cell", "cell_side", "husimi_grid",
    "t_transient", "t_record", "n_ics", "lyapunov_M", "lyapunov_steps",
    "substeps",
}


@dataclass
class RunConfig:
    command: str
    K: float = 5.4
    gamma: float = 0.2
    hbar: float = 0.062
    N: int = 256
    T: int = 100
    grid: str = "1:10:0.1"
    seed: int = 0
    jobs: int = 1
    out: str | None = None
    format: str = "csv"
    times: str = "1,3,8,20"
    n_eigs: int = 100
    samples_per_cell: int = 1000
    cell_side: float = 0.15
    husimi_grid: int = 200
    t_transient: int = 500
    t_record: int = 64
    n_ics: int = 24
    lyapunov_M: int = 1000
    lyapunov_steps: int = 100000
    substeps: int | None = None
    extra: dict = field(default_factory=dict)

    def formats(self) -> set[str]:
        fmts = {f.strip() for f in self.format.split(",") if f.strip()}
        unknown = fmts - {"csv", "json", "svg"}
        if unknown:
            raise ValueError(f"unknown formats: {sorted(unknown)}")
        return fmts

    def out_dir(self) -> Path:
        root = self.out or os.environ.get(OUTPUT_ENV) or "dmkr-out"
        d = Path(root) / self.command
        d.mkdir(parents=True, exist_ok=True)
        return d

    def params(self) -> MapParams:
        return MapParams(K=self.K, gamma=self.gamma, hbar_eff=self.hbar)

    def space(self) -> HilbertSpace:
        return HilbertSpace(N=self.N, hbar_eff=self.hbar)

    def k_grid(self) -> np.ndarray:
        lo, hi, step = (float(x) for x in self.grid.split(":"))
        n = int(round((hi - lo) / step))
        g = lo + step * np.arange(n + 1)
        return g[g <= hi + 1e-12]

    def time_list(self) -> list[int]:
        return [int(t) for t in self.times.split(",")]

    def sidecar(self, out_dir: Path, artifacts: list[Path]) -> Path:
        payload = {
            "config": {k: v for k, v in asdict(self).items() if k != "extra"},
            "version": __version__,
            "kernel_backend": kernels.BACKEND,
            "artifacts": [str(a.name) for a in artifacts],
        }
        return io.write_json(out_dir / "run.json", payload)


def _load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return data


def _build_config(command: str, args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        values.update(_load_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunConfig(command=command, **values)


# ---------------------------------------------------------------------------
# pipelines


def _cmd_otoc(cfg: RunConfig) -> list[Path]:
    space = cfg.space()
    params = cfg.params()
    psi0 = coherent_state(math.pi, 0.0, space)
    prop = PropagatorConfig(substeps=cfg.substeps, method="exact", check_leakage=False)
    series = observables.otoc_series(psi0, space, params, prop, T=cfg.T)
    out = cfg.out_dir()
    arts = [io.timeseries_csv(out / "otoc.csv", series, {"seed": cfg.seed})]
    if "svg" in cfg.formats():
        arts.append(svgplot.svg_plot(
            out / "otoc.svg",
            [(series.times, series.values, f"K={cfg.K}", "line")],
            xlabel="t", ylabel="C(t)", logy=True,
            title="commutator-square decay"))
    if "json" in cfg.formats():
        arts.append(io.write_json(out / "otoc.json", {
            "t": series.times, "value": series.values, "metadata": series.metadata}))
    return arts


def _sweep_cmd(cfg: RunConfig, pipeline: str) -> list[Path]:
    sweep_cfg = analysis.SweepConfig(
        N=cfg.N, hbar_eff=cfg.hbar, gamma=cfg.gamma,
        T=1 if pipeline == "growth" else cfg.T,
        lyapunov_M=cfg.lyapunov_M, lyapunov_steps=cfg.lyapunov_steps,
        n_eigs=min(cfg.n_eigs, 20), cell_side=cfg.cell_side,
        samples_per_cell=cfg.samples_per_cell, substeps=cfg.substeps,
        seed=cfg.seed, jobs=cfg.jobs)
    rows = analysis.k_sweep(pipeline, cfg.k_grid(), sweep_cfg)
    out = cfg.out_dir()
    meta = {"pipeline": pipeline, "seed": cfg.seed, "N": sweep_cfg.N,
            "hbar_eff": sweep_cfg.hbar_eff, "gamma": sweep_cfg.gamma}
    arts = [io.sweep_csv(out / "sweep.csv", rows, meta)]
    if "svg" in cfg.formats():
        K = [r.K for r in rows]
        curves = []
        rate_col = "otoc_growth_rate" if pipeline == "growth" else "otoc_decay_rate"
        curves.append((K, [_nan(getattr(r, rate_col)) for r in rows], rate_col, "line"))
        curves.append((K, [_nan(r.rescaled_lyapunov) for r in rows],
                       "rescaled_lyapunov", "line"))
        if pipeline == "decay":
            curves.append((K, [_nan(r.rescaled_ipr) for r in rows], "rescaled_ipr", "line"))
        if pipeline == "gap":
            for col in ("quantum_gap_rate", "classical_gap_rate_noiseless",
                        "classical_gap_rate_noisy"):
                curves.append((K, [_nan(getattr(r, col)) for r in rows], col, "line"))
        arts.append(svgplot.svg_plot(out / "sweep.svg", curves, xlabel="K",
                                     ylabel="rate", title=f"{pipeline} sweep"))
    if "json" in cfg.formats():
        arts.append(io.write_json(out / "sweep.json",
                                  {"rows": [asdict(r) for r in rows]}))
    return arts


def _nan(v):
    return math.nan if v is None else v


def _cmd_husimi(cfg: RunConfig) -> list[Path]:
    space = cfg.space()
    params = cfg.params()
    prop = PropagatorConfig(substeps=cfg.substeps, method="exact", check_leakage=False)
    rho = density_from_state(coherent_state(math.pi, 0.0, space))
    out = cfg.out_dir()
    arts = []
    snapshots = sorted(set(cfg.time_list()))
    qc, pc = observables.husimi_grid(space, cfg.husimi_grid, cfg.husimi_grid)
    t_now = 0
    for t in snapshots:
        while t_now < t:
            rho = evolve_period(rho, "schrodinger", space, params, prop)
            t_now += 1
        hmap = observables.husimi(rho, space, qc, pc)
        arts.append(io.husimi_csv(out / f"husimi_t{t:04d}.csv", hmap,
                                  {"t": t, "K": cfg.K, "N": cfg.N}))
        if "svg" in cfg.formats():
            arts.append(svgplot.svg_heatmap(
                out / f"husimi_t{t:04d}.svg", hmap.values, qc, pc,
                xlabel="q", ylabel="p", title=f"t={t}"))
    return arts


def _cmd_bifurcation(cfg: RunConfig) -> list[Path]:
    result = classical.bifurcation_scan(
        cfg.k_grid(), cfg.params(), t_transient=cfg.t_transient,
        t_record=cfg.t_record, n_ics=cfg.n_ics, seed=cfg.seed)
    out = cfg.out_dir()
    arts = [io.bifurcation_csv(out / "bifurcation.csv", result,
                               {"gamma": cfg.gamma, "seed": cfg.seed})]
    if "svg" in cfg.formats():
        arts.append(svgplot.svg_plot(
            out / "bifurcation.svg", [(result.K, result.p, "", "scatter")],
            xlabel="K", ylabel="p", title=f"attractor momenta, gamma={cfg.gamma}"))
    return arts


def _cmd_spectra(cfg: RunConfig, dump_matrix: bool, dump_density: bool) -> list[Path]:
    space = cfg.space()
    params = cfg.params()
    prop = PropagatorConfig(substeps=cfg.substeps, method="exact", check_leakage=False)
    out = cfg.out_dir()
    spec_q = spectra_mod.channel_spectrum(space, params, prop,
                                          n_eigs=cfg.n_eigs, seed=cfg.seed)
    T = ulam.build_ulam_matrix(params, ulam.UlamGrid(cell_side=cfg.cell_side),
                               samples_per_cell=cfg.samples_per_cell, seed=cfg.seed)
    spec_c = spectra_mod.matrix_spectrum(T, n_eigs=cfg.n_eigs, seed=cfg.seed)
    arts = [
        io.spectrum_csv(out / "spectrum_quantum.csv", spec_q, {"side": "quantum"}),
        io.spectrum_csv(out / "spectrum_classical.csv", spec_c,
                        {"side": "classical", "n_cells": T.n_cells}),
    ]
    if dump_matrix:
        path = out / "transfer_matrix.txt"
        T.save_coo(path)
        arts.append(path)
    if dump_density:
        dens = ulam.stationary_density(T)
        arts.append(io.density_csv(out / "stationary_density.csv", T.grid, dens,
                                   {"K": cfg.K, "gamma": cfg.gamma}))
    if "svg" in cfg.formats():
        arts.append(svgplot.svg_plot(
            out / "spectra.svg",
            [(spec_q.eigenvalues.real, spec_q.eigenvalues.imag, "quantum", "scatter"),
             (spec_c.eigenvalues.real, spec_c.eigenvalues.imag, "classical", "scatter")],
            xlabel="Re", ylabel="Im", title=f"leading eigenvalues, K={cfg.K}"))
    return arts


def _cmd_selftest(cfg: RunConfig) -> list[Path]:
    checks = run_selftest()
    out = cfg.out_dir()
    rows = [(name, "pass" if ok else "FAIL", detail) for name, ok, detail in checks]
    arts = [io.write_csv(out / "selftest.csv", ("check", "status", "detail"), rows)]
    for name, ok, detail in checks:
        print(f"[{'pass' if ok else 'FAIL'}] {name}: {detail}")
    if not all(ok for _, ok, _ in checks):
        raise RuntimeError("selftest failures")
    return arts


def run_selftest() -> list[tuple[str, bool, str]]:
    """Fast invariant suite over all subsystems."""
    rng = np.random.default_rng(0)
    checks = []

    params = MapParams(K=3.7, gamma=0.2, hbar_eff=0.2)
    qs = rng.uniform(0, 2 * math.pi, 10_000)
    ps = rng.uniform(-math.pi, math.pi, 10_000)
    dets = np.array([np.linalg.det(classical.jacobian(classical.PhasePoint(q, p), params))
                     for q, p in zip(qs[:200], ps[:200])])
    err = np.abs(dets - params.gamma).max()
    checks.append(("jacobian determinant equals gamma", err < 1e-12, f"max err {err:.2e}"))

    space = HilbertSpace(N=64, hbar_eff=0.2)
    psi = coherent_state(math.pi, 0.0, space)
    series = observables.otoc_series(psi, space, params, T=1)
    err = abs(series.values[0] - space.hbar_eff**2)
    checks.append(("C(0) equals hbar_eff^2", err < 1e-8, f"err {err:.2e}"))

    p0 = MapParams(K=0.0, gamma=0.2, hbar_eff=0.2)
    rho = density_from_state(coherent_state(math.pi, 1.0, space))
    from .quantum import momentum_expectation
    n_before = momentum_expectation(rho, space)
    rho1 = evolve_period(rho, "schrodinger", space, p0)
    ratio = momentum_expectation(rho1, space) / n_before
    err = abs(ratio - p0.gamma)
    checks.append(("momentum contraction factor gamma at K=0", err < 1e-6, f"err {err:.2e}"))

    err = abs(np.trace(rho1).real - 1.0)
    checks.append(("trace preserved over one period", err < 1e-9, f"err {err:.2e}"))

    B = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    r = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    lhs = np.trace(B @ evolve_period(r, "schrodinger", space, params))
    rhs = np.trace(evolve_period(B, "heisenberg", space, params) @ r)
    err = abs(lhs - rhs) / abs(lhs)
    checks.append(("Schrodinger/Heisenberg duality", err < 1e-8, f"rel err {err:.2e}"))

    T = ulam.build_ulam_matrix(params, ulam.UlamGrid(cell_side=0.3),
                               samples_per_cell=100, seed=1)
    spec_c = spectra_mod.matrix_spectrum(T, n_eigs=6, seed=1)
    err = abs(abs(spec_c.eigenvalues[0]) - 1.0)
    checks.append(("transfer-matrix leading eigenvalue is 1", err < 1e-10, f"err {err:.2e}"))

    small = HilbertSpace(N=32, hbar_eff=0.4)
    spec_q = spectra_mod.channel_spectrum(small, params, n_eigs=6, method="dense")
    err = abs(abs(spec_q.eigenvalues[0]) - 1.0)
    checks.append(("channel leading eigenvalue is 1", err < 1e-8, f"err {err:.2e}"))
    return checks


# ---------------------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--config", help="JSON config file; flags override it")
    sp.add_argument("--K", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--hbar", type=float, default=None)
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--T", type=int, default=None)
    sp.add_argument("--grid", default=None, help="K grid as start:stop:step")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--jobs", type=int, default=None)
    sp.add_argument("--out", default=None,
                    help=f"output root (default ${OUTPUT_ENV} or ./dmkr-out)")
    sp.add_argument("--format", default=None, help="comma list of csv,json,svg")
    sp.add_argument("--substeps", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dmkr",
        description="dissipative modified kicked rotator: simulations and spectra")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("otoc", help="commutator-square time series at one K")
    _add_common(sp)

    sp = sub.add_parser("growth-sweep", help="one-kick growth rate vs Lyapunov over K")
    _add_common(sp)
    sp.add_argument("--lyapunov-M", dest="lyapunov_M", type=int, default=None)
    sp.add_argument("--lyapunov-steps", dest="lyapunov_steps", type=int, default=None)

    sp = sub.add_parser("decay-sweep", help="decay rate vs Lyapunov and IPR over K")
    _add_common(sp)
    sp.add_argument("--lyapunov-M", dest="lyapunov_M", type=int, default=None)
    sp.add_argument("--lyapunov-steps", dest="lyapunov_steps", type=int, default=None)

    sp = sub.add_parser("husimi", help="phase-space snapshots of an evolved state")
    _add_common(sp)
    sp.add_argument("--times", default=None, help="comma list of kick counts")
    sp.add_argument("--husimi-grid", dest="husimi_grid", type=int, default=None)

    sp = sub.add_parser("bifurcation", help="attractor momenta over a K grid")
    _add_common(sp)
    sp.add_argument("--t-transient", dest="t_transient", type=int, default=None)
    sp.add_argument("--t-record", dest="t_record", type=int, default=None)
    sp.add_argument("--n-ics", dest="n_ics", type=int, default=None)

    sp = sub.add_parser("spectra", help="quantum channel and transfer-matrix spectra")
    _add_common(sp)
    sp.add_argument("--n-eigs", dest="n_eigs", type=int, default=None)
    sp.add_argument("--samples-per-cell", dest="samples_per_cell", type=int, default=None)
    sp.add_argument("--cell-side", dest="cell_side", type=float, default=None)
    sp.add_argument("--dump-matrix", action="store_true")
    sp.add_argument("--dump-density", action="store_true")

    sp = sub.add_parser("gap-compare", help="decay rate vs spectral-gap rates over K")
    _add_common(sp)
    sp.add_argument("--n-eigs", dest="n_eigs", type=int, default=None)
    sp.add_argument("--samples-per-cell", dest="samples_per_cell", type=int, default=None)
    sp.add_argument("--cell-side", dest="cell_side", type=float, default=None)
    sp.add_argument("--lyapunov-M", dest="lyapunov_M", type=int, default=None)
    sp.add_argument("--lyapunov-steps", dest="lyapunov_steps", type=int, default=None)

    sp = sub.add_parser("selftest", help="run the fast invariant suite")
    _add_common(sp)
    return ap


_COMMANDS = {
    "otoc": _cmd_otoc,
    "husimi": _cmd_husimi,
    "bifurcation": _cmd_bifurcation,
    "selftest": _cmd_selftest,
}

_DEFAULTS_BY_COMMAND = {
    "husimi": {"K": 1.10},
    "spectra": {"N": 128, "hbar": 0.15, "K": 1.10},
    "gap-compare": {"N": 128, "hbar": 0.15, "grid": "2:10:0.25"},
    "decay-sweep": {"grid": "2:10:0.25"},
    "growth-sweep": {"grid": "1:10:0.25"},
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    try:
        for key, val in _DEFAULTS_BY_COMMAND.get(command, {}).items():
            if getattr(args, key, None) is None:
                setattr(args, key, val)
        cfg = _build_config(command, args)
        if command in _COMMANDS:
            artifacts = _COMMANDS[command](cfg)
        elif command == "growth-sweep":
            artifacts = _sweep_cmd(cfg, "growth")
        elif command == "decay-sweep":
            artifacts = _sweep_cmd(cfg, "decay")
        elif command == "gap-compare":
            artifacts = _sweep_cmd(cfg, "gap")
        elif command == "spectra":
            artifacts = _cmd_spectra(cfg, args.dump_matrix, args.dump_density)
        else:  # pragma: no cover
            raise ValueError(f"unhandled command {command}")
        sidecar = cfg.sidecar(cfg.out_dir(), artifacts)
        for a in artifacts + [sidecar]:
            print(a)
        return 0
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        record = {"error": type(exc).__name__, "message": str(exc), "command": command}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
