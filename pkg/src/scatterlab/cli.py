"""Command-line front end: INI configs, experiment orchestration, manifests.

Usage: ``scatter <experiment> --config <file> [--out <dir>] [--seed N]
[--threads N]``.  Exit codes: 0 success, 1 runtime failure, 2 validation
failure.  The environment variable SCATTER_THREADS supplies the default
thread count.  Every run writes its CSV artifacts plus a manifest listing
inputs, outputs with checksums, wall time, and the property the experiment
probes; identical (config, seed) pairs produce byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import os
import sys
import time

import numpy as np

from . import experiments as xp
from . import io as sio
from .clusters import ClusterId, TWO_CLUSTERS
from .errors import ConfigError, ScatterError
from .lattice import make_grid, gaussian_packet, write_wavefunction
from .model import ThreeBodyModel
from .operators import PotentialSpec
from .propagation import (
    CutoffSpec,
    PropagatorSpec,
    completeness_defect,
    evolve,
    local_decay_trace,
    minimal_velocity_trace,
)
from .commutators import mourre_report
from .partition import build_partition, verify_partition, DEFAULT_SMOOTHING_WIDTH
from .spectral import dense_spectrum, dispersion_scan, iterative_lowest, threshold_table

EXPERIMENTS = ("spectrum", "dispersion", "thresholds", "mourre", "partition",
               "evolve", "local-decay", "min-velocity", "channels", "verify-all")

CLAIMS = {
    "spectrum": "subsystem bound-state energies from the dense grid oracle",
    "dispersion": "pair-cluster energy transport along the external momentum",
    "thresholds": "subsystem eigenvalues plus zero form the threshold set",
    "mourre": "sampled commutator positivity on a filtered energy window",
    "partition": "channel partition of unity: sum of squares one, homogeneous, supported",
    "evolve": "split-step propagation with unitarity and energy traces",
    "local-decay": "time-integrability of the position-weighted evolution",
    "min-velocity": "escape of filtered continuum states from the shrinking region",
    "channels": "channel decomposition defect of the evolved state",
    "verify-all": "the full acceptance suite",
}

# allowed keys per config section
_SCHEMA = {
    "experiment": {"name", "seed", "threads"},
    "model": {f"{p}_{f}" for p in ("v12", "v13", "v23")
              for f in ("family", "strength", "width", "center")},
    "grid": {"particles", "points", "half_extent"},
    "window": {"lo", "hi", "energy", "mu", "samples", "count", "boundary_tol"},
    "cutoffs": {"delta", "eps", "mu", "smoothing"},
    "schedule": {"times", "dt", "horizon", "sample_interval", "boundary_limit"},
    "dispersion": {"s_values", "tol"},
    "partition": {"width"},
    "packet": {"center", "momentum", "width", "axis_momenta"},
    "output": {"directory"},
}


def _parse_ini(path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        read = cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from exc
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    return cp


def serialize_config(cp: configparser.ConfigParser) -> str:
    lines = []
    for section in sorted(cp.sections()):
        lines.append(f"[{section}]")
        for key in sorted(cp[section]):
            lines.append(f"{key} = {cp[section][key]}")
        lines.append("")
    return "\n".join(lines)


def _get(cp, section, key, cast, default=None, required=False):
    if cp.has_option(section, key):
        raw = cp.get(section, key)
        try:
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
    if required:
        raise ConfigError(f"missing required key {key!r} in section [{section}]")
    return default


def _require_section(cp, section):
    if not cp.has_section(section):
        raise ConfigError(f"missing required section [{section}]")


def _float_list(raw: str):
    return [float(tok) for tok in raw.replace(",", " ").split()]


def parse_model(cp) -> ThreeBodyModel:
    _require_section(cp, "model")
    pots = {}
    for name in ("v12", "v13", "v23"):
        family = _get(cp, "model", f"{name}_family", str, default="zero")
        pots[name] = PotentialSpec(
            family=family,
            strength=_get(cp, "model", f"{name}_strength", float, default=0.0),
            width=_get(cp, "model", f"{name}_width", float, default=1.0),
            center=_get(cp, "model", f"{name}_center", float, default=0.0),
        )
    return ThreeBodyModel(**pots)


def parse_grid(cp):
    _require_section(cp, "grid")
    return make_grid(
        _get(cp, "grid", "particles", int, required=True),
        _get(cp, "grid", "points", int, required=True),
        _get(cp, "grid", "half_extent", float, required=True),
    )


def parse_cutoffs(cp) -> CutoffSpec:
    _require_section(cp, "cutoffs")
    return CutoffSpec(
        delta=_get(cp, "cutoffs", "delta", float, required=True),
        eps=_get(cp, "cutoffs", "eps", float, required=True),
        mu=_get(cp, "cutoffs", "mu", float, default=0.6),
        smoothing_fraction=_get(cp, "cutoffs", "smoothing", float, default=0.1),
    )


def parse_window(cp):
    _require_section(cp, "window")
    return (_get(cp, "window", "lo", float, required=True),
            _get(cp, "window", "hi", float, required=True))


def _table_for(model, points=512, half_extent=32.0):
    return threshold_table(model, make_grid(1, points, half_extent))


def _out_path(out_dir, experiment, tag, suffix):
    return os.path.join(out_dir, f"{experiment}-{tag}.{suffix}")


def run_experiment(experiment: str, cp, seed: int, out_dir: str, threads: int = 1):
    """Execute one experiment; returns the list of files written."""
    os.makedirs(out_dir, exist_ok=True)
    tag = hashlib.sha256(
        (serialize_config(cp) + f"|seed={seed}|{experiment}").encode()
    ).hexdigest()[:12]
    files = []
    t0 = time.perf_counter()
    status = "ok"

    def out(name_suffix, suffix="csv"):
        path = _out_path(out_dir, experiment, f"{tag}-{name_suffix}" if name_suffix else tag,
                         suffix)
        files.append(path)
        return path

    if experiment == "spectrum":
        model = parse_model(cp)
        grid = parse_grid(cp)
        if grid.particles != 1:
            raise ConfigError("[grid] particles must be 1: the spectrum "
                              "experiment solves the one-particle subsystems")
        count = _get(cp, "window", "count", int, default=6) if cp.has_section("window") else 6
        for a in TWO_CLUSTERS:
            h = model.subsystem(a)
            res = (dense_spectrum(h, grid, count) if grid.size <= 4096
                   else iterative_lowest(h, grid, count))
            rows = [(j, lam, r) for j, (lam, r) in
                    enumerate(zip(res.eigenvalues, res.residuals))]
            tag_a = a.name.lower().replace("_", "-")
            sio.write_csv(out(tag_a), ("index", "eigenvalue", "residual"), rows)
            write_wavefunction(out(f"ground-{tag_a}", "dswf"), res.eigenvectors[0])

    elif experiment == "thresholds":
        model = parse_model(cp)
        grid = parse_grid(cp)
        table = threshold_table(model, grid)
        rows = [(str(a), lam) for a in TWO_CLUSTERS for lam in table.per_cluster[a]]
        rows.append(("zero", 0.0))
        sio.write_csv(out(""), ("cluster", "threshold"), rows)

    elif experiment == "dispersion":
        model = parse_model(cp)
        grid = parse_grid(cp)
        _require_section(cp, "dispersion")
        svals = _float_list(_get(cp, "dispersion", "s_values", str, required=True))
        tol = _get(cp, "dispersion", "tol", float, default=1e-8)
        curve = dispersion_scan(model, grid, svals, tol=tol, threads=threads)
        rows = [(s, l, l - s * s, r, bool(f)) for s, l, r, f in
                zip(curve.s_values, curve.lambdas, curve.residuals, curve.flagged)]
        sio.write_csv(out(""), ("s", "lambda", "lambda_minus_s2", "residual", "flagged"),
                      rows)

    elif experiment == "mourre":
        model = parse_model(cp)
        grid = parse_grid(cp)
        window = parse_window(cp)
        energy = _get(cp, "window", "energy", float, required=True)
        samples = _get(cp, "window", "samples", int, default=20)
        table = _table_for(model)
        boundary_tol = _get(cp, "window", "boundary_tol", float, default=5e-2)
        report = mourre_report(energy, window, model, grid, table,
                               samples=samples, seed=seed, boundary_tol=boundary_tol)
        rows = [(i, f, report.bound, f - report.bound, report.deflated_count)
                for i, f in enumerate(report.form_values)]
        path = out("")
        sio.write_csv(path, ("sample", "form_value", "bound", "margin",
                             "eigen_deflated_count"), rows)
        with open(path, "a", newline="\n") as fh:
            fh.write(f"# summary: min_form={sio.fmt(report.min_form)} "
                     f"violations={report.violations} "
                     f"worst_margin={sio.fmt(report.worst_margin)} "
                     f"deflated={report.deflated_count}\n")
        sio.write_sidecar(out("summary", "txt"), {
            "E": energy, "window_lo": window[0], "window_hi": window[1],
            "bound": report.bound, "min_form": report.min_form,
            "violations": report.violations, "worst_margin": report.worst_margin,
            "deflated": report.deflated_count, "gap": report.gap,
        })

    elif experiment == "partition":
        width = _get(cp, "partition", "width", float, default=DEFAULT_SMOOTHING_WIDTH) \
            if cp.has_section("partition") else DEFAULT_SMOOTHING_WIDTH
        grid = parse_grid(cp)
        pset = build_partition(width)
        model = parse_model(cp) if cp.has_section("model") else None
        report = verify_partition(pset, grid, model=model)
        rows = [("sum_sq_max_dev", report.sum_sq_max_dev),
                ("range_violations", report.range_violations),
                ("support_violations", report.support_violations),
                ("homogeneity_max_dev", report.homogeneity_max_dev),
                ("violations", len(report.violations))]
        rows += [(f"gradient_C[{k}]", v) for k, v in report.gradient_constants.items()]
        sio.write_csv(out(""), ("metric", "value"), rows)
        fields = pset.sample_on_grid(grid)
        from .lattice import WaveFunction
        for a, vals in fields.items():
            path = out(f"member-{a.name.lower().replace('_', '-')}", "dswf")
            write_wavefunction(path, WaveFunction(grid, vals.astype(np.complex128)))
        if not report.ok:
            status = "violations: " + "; ".join(report.violations)

    elif experiment == "evolve":
        model = parse_model(cp)
        grid = parse_grid(cp)
        _require_section(cp, "schedule")
        dt = _get(cp, "schedule", "dt", float, required=True)
        horizon = _get(cp, "schedule", "horizon", float, required=True)
        _require_section(cp, "packet")
        momenta = _float_list(_get(cp, "packet", "axis_momenta", str,
                                   default=_get(cp, "packet", "momentum", str, default="0")))
        center = _get(cp, "packet", "center", float, default=0.0)
        width = _get(cp, "packet", "width", float, default=2.0)
        psi0 = gaussian_packet(grid, center, momenta if len(momenta) > 1 else momenta[0],
                               width)
        ham = model.full() if grid.particles == 2 else model.subsystem(ClusterId.PHOTON_FREE)
        final, traces = evolve(psi0, PropagatorSpec(ham, dt=dt), horizon,
                               observables=("norm", "energy"))
        for name, series in traces.items():
            sio.write_csv(out(name), ("t", name), list(zip(series.times, series.values)))
        write_wavefunction(out("final", "dswf"), final)
        sio.write_sidecar(out("meta", "txt"),
                          {"dt": dt, "horizon": horizon, "seed": seed,
                           "points": grid.points_per_axis,
                           "half_extent": grid.half_extent})

    elif experiment in ("local-decay", "min-velocity", "channels"):
        model = parse_model(cp)
        grid = parse_grid(cp)
        window = parse_window(cp)
        _require_section(cp, "schedule")
        dt = _get(cp, "schedule", "dt", float, required=True)
        limit = _get(cp, "schedule", "boundary_limit", float, default=1e-6)
        _require_section(cp, "packet")
        momenta = _float_list(_get(cp, "packet", "axis_momenta", str, required=True))
        width = _get(cp, "packet", "width", float, default=6.0)
        center = _get(cp, "packet", "center", float, default=0.0)
        psi0 = gaussian_packet(grid, center, momenta if len(momenta) > 1 else momenta[0],
                               width)
        table = _table_for(model)
        if experiment == "local-decay":
            horizon = _get(cp, "schedule", "horizon", float, required=True)
            mu = _get(cp, "window", "mu", float, default=0.6)
            series = local_decay_trace(psi0, model.full() if grid.particles == 2
                                       else model.subsystem(ClusterId.PHOTON_FREE),
                                       window, mu=mu, T=horizon, dt=dt, table=table,
                                       filter_transition=0.25, boundary_limit=limit)
        elif experiment == "min-velocity":
            horizon = _get(cp, "schedule", "horizon", float, required=True)
            cutoffs = parse_cutoffs(cp)
            series = minimal_velocity_trace(psi0, model.full(), window, cutoffs,
                                            T=horizon, dt=dt, theta=window[0],
                                            filter_transition=0.25,
                                            boundary_limit=limit)
        else:
            cutoffs = parse_cutoffs(cp)
            times = _float_list(_get(cp, "schedule", "times", str, required=True))
            series = completeness_defect(psi0, model, window, cutoffs, times, dt=dt,
                                         table=table, filter_transition=0.25,
                                         boundary_limit=limit)
        sio.write_csv(out(""), ("t", series.label), list(zip(series.times, series.values)))
        sio.write_sidecar(out("meta", "txt"),
                          {**series.metadata, "seed": seed, "experiment": experiment})

    elif experiment == "verify-all":
        results = xp.verify_all(seed=seed, out_dir=out_dir, fast=False)
        rows = [(r.name, "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL"),
                 r.runtime) for r in results]
        sio.write_csv(out("summary"), ("check", "status", "runtime_s"), rows)
        failed = [r.name for r in results if not r.passed and not r.skipped]
        if failed:
            status = "failed: " + ", ".join(failed)
    else:
        raise ConfigError(f"unknown experiment {experiment!r}")

    wall = time.perf_counter() - t0
    manifest = _out_path(out_dir, experiment, tag, "manifest.txt")
    sio.write_manifest(manifest, experiment, CLAIMS[experiment],
                       {"seed": seed, "config_sha": tag}, files, wall, status)
    if experiment == "verify-all" and status.startswith("failed"):
        raise ScatterError(status)
    return files


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="scatter",
        description="Numerical experiments on the three-body dispersive model",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=False,
                        help="INI config; optional for verify-all")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("SCATTER_THREADS", "1")))
    parser.add_argument("--fast", action="store_true",
                        help="verify-all only: run the quick deterministic subset")
    args = parser.parse_args(argv)

    try:
        if args.experiment == "verify-all" and args.config is None:
            seed = args.seed if args.seed is not None else xp.DEFAULT_SEED
            out_dir = args.out or "out"
            os.makedirs(out_dir, exist_ok=True)
            results = xp.verify_all(seed=seed, out_dir=out_dir, fast=args.fast)
            failed = [r for r in results if not r.passed and not r.skipped]
            return 1 if failed else 0
        if args.config is None:
            print("error: --config is required", file=sys.stderr)
            return 2
        cp = _parse_ini(args.config)
        seed = args.seed if args.seed is not None else _get(
            cp, "experiment", "seed", int, default=xp.DEFAULT_SEED)
        out_dir = args.out or (
            _get(cp, "output", "directory", str, default="out")
            if cp.has_section("output") else "out")
        name = _get(cp, "experiment", "name", str, default=args.experiment) \
            if cp.has_section("experiment") else args.experiment
        if name != args.experiment:
            raise ConfigError(
                f"config names experiment {name!r} but {args.experiment!r} was requested")
        run_experiment(args.experiment, cp, seed, out_dir, threads=args.threads)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ScatterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
