"""Batch command-line front end.

Subcommands compute one artifact each and write CSV or JSON with a metadata
header that reproduces the resolved run configuration:

    spectrum     merged pole table for one spin
    evolve       entanglement time series of one spin
    heatmap      long-format (t, q, value) table over every spin
    derivatives  exact vs moment-derived derivative table
    transient    oracle vs squared-Bessel transient comparison
    edge         arrival-time table and fitted edge velocity
    verify       run the acceptance suite and print pass/fail per criterion

Exit codes: 0 success, 1 validation error, 2 numerical-invariant violation.
Flags override keys of an optional TOML config file; no environment
variables or network access are involved.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - version dependent
    import tomli as tomllib

from . import __version__, acceptance, analytics, spectrum
from .chain import ChainParams, amplitude_vector
from .errors import ChainError, InvariantViolationError, NumericalError, ValidationError
from .oracle import entanglement_from_amplitude, evolve_closed_form

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def _fmt(x: float) -> str:
    """17 significant digits: lossless round-trip for doubles."""
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    """Resolved options of one invocation (defaults < config file < flags)."""

    subcommand: str
    n: int = 33
    j: float = 1.0
    delta: float = 0.0
    hbar: float = 1.0
    q: int | None = None
    q_min: int | None = None
    q_max: int | None = None
    tmax: float = 10.0
    steps: int = 200
    mode: str = "full"
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    level: str = "desk"

    def params(self) -> ChainParams:
        return ChainParams(
            n_sites=self.n, coupling_j=self.j, anisotropy_delta=self.delta, hbar=self.hbar
        )

    def metadata(self) -> dict:
        meta = {
            "subcommand": self.subcommand,
            "n": self.n,
            "j": self.j,
            "delta": self.delta,
            "hbar": self.hbar,
            "q": self.q,
            "q_min": self.q_min,
            "q_max": self.q_max,
            "tmax": self.tmax,
            "steps": self.steps,
            "mode": self.mode,
            "format": self.format,
            "workers": self.workers,
            "tool_version": __version__,
        }
        return meta


def _write_csv(path: Path, meta: dict, header: list[str], rows, footers: list[str] = ()):
    with open(path, "w", newline="\n") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
        for line in footers:
            fh.write(line + "\n")


def _write_json(path: Path, meta: dict, payload: dict):
    with open(path, "w", newline="\n") as fh:
        json.dump({"metadata": meta, **payload}, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _time_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.tmax <= 0 or cfg.steps < 2:
        raise ValidationError(f"need tmax > 0 and steps >= 2, got tmax={cfg.tmax}, steps={cfg.steps}")
    return np.linspace(0.0, cfg.tmax, cfg.steps)


def _require_out(cfg: RunConfig) -> Path:
    if not cfg.out:
        raise ValidationError("--out PATH is required for this subcommand")
    return Path(cfg.out)


def _cmd_spectrum(cfg: RunConfig) -> int:
    if cfg.q is None:
        raise ValidationError("--q is required for `spectrum`")
    if cfg.mode == "full" and cfg.n > spectrum.FULL_MODE_MAX_SITES:
        raise ValidationError(
            f"full mode is limited to N <= {spectrum.FULL_MODE_MAX_SITES}; "
            f"run N={cfg.n} with --mode dominant"
        )
    spec = spectrum.enumerate_poles(cfg.params(), cfg.q, mode=cfg.mode, workers=cfg.workers)
    out = _require_out(cfg)
    if cfg.format == "csv":
        rows = (
            (_fmt(p.omega), _fmt(p.intensity), str(p.tuple_count), p.pole_class)
            for p in spec.poles
        )
        _write_csv(out, cfg.metadata(), ["omega", "intensity", "count", "class"], rows)
    else:
        _write_json(
            out,
            cfg.metadata(),
            {
                "poles": [
                    {
                        "omega": p.omega,
                        "intensity": p.intensity,
                        "count": p.tuple_count,
                        "class": p.pole_class,
                        "raw_complex_residual": p.raw_complex_residual,
                    }
                    for p in spec.poles
                ]
            },
        )
    return EXIT_OK


def _cmd_evolve(cfg: RunConfig) -> int:
    if cfg.q is None:
        raise ValidationError("--q is required for `evolve`")
    series = evolve_closed_form(cfg.params(), cfg.q, _time_grid(cfg))
    out = _require_out(cfg)
    if cfg.format == "csv":
        rows = ((_fmt(t), _fmt(v)) for t, v in zip(series.times, series.values))
        _write_csv(out, cfg.metadata(), ["t", "value"], rows)
    else:
        _write_json(
            out,
            cfg.metadata(),
            {"times": [float(t) for t in series.times], "values": [float(v) for v in series.values]},
        )
    return EXIT_OK


def _cmd_heatmap(cfg: RunConfig) -> int:
    params = cfg.params()
    grid = _time_grid(cfg)
    out = _require_out(cfg)
    rows = []
    json_rows = []
    for t in grid:
        vec = amplitude_vector(params, float(t))
        for q in params.sites():
            val = entanglement_from_amplitude(vec.site(q))
            rows.append((_fmt(t), str(q), _fmt(val)))
            json_rows.append({"t": float(t), "q": q, "value": val})
    if cfg.format == "csv":
        _write_csv(out, cfg.metadata(), ["t", "q", "value"], rows)
    else:
        _write_json(out, cfg.metadata(), {"cells": json_rows})
    return EXIT_OK


def _cmd_derivatives(cfg: RunConfig) -> int:
    if cfg.q is None and cfg.q_min is None:
        raise ValidationError("`derivatives` needs --q or a --q-min/--q-max range")
    if cfg.n > spectrum.FULL_MODE_MAX_SITES:
        raise ValidationError(
            f"derivative comparisons need full spectra (N <= {spectrum.FULL_MODE_MAX_SITES})"
        )
    if cfg.q is not None:
        q_values = [cfg.q]
    else:
        q_hi = cfg.q_max if cfg.q_max is not None else cfg.q_min
        q_values = list(range(cfg.q_min, q_hi + 1))
    params = cfg.params()
    records = []
    for q in q_values:
        if q < 1:
            raise ValidationError(f"derivative table needs q >= 1, got q={q}")
        spec = spectrum.enumerate_poles(params, q, mode="full", workers=cfg.workers)
        for kbar in range(0, q + 1):  # one row past the exactness window
            rec = analytics.derivative_exact(params, q, kbar)
            records.append(
                (rec, analytics.moment_derivative(spec, q, kbar))
            )
    out = _require_out(cfg)
    if cfg.format == "csv":
        rows = (
            (
                str(rec.q),
                str(rec.kbar),
                str(rec.order),
                _fmt(rec.exact_value),
                _fmt(mom),
                "true" if rec.exactness_flag else "false",
            )
            for rec, mom in records
        )
        _write_csv(
            out,
            cfg.metadata(),
            ["q", "kbar", "order", "exact_value", "moment_value", "exactness_flag"],
            rows,
        )
    else:
        _write_json(
            out,
            cfg.metadata(),
            {
                "records": [
                    {
                        "q": rec.q,
                        "kbar": rec.kbar,
                        "order": rec.order,
                        "exact_value": rec.exact_value,
                        "moment_value": mom,
                        "exactness_flag": rec.exactness_flag,
                    }
                    for rec, mom in records
                ]
            },
        )
    return EXIT_OK


def _cmd_transient(cfg: RunConfig) -> int:
    if cfg.q is None:
        raise ValidationError("--q is required for `transient`")
    if cfg.q < 1:
        raise ValidationError(f"transient comparison needs q >= 1, got q={cfg.q}")
    params = cfg.params()
    if 2.0 * params.coupling_j * cfg.tmax / params.hbar > analytics.BESSEL_MAX_X:
        raise ValidationError(
            f"tmax={cfg.tmax} exceeds the Bessel envelope (2 J tmax / hbar <= {analytics.BESSEL_MAX_X})"
        )
    grid = _time_grid(cfg)
    series = evolve_closed_form(params, cfg.q, grid)
    approx = [analytics.transient(params, cfg.q, float(t)) for t in grid]
    out = _require_out(cfg)
    if cfg.format == "csv":
        rows = (
            (_fmt(t), _fmt(v), _fmt(a))
            for t, v, a in zip(series.times, series.values, approx)
        )
        _write_csv(out, cfg.metadata(), ["t", "exact", "bessel_approx"], rows)
    else:
        _write_json(
            out,
            cfg.metadata(),
            {
                "times": [float(t) for t in grid],
                "exact": [float(v) for v in series.values],
                "bessel_approx": [float(a) for a in approx],
            },
        )
    return EXIT_OK


def _cmd_edge(cfg: RunConfig) -> int:
    q_min = cfg.q_min if cfg.q_min is not None else 10
    q_max = cfg.q_max if cfg.q_max is not None else 24
    if q_min < 1 or q_max < q_min:
        raise ValidationError(f"need 1 <= q_min <= q_max, got {q_min}..{q_max}")
    params = cfg.params()
    coverage = 1.3 * 2.0 * q_max * params.hbar / (math.e * params.coupling_j)
    # widen under-specified grids so interpolation near the threshold is sound,
    # and reflect the values actually used in the metadata header
    cfg.tmax = max(cfg.tmax, coverage + 0.25)
    cfg.steps = max(cfg.steps, 2000)
    cfg.q_min, cfg.q_max = q_min, q_max
    grid = np.linspace(0.0, cfg.tmax, cfg.steps)
    series = {q: evolve_closed_form(params, q, grid) for q in range(q_min, q_max + 1)}
    estimate = analytics.edge_fit(series, params)
    out = _require_out(cfg)
    if cfg.format == "csv":
        rows = ((str(q), _fmt(tau)) for q, tau in estimate.per_q)
        _write_csv(
            out,
            cfg.metadata(),
            ["q", "arrival_time"],
            rows,
            footers=[f"# fitted_velocity={_fmt(estimate.fitted_velocity)}"],
        )
    else:
        _write_json(
            out,
            cfg.metadata(),
            {
                "threshold_rule": estimate.threshold_rule,
                "per_q": [{"q": q, "arrival_time": tau} for q, tau in estimate.per_q],
                "fitted_velocity": estimate.fitted_velocity,
                "fit_residual": estimate.fit_residual,
            },
        )
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    results = acceptance.run_all(level=cfg.level)
    print(acceptance.format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "evolve": _cmd_evolve,
    "heatmap": _cmd_heatmap,
    "derivatives": _cmd_derivatives,
    "transient": _cmd_transient,
    "edge": _cmd_edge,
    "verify": _cmd_verify,
}

_CONFIG_KEYS = (
    "n", "j", "delta", "hbar", "q", "q_min", "q_max",
    "tmax", "steps", "mode", "out", "format", "workers", "level",
)

_DEFAULTS = RunConfig(subcommand="")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xxzmagnon",
        description="Single-magnon entanglement dynamics of a periodic Heisenberg XXZ chain",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="TOML file with the same keys as the flags")
        p.add_argument("--n", type=int, default=None, help="number of sites (odd, >= 3)")
        p.add_argument("--j", type=float, default=None, help="coupling J (> 0)")
        p.add_argument("--delta", type=float, default=None, help="anisotropy")
        p.add_argument("--hbar", type=float, default=None, help="Planck constant (> 0)")
        p.add_argument("--q", type=int, default=None, help="spin index (centered)")
        p.add_argument("--q-min", dest="q_min", type=int, default=None)
        p.add_argument("--q-max", dest="q_max", type=int, default=None)
        p.add_argument("--tmax", type=float, default=None, help="time grid end, in hbar/J")
        p.add_argument("--steps", type=int, default=None, help="time grid points (>= 2)")
        p.add_argument("--mode", choices=["full", "dominant"], default=None)
        p.add_argument("--out", type=str, default=None, help="output file path")
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--workers", type=int, default=None, help="enumeration worker threads")
        if name == "verify":
            p.add_argument("--level", choices=["desk", "quick"], default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ValidationError(f"config file not found: {path}")
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        unknown = set(raw) - set(_CONFIG_KEYS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        file_values = raw
    cfg = RunConfig(subcommand=args.subcommand)
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            value = flag
        elif key in file_values:
            value = file_values[key]
        else:
            value = getattr(_DEFAULTS, key)
        setattr(cfg, key, value)
    if cfg.mode == "dominant":
        cfg.mode = "dominant_only"
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _COMMANDS[args.subcommand](cfg)
    except (ValidationError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InvariantViolationError, NumericalError) as exc:
        print(f"numerical-invariant violation: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
