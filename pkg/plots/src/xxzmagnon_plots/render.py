"""Render xxzmagnon CSV outputs into figures.

    render <kind> <input.csv> <output.png>

Kinds and the CSV schemas they expect (all files start with a one-line JSON
metadata header, '#'-commented):

    heatmap            t,q,value            entanglement light cone
    spectrum_stem      omega,intensity,count,class   per-spin pole spectrum
    transient_overlay  t,exact,bessel_approx         transient comparison
    edge_fit           q,arrival_time (+ '# fitted_velocity=' footer)

Figures carry no scientific assertions and no timestamps: rendering the same
input twice produces byte-identical images.  Inputs are opened read-only.
Exit 0 on success, 1 on a schema problem (the offending column is named).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # headless and deterministic

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(Exception):
    pass


def read_table(path: Path) -> tuple[dict, list[str], list[list[str]], list[str]]:
    """Split a CSV into metadata, header, data rows, and footer comments."""
    if not path.exists():
        raise SchemaError(f"input file not found: {path}")
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise SchemaError("missing metadata header line")
    try:
        meta = json.loads(lines[0][2:])
    except json.JSONDecodeError as exc:
        raise SchemaError(f"metadata header is not valid JSON: {exc}") from exc
    if len(lines) < 2:
        raise SchemaError("missing column header line")
    header = lines[1].split(",")
    rows, footers = [], []
    for line in lines[2:]:
        if line.startswith("#"):
            footers.append(line)
        elif line:
            rows.append(line.split(","))
    return meta, header, rows, footers


def _require_columns(header: list[str], expected: list[str]):
    for col in expected:
        if col not in header:
            raise SchemaError(f"missing column: {col}")
    for col in header:
        if col not in expected:
            raise SchemaError(f"unexpected column: {col}")


def _column(rows: list[list[str]], header: list[str], name: str, cast=float) -> np.ndarray:
    i = header.index(name)
    try:
        return np.array([cast(r[i]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"column {name} failed to parse: {exc}") from exc


def _new_figure():
    return plt.figure(figsize=(6.4, 4.2), dpi=130)


def _render_heatmap(meta, header, rows, footers):
    _require_columns(header, ["t", "q", "value"])
    t = _column(rows, header, "t")
    q = _column(rows, header, "q", cast=lambda s: int(s))
    v = _column(rows, header, "value")
    t_vals = np.unique(t)
    q_vals = np.unique(q)
    grid = np.full((len(q_vals), len(t_vals)), np.nan)
    ti = np.searchsorted(t_vals, t)
    qi = np.searchsorted(q_vals, q)
    grid[qi, ti] = v
    if np.isnan(grid).any():
        raise SchemaError("missing column: value (grid has holes, not a full t x q table)")

    fig = _new_figure()
    ax = fig.add_subplot()
    # spins on the vertical axis centered at the quenched site, time horizontal
    im = ax.imshow(
        grid,
        origin="lower",
        aspect="auto",
        extent=(t_vals[0], t_vals[-1], q_vals[0], q_vals[-1]),
        cmap="magma",
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label="Q_q(t)")
    ax.set_xlabel("t  [hbar/J]")
    ax.set_ylabel("spin q  [sites]")
    ax.set_title(f"entanglement light cone, N={meta.get('n')}")
    ax.set_xlim(t_vals[0], t_vals[-1])
    ax.set_ylim(q_vals[0], q_vals[-1])
    return fig


def _render_spectrum_stem(meta, header, rows, footers):
    _require_columns(header, ["omega", "intensity", "count", "class"])
    omega = _column(rows, header, "omega")
    intensity = _column(rows, header, "intensity")
    cls = _column(rows, header, "class", cast=str)

    fig = _new_figure()
    ax = fig.add_subplot()
    styles = {
        "dominant": dict(color="#1f6fb4", lw=1.4, label="dominant"),
        "suppressed": dict(color="#c2452f", lw=0.7, alpha=0.55, label="suppressed"),
    }
    for name, style in styles.items():
        sel = cls == name
        if sel.any():
            label = style.pop("label")
            ax.vlines(omega[sel], 0.0, intensity[sel], label=label, **style)
            style["label"] = label
    # circle the sign changes along the positive-frequency dominant string
    dom = np.flatnonzero(cls == "dominant")
    dom = dom[omega[dom] > 0]
    order = dom[np.argsort(-omega[dom])]
    flips = []
    for a, b in zip(order, order[1:]):
        if intensity[a] * intensity[b] < 0:
            flips.append(0.5 * (omega[a] + omega[b]))
    if flips:
        ax.plot(flips, np.zeros(len(flips)), "o", mfc="none", mec="red", ms=9,
                mew=1.5, label="sign change")
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_xlabel("omega  [J/hbar]")
    ax.set_ylabel("intensity")
    ax.set_title(f"pole spectrum, N={meta.get('n')}, q={meta.get('q')}")
    ax.legend(loc="best")
    return fig


def _render_transient_overlay(meta, header, rows, footers):
    _require_columns(header, ["t", "exact", "bessel_approx"])
    t = _column(rows, header, "t")
    exact = _column(rows, header, "exact")
    approx = _column(rows, header, "bessel_approx")

    fig = _new_figure()
    ax = fig.add_subplot()
    ax.plot(t, exact, color="#1f6fb4", lw=1.6, label="exact")
    ax.plot(t, approx, color="#c2452f", lw=1.2, ls="--", label="Bessel transient")
    ax.set_xlabel("t  [hbar/J]")
    ax.set_ylabel("Q_q(t)")
    ax.set_title(f"transient comparison, N={meta.get('n')}, q={meta.get('q')}")
    ax.legend(loc="best")
    return fig


def _render_edge_fit(meta, header, rows, footers):
    _require_columns(header, ["q", "arrival_time"])
    q = _column(rows, header, "q", cast=lambda s: int(s))
    tau = _column(rows, header, "arrival_time")
    velocity = None
    for line in footers:
        if line.startswith("# fitted_velocity="):
            velocity = float(line.split("=", 1)[1])
    if velocity is None:
        raise SchemaError("missing column: fitted_velocity footer")

    design = np.column_stack([q.astype(float), np.ones_like(tau)])
    (slope, intercept), *_ = np.linalg.lstsq(design, tau, rcond=None)

    fig = _new_figure()
    ax = fig.add_subplot()
    ax.plot(q, tau, "o", color="#1f6fb4", label="arrival times")
    ax.plot(q, slope * q + intercept, color="#c2452f", lw=1.2,
            label=f"fit: v = {velocity:.4f} J/hbar")
    ax.set_xlabel("spin q  [sites]")
    ax.set_ylabel("arrival time  [hbar/J]")
    ax.set_title(f"entanglement edge, N={meta.get('n')}")
    ax.legend(loc="best")
    return fig


KINDS = {
    "heatmap": _render_heatmap,
    "spectrum_stem": _render_spectrum_stem,
    "transient_overlay": _render_transient_overlay,
    "edge_fit": _render_edge_fit,
}


def render(kind: str, input_csv: str | Path, output_image: str | Path):
    """Build the figure for one CSV and write it as a raster image."""
    if kind not in KINDS:
        raise SchemaError(f"unknown kind {kind!r}; choose from {sorted(KINDS)}")
    meta, header, rows, footers = read_table(Path(input_csv))
    fig = KINDS[kind](meta, header, rows, footers)
    try:
        # empty metadata: no creator or timestamp chunks in the PNG
        fig.savefig(output_image, metadata={"Software": None})
    finally:
        plt.close(fig)
    return fig


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    if len(args) != 3:
        print(__doc__.strip(), file=sys.stderr)
        return 1
    kind, input_csv, output_image = args
    try:
        render(kind, input_csv, output_image)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
