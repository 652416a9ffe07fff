"""End-to-end checks for the figure scripts.

Sample CSVs are produced by the xxzmagnon CLI (the only interface between
the two packages), rendered through both the Python API and the console
entry point.
"""

import subprocess
import sys

import pytest

from xxzmagnon_plots.render import KINDS, main, read_table, render


def run_primary_cli(args):
    proc = subprocess.run(
        [sys.executable, "-m", "xxzmagnon", *args], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def sample_csvs(tmp_path_factory):
    base = tmp_path_factory.mktemp("csv")
    files = {
        "heatmap": base / "heatmap.csv",
        "spectrum_stem": base / "spectrum.csv",
        "transient_overlay": base / "transient.csv",
        "edge_fit": base / "edge.csv",
    }
    run_primary_cli(["heatmap", "--n", "9", "--tmax", "6", "--steps", "25",
                     "--out", str(files["heatmap"])])
    run_primary_cli(["spectrum", "--n", "33", "--q", "2", "--out", str(files["spectrum_stem"])])
    run_primary_cli(["transient", "--n", "33", "--q", "2", "--tmax", "2", "--steps", "40",
                     "--out", str(files["transient_overlay"])])
    run_primary_cli(["edge", "--n", "201", "--q-min", "5", "--q-max", "8", "--steps", "2500",
                     "--out", str(files["edge_fit"])])
    return files


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_each_kind_renders_and_is_reproducible(kind, sample_csvs, tmp_path):
    out1 = tmp_path / f"{kind}_1.png"
    out2 = tmp_path / f"{kind}_2.png"
    assert main([kind, str(sample_csvs[kind]), str(out1)]) == 0
    assert main([kind, str(sample_csvs[kind]), str(out2)]) == 0
    blob = out1.read_bytes()
    assert len(blob) > 0
    assert blob == out2.read_bytes()  # reruns are byte-identical


def test_console_entry_point(sample_csvs, tmp_path):
    out = tmp_path / "heat.png"
    proc = subprocess.run(
        [sys.executable, "-m", "xxzmagnon_plots.render", "heatmap",
         str(sample_csvs["heatmap"]), str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.stat().st_size > 0


def test_heatmap_axes_match_data_ranges(sample_csvs, tmp_path):
    fig = render("heatmap", sample_csvs["heatmap"], tmp_path / "h.png")
    meta, header, rows, _ = read_table(sample_csvs["heatmap"])
    ts = sorted({float(r[0]) for r in rows})
    qs = sorted({int(r[1]) for r in rows})
    ax = fig.axes[0]
    assert ax.get_xlim() == (ts[0], ts[-1])
    assert ax.get_ylim() == (qs[0], qs[-1])


def test_spectrum_legend_has_both_classes(sample_csvs, tmp_path):
    fig = render("spectrum_stem", sample_csvs["spectrum_stem"], tmp_path / "s.png")
    labels = {t.get_text() for t in fig.axes[0].get_legend().get_texts()}
    assert {"dominant", "suppressed"} <= labels


def test_transient_overlay_has_two_curves_on_shared_axis(sample_csvs, tmp_path):
    fig = render("transient_overlay", sample_csvs["transient_overlay"], tmp_path / "t.png")
    ax = fig.axes[0]
    assert len(ax.get_lines()) == 2
    x0 = ax.get_lines()[0].get_xdata()
    x1 = ax.get_lines()[1].get_xdata()
    assert (x0 == x1).all()


def test_schema_mismatch_names_the_column(sample_csvs, tmp_path, capsys):
    # feed a transient CSV to the heatmap renderer: 'q' is missing
    code = main(["heatmap", str(sample_csvs["transient_overlay"]), str(tmp_path / "x.png")])
    err = capsys.readouterr().err
    assert code == 1
    assert "missing column: q" in err


def test_missing_metadata_header_is_rejected(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,q,value\n0.0,0,0.0\n")
    assert main(["heatmap", str(bad), str(tmp_path / "x.png")]) == 1
    assert "metadata header" in capsys.readouterr().err


def test_unknown_kind_is_rejected(sample_csvs, tmp_path, capsys):
    assert main(["contour", str(sample_csvs["heatmap"]), str(tmp_path / "x.png")]) == 1
    assert "unknown kind" in capsys.readouterr().err


def test_edge_fit_requires_velocity_footer(tmp_path, capsys):
    clipped = tmp_path / "edge_nofooter.csv"
    clipped.write_text('# {"n": 201}\nq,arrival_time\n5,4.0\n6,5.0\n')
    assert main(["edge_fit", str(clipped), str(tmp_path / "x.png")]) == 1
    assert "fitted_velocity" in capsys.readouterr().err
