from pathlib import Path

import numpy as np
import pytest

from rachplots import (FigureSpec, SchemaError, build_figure, load_spec_file,
                       read_ecdf, read_timeseries, render)
from rachplots.figures import main

DATA = Path(__file__).parent / "data"


def spec(kind, inputs, out, **kw):
    return FigureSpec(kind=kind, inputs=tuple(str(DATA / p) for p in inputs),
                      output=str(out), **kw)


# -- readers ------------------------------------------------------------------

def test_read_ecdf_golden():
    x, mean, runs = read_ecdf(DATA / "ecdf_N100.csv")
    assert x[0] == 0.012 and x[-1] == 48.0
    assert runs.shape == (2, 10)
    assert mean[-1] == 1.0


def test_empty_file_error_names_file(tmp_path):
    empty = tmp_path / "ecdf_empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError, match="ecdf_empty.csv"):
        read_ecdf(empty)
    header_only = tmp_path / "ecdf_bare.csv"
    header_only.write_text("delay_s,F_mean,F_run_0\n")
    with pytest.raises(SchemaError, match="ecdf_bare.csv.*no data rows"):
        read_ecdf(header_only)


def test_schema_mismatch_names_column(tmp_path):
    bad = tmp_path / "ecdf_bad.csv"
    bad.write_text("delay_s,F_avg,F_run_0\n0.1,0.5,0.5\n")
    with pytest.raises(SchemaError, match="F_mean.*F_avg"):
        read_ecdf(bad)
    bad_run = tmp_path / "ecdf_badrun.csv"
    bad_run.write_text("delay_s,F_mean,F_walk_0\n0.1,0.5,0.5\n")
    with pytest.raises(SchemaError, match="F_run_0"):
        read_ecdf(bad_run)


def test_non_numeric_cell_rejected(tmp_path):
    bad = tmp_path / "timeseries_N1.csv"
    bad.write_text("bin_start_s,successes_mean,successes_run_0\n0.0,oops,1\n")
    with pytest.raises(SchemaError, match="non-numeric"):
        read_timeseries(bad)


# -- figures ------------------------------------------------------------------

def test_ecdf_panel_log_axis_dashed_runs_solid_mean(tmp_path):
    fig = build_figure(spec("ecdf_panel", ["ecdf_N100.csv"], tmp_path / "p.png"))
    ax = fig.axes[0]
    assert ax.get_xscale() == "log"
    styles = [line.get_linestyle() for line in ax.lines]
    assert styles.count("--") == 2  # one dashed curve per run
    assert styles.count("-") == 1   # solid mean
    solid = [line for line in ax.lines if line.get_linestyle() == "-"][0]
    _, mean, _ = read_ecdf(DATA / "ecdf_N100.csv")
    assert np.array_equal(solid.get_ydata(), mean)


def test_ecdf_overlay_one_curve_per_population(tmp_path):
    fig = build_figure(spec("ecdf_overlay", ["ecdf_N100.csv", "ecdf_N200.csv"],
                            tmp_path / "o.png"))
    ax = fig.axes[0]
    assert ax.get_xscale() == "log"
    assert len(ax.lines) == 2
    assert [line.get_label() for line in ax.lines] == ["N = 100", "N = 200"]


def test_goodput_sums_match_csv_totals(tmp_path):
    files = ["timeseries_N100.csv", "timeseries_N200.csv"]
    fig = build_figure(spec("goodput", files, tmp_path / "g.png"))
    ax = fig.axes[0]
    assert len(ax.lines) == 2
    for line, name in zip(ax.lines, files):
        _, mean, _ = read_timeseries(DATA / name)
        assert float(np.sum(line.get_ydata())) == pytest.approx(float(mean.sum()))


def test_deployment_scatter(tmp_path):
    out = tmp_path / "d.png"
    path = render(spec("deployment", ["deployment_N12.csv"], out))
    assert path.exists() and path.stat().st_size > 0


def test_render_writes_files(tmp_path):
    out = tmp_path / "fig.png"
    assert render(spec("ecdf_panel", ["ecdf_N100.csv"], out)).exists()


def test_regenerated_figure_has_identical_dataset(tmp_path):
    s = spec("ecdf_panel", ["ecdf_N100.csv"], tmp_path / "p.png")
    a, b = build_figure(s), build_figure(s)
    for la, lb in zip(a.axes[0].lines, b.axes[0].lines):
        assert np.array_equal(la.get_xydata(), lb.get_xydata())


def test_unknown_kind_rejected():
    with pytest.raises(SchemaError, match="unknown figure kind"):
        FigureSpec(kind="pie", inputs=("x.csv",), output="x.png")
    with pytest.raises(SchemaError, match="at least one input"):
        FigureSpec(kind="goodput", inputs=(), output="x.png")


# -- spec files and CLI -------------------------------------------------------

def test_golden_spec_file_renders_everything(tmp_path):
    specs = load_spec_file(DATA / "figures.yaml")
    assert [s.kind for s in specs] == ["ecdf_panel", "ecdf_overlay",
                                       "goodput", "deployment"]
    # redirect outputs into tmp
    for s in specs:
        out = tmp_path / Path(s.output).name
        path = render(FigureSpec(kind=s.kind, inputs=s.inputs, output=str(out),
                                 title=s.title, labels=s.labels, axis=s.axis))
        assert path.exists() and path.stat().st_size > 0


def test_spec_file_errors(tmp_path):
    bad = tmp_path / "spec.yaml"
    bad.write_text("- {kind: goodput, output: x.png}\n")
    with pytest.raises(SchemaError, match="missing key"):
        load_spec_file(bad)
    bad.write_text("- {kind: goodput, inputs: [a.csv], output: x.png, extra: 1}\n")
    with pytest.raises(SchemaError, match="unknown keys"):
        load_spec_file(bad)
    bad.write_text("kind: goodput\n")
    with pytest.raises(SchemaError, match="list"):
        load_spec_file(bad)


def test_cli_renders_spec(tmp_path, capsys):
    spec_file = tmp_path / "figs.yaml"
    spec_file.write_text(
        f"- kind: goodput\n"
        f"  inputs: [{DATA / 'timeseries_N100.csv'}]\n"
        f"  output: {tmp_path / 'g.png'}\n")
    assert main([str(spec_file)]) == 0
    assert (tmp_path / "g.png").exists()
    assert "wrote" in capsys.readouterr().out


def test_cli_reports_schema_errors(tmp_path, capsys):
    empty = tmp_path / "ecdf_N5.csv"
    empty.write_text("")
    spec_file = tmp_path / "figs.yaml"
    spec_file.write_text(f"- kind: ecdf_panel\n  inputs: [{empty}]\n"
                         f"  output: {tmp_path / 'e.png'}\n")
    assert main([str(spec_file)]) == 1
    assert "ecdf_N5.csv" in capsys.readouterr().err
