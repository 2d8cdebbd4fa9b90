"""Acceptance gate for the figure pipeline, driven by the golden CSVs."""

from pathlib import Path

import numpy as np
import pytest

from rachplots import FigureSpec, build_figure, read_ecdf, read_timeseries, render

DATA = Path(__file__).parent / "data"


def test_figure_pipeline_acceptance(tmp_path):
    # ECDF figure: log x-axis, dashed per-run curves, solid mean curve.
    ecdf_spec = FigureSpec(kind="ecdf_panel",
                           inputs=(str(DATA / "ecdf_N100.csv"),),
                           output=str(tmp_path / "ecdf.png"))
    fig = build_figure(ecdf_spec)
    ax = fig.axes[0]
    assert ax.get_xscale() == "log"
    styles = [line.get_linestyle() for line in ax.lines]
    assert styles.count("--") == 2 and styles.count("-") == 1
    solid = [li for li in ax.lines if li.get_linestyle() == "-"][0]
    _, mean, _ = read_ecdf(DATA / "ecdf_N100.csv")
    assert np.array_equal(solid.get_ydata(), mean)
    assert render(ecdf_spec).exists()

    # Goodput figure: the plotted sums equal the CSV success totals.
    files = ("timeseries_N100.csv", "timeseries_N200.csv")
    goodput_spec = FigureSpec(kind="goodput",
                              inputs=tuple(str(DATA / f) for f in files),
                              output=str(tmp_path / "goodput.png"))
    gfig = build_figure(goodput_spec)
    for line, name in zip(gfig.axes[0].lines, files):
        _, mean, _ = read_timeseries(DATA / name)
        assert float(np.sum(line.get_ydata())) == pytest.approx(float(mean.sum()))
    assert render(goodput_spec).exists()

    print("[PASS] golden CSVs render: log-x ECDF with dashed runs + solid mean; "
          "goodput sums match the CSV totals")
