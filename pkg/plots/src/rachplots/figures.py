"""Turn simulator CSV outputs into the evaluation figures.

Four figure kinds, all driven by FigureSpec (or a YAML spec file, so CI can
render golden thumbnails from canned CSVs without the simulator):

  ecdf_panel    one population: per-run ECDFs dashed, mean solid, log x-axis
  ecdf_overlay  mean ECDF of several populations in one frame, log x-axis
  goodput       successes per second versus time, one curve per population
  deployment    device positions colored by serving sector

The readers validate the exact column layout the simulator writes and name
the offending file/column on any mismatch.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import yaml  # noqa: E402

FIGURE_KINDS = ("ecdf_panel", "ecdf_overlay", "goodput", "deployment")


class SchemaError(ValueError):
    """Input file does not match the simulator's CSV schemas."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str
    title: str | None = None
    labels: tuple[str, ...] = ()
    axis: dict = field(default_factory=dict)  # xlim/ylim/xlabel/ylabel overrides

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r} "
                              f"(expected one of {FIGURE_KINDS})")
        if not self.inputs:
            raise SchemaError(f"{self.kind}: needs at least one input file")


def _read_csv(path: str | Path, leading: tuple[str, ...], run_prefix: str | None):
    """Read one simulator CSV: fixed leading columns plus optional
    ``<run_prefix>0..R-1`` columns.  Returns (data as float ndarray, header)."""
    path = Path(path)
    try:
        with open(path) as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: empty file (missing header)")
    header, data = rows[0], rows[1:]
    for i, name in enumerate(leading):
        if i >= len(header) or header[i] != name:
            got = header[i] if i < len(header) else "<missing>"
            raise SchemaError(f"{path}: expected column {i} to be '{name}', got '{got}'")
    if run_prefix is not None:
        for j, name in enumerate(header[len(leading):]):
            if name != f"{run_prefix}{j}":
                raise SchemaError(f"{path}: expected column '{run_prefix}{j}', "
                                  f"got '{name}'")
    if not data:
        raise SchemaError(f"{path}: no data rows")
    try:
        values = np.array([[float(v) for v in row] for row in data])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric cell: {exc}") from exc
    if values.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    return values, header


def read_ecdf(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """-> (delay_s, F_mean, F_runs[R, n])."""
    values, header = _read_csv(path, ("delay_s", "F_mean"), "F_run_")
    return values[:, 0], values[:, 1], values[:, 2:].T


def read_timeseries(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """-> (bin_start_s, successes_mean, successes_runs[R, n])."""
    values, header = _read_csv(path, ("bin_start_s", "successes_mean"),
                               "successes_run_")
    return values[:, 0], values[:, 1], values[:, 2:].T


def read_deployment(path) -> np.ndarray:
    values, _ = _read_csv(
        path, ("id", "x", "y", "z", "building_id", "floor", "serving_sector"), None)
    return values


def _label_from(path: str, given: str | None) -> str:
    if given:
        return given
    m = re.search(r"N(\d+)", Path(path).stem)
    return f"N = {m.group(1)}" if m else Path(path).stem


def _steps(ax, x, y, **kw):
    # ECDFs are right-continuous step functions.
    return ax.step(x, y, where="post", **kw)[0]


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib Figure for a spec (no file written)."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    labels = list(spec.labels) + [None] * (len(spec.inputs) - len(spec.labels))

    if spec.kind == "ecdf_panel":
        x, mean, runs = read_ecdf(spec.inputs[0])
        for i, run in enumerate(runs):
            _steps(ax, x, run, linestyle="--", linewidth=0.7, color="0.65",
                   label="runs" if i == 0 else None)
        _steps(ax, x, mean, linestyle="-", linewidth=1.8, color="C0", label="mean")
        ax.set_xscale("log")
        ax.set_xlabel("access delay [s]")
        ax.set_ylabel("ECDF")
        ax.legend(loc="lower right")
    elif spec.kind == "ecdf_overlay":
        for path, label in zip(spec.inputs, labels):
            x, mean, _ = read_ecdf(path)
            _steps(ax, x, mean, linestyle="-", linewidth=1.4,
                   label=_label_from(path, label))
        ax.set_xscale("log")
        ax.set_xlabel("access delay [s]")
        ax.set_ylabel("ECDF")
        ax.legend(loc="lower right", fontsize=8)
    elif spec.kind == "goodput":
        for path, label in zip(spec.inputs, labels):
            t, mean, _ = read_timeseries(path)
            ax.plot(t, mean, linewidth=1.4, label=_label_from(path, label))
        ax.set_xlabel("time [s]")
        ax.set_ylabel("successful accesses per second")
        ax.legend(loc="upper right", fontsize=8)
    elif spec.kind == "deployment":
        rows = read_deployment(spec.inputs[0])
        sectors = rows[:, 6].astype(int)
        for s in sorted(set(sectors)):
            sel = sectors == s
            ax.scatter(rows[sel, 0], rows[sel, 1], s=9, marker="^",
                       label=f"sector {s}")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_aspect("equal")
        ax.legend(loc="upper right", fontsize=8)

    ax.grid(True, which="both", alpha=0.3)
    if spec.title:
        ax.set_title(spec.title)
    if "xlim" in spec.axis:
        ax.set_xlim(*spec.axis["xlim"])
    if "ylim" in spec.axis:
        ax.set_ylim(*spec.axis["ylim"])
    if "xlabel" in spec.axis:
        ax.set_xlabel(spec.axis["xlabel"])
    if "ylabel" in spec.axis:
        ax.set_ylabel(spec.axis["ylabel"])
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render one figure to its output path."""
    fig = build_figure(spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=140)
    plt.close(fig)
    return out


def load_spec_file(path: str | Path, base_dir: str | Path | None = None) -> list[FigureSpec]:
    """YAML spec file: a list of figure mappings.  Relative input/output
    paths resolve against the spec file's directory (or ``base_dir``)."""
    path = Path(path)
    base = Path(base_dir) if base_dir is not None else path.parent
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: does not parse: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaError(f"{path}: expected a list of figure specs")
    specs = []
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise SchemaError(f"{path}: entry {i} is not a mapping")
        unknown = set(item) - {"kind", "inputs", "output", "title", "labels", "axis"}
        if unknown:
            raise SchemaError(f"{path}: entry {i} has unknown keys {sorted(unknown)}")
        try:
            inputs = tuple(str(base / p) for p in item["inputs"])
            output = str(base / item["output"])
            specs.append(FigureSpec(
                kind=item["kind"], inputs=inputs, output=output,
                title=item.get("title"), labels=tuple(item.get("labels", ())),
                axis=dict(item.get("axis", {}))))
        except KeyError as exc:
            raise SchemaError(f"{path}: entry {i} is missing key {exc}") from exc
    return specs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rachplots",
        description="Render simulator result CSVs into figures.")
    parser.add_argument("spec", help="YAML file with a list of figure specs")
    parser.add_argument("--base-dir", default=None,
                        help="resolve relative paths against this directory")
    args = parser.parse_args(argv)
    try:
        specs = load_spec_file(args.spec, args.base_dir)
        for spec in specs:
            out = render(spec)
            print(f"wrote {out}")
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
