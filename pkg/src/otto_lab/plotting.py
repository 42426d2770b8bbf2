"""Plot data export: whitespace-delimited columns plus a matplotlib PNG.

A run report lists its series (name, CSV file and columns).  For a
requested series this module writes ``<series>.dat`` next to the report,
with a ``#`` header line naming the columns, and renders ``<series>.png``
from the same numbers.
"""

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import SeriesError  # noqa: E402
from .formatting import format_float, read_csv  # noqa: E402

LOG_SERIES = {"delta-gap"}


def load_report(path):
    """Read report.json from a file path or a run directory."""
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    with open(path, encoding="utf-8") as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise OSError(f"{path}: not a readable report ({exc})") from None
    return path, report


def series_data(report_path, report, which):
    """(column names, 2D array) of one series of a run report."""
    series = report.get("series", {})
    if which not in series:
        available = ", ".join(sorted(series)) or "none"
        raise SeriesError(f"series {which!r} not in report for scenario {report.get('scenario')!r}; available: {available}")
    entry = series[which]
    names, data = read_csv(report_path.parent / entry["file"])
    cols = [names.index(c) for c in entry["columns"]]
    return list(entry["columns"]), data[:, cols]


def dat_text(names, data):
    lines = ["# " + " ".join(names)]
    for row in data:
        lines.append(" ".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_plot_data(report, which):
    """Write ``<which>.dat`` and ``<which>.png`` next to the report; return both paths."""
    report_path, rep = load_report(report)
    names, data = series_data(report_path, rep, which)
    outdir = report_path.parent
    dat = outdir / f"{which}.dat"
    with open(dat, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dat_text(names, data))
    png = outdir / f"{which}.png"
    render_png(png, names, data, title=f"{rep.get('scenario', '')}: {which}", log=which in LOG_SERIES)
    return dat, png


def render_png(path, names, data, title="", log=False):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    x = data[:, 0]
    for k in range(1, data.shape[1]):
        y = data[:, k]
        if log:
            y = np.where(y > 0, y, np.nan)
        ax.plot(x, y, marker="o" if len(x) <= 16 else None, label=names[k])
    if log:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(names[0])
    ax.set_title(title)
    if data.shape[1] > 2:
        ax.legend(fontsize="small")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
