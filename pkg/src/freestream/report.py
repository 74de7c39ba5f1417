"""CSV serialization and figure rendering for experiment records.

The CSV layout is fixed: header ``method,N,quantity,l2_error,linf_error,
walltime_s``, floats printed with 17 significant digits so a parse-back
reproduces the doubles bit-exactly, rows sorted by (method, N, quantity).
Two runs of the same sweep therefore produce byte-identical files except
for the walltime column.

``render_figure`` draws the standard semilogy summary (one line per
method) next to the CSV so a sweep leaves both the numbers and the
picture behind.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .harness import ExperimentRecord

__all__ = ["emit_csv", "read_csv", "render_figure"]

_HEADER = ("method", "N", "quantity", "l2_error", "linf_error", "walltime_s")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(records, path) -> Path:
    """Write records to ``path`` in the fixed deterministic layout."""
    path = Path(path)
    rows = sorted(records, key=ExperimentRecord.sort_key)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.method,
                    str(r.degree),
                    r.quantity,
                    _fmt(r.l2_error),
                    _fmt(r.linf_error),
                    _fmt(r.walltime_s),
                ]
            )
    return path


def read_csv(path) -> list[ExperimentRecord]:
    """Parse a file written by emit_csv back into records."""
    records = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != _HEADER:
            raise ValueError(f"unexpected CSV header {header!r} in {path}")
        for row in reader:
            method, degree, quantity, l2, linf, wall = row
            records.append(
                ExperimentRecord(
                    method, int(degree), quantity, float(l2), float(linf), float(wall)
                )
            )
    return records


def _series(records, quantity_filter):
    """Group (N, value) points per method for one plotted quantity."""
    series: dict[str, dict[int, float]] = {}
    for r in records:
        value = quantity_filter(r)
        if value is None or not math.isfinite(value):
            continue
        series.setdefault(r.method, {})[r.degree] = value
    return {
        m: sorted(points.items()) for m, points in sorted(series.items()) if points
    }


def render_figure(records, csv_path, kind: str) -> Path | None:
    """Semilogy summary figure next to the CSV; returns the image path.

    ``kind`` selects the plotted quantity: "fsp" (Linf deviation of the
    total-energy variable), "metric-errors" (L2 metric error), or
    "identities" (scaled max divergence defect).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if kind == "fsp":
        pick = lambda r: r.linf_error if r.quantity == "rho_e" else None
        ylabel = "free-stream deviation, L-inf of rho e at T"
    elif kind == "metric-errors":
        pick = lambda r: r.l2_error if r.quantity == "metric_terms" else None
        ylabel = "metric terms error, L2"
    elif kind == "identities":
        pick = lambda r: r.linf_error if r.quantity == "divergence_defect" else None
        ylabel = "scaled max divergence defect"
    else:
        raise ValueError(f"unknown figure kind {kind!r}")

    series = _series(records, pick)
    if not series:
        return None

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    markers = {"cross": "s", "kopriva": "o", "mimetic-blue": "^", "mimetic-red": "v"}
    for method, points in series.items():
        ns = [n for n, _ in points]
        vals = [max(v, 1e-18) for _, v in points]
        ax.semilogy(ns, vals, marker=markers.get(method, "."), label=method)
    ax.set_xlabel("polynomial degree N")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    out = Path(csv_path).with_suffix(".png")
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
