"""SE-vs-SNR figures from aggregate sweep CSVs.

Consumes only the documented aggregate schema
(``scheduler,snr_db,mean_se,stderr_se,ci95_lo,ci95_hi,n``) and never
recomputes statistics.  Output is a vector-graphics file that is
byte-identical across runs: fixed SVG hash salt, no embedded date, curves
sorted by legend label, and a fixed color cycle.
"""
import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "sweepfig"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

AGGREGATE_COLUMNS = ("scheduler", "snr_db", "mean_se", "stderr_se",
                     "ci95_lo", "ci95_hi", "n")

# fixed color cycle (matplotlib 'tab10'), assigned to sorted curve labels
COLOR_CYCLE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


class SchemaError(ValueError):
    """Input CSV does not match the aggregate schema."""


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple                 # CSV paths
    output: Path                  # figure path (suffix selects the format)
    group_by: str = "scheduler"   # 'scheduler' | 'file'
    title: str = ""
    x_label: str = "SNR (dB)"
    y_label: str = "Mean sum spectral efficiency (bit/s/Hz)"


@dataclass
class Curve:
    label: str
    snr_db: list = field(default_factory=list)
    mean: list = field(default_factory=list)
    ci_lo: list = field(default_factory=list)
    ci_hi: list = field(default_factory=list)


def read_aggregate_csv(path):
    """Rows of one aggregate CSV; raises SchemaError naming missing columns."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in AGGREGATE_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = []
        for row in reader:
            rows.append({
                "scheduler": row["scheduler"],
                "snr_db": float(row["snr_db"]),
                "mean_se": float(row["mean_se"]),
                "ci95_lo": float(row["ci95_lo"]),
                "ci95_hi": float(row["ci95_hi"]),
            })
    return rows


def _file_label(path):
    stem = Path(path).stem
    return stem[:-4] if stem.endswith("_agg") else stem


def build_curves(spec):
    """Group rows into curves keyed by scheduler, file, or both."""
    curves = {}
    multi_file = len(spec.inputs) > 1
    for path in spec.inputs:
        rows = read_aggregate_csv(path)
        label_prefix = _file_label(path)
        if spec.group_by == "file":
            schedulers = {r["scheduler"] for r in rows}
            if len(schedulers) > 1:
                raise SchemaError(
                    f"{path}: group-by=file needs one scheduler per file, "
                    f"found {sorted(schedulers)}")
        for row in rows:
            if spec.group_by == "file":
                label = label_prefix
            elif multi_file:
                label = f"{label_prefix} {row['scheduler']}"
            else:
                label = row["scheduler"]
            curve = curves.setdefault(label, Curve(label=label))
            curve.snr_db.append(row["snr_db"])
            curve.mean.append(row["mean_se"])
            curve.ci_lo.append(row["ci95_lo"])
            curve.ci_hi.append(row["ci95_hi"])
    for curve in curves.values():
        order = sorted(range(len(curve.snr_db)), key=curve.snr_db.__getitem__)
        curve.snr_db = [curve.snr_db[i] for i in order]
        curve.mean = [curve.mean[i] for i in order]
        curve.ci_lo = [curve.ci_lo[i] for i in order]
        curve.ci_hi = [curve.ci_hi[i] for i in order]
    return [curves[label] for label in sorted(curves)]


def render_figures(spec):
    """Render one figure from a PlotSpec; returns the sorted curve labels."""
    curves = build_curves(spec)
    if not curves:
        print(f"warning: no data rows in {', '.join(str(p) for p in spec.inputs)}; "
              f"writing empty axes", file=sys.stderr)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, curve in enumerate(curves):
        color = COLOR_CYCLE[i % len(COLOR_CYCLE)]
        ax.fill_between(curve.snr_db, curve.ci_lo, curve.ci_hi,
                        color=color, alpha=0.2, linewidth=0)
        ax.plot(curve.snr_db, curve.mean, color=color, marker="o",
                markersize=3.5, label=curve.label)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, linewidth=0.4, alpha=0.5)
    if curves:
        ax.legend(loc="upper left", fontsize=8)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, metadata={"Date": None})
    plt.close(fig)
    return [c.label for c in curves]


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sweepfig", description="SE-vs-SNR figure from aggregate sweep CSVs")
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        type=Path, metavar="CSV", help="aggregate CSV (repeatable)")
    parser.add_argument("--out", type=Path, required=True,
                        help="output figure (.svg recommended)")
    parser.add_argument("--group-by", choices=("scheduler", "file"),
                        default="scheduler")
    parser.add_argument("--title", default="")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    spec = PlotSpec(inputs=tuple(args.inputs), output=args.out,
                    group_by=args.group_by, title=args.title)
    try:
        labels = render_figures(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {spec.output} with {len(labels)} curve(s)", file=sys.stderr)
    return 0


def entry():
    raise SystemExit(main())
