"""Render metrosim CSV datasets as figures.

One panel per CSV file, one line series per (R_a, R_b) pair; sensitivity
panels add horizontal SQL and HL reference lines taken from the dataset's
own `sql`/`hl` columns.  Styling (colors, markers) follows matplotlib
defaults and is not meaningful.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import SchemaError, Table, load_table, series_keys

KIND_COHERENCE = "coherence"
KIND_SENSITIVITY = "sensitivity"


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple[Path, ...]
    kind: str
    out_path: Path
    panel_titles: tuple[str, ...] = ()
    title: str = ""

    def __post_init__(self) -> None:
        if not self.csv_paths:
            raise ValueError("at least one CSV path is required")
        if self.kind not in (KIND_COHERENCE, KIND_SENSITIVITY):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if self.panel_titles and len(self.panel_titles) != len(self.csv_paths):
            raise ValueError("panel_titles must match csv_paths in length")


@dataclass(frozen=True)
class RenderResult:
    out_path: Path
    series_per_panel: tuple[int, ...]


def _plot_panel(ax, table: Table, kind: str) -> int:
    keys = series_keys(table)
    if not keys:
        raise SchemaError(f"no data series in {table.path}")
    theta = table.column("theta")
    y_name = "abs_R" if kind == KIND_COHERENCE else "inv_delta_theta"
    y = table.column(y_name)
    r_a = table.column("R_a")
    r_b = table.column("R_b")
    for key_a, key_b in keys:
        mask = (r_a == key_a) & (r_b == key_b)
        ax.plot(theta[mask], y[mask], label=f"$R_a$={key_a:g}, $R_b$={key_b:g}")
    ax.set_xlabel(r"$\theta$")
    if kind == KIND_COHERENCE:
        ax.set_ylabel(r"$|R|$")
        ax.set_ylim(-0.02, 1.05)
    else:
        ax.set_ylabel(r"$1/\Delta\theta$")
        sql_line = 1.0 / float(table.column("sql")[0])
        hl_line = 1.0 / float(table.column("hl")[0])
        ax.axhline(sql_line, color="gray", linestyle=":", label=f"SQL ({sql_line:g})")
        ax.axhline(hl_line, color="black", linestyle="--", label=f"HL ({hl_line:g})")
    ax.legend(fontsize=8)
    return len(keys)


def render(spec: FigureSpec) -> RenderResult:
    """Write the figure; returns the output path and series count per panel."""
    tables = [load_table(p) for p in spec.csv_paths]
    n_panels = len(tables)
    fig, axes = plt.subplots(1, n_panels, figsize=(5.2 * n_panels, 4.0), squeeze=False)
    counts = []
    for k, (ax, table) in enumerate(zip(axes[0], tables)):
        counts.append(_plot_panel(ax, table, spec.kind))
        if spec.panel_titles:
            ax.set_title(spec.panel_titles[k], fontsize=10)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)
    return RenderResult(out_path=spec.out_path, series_per_panel=tuple(counts))


PRESETS: dict[str, dict] = {
    "fig2": {
        "kind": KIND_COHERENCE,
        "panels": 2,
        "titles": ("loss on mode b", "loss on mode a"),
        "title": "coherence magnitude under single-mode loss",
    },
    "fig3": {
        "kind": KIND_COHERENCE,
        "panels": 1,
        "titles": ("$R_b$ fixed at 0.5",),
        "title": "coherence magnitude under two-mode loss",
    },
    "fig4": {
        "kind": KIND_SENSITIVITY,
        "panels": 2,
        "titles": ("loss on mode a", "loss on mode b"),
        "title": "inverse sensitivity under single-mode loss",
    },
    "sensitivity_comparison": {
        "kind": KIND_SENSITIVITY,
        "panels": 1,
        "titles": ("loss on mode b, N = 100",),
        "title": "inverse sensitivity near the working point",
    },
}


def preset_spec(preset: str, csv_paths: list[Path], out_path: Path) -> FigureSpec:
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; expected one of {', '.join(PRESETS)}")
    cfg = PRESETS[preset]
    if len(csv_paths) != cfg["panels"]:
        raise ValueError(
            f"preset {preset} needs {cfg['panels']} CSV file(s), got {len(csv_paths)}"
        )
    return FigureSpec(
        csv_paths=tuple(Path(p) for p in csv_paths),
        kind=cfg["kind"],
        out_path=Path(out_path),
        panel_titles=cfg["titles"],
        title=cfg["title"],
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit-render",
        description="Render a metrosim CSV dataset as a figure.",
    )
    parser.add_argument("--preset", choices=sorted(PRESETS), required=True)
    parser.add_argument(
        "--csv", action="append", type=Path, required=True, help="repeat once per panel"
    )
    parser.add_argument("--out", type=Path, required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        result = render(preset_spec(args.preset, args.csv, args.out))
    except (OSError, ValueError) as err:
        parser.exit(2, f"error: {err}\n")
    print(f"written {result.out_path} ({', '.join(map(str, result.series_per_panel))} series)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
