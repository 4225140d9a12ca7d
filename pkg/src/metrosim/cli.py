"""Config-driven experiment runner: parameter sweeps, figure datasets, validation.

Everything is computed from the closed forms in :mod:`metrosim.analytic`
(which the `validate` subcommand certifies against the brute-force oracle),
so sweeps at N = 25 or 100 cost microseconds per point.  Output is CSV:
UTF-8, comma-separated, '.' decimal, 17 significant digits, with
'#'-prefixed metadata lines above the header row.  Runs are fully
deterministic -- the same spec produces byte-identical files.

Subcommands::

    metrosim sweep --config spec.json --out DIR
    metrosim validate [--json FILE] [--max-n 8] [--w-convention difference]
    metrosim figure --id {fig2,fig3,fig4,sensitivity_comparison} --out DIR

The METROSIM_THREADS environment variable caps evaluation parallelism.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .analytic import (
    VanishingDerivative,
    coherence_R,
    hl,
    lossy_population,
    sensitivity,
    sql,
)
from .oracle import _map_ordered, crosscheck
from .protocol import LossConfig

COLUMNS = (
    "N",
    "theta",
    "R_a",
    "R_b",
    "abs_R",
    "arg_R",
    "P_down",
    "delta_theta_paper",
    "delta_theta_exact",
    "inv_delta_theta",
    "sql",
    "hl",
)

W_CONVENTION_NOTE = (
    "coherence model: R = (u^2 e^(i theta) + v^2 e^(-i theta) + w)^N "
    "with w = (R_b - R_a)/2 (validated against the brute-force oracle)"
)
SENSITIVITY_NOTE = (
    "delta_theta columns: contrast-phase approximation (paper) and full error "
    "propagation (exact); 'inf' marks fringe extrema with vanishing slope; "
    "inv_delta_theta = 1/delta_theta_paper"
)


class SweepSpecError(ValueError):
    """Invalid sweep configuration; the message names the offending field."""


@dataclass(frozen=True)
class ThetaGrid:
    start: float
    stop: float
    steps: int

    def values(self) -> tuple[float, ...]:
        if self.steps == 1:
            return (self.start,)
        step = (self.stop - self.start) / (self.steps - 1)
        return tuple(self.start + k * step for k in range(self.steps))


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian sweep over excitation numbers, loss rates, and a phase grid."""

    n_values: tuple[int, ...]
    theta: ThetaGrid
    loss_a: tuple[float, ...]
    loss_b: tuple[float, ...]
    outputs: tuple[str, ...] = COLUMNS

    def __post_init__(self) -> None:
        if not self.n_values:
            raise SweepSpecError("N: grid must be non-empty")
        for n in self.n_values:
            if not isinstance(n, int) or n < 1:
                raise SweepSpecError(f"N: entries must be integers >= 1, got {n!r}")
        if self.theta.steps < 1:
            raise SweepSpecError(f"theta.steps: must be >= 1, got {self.theta.steps}")
        if self.theta.start != self.theta.stop and self.theta.steps < 2:
            raise SweepSpecError("theta.steps: must be >= 2 when start != stop")
        for name, rates in (("loss_a", self.loss_a), ("loss_b", self.loss_b)):
            if not rates:
                raise SweepSpecError(f"{name}: grid must be non-empty")
            for k, rate in enumerate(rates):
                if not 0.0 <= rate <= 1.0:
                    raise SweepSpecError(f"{name}[{k}]: rate {rate} outside [0, 1]")
        if not self.outputs:
            raise SweepSpecError("outputs: must select at least one column")
        for col in self.outputs:
            if col not in COLUMNS:
                raise SweepSpecError(f"outputs: unknown column {col!r}; known: {', '.join(COLUMNS)}")

    @classmethod
    def from_mapping(cls, data: dict) -> "SweepSpec":
        known = {"N", "theta", "loss_a", "loss_b", "outputs"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SweepSpecError(f"unknown config fields: {', '.join(unknown)}")
        for required in ("N", "theta", "loss_a", "loss_b"):
            if required not in data:
                raise SweepSpecError(f"{required}: field is required")
        theta = data["theta"]
        if not isinstance(theta, dict) or set(theta) != {"start", "stop", "steps"}:
            raise SweepSpecError("theta: expected an object with keys start, stop, steps")
        return cls(
            n_values=tuple(data["N"]),
            theta=ThetaGrid(float(theta["start"]), float(theta["stop"]), int(theta["steps"])),
            loss_a=tuple(float(r) for r in data["loss_a"]),
            loss_b=tuple(float(r) for r in data["loss_b"]),
            outputs=tuple(data.get("outputs", COLUMNS)),
        )

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise SweepSpecError(f"config is not valid JSON (line {err.lineno}: {err.msg})") from err
        if not isinstance(data, dict):
            raise SweepSpecError("config root must be a JSON object")
        return cls.from_mapping(data)


@dataclass(frozen=True)
class ResultRecord:
    """One sweep row; column meanings match COLUMNS."""

    n: int
    theta: float
    r_a: float
    r_b: float
    abs_r: float
    arg_r: float
    p_down: float
    delta_theta_paper: float
    delta_theta_exact: float
    inv_delta_theta: float
    sql: float
    hl: float

    def as_row(self) -> dict[str, float | int]:
        return {
            "N": self.n,
            "theta": self.theta,
            "R_a": self.r_a,
            "R_b": self.r_b,
            "abs_R": self.abs_r,
            "arg_R": self.arg_r,
            "P_down": self.p_down,
            "delta_theta_paper": self.delta_theta_paper,
            "delta_theta_exact": self.delta_theta_exact,
            "inv_delta_theta": self.inv_delta_theta,
            "sql": self.sql,
            "hl": self.hl,
        }

    @classmethod
    def from_row(cls, row: dict[str, float | int]) -> "ResultRecord":
        return cls(
            n=int(row["N"]),
            theta=float(row["theta"]),
            r_a=float(row["R_a"]),
            r_b=float(row["R_b"]),
            abs_r=float(row["abs_R"]),
            arg_r=float(row["arg_R"]),
            p_down=float(row["P_down"]),
            delta_theta_paper=float(row["delta_theta_paper"]),
            delta_theta_exact=float(row["delta_theta_exact"]),
            inv_delta_theta=float(row["inv_delta_theta"]),
            sql=float(row["sql"]),
            hl=float(row["hl"]),
        )


def evaluate_point(n: int, theta: float, r_a: float, r_b: float) -> ResultRecord:
    """Closed-form evaluation of one grid point.

    Fringe extrema where the slope vanishes are recorded as
    delta_theta = inf (and inv_delta_theta = 0).
    """
    loss = LossConfig(r_a, r_b)
    r = coherence_R(n, theta, loss)
    try:
        d_paper = sensitivity(n, theta, loss, method="paper_approx").delta_theta_paper
    except VanishingDerivative:
        d_paper = math.inf
    try:
        d_exact = sensitivity(n, theta, loss, method="exact").delta_theta_exact
    except VanishingDerivative:
        d_exact = math.inf
    return ResultRecord(
        n=n,
        theta=theta,
        r_a=r_a,
        r_b=r_b,
        abs_r=abs(r),
        arg_r=cmath.phase(r),
        p_down=lossy_population(n, theta, loss),
        delta_theta_paper=d_paper,
        delta_theta_exact=d_exact,
        inv_delta_theta=0.0 if math.isinf(d_paper) else 1.0 / d_paper,
        sql=sql(n),
        hl=hl(n),
    )


def run_sweep(spec: SweepSpec) -> list[ResultRecord]:
    """Evaluate the Cartesian grid, sorted by (N, R_a, R_b, theta)."""
    thetas = spec.theta.values()
    points = [
        (n, theta, r_a, r_b)
        for n in sorted(spec.n_values)
        for r_a in sorted(spec.loss_a)
        for r_b in sorted(spec.loss_b)
        for theta in thetas
    ]
    return _map_ordered(lambda p: evaluate_point(*p), points)


def _format_value(value: float | int) -> str:
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def write_records(
    records: Iterable[ResultRecord],
    path: Path,
    columns: Sequence[str] = COLUMNS,
    metadata: Sequence[str] = (),
) -> None:
    lines = [f"# {note}" for note in metadata]
    lines.append(",".join(columns))
    for record in records:
        row = record.as_row()
        lines.append(",".join(_format_value(row[col]) for col in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_records(path: Path) -> tuple[list[str], list[ResultRecord]]:
    """Parse a full-schema CSV back into records; inverse of write_records."""
    metadata: list[str] = []
    header: list[str] | None = None
    records: list[ResultRecord] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line.startswith("#"):
            metadata.append(line[1:].strip())
            continue
        if header is None:
            header = line.split(",")
            missing = [col for col in COLUMNS if col not in header]
            if missing:
                raise ValueError(f"CSV {path} lacks required columns: {', '.join(missing)}")
            continue
        values = line.split(",")
        row = {col: (int(v) if col == "N" else float(v)) for col, v in zip(header, values)}
        records.append(ResultRecord.from_row(row))
    if header is None:
        raise ValueError(f"CSV {path} contains no header row")
    return metadata, records


FIGURE_IDS = ("fig2", "fig3", "fig4", "sensitivity_comparison")

_LOSS_SET = (0.1, 0.3, 0.5)
_LOSS_SET_WITH_ZERO = (0.0, 0.1, 0.3, 0.5)


def _figure_specs(fig_id: str) -> list[tuple[str, str, SweepSpec]]:
    """(file name, description, sweep) per output file of the preset.

    Loss-rate sets {0.1, 0.3, 0.5} and the phase grids are package defaults;
    presets with a single lossy mode are emitted in both orientations where
    the swap symmetry makes them equivalent up to theta -> theta + pi.
    """
    theta_full = ThetaGrid(0.0, math.pi, 201)
    theta_open = ThetaGrid(math.pi / 200.0, math.pi, 200)  # (0, pi], avoids the theta=0 extremum
    if fig_id == "fig2":
        return [
            (
                "fig2_loss_mode_b.csv",
                "coherence magnitude vs phase, loss on mode b only (N=25)",
                SweepSpec((25,), theta_full, (0.0,), _LOSS_SET),
            ),
            (
                "fig2_loss_mode_a.csv",
                "coherence magnitude vs phase, loss on mode a only (N=25)",
                SweepSpec((25,), theta_full, _LOSS_SET, (0.0,)),
            ),
        ]
    if fig_id == "fig3":
        return [
            (
                "fig3_mixed_loss.csv",
                "coherence magnitude vs phase, R_b fixed at 0.5, varying R_a (N=25)",
                SweepSpec((25,), theta_full, _LOSS_SET_WITH_ZERO, (0.5,)),
            )
        ]
    if fig_id == "fig4":
        return [
            (
                "fig4_loss_mode_a.csv",
                "inverse sensitivity vs phase, loss on mode a only (N=25)",
                SweepSpec((25,), theta_open, _LOSS_SET_WITH_ZERO, (0.0,)),
            ),
            (
                "fig4_loss_mode_b.csv",
                "inverse sensitivity vs phase, loss on mode b only (N=25)",
                SweepSpec((25,), theta_open, (0.0,), _LOSS_SET_WITH_ZERO),
            ),
        ]
    if fig_id == "sensitivity_comparison":
        return [
            (
                "sensitivity_comparison.csv",
                "inverse sensitivity vs phase near theta=0, loss on mode b only (N=100), "
                "with SQL and HL reference columns",
                SweepSpec((100,), ThetaGrid(0.001, 0.2, 200), (0.0,), (0.0, 0.1, 0.5)),
            )
        ]
    raise ValueError(f"unknown figure id {fig_id!r}; expected one of {', '.join(FIGURE_IDS)}")


def figure_data(fig_id: str, out_dir: Path) -> list[Path]:
    """Write the preset CSV(s) for one figure; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, description, spec in _figure_specs(fig_id):
        records = run_sweep(spec)
        metadata = (
            f"metrosim figure data: {fig_id}",
            description,
            W_CONVENTION_NOTE,
            SENSITIVITY_NOTE,
            "columns: " + ",".join(COLUMNS),
        )
        path = out_dir / name
        write_records(records, path, metadata=metadata)
        written.append(path)
    return written


def run_validate(
    json_path: Path | None = None,
    max_n: int = 8,
    w_convention: str = "difference",
) -> int:
    """Run the oracle crosscheck; exit status 0 iff every claim holds."""
    report = crosscheck(max_n=max_n, w_convention=w_convention)
    print(report.to_text())
    if not report.passed:
        print("failing claims: " + ", ".join(report.failing()))
    if json_path is not None:
        Path(json_path).write_text(report.to_json() + "\n", encoding="utf-8")
        print(f"report written to {json_path}")
    return 0 if report.passed else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="metrosim",
        description="Hybrid spin-oscillator interferometer sweeps, figure data, and validation.",
        epilog="METROSIM_THREADS caps evaluation parallelism.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="evaluate a JSON-configured parameter sweep")
    p_sweep.add_argument("--config", type=Path, required=True, help="sweep spec (JSON)")
    p_sweep.add_argument("--out", type=Path, required=True, help="output directory")

    p_validate = sub.add_parser("validate", help="run every analytic-vs-oracle crosscheck")
    p_validate.add_argument("--json", type=Path, default=None, help="also write a JSON report")
    p_validate.add_argument("--max-n", type=int, default=8, help="largest excitation number on the grid")
    p_validate.add_argument(
        "--w-convention",
        choices=("difference", "negative_sum"),
        default="difference",
        help="fringe offset parameterization (negative_sum is the refuted negative control)",
    )

    p_figure = sub.add_parser("figure", help="write a figure dataset preset")
    p_figure.add_argument("--id", choices=FIGURE_IDS, required=True)
    p_figure.add_argument("--out", type=Path, required=True, help="output directory")

    args = parser.parse_args(argv)

    if args.command == "sweep":
        try:
            spec = SweepSpec.from_json(args.config.read_text(encoding="utf-8"))
        except (OSError, SweepSpecError) as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
        records = run_sweep(spec)
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "sweep.csv"
        metadata = (
            "metrosim sweep",
            "config: " + json.dumps(
                {
                    "N": list(spec.n_values),
                    "theta": {"start": spec.theta.start, "stop": spec.theta.stop, "steps": spec.theta.steps},
                    "loss_a": list(spec.loss_a),
                    "loss_b": list(spec.loss_b),
                    "outputs": list(spec.outputs),
                },
                sort_keys=True,
            ),
            W_CONVENTION_NOTE,
            SENSITIVITY_NOTE,
        )
        write_records(records, path, columns=spec.outputs, metadata=metadata)
        print(f"{len(records)} records written to {path}")
        return 0

    if args.command == "validate":
        return run_validate(json_path=args.json, max_n=args.max_n, w_convention=args.w_convention)

    if args.command == "figure":
        try:
            written = figure_data(args.id, args.out)
        except OSError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
        for path in written:
            print(f"written {path}")
        return 0

    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
