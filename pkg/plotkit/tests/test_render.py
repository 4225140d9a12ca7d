"""Renders every preset from fresh metrosim CLI output.

The primary package is driven only through its external interface
(``python -m metrosim figure``) and its CSV files.
"""

import subprocess
import sys
from pathlib import Path

import pytest

from plotkit.render import main, preset_spec, render
from plotkit.schema import SchemaError, load_table

PRESET_FILES = {
    "fig2": ["fig2_loss_mode_b.csv", "fig2_loss_mode_a.csv"],
    "fig3": ["fig3_mixed_loss.csv"],
    "fig4": ["fig4_loss_mode_a.csv", "fig4_loss_mode_b.csv"],
    "sensitivity_comparison": ["sensitivity_comparison.csv"],
}
EXPECTED_SERIES = {
    "fig2": (3, 3),
    "fig3": (4,),
    "fig4": (4, 4),
    "sensitivity_comparison": (3,),
}


@pytest.fixture(scope="session")
def cli_output(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv")
    for fig_id in PRESET_FILES:
        result = subprocess.run(
            [sys.executable, "-m", "metrosim", "figure", "--id", fig_id, "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
    return out


@pytest.mark.parametrize("preset", sorted(PRESET_FILES))
def test_render_preset(preset, cli_output, tmp_path):
    csv_paths = [cli_output / name for name in PRESET_FILES[preset]]
    out = tmp_path / f"{preset}.png"
    result = render(preset_spec(preset, csv_paths, out))
    assert out.exists() and out.stat().st_size > 0
    assert result.series_per_panel == EXPECTED_SERIES[preset]


def test_cli_entry_point(cli_output, tmp_path):
    out = tmp_path / "fig3.png"
    code = main(
        ["--preset", "fig3", "--csv", str(cli_output / "fig3_mixed_loss.csv"), "--out", str(out)]
    )
    assert code == 0
    assert out.stat().st_size > 0


def test_missing_column_is_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# partial file\ntheta,R_a,R_b\n0.0,0.1,0.2\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="abs_R"):
        render(preset_spec("fig3", [bad], tmp_path / "x.png"))


def test_empty_series_is_an_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(
        "theta,R_a,R_b,abs_R,inv_delta_theta,sql,hl\n",
        encoding="utf-8",
    )
    with pytest.raises(SchemaError, match="no data series"):
        render(preset_spec("fig3", [empty], tmp_path / "x.png"))


def test_preset_panel_count_enforced(tmp_path):
    with pytest.raises(ValueError, match="needs 2 CSV"):
        preset_spec("fig2", [tmp_path / "only_one.csv"], tmp_path / "x.png")


def test_rendering_is_read_only(cli_output, tmp_path):
    path = cli_output / "fig3_mixed_loss.csv"
    before = path.read_bytes()
    render(preset_spec("fig3", [path], tmp_path / "y.png"))
    assert path.read_bytes() == before


def test_table_metadata_preserved(cli_output):
    table = load_table(cli_output / "sensitivity_comparison.csv")
    assert any("metrosim figure data" in line for line in table.metadata)
    assert table.rows == 600  # 3 loss settings x 200 phase points
