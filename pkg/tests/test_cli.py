import json
import math

import pytest

from metrosim.cli import (
    COLUMNS,
    ResultRecord,
    SweepSpec,
    SweepSpecError,
    ThetaGrid,
    evaluate_point,
    figure_data,
    main,
    read_records,
    run_sweep,
    write_records,
)


def make_spec(**overrides):
    fields = dict(
        n_values=(25,),
        theta=ThetaGrid(0.0, math.pi, 21),
        loss_a=(0.0,),
        loss_b=(0.1, 0.3, 0.5),
    )
    fields.update(overrides)
    return SweepSpec(**fields)


# ----------------------------------------------------------------- spec rules

def test_spec_rejects_empty_theta_grid():
    with pytest.raises(SweepSpecError, match="theta.steps"):
        make_spec(theta=ThetaGrid(0.0, 1.0, 0))


def test_spec_rejects_single_step_range():
    with pytest.raises(SweepSpecError, match="theta.steps"):
        make_spec(theta=ThetaGrid(0.0, 1.0, 1))


def test_spec_rejects_out_of_range_rate():
    with pytest.raises(SweepSpecError, match=r"loss_b\[1\]"):
        make_spec(loss_b=(0.1, 1.5))


def test_spec_rejects_bad_n():
    with pytest.raises(SweepSpecError, match="N"):
        make_spec(n_values=(0,))


def test_spec_rejects_unknown_output_column():
    with pytest.raises(SweepSpecError, match="outputs"):
        make_spec(outputs=("N", "not_a_column"))


def test_spec_from_json_diagnostics():
    with pytest.raises(SweepSpecError, match="line 1"):
        SweepSpec.from_json("{nope")
    with pytest.raises(SweepSpecError, match="unknown config fields: extra"):
        SweepSpec.from_json(
            '{"N": [2], "theta": {"start": 0, "stop": 1, "steps": 3}, '
            '"loss_a": [0], "loss_b": [0], "extra": 1}'
        )
    with pytest.raises(SweepSpecError, match="loss_b: field is required"):
        SweepSpec.from_json('{"N": [2], "theta": {"start": 0, "stop": 1, "steps": 3}, "loss_a": [0]}')


# --------------------------------------------------------------------- sweeps

def test_run_sweep_full_contrast_rows():
    records = run_sweep(make_spec())
    zero_theta = [r for r in records if r.theta == 0.0]
    assert {r.r_b for r in zero_theta} == {0.1, 0.3, 0.5}
    for r in zero_theta:
        assert r.abs_r == pytest.approx(1.0, abs=1e-12)


def test_run_sweep_is_sorted_and_deterministic():
    spec = make_spec(n_values=(4, 2), loss_a=(0.3, 0.0))
    records = run_sweep(spec)
    keys = [(r.n, r.r_a, r.r_b, r.theta) for r in records]
    assert keys == sorted(keys)
    assert records == run_sweep(spec)


def test_run_sweep_bounds_hold():
    for r in run_sweep(make_spec(loss_a=(0.2,), loss_b=(0.4,))):
        assert 0.0 <= r.abs_r <= 1.0
        assert 0.0 <= r.p_down <= 1.0
        assert r.inv_delta_theta == pytest.approx(
            0.0 if math.isinf(r.delta_theta_paper) else 1 / r.delta_theta_paper
        )


def test_fig3_contrast_is_monotone_in_second_loss():
    records = run_sweep(make_spec(loss_a=(0.0, 0.1, 0.3, 0.5), loss_b=(0.5,)))
    peaks = {}
    for r in records:
        peaks[r.r_a] = max(peaks.get(r.r_a, 0.0), r.abs_r)
    rates = sorted(peaks)
    assert all(peaks[a] >= peaks[b] - 1e-12 for a, b in zip(rates, rates[1:]))


# ------------------------------------------------------------------------ CSV

def test_csv_roundtrip(tmp_path):
    records = run_sweep(make_spec(theta=ThetaGrid(0.0, 2.0, 9)))
    path = tmp_path / "sweep.csv"
    write_records(records, path, metadata=("demo", "roundtrip"))
    metadata, parsed = read_records(path)
    assert metadata[0] == "demo"
    assert parsed == records


def test_csv_roundtrips_infinities(tmp_path):
    record = evaluate_point(5, 0.0, 0.2, 0.2)  # fringe extremum: no slope
    assert math.isinf(record.delta_theta_paper)
    path = tmp_path / "one.csv"
    write_records([record], path)
    _, parsed = read_records(path)
    assert parsed == [record]


def test_read_records_rejects_missing_columns(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("N,theta\n1,0.0\n", encoding="utf-8")
    with pytest.raises(ValueError, match="abs_R"):
        read_records(path)


# -------------------------------------------------------------------- figures

def test_figure_fig2_writes_two_files(tmp_path):
    paths = figure_data("fig2", tmp_path)
    assert [p.name for p in paths] == ["fig2_loss_mode_b.csv", "fig2_loss_mode_a.csv"]
    metadata, records = read_records(paths[0])
    assert any("w = (R_b - R_a)/2" in line for line in metadata)
    assert all(r.r_a == 0.0 for r in records)


def test_figure_fig4_lossless_rows_sit_on_heisenberg_line(tmp_path):
    paths = figure_data("fig4", tmp_path)
    for path in paths:
        _, records = read_records(path)
        lossless = [r for r in records if r.r_a == 0.0 and r.r_b == 0.0]
        assert lossless
        for r in lossless:
            assert r.inv_delta_theta == pytest.approx(25.0, abs=1e-9)


def test_figure_sensitivity_comparison_headline_value(tmp_path):
    (path,) = figure_data("sensitivity_comparison", tmp_path)
    _, records = read_records(path)
    target = min(
        (r for r in records if r.r_b == 0.5),
        key=lambda r: abs(r.theta - 0.01),
    )
    assert abs(target.theta - 0.01) < 1e-12
    assert 6.3 <= target.inv_delta_theta / math.sqrt(100) <= 7.6


def test_figure_unknown_id_rejected(tmp_path):
    with pytest.raises(ValueError):
        figure_data("fig9", tmp_path)


# ------------------------------------------------------------------------ CLI

def test_cli_sweep_roundtrip(tmp_path, capsys):
    config = tmp_path / "spec.json"
    config.write_text(
        json.dumps(
            {
                "N": [4],
                "theta": {"start": 0.0, "stop": 1.0, "steps": 5},
                "loss_a": [0.0],
                "loss_b": [0.0, 0.2],
            }
        ),
        encoding="utf-8",
    )
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(config), "--out", str(out)]) == 0
    _, records = read_records(out / "sweep.csv")
    assert len(records) == 10


def test_cli_sweep_reports_spec_errors(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text('{"N": [4]}', encoding="utf-8")
    assert main(["sweep", "--config", str(config), "--out", str(tmp_path)]) == 2
    assert "field is required" in capsys.readouterr().err


def test_cli_validate_small_grid(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code = main(["validate", "--max-n", "2", "--json", str(report_path)])
    assert code == 0
    payload = json.loads(report_path.read_text(encoding="utf-8"))
    assert payload["passed"] is True
    assert "overall: PASS" in capsys.readouterr().out


def test_cli_validate_rejected_convention_fails(tmp_path, capsys):
    code = main(["validate", "--max-n", "2", "--w-convention", "negative_sum"])
    assert code == 1
    out = capsys.readouterr().out
    assert "failing claims:" in out
    assert "closed_form_coherence_vs_oracle" in out


def test_cli_figure_deterministic(tmp_path):
    d1, d2 = tmp_path / "run1", tmp_path / "run2"
    assert main(["figure", "--id", "fig2", "--out", str(d1)]) == 0
    assert main(["figure", "--id", "fig2", "--out", str(d2)]) == 0
    for name in ("fig2_loss_mode_b.csv", "fig2_loss_mode_a.csv"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_cli_rejects_unknown_figure_id(tmp_path):
    with pytest.raises(SystemExit):
        main(["figure", "--id", "fig9", "--out", str(tmp_path)])


def test_result_record_row_roundtrip():
    record = evaluate_point(3, 0.4, 0.1, 0.2)
    assert ResultRecord.from_row(record.as_row()) == record
    assert set(record.as_row()) == set(COLUMNS)
