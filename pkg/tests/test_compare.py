import math

import pytest

from cvdvrate import compare as C
from cvdvrate.config import build_config, load_mapping


@pytest.fixture(scope="module")
def small():
    cfg = C.ComparisonConfig(f_initial_grid=(0.65, 0.75, 0.82, 0.95), gain_scan_points=13)
    return C.run_comparison(cfg)


def test_rows_have_all_columns(small):
    for row in small.rows:
        for col in C.CSV_COLUMNS:
            assert col in row
        assert "dv_t_generation_s" in row and "cv_p_top" in row


def test_targets_default(small):
    assert small.f_required == 0.67
    assert small.eof_target == pytest.approx(0.1349418486239742, abs=1e-9)
    assert small.cv.feasible
    assert small.cv.eof >= small.eof_target


def test_dv_rate_rises_with_initial_fidelity(small):
    rates = [r["dv_rate_hz"] for r in small.rows]
    assert rates == sorted(rates)
    assert [r["rounds"] for r in small.rows] == [5, 2, 0, 0]
    assert small.plateau_onset == 0.82


def test_plateau_is_flat(small):
    a, b = small.rows[2]["dv_rate_hz"], small.rows[3]["dv_rate_hz"]
    assert a == b == pytest.approx(0.031246354617997723, rel=1e-8)


def test_crossover_flag_consistent(small):
    for row in small.rows:
        assert row["crossover_flag"] == int(row["dv_rate_hz"] > 0 and row["dv_rate_hz"] >= row["cv_rate_hz"])
    assert small.crossover == C.crossover_point(small.rows)


def test_summary_mentions_results(small):
    text = C.summary(small)
    assert "crossover" in text and "plateau onset: F_i=0.82" in text


def test_rows_as_array(small):
    arr = C.rows_as_array(small.rows, "rounds")
    assert arr.tolist() == [5, 2, 0, 0]


def test_workers_keep_order():
    grid = (0.9, 0.7, 0.8)
    one = C.ComparisonConfig(f_initial_grid=grid, eof_target=0.0, gain_scan_points=3)
    many = C.ComparisonConfig(f_initial_grid=grid, eof_target=0.0, gain_scan_points=3, workers=3)
    rows1 = [C.dv_point(one, f, 0.67).rate_hz for f in sorted(grid)]
    rows2 = [r["dv_rate_hz"] for r in C.run_comparison(many).rows]
    assert rows1 == rows2


def test_auto_requirement_single_mode():
    cfg = C.ComparisonConfig(f_required="auto", eof_target=0.14)
    f_req, target = C.resolve_targets(cfg)
    assert f_req == pytest.approx(0.6739, abs=2e-3)
    assert target == 0.14


def test_auto_refused_for_multimode():
    cfg = C.ComparisonConfig(chi=0.9, f_required="auto", eof_target=0.35)
    with pytest.raises(C.InfeasibleConfig, match="auto"):
        C.resolve_targets(cfg)
    with pytest.raises(C.InfeasibleConfig, match="eof_target"):
        C.resolve_targets(C.ComparisonConfig(chi=0.9, f_required=0.74))


def test_solve_f_required_edges():
    assert C.solve_f_required(0.5, 0.0) == 0.5
    with pytest.raises(C.InfeasibleConfig):
        C.solve_f_required(0.5, 0.9)


def test_multimode_dv_eof_not_computed():
    cfg = C.ComparisonConfig(chi=0.9, f_required=0.74, eof_target=0.35, cutoff=12)
    point = C.dv_point(cfg, 0.9, 0.74)
    assert cfg.modes == 4
    assert math.isnan(point.eof)
    assert point.rate_hz > 0


def test_unreachable_fidelity_marks_row_infeasible():
    cfg = C.ComparisonConfig(f_required=1.0)
    point = C.dv_point(cfg, 0.7, 1.0)
    assert not point.feasible and point.rate_hz == 0.0


def test_config_validation():
    with pytest.raises(C.InfeasibleConfig):
        C.ComparisonConfig(f_initial_grid=(0.4,))
    with pytest.raises(C.InfeasibleConfig):
        C.ComparisonConfig(total_length_km=-1)
    with pytest.raises(C.InfeasibleConfig):
        build_config({"bsm_success_prob": "x"})


def test_build_config_grid_forms():
    assert build_config(f_initial_grid="0.6:0.62:0.01").f_initial_grid == (0.6, 0.61, 0.62)
    assert build_config(f_initial_grid="0.7,0.8").f_initial_grid == (0.7, 0.8)
    assert build_config(f_required="AUTO").f_required == "auto"
    assert build_config(eof_target="none").eof_target is None


def test_yaml_unknown_key(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("chi: 0.5\nbogus: 1\n")
    with pytest.raises(C.InfeasibleConfig, match="bogus"):
        load_mapping(path)
    path.write_text("chi: 0.5\ntotal_length_km: 100\n")
    cfg = build_config(load_mapping(path), total_length_km="200")
    assert cfg.total_length_km == 200.0
