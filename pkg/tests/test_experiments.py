import csv
import dataclasses
import io
import json

import numpy as np
import pytest

from fmm_accel_bounds import experiments as ex
from fmm_accel_bounds.bounds import ChainGeometry
from fmm_accel_bounds.expansions import (
    GeometryError,
    PointSources,
    eval_expansion,
    eval_point_potential,
    s2m,
)


# {{{ sampling

@pytest.mark.parametrize("chain", ex.CHAINS)
def test_sample_is_deterministic(chain):
    a = ex.sample_scenario(chain, 1234)
    b = ex.sample_scenario(chain, 1234)
    assert a == b
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    assert ex.sample_scenario(chain, 1235) != a


@pytest.mark.parametrize("chain", ex.CHAINS)
def test_samples_satisfy_hypotheses(chain):
    rng = np.random.default_rng(3)
    for _ in range(200):
        s = ex.sample_scenario(chain, rng)
        s.check()
        assert len(s.target_set) == ex.TARGET_COUNT
        assert 1.5 <= s.geometry.R <= 4.0
        assert 0.5 * s.geometry.R <= s.geometry.r <= 0.9 * s.geometry.R
        # some targets sit on the boundary sphere
        d = np.linalg.norm(s.targets() - s.final_center, axis=1)
        assert np.sum(np.isclose(d, s.target_radius, rtol=1e-12)) >= ex.BOUNDARY_TARGETS


def test_sample_round_trips_through_dict():
    s = ex.sample_scenario("M2L2L", 8)
    assert ex.ScenarioSample.from_dict(json.loads(json.dumps(s.to_dict()))) == s


def test_check_rejects_bad_geometry():
    g = ChainGeometry(2.0, 1.0)
    inside = ex.ScenarioSample("S2L2L", g, (0.0, 0.0, 1.5), ((0.0, 0.0, 0.0),),
                               ((0.0, 0.0, 0.0),))
    with pytest.raises(GeometryError):
        inside.check()
    far_target = ex.ScenarioSample("S2L2L", g, (0.0, 0.0, 3.0), ((0.0, 0.0, 0.0),),
                                   ((0.0, 0.0, 1.5),))
    with pytest.raises(GeometryError):
        far_target.check()
    g3 = ChainGeometry(2.0, 1.0, 2.5, 1.5)
    wrong_c = ex.ScenarioSample("M2L2L", g3, (0.0, 0.0, 0.5),
                                ((0.0, 0.0, 3.0), (0.0, 0.0, 3.0)), ((0.0, 0.0, 3.0),))
    with pytest.raises(GeometryError):
        wrong_c.check()
    with pytest.raises(ValueError):
        ex.sample_scenario("L2M", 0)
    with pytest.raises(ValueError):
        ex.sample_scenario("S2L2L", 0, size_scale=0.0)


@pytest.mark.parametrize("chain", ex.CHAINS)
def test_ratio_is_scale_invariant(chain):
    # the same draw at scale 10 is the scale-1 geometry magnified, so
    # error and bound both shrink by 10 and the ratio is unchanged
    small, big = [], []
    for seed in range(100):
        for scale, out in ((1.0, small), (10.0, big)):
            s = ex.sample_scenario(chain, seed, size_scale=scale)
            out.append(ex.measure_error(s, 5, 3) / ex.chain_bound(s, 5))
    np.testing.assert_allclose(big, small, rtol=1e-6, atol=1e-12)

# }}}


# {{{ measurement

@pytest.mark.parametrize("chain", ex.CHAINS)
def test_high_order_error_is_tiny(chain):
    s = ex.sample_scenario(chain, 4, size_scale=0.1)
    assert ex.measure_error(s, 60, 5) < 1e-12


def test_q0_center_target_is_point_error():
    s = ex.sample_scenario("S2M2L", 11)
    center = dataclasses.replace(s, target_set=(tuple(s.final_center),))
    exact = eval_point_potential(PointSources([s.source], [1.0]), s.final_center)
    for p in (2, 6):
        mpole = s2m(s.source, 1.0, np.zeros(3), p, radius=s.geometry.r)
        point_err = abs(exact - float(np.real(eval_expansion(mpole, s.final_center))))
        assert ex.measure_error(center, p, 0) == pytest.approx(point_err, rel=1e-9, abs=1e-15)


def test_zero_weight_gives_zero_error():
    s = ex.sample_scenario("S2L2L", 2)
    assert ex.measure_error(s, 5, 5, weight=0.0) == 0.0


@pytest.mark.parametrize("chain", ex.CHAINS)
def test_measured_error_within_bound(chain):
    rng = np.random.default_rng(77)
    for _ in range(40):
        s = ex.sample_scenario(chain, rng)
        p, q = (int(x) for x in rng.integers(0, 16, size=2))
        assert ex.measure_error(s, p, q) <= ex.VIOLATION_SLACK * ex.chain_bound(s, p)


def test_bound_ignores_q():
    s = ex.sample_scenario("M2L2L", 5)
    assert ex.chain_bound(dataclasses.replace(s, orders=(4, 1)), 4) == \
        ex.chain_bound(dataclasses.replace(s, orders=(4, 9)), 4)

# }}}


# {{{ estimation and reports

@pytest.fixture(scope="module")
def small_reports():
    return [ex.estimate_constant(c, (2, 4), samples_per_cell=6, seed=3) for c in ex.CHAINS]


def test_report_fields(small_reports):
    for rep in small_reports:
        assert rep.max_ratio >= rep.mean_ratio >= 0
        assert rep.max_ratio <= ex.VIOLATION_SLACK
        assert len(rep.cells) == 4 and rep.samples == 6
        rep.worst_sample.check()
    with pytest.raises(ValueError):
        dataclasses.replace(small_reports[0], mean_ratio=small_reports[0].max_ratio + 1)
    with pytest.raises(ValueError):
        ex.estimate_constant("S2L2L", (3,), samples_per_cell=0)


def test_csv_layout(small_reports, tmp_path):
    path = tmp_path / "r.csv"
    ex.write_report(small_reports[0], path, "csv")
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert tuple(rows[0]) == ex.CSV_COLUMNS
    assert len(rows) == 2**2 + 1
    assert float(rows[1][4]) == small_reports[0].cells[0].max_ratio


def test_json_round_trip(small_reports, tmp_path):
    path = tmp_path / "r.json"
    ex.write_report(small_reports[1], path, "json")
    assert ex.read_json_reports(path) == [small_reports[1]]
    ex.write_report(small_reports, path, "json")
    assert ex.read_json_reports(path) == small_reports
    with pytest.raises(ValueError):
        ex.write_report(small_reports, path, "xml")
    with pytest.raises(OSError, match="r.csv"):
        ex.write_report(small_reports, tmp_path / "missing" / "r.csv")


def test_report_bytes_are_deterministic(tmp_path):
    cfg = dict(chains=["S2M2L"], orders=[3], samples_per_cell=5, seed=9)
    texts = []
    for name in ("a.csv", "b.csv"):
        conf = ex.ExperimentConfig.from_dict({**cfg, "output_path": str(tmp_path / name)})
        ex.run_config(conf)
        texts.append((tmp_path / name).read_bytes())
    assert texts[0] == texts[1]


def test_config_validation(tmp_path):
    ok = ex.ExperimentConfig.from_dict({"chains": ["S2L2L"], "orders": [3, 5]})
    assert ok.chains == ("S2L2L",) and ok.samples_per_cell == ex.DEFAULT_SAMPLES
    for bad in ({"chains": []}, {"chains": ["X"]}, {"orders": []}, {"orders": [-1]},
                {"samples_per_cell": 0}, {"size_scale": -1.0}, {"format": "xml"},
                {"seed": -3}, {"colour": 1}, {"orders": "3,5"}):
        with pytest.raises(ex.ConfigError):
            ex.ExperimentConfig.from_dict(bad)
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ex.ConfigError):
        ex.load_config(path)
    path.write_text(json.dumps({"orders": [3], "samples_per_cell": 2}))
    assert ex.load_config(path).orders == (3,)

# }}}
