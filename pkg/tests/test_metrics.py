import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specsim.engine import RECORD_COLUMNS, ScenarioConfig, run_experiment, run_sweep
from specsim.metrics import (
    SUMMARY_COLUMNS,
    DeviationSummary,
    EmptyTable,
    deviation,
    lookup,
    read_records,
    read_summaries,
    render_summary_chart,
    summarize,
    write_csv,
)
from specsim.model import MnoProfile


def _records(devs, entity="SI-I", policy="PR"):
    n = len(devs)
    return pd.DataFrame({
        "run_id": "r", "seed": 0, "policy": policy, "level": "inter", "entity": entity,
        "axis_name": "", "axis_value": "", "window": range(n),
        "demand_mhz": devs, "grant_mhz": [0.0] * n, "deviation_mhz": devs, "case_label": "C-I",
    }, columns=RECORD_COLUMNS)


def test_deviation():
    assert deviation(25, 15) == 10
    assert deviation(15, 15) == 0
    assert deviation(0, 30) == 30


def test_summarize_examples():
    (s,) = summarize(_records([10.0]), include_si_mean=False)
    assert (s.mean_deviation_mhz, s.std_deviation_mhz, s.window_count) == (10, 0, 1)
    (s,) = summarize(_records([0.0, 10.0]), include_si_mean=False)
    assert s.mean_deviation_mhz == 5
    with pytest.raises(EmptyTable):
        summarize(_records([]))


def test_si_average_is_per_window_mean():
    df = pd.concat([_records([0.0, 10.0], "SI-I"), _records([4.0, 2.0], "SI-II")])
    s = lookup(summarize(df), entity="SI-avg")[0]
    assert s.mean_deviation_mhz == pytest.approx(4.0)
    assert s.std_deviation_mhz == pytest.approx(np.std([2.0, 6.0], ddof=1))


def test_one_row_per_curve_point():
    cfg = ScenarioConfig(windows=50, mnos=(MnoProfile(user_max=10),) * 3)
    S = summarize(run_sweep(cfg, "mno_user_count", [5, 10, 15], ["FR", "PR", "CS"]))
    si1 = [s for s in S if s.entity == "SI-I"]
    assert len(si1) == 9
    assert {(s.policy, s.axis_value) for s in si1} == {(p, v) for p in ("FR", "PR", "CS")
                                                        for v in ("5", "10", "15")}


@settings(max_examples=30)
@given(st.lists(st.floats(0, 50), min_size=2, max_size=40), st.randoms())
def test_summarize_permutation_invariant(devs, rnd):
    df = pd.concat([_records(devs, "SI-I"), _records(devs[::-1], "SI-II")], ignore_index=True)
    idx = list(df.index)
    rnd.shuffle(idx)
    assert summarize(df) == summarize(df.loc[idx])


def test_summary_bounded_by_pool_plus_max_demand():
    df = run_experiment(ScenarioConfig(windows=300, mnos=(MnoProfile(user_max=60),) * 3))
    for s in summarize(df):
        if s.entity == "SI-avg":
            continue
        part = df[(df.entity == s.entity)]
        assert 0 <= s.mean_deviation_mhz <= 30 + part.demand_mhz.max()


def test_records_round_trip(tmp_path):
    df = run_experiment(ScenarioConfig(windows=200, seed=3))
    path = write_csv(df, tmp_path / "r.csv")
    header = path.read_text().splitlines()[0]
    assert header == ",".join(RECORD_COLUMNS)
    back = read_records(path)
    for c in ("demand_mhz", "grant_mhz", "deviation_mhz"):
        assert np.max(np.abs(back[c].to_numpy() - df[c].to_numpy())) <= 1e-9
    assert list(back.entity) == list(df.entity.astype(str))
    assert "." in path.read_text().splitlines()[1].split(",")[8]


def test_summary_round_trip_and_empty(tmp_path):
    S = summarize(run_experiment(ScenarioConfig(windows=100)))
    assert read_summaries(write_csv(S, tmp_path / "s.csv")) == [
        DeviationSummary(*[round(v, 9) if isinstance(v, float) else v for v in vars(s).values()])
        for s in S]
    empty = write_csv([], tmp_path / "e.csv")
    assert empty.read_text().strip() == ",".join(SUMMARY_COLUMNS)


def test_chart_structure(tmp_path):
    cfg = ScenarioConfig(windows=40, mnos=(MnoProfile(user_max=10),) * 3)
    S = [s for s in summarize(run_sweep(cfg, "mno_user_count", range(5, 11), ["FR", "PR", "CS"]))
         if s.entity == "SI-I"]
    root = ET.parse(render_summary_chart(S, tmp_path / "c.svg", "t")).getroot()
    lines = root.findall("{http://www.w3.org/2000/svg}polyline")
    assert len(lines) == 3
    assert all(len(pl.get("points").split()) == 6 for pl in lines)
    assert any("MHz" in (t.text or "") for t in root.iter("{http://www.w3.org/2000/svg}text"))


def test_chart_single_point_and_empty(tmp_path):
    S = summarize(_records([3.0]), include_si_mean=False)
    root = ET.parse(render_summary_chart(S, tmp_path / "one.svg")).getroot()
    assert len(root.findall("{http://www.w3.org/2000/svg}circle")) == 1
    with pytest.raises(EmptyTable):
        render_summary_chart([], tmp_path / "none.svg")
    assert not (tmp_path / "none.svg").exists()
