import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from risemf.config import ScenarioConfig
from risemf.output import SCHEMAS, Table, fmt_float, header_meta, quantize, read_csv, svg_plot

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_fmt_float_specials():
    assert fmt_float(math.nan) == "nan"
    assert fmt_float(math.inf) == "inf" and fmt_float(-math.inf) == "-inf"
    assert fmt_float(1.5) == "1.50000000e+00"


@given(finite)
def test_quantize_is_idempotent(x):
    q = quantize(x)
    assert quantize(q) == q
    assert fmt_float(q) == fmt_float(x)


@given(st.lists(st.tuples(st.integers(0, 2**31), finite, finite, st.booleans()), min_size=1, max_size=8))
def test_csv_round_trip(tmp_path_factory, rows):
    table = Table("sweep-v", meta={"command": "sweep-v", "seeds": "1,2"})
    for seed, e, d, ok in rows:
        table.add(v=1e15, seed=seed, avg_emfe_w_m2=e, avg_delay_s=d, avg_rate_bps=1.0,
                  avg_power_w=0.5, stable=ok)
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    table.write(path)
    back = read_csv(path, "sweep-v")
    assert back.rows == table.rows
    assert back.meta == table.meta
    assert path.read_bytes() == table.to_csv().encode("ascii")


def test_table_rejects_missing_columns_and_empty():
    t = Table("sweep-arrival")
    with pytest.raises(ValueError):
        t.add(arrival_bps=1.0)
    with pytest.raises(ValueError):
        t.to_csv()


def test_nan_and_bool_cells(tmp_path):
    t = Table("sweep-range")
    t.add(distance_m=10, policy="boa_no_ris", v_star=math.nan, avg_emfe_w_m2=math.nan,
          avg_emfe_dbm_m2=-math.inf)
    line = t.to_csv().splitlines()[-1]
    assert line == "1.00000000e+01,boa_no_ris,nan,nan,-inf"
    assert set(SCHEMAS) == {"run", "sweep-v", "sweep-range", "sweep-arrival"}


def test_header_meta_records_everything():
    c = ScenarioConfig()
    m = header_meta("run", c, (1, 2), {"lyapunov.v": 1e9}, None)
    assert m["config_sha256"] == c.digest()
    assert m["seeds"] == "1,2"
    assert m["overrides"] == "lyapunov.v=1000000000.0"
    assert m["profile"] == "desk"
    assert header_meta("run", c, (1,), {}, "paper")["overrides"] == "none"


def test_svg_drops_non_finite_points():
    svg = svg_plot({"a": ([1, 2, math.nan], [1.0, -math.inf, 3.0]), "b": ([1, 10], [2.0, 4.0])},
                   "x", "y", "t", logx=True)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<circle") == 3
    svg_plot({}, "x", "y", "empty")
