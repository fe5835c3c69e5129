import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from khmgof.families import Normal
from khmgof.paths import ProcessPath, read_path_tsv
from khmgof.regression import estimated_empirical_process


def _path():
    return ProcessPath("w_n", [-1.0, 0.5, 2.0], [0.3, -0.2, 0.0], [0.1, 0.4, -0.6], n=3)


def test_evaluation_is_right_continuous():
    p = _path()
    assert p(-5.0) == 0.0
    assert p(-1.0) == 0.3
    assert p(0.4999) == 0.3
    assert p(0.5) == -0.2
    assert p(9.0) == 0.0
    np.testing.assert_array_equal(p(np.array([-2.0, 0.0, 3.0])), [0.0, 0.3, 0.0])


def test_left_limits():
    p = _path()
    assert p.left_limit(0.5) == 0.4
    assert p.left_limit(2.0) == -0.6
    assert p.left_limit(1.0) == -0.2
    assert p.left_limit(-3.0) == 0.0
    assert p.scale == pytest.approx(np.sqrt(3))
    assert len(p) == 3


def test_unsorted_points_rejected():
    with pytest.raises(ValueError):
        ProcessPath("w_n", [1.0, 0.0], [0.0, 0.0], [0.0, 0.0], n=2)


def test_tsv_layout():
    lines = _path().to_tsv().splitlines()
    assert lines[0] == "# process=w_n n=3 kind=w family="
    assert lines[1:3] == ["-1.0\t0.1", "-1.0\t0.3"]


def test_reader_skips_config_header(tmp_path):
    f = tmp_path / "p.tsv"
    f.write_text("# config=khmgof test --input a.csv\n" + _path().to_tsv())
    q = read_path_tsv(f)
    np.testing.assert_array_equal(q.values, _path().values)
    (tmp_path / "bad.tsv").write_text("1.0\t2.0\n1.0\t3.0\n")
    with pytest.raises(ValueError):
        read_path_tsv(tmp_path / "bad.tsv")


@pytest.mark.property
@settings(max_examples=30, deadline=None)
@given(e=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=40))
def test_tsv_round_trip(tmp_path_factory, e):
    p = estimated_empirical_process(e, Normal(), grid=3)
    f = tmp_path_factory.mktemp("paths") / "v.tsv"
    p.write_tsv(f)
    q = read_path_tsv(f)
    assert (q.name, q.n, q.kind, q.family) == (p.name, p.n, p.kind, p.family)
    for attr in ("points", "values", "left_values"):
        np.testing.assert_array_equal(getattr(q, attr), getattr(p, attr))
