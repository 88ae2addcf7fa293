import math

import pytest

import ergokit


def test_norms():
    assert ergokit.vector_s_norm([4.0, 9.0], 0.5) == pytest.approx(5.0)
    assert ergokit.vector_s_norm([3.0, 4.0], 2.0) == pytest.approx(5.0)
    assert ergokit.matrix_col_sum_norm([[0.2, 0.1], [0.1, 0.3]], 1.0) == pytest.approx(0.4)
    assert ergokit.frobenius_norm([[1.0, 0.0], [0.0, 1.0]]) == pytest.approx(math.sqrt(2.0))
    assert ergokit.operator_norm([[2.0, 0.0], [0.0, 1.0]], 2) == pytest.approx(2.0)


def test_psd_sqrt():
    s = ergokit.psd_sqrt([[4.0, 0.0], [0.0, 9.0]])
    assert s[0][0] == pytest.approx(2.0)
    assert s[1][1] == pytest.approx(3.0)
    with pytest.raises(ergokit.ErgokitError, match="not-psd"):
        ergokit.psd_sqrt([[1.0, 0.0], [0.0, -1.0]])


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        ergokit.vector_s_norm([1.0, 1.0], 0.0)
    with pytest.raises(ergokit.ErgokitError):
        ergokit.operator_norm([[1.0]], 3.0)


def test_expol2_moment():
    q = ergokit.abs_moment()
    assert 1.64 <= q["value"] <= 1.68
    mc = ergokit.abs_moment(method="mc", samples=200_000, seed=3)
    assert abs(mc["value"] - q["value"]) <= 4 * mc["std_error"]


def test_check_example2():
    assert "example2-ergodic" in ergokit.builtin_names()
    report = ergokit.check(ergokit.builtin_config("example2-ergodic"))
    assert report["verdict"] == "sufficient_condition_met"
    assert report["envelope"]["b_f"] == pytest.approx(0.4)
    assert report["envelope"]["b_g"] == pytest.approx(0.25)
    assert report["gamma"] < 1.0
    assert report["reference_gamma"] == 0.981
    assert ergokit.check(ergokit.builtin_config("example2-unit-root"))["verdict"] == "condition_failed"


def test_bekk_line():
    kind, normal = ergokit.bekk_degeneracy([[1.0, 0.0], [0.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]])
    assert kind == "line"
    assert normal[0] == pytest.approx(-normal[1])


def test_simulate_is_deterministic():
    cfg = ergokit.builtin_config("example2-ergodic")
    cfg["simulation"].update({"T": 200, "n_traj": 16, "snapshots": [100, 200], "dump_paths": 1})
    a = ergokit.simulate(cfg, threads=1)
    b = ergokit.simulate(cfg, threads=4)
    assert a == b
    assert a["diverged_count"] == 0
    assert len(a["paths"][0]) == 201
    assert [s["t"] for s in a["snapshots"]] == [100, 200]


def test_config_errors():
    with pytest.raises(ergokit.ErgokitError, match="config"):
        ergokit.check("{ not json")
    with pytest.raises(ergokit.ErgokitError, match="example2-ergodic"):
        ergokit.builtin_config("nope")
