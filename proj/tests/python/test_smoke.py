import math

import pytest

import ranklaw

REGION_COUNTS = [1544, 1206, 581, 551, 409, 390, 378, 377, 348, 333,
                 305, 287, 258, 239, 235, 218, 136, 131, 92, 74]


def test_describe():
    s = ranklaw.describe(REGION_COUNTS)
    assert s["n"] == 20
    assert s["mean"] == pytest.approx(404.6)
    assert s["median"] == 319


def test_kendall_and_z():
    c = ranklaw.kendall_counts([1, 2, 3, 4], [1, 3, 2, 4])
    assert (c["p"], c["q"]) == (5, 1)
    assert ranklaw.kendall_tau(169, 21) == pytest.approx(148 / 190)
    sigma, z = ranklaw.z_score(0.9747, 8092)
    assert sigma == pytest.approx(0.00741, abs=1e-5)
    assert z == pytest.approx(131.49, abs=0.05)


def test_correlate_identical():
    r = ranklaw.correlate([5, 3, 9, 1], [5, 3, 9, 1])
    assert r["tau_a"] == 1.0
    assert r["spearman_rho"] == 1.0


def test_fit_region_counts_linear():
    f = ranklaw.fit(REGION_COUNTS, A=1e3, scale="linear")
    p = f["params"]
    assert p["m1"] == pytest.approx(0.847, rel=0.02)
    assert p["m2"] == pytest.approx(0.68, rel=0.02)
    assert p["m3"] == pytest.approx(0.209, rel=0.02)


def test_model_eval():
    y = ranklaw.model_eval("lavalette3", 1000, 20, [0.8, 0.7, 0.2], 3)
    assert y == pytest.approx(1000 * 0.8 * 3 ** -0.7 * 18 ** 0.2)


def test_special_functions():
    assert ranklaw.incomplete_beta(1, 1, 1.0) == pytest.approx(1 / 6)
    assert ranklaw.beta(2, 3) == pytest.approx(1 / 12)
    assert ranklaw.yule_simon_pmf(1, 0, 3, 1) == pytest.approx(2 / 3)


def test_simulate_is_deterministic_and_conserving():
    a = ranklaw.simulate_urns(20, 8092, seed=7)
    b = ranklaw.simulate_urns(20, 8092, seed=7)
    assert a == b
    assert sum(a) == 20 + 8092


def test_two_line_split():
    xs = [float(i) for i in range(1, 11)] * 2
    ys = [3 * x for x in xs[:10]] + [0.5 * x for x in xs[10:]]
    s = ranklaw.two_line_split(xs, ys)
    assert s["slopes"][0] == pytest.approx(3)
    assert s["slopes"][1] == pytest.approx(0.5)


def test_errors_are_typed():
    with pytest.raises(ranklaw.InvalidArgument):
        ranklaw.describe([1.0])
    with pytest.raises(ranklaw.NumericError):
        ranklaw.kendall_tau(0, 0)
    assert issubclass(ranklaw.DataError, ranklaw.RanklawError)


def test_cli_entry(tmp_path):
    assert ranklaw.main(["simulate", "--urns", "5", "--balls", "100", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "simulate.txt").exists()
    assert not math.isnan(float((tmp_path / "occupancy.csv").read_text().splitlines()[1].split(",")[1]))
