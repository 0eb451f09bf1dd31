import math
import os
import pathlib

import numpy as np
import pytest

import mllkit

SPECS = pathlib.Path(os.environ.get("MLL_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2])) / "specs"
XY = [("X", 2), ("Y", 2)]


def test_log_odds_ratio():
    theta = mllkit.theta_from_p(np.array([0.4, 0.2, 0.1, 0.3]), XY)
    assert theta[2] == pytest.approx(math.log(6.0), abs=1e-14)
    p = mllkit.p_from_theta(theta, XY)
    np.testing.assert_allclose(p, [0.4, 0.2, 0.1, 0.3], atol=1e-14)


def test_design_matrices():
    space = [("X", 3), ("W", 2), ("Y", 2)]
    for coding in ("Rc", "Ac"):
        H = mllkit.build_H(space, coding)
        G = mllkit.build_G(space, coding)
        np.testing.assert_array_equal(H @ G, np.eye(11))


def test_mean_params_and_cov():
    np.testing.assert_allclose(mllkit.mean_params(np.array([0.4, 0.2, 0.1, 0.3]), XY), [0.4, 0.5, 0.3])
    c = mllkit.cov_block(np.array([0.6, 0.4]), [("X", 2)], ["X"])
    assert c[0, 0] == pytest.approx(0.24)


def test_independence_fit():
    spec = (SPECS / "independence.json").read_text()
    res = mllkit.fit(np.array([30.0, 10, 10, 30]), spec)
    assert res["converged"]
    assert res["dof"] == 1
    g2 = 2 * (60 * math.log(1.5) + 20 * math.log(0.5))
    assert res["deviance"] == pytest.approx(g2, abs=1e-8)
    assert res["se"][2] == 0.0
    assert res["labels"][2] == "X*Y|X*Y|1;1"


def test_m1_dof():
    assert mllkit.count_dof((SPECS / "m1.json").read_text()) == 7
    assert mllkit.count_dof((SPECS / "m2.json").read_text()) == 7


def test_natural_effects_additive():
    rng = np.random.default_rng(0)
    space = [("X", 4), ("U", 2), ("V", 2), ("Y", 2)]
    p = rng.random(32) + 0.1
    p /= p.sum()
    nde, nie, te = mllkit.natural_effects(p, space, "X", ["U", "V"], "Y", 0, 1)
    assert te == nde + nie
    xy = mllkit.marginalize(p, space, ["X", "Y"]).reshape(4, 2)
    assert te == pytest.approx(xy[1, 1] / xy[1].sum() - xy[0, 1] / xy[0].sum(), abs=1e-12)


def test_simulate_deterministic():
    p = np.array([0.4, 0.2, 0.1, 0.3])
    a = mllkit.simulate(p, XY, 1000, 5)
    b = mllkit.simulate(p, XY, 1000, 5)
    np.testing.assert_array_equal(a, b)
    assert a.sum() == 1000


def test_mediate_small():
    spec = (SPECS / "m1.json").read_text()
    counts = np.loadtxt(SPECS / "four_way_counts.csv", delimiter=",", skiprows=1)[:, -1]
    res = mllkit.mediate(counts, spec, B=20, seed=0)
    assert len(res["transitions"]) == 3
    for d, i, t in zip(res["nde"], res["nie"], res["te"]):
        assert t == d + i


def test_errors():
    with pytest.raises(mllkit.NumericalError):
        mllkit.theta_from_p(np.array([0.5, 0.5, 0.0, 0.0]), XY)
    with pytest.raises(mllkit.SpecificationError):
        mllkit.count_dof("{not json")
    with pytest.raises(ValueError):
        mllkit.build_H([("X", 1)])


def test_verify():
    ok, report = mllkit.verify(seed=0, trials=10)
    assert ok
    assert "22/22 identities passed" in report
