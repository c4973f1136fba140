import json
import math

import pytest

import poisest


GAMMA = {"family": "gamma", "theta": [2.0, 3.0]}


def test_model_surface():
    m, theta = poisest.model(GAMMA)
    assert m.family == "gamma"
    assert m.param_dim == 2
    assert list(theta) == [2.0, 3.0]
    assert m.intensity([1.0, 1.0], 0.5) == pytest.approx(math.exp(-0.5))
    assert m.total_mass([2.0, 3.0]) == pytest.approx(1.0, abs=1e-10)
    lo, hi = m.window([2.0, 3.0])
    assert 0.0 <= lo < 1e-9 and hi > 5.0


def test_fisher_closed_form():
    m, _ = poisest.model(GAMMA)
    fisher = m.fisher([2.0, 3.0])
    assert fisher[0][0] == pytest.approx(0.75, abs=1e-8)
    assert fisher[0][1] == pytest.approx(-0.5, abs=1e-8)

    sine, _ = poisest.model({"family": "sine", "A": 1.0, "lambda0": 2.0})
    assert sine.fisher([1.0])[0][0] == pytest.approx(2.0 - math.sqrt(3.0), abs=1e-8)


def test_simulate_and_mme_recovery():
    m, theta = poisest.model(GAMMA)
    paths = poisest.simulate(m, theta, 4000, seed=3)
    assert len(paths) == 4000
    assert all(list(p) == sorted(p) for p in paths[:50])

    again = poisest.simulate(m, theta, 4000, seed=3)
    assert paths == again

    est = poisest.mme(m, paths)
    assert est["in_box"]
    assert est["theta"][0] == pytest.approx(2.0, abs=0.5)
    assert est["theta"][1] == pytest.approx(3.0, abs=1.0)
    assert est["moments"][0] == pytest.approx(1.5, abs=0.15)


def test_estimate_pipeline_and_learning_size():
    assert poisest.learning_size(1000, 0.6) == 63
    assert poisest.learning_size(2000, 4.0 / 9.0, mode="twostep") == 29
    with pytest.raises(poisest.EstimationError):
        poisest.learning_size(1000, 0.45)

    m, theta = poisest.model(GAMMA)
    paths = poisest.simulate(m, theta, 500, seed=8)
    out = poisest.estimate(m, paths, kind="onestep", delta=0.6)
    assert set(out) >= {"estimator", "theta", "preliminary", "N", "flags"}
    assert out["estimator"] == "onestep"
    assert out["N"] == poisest.learning_size(500, 0.6)

    traced = poisest.estimate(m, paths, kind="onestep_process", delta=0.6, stride=50)
    assert traced["trace"]["k"][-1] == 500
    assert list(traced["trace"]["theta"][-1]) == list(out["theta"])


def test_path_score_and_moment_map():
    m, _ = poisest.model(GAMMA)
    score = poisest.path_score(m, [1.0, 1.0], [1.0])
    assert score[0] == pytest.approx(0.0, abs=1e-10)
    assert score[1] == pytest.approx(0.5772156649, abs=1e-8)

    a = poisest.moment_map(m, [2.0, 3.0])
    assert a[0] == pytest.approx(1.5, abs=1e-9)
    assert a[1] == pytest.approx(3.0, abs=1e-9)
    cov = poisest.mme_covariance(m, [2.0, 3.0])
    assert cov[0][0] == pytest.approx(48.0, rel=1e-6)


def test_sample_io_roundtrip(tmp_path):
    m, theta = poisest.model(GAMMA)
    paths = poisest.simulate(m, theta, 25, seed=21)
    file = str(tmp_path / "sample.ndjson")
    poisest.write_sample(paths, file)
    assert poisest.read_sample(file) == paths


def test_run_study_report():
    report = poisest.run_study(
        {
            "model": {
                "family": "gamma",
                "theta": [2.0, 3.0],
                "box": {"lower": [0.5, 1.0], "upper": [5.0, 6.0]},
            },
            "study": {"n": 60, "M": 8, "estimators": [{"kind": "mme"}]},
            "seed": 2,
            "threads": 2,
        }
    )
    assert report["family"] == "gamma"
    assert report["M"] == 8
    est = report["estimators"][0]
    assert est["estimator"] == "mme"
    cp = est["checkpoints"][0]
    assert cp["k"] == 60
    assert cp["used"] + est["failures"] == 8
    assert len(cp["cov"]) == 2
    assert report["summary_csv"].startswith("estimator,k,rel_frob_vs_target")

    again = poisest.run_study(
        json.dumps(
            {
                "model": {
                    "family": "gamma",
                    "theta": [2.0, 3.0],
                    "box": {"lower": [0.5, 1.0], "upper": [5.0, 6.0]},
                },
                "study": {"n": 60, "M": 8, "estimators": [{"kind": "mme"}]},
                "seed": 2,
                "threads": 2,
            }
        )
    )
    assert again["estimators"][0]["checkpoints"][0]["cov"] == cp["cov"]


def test_errors_are_typed():
    m, _ = poisest.model(GAMMA)
    with pytest.raises(poisest.EstimationError):
        poisest.mme(m, [])
    with pytest.raises(poisest.EstimationError):
        poisest.simulate(m, [-1.0, 1.0], 5)
