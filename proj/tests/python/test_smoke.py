import json
import math
import statistics

import pytest

import emobase

EMOTIONS = ["Fear", "SadAnger", "AweRev", "Disgust", "JoyAmus", "Content"]


@pytest.fixture(scope="module")
def csv():
    rec = emobase.synthesize(seed=3, sessions=3)
    return emobase.build_dataset(emobase.preprocess(rec), w=32)


def test_feature_names():
    names = emobase.feature_names()
    assert len(names) == 17
    assert names[12] == "SKT_mean"


def test_extract_features_matches_python():
    hr = [60.0, 62.0, 61.0, 65.0]
    hrv = [1.0, 2.0, 4.0, 3.0]
    channels = [hr, hrv, [0.5] * 4, [12.0, 13.0, 12.5, 14.0], [2.0, 2.5, 2.2, 2.1], [33.0] * 4]
    f = dict(zip(emobase.feature_names(), emobase.extract_features(channels)))
    assert f["HR_mean"] == pytest.approx(statistics.mean(hr), abs=1e-12)
    assert f["HR_std"] == pytest.approx(statistics.stdev(hr), abs=1e-12)
    d = [b - a for a, b in zip(hrv, hrv[1:])]
    assert f["HRV_mean_diff"] == pytest.approx(statistics.mean(d), abs=1e-12)
    assert f["GSR_ssq"] == pytest.approx(sum(x * x for x in channels[4]), abs=1e-12)


def test_bad_channel_count():
    with pytest.raises(emobase.EmobaseError):
        emobase.extract_features([[1.0, 2.0]])


def test_median_filter_is_trailing():
    assert emobase.median_filter([5.0, 1.0, 3.0, 9.0], 3) == [5.0, 3.0, 3.0, 3.0]


def test_train_predict_and_round_trip(csv):
    model = emobase.train(csv, classifier="rf", seed=1)
    assert model.kind == "rf"
    assert model.dimension == 16
    imp = model.importance()
    assert len(imp) == 16 and imp[0][1] >= imp[-1][1]
    row = [0.0] * 16
    again = emobase.load_model(model.to_json())
    assert again.predict(row) == model.predict(row)


def test_evaluate_is_deterministic(csv):
    a = emobase.evaluate(csv, classifier="tree", folds=5, seed=4)
    b = emobase.evaluate(csv, classifier="tree", folds=5, seed=4)
    assert a == b
    assert 0.0 <= a["mean_error"] <= 1.0
    assert emobase.evaluate(csv, method="oob", seed=4)["instances"] == a["instances"]


def test_importance_needs_a_forest(csv):
    with pytest.raises(emobase.EmobaseError):
        emobase.train(csv, classifier="tree").importance()


def _pool(per_emotion=4):
    pool = []
    for e in EMOTIONS:
        for i in range(per_emotion):
            pool.append({"clip_id": f"{e}-{i}", "target_emotion": e, "duration_s": 600, "tags": [f"t{i % 2}"]})
    return pool


def _profile():
    return {
        "schema_version": 1,
        "subject_id": "p1",
        "questionnaire": {"schema_version": 1, "affinity": {e: {"t0": 1, "t1": 0} for e in EMOTIONS}},
    }


def test_generated_plan_validates():
    plan = emobase.generate_session(_profile(), _pool(), "s1")
    assert plan["session_id"] == "s1"
    assert 3600 <= plan["planned_total_s"] <= 4200
    assert emobase.validate_plan(plan, _pool(), _profile()) == []


def test_validator_reports_problems():
    plan = emobase.generate_session(_profile(), _pool(), "s1")
    plan["items"] = [item for item in plan["items"] if item["type"] == "clip"]
    assert emobase.validate_plan(plan, _pool(), _profile())


def test_pool_exhausted():
    pool = [c for c in _pool() if c["target_emotion"] != "Fear"]
    with pytest.raises(emobase.PoolExhaustedError):
        emobase.generate_session(_profile(), pool, "s1")


def test_malformed_json_is_a_domain_error():
    with pytest.raises(emobase.EmobaseError):
        emobase.load_model("{not json")
