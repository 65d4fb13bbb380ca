"""Smoke test for the galloping_py extension.

Build and run from the workspace root:

    cargo build -p galloping-py --release --features extension-module
    cp target/release/libgalloping_py.so target/release/galloping_py.so
    PYTHONPATH=target/release python3 crates/python/python/smoke_test.py
"""

import math
import os
import tempfile

import galloping_py as gp


def main():
    data = gp.generate(3000, seed=7)
    assert len(data) == 3000
    assert data.columns() == list(gp.FEATURES)
    galloping, normal = data.class_counts()
    assert galloping + normal == 3000

    train, test = data.split(seed=7)
    assert len(train) + len(test) == 3000

    model = gp.train(train, seed=7)
    assert model.features == ["wind_speed", "temperature", "precipitation"]
    report = gp.evaluate(model, test)
    assert 0.8 < report["f1"] <= 1.0, report

    preds = model.predict(test)
    assert set(preds) <= {1, -1}
    again = gp.score(test.labels(), preds)
    assert again == report

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.svm")
        model.save(path)
        loaded = gp.Model.load(path)
        assert loaded.decision_function(test) == model.decision_function(test)
        csv = os.path.join(tmp, "d.csv")
        test.save(csv)
        assert gp.Dataset.load(csv).rows() == test.rows()

    smote = gp.resample(train, "smote", seed=1)
    g, n = smote.class_counts()
    assert g == n
    under = gp.resample(train, "under", seed=1)
    g, n = under.class_counts()
    assert g == n

    assert gp.score([1, -1], [-1, -1])["precision"] is None
    assert gp.kl_divergence([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]) <= 1e-12

    small = gp.Dataset(["wind_speed", "temperature"], [[1.0, 2.0], [3.0, 4.0]], [1, -1])
    assert small.labels() == [1, -1]
    try:
        gp.Dataset(["wind_speed"], [[1.0]], [0])
    except ValueError:
        pass
    else:
        raise AssertionError("label 0 accepted")
    try:
        gp.Dataset.load("/nonexistent/data.csv")
    except OSError:
        pass
    else:
        raise AssertionError("missing file accepted")

    print(f"ok: f1={report['f1']:.4f} support_vectors={model.support_vector_count} gamma={model.gamma:.4f}")
    assert math.isfinite(model.bias)


if __name__ == "__main__":
    main()
