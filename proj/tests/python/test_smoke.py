"""End-to-end smoke coverage for the python surface.

Each test leans on planted structure rather than golden numbers so the suite
stays robust to benign numeric drift while still catching wiring mistakes.
"""

import json
from pathlib import Path

import numpy as np
import pytest

import churnlab


@pytest.fixture()
def blobs():
    rng = np.random.default_rng(7)
    n = 120
    x = np.vstack(
        [
            rng.normal(-2.0, 0.5, size=(n // 2, 2)),
            rng.normal(2.0, 0.5, size=(n // 2, 2)),
        ]
    )
    y = [0] * (n // 2) + [1] * (n // 2)
    return x, y


def test_smote_balances_and_preserves_originals():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(60, 4))
    y = [1] * 12 + [0] * 48
    xs, ys = churnlab.smote(x, y, k_neighbors=5, seed=11)
    assert ys.count(0) == ys.count(1) == 48
    np.testing.assert_array_equal(np.asarray(xs)[:60], x)


def test_rfe_keeps_planted_columns():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(300, 6))
    logits = 3.0 * x[:, 1] - 2.5 * x[:, 4]
    y = (rng.random(300) < 1.0 / (1.0 + np.exp(-logits))).astype(int).tolist()
    out = churnlab.rfe(x, y, names=[f"c{i}" for i in range(6)], n_keep=2)
    assert sorted(out["kept"]) == ["c1", "c4"]
    assert len(out["elimination_order"]) == 4
    assert np.asarray(out["features"]).shape == (300, 2)


def test_network_and_ensemble_separate_blobs(blobs):
    x, y = blobs
    preset = {
        "hidden_widths": [8],
        "hidden_activations": ["relu"],
        "dropout": 0.0,
        "learning_rate": 0.01,
        "epochs": 150,
        "batch_size": 32,
    }
    model = churnlab.train_network(x, y, preset=preset, seed=4)
    proba = np.asarray(churnlab.predict_proba(model, x))
    acc = ((proba > 0.5).astype(int) == np.asarray(y)).mean()
    assert acc >= 0.95

    again = churnlab.train_network(x, y, preset=preset, seed=4)
    assert json.dumps(model, sort_keys=True) == json.dumps(again, sort_keys=True)

    vote = churnlab.ensemble_ann(x, y, seed=9, preset_1=preset, preset_2=preset)
    assert vote["kind"] == "soft_vote"
    vote_proba = np.asarray(churnlab.predict_proba(vote, x))
    assert vote_proba.min() >= 0.0 and vote_proba.max() <= 1.0


def test_metrics_agree_with_hand_case():
    scores = np.array([0.9, 0.8, 0.4, 0.1])
    labels = [1, 1, 0, 0]
    assert churnlab.auc(scores, labels) == 1.0
    bundle = churnlab.evaluate(scores, labels)
    assert bundle["test_acc"] == 1.0
    assert bundle["cohen_kappa"] == 1.0
    assert bundle["mcc"] == 1.0


def test_backdoor_identification_on_reference_graph():
    edges = [
        ("gender", "acc_balance"),
        ("acc_balance", "churn"),
        ("acc_balance", "cust_tenure"),
        ("acc_balance_change", "cust_tenure"),
        ("cust_tenure", "churn"),
        ("acc_growth", "churn"),
    ]
    assert churnlab.backdoor_sets(edges, "cust_tenure", "churn") == [["acc_balance"]]
    assert churnlab.d_separated(edges, "gender", "churn", ["acc_balance"])
    assert "churn" in churnlab.descendants(edges, "gender")


def test_ipw_recovers_the_canonical_effect():
    cfg = churnlab.canonical_confounded_scm()
    truth = churnlab.true_ate(cfg)
    assert truth["exact"] and abs(truth["value"] - 0.40) < 1e-12

    x, labels, names = churnlab.generate_scm(cfg, 20000, seed=3)
    x = np.asarray(x)
    assert names == ["z", "treatment", "outcome"]
    z, treated, outcome = x[:, [0]], x[:, 1].astype(int).tolist(), x[:, 2]

    naive = outcome[np.asarray(treated) == 1].mean() - outcome[np.asarray(treated) == 0].mean()
    assert abs(naive - 0.40) > 0.05

    propensity = churnlab.fit_propensity(z, treated)
    ate = churnlab.ipw_ate(outcome, treated, propensity)
    assert abs(ate - 0.40) < 0.05

    def estimate(rows):
        idx = np.asarray(rows, dtype=int)
        sub_t = [treated[i] for i in idx]
        e = churnlab.fit_propensity(z[idx], sub_t)
        return churnlab.ipw_ate(outcome[idx], sub_t, e)

    ref = churnlab.data_subset_refuter(estimate, len(treated), fraction=0.8, trials=4, seed=5)
    assert ref["full_estimate"] == pytest.approx(ate)
    assert len(ref["subset_estimates"]) == 4
    assert abs(ref["mean"] - ate) < 0.05


def test_pipeline_stages_run_from_python(tmp_path):
    config = {
        "seed": 21,
        "out_dir": str(tmp_path / "run"),
        "synth": {"corpus": {"n_members": 600}},
        "data": {
            "recipe": {
                "balance": ["last"],
                "sg_contribution": ["recency"],
                "account_growth": ["last"],
            }
        },
        "rfe": {"enabled": False},
        "models": {"roster": ["logistic"]},
        "explain": {"model": "logistic", "n_repeats": 2, "top_k": 3},
        "causal": {
            "queries": [
                {
                    "name": "stopped_contributions",
                    "treatment": "sg_contribution_recency",
                    "rule": {"kind": "threshold", "value": 0.5},
                }
            ]
        },
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))

    for stage in ("synth", "prepare", "train", "evaluate", "explain", "causal"):
        result = churnlab.run_stage(stage, str(config_path))
        assert result["stage"] == stage
        for path in result["files"]:  # resolved against out_dir by the stage
            assert Path(path).exists()

    report = json.loads((tmp_path / "run" / "causal_report.json").read_text())
    assert [row["causal_variable"] for row in report] == ["stopped_contributions"]
    metrics = json.loads((tmp_path / "run" / "metrics.json").read_text())
    assert "logistic" in metrics["models"]


def test_corpus_ground_truth_shape(tmp_path):
    monthly = tmp_path / "monthly.csv"
    static = tmp_path / "static.csv"
    info = churnlab.churn_corpus_files({"n_members": 200}, str(monthly), str(static))
    assert info["members"] == 200
    assert monthly.exists() and static.exists()

    gt = churnlab.churn_corpus_ground_truth({"n_members": 200})
    assert set(gt["true_effects"]) == {
        "high_sg_recency",
        "low_account_growth",
        "high_acc_balance",
    }
    assert gt["true_effects"]["high_sg_recency"] > 0.0
