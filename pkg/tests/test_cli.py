import json
import os

import pytest

from kolsim.cli import main

from conftest import small_synth_spec


def write_spec(tmp_path, **overrides):
    spec = small_synth_spec(**overrides)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec.to_json_dict()))
    return str(path)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One small synth -> simulate -> rank pipeline reused by several tests."""
    root = tmp_path_factory.mktemp("pipeline")
    ds_dir = str(root / "ds")
    run_dir = str(root / "run")
    spec_path = root / "spec.json"
    spec_path.write_text(json.dumps(small_synth_spec().to_json_dict()))
    assert main(["synth", "--out", ds_dir, "--seed", "11", "--spec", str(spec_path)]) == 0
    assert main([
        "simulate", "--dataset", ds_dir, "--out", run_dir, "--all-candidates",
        "--seed", "3", "--periods", "40", "--start-minute", "780",
    ]) == 0
    assert main(["rank", "--runs", run_dir, "--seed", "3"]) == 0
    return root, ds_dir, run_dir


class TestSynth:
    def test_deterministic_outputs(self, tmp_path):
        spec = write_spec(tmp_path)
        out1 = str(tmp_path / "d1")
        out2 = str(tmp_path / "d2")
        assert main(["synth", "--out", out1, "--seed", "7", "--spec", spec]) == 0
        assert main(["synth", "--out", out2, "--seed", "7", "--spec", spec]) == 0
        for name in ("users.jsonl", "follows.jsonl", "interactions.jsonl", "campaign.json"):
            a = open(os.path.join(out1, name), "rb").read()
            b = open(os.path.join(out2, name), "rb").read()
            assert a == b

    def test_manifest_written(self, tmp_path):
        spec = write_spec(tmp_path)
        out = str(tmp_path / "d")
        main(["synth", "--out", out, "--seed", "1", "--spec", spec])
        manifest = json.load(open(os.path.join(out, "run_manifest.json")))
        assert manifest["command"] == "synth"
        assert manifest["seed"] == 1
        assert manifest["artifacts"]


class TestFit:
    def test_fit_timeline_and_lifecycle(self, pipeline, tmp_path):
        _, ds_dir, _ = pipeline
        tpath = str(tmp_path / "timeline.json")
        lpath = str(tmp_path / "lifecycle.json")
        assert main(["fit-timeline", "--dataset", ds_dir, "--out", tpath, "--k", "2"]) == 0
        assert main(["fit-lifecycle", "--dataset", ds_dir, "--out", lpath]) == 0
        tdoc = json.load(open(tpath))
        assert tdoc["K"] == 2 and len(tdoc["components"]) == 2
        ldoc = json.load(open(lpath))
        assert len(ldoc["beta"]) == 5
        assert ldoc["baseline"]


class TestSimulate:
    def test_unknown_influencer_exits_1(self, pipeline, tmp_path, capsys):
        _, ds_dir, _ = pipeline
        rc = main([
            "simulate", "--dataset", ds_dir, "--out", str(tmp_path / "x"),
            "--influencer", "unknown_id",
        ])
        assert rc == 1
        assert "unknown_id" in capsys.readouterr().err

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["simulate", "--dataset"])
        assert err.value.code == 2

    def test_missing_target_flag(self, pipeline, tmp_path):
        _, ds_dir, _ = pipeline
        rc = main(["simulate", "--dataset", ds_dir, "--out", str(tmp_path / "y")])
        assert rc == 1

    def test_artifacts_layout(self, pipeline):
        _, ds_dir, run_dir = pipeline
        campaign = json.load(open(os.path.join(ds_dir, "campaign.json")))
        for cand in campaign["candidate_influencer_ids"]:
            cdir = os.path.join(run_dir, cand)
            for name in ("graph_edges.jsonl", "periods.json", "edge_list.tsv", "raw.json"):
                assert os.path.isfile(os.path.join(cdir, name))
        assert os.path.isfile(os.path.join(run_dir, "scores.json"))
        assert os.path.isfile(os.path.join(run_dir, "run_manifest.json"))

    def test_single_influencer_run(self, pipeline, tmp_path):
        _, ds_dir, _ = pipeline
        out = str(tmp_path / "single")
        rc = main([
            "simulate", "--dataset", ds_dir, "--out", out, "--influencer", "kol_00",
            "--seed", "3", "--periods", "15", "--start-minute", "780",
        ])
        assert rc == 0
        assert os.path.isfile(os.path.join(out, "kol_00", "raw.json"))

    def test_reused_fitted_models(self, pipeline, tmp_path):
        _, ds_dir, _ = pipeline
        tpath = str(tmp_path / "t.json")
        lpath = str(tmp_path / "l.json")
        main(["fit-timeline", "--dataset", ds_dir, "--out", tpath])
        main(["fit-lifecycle", "--dataset", ds_dir, "--out", lpath])
        out = str(tmp_path / "reuse")
        rc = main([
            "simulate", "--dataset", ds_dir, "--out", out, "--influencer", "kol_00",
            "--timeline-model", tpath, "--lifecycle-model", lpath,
            "--periods", "10", "--start-minute", "780",
        ])
        assert rc == 0


class TestRankEvaluateReport:
    def test_rank_outputs(self, pipeline):
        _, _, run_dir = pipeline
        ranking = json.load(open(os.path.join(run_dir, "ranking.json")))
        assert ranking[0]["rank"] == 1
        scores = json.load(open(os.path.join(run_dir, "scores.json")))
        assert {s["influencer_id"] for s in scores} == {r["influencer_id"] for r in ranking}

    def test_planted_candidate_ranks_first(self, pipeline):
        _, ds_dir, run_dir = pipeline
        gold = json.load(open(os.path.join(ds_dir, "campaign.json")))["gold_promoter_ids"]
        ranking = json.load(open(os.path.join(run_dir, "ranking.json")))
        assert ranking[0]["influencer_id"] == gold[0]

    def test_evaluate_prints_table1_arithmetic(self, tmp_path, capsys):
        # fixture shaped like 3 hits in the top 5 with a gold set of 6
        ranking = [
            {"rank": i + 1, "influencer_id": uid}
            for i, uid in enumerate(["g1", "g2", "g3", "x1", "x2", "x3"])
        ]
        rpath = tmp_path / "ranking.json"
        rpath.write_text(json.dumps(ranking))
        gold = {
            "product_name": "p", "ad_text": "t",
            "candidate_influencer_ids": [f"g{i}" for i in range(1, 7)] + ["x1", "x2", "x3"],
            "gold_promoter_ids": [f"g{i}" for i in range(1, 7)],
            "periods_T": 1, "period_minutes": 1,
        }
        gpath = tmp_path / "campaign.json"
        gpath.write_text(json.dumps(gold))
        rc = main(["evaluate", "--ranking", str(rpath), "--gold", str(gpath),
                   "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "0.60" in out  # P@5
        assert "0.50" in out  # R@5
        report = json.load(open(tmp_path / "report.json"))
        assert report["per_k"]["5"]["precision"] == pytest.approx(0.6)

    def test_report_emits_timeseries_csv(self, pipeline, capsys):
        _, ds_dir, run_dir = pipeline
        rc = main([
            "report", "--runs", run_dir, "--gold", os.path.join(ds_dir, "campaign.json"),
        ])
        assert rc == 0
        csv_path = os.path.join(run_dir, "ndcg_over_time.csv")
        lines = open(csv_path).read().splitlines()
        assert lines[0] == "period,ndcg_at_10"
        assert len(lines) == 41  # header + one row per simulated period
        out = capsys.readouterr().out
        assert "G@10" in out

    def test_evaluate_requires_target(self, tmp_path):
        rc = main(["evaluate", "--gold", str(tmp_path / "nope.json")])
        assert rc == 1


class TestBaselineCommand:
    def test_baseline_ranking_schema(self, pipeline):
        root, ds_dir, _ = pipeline
        out = str(root / "baseline")
        rc = main([
            "baseline", "--dataset", ds_dir, "--out", out, "--method", "celf",
            "--ic-runs", "200",
        ])
        assert rc == 0
        ranking = json.load(open(os.path.join(out, "ranking.json")))
        campaign = json.load(open(os.path.join(ds_dir, "campaign.json")))
        assert len(ranking) == len(campaign["candidate_influencer_ids"])
        assert ranking[0]["rank"] == 1
        manifest = json.load(open(os.path.join(out, "manifest-baseline.json")))
        assert manifest["config"]["evaluations"] > 0

    def test_methods_agree_on_seed_sets(self, pipeline):
        root, ds_dir, _ = pipeline
        out_a = str(root / "b1")
        out_b = str(root / "b2")
        main(["baseline", "--dataset", ds_dir, "--out", out_a, "--method", "celf",
              "--ic-runs", "200", "--seed", "5"])
        main(["baseline", "--dataset", ds_dir, "--out", out_b, "--method", "celfpp",
              "--ic-runs", "200", "--seed", "5"])
        a = json.load(open(os.path.join(out_a, "ranking.json")))
        b = json.load(open(os.path.join(out_b, "ranking.json")))
        assert [r["influencer_id"] for r in a] == [r["influencer_id"] for r in b]


class TestDeterminism:
    def test_simulate_idempotent(self, tmp_path):
        spec = write_spec(tmp_path)
        ds_dir = str(tmp_path / "ds")
        main(["synth", "--out", ds_dir, "--seed", "2", "--spec", spec])
        out1 = str(tmp_path / "r1")
        out2 = str(tmp_path / "r2")
        args = ["simulate", "--dataset", ds_dir, "--all-candidates", "--seed", "9",
                "--periods", "25", "--start-minute", "780"]
        assert main(args + ["--out", out1]) == 0
        assert main(args + ["--out", out2]) == 0
        campaign = json.load(open(os.path.join(ds_dir, "campaign.json")))
        assert (
            open(os.path.join(out1, "scores.json"), "rb").read()
            == open(os.path.join(out2, "scores.json"), "rb").read()
        )
        for cand in campaign["candidate_influencer_ids"]:
            for name in ("graph_edges.jsonl", "periods.json", "edge_list.tsv"):
                a = open(os.path.join(out1, cand, name), "rb").read()
                b = open(os.path.join(out2, cand, name), "rb").read()
                assert a == b
