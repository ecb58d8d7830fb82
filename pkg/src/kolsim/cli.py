"""Command-line entry point.

Subcommands: synth, fit-timeline, fit-lifecycle, simulate, baseline, rank,
evaluate, report. Every artifact-producing run writes a manifest capturing
the config, seed, input hashes and artifact paths; identical inputs and
seed reproduce identical artifacts under the offline policies.
"""

from __future__ import annotations

import argparse
import glob
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict

from .baselines import IcModel, celf_select, celfpp_select
from .dataset import SynthSpec, generate_synthetic, load_dataset, write_dataset
from .errors import KolsimError
from .lifecycle import ContentLifecycleModel, fit_coxph, observation_from_series
from .metrics import evaluate_ranking, format_report_table
from .agents import make_policy
from .errors import AllZeroSeries
from .simulator import (
    SimulationConfig,
    load_raw_results,
    rank_influencers,
    run_campaign,
    save_ranking,
    save_scores,
    score_campaign,
    simulate_all_candidates,
)
from .timeline import UserTimelineModel, fit_gmm


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_hashes(paths):
    out = {}
    for p in paths:
        if os.path.isdir(p):
            for f in sorted(glob.glob(os.path.join(p, "*"))):
                if os.path.isfile(f):
                    out[f] = _sha256(f)
        elif os.path.isfile(p):
            out[p] = _sha256(p)
    return out


def _write_manifest(out_dir, name, command, config, seed, inputs, artifacts, started):
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "input_hashes": _input_hashes(inputs),
        "artifacts": sorted(artifacts),
        "duration_sec": round(time.time() - started, 3),
    }
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _sim_config(args):
    return SimulationConfig(
        periods_T=args.periods,
        period_minutes=args.period_minutes,
        alpha=args.alpha,
        theta=args.theta,
        survival_threshold=args.survival_threshold,
        seed=args.seed,
        policy=args.policy,
        start_minute=args.start_minute,
        gmm_k=args.k,
    )


def _policy_from_args(args):
    if args.policy == "llm":
        if not args.llm_endpoint:
            raise KolsimError("--llm-endpoint is required with --policy llm")
        return make_policy("llm", endpoint=args.llm_endpoint)
    return make_policy(args.policy)


def _fit_models(dataset, args):
    if getattr(args, "timeline_model", None):
        timeline = UserTimelineModel.load(args.timeline_model)
    else:
        samples = [float(m) for m in dataset.minute_samples()]
        timeline = fit_gmm(samples, args.k, seed=args.seed)
    if getattr(args, "lifecycle_model", None):
        lifecycle = ContentLifecycleModel.load(args.lifecycle_model)
    else:
        lifecycle = _fit_lifecycle_from_dataset(dataset, args)
    return timeline, lifecycle


def _fit_lifecycle_from_dataset(dataset, args):
    observations = []
    for _cid, (_birth, series) in sorted(dataset.content_series(args.period_minutes).items()):
        try:
            observations.append(
                observation_from_series(series, args.delta, args.expire_window)
            )
        except AllZeroSeries:
            continue
    return fit_coxph(observations)


# --- subcommands -------------------------------------------------------------

def cmd_synth(args):
    started = time.time()
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            spec = SynthSpec.from_json_dict(json.load(fh))
    else:
        spec = SynthSpec()
    ds = generate_synthetic(spec, args.seed)
    write_dataset(ds, args.out)
    _write_manifest(
        args.out, "run_manifest.json", "synth", spec.to_json_dict(), args.seed,
        [args.spec] if args.spec else [],
        [os.path.join(args.out, f) for f in
         ("users.jsonl", "follows.jsonl", "interactions.jsonl", "campaign.json")],
        started,
    )
    print(f"wrote dataset: {len(ds.users)} users, {len(ds.events)} events -> {args.out}")
    return 0


def cmd_fit_timeline(args):
    started = time.time()
    ds = load_dataset(args.dataset)
    samples = [float(m) for m in ds.minute_samples()]
    model = fit_gmm(samples, args.k, seed=args.seed)
    model.save(args.out)
    _write_manifest(
        os.path.dirname(os.path.abspath(args.out)) or ".", "manifest-fit-timeline.json",
        "fit-timeline", {"k": args.k}, args.seed, [args.dataset], [args.out], started,
    )
    comps = ", ".join(
        f"(w={c.weight:.3f}, mean={c.mean:.1f}, var={c.variance:.1f})"
        for c in model.components
    )
    print(f"fitted {model.k}-component activity model on {model.sample_count} samples: {comps}")
    return 0


def cmd_fit_lifecycle(args):
    started = time.time()
    ds = load_dataset(args.dataset)
    model = _fit_lifecycle_from_dataset(ds, args)
    model.save(args.out)
    _write_manifest(
        os.path.dirname(os.path.abspath(args.out)) or ".", "manifest-fit-lifecycle.json",
        "fit-lifecycle", {"delta": args.delta, "expire_window": args.expire_window},
        args.seed, [args.dataset], [args.out], started,
    )
    beta = ", ".join(f"{b:+.4f}" for b in model.beta)
    print(f"fitted survival model: beta=[{beta}], {len(model.baseline_times)} baseline steps")
    return 0


def _write_campaign_artifacts(out_dir, influencer, graph, raw):
    cdir = os.path.join(out_dir, influencer)
    os.makedirs(cdir, exist_ok=True)
    graph.export_edges_jsonl(os.path.join(cdir, "graph_edges.jsonl"))
    graph.export_periods_index(os.path.join(cdir, "periods.json"))
    graph.export_edge_list(os.path.join(cdir, "edge_list.tsv"))
    with open(os.path.join(cdir, "raw.json"), "w", encoding="utf-8") as fh:
        json.dump(raw.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [
        os.path.join(cdir, f)
        for f in ("graph_edges.jsonl", "periods.json", "edge_list.tsv", "raw.json")
    ]


def cmd_simulate(args):
    started = time.time()
    ds = load_dataset(args.dataset)
    config = _sim_config(args)
    policy = _policy_from_args(args)
    timeline, lifecycle = _fit_models(ds, args)
    os.makedirs(args.out, exist_ok=True)
    artifacts = []
    if args.all_candidates:
        results = simulate_all_candidates(
            ds, config, timeline_model=timeline, lifecycle_model=lifecycle,
            policy=policy, jobs=args.jobs,
        )
        raws = []
        for influencer in ds.campaign.candidate_influencer_ids:
            graph, raw = results[influencer]
            raws.append(raw)
            artifacts += _write_campaign_artifacts(args.out, influencer, graph, raw)
        scores = score_campaign(raws, config)
        save_scores(scores, os.path.join(args.out, "scores.json"))
        artifacts.append(os.path.join(args.out, "scores.json"))
        print(f"simulated {len(raws)} candidates over {config.periods_T} periods")
    else:
        if not args.influencer:
            raise KolsimError("simulate needs --influencer <id> or --all-candidates")
        graph, raw = run_campaign(
            ds, args.influencer, ds.campaign.ad_text, config,
            timeline_model=timeline, lifecycle_model=lifecycle, policy=policy,
        )
        artifacts += _write_campaign_artifacts(args.out, args.influencer, graph, raw)
        print(
            f"simulated {args.influencer}: {raw.interaction_count} comments, "
            f"mean inclination {raw.mean_inclination:.2f}"
        )
    _write_manifest(
        args.out, "run_manifest.json", "simulate", asdict(config), args.seed,
        [args.dataset], artifacts, started,
    )
    return 0


def cmd_baseline(args):
    started = time.time()
    ds = load_dataset(args.dataset)
    model = IcModel(p=args.ic_p, runs=args.ic_runs, seed=args.seed)
    candidates = ds.campaign.candidate_influencer_ids
    select = celf_select if args.method == "celf" else celfpp_select
    result = select(ds.follows, len(candidates), model,
                    candidates=candidates, nodes=ds.users)
    os.makedirs(args.out, exist_ok=True)
    rows = [
        {"rank": i + 1, "influencer_id": uid, "score": gain}
        for i, (uid, gain) in enumerate(zip(result.seeds, result.marginal_gains))
    ]
    path = os.path.join(args.out, "ranking.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(
        args.out, "manifest-baseline.json", f"baseline:{args.method}",
        {"p": args.ic_p, "runs": args.ic_runs, "evaluations": result.evaluations},
        args.seed, [args.dataset], [path], started,
    )
    print(f"{args.method}: seeds {result.seeds[:5]}..., {result.evaluations} evaluations")
    return 0


def _load_all_raws(runs_dir):
    paths = sorted(glob.glob(os.path.join(runs_dir, "*", "raw.json")))
    if not paths:
        raise KolsimError(f"no raw.json campaign results under {runs_dir}")
    return load_raw_results(paths)


def cmd_rank(args):
    started = time.time()
    raws = _load_all_raws(args.runs)
    config = _sim_config(args)
    scores = score_campaign(raws, config)
    ranking = rank_influencers(scores)
    save_scores(scores, os.path.join(args.runs, "scores.json"))
    save_ranking(ranking, os.path.join(args.runs, "ranking.json"))
    _write_manifest(
        args.runs, "manifest-rank.json", "rank",
        {"alpha": args.alpha, "theta": args.theta}, args.seed, [args.runs],
        [os.path.join(args.runs, "scores.json"), os.path.join(args.runs, "ranking.json")],
        started,
    )
    for i, s in enumerate(ranking[:10], start=1):
        print(f"{i:2d}. {s.influencer_id}  score={s.score:.4f}  comments={s.interaction_count}")
    return 0


def _gold_from_file(path):
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    gold = obj.get("gold_promoter_ids")
    if not gold:
        raise KolsimError(f"{path} has no gold_promoter_ids")
    return set(gold)


def _ranking_ids(path):
    with open(path, encoding="utf-8") as fh:
        rows = json.load(fh)
    return [row["influencer_id"] for row in sorted(rows, key=lambda r: r["rank"])]


def cmd_evaluate(args):
    started = time.time()
    if not args.ranking and not args.runs:
        raise KolsimError("evaluate needs --ranking <file> or --runs <dir>")
    ranking_path = args.ranking or os.path.join(args.runs, "ranking.json")
    ranking = _ranking_ids(ranking_path)
    gold = _gold_from_file(args.gold)
    report = evaluate_ranking(ranking, gold, ks=tuple(args.eval_k))
    out_dir = args.out or os.path.dirname(os.path.abspath(ranking_path))
    os.makedirs(out_dir, exist_ok=True)
    report.save(os.path.join(out_dir, "report.json"))
    _write_manifest(
        out_dir, "manifest-evaluate.json", "evaluate",
        {"eval_k": list(args.eval_k)}, args.seed, [ranking_path, args.gold],
        [os.path.join(out_dir, "report.json")], started,
    )
    print(format_report_table(report))
    return 0


def cmd_report(args):
    started = time.time()
    raws = _load_all_raws(args.runs)
    gold = _gold_from_file(args.gold)
    config = _sim_config(args)

    periods = sorted({row[0] for raw in raws for row in raw.per_period})
    csv_path = os.path.join(args.runs, "ndcg_over_time.csv")
    from .simulator import RawCampaignResult

    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("period,ndcg_at_10\n")
        for t in periods:
            snapshot = []
            for raw in raws:
                row = next((r for r in raw.per_period if r[0] == t), None)
                if row is None:
                    continue
                snapshot.append(
                    RawCampaignResult(
                        influencer_id=raw.influencer_id,
                        interaction_count=int(row[1]),
                        mean_inclination=row[2],
                        std_inclination=row[3],
                    )
                )
            ranking = rank_influencers(score_campaign(snapshot, config))
            ids = [s.influencer_id for s in ranking]
            report = evaluate_ranking(ids, gold, ks=(10,))
            fh.write(f"{t},{report.per_k[10]['ndcg']:.6f}\n")

    final = rank_influencers(score_campaign(raws, config))
    ids = [s.influencer_id for s in final]
    report = evaluate_ranking(ids, gold, ks=tuple(args.eval_k))
    print(format_report_table(report))
    print(f"per-period NDCG@10 written to {csv_path}")
    _write_manifest(
        args.runs, "manifest-report.json", "report",
        {"eval_k": list(args.eval_k)}, args.seed, [args.runs, args.gold],
        [csv_path], started,
    )
    return 0


# --- parser ------------------------------------------------------------------

def _add_common(p, dataset=True, out=True):
    if dataset:
        p.add_argument("--dataset", required=True, help="dataset directory")
    if out:
        p.add_argument("--out", required=True, help="output path")
    p.add_argument("--seed", type=int, default=0)


def _add_sim_flags(p):
    p.add_argument("--periods", type=int, default=100)
    p.add_argument("--period-minutes", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.02)
    p.add_argument("--theta", type=int, default=15)
    p.add_argument("--k", type=int, default=2, help="mixture components")
    p.add_argument("--survival-threshold", type=float, default=0.5)
    p.add_argument("--policy", choices=("rule", "stochastic", "llm"), default="rule")
    p.add_argument("--llm-endpoint", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--start-minute", type=int, default=0)
    p.add_argument("--delta", type=int, default=1, help="covariate window (periods)")
    p.add_argument("--expire-window", type=int, default=10)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kolsim",
        description="Simulate ad campaigns on a social graph and rank influencers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    _add_common(p, dataset=False)
    p.add_argument("--spec", default=None, help="SynthSpec JSON file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit-timeline", help="fit the activity mixture model")
    _add_common(p)
    p.add_argument("--k", type=int, default=2)
    p.set_defaults(func=cmd_fit_timeline)

    p = sub.add_parser("fit-lifecycle", help="fit the content survival model")
    _add_common(p)
    p.add_argument("--period-minutes", type=int, default=1)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--expire-window", type=int, default=10)
    p.set_defaults(func=cmd_fit_lifecycle)

    p = sub.add_parser("simulate", help="run campaign simulation(s)")
    _add_common(p)
    _add_sim_flags(p)
    p.add_argument("--influencer", default=None)
    p.add_argument("--all-candidates", action="store_true")
    p.add_argument("--timeline-model", default=None, help="reuse a fitted model JSON")
    p.add_argument("--lifecycle-model", default=None, help="reuse a fitted model JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("baseline", help="run a greedy influence-maximization baseline")
    _add_common(p)
    p.add_argument("--method", choices=("celf", "celfpp"), required=True)
    p.add_argument("--ic-p", type=float, default=0.1)
    p.add_argument("--ic-runs", type=int, default=1000)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("rank", help="score and rank simulated candidates")
    p.add_argument("--runs", required=True, help="simulate output directory")
    p.add_argument("--seed", type=int, default=0)
    _add_sim_flags(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("evaluate", help="compare a ranking against the gold set")
    p.add_argument("--runs", default=None, help="directory holding ranking.json")
    p.add_argument("--ranking", default=None, help="explicit ranking.json path")
    p.add_argument("--gold", required=True, help="campaign.json with gold_promoter_ids")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-k", type=int, nargs="+", default=[5, 10])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="metric table plus NDCG@10-over-time CSV")
    p.add_argument("--runs", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-k", type=int, nargs="+", default=[5, 10])
    _add_sim_flags(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KolsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
