"""Campaign simulation loop, influence scoring, and candidate ranking.

One campaign: the influencer posts the ad at period 0; each later period
the timeline model proposes active users, the survival model filters live
content, every active follower (plus everyone who already commented) reacts
through the behavior policy, and the interaction graph accumulates the
comments. After T periods the comment count and inclination statistics are
cashed out into a score.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .agents import BehaviorContext, build_profile, make_policy, predict_reaction
from .errors import DanglingReference, UnfittedModel
from .graph import init_graph
from .lifecycle import expiration_probability, expiration_time, extract_covariates
from .timeline import sample_active_users


@dataclass
class SimulationConfig:
    periods_T: int = 100
    period_minutes: int = 1
    alpha: float = 0.02
    theta: int = 15
    survival_threshold: float = 0.5
    seed: int = 0
    policy: str = "rule"
    start_minute: int = 0
    expire_window: int = 10       # consecutive zero periods observing expiration
    refresh_every: int = 10       # periods between covariate refreshes
    gmm_k: int = 2
    covariate_window: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.theta < 1 or self.periods_T < 1:
            raise ValueError("theta and periods_T must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class RawCampaignResult:
    influencer_id: str
    interaction_count: int            # comment edges after dedup
    mean_inclination: float
    std_inclination: float            # population formula (divide by count)
    per_period: list = field(default_factory=list)  # cumulative (t, count, mean, std)

    def to_json_dict(self):
        return asdict(self)


@dataclass
class CampaignScore:
    influencer_id: str
    interaction_count: int
    mean_inclination: float
    std_inclination: float
    consistency: float | None         # None below the theta cutoff
    score: float

    def to_json_dict(self):
        return asdict(self)


def _stable_int(*parts):
    digest = hashlib.blake2b("|".join(str(p) for p in parts).encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


@dataclass
class _ContentState:
    content_id: str
    author: str
    text: str
    birth: int
    counts: dict = field(default_factory=dict)   # absolute period -> interactions
    covariates: object = None
    covariates_age: int = -1


def _series_upto(state, t):
    """Interaction counts for periods [birth, t), all of which are final."""
    return np.array(
        [state.counts.get(p, 0) for p in range(state.birth, t)], dtype=np.int64
    )


def _content_alive(state, t, lifecycle_model, config):
    """Survival-model filter for one simulated content at period t.

    The hazard clock starts at the content's first interaction (the fitted
    population is engaged from its first period, so this aligns the query
    age with the model's time axis); content that has not been interacted
    with yet stays visible until the expiration window has elapsed.
    """
    age = t - state.birth
    if age <= 0:
        return False
    series = _series_upto(state, t)
    tau = expiration_time(series, config.expire_window)
    if tau is not None and t >= state.birth + tau:
        return False
    nonzero = np.flatnonzero(series)
    if nonzero.size == 0:
        return True  # nothing observed yet; too young to have expired
    # re-index from first engagement: the fitted population is engaged from
    # its first period, so both covariates and the hazard-clock query are
    # expressed in that frame
    first = int(nonzero[0])
    engaged_age = age - first
    if state.covariates is None or engaged_age - state.covariates_age >= config.refresh_every:
        state.covariates = extract_covariates(series[first:], config.covariate_window)
        state.covariates_age = engaged_age
    survival = 1.0 - expiration_probability(lifecycle_model, state.covariates, engaged_age)
    return survival > config.survival_threshold


def build_profiles(dataset, user_ids=None):
    """AgentProfiles for the given users (all users by default)."""
    events_by_user = {}
    for ev in dataset.events:
        events_by_user.setdefault(ev.user_id, []).append(ev)
    ids = sorted(dataset.users) if user_ids is None else sorted(user_ids)
    return {
        uid: build_profile(dataset.users[uid], events_by_user.get(uid, []))
        for uid in ids
    }


def pair_histories(dataset, influencers):
    """{influencer: {user: [(text, ts)]}} built in one pass over the events."""
    targets = set(influencers)
    authors = dataset.content_authors()
    raw = {inf: {} for inf in targets}
    for ev in dataset.events:
        parent = ev.parent_content_id
        if parent is None:
            continue
        target_author = authors.get(parent)
        if target_author in targets and ev.user_id != target_author:
            raw[target_author].setdefault(ev.user_id, []).append((ev.timestamp_min, ev.text))
        elif ev.user_id in targets and target_author is not None:
            raw[ev.user_id].setdefault(target_author, []).append((ev.timestamp_min, ev.text))
    return {
        inf: {uid: [(text, ts) for ts, text in sorted(pairs)] for uid, pairs in per.items()}
        for inf, per in raw.items()
    }


def inclination_stats(values):
    if not values:
        return 0.0, 0.0
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    return mean, float(np.sqrt(((arr - mean) ** 2).mean()))


def run_campaign(dataset, influencer, ad_text, config, *, timeline_model,
                 lifecycle_model, policy=None, profiles=None, histories=None):
    """Simulate one influencer's campaign for config.periods_T periods.

    Returns (graph, RawCampaignResult). Deterministic for a fixed config
    seed under the rule-based and stochastic policies.
    """
    if influencer not in dataset.users:
        raise DanglingReference(influencer, "candidate influencer")
    if timeline_model is None or lifecycle_model is None:
        raise UnfittedModel("run_campaign needs fitted timeline and lifecycle models")
    policy = policy or make_policy(config.policy)

    followers = dataset.followers_of(influencer)
    needed = set(followers) | {influencer}
    if profiles is None:
        profiles = build_profiles(dataset, needed)
    if histories is None:
        histories = pair_histories(dataset, [influencer])[influencer]
    influencer_profile = profiles[influencer]

    all_users = sorted(dataset.users)
    ad_cid = f"ad_{influencer}"
    graph = init_graph(influencer, ad_cid, ad_text)
    states = {ad_cid: _ContentState(ad_cid, influencer, ad_text, birth=0)}
    commenters = set()
    inclinations = []
    per_period = []
    campaign_seed = _stable_int(config.seed, influencer)

    for t in range(1, config.periods_T + 1):
        active = sample_active_users(
            timeline_model, t, all_users, config.period_minutes,
            campaign_seed, start_minute=config.start_minute,
        ).user_ids
        actors = sorted((active & followers) | commenters)

        live = [
            s for _, s in sorted(states.items())
            if _content_alive(s, t, lifecycle_model, config)
        ]
        reactions = []
        if live:
            period_seed = _stable_int(campaign_seed, t)
            for uid in actors:
                followed = dataset.followees_of(uid)
                visible = [
                    (s.content_id, s.text, s.author)
                    for s in live
                    if s.author == influencer or s.author in followed
                ]
                if not visible:
                    continue
                ctx = BehaviorContext(
                    profile=profiles[uid],
                    influencer_profile=influencer_profile,
                    history=histories.get(uid, []),
                    visible_contents=visible,
                )
                for r in predict_reaction(ctx, policy, period_seed):
                    if r.is_comment:
                        reactions.append((uid, r, states[r.target_content].author))

        snap = graph.append_period(reactions, t)
        for edge in snap.new_edges:
            target = states[edge.content_id]
            target.counts[t] = target.counts.get(t, 0) + 1
            commenters.add(edge.commenter)
            inclinations.append(edge.inclination)
            if dataset.followers_of(edge.commenter):
                cid = f"cmt_p{t:03d}_{edge.commenter}_{edge.content_id}"
                states[cid] = _ContentState(cid, edge.commenter, edge.text, birth=t)
        mean, std = inclination_stats(inclinations)
        per_period.append((t, len(inclinations), mean, std))

    mean, std = inclination_stats(inclinations)
    raw = RawCampaignResult(
        influencer_id=influencer,
        interaction_count=len(inclinations),
        mean_inclination=mean,
        std_inclination=std,
        per_period=per_period,
    )
    return graph, raw


def score_campaign(raws, config):
    """Turn raw per-candidate results into final influence scores.

    Candidates below the theta interaction cutoff score their raw count;
    the rest blend count and inclination consistency, where consistency
    normalizes each standard deviation by the campaign-wide maximum among
    qualifying candidates (1 when that maximum is zero).
    """
    if not raws:
        raise ValueError("score_campaign needs at least one candidate result")
    qualifying = [r.std_inclination for r in raws if r.interaction_count >= config.theta]
    sigma_max = max(qualifying) if qualifying else 0.0
    scores = []
    for r in raws:
        if r.interaction_count < config.theta:
            consistency = None
            score = float(r.interaction_count)
        else:
            consistency = 1.0 if sigma_max == 0.0 else 1.0 - r.std_inclination / sigma_max
            score = config.alpha * r.interaction_count + (1.0 - config.alpha) * consistency
        scores.append(
            CampaignScore(
                influencer_id=r.influencer_id,
                interaction_count=r.interaction_count,
                mean_inclination=r.mean_inclination,
                std_inclination=r.std_inclination,
                consistency=consistency,
                score=score,
            )
        )
    return scores


def rank_influencers(scores):
    """Descending by score, ties by interaction count then id."""
    if not scores:
        raise ValueError("rank_influencers needs at least one score")
    return sorted(
        scores,
        key=lambda s: (-s.score, -s.interaction_count, s.influencer_id),
    )


def simulate_all_candidates(dataset, config, *, timeline_model, lifecycle_model,
                            policy=None, jobs=1, cache=None):
    """Run every campaign candidate and return {influencer: (graph, raw)}.

    `cache` may be a dict reused across calls with the same dataset to skip
    rebuilding profiles and pair histories (both are seed-independent).
    """
    candidates = list(dataset.campaign.candidate_influencer_ids)
    cache = cache if cache is not None else {}
    if "profiles" not in cache:
        needed = {u for c in candidates for u in dataset.followers_of(c)}
        needed.update(candidates)
        cache["profiles"] = build_profiles(dataset, needed)
    if "histories" not in cache:
        cache["histories"] = pair_histories(dataset, candidates)
    profiles = cache["profiles"]
    histories = cache["histories"]
    ad_text = dataset.campaign.ad_text

    def one(influencer):
        return influencer, run_campaign(
            dataset, influencer, ad_text, config,
            timeline_model=timeline_model, lifecycle_model=lifecycle_model,
            policy=policy, profiles=profiles, histories=histories[influencer],
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(one, candidates))
    else:
        results = dict(one(c) for c in candidates)
    return results


def save_scores(scores, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([s.to_json_dict() for s in scores], fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_ranking(ranking, path):
    rows = [
        {"rank": i + 1, **s.to_json_dict()} for i, s in enumerate(ranking)
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_raw_results(paths):
    out = []
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            d = json.load(fh)
        out.append(
            RawCampaignResult(
                influencer_id=d["influencer_id"],
                interaction_count=d["interaction_count"],
                mean_inclination=d["mean_inclination"],
                std_inclination=d["std_inclination"],
                per_period=[tuple(row) for row in d.get("per_period", [])],
            )
        )
    return out
