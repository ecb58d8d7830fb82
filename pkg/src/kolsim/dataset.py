"""Canonical data model, JSONL dataset I/O, and the synthetic generator.

A dataset directory holds users.jsonl, follows.jsonl, interactions.jsonl
and campaign.json. Loading cross-validates every reference and invariant;
the loaded Dataset is immutable by convention and safe to share.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DanglingReference, InvalidSpec, MalformedRecord, MissingFile

MINUTES_PER_DAY = 1440


@dataclass
class UserRecord:
    user_id: str
    follower_count: int
    post_texts: list
    domain_tags: list


@dataclass
class FollowEdge:
    follower_id: str
    influencer_id: str


@dataclass
class InteractionEvent:
    event_id: str
    user_id: str
    content_id: str
    parent_content_id: str | None
    timestamp_min: int
    minute_of_day: int
    text: str


@dataclass
class CampaignSpec:
    product_name: str
    ad_text: str
    candidate_influencer_ids: list
    gold_promoter_ids: list
    periods_T: int
    period_minutes: int


@dataclass
class Dataset:
    users: dict
    follows: list
    events: list
    campaign: CampaignSpec
    _followers: dict = field(default_factory=dict, repr=False, compare=False)
    _followees: dict = field(default_factory=dict, repr=False, compare=False)
    _content_authors: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for e in self.follows:
            self._followers.setdefault(e.influencer_id, set()).add(e.follower_id)
            self._followees.setdefault(e.follower_id, set()).add(e.influencer_id)

    def followers_of(self, user_id):
        return self._followers.get(user_id, set())

    def followees_of(self, user_id):
        return self._followees.get(user_id, set())

    def content_authors(self):
        """content_id -> user_id of the event that created it (first wins)."""
        if self._content_authors is None:
            authors = {}
            for ev in self.events:
                authors.setdefault(ev.content_id, ev.user_id)
            self._content_authors = authors
        return self._content_authors

    def minute_samples(self):
        """Pooled minute-of-day values for all events."""
        return [ev.minute_of_day for ev in self.events]

    def minute_samples_by_user(self):
        out = {}
        for ev in self.events:
            out.setdefault(ev.user_id, []).append(ev.minute_of_day)
        return out

    def event_counts_by_user(self):
        out = {}
        for ev in self.events:
            out[ev.user_id] = out.get(ev.user_id, 0) + 1
        return out

    def events_of_user(self, user_id):
        return [ev for ev in self.events if ev.user_id == user_id]

    def content_series(self, period_minutes=1):
        """Per-content interaction series, indexed from the content's birth.

        Returns {content_id: (birth_period, counts)} where counts[q] is the
        number of comment events on the content q periods after its creator
        event; the creating event itself is not counted. Series extend to
        the last period present in the data.
        """
        if not self.events:
            return {}
        authors = self.content_authors()
        birth = {}
        for ev in self.events:
            p = ev.timestamp_min // period_minutes
            if ev.content_id not in birth or p < birth[ev.content_id]:
                birth.setdefault(ev.content_id, p)
        end = max(ev.timestamp_min // period_minutes for ev in self.events)
        series = {
            cid: np.zeros(end - b + 1, dtype=np.int64) for cid, b in birth.items()
        }
        for ev in self.events:
            parent = ev.parent_content_id
            if parent is None or parent not in birth:
                continue
            q = ev.timestamp_min // period_minutes - birth[parent]
            if q >= 0:
                series[parent][q] += 1
        del authors
        return {cid: (birth[cid], series[cid]) for cid in birth}

    def pair_history(self, influencer_id):
        """Past (text, timestamp) exchanges between each user and the
        influencer: the user's comments on the influencer's contents plus
        the influencer's comments on the user's contents, time-ordered."""
        authors = self.content_authors()
        out = {}
        for ev in self.events:
            parent = ev.parent_content_id
            if parent is None:
                continue
            target_author = authors.get(parent)
            if ev.user_id != influencer_id and target_author == influencer_id:
                out.setdefault(ev.user_id, []).append((ev.timestamp_min, ev.text))
            elif ev.user_id == influencer_id and target_author is not None:
                out.setdefault(target_author, []).append((ev.timestamp_min, ev.text))
        return {
            uid: [(text, ts) for ts, text in sorted(pairs)]
            for uid, pairs in out.items()
        }


# --- loading ----------------------------------------------------------------

def _read_jsonl(path):
    if not os.path.isfile(path):
        raise MissingFile(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(path, line_no, f"invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise MalformedRecord(path, line_no, "record is not a JSON object")
            records.append((line_no, obj))
    return records


def _require(obj, key, types, path, line_no):
    if key not in obj:
        raise MalformedRecord(path, line_no, f"missing field {key!r}")
    value = obj[key]
    if not isinstance(value, types):
        raise MalformedRecord(path, line_no, f"field {key!r} has wrong type")
    return value


def load_dataset(path):
    """Load and cross-validate a dataset directory."""
    users_path = os.path.join(path, "users.jsonl")
    follows_path = os.path.join(path, "follows.jsonl")
    events_path = os.path.join(path, "interactions.jsonl")
    campaign_path = os.path.join(path, "campaign.json")

    users = {}
    for line_no, obj in _read_jsonl(users_path):
        uid = _require(obj, "user_id", str, users_path, line_no)
        fc = _require(obj, "follower_count", int, users_path, line_no)
        posts = _require(obj, "post_texts", list, users_path, line_no)
        tags = _require(obj, "domain_tags", list, users_path, line_no)
        if uid in users:
            raise MalformedRecord(users_path, line_no, f"duplicate user_id {uid!r}")
        if fc < 0:
            raise MalformedRecord(users_path, line_no, "follower_count is negative")
        users[uid] = UserRecord(uid, fc, list(posts), list(tags))

    follows = []
    seen_edges = set()
    for line_no, obj in _read_jsonl(follows_path):
        follower = _require(obj, "follower_id", str, follows_path, line_no)
        influencer = _require(obj, "influencer_id", str, follows_path, line_no)
        if follower not in users:
            raise DanglingReference(follower, f"{follows_path}:{line_no}")
        if influencer not in users:
            raise DanglingReference(influencer, f"{follows_path}:{line_no}")
        if follower == influencer:
            raise MalformedRecord(follows_path, line_no, "self-follow")
        if (follower, influencer) in seen_edges:
            continue
        seen_edges.add((follower, influencer))
        follows.append(FollowEdge(follower, influencer))

    events = []
    event_ids = set()
    content_ids = set()
    parent_of = {}
    for line_no, obj in _read_jsonl(events_path):
        eid = _require(obj, "event_id", str, events_path, line_no)
        uid = _require(obj, "user_id", str, events_path, line_no)
        cid = _require(obj, "content_id", str, events_path, line_no)
        parent = obj.get("parent_content_id")
        if parent is not None and not isinstance(parent, str):
            raise MalformedRecord(events_path, line_no, "parent_content_id has wrong type")
        ts = _require(obj, "timestamp_min", int, events_path, line_no)
        text = _require(obj, "text", str, events_path, line_no)
        if eid in event_ids:
            raise MalformedRecord(events_path, line_no, f"duplicate event_id {eid!r}")
        if ts < 0:
            raise MalformedRecord(events_path, line_no, "timestamp_min is negative")
        if uid not in users:
            raise DanglingReference(uid, f"{events_path}:{line_no}")
        event_ids.add(eid)
        content_ids.add(cid)
        if cid not in parent_of:
            parent_of[cid] = parent
        events.append(
            InteractionEvent(eid, uid, cid, parent, ts, ts % MINUTES_PER_DAY, text)
        )
    for ev in events:
        if ev.parent_content_id is not None and ev.parent_content_id not in content_ids:
            raise DanglingReference(ev.parent_content_id, events_path)
    _check_acyclic(parent_of, events_path)

    if not os.path.isfile(campaign_path):
        raise MissingFile(campaign_path)
    with open(campaign_path, encoding="utf-8") as fh:
        try:
            cobj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(campaign_path, 1, f"invalid JSON ({exc.msg})") from None
    campaign = _parse_campaign(cobj, campaign_path, users)

    return Dataset(users=users, follows=follows, events=events, campaign=campaign)


def _check_acyclic(parent_of, path):
    state = {}
    for start in parent_of:
        node = start
        chain = []
        while node is not None and state.get(node) is None:
            state[node] = "visiting"
            chain.append(node)
            node = parent_of.get(node)
        if node is not None and state.get(node) == "visiting":
            raise MalformedRecord(path, 0, f"content parent chain contains a cycle at {node!r}")
        for n in chain:
            state[n] = "done"


def _parse_campaign(obj, path, users):
    for key in ("product_name", "ad_text", "candidate_influencer_ids",
                "gold_promoter_ids", "periods_T", "period_minutes"):
        if key not in obj:
            raise MalformedRecord(path, 1, f"missing field {key!r}")
    candidates = list(obj["candidate_influencer_ids"])
    gold = list(obj["gold_promoter_ids"])
    if not candidates:
        raise MalformedRecord(path, 1, "candidate list is empty")
    if not set(gold) <= set(candidates):
        missing = sorted(set(gold) - set(candidates))[0]
        raise MalformedRecord(path, 1, f"gold promoter {missing!r} not in candidate list")
    for cid in candidates:
        if cid not in users:
            raise DanglingReference(cid, path)
    if int(obj["periods_T"]) < 1 or int(obj["period_minutes"]) < 1:
        raise MalformedRecord(path, 1, "periods_T and period_minutes must be >= 1")
    return CampaignSpec(
        product_name=obj["product_name"],
        ad_text=obj["ad_text"],
        candidate_influencer_ids=candidates,
        gold_promoter_ids=gold,
        periods_T=int(obj["periods_T"]),
        period_minutes=int(obj["period_minutes"]),
    )


def write_dataset(dataset, path):
    """Write the dataset in canonical order (stable across runs)."""
    os.makedirs(path, exist_ok=True)

    def dump(obj):
        return json.dumps(obj, sort_keys=True, ensure_ascii=False)

    with open(os.path.join(path, "users.jsonl"), "w", encoding="utf-8") as fh:
        for uid in sorted(dataset.users):
            u = dataset.users[uid]
            fh.write(dump({
                "user_id": u.user_id,
                "follower_count": u.follower_count,
                "post_texts": u.post_texts,
                "domain_tags": u.domain_tags,
            }) + "\n")
    with open(os.path.join(path, "follows.jsonl"), "w", encoding="utf-8") as fh:
        for e in sorted(dataset.follows, key=lambda e: (e.follower_id, e.influencer_id)):
            fh.write(dump({"follower_id": e.follower_id, "influencer_id": e.influencer_id}) + "\n")
    with open(os.path.join(path, "interactions.jsonl"), "w", encoding="utf-8") as fh:
        for ev in sorted(dataset.events, key=lambda ev: (ev.timestamp_min, ev.event_id)):
            fh.write(dump({
                "event_id": ev.event_id,
                "user_id": ev.user_id,
                "content_id": ev.content_id,
                "parent_content_id": ev.parent_content_id,
                "timestamp_min": ev.timestamp_min,
                "text": ev.text,
            }) + "\n")
    with open(os.path.join(path, "campaign.json"), "w", encoding="utf-8") as fh:
        json.dump(asdict(dataset.campaign), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


# --- synthetic generation ----------------------------------------------------

TOPIC_WORDS = {
    "skincare": ["skincare", "serum", "moisturizer", "cream", "cleanser", "hydration",
                 "glow", "sunscreen", "toner", "facial", "routine", "lotion"],
    "parenting": ["parenting", "toddler", "stroller", "daycare", "homework", "bedtime",
                  "playground", "diaper", "storybook", "snacks", "preschool", "naptime"],
    "tech": ["gadget", "firmware", "benchmark", "processor", "battery", "android",
             "laptop", "sensor", "robot", "charging", "bluetooth", "pixels"],
    "fitness": ["workout", "protein", "treadmill", "yoga", "cardio", "stretching",
                "marathon", "kettlebell", "reps", "hydrate", "sneakers", "coach"],
    "cooking": ["recipe", "saucepan", "roasted", "garlic", "baking", "broth",
                "seasoning", "skillet", "simmer", "dessert", "noodles", "marinade"],
    "travel": ["itinerary", "hostel", "passport", "backpack", "sightseeing", "luggage",
               "boarding", "resort", "roadtrip", "beaches", "visa", "camping"],
    "home": ["furniture", "declutter", "vacuum", "laundry", "cushion", "organizer",
             "lighting", "curtains", "renovation", "shelving", "scrubbing", "mop"],
    "gaming": ["console", "quests", "leaderboard", "loadout", "speedrun", "esports",
               "controller", "graphics", "multiplayer", "respawn", "arcade", "patching"],
    "music": ["playlist", "vinyl", "concert", "chorus", "acoustic", "headphones",
              "melody", "festival", "lyrics", "remix", "bassline", "encore"],
    "finance": ["budget", "dividend", "savings", "portfolio", "investing", "etf",
                "compound", "frugal", "mortgage", "equity", "retirement", "index"],
}

_POST_FILLER = ["sharing", "favorite", "weekend", "notes", "thoughts", "update"]
_AD_FILLER = ["launching", "official", "giveaway", "limited"]

_COMMENT_TEMPLATES = [
    "love this {a}, the {b} finish is unreal",
    "that {a} with the {b} looks great",
    "been using this {a} and {b} combo all month",
    "is the {a} really worth it for daily {b} use?",
    "a bit pricey for a {a} honestly",
    "adding this {a} and the {b} to my wishlist",
    "does the {a} pair well with a {b}?",
    "the {a} sold me instantly, skipping the {b}",
    "ordered the {a} after seeing this {b}",
    "skeptical about the {b} but the {a} delivers",
    "gifting a {a} to my sister along with the {b}",
    "my {a} upgrade was overdue, the {b} can wait",
]

_POST_TEMPLATES = [
    "{a} {b} {c} {f}",
    "my {a} and {b} {f} this {c}",
    "{f}: trying a new {a} with {b} and {c}",
    "big fan of {a}, {b} and a good {c}",
]


@dataclass
class SynthSpec:
    """Knobs for the seeded synthetic dataset with planted ground truth."""
    n_users: int = 1000
    n_candidates: int = 10
    followers_per_candidate: int = 85
    activity_means: tuple = (780.0, 1260.0)
    activity_variances: tuple = (3600.0, 8100.0)
    activity_weights: tuple = (0.7, 0.3)
    activity_rate_range: tuple = (0.5, 1.5)
    n_contents: int = 900
    content_intensity_range: tuple = (0.4, 5.0)
    # hazard log-multipliers for the (normalized log-intensity, burstiness)
    # latents: engaging content lives longer; intensity also suppresses
    # mid-life silent periods, so observed duration carries survival signal
    # without exactly equalling the death time
    survival_beta: tuple = (-1.2, 0.35)
    base_hazard: float = 0.05
    dropout: float = 0.28          # per-period silence chance at latent 0
    max_lifetime: int = 48
    intensity_decay: float = 5.0   # periods; comments concentrate near birth
    n_days: int = 3
    product_topic: str = "skincare"
    product_name: str = "hydra glow face cream"
    periods_T: int = 100
    period_minutes: int = 1

    def validate(self):
        if abs(sum(self.activity_weights) - 1.0) > 1e-9:
            raise InvalidSpec(
                f"activity weights sum to {sum(self.activity_weights)!r}, expected 1"
            )
        if len(self.activity_means) != len(self.activity_variances) or len(
            self.activity_means
        ) != len(self.activity_weights):
            raise InvalidSpec("activity means/variances/weights lengths differ")
        if any(v <= 0 for v in self.activity_variances):
            raise InvalidSpec("activity variances must be positive")
        if self.n_candidates < 1 or self.n_users < self.n_candidates:
            raise InvalidSpec("need at least one candidate and n_users >= n_candidates")
        need = self.n_candidates * (1 + self.followers_per_candidate)
        if self.n_users < need:
            raise InvalidSpec(f"n_users={self.n_users} too small for {need} candidate+follower slots")
        if self.product_topic not in TOPIC_WORDS:
            raise InvalidSpec(f"unknown product topic {self.product_topic!r}")
        if not 0 < self.base_hazard < 1:
            raise InvalidSpec("base_hazard must be in (0, 1)")

    def to_json_dict(self):
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d):
        kwargs = {}
        for key, value in d.items():
            kwargs[key] = tuple(value) if isinstance(value, list) else value
        return cls(**kwargs)


def _draw_minute(rng, spec):
    k = rng.choice(len(spec.activity_weights), p=np.asarray(spec.activity_weights))
    m = rng.normal(spec.activity_means[k], math.sqrt(spec.activity_variances[k]))
    return int(m) % MINUTES_PER_DAY


def _post_text(rng, palette):
    tpl = _POST_TEMPLATES[rng.integers(len(_POST_TEMPLATES))]
    a, b, c = rng.choice(palette, size=3, replace=False)
    f = _POST_FILLER[rng.integers(len(_POST_FILLER))]
    return tpl.format(a=a, b=b, c=c, f=f)


def _comment_text(rng, palette):
    tpl = _COMMENT_TEMPLATES[rng.integers(len(_COMMENT_TEMPLATES))]
    a, b = rng.choice(palette, size=2, replace=False)
    return tpl.format(a=a, b=b)


def generate_synthetic(spec, seed):
    """Deterministically generate a dataset with one planted best influencer.

    The planted candidate's domain matches the campaign product, and its
    followers post about that domain, so a semantics-aware ranking should
    put it first. Other candidates' followings are size-varied so that
    reach-only baselines prefer someone else.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    topics = list(TOPIC_WORDS)
    other_topics = [t for t in topics if t != spec.product_topic]

    users = {}
    follows = []
    candidate_ids = [f"kol_{i:02d}" for i in range(spec.n_candidates)]
    planted = candidate_ids[0]
    cand_topic = {planted: spec.product_topic}
    for i, cid in enumerate(candidate_ids[1:]):
        cand_topic[cid] = other_topics[i % len(other_topics)]

    # size followings so the planted candidate is not the reach winner
    sizes = spec.followers_per_candidate + rng.integers(
        -15, 25, size=spec.n_candidates
    )
    sizes = np.maximum(sizes, 5)
    if sizes.argmax() == 0 and spec.n_candidates > 1:
        sizes[0], sizes[1] = sizes[1], sizes[0]

    activity_rate = {}
    palettes = {}
    user_topic = {}
    next_user = 0

    def add_user(uid, topic, n_posts, follower_count=0):
        # each user reuses a 5-word slice of their topic vocabulary, so the
        # profile builder sees concentrated token frequencies
        palette = sorted(rng.choice(TOPIC_WORDS[topic], size=5, replace=False))
        posts = [_post_text(rng, palette) for _ in range(n_posts)]
        users[uid] = UserRecord(uid, follower_count, posts, [topic])
        palettes[uid] = palette
        user_topic[uid] = topic
        activity_rate[uid] = float(rng.uniform(*spec.activity_rate_range))
        users_by_topic[topic].append(uid)

    def new_user(topic, n_posts):
        nonlocal next_user
        uid = f"usr_{next_user:05d}"
        next_user += 1
        add_user(uid, topic, n_posts)
        return uid

    users_by_topic = {t: [] for t in topics}
    for idx, cid in enumerate(candidate_ids):
        topic = cand_topic[cid]
        add_user(cid, topic, 5, follower_count=int(sizes[idx]))
        for _ in range(int(sizes[idx])):
            uid = new_user(topic, int(rng.integers(3, 6)))
            follows.append(FollowEdge(uid, cid))

    while len(users) < spec.n_users:
        topic = other_topics[int(rng.integers(len(other_topics)))]
        new_user(topic, int(rng.integers(2, 5)))

    all_ids = sorted(users)
    rates = np.asarray([activity_rate[u] for u in all_ids])
    rates = rates / rates.sum()

    # content population with proportional-hazards lifetimes
    events = []
    next_event = 0

    def emit(uid, content_id, parent, ts, text):
        nonlocal next_event
        events.append(
            InteractionEvent(
                f"ev_{next_event:06d}", uid, content_id, parent, int(ts),
                int(ts) % MINUTES_PER_DAY, text,
            )
        )
        next_event += 1

    lo, hi = spec.content_intensity_range
    lam = np.exp(rng.uniform(math.log(lo), math.log(hi), size=spec.n_contents))
    quality = np.log(lam)
    quality = (quality - quality.mean()) / max(quality.std(), 1e-9)
    burst = rng.normal(size=spec.n_contents)
    b1, b2 = spec.survival_beta
    hazard = np.clip(spec.base_hazard * np.exp(b1 * quality + b2 * burst), 0.004, 0.8)
    lifetimes = np.minimum(rng.geometric(hazard), spec.max_lifetime)
    dropout_p = np.clip(spec.dropout - 0.12 * quality, 0.02, 0.5)

    followers_map = {}
    for e in follows:
        followers_map.setdefault(e.influencer_id, []).append(e.follower_id)
    for fl in followers_map.values():
        fl.sort()

    horizon = spec.n_days * MINUTES_PER_DAY
    for c in range(spec.n_contents):
        content_id = f"pc_{c:05d}"
        if rng.random() < 0.3:
            author = candidate_ids[int(rng.integers(spec.n_candidates))]
        else:
            author = all_ids[int(rng.choice(len(all_ids), p=rates))]
        topic = user_topic[author]
        birth_day = int(rng.integers(spec.n_days))
        birth_ts = birth_day * MINUTES_PER_DAY + _draw_minute(rng, spec)
        birth_ts = min(birth_ts, horizon - 1)
        emit(author, content_id, None, birth_ts, _post_text(rng, palettes[author]))
        author_followers = followers_map.get(author, [])
        topic_pool = users_by_topic[topic]
        for q in range(int(lifetimes[c])):
            ts = birth_ts + q * spec.period_minutes
            if ts >= horizon + 2 * MINUTES_PER_DAY:
                break
            if q and rng.random() < dropout_p[c]:
                continue  # silent period; decouples duration from death time
            boost = max(lam[c] - 1.0, 0.05) * math.exp(-q / spec.intensity_decay)
            n_comments = 1 + rng.poisson(boost)
            for _ in range(int(n_comments)):
                u = rng.random()
                if author_followers and u < 0.8:
                    who = author_followers[int(rng.integers(len(author_followers)))]
                elif topic_pool and u < 0.9:
                    who = topic_pool[int(rng.integers(len(topic_pool)))]
                else:
                    who = all_ids[int(rng.choice(len(all_ids), p=rates))]
                if who == author:
                    if q > 0:
                        continue
                    # first period must stay engaged; pick any other user
                    who = next(x for x in all_ids if x != author)
                words = palettes[who] if user_topic[who] == topic else TOPIC_WORDS[topic]
                emit(who, f"{content_id}_r{next_event:06d}", content_id, ts,
                     _comment_text(rng, words))

    topic_words = TOPIC_WORDS[spec.product_topic]
    ad_words = " ".join(topic_words[:8])
    ad_text = (
        f"{_AD_FILLER[0]} the {spec.product_name}: {ad_words} "
        f"{_AD_FILLER[1]} {_AD_FILLER[3]} edition"
    )
    campaign = CampaignSpec(
        product_name=spec.product_name,
        ad_text=ad_text,
        candidate_influencer_ids=list(candidate_ids),
        gold_promoter_ids=[planted],
        periods_T=spec.periods_T,
        period_minutes=spec.period_minutes,
    )
    return Dataset(users=users, follows=follows, events=events, campaign=campaign)
