"""Agent behavior policies.

Three stages: profile synthesis from a user's texts, a comment-or-ignore
reaction to visible content, and a 0-5 purchase-inclination rating of a
comment. All three sit behind one policy interface with deterministic
rule-based, seeded stochastic, and external-HTTP-service backends, so the
whole pipeline runs offline by default.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BackendUnavailable

_STOPWORDS = frozenset("""
a an and are as at be been but by did do for from had has have i if in is it
its me my of on or our so that the their them they this to was we were what
when where which who will with you your really very much too just here there
""".split())

_WORD_RE = re.compile(r"[a-z0-9']+")

_TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), "templates")


def tokenize(text):
    """Lowercased non-stopword stems of a text (plural 's' folded)."""
    out = []
    for tok in _WORD_RE.findall(text.lower()):
        tok = tok.strip("'")
        if tok.endswith("'s"):
            tok = tok[:-2]
        if not tok or tok in _STOPWORDS:
            continue
        if tok.endswith("s") and not tok.endswith("ss") and len(tok) > 3:
            tok = tok[:-1]
        if len(tok) >= 2 and tok not in _STOPWORDS:
            out.append(tok)
    return out


@lru_cache(maxsize=16384)
def token_set(text):
    """Cached frozenset of tokenize(text); reactions hit the same ad text
    thousands of times per simulation."""
    return frozenset(tokenize(text))


def jaccard(a, b):
    if not a or not b:
        return 0.0
    a, b = set(a), set(b)
    return len(a & b) / len(a | b)


def _stable_rng(*parts):
    """A Generator keyed by a process-independent hash of the parts."""
    digest = hashlib.blake2b("|".join(str(p) for p in parts).encode(), digest_size=8)
    return np.random.default_rng(int.from_bytes(digest.digest(), "big"))


@dataclass
class AgentProfile:
    user_id: str
    interest_tags: list
    activity_level: float
    persona_summary: str


@dataclass
class BehaviorContext:
    profile: AgentProfile
    influencer_profile: AgentProfile
    history: list                      # (text, timestamp) exchanges of the pair
    visible_contents: list             # (content_id, text, author_id)


@dataclass
class Reaction:
    action: str                        # "comment" | "ignore"
    text: str
    target_content: str
    inclination: int | None = None

    @property
    def is_comment(self):
        return self.action == "comment"


def build_profile(user, history):
    """Derive an AgentProfile from a user's posts and event history.

    interest_tags are the ten most frequent stems across post_texts and the
    history texts (ties broken alphabetically); activity_level clamps the
    event count at 100.
    """
    counts = Counter()
    for text in user.post_texts:
        counts.update(tokenize(text))
    for ev in history:
        counts.update(tokenize(ev.text))
    tags = [tok for tok, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:10]]
    activity = min(1.0, len(history) / 100.0)
    if tags:
        summary = (
            f"{user.user_id} ({user.follower_count} followers) posts about "
            f"{', '.join(tags[:3])}"
        )
    else:
        summary = f"{user.user_id} ({user.follower_count} followers), no posting history"
    return AgentProfile(
        user_id=user.user_id,
        interest_tags=tags,
        activity_level=activity,
        persona_summary=summary,
    )


# --- inclination lexicon -----------------------------------------------------

_PURCHASE = frozenset(
    "buy buying bought purchase purchasing order ordering ordered preorder".split()
)
_INTENSIFIERS = frozenset("definitely absolutely must certainly instantly now".split())
_OBJECTIONS = frozenset(
    "pricey expensive overpriced cost costly doubt doubtful scam waste refund".split()
)
_POSITIVE = frozenset(
    "love great amazing awesome nice beautiful fantastic support favorite perfect".split()
)


def lexicon_inclination(text):
    """Map a comment to the 0-5 inclination scale with a keyword lexicon."""
    toks = set(tokenize(text))
    if toks & _PURCHASE:
        return 5 if toks & _INTENSIFIERS else 4
    if toks & _OBJECTIONS:
        return 1
    if "?" in text:
        return 2
    if toks & _POSITIVE:
        return 3
    return 0


def _overlap_inclination(overlap):
    return int(5.0 * min(1.0, 2.0 * overlap) + 0.5)


# --- policies ----------------------------------------------------------------

class BehaviorPolicy:
    """Interface: react to visible content and rate a comment text."""

    name = "base"

    def react(self, ctx, seed):
        raise NotImplementedError

    def assess(self, text):
        raise NotImplementedError


class RuleBasedPolicy(BehaviorPolicy):
    """Comment iff tag/content token overlap reaches the threshold."""

    name = "rule"

    def __init__(self, overlap_threshold=0.1):
        self.overlap_threshold = overlap_threshold

    def react(self, ctx, seed):
        tags = frozenset(ctx.profile.interest_tags)
        reactions = []
        for content_id, text, _author in ctx.visible_contents:
            toks = token_set(text)
            overlap = jaccard(tags, toks)
            if overlap >= self.overlap_threshold:
                shared = sorted(tags & toks)
                topic = shared[0] if shared else "this"
                reactions.append(
                    Reaction(
                        action="comment",
                        text=f"the {topic} angle got me, adding it to my cart list",
                        target_content=content_id,
                        inclination=_overlap_inclination(overlap),
                    )
                )
            else:
                reactions.append(Reaction("ignore", "", content_id))
        return reactions

    def assess(self, text):
        if not text:
            raise ValueError("text must be non-empty")
        return lexicon_inclination(text)


class StochasticPolicy(BehaviorPolicy):
    """Comment with probability proportional to the overlap, seeded per
    (seed, user, content) so repeat calls are bit-identical."""

    name = "stochastic"

    def __init__(self, gain=2.0):
        self.gain = gain

    def react(self, ctx, seed):
        tags = frozenset(ctx.profile.interest_tags)
        reactions = []
        for content_id, text, _author in ctx.visible_contents:
            toks = token_set(text)
            overlap = jaccard(tags, toks)
            p = min(1.0, self.gain * overlap)
            rng = _stable_rng(seed, ctx.profile.user_id, content_id)
            if p > 0.0 and rng.random() < p:
                shared = sorted(tags & toks)
                topic = shared[0] if shared else "this"
                reactions.append(
                    Reaction(
                        action="comment",
                        text=f"might actually order once the {topic} hype settles",
                        target_content=content_id,
                        inclination=_overlap_inclination(overlap),
                    )
                )
            else:
                reactions.append(Reaction("ignore", "", content_id))
        return reactions

    def assess(self, text):
        if not text:
            raise ValueError("text must be non-empty")
        return lexicon_inclination(text)


def load_template(name):
    with open(os.path.join(_TEMPLATE_DIR, name), encoding="utf-8") as fh:
        return fh.read()


class LlmPolicy(BehaviorPolicy):
    """External HTTP service backend.

    Sends one prompt per visible content and expects a JSON reply
    {"action", "text", "inclination"}; malformed replies downgrade to
    ignore and bump `parse_failures`. Connection errors and 5xx retry with
    exponential backoff, then surface as BackendUnavailable.
    """

    name = "llm"

    def __init__(self, endpoint, api_key_env="KOLSIM_LLM_API_KEY", client=None,
                 max_in_flight=100, retries=3, backoff=0.5):
        import httpx

        self.endpoint = endpoint
        self.api_key = os.environ.get(api_key_env, "")
        self.max_in_flight = max_in_flight
        self.retries = retries
        self.backoff = backoff
        self.parse_failures = 0
        self._client = client or httpx.Client(timeout=30.0)
        self._reaction_template = load_template("reaction_prompt.txt")
        self._assess_template = load_template("assess_prompt.txt")

    def _post(self, payload):
        import httpx

        last = None
        for attempt in range(self.retries + 1):
            try:
                resp = self._client.post(
                    self.endpoint,
                    json=payload,
                    headers={"authorization": f"Bearer {self.api_key}"},
                )
                if resp.status_code >= 500:
                    last = f"server returned {resp.status_code}"
                elif resp.status_code >= 400:
                    raise BackendUnavailable(f"service rejected request: {resp.status_code}")
                else:
                    return resp
            except httpx.HTTPError as exc:
                last = str(exc)
            if attempt < self.retries:
                time.sleep(self.backoff * (2 ** attempt))
        raise BackendUnavailable(f"service unreachable after {self.retries + 1} attempts: {last}")

    def react(self, ctx, seed):
        history = "\n".join(f"[{ts}] {text}" for text, ts in ctx.history) or "(none)"
        reactions = []
        for content_id, text, _author in ctx.visible_contents:
            prompt = self._reaction_template.format(
                profile=ctx.profile.persona_summary,
                influencer_profile=ctx.influencer_profile.persona_summary,
                history=history,
                content=text,
            )
            resp = self._post({"prompt": prompt})
            reactions.append(self._parse_reaction(resp, content_id))
        return reactions

    def _parse_reaction(self, resp, content_id):
        try:
            obj = resp.json()
            action = obj["action"]
            if action == "comment":
                inclination = int(obj["inclination"])
                if not 0 <= inclination <= 5:
                    inclination = max(0, min(5, inclination))
                return Reaction("comment", str(obj["text"]), content_id, inclination)
            if action == "ignore":
                return Reaction("ignore", "", content_id)
            raise ValueError(f"unknown action {action!r}")
        except (ValueError, KeyError, TypeError, json.JSONDecodeError):
            self.parse_failures += 1
            return Reaction("ignore", "", content_id)

    def assess(self, text):
        if not text:
            raise ValueError("text must be non-empty")
        prompt = self._assess_template.format(content=text)
        resp = self._post({"prompt": prompt})
        try:
            rating = int(resp.json()["inclination"])
        except (ValueError, KeyError, TypeError, json.JSONDecodeError):
            self.parse_failures += 1
            return 0
        return max(0, min(5, rating))


def make_policy(name, **options):
    if name == "rule":
        return RuleBasedPolicy(**options)
    if name == "stochastic":
        return StochasticPolicy(**options)
    if name == "llm":
        return LlmPolicy(**options)
    raise ValueError(f"unknown policy {name!r}")


def predict_reaction(ctx, policy, seed):
    """Run the policy over the context's visible contents."""
    if not ctx.visible_contents:
        raise ValueError("visible_contents must be non-empty")
    return policy.react(ctx, seed)


def assess_inclination(text, policy):
    """Rate a comment's purchase inclination on the 0-5 scale."""
    return policy.assess(text)
