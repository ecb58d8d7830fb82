"""Minute-of-day user activity model.

Fits a K-component univariate Gaussian mixture to pooled interaction
timestamps via EM, evaluates the resulting activity density, and samples
the per-period active-user set from it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import accel
from .errors import DegenerateComponent, TooFewSamples

MINUTES_PER_DAY = 1440


@dataclass
class EmConfig:
    tol: float = 1e-6            # relative log-likelihood change
    max_iters: int = 500
    var_floor: float = 1.0       # minutes^2, prevents singular collapse
    restart_limit: int = 5       # re-inits tried after a degenerate collapse


@dataclass
class GmmComponent:
    weight: float
    mean: float
    variance: float


@dataclass
class UserTimelineModel:
    components: list[GmmComponent]
    scope: str = "global"        # "global" or "user:<id>"
    sample_count: int = 0
    log_likelihood: float = 0.0
    ll_history: list[float] = field(default_factory=list, repr=False, compare=False)

    @property
    def k(self):
        return len(self.components)

    def to_json_dict(self):
        return {
            "K": self.k,
            "components": [
                {"weight": c.weight, "mean": c.mean, "variance": c.variance}
                for c in self.components
            ],
            "scope": self.scope,
            "sample_count": self.sample_count,
            "log_likelihood": self.log_likelihood,
        }

    @classmethod
    def from_json_dict(cls, d):
        comps = [
            GmmComponent(c["weight"], c["mean"], c["variance"]) for c in d["components"]
        ]
        return cls(
            components=comps,
            scope=d.get("scope", "global"),
            sample_count=d.get("sample_count", 0),
            log_likelihood=d.get("log_likelihood", 0.0),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass
class ActiveSet:
    period: int
    user_ids: set
    expected_count: int


def _initial_params(x, k, rng=None):
    """Quantile-spread means, pooled variance, uniform weights.

    With an rng, means are jittered sample picks instead (restart path).
    """
    if rng is None:
        qs = (np.arange(k) + 0.5) / k
        means = np.quantile(x, qs)
    else:
        means = np.sort(rng.choice(x, size=k, replace=False))
    pooled = max(float(x.var()), 1.0)
    return (
        np.full(k, 1.0 / k),
        means.astype(np.float64),
        np.full(k, pooled),
    )


def fit_gmm(samples, k, config=None, seed=0):
    """Fit the K-component mixture to minute-of-day samples with EM.

    Raises TooFewSamples below max(k, 10) samples and DegenerateComponent
    when every restart collapses a component's responsibility mass.
    """
    config = config or EmConfig()
    x = np.asarray(samples, dtype=np.float64)
    required = max(k, 10)
    if x.size < required:
        raise TooFewSamples(x.size, required)
    if k < 1:
        raise ValueError("k must be >= 1")
    if np.any((x < 0) | (x >= MINUTES_PER_DAY)):
        raise ValueError("samples must lie in [0, 1440)")

    rng = np.random.default_rng(seed)
    for attempt in range(config.restart_limit + 1):
        w0, mu0, var0 = _initial_params(x, k, rng=None if attempt == 0 else rng)
        w, mu, var, ll_hist, min_mass = accel.gmm_em(
            x, w0, mu0, var0, config.max_iters, config.tol, config.var_floor
        )
        if min_mass >= 1e-12:
            order = np.argsort(mu)
            comps = [
                GmmComponent(float(w[i]), float(mu[i]), float(var[i])) for i in order
            ]
            return UserTimelineModel(
                components=comps,
                scope="global",
                sample_count=int(x.size),
                log_likelihood=float(ll_hist[-1]),
                ll_history=[float(v) for v in ll_hist],
            )
    raise DegenerateComponent(
        f"component mass collapsed below 1e-12 in all {config.restart_limit + 1} attempts"
    )


def fit_user_models(events_by_user, k, config=None, seed=0, min_events=50,
                    global_model=None):
    """Per-user mixtures for users with >= min_events samples; others map to
    the global model (fitted here from the pooled samples when not given)."""
    pooled = [m for samples in events_by_user.values() for m in samples]
    if global_model is None:
        global_model = fit_gmm(pooled, k, config, seed)
    models = {}
    for uid in sorted(events_by_user):
        samples = events_by_user[uid]
        if len(samples) >= min_events:
            m = fit_gmm(samples, k, config, seed)
            m.scope = f"user:{uid}"
            models[uid] = m
        else:
            models[uid] = global_model
    return global_model, models


def density(model, t):
    """Activity density at minute-of-day t: sum_k pi_k N(t | mu_k, var_k)."""
    t_arr = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t_arr)
    for c in model.components:
        out = out + c.weight * np.exp(-0.5 * (t_arr - c.mean) ** 2 / c.variance) / math.sqrt(
            2.0 * math.pi * c.variance
        )
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def period_minute(period, period_minutes, start_minute=0):
    """Start-of-period representative minute-of-day for 1-based period t."""
    return (start_minute + (period - 1) * period_minutes) % MINUTES_PER_DAY


def expected_active_count(model, period, n_users, period_minutes, start_minute=0):
    m = period_minute(period, period_minutes, start_minute)
    raw = int(np.rint(n_users * density(model, m) * period_minutes))
    return min(max(raw, 0), n_users)


def sample_active_users(model, period, users, period_minutes, seed,
                        start_minute=0, weights=None):
    """Draw the active-user set for one period.

    The expected count is round(N * f(m) * period_minutes) clamped to
    [0, N]; ids are drawn without replacement, uniformly by default or
    proportionally to `weights` (per-user activity) when given. The draw is
    deterministic per (seed, period).
    """
    if not users:
        raise ValueError("users must be non-empty")
    ordered = sorted(users)
    n = len(ordered)
    n_t = expected_active_count(model, period, n, period_minutes, start_minute)
    rng = np.random.default_rng([int(seed), int(period)])
    if n_t == 0:
        chosen = set()
    elif weights is None:
        idx = rng.choice(n, size=n_t, replace=False)
        chosen = {ordered[i] for i in idx}
    else:
        w = np.asarray([max(float(weights.get(u, 0.0)), 0.0) for u in ordered])
        if w.sum() <= 0:
            w = np.ones(n)
        idx = rng.choice(n, size=n_t, replace=False, p=w / w.sum())
        chosen = {ordered[i] for i in idx}
    return ActiveSet(period=period, user_ids=chosen, expected_count=n_t)
