"""Content survival model.

Derives lifecycle covariates from per-period interaction counts, fits a Cox
proportional-hazards model by Newton-Raphson on the Breslow partial
log-likelihood, estimates the baseline cumulative hazard, and filters the
still-active content set at a given period.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import accel
from .errors import AllZeroSeries, NoEvents, NonConvergence, SingularHessian


@dataclass
class CoxConfig:
    grad_tol: float = 1e-8       # max-norm convergence threshold
    max_iters: int = 100
    max_halvings: int = 30


@dataclass
class LifecycleCovariates:
    t_start: int
    duration: int
    avg_interactions: float
    total_interactions: int
    min_window_interactions: int
    window: int

    def as_vector(self):
        return np.array(
            [
                float(self.t_start),
                float(self.duration),
                self.avg_interactions,
                float(self.total_interactions),
                float(self.min_window_interactions),
            ]
        )


COVARIATE_NAMES = ("t_start", "duration", "avg_interactions",
                   "total_interactions", "min_window_interactions")


@dataclass
class SurvivalObservation:
    covariates: LifecycleCovariates
    event_time: float
    censored: bool


@dataclass
class ContentLifecycleModel:
    beta: np.ndarray                      # on the standardized covariate scale
    standardization: list                 # (mean, std) per covariate column
    baseline_times: np.ndarray            # ascending event times
    baseline_cumhaz: np.ndarray           # H0 at those times (non-decreasing)
    ll_history: list = field(default_factory=list, repr=False, compare=False)

    def to_json_dict(self):
        return {
            "beta": [float(b) for b in self.beta],
            "standardization": [{"mean": m, "std": s} for m, s in self.standardization],
            "baseline": [
                {"t": float(t), "H0": float(h)}
                for t, h in zip(self.baseline_times, self.baseline_cumhaz)
            ],
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            beta=np.asarray(d["beta"], dtype=np.float64),
            standardization=[(e["mean"], e["std"]) for e in d["standardization"]],
            baseline_times=np.asarray([e["t"] for e in d["baseline"]], dtype=np.float64),
            baseline_cumhaz=np.asarray([e["H0"] for e in d["baseline"]], dtype=np.float64),
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
class ActiveContentSet:
    period: int
    content_ids: set


def extract_covariates(series, window=1):
    """Lifecycle covariates from one content's per-period interaction counts.

    t_start is the first period with a non-zero count; the activity window
    runs from there to the first following zero (or the series end); the
    min-window statistic is the smallest sliding `window`-length sum inside
    that range (the window total when the range is shorter than `window`).
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    counts = np.asarray(series, dtype=np.int64)
    if counts.size < 1:
        raise ValueError("series must have at least one period")
    nonzero = np.flatnonzero(counts)
    if nonzero.size == 0:
        raise AllZeroSeries("content has no interactions")
    t_start = int(nonzero[0])
    zeros_after = np.flatnonzero(counts[t_start:] == 0)
    duration = int(zeros_after[0]) if zeros_after.size else int(counts.size - t_start)
    active = counts[t_start : t_start + duration]
    total = int(active.sum())
    avg = float(active.mean())
    if duration < window:
        min_win = total
    else:
        csum = np.concatenate([[0], np.cumsum(active)])
        win_sums = csum[window:] - csum[:-window]
        min_win = int(win_sums.min())
    return LifecycleCovariates(
        t_start=t_start,
        duration=duration,
        avg_interactions=avg,
        total_interactions=total,
        min_window_interactions=min_win,
        window=window,
    )


def expiration_time(series, zero_run=10):
    """First period starting a run of `zero_run` consecutive zero counts at
    or after the first interaction; None when no full run is observed."""
    counts = np.asarray(series, dtype=np.int64)
    nonzero = np.flatnonzero(counts)
    start = int(nonzero[0]) if nonzero.size else 0
    run = 0
    for t in range(start, counts.size):
        run = run + 1 if counts[t] == 0 else 0
        if run == zero_run:
            return t - zero_run + 1
    return None


def observation_from_series(series, window=1, zero_run=10):
    """Covariates plus the (possibly censored) expiration time for a series."""
    cov = extract_covariates(series, window)
    tau = expiration_time(series, zero_run)
    if tau is None:
        return SurvivalObservation(cov, event_time=float(len(series)), censored=True)
    return SurvivalObservation(cov, event_time=float(tau), censored=False)


def _sorted_design(x, times, events):
    """Sort descending by time and mark tied-time group starts."""
    order = np.argsort(-times, kind="stable")
    xs = np.ascontiguousarray(x[order])
    t_s = times[order]
    ev_s = events[order].astype(np.float64)
    starts = np.flatnonzero(np.r_[True, np.diff(t_s) != 0]).astype(np.int64)
    return xs, ev_s, starts, t_s


def partial_log_likelihood(x, times, events, beta):
    """Breslow partial log-likelihood at `beta` for a standardized design."""
    xs, ev_s, starts, _ = _sorted_design(
        np.asarray(x, dtype=np.float64),
        np.asarray(times, dtype=np.float64),
        np.asarray(events),
    )
    ll, _, _ = accel.cox_ll_grad_hess(xs, ev_s, starts, np.asarray(beta, dtype=np.float64))
    return float(ll)


def fit_coxph_design(x, times, events, config=None):
    """Newton-Raphson fit on a raw design matrix.

    Returns (beta, standardization, baseline_times, baseline_cumhaz,
    ll_history). Covariates are z-scored internally; constant columns get
    std 1 so they contribute nothing and keep beta 0.
    """
    config = config or CoxConfig()
    x = np.asarray(x, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events).astype(np.float64)
    n_events = int(events.sum())
    if n_events < 2:
        raise NoEvents(n_events)

    means = x.mean(axis=0)
    stds = x.std(axis=0)
    active = stds > 0  # constant columns carry no information and keep beta 0
    stds = np.where(active, stds, 1.0)
    xz = (x - means) / stds

    xs, ev_s, starts, t_s = _sorted_design(xz, times, events)
    p = x.shape[1]
    beta = np.zeros(p)
    xs_a = np.ascontiguousarray(xs[:, active])
    beta_a = beta[active]
    ll, grad, hess = accel.cox_ll_grad_hess(xs_a, ev_s, starts, beta_a)
    ll_history = [float(ll)]
    converged = grad.size == 0 or np.max(np.abs(grad)) < config.grad_tol
    it = 0
    while not converged and it < config.max_iters:
        it += 1
        a = -hess
        try:
            cond = np.linalg.cond(a)
            if not np.isfinite(cond) or cond > 1e12:
                raise SingularHessian(cond)
            step = np.linalg.solve(a, grad)
        except np.linalg.LinAlgError:
            raise SingularHessian(float("inf")) from None
        scale = 1.0
        for _ in range(config.max_halvings):
            cand = beta_a + scale * step
            new_ll, new_grad, new_hess = accel.cox_ll_grad_hess(xs_a, ev_s, starts, cand)
            if new_ll >= ll - 1e-10:
                break
            scale *= 0.5
        else:
            raise NonConvergence(float(np.max(np.abs(grad))), it)
        beta_a, ll, grad, hess = cand, new_ll, new_grad, new_hess
        ll_history.append(float(ll))
        converged = np.max(np.abs(grad)) < config.grad_tol
    if not converged:
        raise NonConvergence(float(np.max(np.abs(grad))), it)

    beta[active] = beta_a
    base_t, base_h = _breslow_baseline(xs, ev_s, starts, t_s, beta)
    standardization = [(float(m), float(s)) for m, s in zip(means, stds)]
    return beta, standardization, base_t, base_h, ll_history


def _breslow_baseline(xs, ev_s, starts, t_s, beta):
    """Breslow step estimate of the cumulative baseline hazard."""
    eta = xs @ beta
    shift = float(eta.max()) if eta.size else 0.0
    w = np.exp(eta - shift)
    cw = np.cumsum(w)
    n = xs.shape[0]
    ends = np.empty_like(starts)
    ends[:-1] = starts[1:] - 1
    ends[-1] = n - 1
    d = np.add.reduceat(ev_s, starts)
    group_t = t_s[starts]
    has_ev = d > 0
    # groups are in descending time; flip to ascending for the step table
    inc = d[has_ev] / (cw[ends][has_ev] * np.exp(shift))
    times_asc = group_t[has_ev][::-1]
    cumhaz = np.cumsum(inc[::-1])
    return times_asc.astype(np.float64), cumhaz.astype(np.float64)


def fit_coxph(observations, config=None):
    """Fit the proportional-hazards model to SurvivalObservations."""
    if not observations:
        raise NoEvents(0)
    x = np.stack([o.covariates.as_vector() for o in observations])
    times = np.asarray([o.event_time for o in observations], dtype=np.float64)
    events = np.asarray([0.0 if o.censored else 1.0 for o in observations])
    beta, standardization, bt, bh, hist = fit_coxph_design(x, times, events, config)
    return ContentLifecycleModel(
        beta=beta,
        standardization=standardization,
        baseline_times=bt,
        baseline_cumhaz=bh,
        ll_history=hist,
    )


def cumulative_baseline_hazard(model, t):
    """H0 at time t: the step-function value at the largest event time <= t."""
    idx = np.searchsorted(model.baseline_times, t, side="right") - 1
    if idx < 0:
        return 0.0
    return float(model.baseline_cumhaz[idx])


def risk_score(model, covariates):
    """exp(beta . z) for standardized covariates z."""
    vec = covariates.as_vector()
    z = np.array(
        [(v - m) / s for v, (m, s) in zip(vec, model.standardization)]
    )
    return float(np.exp(model.beta @ z))


def expiration_probability(model, covariates, t):
    """P(expired by t) = 1 - exp(-H0(t) * exp(beta . z)); 0 at t = 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    h0 = cumulative_baseline_hazard(model, t)
    if h0 <= 0.0:
        return 0.0
    return 1.0 - float(np.exp(-h0 * risk_score(model, covariates)))


def active_content(model, contents, t, survival_threshold=0.5):
    """Filter to content still alive at period t.

    `contents` holds (content_id, covariates, observed_expiration_or_None)
    triples. A content is active iff its predicted survival exceeds the
    threshold AND its observed expiration (when any) is still ahead.
    """
    if not 0.0 < survival_threshold < 1.0:
        raise ValueError("survival_threshold must be in (0, 1)")
    keep = set()
    for content_id, cov, tau in contents:
        if tau is not None and t >= tau:
            continue
        survival = 1.0 - expiration_probability(model, cov, t)
        if survival > survival_threshold:
            keep.add(content_id)
    return ActiveContentSet(period=t, content_ids=keep)
