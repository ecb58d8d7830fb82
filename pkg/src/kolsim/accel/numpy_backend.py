"""Pure-numpy implementations of the numeric hot kernels.

Selected when KOLSIM_NUMBA=0 or numba is unavailable. Every function here
has a loop-level twin in numba_backend with the same signature and (up to
float summation order) the same results.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

_LOG_2PI = float(np.log(2.0 * np.pi))


def gmm_em(x, weights, means, variances, max_iters, tol, var_floor):
    """Run EM on a univariate Gaussian mixture until the relative
    log-likelihood change drops below `tol` or `max_iters` is hit.

    Returns (weights, means, variances, ll_history, min_mass) where
    ll_history holds one log-likelihood per completed E-step and min_mass is
    the smallest component responsibility mass seen (degeneracy signal).
    """
    n = x.shape[0]
    w = weights.astype(np.float64).copy()
    mu = means.astype(np.float64).copy()
    var = variances.astype(np.float64).copy()
    ll_hist = np.empty(max_iters, dtype=np.float64)
    min_mass = np.inf
    prev_ll = -np.inf
    n_done = 0
    for it in range(max_iters):
        logp = (
            np.log(w)[None, :]
            - 0.5 * (_LOG_2PI + np.log(var))[None, :]
            - 0.5 * (x[:, None] - mu[None, :]) ** 2 / var[None, :]
        )
        mx = logp.max(axis=1)
        lse = mx + np.log(np.exp(logp - mx[:, None]).sum(axis=1))
        ll = float(lse.sum())
        ll_hist[it] = ll
        n_done = it + 1
        if it > 0 and abs(ll - prev_ll) <= tol * max(1.0, abs(prev_ll)):
            break
        prev_ll = ll
        resp = np.exp(logp - lse[:, None])
        mass = resp.sum(axis=0)
        min_mass = min(min_mass, float(mass.min()))
        if mass.min() < 1e-12:
            break
        w = mass / n
        mu = (resp * x[:, None]).sum(axis=0) / mass
        var = np.maximum(var_floor, (resp * (x[:, None] - mu[None, :]) ** 2).sum(axis=0) / mass)
    return w, mu, var, ll_hist[:n_done], min_mass


def cox_ll_grad_hess(xs, events, group_starts, beta):
    """Breslow partial log-likelihood with gradient and Hessian.

    `xs` (n, p) and `events` (n,) must be sorted by event/censor time in
    DESCENDING order so risk sets are prefixes; `group_starts` delimits runs
    of tied times in that order. Internally shifts the linear predictor by
    its max so exp() cannot overflow during line search.
    """
    n, p = xs.shape
    eta = xs @ beta
    shift = float(eta.max()) if n else 0.0
    wexp = np.exp(eta - shift)
    cw = np.cumsum(wexp)
    cwx = np.cumsum(wexp[:, None] * xs, axis=0)
    cwxx = np.cumsum(wexp[:, None, None] * (xs[:, :, None] * xs[:, None, :]), axis=0)

    starts = group_starts
    ends = np.empty_like(starts)
    ends[:-1] = starts[1:] - 1
    ends[-1] = n - 1

    d = np.add.reduceat(events, starts)
    sum_eta_ev = np.add.reduceat(eta * events, starts)
    sum_x_ev = np.add.reduceat(xs * events[:, None], starts, axis=0)

    s0 = cw[ends]
    s1 = cwx[ends]
    s2 = cwxx[ends]

    has_ev = d > 0
    ll = float((sum_eta_ev[has_ev] - d[has_ev] * (np.log(s0[has_ev]) + shift)).sum())
    mu_g = s1[has_ev] / s0[has_ev, None]
    grad = (sum_x_ev[has_ev] - d[has_ev, None] * mu_g).sum(axis=0)
    outer = mu_g[:, :, None] * mu_g[:, None, :]
    hess = -(
        d[has_ev, None, None] * (s2[has_ev] / s0[has_ev, None, None] - outer)
    ).sum(axis=0)
    return ll, grad, hess


def ic_reach_mean(indptr, indices, alive, seeds):
    """Mean number of nodes reached from `seeds` across live-edge worlds.

    `alive` is an (R, E) boolean/uint8 matrix over CSR edge slots; world r
    keeps edge e iff alive[r, e]. Level-synchronous BFS across all worlds.
    """
    n_worlds, _ = alive.shape
    n = indptr.shape[0] - 1
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    dst = indices
    live = alive.astype(bool)
    visited = np.zeros((n_worlds, n), dtype=bool)
    if seeds.size:
        visited[:, seeds] = True
    rows = np.arange(n_worlds)[:, None]
    cols = dst[None, :]
    while True:
        can = visited[:, src] & live & ~visited[:, dst]
        if not can.any():
            break
        np.logical_or.at(visited, (rows, cols), can)
    return float(visited.sum(axis=1).mean())
