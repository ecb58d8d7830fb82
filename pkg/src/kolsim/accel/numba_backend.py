"""numba @njit implementations of the numeric hot kernels.

Same signatures and semantics as numpy_backend; see that module for the
contract of each function. Compiled lazily on first call, cached on disk.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"

_LOG_2PI = float(np.log(2.0 * np.pi))


@njit(cache=True)
def gmm_em(x, weights, means, variances, max_iters, tol, var_floor):
    n = x.shape[0]
    k = weights.shape[0]
    w = weights.astype(np.float64).copy()
    mu = means.astype(np.float64).copy()
    var = variances.astype(np.float64).copy()
    resp = np.empty((n, k), dtype=np.float64)
    lp = np.empty(k, dtype=np.float64)
    ll_hist = np.empty(max_iters, dtype=np.float64)
    min_mass = np.inf
    prev_ll = -np.inf
    n_done = 0
    for it in range(max_iters):
        ll = 0.0
        for i in range(n):
            mx = -np.inf
            for j in range(k):
                lp[j] = (
                    np.log(w[j])
                    - 0.5 * (_LOG_2PI + np.log(var[j]))
                    - 0.5 * (x[i] - mu[j]) ** 2 / var[j]
                )
                if lp[j] > mx:
                    mx = lp[j]
            s = 0.0
            for j in range(k):
                s += np.exp(lp[j] - mx)
            lse = mx + np.log(s)
            ll += lse
            for j in range(k):
                resp[i, j] = np.exp(lp[j] - lse)
        ll_hist[it] = ll
        n_done = it + 1
        if it > 0 and abs(ll - prev_ll) <= tol * max(1.0, abs(prev_ll)):
            break
        prev_ll = ll
        degenerate = False
        for j in range(k):
            mass = 0.0
            for i in range(n):
                mass += resp[i, j]
            if mass < min_mass:
                min_mass = mass
            if mass < 1e-12:
                degenerate = True
                break
            sx = 0.0
            for i in range(n):
                sx += resp[i, j] * x[i]
            m_new = sx / mass
            sv = 0.0
            for i in range(n):
                sv += resp[i, j] * (x[i] - m_new) ** 2
            w[j] = mass / n
            mu[j] = m_new
            var[j] = max(var_floor, sv / mass)
        if degenerate:
            break
    return w, mu, var, ll_hist[:n_done], min_mass


@njit(cache=True)
def cox_ll_grad_hess(xs, events, group_starts, beta):
    n, p = xs.shape
    n_groups = group_starts.shape[0]
    eta = np.empty(n, dtype=np.float64)
    shift = -np.inf
    for i in range(n):
        e = 0.0
        for j in range(p):
            e += xs[i, j] * beta[j]
        eta[i] = e
        if e > shift:
            shift = e
    if n == 0:
        shift = 0.0

    s0 = 0.0
    s1 = np.zeros(p, dtype=np.float64)
    s2 = np.zeros((p, p), dtype=np.float64)
    ll = 0.0
    grad = np.zeros(p, dtype=np.float64)
    hess = np.zeros((p, p), dtype=np.float64)
    sum_x_ev = np.empty(p, dtype=np.float64)

    for g in range(n_groups):
        start = group_starts[g]
        end = group_starts[g + 1] if g + 1 < n_groups else n
        d = 0.0
        sum_eta_ev = 0.0
        for j in range(p):
            sum_x_ev[j] = 0.0
        for i in range(start, end):
            wi = np.exp(eta[i] - shift)
            s0 += wi
            for a in range(p):
                s1[a] += wi * xs[i, a]
                for b in range(p):
                    s2[a, b] += wi * xs[i, a] * xs[i, b]
            if events[i] > 0.0:
                d += events[i]
                sum_eta_ev += eta[i]
                for a in range(p):
                    sum_x_ev[a] += xs[i, a]
        if d > 0.0:
            ll += sum_eta_ev - d * (np.log(s0) + shift)
            for a in range(p):
                mu_a = s1[a] / s0
                grad[a] += sum_x_ev[a] - d * mu_a
                for b in range(p):
                    hess[a, b] -= d * (s2[a, b] / s0 - mu_a * s1[b] / s0)
    return ll, grad, hess


@njit(cache=True)
def ic_reach_mean(indptr, indices, alive, seeds):
    n_worlds = alive.shape[0]
    n = indptr.shape[0] - 1
    visited = np.zeros(n, dtype=np.uint8)
    stack = np.empty(n, dtype=np.int64)
    total = 0.0
    for r in range(n_worlds):
        for i in range(n):
            visited[i] = 0
        top = 0
        count = 0
        for si in range(seeds.shape[0]):
            s = seeds[si]
            if visited[s] == 0:
                visited[s] = 1
                stack[top] = s
                top += 1
                count += 1
        while top > 0:
            top -= 1
            u = stack[top]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if alive[r, e] != 0 and visited[v] == 0:
                    visited[v] = 1
                    stack[top] = v
                    top += 1
                    count += 1
        total += count
    return total / n_worlds
