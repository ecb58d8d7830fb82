"""Greedy influence-maximization baselines over the follow graph.

Spread is estimated under the Independent Cascade model. The Monte Carlo
worlds (live-edge subgraphs) are sampled once per oracle from the shared
seed, which makes the spread a deterministic submodular set function, so
lazy (CELF) and look-ahead (CELF++) greedy provably return the same seeds
as naive greedy while spending fewer marginal-gain evaluations.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from . import accel


@dataclass
class IcModel:
    p: float = 0.1                 # uniform activation probability
    edge_p: dict | None = None     # optional {(src, dst): p} overrides
    runs: int = 1000               # Monte Carlo worlds
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must be in (0, 1]")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass
class SelectionResult:
    seeds: list
    spread: float
    evaluations: int
    marginal_gains: list = field(default_factory=list)


def _propagation_pairs(edges):
    """Normalize input edges to (source, target) propagation pairs.

    FollowEdge-like objects propagate influencer -> follower; plain pairs
    are taken as (source, target) directly.
    """
    pairs = set()
    for e in edges:
        if hasattr(e, "follower_id"):
            pairs.add((e.influencer_id, e.follower_id))
        else:
            u, v = e
            pairs.add((u, v))
    return sorted(pairs)


class SpreadOracle:
    """IC spread over `runs` pre-sampled live-edge worlds.

    Each world's edge coin flips come from an independent child stream of
    SeedSequence(seed), so parallel and sequential sampling agree. Every
    spread() call over the same oracle reuses the same worlds, and
    `evaluations` counts marginal-gain evaluations charged by the callers.
    """

    def __init__(self, edges, model, nodes=None):
        pairs = _propagation_pairs(edges)
        node_set = set(nodes) if nodes is not None else set()
        for u, v in pairs:
            node_set.add(u)
            node_set.add(v)
        self.nodes = sorted(node_set)
        self._index = {u: i for i, u in enumerate(self.nodes)}
        n = len(self.nodes)
        by_src = sorted((self._index[u], self._index[v], u, v) for u, v in pairs)
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        self._indices = np.empty(len(by_src), dtype=np.int64)
        probs = np.empty(len(by_src), dtype=np.float64)
        for e, (si, di, u, v) in enumerate(by_src):
            self._indptr[si + 1] += 1
            self._indices[e] = di
            p = model.p
            if model.edge_p is not None:
                p = model.edge_p.get((u, v), model.p)
            probs[e] = p
        np.cumsum(self._indptr, out=self._indptr)

        children = np.random.SeedSequence(model.seed).spawn(model.runs)
        alive = np.empty((model.runs, len(by_src)), dtype=np.uint8)
        for r, child in enumerate(children):
            alive[r] = np.random.default_rng(child).random(len(by_src)) < probs
        self._alive = alive
        self.evaluations = 0

    def spread(self, seed_ids):
        idx = np.array(sorted(self._index[s] for s in seed_ids), dtype=np.int64)
        if idx.size == 0:
            return 0.0
        return float(accel.ic_reach_mean(self._indptr, self._indices, self._alive, idx))


def ic_spread(edges, seeds, model, nodes=None):
    """Mean activated-set size of `seeds` over the model's Monte Carlo runs."""
    oracle = SpreadOracle(edges, model, nodes)
    for s in seeds:
        if s not in oracle._index:
            raise ValueError(f"seed {s!r} is not a node of the graph")
    return oracle.spread(set(seeds))


def _candidate_list(oracle, candidates):
    if candidates is None:
        return list(oracle.nodes)
    return sorted(candidates)


def naive_greedy_select(edges, k, model, candidates=None, nodes=None, oracle=None):
    """Plain greedy: re-evaluate every remaining candidate each round."""
    oracle = oracle or SpreadOracle(edges, model, nodes)
    cands = _candidate_list(oracle, candidates)
    if k > len(cands):
        raise ValueError(f"k={k} exceeds {len(cands)} candidates")
    chosen = []
    gains = []
    current = 0.0
    remaining = list(cands)
    for _ in range(k):
        best_node, best_gain = None, -np.inf
        for u in remaining:
            gain = oracle.spread(chosen + [u]) - current
            oracle.evaluations += 1
            if gain > best_gain:
                best_node, best_gain = u, gain
        chosen.append(best_node)
        gains.append(best_gain)
        current += best_gain
        remaining.remove(best_node)
    return SelectionResult(chosen, current, oracle.evaluations, gains)


def celf_select(edges, k, model, candidates=None, nodes=None, oracle=None):
    """Lazy greedy: stale marginal gains are upper bounds under
    submodularity, so only the heap top needs re-evaluation."""
    oracle = oracle or SpreadOracle(edges, model, nodes)
    cands = _candidate_list(oracle, candidates)
    if k > len(cands):
        raise ValueError(f"k={k} exceeds {len(cands)} candidates")
    heap = []
    for u in cands:
        gain = oracle.spread([u])
        oracle.evaluations += 1
        heap.append((-gain, u, 0))
    heapq.heapify(heap)
    chosen = []
    gains = []
    current = 0.0
    while len(chosen) < k:
        neg_gain, u, flag = heapq.heappop(heap)
        if flag == len(chosen):
            chosen.append(u)
            gains.append(-neg_gain)
            current += -neg_gain
            continue
        gain = oracle.spread(chosen + [u]) - current
        oracle.evaluations += 1
        heapq.heappush(heap, (-gain, u, len(chosen)))
    return SelectionResult(chosen, current, oracle.evaluations, gains)


def celfpp_select(edges, k, model, candidates=None, nodes=None, oracle=None):
    """CELF with the look-ahead gain: alongside each node's marginal gain
    w.r.t. the chosen set, cache its gain w.r.t. the set plus the round's
    front-runner; when that front-runner does win the round, the cached
    value is exact and the re-evaluation is skipped entirely."""
    oracle = oracle or SpreadOracle(edges, model, nodes)
    cands = _candidate_list(oracle, candidates)
    if k > len(cands):
        raise ValueError(f"k={k} exceeds {len(cands)} candidates")

    chosen = []
    gains = []
    current = 0.0
    last_seed = None
    cur_best = None          # front-runner of the current round
    cur_best_gain = -np.inf
    cur_best_spread = 0.0    # spread(chosen + [cur_best])

    heap = []
    for u in cands:
        spread_u = oracle.spread([u])
        mg1 = spread_u
        if cur_best is None:
            mg2 = mg1
            prev_best = None
        else:
            mg2 = oracle.spread([cur_best, u]) - cur_best_spread
            prev_best = cur_best
        oracle.evaluations += 1
        if mg1 > cur_best_gain:
            cur_best, cur_best_gain, cur_best_spread = u, mg1, spread_u
        heap.append((-mg1, u, 0, prev_best, mg2))
    heapq.heapify(heap)

    while len(chosen) < k:
        neg_mg1, u, flag, prev_best, mg2 = heapq.heappop(heap)
        if flag == len(chosen):
            chosen.append(u)
            gains.append(-neg_mg1)
            current += -neg_mg1
            last_seed = u
            cur_best = None
            cur_best_gain = -np.inf
            cur_best_spread = current
            continue
        if prev_best is not None and prev_best == last_seed and flag == len(chosen) - 1:
            # cached look-ahead gain is exact for the current chosen set
            mg1 = mg2
            heapq.heappush(heap, (-mg1, u, len(chosen), None, mg1))
            continue
        spread_su = oracle.spread(chosen + [u])
        mg1 = spread_su - current
        if cur_best is None:
            mg2 = mg1
            pb = None
        else:
            mg2 = oracle.spread(chosen + [cur_best, u]) - cur_best_spread
            pb = cur_best
        oracle.evaluations += 1
        if mg1 > cur_best_gain:
            cur_best, cur_best_gain, cur_best_spread = u, mg1, spread_su
        heapq.heappush(heap, (-mg1, u, len(chosen), pb, mg2))
    return SelectionResult(chosen, current, oracle.evaluations, gains)
