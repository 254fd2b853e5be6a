"""Seeding patterns and the four shipped strategies.

Policies are small state machines confined to a single run: `decide` receives
the network, the observable partial realization, and the remaining budget,
and returns a SeedCommand (empty = wait a round) or None to stop.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from .diffusion import EMPTY_COMMAND, SeedCommand
from .model import DicNetwork
from .realization import PartialRealization, empty_partial


@dataclass(frozen=True)
class SeedingPattern:
    """Budget-per-step schedule, or the adaptive one-seed-per-quiescence rule."""

    kind: str                       # "schedule" | "adaptive"
    schedule: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("schedule", "adaptive"):
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if self.kind == "schedule":
            if not self.schedule or self.schedule[0] < 1:
                raise ValueError("explicit schedules must seed in the first step")
            if any(a < 0 for a in self.schedule):
                raise ValueError("negative schedule entry")


ADAPTIVE_PATTERN = SeedingPattern("adaptive")


def pattern_a0(budget: int, n: int) -> SeedingPattern:
    """One seed per step until the budget is used up, then zeros."""
    if not (1 <= budget <= n):
        raise ValueError(f"budget {budget} outside [1, {n}]")
    return SeedingPattern("schedule", (1,) * budget + (0,) * (n - budget))


def observably_quiescent(net: DicNetwork, partial: PartialRealization) -> bool:
    """True when no active node has an unresolved edge to an inactive node,
    i.e. the cascade cannot move without new seeds."""
    for u in partial.active:
        for eidx, w in net.out_edges[u]:
            if w not in partial.active and eidx not in partial.resolved_attempts:
                return False
    return True


def _eligible_nodes(net: DicNetwork, partial: PartialRealization, candidates=None):
    pool = range(net.node_count) if candidates is None else sorted(candidates)
    return [v for v in pool
            if v not in partial.active and len(partial.attempts[v]) < net.budget]


class RandomPolicy:
    """Seeds uniformly random eligible nodes following a pattern."""

    def __init__(self, pattern: SeedingPattern, rng):
        self.pattern = pattern
        self.rng = rng
        self.step = 0
        self.gain_evaluations = 0

    def decide(self, net, partial, remaining):
        if remaining <= 0:
            return None
        if self.pattern.kind == "adaptive":
            if not observably_quiescent(net, partial):
                return EMPTY_COMMAND
            elig = _eligible_nodes(net, partial)
            if not elig:
                return None
            return SeedCommand(frozenset({int(self.rng.choice(elig))}))
        sched = self.pattern.schedule
        i = self.step
        if i >= len(sched) or not any(sched[i:]):
            return None
        a = sched[i]
        if a == 0 and observably_quiescent(net, partial):
            # compress the forbidden waiting rounds: jump to the next seeding step
            while i < len(sched) and sched[i] == 0:
                i += 1
            self.step = i
            a = sched[i]
        self.step += 1
        if a == 0:
            return EMPTY_COMMAND
        elig = _eligible_nodes(net, partial)
        if not elig:
            return None
        k = min(a, len(elig), remaining)
        picks = self.rng.choice(elig, size=k, replace=False)
        return SeedCommand(frozenset(int(v) for v in picks))


def random_policy(pattern: SeedingPattern, rng) -> RandomPolicy:
    return RandomPolicy(pattern, rng)


class StaticSeedListPolicy:
    """Executes a precomputed seed list in a single opening step."""

    def __init__(self, seeds):
        self.seeds = tuple(seeds)
        self.done = False
        self.gain_evaluations = 0

    def decide(self, net, partial, remaining):
        if self.done:
            return None
        self.done = True
        take = self.seeds[:remaining]
        if not take:
            return None
        return SeedCommand(frozenset(take))


def _bernoulli_positions(rng, total: int, p: float) -> np.ndarray:
    """Indices of successes in a length-`total` iid Bernoulli(p) sequence,
    sampled sparsely via geometric inter-success gaps."""
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    chunks = []
    pos = -1
    batch = int(total * p * 1.25) + 16
    while True:
        steps = np.cumsum(rng.geometric(p, size=batch)) + pos
        inside = steps[steps < total]
        chunks.append(inside)
        if len(inside) < len(steps):
            break
        pos = int(steps[-1])
    return np.concatenate(chunks)


class StepGainEvaluator:
    """Shared-sample marginal-gain estimator for one seeding step.

    Samples R live-edge worlds over the currently inactive part of the graph
    (each fresh edge is live with its mean propagation probability) and scores
    a candidate as activation probability times the average number of nodes it
    reaches.  All candidates share the same worlds, so within a step the
    estimate is a deterministic function of (seed, candidate).
    """

    def __init__(self, net: DicNetwork, partial: PartialRealization,
                 replications: int, seed: int):
        self.net = net
        self.replications = replications
        self.evaluations = 0
        src, dst, means = net.edge_arrays
        m = len(net.edges)
        self.worlds: list[dict[int, list[int]]] = [{} for _ in range(replications)]
        if m == 0:
            return
        active_mask = np.zeros(net.node_count, dtype=bool)
        if partial.active:
            active_mask[list(partial.active)] = True
        fresh_mask = ~active_mask[src] & ~active_mask[dst]
        if partial.resolved_attempts:
            fresh_mask[list(partial.resolved_attempts)] = False
        fresh = np.nonzero(fresh_mask)[0]
        if len(fresh) == 0:
            return
        rng = np.random.Generator(np.random.Philox(key=seed))
        # sample live edges sparsely, one Bernoulli grid per distinct mean
        fresh_means = means[fresh]
        for p in np.unique(fresh_means):
            group = fresh[fresh_means == p]
            g = len(group)
            positions = _bernoulli_positions(rng, replications * g, float(p))
            for pos in positions:
                e = group[pos % g]
                adj = self.worlds[pos // g]
                adj.setdefault(int(src[e]), []).append(int(dst[e]))

    def gain(self, v: int) -> float:
        self.evaluations += 1
        total = 0
        for adj in self.worlds:
            if v not in adj:
                total += 1
                continue
            reach = {v}
            queue = deque((v,))
            while queue:
                u = queue.popleft()
                for w in adj.get(u, ()):
                    if w not in reach:
                        reach.add(w)
                        queue.append(w)
            total += len(reach)
        return self.net.activation[v] * total / self.replications


def marginal_gain(net: DicNetwork, y: PartialRealization, v: int,
                  replications: int, rng) -> float:
    """Monte Carlo estimate of the expected number of nodes newly activated
    by seeding v now (v included on seeding success), conditioned on y.

    Each replication draws the seed-attempt bit and a fresh cascade through
    the inactive region; a fresh edge fires with its mean propagation
    probability, which is the exact conditional law of its single attempt.
    """
    p = net.activation[v]
    active = y.active
    blocked = y.resolved_attempts
    total = 0
    for _ in range(replications):
        if rng.random() >= p:
            continue
        reach = {v}
        queue = deque((v,))
        while queue:
            u = queue.popleft()
            for eidx, w in net.out_edges[u]:
                if w in active or w in reach or eidx in blocked:
                    continue
                if rng.random() < net.edge_means[eidx]:
                    reach.add(w)
                    queue.append(w)
        total += len(reach)
    return total / replications


class AGreedyPolicy:
    """Adaptive greedy: at each quiescence, seed the candidate with maximal
    estimated conditional gain, using a lazy-forward queue over cached gains.

    All gains within one run are estimated on a single batch of live-edge
    worlds sampled up front (common random numbers).  As observations
    accumulate, each candidate's estimated gain can only shrink — the active
    set and the spent-edge set both grow — so cached gains are valid upper
    bounds and the lazy queue selects exactly the same node an exhaustive
    re-evaluation would.
    """

    def __init__(self, net: DicNetwork, replications: int, rng,
                 celf: bool = True, candidates=None):
        self.net = net
        self.replications = replications
        self.rng = rng
        self.celf = celf
        self.candidates = (frozenset(range(net.node_count))
                           if candidates is None else frozenset(candidates))
        self.step = 0
        self.gain_evaluations = 0
        self._heap: list = []          # (-gain, node, stamp)
        self._queued: set[int] = set()
        self._worlds = None            # per world: {u: [(w, edge_idx), ...]}
        self.selections: list[int] = []

    def _ensure_worlds(self):
        if self._worlds is not None:
            return
        net = self.net
        reps = self.replications
        self._worlds = [{} for _ in range(reps)]
        m = len(net.edges)
        if m == 0:
            return
        seed = int(self.rng.integers(0, 2 ** 63))
        rng = np.random.Generator(np.random.Philox(key=seed))
        src, dst, means = net.edge_arrays
        order = np.arange(m)
        for p in np.unique(means):
            group = order[means == p]
            g = len(group)
            for pos in _bernoulli_positions(rng, reps * g, float(p)):
                e = int(group[pos % g])
                adj = self._worlds[pos // g]
                adj.setdefault(int(src[e]), []).append((int(dst[e]), e))

    def _gain(self, v, active, blocked):
        self.gain_evaluations += 1
        total = 0
        for adj in self._worlds:
            if v not in adj:
                total += 1
                continue
            reach = {v}
            queue = deque((v,))
            while queue:
                u = queue.popleft()
                for w, e in adj.get(u, ()):
                    if w not in reach and w not in active and e not in blocked:
                        reach.add(w)
                        queue.append(w)
            total += len(reach)
        return self.net.activation[v] * total / self.replications

    def decide(self, net, partial, remaining):
        if remaining <= 0:
            return None
        if not observably_quiescent(net, partial):
            return EMPTY_COMMAND
        elig = _eligible_nodes(net, partial, self.candidates)
        if not elig:
            return None
        self._ensure_worlds()
        active, blocked = partial.active, partial.resolved_attempts
        if self.celf:
            for v in elig:
                if v not in self._queued:
                    heapq.heappush(self._heap,
                                   (-self._gain(v, active, blocked), v, self.step))
                    self._queued.add(v)
            elig_set = set(elig)
            while True:
                neg_gain, v, stamp = heapq.heappop(self._heap)
                if v not in elig_set:
                    self._queued.discard(v)
                    continue
                if stamp == self.step:
                    chosen, chosen_gain = v, -neg_gain
                    break
                heapq.heappush(self._heap,
                               (-self._gain(v, active, blocked), v, self.step))
            # keep the chosen node queued with its latest gain for later steps
            heapq.heappush(self._heap, (-chosen_gain, chosen, stamp))
        else:
            chosen, best = None, -1.0
            for v in elig:           # ascending ids: ties go to the smallest
                g = self._gain(v, active, blocked)
                if g > best:
                    chosen, best = v, g
        self.step += 1
        self.selections.append(chosen)
        return SeedCommand(frozenset({chosen}))


def a_greedy_policy(net: DicNetwork, replications: int, rng,
                    celf: bool = True) -> AGreedyPolicy:
    return AGreedyPolicy(net, replications, rng, celf=celf)


def h_greedy_prune(net: DicNetwork, pre_replications: int, rng):
    """Estimate every node's single-seed expected spread and keep the nodes
    at or above the population mean minus one standard deviation.

    Returns (candidate set, stats) where stats carries the per-node
    estimates, the population mean/std, and the pruned fraction.
    """
    seed = int(rng.integers(0, 2 ** 63))
    ev = StepGainEvaluator(net, empty_partial(net), pre_replications, seed)
    estimates = tuple(ev.gain(v) for v in range(net.node_count))
    mu = float(np.mean(estimates))
    sigma = float(np.std(estimates))
    threshold = mu - sigma
    candidates = frozenset(v for v, e in enumerate(estimates)
                           if e >= threshold - 1e-12)
    stats = {
        "estimates": estimates,
        "mean": mu,
        "std": sigma,
        "threshold": threshold,
        "pruned_fraction": 1.0 - len(candidates) / net.node_count,
    }
    return candidates, stats


def h_greedy_policy(net: DicNetwork, replications: int, pre_replications: int,
                    rng, celf: bool = True) -> AGreedyPolicy:
    """Adaptive greedy restricted to the pruned candidate set."""
    candidates, stats = h_greedy_prune(net, pre_replications, rng)
    policy = AGreedyPolicy(net, replications, rng, celf=celf,
                           candidates=candidates)
    policy.prune_stats = stats
    return policy


# module-level factories so functools.partial(...) of them pickles for workers

def static_seed_factory(seeds, rng):
    return StaticSeedListPolicy(seeds)


def restricted_greedy_factory(net, replications, candidates, rng):
    return AGreedyPolicy(net, replications, rng, candidates=candidates)


def static_greedy_select(net: DicNetwork, budget: int, replications: int, rng,
                         include_seed_failure: bool = True):
    """Hill-climbing selection on the mean-field network.

    Collapses every edge distribution to its mean, then CELF-greedily picks
    `budget` nodes maximizing the Monte Carlo expected spread of the set
    seeded all at once.  Returns (ordered seed list, gain evaluation count).
    """
    n = net.node_count
    m = len(net.edges)
    means = np.array(net.edge_means) if m else np.empty(0)
    live = rng.random((replications, m)) < means if m else np.zeros((replications, 0), bool)
    if include_seed_failure:
        success = rng.random((replications, n)) < np.array(net.activation)
    else:
        success = np.ones((replications, n), bool)
    ends = [(u, w) for u, w, _ in net.edges]
    worlds = []
    for r in range(replications):
        adj: dict[int, list[int]] = {}
        for i in np.nonzero(live[r])[0]:
            u, w = ends[i]
            adj.setdefault(u, []).append(w)
        worlds.append(adj)

    def reach(r: int, v: int, covered: set[int]):
        out = set()
        if v in covered:
            return out
        out.add(v)
        queue = deque((v,))
        adj = worlds[r]
        while queue:
            u = queue.popleft()
            for w in adj.get(u, ()):
                if w not in out and w not in covered:
                    out.add(w)
                    queue.append(w)
        return out

    covered: list[set[int]] = [set() for _ in range(replications)]
    evaluations = 0

    def evaluate(v: int) -> float:
        nonlocal evaluations
        evaluations += 1
        total = 0
        for r in range(replications):
            if success[r, v]:
                total += len(reach(r, v, covered[r]))
        return total / replications

    heap = [(-evaluate(v), v, 0) for v in range(n)]
    heapq.heapify(heap)
    picked: list[int] = []
    for round_no in range(1, min(budget, n) + 1):
        while True:
            neg_gain, v, stamp = heapq.heappop(heap)
            if stamp == round_no:
                picked.append(v)
                break
            heapq.heappush(heap, (-evaluate(v), v, round_no))
        for r in range(replications):
            if success[r, v]:
                covered[r] |= reach(r, v, covered[r])
    return picked, evaluations
