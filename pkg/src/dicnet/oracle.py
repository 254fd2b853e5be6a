"""Exact machinery for tiny instances.

Provides the auxiliary-graph expansion (one attempt node per seeding slot,
one parallel edge per support value), exhaustive enumeration of full
realizations, exact policy values, and exact optimal adaptive values computed
by backward induction over belief states.  Everything here is guarded to
desk-scale instances and exists to cross-check the Monte Carlo side.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass

from .diffusion import SeedCommand, run_policy, spread_count
from .model import DicNetwork
from .realization import FullRealization, PartialRealization, sample_full

ENUMERATION_GUARD = 2 ** 24
GAIN_EDGE_GUARD = 20


class EnumerationGuard(RuntimeError):
    """Instance too large for exhaustive treatment."""

    def __init__(self, count):
        super().__init__(f"instance requires {count} enumerated realizations "
                         f"(guard {ENUMERATION_GUARD})")
        self.count = count


@dataclass(frozen=True)
class AuxiliaryGraph:
    """Expanded graph: N core nodes, B attempt nodes per core node, and one
    parallel value edge per support atom of each original edge."""

    core_count: int
    attempts_per_node: int
    attempt_edges: tuple[tuple[tuple[int, int], int], ...]   # ((node, slot), node)
    value_edges: tuple[tuple[int, int, int, float, float], ...]  # (src, dst, k, value, mass)

    @property
    def node_count(self) -> int:
        return self.core_count * self.attempts_per_node + self.core_count


def build_auxiliary(net: DicNetwork, budget: int | None = None) -> AuxiliaryGraph:
    b = net.budget if budget is None else budget
    attempt_edges = tuple(((i, j), i)
                          for i in range(net.node_count) for j in range(b))
    value_edges = []
    for src, dst, dist in net.edges:
        for k, (value, mass) in enumerate(zip(dist.values, dist.masses)):
            value_edges.append((src, dst, k, value, mass))
    return AuxiliaryGraph(net.node_count, b, attempt_edges, tuple(value_edges))


def realization_count(net: DicNetwork) -> int:
    count = (2 ** net.budget) ** net.node_count
    for _, _, dist in net.edges:
        count *= 2 * len(dist.values)
    return count


def enumerate_realizations(net: DicNetwork):
    """Yield every (FullRealization, probability); probabilities sum to one."""
    count = realization_count(net)
    if count > ENUMERATION_GUARD:
        raise EnumerationGuard(count)
    node_options = []
    for v in range(net.node_count):
        p = net.activation[v]
        opts = []
        for bits in itertools.product((0, 1), repeat=net.budget):
            prob = 1.0
            for bit in bits:
                prob *= p if bit else (1.0 - p)
            opts.append((bits, prob))
        node_options.append(opts)
    edge_options = []
    for _, _, dist in net.edges:
        opts = []
        for value, mass in zip(dist.values, dist.masses):
            opts.append(((value, 1), mass * value))
            opts.append(((value, 0), mass * (1.0 - value)))
        edge_options.append(opts)
    n = net.node_count
    for combo in itertools.product(*node_options, *edge_options):
        prob = 1.0
        for _, p in combo:
            prob *= p
        seeds = tuple(c[0] for c in combo[:n])
        draws = tuple(c[0] for c in combo[n:])
        yield FullRealization(seeds, draws), prob


def exact_policy_value(net: DicNetwork, policy_factory) -> float:
    """Expected spread of a deterministic policy, by full enumeration."""
    total = 0.0
    for x, prob in enumerate_realizations(net):
        if prob == 0.0:
            continue
        total += prob * run_policy(net, policy_factory(), x).spread
    return total


# ---------------------------------------------------------------------------
# belief-state engine
#
# A belief captures everything future dynamics can depend on: the active set,
# per-node consumed attempt counts, the set of edges whose single attempt has
# been spent, and the pending revealed draws on frontier out-edges toward
# inactive targets (those get attempted next round).  Revealed draws on edges
# toward already-active targets never matter again and are marginalized out.
# ---------------------------------------------------------------------------


def _initial_belief(net: DicNetwork):
    return (frozenset(), (0,) * net.node_count, frozenset(), ())


def _round_branches(net: DicNetwork, belief, seeds):
    """All outcomes of one simultaneous round: list of (prob, belief)."""
    active, consumed, used, pending = belief
    options = []
    for v in seeds:
        p = net.activation[v]
        options.append(((("seed", v, 1), p), (("seed", v, 0), 1.0 - p)))
    for eidx, value in pending:
        options.append(((("edge", eidx, 1), value), (("edge", eidx, 0), 1.0 - value)))
    out = []
    for combo in itertools.product(*options):
        prob = 1.0
        newly = set()
        for (kind, ident, bit), p in combo:
            prob *= p
            if bit:
                if kind == "seed":
                    newly.add(ident)
                else:
                    newly.add(net.edges[ident][1])
        if prob == 0.0:
            continue
        newly -= active
        new_active = active | newly
        new_used = used | frozenset(e for e, _ in pending)
        new_consumed = list(consumed)
        for v in seeds:
            new_consumed[v] += 1
        # reveal draws on the new frontier's out-edges toward inactive targets
        reveal_opts = []
        for z in sorted(newly):
            for eidx, w in net.out_edges[z]:
                if w in new_active or eidx in new_used:
                    continue
                dist = net.edges[eidx][2]
                reveal_opts.append(tuple(((eidx, value), mass)
                                         for value, mass in zip(dist.values, dist.masses)))
        for reveal in itertools.product(*reveal_opts):
            rprob = prob
            new_pending = []
            for (eidx, value), mass in reveal:
                rprob *= mass
                new_pending.append((eidx, value))
            if rprob == 0.0:
                continue
            out.append((rprob, (new_active, tuple(new_consumed), new_used,
                                tuple(sorted(new_pending)))))
    return out


def _eligible(net: DicNetwork, belief):
    active, consumed, _, _ = belief
    return [v for v in range(net.node_count)
            if v not in active and consumed[v] < net.budget]


def exact_marginal_gain_from_parts(net: DicNetwork, active, blocked, v) -> float:
    """Exact conditional marginal gain of seeding v now, given the active set
    and the set of spent edges: activation probability times the expected
    number of inactive nodes reached through fresh live edges (v included)."""
    relevant = []
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for eidx, w in net.out_edges[u]:
            if eidx in blocked or w in active:
                continue
            relevant.append(eidx)
            if w not in seen:
                seen.add(w)
                stack.append(w)
    k = len(relevant)
    if k > GAIN_EDGE_GUARD:
        raise EnumerationGuard(2 ** k)
    means = [net.edge_means[e] for e in relevant]
    expected = 0.0
    for mask in range(2 ** k):
        prob = 1.0
        live = set()
        for i in range(k):
            if mask >> i & 1:
                prob *= means[i]
                live.add(relevant[i])
            else:
                prob *= 1.0 - means[i]
        if prob == 0.0:
            continue
        reach = {v}
        queue = deque((v,))
        while queue:
            u = queue.popleft()
            for eidx, w in net.out_edges[u]:
                if eidx in live and w not in reach and w not in active:
                    reach.add(w)
                    queue.append(w)
        expected += prob * len(reach)
    return net.activation[v] * expected


def exact_marginal_gain(net: DicNetwork, y: PartialRealization, v) -> float:
    blocked = frozenset(y.resolved_attempts)
    return exact_marginal_gain_from_parts(net, frozenset(y.active), blocked, v)


def _adaptive_value(net: DicNetwork, chooser) -> float:
    """Backward induction under the one-seed-per-quiescence schedule.

    `chooser` is None for the optimal strategy (max over eligible nodes) or a
    function (net, belief, eligible) -> node for a fixed decision rule.
    """
    memo: dict = {}

    def value(belief) -> float:
        if belief in memo:
            return memo[belief]
        active, consumed, _, pending = belief
        if pending:
            result = sum(p * value(b) for p, b in _round_branches(net, belief, ()))
        else:
            elig = _eligible(net, belief)
            if sum(consumed) >= net.budget or not elig:
                result = float(len(active))
            elif chooser is None:
                result = max(
                    sum(p * value(b) for p, b in _round_branches(net, belief, (v,)))
                    for v in elig)
            else:
                v = chooser(net, belief, elig)
                result = sum(p * value(b)
                             for p, b in _round_branches(net, belief, (v,)))
        memo[belief] = result
        return result

    _check_guard(net)
    return value(_initial_belief(net))


def _check_guard(net: DicNetwork):
    count = realization_count(net)
    if count > ENUMERATION_GUARD:
        raise EnumerationGuard(count)


def _greedy_chooser(net, belief, eligible):
    active, _, used, _ = belief
    best, best_gain = None, -1.0
    for v in eligible:
        gain = exact_marginal_gain_from_parts(net, active, used, v)
        if gain > best_gain + 1e-12:
            best, best_gain = v, gain
    return best


class ExactGainPolicy:
    """Adaptive greedy with exactly computed conditional gains.

    Behaves like the Monte Carlo greedy policy but evaluates each candidate
    by exhaustive enumeration over the fresh edges it could reach, so its
    runs are deterministic given the realization.
    """

    def __init__(self, net: DicNetwork):
        self.net = net
        self.gain_evaluations = 0
        self.selections: list[int] = []

    def decide(self, net, partial, remaining):
        if remaining <= 0:
            return None
        for u in partial.active:
            for eidx, w in net.out_edges[u]:
                if w not in partial.active and eidx not in partial.resolved_attempts:
                    return SeedCommand(frozenset())
        elig = [v for v in range(net.node_count)
                if v not in partial.active
                and len(partial.attempts[v]) < net.budget]
        if not elig:
            return None
        active = frozenset(partial.active)
        blocked = frozenset(partial.resolved_attempts)
        best, best_gain = None, -1.0
        for v in elig:
            gain = exact_marginal_gain_from_parts(net, active, blocked, v)
            self.gain_evaluations += 1
            if gain > best_gain + 1e-12:
                best, best_gain = v, gain
        self.selections.append(best)
        return SeedCommand(frozenset({best}))


def greedy_adaptive_value(net: DicNetwork) -> float:
    """Exact expected spread of the adaptive greedy strategy whose marginal
    gains are computed exactly (no Monte Carlo noise)."""
    return _adaptive_value(net, _greedy_chooser)


def _pattern_value(net: DicNetwork, schedule) -> float:
    memo: dict = {}

    def drain(belief) -> float:
        active, _, _, pending = belief
        if not pending:
            return float(len(active))
        key = (belief, "drain")
        if key in memo:
            return memo[key]
        result = sum(p * drain(b) for p, b in _round_branches(net, belief, ()))
        memo[key] = result
        return result

    def value(belief, i) -> float:
        active, consumed, _, pending = belief
        if i >= len(schedule) and not any(schedule[i:]):
            return drain(belief)
        key = (belief, i)
        if key in memo:
            return memo[key]
        a = schedule[i] if i < len(schedule) else 0
        elig = _eligible(net, belief)
        k = min(a, len(elig), net.budget - sum(consumed))
        if k == 0:
            if pending:
                result = sum(p * value(b, i + 1)
                             for p, b in _round_branches(net, belief, ()))
            else:
                result = value(belief, i + 1)  # waiting round, nothing moves
        else:
            result = max(
                sum(p * value(b, i + 1)
                    for p, b in _round_branches(net, belief, seeds))
                for seeds in itertools.combinations(elig, k))
        memo[key] = result
        return result

    _check_guard(net)
    return value(_initial_belief(net), 0)


def optimal_adaptive_value(net: DicNetwork, pattern) -> float:
    """Exact value of the optimal adaptive strategy under a seeding pattern.

    `pattern` is either the string "adaptive" (seed one node at each
    quiescence until the budget runs out) or an explicit schedule tuple.
    """
    if isinstance(pattern, str):
        if pattern != "adaptive":
            raise ValueError(f"unknown pattern {pattern!r}")
        return _adaptive_value(net, None)
    schedule = tuple(int(a) for a in pattern)
    if sum(schedule) > net.budget:
        raise ValueError("schedule exceeds budget")
    if schedule and schedule[0] < 1 and sum(schedule) > 0:
        raise ValueError("first scheduled step must seed at least one node")
    return _pattern_value(net, schedule)


def enumerate_schedules(budget: int, max_steps: int):
    """All explicit schedules using the full budget with a nonempty first
    step, trailing zeros stripped."""
    seen = set()
    for length in range(1, max_steps + 1):
        for combo in itertools.product(range(budget + 1), repeat=length):
            if sum(combo) != budget or combo[0] < 1 or (length > 1 and combo[-1] == 0):
                continue
            if combo not in seen:
                seen.add(combo)
                yield combo


def check_properties(net: DicNetwork, trials: int, rng) -> dict:
    """Sample (x, V1 ⊆ V2, v') tuples and count monotonicity/submodularity
    violations of the live-edge spread count.  Both counts must be zero."""
    b = net.budget
    mono_viol = sub_viol = 0
    for _ in range(trials):
        x = sample_full(net, rng)
        size2 = int(rng.integers(0, b))          # leave room for v'
        v2: list[int] = []
        mult: dict[int, int] = {}
        for _ in range(size2):
            v = int(rng.integers(0, net.node_count))
            if mult.get(v, 0) < b:
                v2.append(v)
                mult[v] = mult.get(v, 0) + 1
        keep = rng.random(len(v2)) < 0.5
        v1 = [v for v, k in zip(v2, keep) if k]
        # the extra seed must be a node absent from V2 (and hence from V1):
        # only then do both sides consult the same first attempt bit
        extra_candidates = [v for v in range(net.node_count) if v not in mult]
        if not extra_candidates:
            continue
        v_extra = int(rng.choice(extra_candidates))
        s1 = spread_count(net, x, v1)
        s2 = spread_count(net, x, v2)
        if s1 > s2:
            mono_viol += 1
        s1e = spread_count(net, x, v1 + [v_extra])
        s2e = spread_count(net, x, v2 + [v_extra])
        if s2e - s2 > s1e - s1:
            sub_viol += 1
    return {"trials": trials,
            "monotonicity_violations": mono_viol,
            "submodularity_violations": sub_viol}
