"""Full and partial realizations of the cascade's random outcomes.

A full realization fixes every random coordinate up front: per-node seeding
attempt outcomes (a length-B bit vector consumed in order) and per-edge the
drawn propagation value together with the single attempt's success bit.  A
partial realization records only what has been observed so far; the simulator
keeps the full realization private.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field

from .model import DicNetwork


@dataclass(frozen=True)
class FullRealization:
    seed_outcomes: tuple[tuple[int, ...], ...]   # [node][attempt] -> 0/1
    edge_draws: tuple[tuple[float, int], ...]    # [edge] -> (value, success)


@dataclass
class PartialRealization:
    """Observable history: active set, consumed seed attempts with their
    outcomes, revealed edge draws and resolved attempt bits."""

    active: set[int]
    attempts: list[list[int]]                    # per node, outcome bits so far
    revealed_draws: dict[int, float] = field(default_factory=dict)
    resolved_attempts: dict[int, int] = field(default_factory=dict)
    round_index: int = 0

    def copy(self) -> "PartialRealization":
        return PartialRealization(
            set(self.active),
            [list(a) for a in self.attempts],
            dict(self.revealed_draws),
            dict(self.resolved_attempts),
            self.round_index,
        )


def empty_partial(net: DicNetwork) -> PartialRealization:
    """The all-undetermined observation: nothing active, nothing revealed."""
    return PartialRealization(set(), [[] for _ in range(net.node_count)])


def sample_full(net: DicNetwork, rng) -> FullRealization:
    """Draw a full realization from the prior.

    Consumes randomness in a fixed order (seed bits, then edge draws, then
    edge attempts) so replications are reproducible from the stream alone.
    """
    n, b = net.node_count, net.budget
    m = len(net.edges)
    u = rng.random(n * b + 2 * m).tolist()   # one draw call: seeds, draws, attempts
    act = net.activation
    seeds = tuple(
        tuple(int(u[v * b + j] < act[v]) for j in range(b))
        for v in range(n)
    )
    if m == 0:
        return FullRealization(seeds, ())
    base = n * b
    draws = []
    for e, (_, _, dist) in enumerate(net.edges):
        k = bisect_left(dist.cum_masses, u[base + e])
        value = dist.values[min(k, len(dist.values) - 1)]
        draws.append((value, int(u[base + m + e] < value)))
    return FullRealization(seeds, tuple(draws))


def probability_of(net: DicNetwork, x: FullRealization) -> float:
    """Log-probability of a full realization under the network's law.

    Raises ValueError when a drawn value is not in its edge's support.
    """
    logp = 0.0

    def _ln(p: float) -> float:
        return math.log(p) if p > 0.0 else float("-inf")

    for v in range(net.node_count):
        p = net.activation[v]
        for bit in x.seed_outcomes[v]:
            logp += _ln(p) if bit else _ln(1.0 - p)
    for e, (_, _, dist) in enumerate(net.edges):
        value, success = x.edge_draws[e]
        try:
            k = dist.values.index(value)
        except ValueError:
            raise ValueError(f"draw {value} not in support of edge {e}") from None
        logp += _ln(dist.masses[k])
        logp += _ln(value) if success else _ln(1.0 - value)
    return logp


def is_compatible(x: FullRealization, y: PartialRealization) -> bool:
    """True iff every observation recorded in y matches x."""
    for v, observed in enumerate(y.attempts):
        if tuple(observed) != x.seed_outcomes[v][: len(observed)]:
            return False
    for e, value in y.revealed_draws.items():
        if x.edge_draws[e][0] != value:
            return False
    for e, bit in y.resolved_attempts.items():
        if x.edge_draws[e][1] != bit:
            return False
    return True


def condition_sample(net: DicNetwork, y: PartialRealization, rng) -> FullRealization:
    """Sample a full realization from the prior restricted to those
    compatible with y: observed coordinates are copied, the rest drawn fresh.
    """
    base = sample_full(net, rng)
    seeds = list(base.seed_outcomes)
    for v, observed in enumerate(y.attempts):
        if observed:
            row = tuple(observed) + base.seed_outcomes[v][len(observed):]
            seeds[v] = row
    draws = list(base.edge_draws)
    # edges with a revealed draw: pin the value; if the attempt is unresolved
    # its success must be redrawn as Bernoulli of the *observed* value
    pending = sorted(e for e in y.revealed_draws if e not in y.resolved_attempts)
    if pending:
        u = rng.random(len(pending))
        for i, e in enumerate(pending):
            value = y.revealed_draws[e]
            draws[e] = (value, int(u[i] < value))
    for e, bit in y.resolved_attempts.items():
        value = y.revealed_draws.get(e, base.edge_draws[e][0])
        draws[e] = (value, bit)
    for e, value in y.revealed_draws.items():
        if e in y.resolved_attempts:
            draws[e] = (value, y.resolved_attempts[e])
    return FullRealization(tuple(seeds), tuple(draws))
