"""Small built-in networks used by tests and the CLI."""

from __future__ import annotations

from .model import DicNetwork, PropagationDistribution, fixed_distribution

TWO_POINT = PropagationDistribution((0.4, 0.8), (0.8, 0.2))


def fixture_g1() -> DicNetwork:
    """Six-node chain demo network: activation 0.5 everywhere, every edge
    drawing 0.4 or 0.8 with masses 0.8/0.2, budget 3."""
    edges = tuple((u, u + 1, TWO_POINT) for u in range(5))
    return DicNetwork(6, (0.5,) * 6, edges, 3)


def two_node_fixture() -> DicNetwork:
    """u -> v with certain seeding and the two-point edge law; budget 1.
    Seeding u yields an exact expected spread of 1.48."""
    return DicNetwork(2, (1.0, 1.0), ((0, 1, TWO_POINT),), 1)


def chain_network(length: int, p: float, activation: float = 1.0,
                  budget: int = 1) -> DicNetwork:
    edges = tuple((u, u + 1, fixed_distribution(p)) for u in range(length - 1))
    return DicNetwork(length, (activation,) * length, edges, budget)


def star_network(leaves: int, p: float, activation: float = 1.0,
                 budget: int = 1) -> DicNetwork:
    """Center node 0 pointing at `leaves` leaf nodes."""
    edges = tuple((0, i + 1, fixed_distribution(p)) for i in range(leaves))
    return DicNetwork(leaves + 1, (activation,) * (leaves + 1), edges, budget)


def random_tiny_network(rng, max_nodes: int = 4, budget: int = 2) -> DicNetwork:
    """Random instance small enough for exact enumeration: up to `max_nodes`
    nodes, sparse edges with one- or two-point supports."""
    n = int(rng.integers(2, max_nodes + 1))
    activation = tuple(round(float(rng.uniform(0.2, 1.0)), 2) for _ in range(n))
    edges = []
    for u in range(n):
        for w in range(n):
            if u == w or rng.random() > 0.5:
                continue
            if rng.random() < 0.5:
                lo = round(float(rng.uniform(0.1, 0.5)), 2)
                hi = round(float(rng.uniform(lo + 0.2, 1.0)), 2)
                mass = round(float(rng.uniform(0.2, 0.8)), 2)
                dist = PropagationDistribution((lo, hi), (mass, round(1.0 - mass, 2)))
            else:
                dist = fixed_distribution(round(float(rng.uniform(0.1, 0.9)), 2))
            edges.append((u, w, dist))
    if len(edges) > 4:
        keep = sorted(rng.choice(len(edges), size=4, replace=False))
        edges = [edges[i] for i in keep]
    return DicNetwork(n, activation, tuple(edges), min(budget, n))
