"""Network ingestion, synthesis, and serialization.

Covers whitespace edge-list files (with direction handling for datasets
published as undirected or reversed pairs), a preferential-attachment
power-law generator, propagation/activation presets, and a JSON format
that round-trips DicNetwork exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import (DicNetwork, PropagationDistribution, fixed_distribution,
                    quantize_exponential, uniform_discrete_distribution,
                    validate_network)


class SchemaError(ValueError):
    """Malformed network file or edge list."""


@dataclass(frozen=True)
class PresetSpec:
    """One propagation distribution applied to every edge, plus a scalar
    activation probability applied to every node."""

    distribution: PropagationDistribution
    activation: float = 0.5


def parse_preset(text: str, activation: float = 0.5) -> PresetSpec:
    """Parse 'f1:p', 'f2:mean,bins', or 'f3:v1,v2,...' preset strings."""
    try:
        name, _, arg = text.partition(":")
        name = name.lower()
        if name == "f1":
            dist = fixed_distribution(float(arg))
        elif name == "f2":
            mean_s, bins_s = arg.split(",")
            dist = quantize_exponential(float(mean_s), int(bins_s))
        elif name == "f3":
            dist = uniform_discrete_distribution(
                [float(v) for v in arg.split(",")])
        else:
            raise ValueError(f"unknown preset family {name!r}")
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"bad preset {text!r}: {exc}") from None
    return PresetSpec(dist, activation)


def _apply_preset(n: int, pairs, preset: PresetSpec, budget: int) -> DicNetwork:
    edges = tuple((u, w, preset.distribution) for u, w in pairs)
    net = DicNetwork(n, (preset.activation,) * n, edges, budget)
    problem = validate_network(net)
    if problem:
        raise SchemaError(problem)
    return net


def load_edge_list(path: str, preset: PresetSpec, budget: int,
                   directedness: str = "as-is") -> DicNetwork:
    """Build a network from a `src dst` text file.

    directedness: 'as-is' keeps lines as directed edges, 'reciprocate' adds
    both directions per line, 'reverse' flips each edge.  Node ids are
    remapped to a dense range in first-seen order; duplicates and self-loops
    are dropped.
    """
    if directedness not in ("as-is", "reciprocate", "reverse"):
        raise SchemaError(f"unknown directedness {directedness!r}")
    remap: dict[int, int] = {}
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()

    def dense(raw: int) -> int:
        if raw not in remap:
            remap[raw] = len(remap)
        return remap[raw]

    def add(u: int, w: int):
        if u != w and (u, w) not in seen:
            seen.add((u, w))
            pairs.append((u, w))

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise SchemaError(f"{path}:{lineno}: expected two integer "
                                  f"tokens, got {line!r}")
            try:
                a, b = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-integer node id "
                                  f"in {line!r}") from None
            u, w = dense(a), dense(b)
            if directedness == "as-is":
                add(u, w)
            elif directedness == "reciprocate":
                add(u, w)
                add(w, u)
            else:
                add(w, u)
    if not remap:
        raise SchemaError(f"{path}: no edges found")
    n = len(remap)
    if budget > n:
        raise SchemaError(f"budget {budget} exceeds node count {n}")
    return _apply_preset(n, pairs, preset, budget)


def generate_power_law(n: int, edges_target: int, rng_seed: int,
                       preset: PresetSpec, budget: int,
                       skew: float = 0.0, pa_power: float = 2.0) -> DicNetwork:
    """Preferential-attachment graph with reciprocated edges and a
    heavy-tailed degree sequence, hitting edges_target directed edges.

    Nodes arrive in order; node i brings a stub count skewed toward early
    arrivals (so hubs emerge even at a high average degree) and wires each
    stub to an existing node chosen with probability proportional to
    degree**pa_power.  Every undirected pair is stored as two directed
    edges.  `skew` controls how steeply the stub budget concentrates on
    early arrivals (larger values give a denser core and more degree-poor
    fringe nodes); `pa_power` > 1 sharpens the hub hierarchy.
    """
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if edges_target % 2:
        raise ValueError("edges_target must be even (edges are reciprocated)")
    pair_target = edges_target // 2
    max_pairs = n * (n - 1) // 2
    if not (n - 1 <= pair_target <= max_pairs):
        raise ValueError(f"edges_target {edges_target} not achievable "
                         f"with {n} nodes")
    rng = np.random.Generator(np.random.Philox(key=rng_seed))
    # every arriving node brings one connecting stub plus a rank-skewed share
    # of the remaining pair budget; early arrivals carry the surplus so the
    # degree sequence stays heavy-tailed even at high average degree
    raw = np.arange(1, n, dtype=float) ** -skew  # weight of arriving node i
    extra = pair_target - (n - 1)
    stubs = 1 + np.floor(raw * extra / raw.sum()).astype(int)
    stubs = np.minimum(stubs, np.arange(1, n))   # node i has only i predecessors
    diff = pair_target - int(stubs.sum())
    order = np.argsort(-raw, kind="stable")      # highest weight first
    idx = 0
    while diff != 0:
        j = order[idx % len(order)]
        cap = j + 1
        if diff > 0 and stubs[j] < cap:
            room = min(diff, cap - stubs[j])
            stubs[j] += room
            diff -= room
        elif diff < 0 and stubs[j] > 1:
            room = min(-diff, stubs[j] - 1)
            stubs[j] -= room
            diff += room
        idx += 1
        if idx > 10 * len(order):
            raise ValueError("could not balance stub counts to the target")
    degree = np.zeros(n)
    degree[0] = 1.0                               # seed weight for the first pick
    seen: set[tuple[int, int]] = set()
    pairs: list[tuple[int, int]] = []
    for i in range(1, n):
        want = int(stubs[i - 1])
        weights = degree[:i] ** pa_power
        picked: list[int] = []
        for _ in range(want):
            if weights.sum() <= 0:
                break
            t = int(rng.choice(i, p=weights / weights.sum()))
            picked.append(t)
            weights[t] = 0.0                      # no duplicate pairs from one node
        for t in picked:
            pairs.append((min(i, t), max(i, t)))
            seen.add((min(i, t), max(i, t)))
            degree[t] += 1.0
            degree[i] += 1.0
        if degree[i] == 0.0:
            degree[i] = 1.0
    # top up if duplicate-avoidance fell short of the target
    guard = 0
    while len(pairs) < pair_target:
        u = int(rng.choice(n, p=degree / degree.sum()))
        w = int(rng.integers(n))
        key = (min(u, w), max(u, w))
        if u != w and key not in seen:
            seen.add(key)
            pairs.append(key)
            degree[u] += 1.0
            degree[w] += 1.0
        guard += 1
        if guard > 100 * pair_target:
            raise ValueError("could not reach the edge target")
    directed = [e for u, w in pairs for e in ((u, w), (w, u))]
    return _apply_preset(n, directed, preset, budget)


def _dist_to_json(dist: PropagationDistribution) -> dict:
    if len(dist.values) == 1:
        return {"type": "fixed", "p": dist.values[0]}
    if len(set(dist.masses)) == 1:
        return {"type": "uniform", "values": list(dist.values)}
    return {"type": "discrete",
            "support": [[v, m] for v, m in zip(dist.values, dist.masses)]}


def _dist_from_json(obj: dict, where: str) -> PropagationDistribution:
    try:
        kind = obj["type"]
        if kind == "fixed":
            return fixed_distribution(float(obj["p"]))
        if kind == "uniform":
            return uniform_discrete_distribution([float(v) for v in obj["values"]])
        if kind == "discrete":
            support = obj["support"]
            return PropagationDistribution(
                tuple(float(v) for v, _ in support),
                tuple(float(m) for _, m in support))
        if kind == "exp":
            return quantize_exponential(float(obj["mean"]), int(obj["bins"]))
    except KeyError as exc:
        raise SchemaError(f"{where}: missing field {exc.args[0]!r}") from None
    raise SchemaError(f"{where}: unknown dist type {kind!r}")


def save_network(net: DicNetwork, path: str) -> None:
    doc = {
        "nodes": net.node_count,
        "budget": net.budget,
        "activation": (net.activation[0]
                       if len(set(net.activation)) == 1
                       else list(net.activation)),
        "edges": [{"src": u, "dst": w, "dist": _dist_to_json(d)}
                  for u, w, d in net.edges],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_network(path: str) -> DicNetwork:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON: {exc}") from None
    for field in ("nodes", "budget", "activation", "edges"):
        if field not in doc:
            raise SchemaError(f"{path}: missing field {field!r}")
    n = int(doc["nodes"])
    act = doc["activation"]
    activation = ((float(act),) * n if isinstance(act, (int, float))
                  else tuple(float(a) for a in act))
    edges = []
    for i, e in enumerate(doc["edges"]):
        where = f"{path}: edges[{i}]"
        for field in ("src", "dst", "dist"):
            if field not in e:
                raise SchemaError(f"{where}: missing field {field!r}")
        edges.append((int(e["src"]), int(e["dst"]),
                      _dist_from_json(e["dist"], where)))
    net = DicNetwork(n, activation, tuple(edges), int(doc["budget"]))
    problem = validate_network(net)
    if problem:
        raise SchemaError(f"{path}: {problem}")
    return net
