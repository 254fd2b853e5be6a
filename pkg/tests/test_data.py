"""Edge-list ingestion, the power-law generator, and JSON round-trips."""

import json

import numpy as np
import pytest

from dicnet.data import (SchemaError, generate_power_law, load_edge_list,
                         load_network, parse_preset, save_network)
from dicnet.fixtures import fixture_g1, two_node_fixture
from dicnet.model import mean_propagation, validate_network

PRESET = parse_preset("f1:0.1")


def test_parse_preset_families():
    p = parse_preset("f1:0.25", activation=0.7)
    assert p.distribution.values == (0.25,)
    assert p.activation == 0.7
    p = parse_preset("f2:0.05,8")
    assert len(p.distribution.values) == 8
    assert p.distribution.check() is None
    p = parse_preset("f3:0.1,0.01,0.001")
    assert p.distribution.values == (0.001, 0.01, 0.1)
    for bad in ("f4:0.1", "f1:x", "f2:0.05", "f3:", "f1:1.5"):
        with pytest.raises(SchemaError):
            parse_preset(bad)


def _write(tmp_path, text, name="edges.txt"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_edge_list_basics(tmp_path):
    path = _write(tmp_path, "# comment\n10 20\n20 30\n\n10 20\n30 30\n")
    net = load_edge_list(path, PRESET, budget=2)
    # first-seen dense remap: 10->0, 20->1, 30->2; dup and self-loop dropped
    assert net.node_count == 3
    assert [(u, w) for u, w, _ in net.edges] == [(0, 1), (1, 2)]
    assert net.budget == 2
    assert validate_network(net) is None
    assert all(mean_propagation(d) == pytest.approx(0.1)
               for _, _, d in net.edges)


def test_load_edge_list_directedness(tmp_path):
    path = _write(tmp_path, "1 2\n2 3\n")
    rec = load_edge_list(path, PRESET, 1, directedness="reciprocate")
    assert sorted((u, w) for u, w, _ in rec.edges) == [(0, 1), (1, 0),
                                                       (1, 2), (2, 1)]
    rev = load_edge_list(path, PRESET, 1, directedness="reverse")
    assert sorted((u, w) for u, w, _ in rev.edges) == [(1, 0), (2, 1)]
    with pytest.raises(SchemaError):
        load_edge_list(path, PRESET, 1, directedness="undirected")


def test_load_edge_list_errors(tmp_path):
    with pytest.raises(SchemaError, match=":2:"):
        load_edge_list(_write(tmp_path, "1 2\n1 2 3\n"), PRESET, 1)
    with pytest.raises(SchemaError, match=":1:"):
        load_edge_list(_write(tmp_path, "a b\n"), PRESET, 1)
    with pytest.raises(SchemaError, match="no edges"):
        load_edge_list(_write(tmp_path, "# nothing\n"), PRESET, 1)
    with pytest.raises(SchemaError, match="budget"):
        load_edge_list(_write(tmp_path, "1 2\n"), PRESET, 5)


def test_generator_determinism_and_exact_edge_count():
    net1 = generate_power_law(200, 2000, 7, PRESET, budget=5)
    net2 = generate_power_law(200, 2000, 7, PRESET, budget=5)
    assert net1 == net2
    assert len(net1.edges) == 2000
    assert validate_network(net1) is None
    net3 = generate_power_law(200, 2000, 8, PRESET, budget=5)
    assert net3 != net1


def test_generator_edges_are_reciprocated():
    net = generate_power_law(50, 400, 3, PRESET, budget=2)
    pairs = {(u, w) for u, w, _ in net.edges}
    assert all((w, u) in pairs for u, w in pairs)
    assert len(pairs) == 400


def test_generator_degree_distribution_is_heavy_tailed():
    # top 1% of nodes must hold a large share of the edge endpoints
    net = generate_power_law(1000, 10000, 42, PRESET, budget=10)
    deg = np.zeros(1000)
    for u, _, _ in net.edges:
        deg[u] += 1
    top = np.sort(deg)[-10:].sum()
    assert top / deg.sum() >= 0.10


def test_generator_minimal_and_invalid_targets():
    tiny = generate_power_law(2, 2, 0, PRESET, budget=1)
    assert sorted((u, w) for u, w, _ in tiny.edges) == [(0, 1), (1, 0)]
    with pytest.raises(ValueError):
        generate_power_law(10, 2001, 0, PRESET, 1)       # odd target
    with pytest.raises(ValueError):
        generate_power_law(10, 4, 0, PRESET, 1)          # below n-1 pairs
    with pytest.raises(ValueError):
        generate_power_law(10, 200, 0, PRESET, 1)        # above complete graph
    with pytest.raises(ValueError):
        generate_power_law(1, 2, 0, PRESET, 1)


def test_json_round_trip_preserves_network(tmp_path):
    for net in (fixture_g1(), two_node_fixture(),
                generate_power_law(30, 120, 5, parse_preset("f2:0.05,4"), 3)):
        path = str(tmp_path / "net.json")
        save_network(net, path)
        assert load_network(path) == net


def test_json_round_trip_heterogeneous_activation(tmp_path):
    import dataclasses
    net = dataclasses.replace(fixture_g1(),
                              activation=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6))
    path = str(tmp_path / "net.json")
    save_network(net, path)
    assert load_network(path) == net


def test_load_network_errors(tmp_path):
    path = str(tmp_path / "bad.json")
    with open(path, "w") as fh:
        fh.write("{not json")
    with pytest.raises(SchemaError, match="invalid JSON"):
        load_network(path)
    doc = {"nodes": 2, "budget": 1,
           "edges": [{"src": 0, "dst": 1, "dist": {"type": "fixed", "p": 0.5}}]}
    with open(path, "w") as fh:
        json.dump(doc, fh)
    with pytest.raises(SchemaError, match="activation"):
        load_network(path)
    doc["activation"] = 0.5
    doc["edges"][0]["dist"] = {"type": "fixed"}          # missing p
    with open(path, "w") as fh:
        json.dump(doc, fh)
    with pytest.raises(SchemaError, match="edges\\[0\\]"):
        load_network(path)
    doc["edges"][0]["dist"] = {"type": "mystery"}
    with open(path, "w") as fh:
        json.dump(doc, fh)
    with pytest.raises(SchemaError, match="unknown dist type"):
        load_network(path)
    doc["edges"][0] = {"src": 0, "dist": {"type": "fixed", "p": 0.5}}
    with open(path, "w") as fh:
        json.dump(doc, fh)
    with pytest.raises(SchemaError, match="dst"):
        load_network(path)
