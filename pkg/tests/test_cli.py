"""Command-line harness: output schema, determinism, and exit codes."""

import csv
import json

import pytest

from dicnet.cli import CSV_HEADER, ConfigError, main, parse_budgets
from dicnet.data import generate_power_law, load_network, parse_preset, save_network
from dicnet.model import DicNetwork


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parse_budgets():
    assert parse_budgets("3") == [3]
    assert parse_budgets("1..4") == [1, 2, 3, 4]
    assert parse_budgets("10..30:10") == [10, 20, 30]
    assert parse_budgets("2,5,9") == [2, 5, 9]
    for bad in ("x", "4..1", "1..9:0", "1,,2"):
        with pytest.raises(ConfigError):
            parse_budgets(bad)


def test_run_schema_and_row_order(tmp_path):
    out = str(tmp_path / "r.csv")
    rc = main(["run", "--fixture", "g1", "--budgets", "1..2", "--reps", "5",
               "--R", "100", "--R-pre", "50", "--seed", "3",
               "--strategies", "random,a-greedy", "--out", out])
    assert rc == 0
    rows = _read_rows(out)
    assert rows[0] == CSV_HEADER.split(",")
    body = rows[1:]
    assert len(body) == 2 * 2 * 5
    # rows come in (strategy, budget, replication) order
    keys = [(r[0], int(r[1]), int(r[2])) for r in body]
    expect = [(s, b, i) for s in ("random", "a-greedy")
              for b in (1, 2) for i in range(5)]
    assert keys == expect
    assert all(r[8] == "3" for r in body)           # master seed column
    # sidecar summary and metadata
    summary = _read_rows(out + ".summary.csv")
    assert summary[0] == ["strategy", "budget", "replications",
                          "mean_spread", "half_width"]
    assert len(summary) == 1 + 4
    for line in summary[1:]:
        spreads = [int(r[3]) for r in body
                   if (r[0], r[1]) == (line[0], line[1])]
        assert float(line[3]) == pytest.approx(sum(spreads) / len(spreads))
    meta = json.load(open(out + ".meta.json"))
    assert meta["config"]["seed"] == 3
    assert len(meta["cells"]) == 4


def test_run_deterministic_and_worker_invariant(tmp_path):
    args = ["run", "--fixture", "g1", "--budgets", "2", "--reps", "8",
            "--R", "100", "--R-pre", "50", "--seed", "11",
            "--strategies", "random,greedy,a-greedy,h-greedy"]
    paths = [str(tmp_path / f"r{i}.csv") for i in range(3)]
    assert main(args + ["--out", paths[0]]) == 0
    assert main(args + ["--out", paths[1]]) == 0
    assert main(args + ["--out", paths[2], "--workers", "2"]) == 0

    def strip_wall(path):
        return [r[:7] + r[8:] for r in _read_rows(path)]

    assert strip_wall(paths[0]) == strip_wall(paths[1]) == strip_wall(paths[2])


def test_a_greedy_dominates_random_on_the_fixture(tmp_path):
    out = str(tmp_path / "r.csv")
    assert main(["run", "--fixture", "g1", "--budgets", "3", "--reps", "150",
                 "--R", "300", "--R-pre", "50", "--seed", "2",
                 "--strategies", "random,a-greedy", "--out", out]) == 0
    means = {r[0]: float(r[3]) for r in _read_rows(out + ".summary.csv")[1:]}
    assert means["a-greedy"] >= means["random"]


def test_config_file_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"reps": 3, "budgets": "1"}))
    out = str(tmp_path / "r.csv")
    rc = main(["run", "--fixture", "two-node", "--strategies", "random",
               "--R", "50", "--R-pre", "50", "--config", str(cfg),
               "--out", out])
    assert rc == 0
    assert len(_read_rows(out)) == 1 + 3
    # explicit command-line values beat config defaults
    rc = main(["run", "--fixture", "two-node", "--strategies", "random",
               "--R", "50", "--R-pre", "50", "--reps", "4",
               "--config", str(cfg), "--out", out])
    assert rc == 0
    assert len(_read_rows(out)) == 1 + 4
    cfg.write_text(json.dumps({"bogus_field": 1}))
    assert main(["run", "--config", str(cfg), "--out", out]) == 2
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 4


def test_exit_code_config_errors(tmp_path):
    out = str(tmp_path / "r.csv")
    assert main(["run", "--strategies", "bogus", "--out", out]) == 2
    assert main(["run", "--budgets", "nope", "--out", out]) == 2
    assert main(["run", "--fixture", "g1", "--budgets", "9",
                 "--out", out]) == 2               # budget > node count
    assert main(["run", "--gen", "5,x,1", "--out", out]) == 2
    assert main(["gen", "--out", str(tmp_path / "n.json")]) == 2
    assert not (tmp_path / "r.csv").exists()       # failed runs leave no file


def test_exit_code_enumeration_guard(tmp_path):
    net_path = str(tmp_path / "big.json")
    save_network(generate_power_law(40, 200, 1, parse_preset("f1:0.1"), 2),
                 net_path)
    assert main(["oracle", "pattern-optimality", "--net", net_path,
                 "--budgets", "2"]) == 3


def test_exit_code_io_error(tmp_path):
    missing_dir = str(tmp_path / "no" / "such" / "dir" / "r.csv")
    assert main(["run", "--fixture", "two-node", "--budgets", "1",
                 "--reps", "2", "--strategies", "random",
                 "--out", missing_dir]) == 4
    assert main(["run", "--net", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "r.csv")]) == 4


def test_oracle_subcommands(tmp_path, capsys):
    assert main(["oracle", "properties", "--fixture", "g1", "--budgets", "3",
                 "--trials", "100"]) == 0
    assert "violations=0" in capsys.readouterr().out
    assert main(["oracle", "pattern-optimality", "--fixture", "two-node",
                 "--budgets", "1"]) == 0
    assert main(["oracle", "greedy-guarantee", "--fixture", "two-node",
                 "--budgets", "1"]) == 0
    # contract spellings are accepted as aliases
    assert main(["oracle", "theorem1", "--fixture", "two-node",
                 "--budgets", "1"]) == 0
    assert main(["oracle", "theorem2", "--fixture", "two-node",
                 "--budgets", "1"]) == 0
    rc = main(["oracle", "exact-value", "--fixture", "two-node",
               "--budgets", "1", "--policy", "static:0"])
    assert rc == 0
    assert "1.48" in capsys.readouterr().out
    assert main(["oracle", "exact-value", "--fixture", "two-node",
                 "--budgets", "1", "--policy", "warp:0"]) == 2


def test_gen_round_trip(tmp_path):
    out = str(tmp_path / "n.json")
    assert main(["gen", "--gen", "30,120,9", "--preset", "f1:0.05",
                 "--activation", "0.4", "--out", out]) == 0
    net = load_network(out)
    want = generate_power_law(30, 120, 9, parse_preset("f1:0.05", 0.4), 1)
    assert net == want


def test_prune_stats_fully_symmetric_network(tmp_path, capsys):
    # edgeless and uniform activation: every estimate is exactly 0.5, the
    # std is zero, and the mean-minus-std rule keeps everyone
    net_path = str(tmp_path / "flat.json")
    save_network(DicNetwork(8, (0.5,) * 8, (), 2), net_path)
    out = str(tmp_path / "p.csv")
    assert main(["prune-stats", "--net", net_path, "--budgets", "2",
                 "--R-pre", "400", "--out", out]) == 0
    assert "pruned_fraction=0.000" in capsys.readouterr().out
    rows = _read_rows(out)
    assert rows[0] == ["node", "estimate"]
    assert len(rows) == 9
    meta = json.load(open(out + ".meta.json"))
    assert meta["pruned_fraction"] == 0.0


def test_run_on_fixture_g1_reference_means(tmp_path):
    # with certain seeding disabled (activation 0.5) and short chains the
    # spreads stay small; sanity bounds only
    out = str(tmp_path / "r.csv")
    assert main(["run", "--fixture", "g1", "--budgets", "1", "--reps", "50",
                 "--R", "100", "--R-pre", "50",
                 "--strategies", "greedy", "--out", out]) == 0
    means = {r[0]: float(r[3]) for r in _read_rows(out + ".summary.csv")[1:]}
    assert 0.0 <= means["greedy"] <= 6.0