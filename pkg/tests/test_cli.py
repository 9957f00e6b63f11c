import json

import numpy as np
import pytest

from knitsim.cli import SCHEMA, config_hash, load_tree, main
from knitsim.treesim import exact_expectation


def _read(path):
    return path.read_text().splitlines()


def _strip_timestamp(lines):
    return [l for l in lines if not l.startswith("# generated=")]


def test_plan_command_frozen_values(tmp_path):
    out = tmp_path / "plan.csv"
    rc = main(["plan", "--d", "2", "--eps", "0.1", "--delta", "0.1",
               "--out", str(out)])
    assert rc == 0
    lines = _read(out)
    assert lines[0] == SCHEMA
    table = {row.split(",")[0]: int(row.split(",")[1]) for row in lines[5:]}
    assert table["two_design"] == 9088
    assert table["pauli_eigenstates"] == 10286


def test_missing_required_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["tomography", "--kind", "pauli", "--d", "2"])
    assert exc.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_tomography_replay_identical(tmp_path):
    args = ["tomography", "--kind", "pauli", "--d", "2", "--eps", "0.2",
            "--delta", "0.1", "--trials", "5", "--seed", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    # bit-exact modulo the timestamp line
    assert _strip_timestamp(_read(a)) == _strip_timestamp(_read(b))


def test_tomography_row_count(tmp_path):
    out = tmp_path / "t.csv"
    main(["tomography", "--kind", "stab", "--d", "2", "--eps", "0.2",
          "--delta", "0.1", "--trials", "12", "--seed", "1", "--out", str(out)])
    rows = [l for l in _read(out) if l and not l.startswith(("#", SCHEMA, "trial"))]
    assert len(rows) == 12


def test_verify_accepts_and_rejects(tmp_path, capsys):
    out = tmp_path / "p.csv"
    main(["plan", "--d", "2", "--eps", "0.2", "--delta", "0.1", "--out", str(out)])
    assert main(["verify", str(out)]) == 0
    tampered = out.read_text().replace('"eps":0.2', '"eps":0.3')
    out.write_text(tampered)
    assert main(["verify", str(out)]) == 1
    bogus = tmp_path / "bogus.csv"
    bogus.write_text("not-a-result\n")
    assert main(["verify", str(bogus)]) == 1


def test_config_hash_is_order_insensitive():
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_separation_output_shape(tmp_path):
    out = tmp_path / "sep.csv"
    rc = main(["separation", "--R", "1", "--eps", "0.5", "--shots-grid",
               "100", "200", "--instances", "4", "--seed", "3",
               "--out", str(out)])
    assert rc == 0
    rows = [l for l in _read(out) if l and not l.startswith(("#", SCHEMA, "R,"))]
    assert len(rows) == 4  # 2 budgets x 2 methods
    for row in rows:
        rate = float(row.split(",")[5])
        assert 0.0 <= rate <= 1.0


def test_scaling_sorted_and_geometric(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["scaling", "--eps", "0.1", "--r-max", "4", "--out", str(out)]) == 0
    rows = [l.split(",") for l in _read(out)
            if l and not l.startswith(("#", SCHEMA, "R,"))]
    rs = [int(r[0]) for r in rows]
    assert rs == sorted(rs) == [1, 2, 3, 4]
    pauli = [int(r[2]) for r in rows]
    for a, b in zip(pauli, pauli[1:]):
        assert b / a >= 9.0


def test_tree_description_file_roundtrip(tmp_path):
    desc = {
        "L": 1, "R": 2, "d": 2,
        "root_state": "zero:4",
        "nodes": {
            "0": {"kind": "unitary",
                  "data": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]},
            "1": {"kind": "random", "seed": 4, "in_dim": 2, "out_dim": 2},
        },
        "leaves": {"0": "Z", "1": "Z"},
    }
    path = tmp_path / "tree.json"
    path.write_text(json.dumps(desc))
    tree = load_tree(str(path))
    assert tree.L == 1 and tree.R == 2 and tree.root_state.dim == 4
    assert np.abs(tree.nodes[(0,)].kraus[0] - np.eye(2)).max() < 1e-12
    exact_expectation(tree)  # contracts without error

    out = tmp_path / "two.csv"
    rc = main(["twolayer", "--tree", str(path), "--eps", "0.3",
               "--trials", "3", "--seed", "2", "--out", str(out)])
    assert rc == 0


def test_tree_command_shot_columns_sum(tmp_path):
    out = tmp_path / "tree.csv"
    assert main(["tree", "--L", "2", "--R", "2", "--eps", "0.3",
                 "--trials", "2", "--seed", "5", "--out", str(out)]) == 0
    lines = _read(out)
    header = next(l for l in lines if l.startswith("trial,")).split(",")
    row = lines[lines.index(",".join(header)) + 1].split(",")
    get = lambda name: row[header.index(name)]
    total = int(get("total_shots"))
    parts = int(get("root_shots")) + int(get("shots_depth_1")) + int(get("shots_depth_2"))
    assert total == parts


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eps": 0.1, "delta": 0.1, "d": 2, "norm": 1.0}))
    out = tmp_path / "o.csv"
    rc = main(["plan", "--d", "2", "--eps", "0.9", "--delta", "0.9",
               "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    table = {r.split(",")[0]: int(r.split(",")[1]) for r in _read(out)[5:]}
    assert table["two_design"] == 9088  # config file overrode the flags
