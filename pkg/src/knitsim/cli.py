"""Command-line experiment harness.

Subcommands: tomography | twolayer | tree | scaling | separation | plan |
verify. Every result file starts with the schema header "knitsim-csv/1",
embeds the canonical config and its hash for bit-exact replay, and carries
one timestamp line that is excluded from hashing.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import sys
import time

import numpy as np

from .channels import QuantumChannel, adjoint_apply, haar_unitary, random_channel
from .ensembles import EnsembleKind
from .linalg import DensityOperator, HermitianOperator, PAULIS, kron_all
from .rng import substream
from .tomography import LearningTask, learn, plan_shots
from .treesim import (
    TreeCircuit,
    allocate,
    estimate_tree,
    estimate_two_layer,
    exact_expectation,
    run_separation,
)

SCHEMA = "knitsim-csv/1"

KIND_ALIASES = {
    "two_design": EnsembleKind.TWO_DESIGN,
    "2dgn": EnsembleKind.TWO_DESIGN,
    "stabilizer_product": EnsembleKind.STABILIZER_PRODUCT,
    "stab": EnsembleKind.STABILIZER_PRODUCT,
    "pauli_eigenstates": EnsembleKind.PAULI_EIGENSTATES,
    "pauli": EnsembleKind.PAULI_EIGENSTATES,
}


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def write_result(path: str | None, command: str, config: dict, header: list,
                 rows: list, elapsed: float = 0.0) -> str:
    """Write one result file.

    The wall-clock figures live on the "# generated=" line, which is the only
    line allowed to differ between replays of the same config and seed.
    """
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    digest = config_hash(config)
    if path is None:
        path = f"knitsim-{command}-{digest}.csv"
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    lines = [SCHEMA,
             f"# config-hash={digest}",
             f"# config-json={canon}",
             f"# generated={stamp} elapsed={elapsed:.3f}s",
             ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[h]) for h in header))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _parse_kind(raw: str) -> EnsembleKind:
    try:
        return KIND_ALIASES[raw]
    except KeyError:
        raise SystemExit(f"unknown ensemble kind: {raw}")


def _pauli_string_matrix(label: str) -> np.ndarray:
    table = {"I": PAULIS[0], "X": PAULIS[1], "Y": PAULIS[2], "Z": PAULIS[3]}
    try:
        return kron_all(table[c] for c in label)
    except KeyError:
        raise SystemExit(f"invalid Pauli string: {label}")


# ---------------------------------------------------------------------------
# tree description files

def load_tree(path: str) -> TreeCircuit:
    """Tree description: JSON with L, R, d, root_state, nodes, leaves.

    Node paths are comma-joined indices ("0,1"); each node is either
    {"kind": "unitary"|"kraus", "data": [...]} with nested [re, im] entries,
    or {"kind": "random", "seed": int, "in_dim": int, "out_dim": int}.
    root_state is "maximally_mixed:<dim>", "zero:<dim>", or an explicit
    matrix; leaves map paths to Pauli strings.
    """
    with open(path) as fh:
        desc = json.load(fh)
    nodes = {}
    for key, node in desc["nodes"].items():
        p = tuple(int(t) for t in key.split(","))
        if node["kind"] == "unitary":
            nodes[p] = QuantumChannel.from_unitary(_load_matrix(node["data"]))
        elif node["kind"] == "kraus":
            nodes[p] = QuantumChannel([_load_matrix(k) for k in node["data"]])
        elif node["kind"] == "random":
            nodes[p] = random_channel(node["in_dim"], node["out_dim"],
                                      substream(node["seed"], "tree-node", p))
        else:
            raise SystemExit(f"unknown node kind: {node['kind']}")
    leaves = {tuple(int(t) for t in key.split(",")): HermitianOperator(_pauli_string_matrix(s))
              for key, s in desc["leaves"].items()}
    root = desc["root_state"]
    if isinstance(root, str):
        name, dim = root.split(":")
        dim = int(dim)
        if name == "maximally_mixed":
            state = DensityOperator(np.eye(dim) / dim)
        elif name == "zero":
            m = np.zeros((dim, dim), dtype=complex)
            m[0, 0] = 1.0
            state = DensityOperator(m)
        else:
            raise SystemExit(f"unknown root_state preset: {name}")
    else:
        state = DensityOperator(_load_matrix(root))
    return TreeCircuit(state, nodes, leaves, L=desc["L"], R=desc["R"], d=desc["d"])


def _load_matrix(data) -> np.ndarray:
    arr = np.array(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def random_tree(L: int, R: int, d: int, seed: int) -> TreeCircuit:
    """Uniform random (L,R,d)-tree used by the built-in experiments."""
    rng = substream(seed, "random-tree")
    nodes, leaves = {}, {}
    paths = [()]
    for depth in range(1, L + 1):
        paths = [p + (k,) for p in paths for k in range(R)]
        for p in paths:
            out_dim = d**R if depth < L else d
            nodes[p] = random_channel(d, out_dim, rng)
            if depth == L:
                g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
                h = (g + g.conj().T) / 2
                h = h / np.abs(np.linalg.eigvalsh(h)).max()
                leaves[p] = HermitianOperator(h)
    root_dim = d**R
    g = rng.normal(size=(root_dim, 2 * root_dim)) \
        + 1j * rng.normal(size=(root_dim, 2 * root_dim))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return TreeCircuit(DensityOperator(rho), nodes, leaves, L=L, R=R, d=d)


# ---------------------------------------------------------------------------
# commands

def cmd_tomography(args) -> int:
    kind = _parse_kind(args.kind)
    n = args.d.bit_length() - 1
    config = {"command": "tomography", "kind": kind.value, "d": args.d,
              "eps": args.eps, "delta": args.delta, "trials": args.trials,
              "seed": args.seed}
    inst_rng = substream(args.seed, "cli-tomography-instance")
    channel = random_channel(args.d, args.d, inst_rng)
    obs = HermitianOperator(kron_all([PAULIS[3]] * n))
    target = adjoint_apply(channel, obs)
    shots = plan_shots(kind, args.d, obs.op_norm(), args.eps, args.delta)
    rows = []
    hits = 0
    t0 = time.perf_counter()
    for trial in range(args.trials):
        task = LearningTask(channel, obs, kind, shots, args.seed,
                            ("cli-tomography", trial))
        got = learn(task)
        err = float(np.linalg.svd(got.estimate.matrix - target.matrix,
                                  compute_uv=False).max())
        hits += err <= args.eps
        rows.append({"trial": trial, "planned_shots": shots, "error": err,
                     "within_eps": int(err <= args.eps)})
    out = write_result(args.out, "tomography", config,
                       ["trial", "planned_shots", "error", "within_eps"],
                       rows, elapsed=time.perf_counter() - t0)
    frac = hits / args.trials
    print(f"{out}: success fraction {frac:.3f} at planned N={shots}")
    return 0 if frac >= 0.85 else 1


def _run_tree(args, two_layer: bool) -> int:
    kind = _parse_kind(args.kind)
    if args.tree:
        tree = load_tree(args.tree)
        source = args.tree
    else:
        L = 1 if two_layer else args.L
        tree = random_tree(L, args.R, args.d, args.seed)
        source = f"random(L={L},R={args.R},d={args.d})"
    if two_layer and tree.L != 1:
        raise SystemExit("twolayer requires an L=1 tree")
    config = {"command": "twolayer" if two_layer else "tree",
              "kind": kind.value, "tree": source, "eps": args.eps,
              "delta": args.delta, "trials": args.trials, "seed": args.seed,
              "protocol": getattr(args, "protocol", "b")}
    plan = allocate(tree, args.eps, args.delta, kind)
    oracle = exact_expectation(tree)
    depth_cols = {f"shots_depth_{l}": sum(v for p, v in plan.per_node_shots.items()
                                          if len(p) == l)
                  for l in range(1, tree.L + 1)}
    rows, hits = [], 0
    t0 = time.perf_counter()
    for trial in range(args.trials):
        trial_seed = int(substream(args.seed, "cli-tree-trial", trial).integers(2**63))
        if two_layer:
            est, _ = estimate_two_layer(tree, plan, args.protocol, trial_seed)
        else:
            est, _ = estimate_tree(tree, plan, trial_seed)
        hits += abs(est - oracle) <= args.eps
        row = {"trial": trial, "estimate": est, "exact": oracle,
               "abs_error": abs(est - oracle),
               "within_eps": int(abs(est - oracle) <= args.eps),
               "root_shots": plan.root_shots,
               "total_shots": plan.total_shots}
        row.update(depth_cols)
        rows.append(row)
    header = ["trial", "estimate", "exact", "abs_error", "within_eps",
              "root_shots", *depth_cols, "total_shots"]
    out = write_result(args.out, config["command"], config, header, rows,
                       elapsed=time.perf_counter() - t0)
    frac = hits / args.trials
    print(f"{out}: success fraction {frac:.3f}, total shots {plan.total_shots}")
    return 0 if frac >= 0.85 else 1


def cmd_twolayer(args) -> int:
    return _run_tree(args, two_layer=True)


def cmd_tree(args) -> int:
    return _run_tree(args, two_layer=False)


def cmd_scaling(args) -> int:
    """Planned-shot comparison: learning totals vs quasiprobability counts."""
    kind = _parse_kind(args.kind)
    config = {"command": "scaling", "kind": kind.value, "d": args.d,
              "eps": args.eps, "delta": args.delta, "r_max": args.r_max,
              "seed": args.seed}
    n = args.d.bit_length() - 1
    gamma_pauli = float(args.d**2)
    gamma_opt = float(2 * args.d - 1)
    rows = []
    for R in range(1, args.r_max + 1):
        nodes = {(r,): QuantumChannel.identity(args.d) for r in range(R)}
        leaves = {(r,): HermitianOperator(kron_all([PAULIS[3]] * n)) for r in range(R)}
        dim = args.d**R
        tree = TreeCircuit(DensityOperator(np.eye(dim) / dim), nodes, leaves,
                           L=1, R=R, d=args.d)
        plan = allocate(tree, args.eps, args.delta, kind)
        hoeffding = lambda g: math.ceil(2.0 * g**(2 * R)
                                        * math.log(2.0 / args.delta) / args.eps**2)
        rows.append({"R": R, "learning_total": plan.total_shots,
                     "qpd_pauli": hoeffding(gamma_pauli),
                     "qpd_optimal_gamma": hoeffding(gamma_opt)})
    out = write_result(args.out, "scaling", config,
                       ["R", "learning_total", "qpd_pauli", "qpd_optimal_gamma"],
                       rows)
    print(out)
    return 0


def cmd_separation(args) -> int:
    config = {"command": "separation", "R": args.R, "n": args.n,
              "eps": args.eps, "shots_grid": args.shots_grid,
              "instances": args.instances, "seed": args.seed,
              "kind": _parse_kind(args.kind).value}
    rows = []
    for R in args.R:
        rows.extend(run_separation(R, args.n, args.eps, args.shots_grid,
                                   args.seed, instances=args.instances,
                                   kind=_parse_kind(args.kind)))
    out = write_result(args.out, "separation", config,
                       ["R", "n", "eps", "shots", "method", "success_rate",
                        "instances"], rows)
    print(out)
    return 0


def cmd_plan(args) -> int:
    config = {"command": "plan", "d": args.d, "eps": args.eps,
              "delta": args.delta, "norm": args.norm}
    rows = [{"kind": kind.value,
             "planned_shots": plan_shots(kind, args.d, args.norm,
                                         args.eps, args.delta)}
            for kind in EnsembleKind]
    out = write_result(args.out, "plan", config, ["kind", "planned_shots"], rows)
    print(out)
    return 0


def cmd_verify(args) -> int:
    """Re-check the config hash embedded in a result file."""
    with open(args.file) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SCHEMA:
        print(f"{args.file}: missing schema header {SCHEMA}", file=sys.stderr)
        return 1
    embedded = None
    canon = None
    for line in lines[1:5]:
        if line.startswith("# config-hash="):
            embedded = line.split("=", 1)[1]
        elif line.startswith("# config-json="):
            canon = line.split("=", 1)[1]
    if embedded is None or canon is None:
        print(f"{args.file}: missing config lines", file=sys.stderr)
        return 1
    actual = config_hash(json.loads(canon))
    if actual != embedded:
        print(f"{args.file}: hash mismatch {embedded} != {actual}", file=sys.stderr)
        return 1
    print(f"{args.file}: ok ({embedded})")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knitsim")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--config", default=None,
                       help="JSON file of defaults for this command")
        p.add_argument("--threads", type=int, default=1,
                       help="accepted for compatibility; execution is serial")

    p = sub.add_parser("tomography", help="learning accuracy experiment")
    common(p)
    p.add_argument("--kind", required=True, choices=sorted(KIND_ALIASES))
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=cmd_tomography)

    for name, fn in (("twolayer", cmd_twolayer), ("tree", cmd_tree)):
        p = sub.add_parser(name, help=f"{name} estimation experiment")
        common(p)
        p.add_argument("--kind", default="two_design", choices=sorted(KIND_ALIASES))
        p.add_argument("--tree", default=None, help="tree description JSON")
        p.add_argument("--L", type=int, default=2)
        p.add_argument("--R", type=int, default=2)
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--eps", type=float, required=True)
        p.add_argument("--delta", type=float, default=0.1)
        p.add_argument("--trials", type=int, default=10)
        if name == "twolayer":
            p.add_argument("--protocol", default="b", choices=["a", "b"])
        p.set_defaults(func=fn)

    p = sub.add_parser("scaling", help="planned-shot growth comparison")
    common(p)
    p.add_argument("--kind", default="two_design", choices=sorted(KIND_ALIASES))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--r-max", type=int, default=6)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("separation", help="hidden-bit discrimination race")
    common(p)
    p.add_argument("--kind", default="two_design", choices=sorted(KIND_ALIASES))
    p.add_argument("--R", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--shots-grid", type=int, nargs="+",
                   default=[500, 1000, 2000, 4000, 8000])
    p.add_argument("--instances", type=int, default=20)
    p.set_defaults(func=cmd_separation)

    p = sub.add_parser("plan", help="print planned shot counts")
    common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--norm", type=float, default=1.0)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="re-check a result file's config hash")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)
    return parser


def _apply_config_file(args) -> None:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            for key, value in json.load(fh).items():
                setattr(args, key, value)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_file(args)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
