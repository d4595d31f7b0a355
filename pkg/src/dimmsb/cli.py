"""Command-line interface: ``dimmsb <command> ...``.

Exit codes: 0 success, 2 configuration/usage, 3 zero-degree node,
4 rank problems, 5 I/O or parse errors, 6 preprocessing produced nothing.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    AllNodesRemoved,
    ConfigError,
    ConvergenceFailure,
    CountMismatch,
    DimensionMismatch,
    DimmsbError,
    EmptyAfterFilter,
    EmptyIntersection,
    MembershipError,
    NotSquare,
    ParseError,
    ProbabilityOutOfRange,
    RankCollapse,
    RankDeficient,
    SingularCornerMatrix,
    UnknownId,
    ZeroDegreeNode,
)
from .estimator import DispOptions, disp, disp_equivalence
from .experiments import ExperimentConfig, builtin_config, real_data_table, rep_seed, run_experiment, write_table
from .graphio import (
    common_submatrix,
    degree_filter,
    largest_weak_component,
    load_edge_list,
    provenance,
    read_memberships,
    save_graph,
    write_memberships,
)
from .linalg import SvdOptions
from .metrics import di_mixed_hamming, mixed_hamming
from .model import build_omega, check_identifiability, sample_adjacency

EXIT_CODES = [
    (ZeroDegreeNode, 3),
    ((RankDeficient, RankCollapse, SingularCornerMatrix, ConvergenceFailure), 4),
    (ParseError, 5),
    ((NotSquare, EmptyIntersection, EmptyAfterFilter, AllNodesRemoved), 6),
    ((ConfigError, UnknownId, CountMismatch, DimensionMismatch, MembershipError, ProbabilityOutOfRange), 2),
]


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_graph(args):
    return load_edge_list(args.graph, format=args.format, square=args.square,
                          strict_binary=not args.binarize)


def _disp_opts(seed: int) -> DispOptions:
    return DispOptions(svd=SvdOptions(seed=seed))


def cmd_simulate(args) -> int:
    if not Path(args.config).is_file():
        raise ConfigError(f"config file {args.config} not found")
    cfg = ExperimentConfig.from_json(args.config)
    if not 0 <= args.point < len(cfg.grid):
        raise ConfigError(f"--point must lie in [0, {len(cfg.grid) - 1}]")
    seed = cfg.base_seed if args.seed is None else args.seed
    params = cfg.params_at(args.point)
    report = check_identifiability(params)
    if not report.ok:
        raise ConfigError(report.summary())
    omega = build_omega(params)
    a = sample_adjacency(omega, rep_seed(seed, args.point, args.rep))
    out = Path(args.out)
    meta = provenance(seed, cfg.to_dict())
    save_graph(a, out / "adjacency.tsv", header_lines=meta)
    write_memberships(params.pi_r, out / "pi_r.csv", meta)
    write_memberships(params.pi_c, out / "pi_c.csv", meta)
    np.savetxt(out / "omega.csv", omega, delimiter=",", fmt="%.17g", header="\n".join(meta))
    _log(f"wrote {a.n_r}x{a.n_c} network with {a.n_edges} edges to {out}/")
    return 0


def cmd_fit(args) -> int:
    a = _load_graph(args)
    if args.k > min(a.shape):
        raise RankDeficient(f"K={args.k} exceeds min(n_r, n_c) = {min(a.shape)}")
    fit = (disp_equivalence if args.equivalence else disp)(a, args.k, _disp_opts(args.seed))
    out = Path(args.out)
    meta = provenance(args.seed, {"graph": str(args.graph), "k": args.k, "equivalence": args.equivalence})
    write_memberships(fit.pi_r_hat, out / "pi_r_hat.csv", meta)
    write_memberships(fit.pi_c_hat, out / "pi_c_hat.csv", meta)
    diag = {
        "provenance": meta[0],
        "n_r": a.n_r,
        "n_c": a.n_c,
        "row_vertices": [a.row_labels[i] for i in fit.vertex_r.indices],
        "col_vertices": [a.col_labels[j] for j in fit.vertex_c.indices],
        **fit.diagnostics,
    }
    (out / "diagnostics.json").write_text(json.dumps(diag, indent=2), encoding="utf-8")
    _log(f"fitted K={args.k} on {a.n_r}x{a.n_c}; wrote {out}/")
    return 0


def _align(est, truth):
    if est.labels is None or truth.labels is None:
        if est.n != truth.n:
            raise DimensionMismatch("unlabelled memberships of different sizes")
        return truth
    pos = {lab: i for i, lab in enumerate(truth.labels)}
    missing = [lab for lab in est.labels if lab not in pos]
    if missing:
        raise DimensionMismatch(f"{len(missing)} estimated node(s) absent from truth, e.g. {missing[:3]}")
    return truth.subset([pos[lab] for lab in est.labels])


def cmd_eval(args) -> int:
    def pick(explicit, folder, name):
        if explicit:
            return explicit
        if folder:
            return str(Path(folder) / name)
        raise ConfigError(f"need --{name.replace('.csv', '').replace('_', '-')} or a directory")

    pr_hat = read_memberships(pick(args.pi_r_hat, args.estimate, "pi_r_hat.csv"))
    pc_hat = read_memberships(pick(args.pi_c_hat, args.estimate, "pi_c_hat.csv"))
    pr = _align(pr_hat, read_memberships(pick(args.pi_r, args.truth, "pi_r.csv")))
    pc = _align(pc_hat, read_memberships(pick(args.pi_c, args.truth, "pi_c.csv")))
    res = {
        "dimhamm": di_mixed_hamming(pr_hat, pr, pc_hat, pc),
        "row_mhamm": mixed_hamming(pr_hat, pr),
        "col_mhamm": mixed_hamming(pc_hat, pc),
        "n_r": pr.n,
        "n_c": pc.n,
    }
    text = json.dumps(res, indent=2)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text)
    return 0


def cmd_preprocess(args) -> int:
    a = _load_graph(args)
    steps = [f"loaded {a.n_r}x{a.n_c}"]
    if args.giant:
        a = largest_weak_component(a, strong=args.strong)
        steps.append(f"giant component {a.n_r}x{a.n_c}")
    with warnings.catch_warnings():
        # An empty result is reported below as an error.
        warnings.simplefilter("ignore", RuntimeWarning)
        a = degree_filter(a, args.min_degree)
    steps.append(f"degree >= {args.min_degree}: {a.n_r}x{a.n_c}")
    if a.n_r == 0 or a.n_c == 0:
        raise EmptyAfterFilter(f"no node has degree >= {args.min_degree}")
    if args.common:
        a = common_submatrix(a)
        steps.append(f"common nodes: {a.n_r}x{a.n_c}")
    save_graph(a, args.out, header_lines=provenance(config=vars(args)))
    for s in steps:
        _log(s)
    print(f"{a.n_r}x{a.n_c}")
    return 0


def cmd_experiment(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
    elif args.id is not None:
        cfg = builtin_config(args.id)
    else:
        raise ConfigError("need --id or --config")
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    res = run_experiment(cfg, reps=args.reps, workers=args.workers)
    out = Path(args.out)
    res.write_csv(out / f"{cfg.id}.csv", seed=cfg.base_seed)
    res.write_long_csv(out / f"{cfg.id}_long.csv", seed=cfg.base_seed)
    res.write_json(out / f"{cfg.id}.json")
    for s in res.summaries():
        _log(
            f"{cfg.grid_param}={s['value']}: DiMHamm={s['mean_dimhamm']:.4f} "
            f"row={s['mean_row_mhamm']:.4f} col={s['mean_col_mhamm']:.4f} "
            f"({s['reps']} ok, {s['failed']} failed, {s['mean_seconds']:.3f}s)"
        )
    return 0


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def cmd_stats(args) -> int:
    a = _load_graph(args)
    if args.giant:
        a = largest_weak_component(a, strong=args.strong)
    rows = real_data_table(a, args.k, args.min_degree_list, _disp_opts(args.seed), pure_tol=args.pure_tol)
    write_table(rows, args.out, seed=args.seed)
    for r in rows:
        mh = r.get("mhamm")
        _log(
            f"{r['matrix']}: {r.get('n_r')}x{r.get('n_c')} "
            + (r["note"] if r.get("note", "").startswith("skipped") else
               f"mu_r={r['pure_r']}/{r['n_r']} nu_r={r['mixed_r']}/{r['n_r']} "
               f"mu_c={r['pure_c']}/{r['n_c']} nu_c={r['mixed_c']}/{r['n_c']}"
               + (f" MHamm={mh:.4f}" if mh is not None else ""))
        )
    return 0


def _graph_args(p) -> None:
    p.add_argument("--graph", required=True, help="edge list (.tsv) or Matrix Market (.mtx)")
    p.add_argument("--format", choices=["tsv", "mtx"], default=None)
    p.add_argument("--square", action="store_true", help="rows and columns share one label universe")
    p.add_argument("--binarize", action="store_true", help="treat any nonzero weight as an edge")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimmsb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dimmsb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a network from an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--point", type=int, default=0, help="grid point index")
    p.add_argument("--rep", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="estimate memberships")
    _graph_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--equivalence", action="store_true", help="run the projection-matrix variant")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="mixed-Hamming errors against the truth")
    p.add_argument("--estimate", help="directory with pi_r_hat.csv / pi_c_hat.csv")
    p.add_argument("--truth", help="directory with pi_r.csv / pi_c.csv")
    for name in ("pi-r-hat", "pi-c-hat", "pi-r", "pi-c"):
        p.add_argument(f"--{name}")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("preprocess", help="giant component, degree filter, common nodes")
    _graph_args(p)
    p.add_argument("--min-degree", type=int, default=1)
    p.add_argument("--common", action="store_true")
    p.add_argument("--giant", action="store_true")
    p.add_argument("--strong", action="store_true", help="strong instead of weak connectivity")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("experiment", help="run a simulation study")
    p.add_argument("--id", type=int)
    p.add_argument("--config")
    p.add_argument("--reps", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("stats", help="real-network summary table")
    _graph_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--min-degree-list", type=_int_list, default=[1], help="e.g. 1..28 or 1,2,5")
    p.add_argument("--giant", action="store_true")
    p.add_argument("--strong", action="store_true")
    p.add_argument("--pure-tol", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_stats)
    return parser


def exit_code(exc: BaseException) -> int:
    for types, code in EXIT_CODES:
        if isinstance(exc, types):
            return code
    if isinstance(exc, OSError):
        return 5
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DimmsbError, OSError) as exc:
        code = exit_code(exc)
        _log(f"error: {type(exc).__name__}: {exc}")
        if isinstance(exc, ZeroDegreeNode):
            _log("hint: run `dimmsb preprocess --min-degree 1` first")
        return code


if __name__ == "__main__":
    sys.exit(main())
