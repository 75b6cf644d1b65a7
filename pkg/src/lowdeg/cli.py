"""Reproducible experiment runner: config parsing, catalogs, sweeps, reports.

Configs are single JSON files; numbers may be ints, floats, or exact
rationals written as strings ("1/2"). Every artifact embeds a fingerprint
of the resolved (config, seed) pair, outputs are deterministic for a fixed
seed, and finished sweep cells are skipped on re-runs.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import math
import os
import sys
from fractions import Fraction
from typing import Optional

from .advantage import AdvQuery, adv_bound, exact_adv_oracle
from .graphs import ClassCatalog, SizeLimitError, enumerate_classes
from .models import BinaryParams, GaussianParams, PriorSpec
from .moments import affine_moment, mc_moment
from .numeric import derive_rng, derive_seed
from .rvalues import RTable, r_bound_check
from .stats import run_experiment


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


def _parse_number(value, path: str):
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got a bool")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{path}: cannot parse {value!r} as a rational number")
    raise ConfigError(f"{path}: expected a number, got {type(value).__name__}")


def _require(block: dict, key: str, path: str):
    if key not in block:
        raise ConfigError(f"{path}.{key}: missing required field")
    return block[key]


def _model_params(block: dict, mode: str, path: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected an object")
    n = _require(block, "n", path)
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"{path}.n: expected a positive integer")
    k = _parse_number(_require(block, "k", path), f"{path}.k")
    m = _require(block, "M", path)
    if not isinstance(m, int) or m < 1:
        raise ConfigError(f"{path}.M: expected a positive integer")
    x_raw = _require(block, "x", path)
    if not isinstance(x_raw, list) or len(x_raw) != m:
        raise ConfigError(f"{path}.x: expected a list of M = {m} proportions")
    x = tuple(_parse_number(v, f"{path}.x[{i}]") for i, v in enumerate(x_raw))
    balance = block.get("balance")
    if balance is not None:
        balance = _parse_number(balance, f"{path}.balance")
    try:
        if mode == "gaussian":
            lam = _parse_number(_require(block, "lambda", path), f"{path}.lambda")
            return GaussianParams(n=n, k=k, lam=lam, M=m, x=x, balance=balance)
        q = _parse_number(_require(block, "q", path), f"{path}.q")
        s = _parse_number(_require(block, "s", path), f"{path}.s")
        tau1 = _parse_number(_require(block, "tau1", path), f"{path}.tau1")
        return BinaryParams(n=n, k=k, q=q, s=s, M=m, x=x, tau1=tau1, balance=balance)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    return raw


def resolve_models(raw: dict):
    mode = _require(raw, "mode", "config")
    if mode not in ("gaussian", "binary"):
        raise ConfigError("config.mode: must be 'gaussian' or 'binary'")
    p = _model_params(_require(raw, "p", "config"), mode, "config.p")
    q = _model_params(_require(raw, "q", "config"), mode, "config.q")
    if p.n != q.n:
        raise ConfigError("config.q.n: P and Q must share n")
    return mode, p, q


def fingerprint(raw: dict, seed: int) -> str:
    canon = json.dumps({"config": raw, "seed": seed}, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode("utf8")).hexdigest()[:16]


def _json_dump(obj: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, default=str)
        fh.write("\n")


def _resolved_seed(raw: dict, args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("config.seed: expected an integer")
    return seed


def _catalog_for(raw: dict, d_max: int, allow_loops: bool, cyclic: bool) -> ClassCatalog:
    cache = raw.get("catalog_cache")
    if cache and os.path.exists(cache):
        cat = ClassCatalog.load(cache)
        if (cat.d_max >= d_max and cat.allow_loops == allow_loops
                and cat.require_cyclic_components == cyclic):
            return cat
    cat = enumerate_classes(d_max, allow_loops=allow_loops,
                            require_cyclic_components=cyclic)
    if cache:
        cat.save(cache)
    return cat


def _get_D(raw: dict) -> int:
    d = _require(raw, "D", "config")
    if not isinstance(d, int) or d < 0:
        raise ConfigError("config.D: expected a nonnegative integer")
    return d


def _get_reps(raw: dict) -> int:
    reps = _require(raw, "reps", "config")
    if not isinstance(reps, int) or reps < 50:
        raise ConfigError("config.reps: expected an integer >= 50")
    return reps


def _advantage_payload(raw: dict, seed: int) -> dict:
    mode, p, q = resolve_models(raw)
    query = AdvQuery(p_params=p, q_params=q, D=_get_D(raw), mode=mode)
    cyclic = mode == "binary" or (p.lam == q.lam and p.k == q.k)
    catalog = _catalog_for(raw, query.D, allow_loops=(mode == "gaussian"), cyclic=cyclic)
    report = adv_bound(query, catalog)
    payload = report.to_jsonable()
    payload["config_fingerprint"] = fingerprint(raw, seed)
    return payload


def cmd_advantage(args) -> int:
    raw = load_config(args.config)
    seed = _resolved_seed(raw, args)
    payload = _advantage_payload(raw, seed)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "advantage.json")
    _json_dump(payload, out_path)
    print(f"advantage: total_bound = {payload['total_bound']:.12g} -> {out_path}")
    return 0


def cmd_oracle(args) -> int:
    raw = load_config(args.config)
    seed = _resolved_seed(raw, args)
    mode, p, q = resolve_models(raw)
    query = AdvQuery(p_params=p, q_params=q, D=_get_D(raw), mode=mode)
    oracle = exact_adv_oracle(query)
    report = adv_bound(query)
    payload = report.to_jsonable()
    payload["oracle_value"] = oracle
    payload["config_fingerprint"] = fingerprint(raw, seed)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "oracle.json")
    _json_dump(payload, out_path)
    print(f"oracle: Adv = {oracle:.12g}, bound = {report.total_bound:.12g} -> {out_path}")
    return 0


def cmd_rvalues(args) -> int:
    raw = load_config(args.config)
    seed = _resolved_seed(raw, args)
    mode, p, q = resolve_models(raw)
    d_max = _get_D(raw)
    if mode == "gaussian":
        table = RTable(PriorSpec.from_gaussian(p), PriorSpec.from_gaussian(q))
    else:
        table = RTable(PriorSpec.binary_shift_free(p), PriorSpec.binary_shift_free(q))
    catalog = _catalog_for(raw, d_max, allow_loops=(mode == "gaussian"), cyclic=False)
    c_bal = min(p.balance, q.balance)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "rvalues.csv")
    with open(out_path, "w", newline="") as fh:
        fh.write(f"# fingerprint={fingerprint(raw, seed)}\n")
        writer = csv.writer(fh)
        writer.writerow(["class", "d", "v", "r", "bound", "ok"])
        for g in catalog.classes:
            if g.d > d_max:
                continue
            value, bound, ok = r_bound_check(g, table, c_bal)
            writer.writerow([g.edge_string(), g.d, g.v, str(value), str(bound), int(ok)])
    print(f"rvalues: {len(catalog.classes)} classes -> {out_path}")
    return 0


def cmd_moments(args) -> int:
    raw = load_config(args.config)
    seed = _resolved_seed(raw, args)
    mode, p, q = resolve_models(raw)
    spec = PriorSpec.from_gaussian(p) if mode == "gaussian" else PriorSpec.binary_mean(p)
    d_max = raw.get("D", 3)
    reps = raw.get("mc_reps", 20000)
    catalog = _catalog_for(raw, d_max, allow_loops=(mode == "gaussian"), cyclic=False)
    rng = derive_rng(seed, "moments")
    print(f"# fingerprint={fingerprint(raw, seed)}")
    print("class\tclosed_form\tmc_estimate\tmc_se")
    for g in catalog.classes:
        closed = affine_moment(g, spec).value
        est, se = mc_moment(g, spec, reps, rng)
        print(f"{g.edge_string()}\t{float(closed):.10g}\t{est:.10g}\t{se:.3g}")
    return 0


def cmd_simulate(args) -> int:
    raw = load_config(args.config)
    seed = _resolved_seed(raw, args)
    payload, values = _simulate_payload(raw, seed)
    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "simulate.json")
    _json_dump(payload, json_path)
    csv_path = os.path.join(args.out, "simulate_reps.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# fingerprint={payload['config_fingerprint']}\n")
        writer = csv.writer(fh)
        writer.writerow(["model", "rep", "value"])
        for model, vals in values.items():
            for i, v in enumerate(vals):
                writer.writerow([model, i, repr(v)])
    print(f"simulate: error_rate = {payload['error_rate']} -> {json_path}")
    return 0


def _simulate_payload(raw: dict, seed: int):
    mode, p, q = resolve_models(raw)
    statistic = _require(raw, "statistic", "config")
    expected = "diag_sum" if mode == "gaussian" else "signed_triangles"
    if statistic != expected:
        raise ConfigError(f"config.statistic: mode {mode} supports {expected!r}")
    reps = _get_reps(raw)
    report = run_experiment(p, q, statistic, reps, derive_seed(seed, "simulate"))
    payload = report.to_jsonable()
    payload["config_fingerprint"] = fingerprint(raw, seed)
    return payload, {"P": report.values_p, "Q": report.values_q}


def cmd_enumerate(args) -> int:
    catalog = enumerate_classes(args.d_max, allow_loops=not args.no_loops,
                                require_cyclic_components=args.cyclic_only)
    if args.cache:
        catalog.save(args.cache)
        print(f"catalog saved to {args.cache}")
    by_dv = catalog.by_dv()
    for (d, v), classes in sorted(by_dv.items()):
        print(f"d={d} v={v}: {len(classes)} classes")
    print(f"total: {len(catalog.classes)} classes")
    return 0


def _set_path(cfg: dict, path: str, value) -> None:
    if "." in path:
        head, rest = path.split(".", 1)
        if head not in cfg or not isinstance(cfg[head], dict):
            raise ConfigError(f"config.grid: unknown override path {path!r}")
        _set_path(cfg[head], rest, value)
        return
    cfg[path] = value


def _apply_override(cfg: dict, path: str, value) -> None:
    """Dotted paths target one block; bare model-parameter names set both."""
    if "." in path:
        _set_path(cfg, path, value)
        return
    if path in cfg:
        cfg[path] = value
        return
    applied = False
    for block in ("p", "q"):
        if isinstance(cfg.get(block), dict) and path in cfg[block]:
            cfg[block][path] = value
            applied = True
    if not applied:
        raise ConfigError(f"config.grid: unknown override path {path!r}")


def _sweep_cells(raw: dict):
    grid = raw.get("grid")
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("config.grid: sweep requires a non-empty grid object")
    keys = sorted(grid.keys())
    value_lists = []
    for key in keys:
        vals = grid[key]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"config.grid.{key}: expected a non-empty list")
        value_lists.append(vals)
    cells = []
    import itertools
    for combo in itertools.product(*value_lists):
        cfg = json.loads(json.dumps({k: v for k, v in raw.items() if k != "grid"}))
        for key, value in zip(keys, combo):
            _apply_override(cfg, key, value)
        cells.append((dict(zip(keys, combo)), cfg))
    return keys, cells


def _run_cell(task: str, cfg: dict, seed: int) -> dict:
    if task == "advantage":
        return _advantage_payload(cfg, seed)
    if task == "simulate":
        payload, _ = _simulate_payload(cfg, seed)
        return payload
    raise ConfigError(f"config.task: sweep supports 'advantage' or 'simulate', got {task!r}")


def cmd_sweep(args) -> int:
    raw = load_config(args.config)
    seed = _resolved_seed(raw, args)
    task = _require(raw, "task", "config")
    keys, cells = _sweep_cells(raw)
    # validate every cell up front so a bad grid fails before any work
    for _, cfg in cells:
        resolve_models(cfg)

    os.makedirs(args.out, exist_ok=True)
    cell_dir = os.path.join(args.out, "cells")
    os.makedirs(cell_dir, exist_ok=True)

    paths = [os.path.join(cell_dir, f"cell_{i:04d}.json") for i in range(len(cells))]
    todo = [i for i, path in enumerate(paths) if not os.path.exists(path)]
    skipped = len(cells) - len(todo)

    def compute(i: int) -> dict:
        overrides, cfg = cells[i]
        payload = _run_cell(task, cfg, derive_seed(seed, "sweep", i))
        payload["cell"] = i
        payload["overrides"] = overrides
        return payload

    results = {}
    if args.threads > 1 and len(todo) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
            for i, payload in zip(todo, pool.map(compute, todo)):
                results[i] = payload
    else:
        for i in todo:
            results[i] = compute(i)
    for i in todo:  # serialized writes, cell order
        _json_dump(results[i], paths[i])

    rows = []
    for i, path in enumerate(paths):
        with open(path) as fh:
            rows.append(json.load(fh))

    metric_cols = (["total_bound", "series_bound"] if task == "advantage"
                   else ["error_rate", "separation_ratio"])
    csv_path = os.path.join(args.out, "sweep.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# fingerprint={fingerprint(raw, seed)}\n")
        writer = csv.writer(fh)
        writer.writerow(["cell"] + keys + metric_cols)
        for row in rows:
            writer.writerow([row["cell"]]
                            + [json.dumps(row["overrides"][k]) for k in keys]
                            + [row.get(col) for col in metric_cols])
    print(f"sweep: {len(cells)} cells ({skipped} cached) -> {csv_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowdeg",
        description="Low-degree testing laboratory for planted-community models")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to a JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default="out", help="output directory")

    p_enum = sub.add_parser("enumerate", help="enumerate multigraph classes")
    p_enum.add_argument("--d-max", type=int, default=4)
    p_enum.add_argument("--no-loops", action="store_true")
    p_enum.add_argument("--cyclic-only", action="store_true")
    p_enum.add_argument("--cache", default=None, help="catalog cache file to write")
    p_enum.set_defaults(func=cmd_enumerate)

    for name, func in (("moments", cmd_moments), ("rvalues", cmd_rvalues),
                       ("advantage", cmd_advantage), ("simulate", cmd_simulate),
                       ("oracle", cmd_oracle), ("sweep", cmd_sweep)):
        p_cmd = sub.add_parser(name)
        common(p_cmd)
        p_cmd.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SizeLimitError, ValueError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
