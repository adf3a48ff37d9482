"""Command-line front end.

Exit status: 0 on success, 2 on invalid input, 3 when a run ends with an
unknown verdict because the node budget ran out.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .bound import UNKNOWN, BoundConfig, BoundReport, bound_bit, bound_fer, decide_stopping_distance
from .code import BudgetExceeded, TannerGraph, write_alist
from .composite import composite_bound, design_partition
from .decoder import DEFAULT_EXHAUSTIVE_LIMIT, exact_ber, exact_fer, exact_leading, mc_to_csv, monte_carlo
from .poly import DEFAULT_CAP
from .report import curves_csv, document, dumps, stats_csv, stats_table, stats_text
from .tree import DEFAULT_BUDGET, DEFAULT_SET_CAP
from .validation import (ValidationError, check_bits, check_composite, check_positive, load_code,
                         parse_grid)

WORKERS_ENV = "BECBOUND_WORKERS"
EXIT_OK, EXIT_INVALID, EXIT_UNKNOWN = 0, 2, 3
DEFAULT_GRID = "0.01:1.0:100"


@dataclass
class RunConfig:
    command: str
    code: str
    bits: str = "all"
    budget: int = DEFAULT_BUDGET
    cap: int = DEFAULT_CAP
    set_cap: int = DEFAULT_SET_CAP
    lf: str = "narrowing"
    refresh: int = 16
    pivoting: str = "lazy"
    grid: str = DEFAULT_GRID
    trials: int = 0
    mc_eps: str = "0.2,0.35,0.5"
    seed: int = 0
    composite: str | None = None
    cell_budget: int | None = None
    exact: str = "auto"
    t: int | None = None
    weight_cap: int | None = None
    to: str = "json"
    out: str | None = None
    workers: int = 1

    def recorded(self) -> dict[str, Any]:
        """Settings that influence results (paths and worker count excluded)."""
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        return d


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def bound_config(cfg: RunConfig) -> BoundConfig:
    exact = {"auto": None, "yes": True, "no": False}[cfg.exact]
    return BoundConfig(budget=check_positive("budget", cfg.budget), lf=cfg.lf,
                       refresh=check_positive("refresh", cfg.refresh), cap=cfg.cap,
                       set_cap=check_positive("set-cap", cfg.set_cap), grid=parse_grid(cfg.grid),
                       pivoting=cfg.pivoting, exact=exact)


def _strip(rep: BoundReport | None) -> BoundReport | None:
    if rep is not None:
        rep.evaluator = None
    return rep


def _bound_one(args) -> tuple[BoundReport, BoundReport | None]:
    g, bit, bcfg, comp, cell_budget = args
    base = bound_bit(g, bit, bcfg)
    cub = None
    if comp is not None:
        strategy, depth = comp
        part = design_partition(g, bit, depth, strategy, base)
        cub = composite_bound(g, bit, part, bcfg, base, cell_budget)
    return _strip(base), _strip(cub)


def _map(fn, jobs: list, workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _code_info(g: TannerGraph, source: str) -> dict[str, Any]:
    return {"source": source, "name": g.name, "n": g.n, "m": g.m}


def _emit(cfg: RunConfig, files: dict[str, str], primary: str) -> None:
    if cfg.out:
        out = Path(cfg.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            for name, text in files.items():
                (out / name).write_text(text)
        except OSError as exc:
            raise ValidationError(f"cannot write output: {exc}") from exc
    else:
        sys.stdout.write(files[primary])


def _summary(rep: BoundReport, label: str) -> str:
    k, m = rep.leading
    order = "inf" if np.isinf(k) else str(int(k))
    return f"{label} {rep.target}: order {order} multiplicity {int(m)} {rep.verdict}"


def _mc_section(g: TannerGraph, cfg: RunConfig, punctured=None):
    if not cfg.trials:
        return [], ""
    eps = parse_grid(cfg.mc_eps)
    ests = [monte_carlo(g, float(e), cfg.trials, cfg.seed, punctured, workers=cfg.workers) for e in eps]
    return ests, mc_to_csv(ests)


def cmd_bound(cfg: RunConfig) -> int:
    g = load_code(cfg.code)
    bits = check_bits(cfg.bits, g.n)
    bcfg = bound_config(cfg)
    comp = check_composite(cfg.composite)
    jobs = [(g, b, bcfg, comp, cfg.cell_budget) for b in bits]
    results = _map(_bound_one, jobs, cfg.workers)
    plain = [r[0] for r in results]
    cubs = [r[1] for r in results] if comp is not None else None
    ests, mc_text = _mc_section(g, cfg)
    body: dict[str, Any] = {"reports": [r.to_dict() for r in plain]}
    if cubs:
        body["composite"] = [c.to_dict() for c in cubs]
    if ests:
        body["mc"] = [_mc_dict(e, bits) for e in ests]
    doc = document("bound", _code_info(g, cfg.code), cfg.recorded(), body)
    files = {"report.json": dumps(doc), "curves.csv": curves_csv(plain, cubs)}
    if mc_text:
        files["mc.csv"] = mc_text
    _emit(cfg, files, "report.json")
    for r in plain:
        print(_summary(r, "bit"), file=sys.stderr)
    for c in cubs or []:
        print(_summary(c, "composite bit"), file=sys.stderr)
    unknown = any(r.verdict == UNKNOWN for r in plain + (cubs or []))
    return EXIT_UNKNOWN if unknown else EXIT_OK


def _mc_dict(est, bits: Sequence[int]) -> dict[str, Any]:
    rates = est.bit_rates
    hw = est.bit_half_widths
    return {"epsilon": est.eps, "trials": est.trials, "seed": est.seed,
            "frame_rate": est.frame_rate,
            "bits": {str(b): {"rate": float(rates[b]), "ci_half_width": float(hw[b])} for b in bits}}


def cmd_fer(cfg: RunConfig) -> int:
    g = load_code(cfg.code)
    bcfg = bound_config(cfg)
    rep = bound_fer(g, bcfg)
    body: dict[str, Any] = {"report": _strip(rep).to_dict()}
    ests, mc_text = _mc_section(g, cfg)
    if ests:
        body["mc"] = [{"epsilon": e.eps, "trials": e.trials, "seed": e.seed,
                       "frame_rate": e.frame_rate, "ci_half_width": e.frame_half_width} for e in ests]
    doc = document("fer", _code_info(g, cfg.code), cfg.recorded(), body)
    files = {"report.json": dumps(doc), "curves.csv": curves_csv([rep])}
    if mc_text:
        files["mc.csv"] = mc_text
    _emit(cfg, files, "report.json")
    print(_summary(rep, "frame bit"), file=sys.stderr)
    return EXIT_UNKNOWN if rep.verdict == UNKNOWN else EXIT_OK


def cmd_stopping_distance(cfg: RunConfig) -> int:
    g = load_code(cfg.code)
    if cfg.t is None or cfg.t < 1:
        raise ValidationError("--t must be a positive integer")
    res = decide_stopping_distance(g, cfg.t, check_positive("budget", cfg.budget), cfg.lf, cfg.set_cap)
    doc = document("stopping-distance", _code_info(g, cfg.code), cfg.recorded(), {"result": res.to_dict()})
    _emit(cfg, {"report.json": dumps(doc)}, "report.json")
    print(f"stopping set of weight <= {cfg.t}: {res.answer}", file=sys.stderr)
    return EXIT_UNKNOWN if res.answer == "unknown" else EXIT_OK


def _stats_one(args):
    g, bit, bcfg, weight_cap = args
    rep = _strip(bound_bit(g, bit, bcfg))
    en = exact_leading(g, bit, weight_cap) if weight_cap else None
    return rep, en


def cmd_stats(cfg: RunConfig) -> int:
    g = load_code(cfg.code)
    bits = check_bits(cfg.bits, g.n)
    bcfg = bound_config(cfg)
    if cfg.weight_cap is not None and cfg.weight_cap < 1:
        raise ValidationError("--weight-cap must be positive")
    results = _map(_stats_one, [(g, b, bcfg, cfg.weight_cap) for b in bits], cfg.workers)
    reps = [r for r, _ in results]
    ens = [e for _, e in results]
    rows = stats_table(reps, [r.exact for r in reps], ens)
    body = {"rows": [asdict(r) for r in rows],
            "bits": [{"bit": r.target, "order": None if np.isinf(r.order) else int(r.order),
                      "multiplicity": int(r.multiplicity), "verdict": r.verdict} for r in reps]}
    doc = document("stats", _code_info(g, cfg.code), cfg.recorded(), body)
    files = {"stats.csv": stats_csv(rows), "report.json": dumps(doc)}
    _emit(cfg, files, "stats.csv")
    sys.stderr.write(stats_text(rows))
    return EXIT_OK


def cmd_exact(cfg: RunConfig) -> int:
    g = load_code(cfg.code)
    bits = check_bits(cfg.bits, g.n)
    if g.n > DEFAULT_EXHAUSTIVE_LIMIT:
        raise ValidationError(f"exhaustive oracle limited to n <= {DEFAULT_EXHAUSTIVE_LIMIT}")
    body = {"bits": [_exact_dict(exact_ber(g, b)) for b in bits], "frame": _exact_dict(exact_fer(g))}
    doc = document("exact", _code_info(g, cfg.code), cfg.recorded(), body)
    _emit(cfg, {"report.json": dumps(doc)}, "report.json")
    return EXIT_OK


def _exact_dict(ex) -> dict[str, Any]:
    k, m = ex.leading()
    return {"target": ex.target, "counts": list(ex.counts), "n_free": ex.n_free,
            "coeffs": ex.int_coeffs, "order": None if np.isinf(k) else int(k), "multiplicity": int(m)}


def cmd_simulate(cfg: RunConfig) -> int:
    g = load_code(cfg.code)
    check_positive("trials", cfg.trials)
    _, text = _mc_section(g, cfg)
    _emit(cfg, {"mc.csv": text}, "mc.csv")
    return EXIT_OK


def cmd_convert(cfg: RunConfig) -> int:
    g = load_code(cfg.code)
    text = write_alist(g) if cfg.to == "alist" else g.to_json() + "\n"
    _emit(cfg, {f"code.{cfg.to}": text}, f"code.{cfg.to}")
    return EXIT_OK


COMMANDS = {"bound": cmd_bound, "fer": cmd_fer, "stopping-distance": cmd_stopping_distance,
            "stats": cmd_stats, "exact": cmd_exact, "simulate": cmd_simulate, "convert": cmd_convert}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="becbound",
                                description="Certified erasure-decoding failure bounds for parity-check codes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, bits=True):
        sp.add_argument("--code", required=True,
                        help="builtin:NAME, regular:N,DV,DC,SEED, or an alist/.json file")
        if bits:
            sp.add_argument("--bits", default="all", help="'all' or comma-separated indices")
        sp.add_argument("--out", help="directory for output files (default: stdout)")
        sp.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default: ${WORKERS_ENV} or 1)")

    def tree_opts(sp):
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="node budget per tree")
        sp.add_argument("--lf", choices=("narrowing", "bfs"), default="narrowing")
        sp.add_argument("--refresh", type=int, default=16, help="narrowing refresh period")
        sp.add_argument("--pivoting", choices=("lazy", "eager"), default="lazy")
        sp.add_argument("--set-cap", type=int, default=DEFAULT_SET_CAP, dest="set_cap")

    def curve_opts(sp):
        sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="polynomial degree cap")
        sp.add_argument("--grid", default=DEFAULT_GRID, help="START:STOP:COUNT[:log] or a list")
        sp.add_argument("--exact", choices=("auto", "yes", "no"), default="auto")
        sp.add_argument("--trials", type=int, default=0, help="Monte-Carlo trials per epsilon")
        sp.add_argument("--mc-eps", default="0.2,0.35,0.5", dest="mc_eps")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("bound", help="per-bit upper/lower bounds")
    common(sp)
    tree_opts(sp)
    curve_opts(sp)
    sp.add_argument("--composite", help="uniform:D or nonuniform:D")
    sp.add_argument("--cell-budget", type=int, dest="cell_budget",
                    help="node budget per composite cell (default: budget / cells)")

    sp = sub.add_parser("fer", help="frame error rate bound")
    common(sp, bits=False)
    tree_opts(sp)
    curve_opts(sp)

    sp = sub.add_parser("stopping-distance", help="is there a stopping set of weight <= t?")
    common(sp, bits=False)
    tree_opts(sp)
    sp.add_argument("--t", type=int, required=True)

    sp = sub.add_parser("stats", help="per-order tightness table")
    common(sp)
    tree_opts(sp)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.add_argument("--grid", default=DEFAULT_GRID)
    sp.add_argument("--exact", choices=("auto", "yes", "no"), default="auto")
    sp.add_argument("--weight-cap", type=int, dest="weight_cap",
                    help="enumerate stopping sets up to this weight as ground truth")

    sp = sub.add_parser("exact", help="exhaustive oracle (small codes)")
    common(sp)

    sp = sub.add_parser("simulate", help="Monte-Carlo simulation")
    common(sp, bits=False)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--mc-eps", "--eps", default="0.2,0.35,0.5", dest="mc_eps")
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("convert", help="rewrite a code as alist or JSON")
    common(sp, bits=False)
    sp.add_argument("--to", choices=("alist", "json"), default="alist")
    return p


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    cfg = RunConfig(**values)
    cfg.workers = ns.workers if ns.workers is not None else default_workers()
    if cfg.workers < 1:
        raise ValidationError("--workers must be positive")
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        return COMMANDS[cfg.command](cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
