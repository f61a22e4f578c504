"""Batch front door: simulate datasets, fit models, evaluate, run sweeps.

Subcommands write machine-readable artifacts plus one manifest per run.
Exit codes: 0 ok, 2 input problem, 3 data degeneracy the caller must
repair, 4 numerical failure.
"""

import argparse
import json
import multiprocessing
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConeKitError,
    ConfigError,
    ConvergenceError,
    DataError,
    DegenerateRowError,
    DimensionError,
    RankError,
    ScaleError,
    SpectrumInconsistencyError,
)
from .io import (
    read_docword,
    read_edge_list,
    read_flat_config,
    read_matrix_csv,
    write_docword,
    write_edge_list,
    write_matrix_csv,
    write_params_json,
)
from .metrics import l1_topic_error, perm_match, rc_avg, rel_error
from .models import (
    fit_dcmmsb,
    fit_sbmo,
    fit_topics,
    fit_topics_population,
    remove_empty_words,
    remove_isolated_nodes,
)
from .simulate import SimConfig, gen_dcmmsb, gen_occam, gen_sbmo, gen_topics

NETWORK_MODELS = ("dcmmsb", "occam", "sbmo")
ALL_MODELS = NETWORK_MODELS + ("topic",)

EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_NUMERICAL = 4

_DEGENERATE = (DegenerateRowError,)
_NUMERICAL = (ConvergenceError, RankError, ScaleError, SpectrumInconsistencyError)


def _exit_code_for(exc):
    if isinstance(exc, _NUMERICAL):
        return EXIT_NUMERICAL
    if isinstance(exc, _DEGENERATE):
        return EXIT_DEGENERATE
    if isinstance(exc, (ConfigError, DataError, DimensionError, FileNotFoundError)):
        return EXIT_INPUT
    return EXIT_DEGENERATE if isinstance(exc, ConeKitError) else 1


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("CONEKIT_THREADS")
    return int(env) if env else 1


def _write_manifest(out_dir, command, config, seed, outputs, diagnostics, wall):
    doc = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "wall_time_s": wall,
        "outputs": sorted(str(p) for p in outputs),
        "diagnostics": diagnostics,
    }
    path = Path(out_dir) / "manifest.json"
    write_params_json(path, doc)
    return path


# ---------------------------------------------------------------------------
# config parsing


def _parse_bool(raw, field):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(field, f"expected a boolean, got {raw!r}")


def _parse_gamma_spec(raw):
    kind, _, rest = raw.partition(":")
    kind = kind.strip().lower()
    if kind == "values":
        return ("values", tuple(float(x) for x in rest.split(",")))
    if kind == "beta":
        a, b = (float(x) for x in rest.split(","))
        return ("beta", a, b)
    if kind == "const":
        return ("const", float(rest) if rest else 1.0)
    raise ConfigError("gamma", f"unknown degree rule {kind!r}")


def _sim_config_from(cfg, seed_override=None):
    """Build a SimConfig from a flat key->string dict."""
    def need(key):
        if key not in cfg:
            raise ConfigError(key, "missing required key")
        return cfg[key]

    model = need("model").lower()
    if model not in ALL_MODELS:
        raise ConfigError("model", f"expected one of {ALL_MODELS}")
    try:
        k = int(need("k"))
        seed = int(seed_override if seed_override is not None else cfg.get("seed", "0"))
        kwargs = dict(k=k, seed=seed)
        if model in NETWORK_MODELS:
            kwargs["n"] = int(need("n"))
            kwargs["rho"] = float(cfg.get("rho", "1.0"))
            if "alpha" in cfg:
                kwargs["alpha"] = tuple(float(x) for x in cfg["alpha"].split(","))
            kwargs["b_spec"] = (float(cfg.get("b_diag", "1.0")),
                                float(cfg.get("b_offdiag", "0.1")))
            if "gamma" in cfg:
                kwargs["gamma_spec"] = _parse_gamma_spec(cfg["gamma"])
            if "overlap_fraction" in cfg:
                kwargs["overlap_fraction"] = float(cfg["overlap_fraction"])
        else:
            kwargs["n_words"] = int(need("v"))
            kwargs["n_docs"] = int(need("d"))
            kwargs["tokens_per_doc"] = int(need("n_tokens"))
            for key, name in (("doc_topic_alpha", "doc_topic_alpha"),
                              ("anchor_mass", "anchor_mass"),
                              ("topic_word_alpha", "topic_word_alpha")):
                if key in cfg:
                    kwargs[name] = float(cfg[key])
            if "anchors_per_topic" in cfg:
                kwargs["anchors_per_topic"] = int(cfg["anchors_per_topic"])
        if "plant_pure" in cfg:
            kwargs["plant_pure"] = _parse_bool(cfg["plant_pure"], "plant_pure")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("<config>", str(exc)) from exc
    return model, SimConfig(**kwargs)


# ---------------------------------------------------------------------------
# simulate


_GENERATORS = {"dcmmsb": gen_dcmmsb, "occam": gen_occam, "sbmo": gen_sbmo}


def _simulate_to_dir(model, sim_cfg, out_dir, write_population):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    diagnostics = {}
    if model in NETWORK_MODELS:
        adj, truth, pop = _GENERATORS[model](sim_cfg)
        edges = out_dir / "edges.tsv"
        write_edge_list(edges, adj)
        outputs.append(edges)
        for name, mat in (("truth_theta.csv", truth.memberships),
                          ("truth_gamma.csv", truth.degrees.reshape(-1, 1)),
                          ("truth_b.csv", truth.block_matrix)):
            write_matrix_csv(out_dir / name, mat)
            outputs.append(out_dir / name)
        if truth.binary_memberships is not None:
            write_matrix_csv(out_dir / "truth_z.csv",
                             truth.binary_memberships.astype(float))
            outputs.append(out_dir / "truth_z.csv")
        if write_population:
            write_matrix_csv(out_dir / "population.csv", pop.dense_lowrank())
            outputs.append(out_dir / "population.csv")
        diagnostics["n_edges"] = adj.n_edges
        diagnostics["mean_degree"] = 2.0 * adj.n_edges / adj.n
        diagnostics["density"] = truth.density
    else:
        counts, truth = gen_topics(sim_cfg)
        doc = out_dir / "docword.txt"
        write_docword(doc, counts)
        outputs.append(doc)
        write_matrix_csv(out_dir / "truth_t.csv", truth.word_topic)
        outputs.append(out_dir / "truth_t.csv")
        write_matrix_csv(out_dir / "truth_h.csv", truth.topic_doc)
        outputs.append(out_dir / "truth_h.csv")
        if write_population:
            probs = truth.word_topic @ truth.topic_doc
            write_matrix_csv(out_dir / "population.csv",
                             probs @ probs.T / counts.n_docs)
            outputs.append(out_dir / "population.csv")
        diagnostics["total_tokens"] = int(counts.counts.sum())
    return outputs, diagnostics


def cmd_simulate(args):
    t0 = time.time()
    cfg = read_flat_config(args.config)
    model, sim_cfg = _sim_config_from(cfg)
    write_pop = _parse_bool(cfg.get("write_population", "false"),
                            "write_population")
    outputs, diagnostics = _simulate_to_dir(model, sim_cfg, args.out_dir, write_pop)
    _write_manifest(args.out_dir, "simulate", cfg, sim_cfg.seed, outputs,
                    diagnostics, time.time() - t0)
    return 0


# ---------------------------------------------------------------------------
# fit


def _fit_from_data(model, data, k, seed, delta, eig_select, population):
    if model == "topic":
        if population:
            params, details = fit_topics_population(
                data, k, rng_seed=seed, delta=delta, return_details=True)
        else:
            params, details = fit_topics(
                data, k, rng_seed=seed, delta=delta, return_details=True)
        return params, details
    fitter = fit_sbmo if model == "sbmo" else fit_dcmmsb
    kwargs = dict(rng_seed=seed, delta=delta, eig_select=eig_select,
                  return_details=True)
    if model != "sbmo":
        kwargs["p"] = 2 if model == "occam" else 1
    return fitter(data, k, **kwargs)


def _diagnostics_doc(details):
    d = details.diagnostics
    return {
        "delta_used": details.cone.delta_used,
        "margin": details.cone.hyperplane.margin,
        "band_size": int(details.cone.band.size),
        "corners": details.cone.corners.tolist(),
        "eta": d.eta,
        "zeta": d.zeta,
        "lambda_min": d.lambda_min,
        "kappa": d.kappa,
        "eigenvalues": details.eigenvalues.tolist(),
    }


def cmd_fit(args):
    t0 = time.time()
    if args.model not in ALL_MODELS:
        raise ConfigError("model", f"expected one of {ALL_MODELS}")
    dataset = Path(args.dataset)
    if not dataset.exists():
        raise FileNotFoundError(f"dataset not found: {dataset}")
    if args.population:
        data = read_matrix_csv(dataset)
    elif args.model == "topic":
        data = read_docword(dataset)
    else:
        data = read_edge_list(dataset)

    params, details = _fit_from_data(
        args.model, data, args.k, args.seed, args.delta, args.eig_select,
        args.population)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    diagnostics = _diagnostics_doc(details)
    if args.format == "json":
        doc = {"model": args.model, "diagnostics": diagnostics}
        if args.model == "topic":
            doc["t"] = params.word_topic
        else:
            doc.update(theta=params.memberships, gamma=params.degrees,
                       b=params.block_matrix)
            if params.binary_memberships is not None:
                doc["z"] = params.binary_memberships
        path = out_dir / "params.json"
        write_params_json(path, doc)
        outputs.append(path)
    else:
        if args.model == "topic":
            write_matrix_csv(out_dir / "est_t.csv", params.word_topic)
            outputs.append(out_dir / "est_t.csv")
        else:
            write_matrix_csv(out_dir / "est_theta.csv", params.memberships)
            write_matrix_csv(out_dir / "est_gamma.csv",
                             params.degrees.reshape(-1, 1))
            write_matrix_csv(out_dir / "est_b.csv", params.block_matrix)
            outputs += [out_dir / "est_theta.csv", out_dir / "est_gamma.csv",
                        out_dir / "est_b.csv"]
            if params.binary_memberships is not None:
                write_matrix_csv(out_dir / "est_z.csv",
                                 params.binary_memberships.astype(float))
                outputs.append(out_dir / "est_z.csv")
    snapshot = {k: v for k, v in vars(args).items()
                if k not in ("func", "command")}
    snapshot["dataset"] = str(dataset)
    _write_manifest(out_dir, "fit", snapshot, args.seed, outputs, diagnostics,
                    time.time() - t0)
    return 0


# ---------------------------------------------------------------------------
# evaluate


METRIC_NAMES = ("rel_l1", "rel_l2", "rc_avg", "l1_topic")


def _metric_values(truth, est, metrics):
    report = {}
    for name in metrics:
        if name == "rel_l1":
            report[name] = rel_error(truth, est, "l1")
        elif name == "rel_l2":
            report[name] = rel_error(truth, est, "l2")
        elif name == "rc_avg":
            report[name] = rc_avg(truth, est)
        elif name == "l1_topic":
            report[name] = l1_topic_error(truth, est)
        else:
            raise ConfigError("metrics", f"unknown metric {name!r}")
    return report


def cmd_evaluate(args):
    t0 = time.time()
    truth_dir, est_dir = Path(args.truth), Path(args.est)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    pairs = [("theta", "truth_theta.csv", "est_theta.csv"),
             ("t", "truth_t.csv", "est_t.csv"),
             ("z", "truth_z.csv", "est_z.csv")]
    report = {"metrics": {}, "permutations": {}}
    found = False
    for label, tname, ename in pairs:
        tpath, epath = truth_dir / tname, est_dir / ename
        if not tpath.exists() or not epath.exists():
            continue
        found = True
        truth = read_matrix_csv(tpath)
        est = read_matrix_csv(epath)
        if truth.shape != est.shape:
            raise DimensionError(
                f"{label}: truth shape {truth.shape} vs estimate {est.shape}")
        wanted = metrics if label != "t" else \
            [m for m in metrics if m in ("l1_topic", "rel_l1", "rel_l2")]
        if label == "z":
            wanted = [m for m in metrics if m.startswith("rel")]
        report["metrics"][label] = _metric_values(truth, est, wanted)
        report["permutations"][label] = perm_match(
            truth, est, "l1").permutation.tolist()
    if not found:
        raise FileNotFoundError(
            f"no matching truth/estimate files under {truth_dir} and {est_dir}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report["wall_time_s"] = time.time() - t0
    write_params_json(out, report)
    return 0


# ---------------------------------------------------------------------------
# sweep


def _density_for_mean_degree(cfg, model, target):
    probe_model, probe = _sim_config_from(
        dict(cfg, rho="0.01", seed=cfg.get("seed", "0")))
    _, _, pop = _GENERATORS[probe_model](probe)
    base = pop.mean_degree()
    if base <= 0:
        raise ConfigError("grid_mean_degree", "probe network has no edges")
    return 0.01 * float(target) / base


def _run_network_replicate(payload):
    cfg, model, setting, rho, seed, k, eig_select = payload
    sim_model, sim_cfg = _sim_config_from(
        dict(cfg, rho=repr(rho), seed=str(seed)))
    adj, truth, _ = _GENERATORS[sim_model](sim_cfg)
    sub, kept = remove_isolated_nodes(adj)
    fitter = fit_sbmo if model == "sbmo" else fit_dcmmsb
    kwargs = dict(rng_seed=seed, eig_select=eig_select)
    if model != "sbmo":
        kwargs["p"] = 2 if model == "occam" else 1
    est = fitter(sub, k, **kwargs)
    truth_theta = truth.memberships[kept]
    return {
        "setting": setting,
        "seed": seed,
        "n_kept": int(kept.size),
        "rel_l1": rel_error(truth_theta, est.memberships, "l1"),
        "rel_l2": rel_error(truth_theta, est.memberships, "l2"),
        "rc_avg": rc_avg(truth_theta, est.memberships),
    }


def _run_topic_replicate(payload):
    cfg, setting, n_docs, seed, k = payload
    _, sim_cfg = _sim_config_from(dict(cfg, d=str(n_docs), seed=str(seed)))
    counts, truth = gen_topics(sim_cfg)
    filtered, kept = remove_empty_words(counts)
    est = fit_topics(filtered, k, rng_seed=seed)
    t_full = np.zeros_like(truth.word_topic)
    t_full[kept] = est.word_topic
    return {
        "setting": setting,
        "seed": seed,
        "n_kept": int(kept.size),
        "l1_topic": l1_topic_error(truth.word_topic, t_full),
    }


def cmd_sweep(args):
    t0 = time.time()
    cfg = read_flat_config(args.config)
    model = cfg.get("model", "").lower()
    if model not in ALL_MODELS:
        raise ConfigError("model", f"expected one of {ALL_MODELS}")
    reps = int(cfg.get("reps", "0"))
    if reps < 1:
        raise ConfigError("reps", "must be at least 1")
    k = int(cfg.get("k", "0"))
    base_seed = int(cfg.get("seed", "0"))
    variable = cfg.get("variable", "rho").lower()
    eig_select = cfg.get("eig_select", "magnitude")

    jobs = []
    if model in NETWORK_MODELS:
        if variable != "rho":
            raise ConfigError("variable", "network sweeps vary 'rho'")
        if "grid_mean_degree" in cfg:
            targets = [float(x) for x in cfg["grid_mean_degree"].split(",")]
            grid = [(f"deg{t:g}", _density_for_mean_degree(cfg, model, t))
                    for t in targets]
        elif "grid" in cfg:
            grid = [(f"rho{float(x):g}", float(x))
                    for x in cfg["grid"].split(",")]
        else:
            raise ConfigError("grid", "missing grid or grid_mean_degree")
        for setting, rho in grid:
            for rep in range(reps):
                jobs.append(("net", (cfg, model, setting, rho,
                                     base_seed + rep, k, eig_select)))
    else:
        if variable != "d":
            raise ConfigError("variable", "topic sweeps vary 'd'")
        if "grid" not in cfg:
            raise ConfigError("grid", "missing grid")
        grid = [(f"d{int(x)}", int(x)) for x in cfg["grid"].split(",")]
        for setting, n_docs in grid:
            for rep in range(reps):
                jobs.append(("topic", (cfg, setting, n_docs,
                                       base_seed + rep, k)))

    workers = _threads(args)
    runners = {"net": _run_network_replicate, "topic": _run_topic_replicate}
    if workers > 1:
        # spawn, not fork: forking a process with live BLAS thread pools
        # deadlocks the children
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futures = [pool.submit(runners[kind], payload)
                       for kind, payload in jobs]
            rows = [f.result() for f in futures]
    else:
        rows = [runners[kind](payload) for kind, payload in jobs]

    order = {setting: i for i, (setting, _) in enumerate(grid)}
    rows.sort(key=lambda r: (order[r["setting"]], r["seed"]))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metric_cols = [c for c in rows[0] if c not in ("setting", "seed")]
    results = out_dir / "results.csv"
    with open(results, "w", encoding="utf-8") as fh:
        fh.write("setting,seed," + ",".join(metric_cols) + "\n")
        for r in rows:
            fh.write(f"{r['setting']},{r['seed']},"
                     + ",".join("%.17g" % r[c] for c in metric_cols) + "\n")

    summary = out_dir / "summary.csv"
    with open(summary, "w", encoding="utf-8") as fh:
        fh.write("setting,metric,mean,std\n")
        for setting, _ in grid:
            block = [r for r in rows if r["setting"] == setting]
            for col in metric_cols:
                vals = np.array([r[col] for r in block], dtype=float)
                fh.write(f"{setting},{col},%.17g,%.17g\n"
                         % (vals.mean(), vals.std()))

    _write_manifest(out_dir, "sweep", cfg, base_seed, [results, summary],
                    {"n_jobs": len(jobs), "workers": workers},
                    time.time() - t0)
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="conekit",
        description="Overlapping-cluster inference via one-class SVM corner "
                    "finding: simulate, fit, evaluate, sweep.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a dataset plus truth")
    p_sim.add_argument("config", help="flat key=value config file")
    p_sim.add_argument("out_dir")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="estimate parameters from a dataset")
    p_fit.add_argument("dataset")
    p_fit.add_argument("out_dir")
    p_fit.add_argument("--model", required=True, choices=ALL_MODELS)
    p_fit.add_argument("--k", type=int, required=True)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--population", action="store_true",
                       help="dataset is a population matrix CSV")
    p_fit.add_argument("--delta", type=float, default=None,
                       help="fixed band width (multiple of the margin); "
                            "default: adaptive search")
    p_fit.add_argument("--eig-select", choices=("magnitude", "algebraic"),
                       default="magnitude", dest="eig_select")
    p_fit.add_argument("--format", choices=("csv", "json"), default="csv")
    p_fit.add_argument("--threads", type=int, default=None)
    p_fit.set_defaults(func=cmd_fit)

    p_eval = sub.add_parser("evaluate", help="score estimates against truth")
    p_eval.add_argument("--truth", required=True, help="directory of truth files")
    p_eval.add_argument("--est", required=True, help="directory of estimates")
    p_eval.add_argument("--metrics", default="rel_l1,rel_l2,rc_avg")
    p_eval.add_argument("--out", default="report.json")
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="simulate-fit-evaluate over a grid")
    p_sweep.add_argument("config")
    p_sweep.add_argument("out_dir")
    p_sweep.add_argument("--threads", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConeKitError as exc:
        print(f"conekit: error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)
    except FileNotFoundError as exc:
        print(f"conekit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
