"""Experiment runner: config-driven tasks writing plot-ready CSV tables.

Heavy imports stay inside functions so the thread-count environment
variable can take effect before the numeric stack loads.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    GraphSignalError,
    IncompatibleRuns,
    ParseError,
    ShapeMismatch,
)

SCHEMA_VERSION = 1
FLOAT_FORMAT = ".12g"
TASKS = ("gft", "localize", "approx", "design-sample", "recover", "detect", "epidemics")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return str(value)


def write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path: Path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:] if line]


# -- configuration -------------------------------------------------------------


def load_config(path) -> dict:
    import yaml

    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema {schema}")
    return data


def resolve_config(args) -> dict:
    config = load_config(args.config) if args.config else {}
    config.setdefault("schema", SCHEMA_VERSION)
    if args.graph:
        config["graph"] = {"path": args.graph, "format": args.format or "edgelist"}
    elif isinstance(config.get("graph"), str):
        config["graph"] = {"path": config["graph"], "format": "edgelist"}
    if args.seed is not None:
        config["seed"] = args.seed
    if args.out:
        config["out"] = args.out
    if "out" not in config:
        raise ConfigError("an output directory is required (--out or config 'out')")
    return config


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _require_graph(config: dict):
    from .graph import load_graph

    section = config.get("graph")
    if not section or "path" not in section:
        raise ConfigError("a graph file is required (--graph or config 'graph.path')")
    path = section["path"]
    if not os.path.exists(path):
        raise ConfigError(f"graph file {path} does not exist")
    fmt = section.get("format", "edgelist")
    if fmt != "edgelist":
        raise ConfigError(f"unknown graph format {fmt!r}")
    return load_graph(path)


def _require_seed(config: dict) -> int:
    if config.get("seed") is None:
        raise ConfigError("this task is stochastic; a seed is required")
    return int(config["seed"])


def graph_hash(graph) -> str:
    payload = f"{graph.num_nodes};{int(graph.directed)};" + ";".join(
        f"{s},{d},{w!r}" for s, d, w in graph.edges)
    return hashlib.sha256(payload.encode()).hexdigest()


def write_manifest(outdir: Path, task: str, config: dict, graph) -> None:
    import numpy
    import scipy

    manifest = {
        "schema": SCHEMA_VERSION,
        "task": task,
        "config": config,
        "config_hash": config_hash(config),
        "graph_hash": graph_hash(graph) if graph is not None else None,
        "seed": config.get("seed"),
        "versions": {
            "graphsig": "0.1.0",
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True),
                                          encoding="utf-8")


# -- signals -------------------------------------------------------------------


def load_signals(path, fmt: str = "csv-columns", expected_rows: int | None = None):
    """Column-major signals from a CSV file, one column per signal.

    The header line is optional. Raises ShapeMismatch when the row count
    disagrees with ``expected_rows`` and ParseError (with the line
    number) on malformed values.
    """
    import numpy as np

    if fmt != "csv-columns":
        raise ConfigError(f"unknown signal format {fmt!r}")
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ConfigError(f"signal file {path} does not exist") from None
    rows = []
    start_line = 1
    data_lines = [(i, line) for i, line in enumerate(lines, start=1) if line.strip()]
    if not data_lines:
        raise ParseError("no data in signal file", line=1)
    first_tokens = data_lines[0][1].split(",")
    try:
        [float(tok) for tok in first_tokens]
    except ValueError:
        data_lines = data_lines[1:]  # header line
        start_line = 2
        if not data_lines:
            raise ParseError("no data rows after header", line=start_line)
    width = None
    for lineno, line in data_lines:
        tokens = line.split(",")
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ParseError(f"expected {width} columns, got {len(tokens)}", line=lineno)
        try:
            rows.append([float(tok) for tok in tokens])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    data = np.asarray(rows)
    if expected_rows is not None and data.shape[0] != expected_rows:
        raise ShapeMismatch(f"expected {expected_rows} rows, found {data.shape[0]}")
    return [data[:, j] for j in range(data.shape[1])]


def _synthesize_signals(graph, spec: dict, rng):
    import numpy as np

    from .dictionaries import (
        BandlimitedModel,
        PolynomialModel,
        random_piecewise_constant,
        synthesize,
    )
    from .graph import StructureMatrixKind

    model_name = spec.get("model", "piecewise-constant")
    count = int(spec.get("count", 1))
    signals = []
    for _ in range(count):
        if model_name == "piecewise-constant":
            _, x = random_piecewise_constant(graph, int(spec.get("pieces", 5)), rng,
                                             low=int(spec.get("low", 1)),
                                             high=int(spec.get("high", 10)))
        elif model_name == "bandlimited":
            kind = StructureMatrixKind(spec.get("kind", "laplacian"))
            k = int(spec.get("bandwidth", max(1, graph.num_nodes // 10)))
            x = synthesize(graph, BandlimitedModel(kind=kind,
                                                   coefficients=tuple(rng.standard_normal(k))))
        elif model_name == "polynomial":
            degree = int(spec.get("degree", 1))
            size = degree * graph.num_nodes + 1
            coeffs = rng.standard_normal(size) / max(1, size)
            x = synthesize(graph, PolynomialModel(degree=degree, coefficients=tuple(coeffs)))
        else:
            raise ConfigError(f"unknown synthesize model {model_name!r}")
        signals.append(np.asarray(x))
    return signals


def _get_signals(graph, config: dict):
    import numpy as np

    section = config.get("signals")
    if not section:
        raise ConfigError("this task needs signals (config 'signals')")
    if "path" in section:
        return load_signals(section["path"], section.get("format", "csv-columns"),
                            expected_rows=graph.num_nodes)
    if "synthesize" in section:
        rng = np.random.default_rng(_require_seed(config))
        return _synthesize_signals(graph, section["synthesize"], rng)
    raise ConfigError("signals section needs 'path' or 'synthesize'")


# -- task implementations --------------------------------------------------


_KIND_ALIASES = {
    "adjacency": "adjacency",
    "normalized-adjacency": "normalized-adjacency",
    "transition": "transition",
    "laplacian": "laplacian",
    "laplacian-normalized": "laplacian-normalized",
    "laplacian-transition": "laplacian-transition",
}


def _kind(name: str):
    from .graph import StructureMatrixKind

    if name not in _KIND_ALIASES:
        raise ConfigError(f"unknown structure matrix kind {name!r}")
    return StructureMatrixKind(_KIND_ALIASES[name])


def _method(name: str):
    from .partition import PartitionMethod

    try:
        return PartitionMethod(name)
    except ValueError:
        raise ConfigError(f"unknown partition method {name!r}") from None


def task_gft(graph, config: dict, outdir: Path) -> None:
    from .graph import build_matrix
    from .spectral import fourier_basis, variation

    section = config.get("gft", {})
    rows = []
    for kind_name in section.get("kinds", ["laplacian"]):
        kind = _kind(kind_name)
        matrix = build_matrix(graph, kind)
        basis = fourier_basis(matrix, kind, degrees=graph.degrees)
        for i in range(basis.num_nodes):
            rows.append([kind.value, i, float(basis.eigenvalues[i]),
                         variation(basis.V[:, i], matrix, kind)])
    write_csv(outdir / "gft.csv", ["kind", "index", "eigenvalue", "variation"], rows)


def task_localize(graph, config: dict, outdir: Path) -> None:
    from .graph import build_matrix, geodesic_distance_matrix
    from .spectral import fourier_basis, localization_report

    section = config.get("localize", {})
    count = section.get("vectors", "all")
    distances = geodesic_distance_matrix(graph)
    rows = []
    for kind_name in section.get("kinds", ["laplacian"]):
        kind = _kind(kind_name)
        basis = fourier_basis(build_matrix(graph, kind), kind, degrees=graph.degrees)
        limit = basis.num_nodes if count == "all" else min(int(count), basis.num_nodes)
        for i in range(limit):
            rep = localization_report(graph, basis.V[:, i], distances=distances)
            rows.append([kind.value, i, rep.ipr, rep.ecr, rep.ngd])
    write_csv(outdir / "localize.csv", ["kind", "index", "ipr", "ecr", "ngd"], rows)


def _approx_error_curve(graph, method_spec: str, x, k_values, seed: int):
    from .approximation import nonlinear_approx, normalized_mse, omp
    from .dictionaries import lspc_dictionary, lspc_wavelet_basis, lsps_dictionary, polynomial_dictionary
    from .partition import build_tree
    from .spectral import fourier_basis_of

    name, _, arg = method_spec.partition(":")
    if name == "gft":
        basis = fourier_basis_of(graph, _kind(arg or "laplacian"))
        return [normalized_mse(x, nonlinear_approx(basis, x, k)[0]) for k in k_values]
    if name == "wavelet":
        tree = build_tree(graph, _method(arg or "spanning-tree"), seed=seed)
        basis = lspc_wavelet_basis(tree)
        return [normalized_mse(x, nonlinear_approx(basis, x, k)[0]) for k in k_values]
    if name == "poly":
        dictionary = polynomial_dictionary(graph, int(arg or 2))
    elif name == "lspc":
        tree = build_tree(graph, _method(arg or "spanning-tree"), seed=seed)
        dictionary = lspc_dictionary(tree)
    elif name == "lsps":
        tree = build_tree(graph, _method(arg or "spanning-tree"), seed=seed)
        dictionary = lsps_dictionary(graph, tree, degree=2)
    else:
        raise ConfigError(f"unknown approximation method {method_spec!r}")
    errors = []
    for k in k_values:
        code = omp(dictionary, x, k)
        errors.append(float(code.residual_norm**2 / (x @ x)))
    return errors


def task_approx(graph, config: dict, outdir: Path) -> None:
    section = config.get("approx", {})
    signals = _get_signals(graph, config)
    methods = section.get("methods", ["gft:laplacian", "wavelet:spanning-tree"])
    k_max = int(section.get("k_max", min(graph.num_nodes, 30)))
    k_values = section.get("k_values") or list(range(1, k_max + 1))
    seed = int(config.get("seed", 0))
    rows = []
    for method_spec in methods:
        for sig_idx, x in enumerate(signals):
            errors = _approx_error_curve(graph, method_spec, x, k_values, seed)
            for k, err in zip(k_values, errors):
                rows.append([method_spec, k, sig_idx, err])
    write_csv(outdir / "approx.csv", ["method", "K", "signal", "nmse"], rows)


def task_design_sample(graph, config: dict, outdir: Path) -> None:
    import numpy as np

    from .sampling import SamplingObjective, design_sampling
    from .spectral import fourier_basis_of

    section = config.get("design_sample", {})
    objective = SamplingObjective(section.get("objective", "c"))
    kind = _kind(section.get("kind", "laplacian"))
    factor = float(section.get("bandwidth_factor", 0.65))
    c_tradeoff = float(section.get("c_tradeoff", 1.0))
    n = graph.num_nodes
    m_values = section.get("m_values") or sorted({max(2, n // 8), n // 4, n // 2})
    basis = fourier_basis_of(graph, kind)
    plans_dir = outdir / "plans"
    plans_dir.mkdir(exist_ok=True)
    rows = []
    for m in m_values:
        k = max(1, int(np.ceil(factor * m)))
        plan = design_sampling(basis.V[:, :k], m, objective,
                               d_comp=basis.V[:, k:], c_tradeoff=c_tradeoff)
        rows.append([objective.value, m, k, plan.objective_value])
        (plans_dir / f"plan_m{m}.json").write_text(
            json.dumps(plan.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    write_csv(outdir / "design_sample.csv", ["objective", "M", "K", "objective_value"], rows)


def task_recover(graph, config: dict, outdir: Path) -> None:
    import numpy as np

    from .approximation import normalized_mse
    from .sampling import (
        SamplingObjective,
        center_assign_recover,
        design_sampling,
        harmonic_recover,
        leaf_sampling,
        mislabel_fraction,
        pls_recover,
        trend_filter_recover,
    )
    from .spectral import fourier_basis_of

    section = config.get("recover", {})
    signals = _get_signals(graph, config)
    x = signals[0]
    strategies = section.get("strategies", ["pls", "harmonic", "trend", "center"])
    n = graph.num_nodes
    m_values = section.get("m_values") or sorted({max(4, n // 8), n // 4, n // 2, n})
    trials = int(section.get("trials", 10))
    mu = float(section.get("mu", 0.5))
    sigma = float(section.get("noise_sigma", 0.0))
    metric_name = section.get("metric", "mislabel")
    factor = float(section.get("bandwidth_factor", 0.65))
    method = _method(section.get("partition", "spanning-tree"))
    seed = _require_seed(config)
    rng = np.random.default_rng(seed)

    def metric(truth, recovered):
        if metric_name == "mislabel":
            return mislabel_fraction(truth, recovered)
        return normalized_mse(truth, recovered)

    basis = None
    rows = []
    for m in m_values:
        m = min(m, n)
        for strategy in strategies:
            if strategy == "pls":
                if basis is None:
                    basis = fourier_basis_of(graph, _kind(section.get("kind", "laplacian")))
                k = max(1, int(np.ceil(factor * m)))
                plan = design_sampling(basis.V[:, :k], m, SamplingObjective.NOISE_WORST)
                y = x + sigma * rng.standard_normal(n) if sigma else x
                recovered = pls_recover(y[list(plan.indices)], plan, basis.V[:, :k])
                rows.append([strategy, m, 0, metric(x, recovered)])
            elif strategy == "center":
                leaves = leaf_sampling(graph, method, m, seed=seed)
                y = x + sigma * rng.standard_normal(n) if sigma else x
                recovered = center_assign_recover(y[list(leaves.centers)], leaves)
                rows.append([strategy, m, 0, metric(x, recovered)])
            else:
                for trial in range(trials):
                    picked = rng.choice(n, size=m, replace=False)
                    y = x + sigma * rng.standard_normal(n) if sigma else x
                    if strategy == "harmonic":
                        recovered = harmonic_recover(y[picked], picked, graph, mu)
                    elif strategy == "trend":
                        recovered = trend_filter_recover(y[picked], picked, graph, mu)
                    else:
                        raise ConfigError(f"unknown recovery strategy {strategy!r}")
                    rows.append([strategy, m, trial, metric(x, recovered)])
    write_csv(outdir / "recover.csv", ["method", "M", "trial", "error"], rows)


def task_detect(graph, config: dict, outdir: Path) -> None:
    from .detection import detect
    from .dictionaries import lsps_dictionary
    from .partition import build_tree

    section = config.get("detect", {})
    signals = _get_signals(graph, config)
    y = signals[0]
    sigma = float(section.get("sigma", 1.0))
    delta = float(section.get("delta", 0.05))
    budget = int(section.get("budget", 10))
    tree = build_tree(graph, _method(section.get("partition", "spanning-tree")),
                      seed=int(config.get("seed", 0)))
    dictionary = lsps_dictionary(graph, tree, degree=int(section.get("degree", 2)),
                                 variant=section.get("variant", "bandlimited"))
    result = detect(y, dictionary, budget=budget, sigma=sigma, delta=delta)
    payload = {
        "statistic": result.statistic,
        "threshold": result.threshold,
        "reject": result.reject,
        "budget": result.budget,
        "sigma": sigma,
        "delta": delta,
        "num_atoms": dictionary.num_atoms,
    }
    (outdir / "detect.json").write_text(json.dumps(payload, indent=2, sort_keys=True),
                                        encoding="utf-8")


def task_epidemics(graph, config: dict, outdir: Path) -> None:
    import numpy as np

    from .epidemics import SISParams, estimate_local_set, estimate_random, simulate_sis, success_rate
    from .sampling import leaf_sampling

    section = config.get("epidemics", {})
    seed = _require_seed(config)
    rng = np.random.default_rng(seed)
    n = graph.num_nodes
    beta = float(section.get("beta", 0.6))
    gamma = float(section.get("gamma", 0.1))
    days = int(section.get("days", 50))
    num_seeds = int(section.get("num_seeds", 3))
    m = int(section.get("m", max(1, int(0.25 * n))))
    trials = int(section.get("trials", 200))
    method = _method(section.get("partition", "two-means"))

    seeds = tuple(int(v) for v in rng.choice(n, size=num_seeds, replace=False))
    params = SISParams(beta=beta, gamma=gamma, seeds=seeds, days=days)
    traj = simulate_sis(graph, params, seed=seed)

    header = ["day"] + [f"s{i}" for i in range(n)]
    write_csv(outdir / "trajectory.csv", header,
              [[day] + traj.states[day].tolist() for day in range(days)])

    leaves = leaf_sampling(graph, method, m, seed=seed)
    truth = traj.incidence()
    designed = np.array([estimate_local_set(traj.states[day], graph, method, m,
                                            leaves=leaves)[0]
                         for day in range(days)])
    random_estimates = np.array([
        [estimate_random(traj.states[day], m, rng) for day in range(days)]
        for _ in range(trials)])
    per_day, aggregate = success_rate(truth, designed, random_estimates)

    write_csv(outdir / "incidence.csv", ["day", "truth", "designed", "random_mean"],
              [[day, float(truth[day]), float(designed[day]),
                float(random_estimates[:, day].mean())] for day in range(days)])
    write_csv(outdir / "success_rate.csv", ["day", "rate"],
              [[day, float(per_day[day])] for day in range(days)])
    (outdir / "results.json").write_text(
        json.dumps({"aggregate_success": aggregate, "seeds": list(seeds), "m": m},
                   indent=2, sort_keys=True), encoding="utf-8")


_TASK_IMPL = {
    "gft": task_gft,
    "localize": task_localize,
    "approx": task_approx,
    "design-sample": task_design_sample,
    "recover": task_recover,
    "detect": task_detect,
    "epidemics": task_epidemics,
}

_STOCHASTIC_TASKS = {"recover", "epidemics"}


def run(task: str, config: dict) -> Path:
    """Run one task and return its output directory."""
    outdir = Path(config["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    graph = _require_graph(config)
    if task in _STOCHASTIC_TASKS:
        _require_seed(config)
    _TASK_IMPL[task](graph, config, outdir)
    write_manifest(outdir, task, config, graph)
    return outdir


# -- summarize ------------------------------------------------------------------


_MERGE_SPECS = {
    "approx.csv": ("method", "K", "signal", [("nmse", 3)]),
    "recover.csv": ("method", "M", "trial", [("error", 3)]),
    "design_sample.csv": ("objective", "M", None, [("objective_value", 3)]),
    "gft.csv": ("kind", "index", None, [("eigenvalue", 2), ("variation", 3)]),
    "localize.csv": ("kind", "index", None, [("ipr", 2), ("ecr", 3), ("ngd", 4)]),
    "incidence.csv": (None, "day", None, [("truth", 1), ("designed", 2), ("random_mean", 3)]),
    "success_rate.csv": (None, "day", None, [("rate", 1)]),
}


def summarize(run_dirs, out_path) -> Path:
    """Merge compatible run directories into one long-format CSV."""
    manifests = []
    for run_dir in run_dirs:
        manifest_path = Path(run_dir) / "manifest.json"
        if not manifest_path.exists():
            raise IncompatibleRuns(f"{run_dir} has no manifest")
        manifests.append(json.loads(manifest_path.read_text(encoding="utf-8")))
    hashes = {m.get("graph_hash") for m in manifests}
    if len(hashes) > 1:
        raise IncompatibleRuns(f"runs use different graphs: {sorted(h or '-' for h in hashes)}")
    rows = []
    for run_dir, manifest in zip(run_dirs, manifests):
        run_name = Path(run_dir).name
        task = manifest.get("task", "?")
        for filename, (method_col, x_col, seed_col, metrics) in _MERGE_SPECS.items():
            path = Path(run_dir) / filename
            if not path.exists():
                continue
            header, data = read_csv(path)
            col = {name: i for i, name in enumerate(header)}
            for record in data:
                method = record[col[method_col]] if method_col else task
                x = record[col[x_col]]
                seed = record[col[seed_col]] if seed_col else ""
                for metric_name, _ in metrics:
                    rows.append([run_name, task, method, x, seed, metric_name,
                                 record[col[metric_name]]])
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out_path, ["run", "task", "method", "x", "seed", "metric", "value"], rows)
    return out_path


# -- entry point ----------------------------------------------------------------


def _apply_thread_env() -> None:
    threads = os.environ.get("GRAPHSIG_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphsig",
        description="Graph-signal dictionary experiments (outputs are plot-ready CSVs)")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", help="YAML experiment config")
        p.add_argument("--graph", help="edge-list graph file")
        p.add_argument("--format", help="graph file format (edgelist)")
        p.add_argument("--seed", type=int, help="seed for stochastic tasks")
        p.add_argument("--out", help="output directory")
    p = sub.add_parser("summarize", help="merge run directories")
    p.add_argument("runs", nargs="+", help="run directories to merge")
    p.add_argument("--out", required=True, help="merged CSV path")
    return parser


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.task == "summarize":
            out = summarize(args.runs, args.out)
            print(out)
        else:
            config = resolve_config(args)
            outdir = run(args.task, config)
            print(outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ShapeMismatch) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except IncompatibleRuns as exc:
        print(f"incompatible runs: {exc}", file=sys.stderr)
        return 4
    except GraphSignalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
