"""Command line front end.

Every subcommand prints one JSON document (records streams are JSON
lines) carrying a schema_version field.  Outputs are byte-identical
for identical inputs and seeds; timing is opt-in for that reason.

Exit codes: 0 on success, 2 on invalid input, 1 on runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from pcelabs import bench, labs_core, pce_solver
from pcelabs.baselines import (
    MemeticConfig,
    TabuConfig,
    WarmStartConfig,
    exact_solve,
    pce_warm_start,
    tabu_search,
)
from pcelabs.pauli_algebra import sample_anticommuting_set, sample_commuting_set
from pcelabs.pce_solver import EnergyReferences, PceConfig

ENV_OUT_DIR = "PCELABS_OUT"
ENV_WORKERS = "PCELABS_WORKERS"


def _emit(doc: dict) -> None:
    doc.setdefault("schema_version", bench.SCHEMA_VERSION)
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _out_path(raw: str) -> Path:
    """Resolve an output path, honoring the output-directory override."""
    path = Path(raw)
    base = os.environ.get(ENV_OUT_DIR)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _default_workers() -> int:
    raw = os.environ.get(ENV_WORKERS)
    if raw is None:
        return 1
    workers = int(raw)
    if workers < 1:
        raise ValueError(f"{ENV_WORKERS} must be >= 1, got {raw}")
    return workers


def _load_references(n: int, enabled: bool) -> EnergyReferences | None:
    if not enabled:
        return None
    try:
        levels = bench.reference_levels(n)
    except ValueError:
        return None
    return EnergyReferences(
        exact=levels[0],
        first=levels[1] if len(levels) > 1 else None,
        second=levels[2] if len(levels) > 2 else None,
    )


def _config_kwargs(args, names) -> dict:
    """Collect explicitly-given optional flags into config kwargs."""
    out = {}
    for flag, field in names.items():
        value = getattr(args, flag)
        if value is not None:
            out[field] = value
    return out


def cmd_eval(args) -> int:
    x = labs_core.parse_sequence(args.sequence)
    doc = dict(labs_core.energy_report(x))
    doc["sequence"] = labs_core.format_sequence(x)
    doc["canonical"] = labs_core.format_sequence(labs_core.canonicalize(x))
    _emit(doc)
    return 0


def cmd_exact(args) -> int:
    result = exact_solve(args.n, levels=args.levels)
    _emit(result.to_dict())
    return 0


def cmd_skew(args) -> int:
    half = labs_core.parse_sequence(args.half)
    full = labs_core.expand_skew_symmetric(half)
    report = labs_core.energy_report(full)
    doc = {
        "half": labs_core.format_sequence(half),
        "n": report["n"],
        "sequence": labs_core.format_sequence(full),
        "energy": report["energy"],
        "merit_factor": report["merit_factor"],
    }
    _emit(doc)
    return 0


_PCE_FLAGS = {
    "qubits": "n_qubits",
    "layers": "layers",
    "pauli_mode": "pauli_mode",
    "alpha": "alpha",
    "beta": "beta",
    "optimizer": "optimizer",
    "step_size": "step_size",
    "iters": "iters_per_restart",
    "restarts": "restart_cap",
    "shots": "shots",
    "engine": "engine",
}


def _add_pce_flags(parser) -> None:
    parser.add_argument("--qubits", type=int, default=None)
    parser.add_argument("--layers", type=int, default=None)
    parser.add_argument(
        "--pauli-mode",
        dest="pauli_mode",
        choices=["anticommuting", "commuting"],
        default=None,
    )
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--optimizer", choices=["adam", "sgd"], default=None)
    parser.add_argument("--step-size", dest="step_size", type=float, default=None)
    parser.add_argument("--iters", type=int, default=None)
    parser.add_argument("--restarts", type=int, default=None)
    parser.add_argument("--shots", type=int, default=None)
    parser.add_argument("--engine", choices=["auto", "numba", "numpy"], default=None)


def cmd_solve_pce(args) -> int:
    config = PceConfig(seed=args.seed, **_config_kwargs(args, _PCE_FLAGS))
    references = _load_references(args.n, not args.no_refs)
    result = pce_solver.solve(args.n, config, references)
    _emit(result.to_dict())
    return 0


_TABU_FLAGS = {
    "budget": "eval_budget",
    "tenure_min": "tenure_min",
    "tenure_max": "tenure_max",
    "stagnation": "stagnation_factor",
}


def cmd_solve_tabu(args) -> int:
    config = TabuConfig(seed=args.seed, **_config_kwargs(args, _TABU_FLAGS))
    references = _load_references(args.n, not args.no_refs)
    result = tabu_search(args.n, config, references)
    _emit(result.to_dict())
    return 0


def cmd_warm_start(args) -> int:
    pce = PceConfig(seed=args.seed, **_config_kwargs(args, _PCE_FLAGS))
    memetic = MemeticConfig(seed=args.seed, **_config_kwargs(args, _TABU_FLAGS))
    warm = WarmStartConfig(
        pce_runs=args.pce_runs, population_copies=args.copies
    )
    references = _load_references(args.n, not args.no_refs)
    result = pce_warm_start(args.n, pce, memetic, references, warm)
    _emit(result.to_dict())
    return 0


def cmd_bench(args) -> int:
    with open(args.config) as fh:
        config = bench.CampaignConfig.from_dict(json.load(fh))
    if args.timing:
        config.timing = True
    workers = args.workers if args.workers is not None else _default_workers()
    records = bench.run_campaign(config, workers=workers)
    out = _out_path(args.out)
    bench.write_records(records, out)
    if args.csv:
        bench.records_to_csv(records, _out_path(args.csv), target=args.target)
    solved = sum(1 for r in records if r.tts is not None)
    _emit(
        {
            "records": str(out),
            "runs": len(records),
            "solved": solved,
            "solver": config.solver,
            "sizes": list(config.sizes),
        }
    )
    return 0


def cmd_fit(args) -> int:
    records = bench.read_records(args.records)
    fit = bench.fit_exponential(
        records, mode=args.mode, target=args.target, parity=args.parity
    )
    _emit(fit.to_dict())
    return 0


def _load_sample(path: str):
    """Load a TTS sample: a JSON array of numbers, or a records file
    (JSONL) whose uncensored tts values form the sample."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        records = bench.read_records(path)
        data = [r.tts for r in records if r.tts is not None]
        if not data:
            raise ValueError(f"{path}: no uncensored tts values")
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a JSON array of numbers")
    return [float(v) for v in data]


def cmd_ks(args) -> int:
    result = bench.ks_two_sample(_load_sample(args.a), _load_sample(args.b))
    _emit(result.to_dict())
    return 0


def cmd_tune(args) -> int:
    with open(args.samples) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{args.samples}: expected a JSON object of samples")
    samples = {}
    for key, values in raw.items():
        try:
            setting = int(key)
        except ValueError:
            setting = float(key)
        samples[setting] = [float(v) for v in values]
    choice = bench.tune_sweep(samples, threshold=args.threshold)
    _emit({"setting": choice, "threshold": args.threshold})
    return 0


def cmd_shot_bound(args) -> int:
    query = bench.ShotBudgetQuery(
        n=args.n, alpha=args.alpha, beta=args.beta, eps=args.eps, delta=args.delta
    )
    _emit(bench.shot_bound(query).to_dict())
    return 0


def _load_fit_constants(path: str) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if "b" not in doc or "c" not in doc:
        raise ValueError(f"{path}: fit document needs 'b' and 'c'")
    return doc


def cmd_crossover(args) -> int:
    fit_q = _load_fit_constants(args.quantum)
    fit_c = _load_fit_constants(args.classical)
    n_star = bench.crossover(fit_q, fit_c, k=args.k, p=args.p)
    _emit(
        {
            "crossover_n": n_star,
            "in_range": n_star is not None,
            "range": list(bench.CROSSOVER_RANGE),
            "overhead_k": args.k,
            "overhead_p": args.p,
        }
    )
    return 0


def cmd_pauli_gen(args) -> int:
    sampler = (
        sample_anticommuting_set
        if args.mode == "anticommuting"
        else sample_commuting_set
    )
    import numpy as np

    rng = np.random.default_rng(args.seed)
    pauli_set = sampler(args.qubits, args.count, rng)
    _emit(pauli_set.to_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcelabs",
        description="Low autocorrelation binary sequences via Pauli correlation encoding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="score a binary sequence")
    p.add_argument("--sequence", required=True, help="signs as +-/10 characters")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("exact", help="enumerate the exact optimum")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(fn=cmd_exact)

    p = sub.add_parser("skew", help="expand a skew-symmetric half sequence")
    p.add_argument("--half", required=True)
    p.set_defaults(fn=cmd_skew)

    p = sub.add_parser("solve-pce", help="variational solve")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-refs", action="store_true", help="skip reference counters")
    _add_pce_flags(p)
    p.set_defaults(fn=cmd_solve_pce)

    p = sub.add_parser("solve-tabu", help="tabu search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-refs", action="store_true")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--tenure-min", dest="tenure_min", type=int, default=None)
    p.add_argument("--tenure-max", dest="tenure_max", type=int, default=None)
    p.add_argument("--stagnation", type=int, default=None)
    p.set_defaults(fn=cmd_solve_tabu)

    p = sub.add_parser("warm-start", help="variational seeds feeding memetic tabu")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-refs", action="store_true")
    p.add_argument("--pce-runs", dest="pce_runs", type=int, default=150)
    p.add_argument("--copies", type=int, default=50)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--tenure-min", dest="tenure_min", type=int, default=None)
    p.add_argument("--tenure-max", dest="tenure_max", type=int, default=None)
    p.add_argument("--stagnation", type=int, default=None)
    _add_pce_flags(p)
    p.set_defaults(fn=cmd_warm_start)

    p = sub.add_parser("bench", help="run a campaign from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="records.jsonl")
    p.add_argument("--csv", default=None)
    p.add_argument("--target", choices=["exact", "first", "second"], default="exact")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="record wall times (breaks byte-identical reruns)")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("fit", help="fit TTS = c * b^N from records")
    p.add_argument("--records", required=True)
    p.add_argument("--mode", choices=["median", "ensemble"], default="median")
    p.add_argument("--target", choices=["exact", "first", "second"], default="exact")
    p.add_argument("--parity", choices=["all", "even", "odd"], default="all")
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("ks", help="two-sample Kolmogorov-Smirnov test")
    p.add_argument("--a", required=True, help="JSON array file")
    p.add_argument("--b", required=True, help="JSON array file")
    p.set_defaults(fn=cmd_ks)

    p = sub.add_parser("tune", help="pick the smallest sufficient setting")
    p.add_argument("--samples", required=True, help="JSON object: setting -> sample array")
    p.add_argument("--threshold", type=float, default=0.05)
    p.set_defaults(fn=cmd_tune)

    p = sub.add_parser("shot-bound", help="measurement budget for a loss precision")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(fn=cmd_shot_bound)

    p = sub.add_parser("crossover", help="first size where one scaling beats another")
    p.add_argument("--quantum", required=True, help="fit JSON for the scaling with overhead")
    p.add_argument("--classical", required=True, help="fit JSON to beat")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--p", type=float, default=0.0)
    p.set_defaults(fn=cmd_crossover)

    p = sub.add_parser("pauli-gen", help="sample a commuting or anticommuting set")
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument(
        "--mode", choices=["anticommuting", "commuting"], default="anticommuting"
    )
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_pauli_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
