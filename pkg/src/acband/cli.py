"""
Command-line entry point.

    acband run scenario.yaml
    acband budget --alpha 0.05 --delta 0.05 --k 2
    acband gen --n-configs 100 --n-instances 5000 --alpha 0.2 --epsilon 0.1 --output data/
    acband eval --matrix data/scenario.csv --winner 3 --subset results/result-seed0.json

Exit codes: 0 success, 2 configuration error, 3 data error, 4 insufficient
budget. Result payloads carry no timestamps; logs go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence, Union

import pandas as pd
from dotenv import load_dotenv
from pebble import ProcessPool

from acband import __version__
from acband.common.config import ScenarioConfig, worker_threads
from acband.common.errors import InvalidParameter, MalformedFile
from acband.common.helper_functions import handle_run_error
from acband.common.logging import configure_logging
from acband.common.models import ExternalSource, MethodParams, RunResult, ScenarioSettings
from acband.common.rng import SeededRng
from acband.configurators.acband import epoch_constants, n_alpha_delta
from acband.configurators.registry import get_method, validate_method_params
from acband.data import generate_exponential_scenario, generate_lognormal_matrix, save_scenario
from acband.metrics import aggregate_reports, evaluate_config, evaluate_run, summary_frame
from acband.oracle import ExternalOracle, MatrixOracle, RunTrace, RuntimeMatrix, load_runtime_matrix
from acband.oracle.matrix import save_runtime_matrix
from acband.theory import BUDGET_CURVE_COLUMNS, acband_sufficient_budget, budget_curve, n0_for_rule

logger = logging.getLogger(__name__)

Source = Union[RuntimeMatrix, ExternalSource]


def write_atomic(path: Path, text: str) -> Path:
    """Write ``text`` to a sibling temp file and rename it over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def _dump(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# ==============================================================================
# RUN
# ==============================================================================

def load_source(settings: ScenarioSettings) -> Source:
    if settings.dataset is not None:
        return load_runtime_matrix(settings.dataset.path, settings.dataset.format)
    if settings.synthetic is not None:
        syn = settings.synthetic
        if syn.distribution == "lognormal":
            return generate_lognormal_matrix(
                syn.n_configs, syn.n_instances, sigma=syn.sigma, timeout=syn.timeout, seed=syn.seed
            )
        return generate_exponential_scenario(
            syn.n_configs, syn.n_instances, syn.alpha, syn.epsilon, syn.timeout, syn.seed
        ).matrix
    return settings.external


def make_oracle(source: Source, k: int, seed: int, trace: Optional[RunTrace]):
    if isinstance(source, ExternalSource):
        return ExternalOracle(source, k=k, trace=trace)
    return MatrixOracle(source, SeededRng(seed).fork("oracle"), k=k, trace=trace)


def run_seed(method: str, params: MethodParams, source: Source, seed: int, trace_path: Optional[str]) -> RunResult:
    """One configurator run; module-level so worker processes can import it."""
    configure_logging()
    trace = RunTrace(trace_path, keep=False) if trace_path else None
    try:
        oracle = make_oracle(source, params.k, seed, trace)
        return get_method(method)(params, oracle, seed)
    finally:
        if trace is not None:
            trace.close()


def _run_all(settings: ScenarioSettings, source: Source, output: Path, threads: int, traces: bool) -> list[RunResult]:
    def trace_path(seed: int) -> Optional[str]:
        return str(output / f"trace-seed{seed}.jsonl") if traces else None

    jobs = [(settings.method, settings.params, source, seed, trace_path(seed)) for seed in settings.seeds]
    if threads <= 1 or len(jobs) == 1:
        return [run_seed(*job) for job in jobs]
    logger.info("Running %d seeds on %d worker processes", len(jobs), threads)
    with ProcessPool(max_workers=min(threads, len(jobs))) as pool:
        futures = [pool.schedule(run_seed, args=job) for job in jobs]
        return [future.result() for future in futures]


def cmd_run(args: argparse.Namespace) -> int:
    settings = ScenarioConfig(args.scenario).get_scenario()
    if len(set(settings.seeds)) != len(settings.seeds):
        raise InvalidParameter(f"seeds must be distinct, got {settings.seeds}")
    check = validate_method_params(settings.method, settings.params)
    if check["ignored_params"]:
        logger.warning("Method %s ignores parameters %s", settings.method, check["ignored_params"])

    output = Path(args.output or settings.output)
    output.mkdir(parents=True, exist_ok=True)
    source = load_source(settings)
    threads = args.threads if args.threads is not None else worker_threads()
    results = _run_all(settings, source, output, threads, traces=not args.no_trace)

    for result in results:
        write_atomic(output / f"result-seed{result.seed}.json", _dump(result.model_dump(mode="json")))

    if isinstance(source, RuntimeMatrix):
        reports = {}
        for result in results:
            report = evaluate_run(source, result, settings.params.delta_m)
            write_atomic(output / f"eval-seed{result.seed}.json", _dump(report.model_dump(mode="json")))
            reports[result.seed] = report
        summary = aggregate_reports(reports)
    else:
        summary = summary_frame(
            {
                r.seed: {"winner": r.winner, "cpu_time": r.cpu_seconds, "wall_clock": r.wall_clock}
                for r in results
            }
        )
    text = summary.to_csv(lineterminator="\n")
    write_atomic(output / "summary.csv", text)
    sys.stdout.write(text)
    return 0


# ==============================================================================
# BUDGET / GEN / EVAL
# ==============================================================================

def cmd_budget(args: argparse.Namespace) -> int:
    if args.grid:
        frame = budget_curve(args.k, args.alpha, args.delta, args.n0_rule, args.gamma_inv)
    else:
        if len(args.k) != 1 or len(args.alpha) != 1 or len(args.delta) != 1:
            raise InvalidParameter("pass one value each for --k, --alpha and --delta, or use --grid")
        k, alpha, delta = args.k[0], args.alpha[0], args.delta[0]
        n0 = args.n0 if args.n0 is not None else n0_for_rule(n_alpha_delta(alpha, delta), args.n0_rule)
        const = epoch_constants(k, alpha, delta, n0)
        budget = acband_sufficient_budget(alpha, delta, n0, k, args.gamma_inv)
        frame = pd.DataFrame(
            [{"k": k, "alpha": alpha, "delta": delta, "n0": n0, "E": const.E, "budget": budget}],
            columns=BUDGET_CURVE_COLUMNS,
        )
    text = frame.to_csv(index=False, lineterminator="\n")
    if args.output:
        write_atomic(Path(args.output), text)
    sys.stdout.write(text)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    output = Path(args.output)
    if args.distribution == "lognormal":
        matrix = generate_lognormal_matrix(
            args.n_configs, args.n_instances, sigma=args.sigma, timeout=args.timeout, seed=args.seed
        )
        output.mkdir(parents=True, exist_ok=True)
        path = output / f"{args.stem}.{'csv' if args.format == 'csv' else 'bin'}"
        save_runtime_matrix(matrix, path, args.format)
        written = {"matrix": str(path)}
    else:
        scenario = generate_exponential_scenario(
            args.n_configs, args.n_instances, args.alpha, args.epsilon, args.timeout, args.seed
        )
        matrix_path, sidecar = save_scenario(scenario, output, args.stem, args.format)
        written = {"matrix": str(matrix_path), "sidecar": str(sidecar), "alpha_realized": scenario.alpha_realized}
    sys.stdout.write(_dump(written))
    return 0


def _read_subset(path: Optional[str], matrix: RuntimeMatrix) -> list[int]:
    if path is None:
        return list(range(matrix.n_configs))
    text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedFile(f"{path}: not JSON ({e})") from e
    if isinstance(payload, dict):
        payload = payload.get("sampled", [])
    return [int(c) for c in payload]


def cmd_eval(args: argparse.Namespace) -> int:
    matrix = load_runtime_matrix(args.matrix, args.format)
    subset = _read_subset(args.subset, matrix)
    report = evaluate_config(matrix, args.winner, subset, args.delta_m, args.cpu_time)
    sys.stdout.write(_dump(report.model_dump(mode="json")))
    return 0


# ==============================================================================
# PARSER
# ==============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acband", description="Capped parallel algorithm configuration")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Overrides ACBAND_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a configurator over every seed of a scenario")
    run.add_argument("scenario", help="Scenario file (JSON or YAML)")
    run.add_argument("--output", default=None, help="Result directory; defaults to the scenario's 'output'")
    run.add_argument("--threads", type=int, default=None, help="Worker processes; defaults to ACBAND_THREADS")
    run.add_argument("--no-trace", action="store_true", help="Skip the per-seed JSON-lines trace")
    run.set_defaults(handler=cmd_run)

    budget = sub.add_parser("budget", help="Sufficient AC-Band budget for one point or a grid")
    budget.add_argument("--alpha", type=float, nargs="+", required=True)
    budget.add_argument("--delta", type=float, nargs="+", required=True)
    budget.add_argument("--k", type=int, nargs="+", required=True)
    budget.add_argument("--n0", type=int, default=None, help="Explicit n0 for a single point")
    budget.add_argument("--n0-rule", choices=["double", "min", "mid"], default="double")
    budget.add_argument("--gamma-inv", type=float, default=1.0)
    budget.add_argument("--grid", action="store_true", help="Evaluate the full k x alpha x delta grid")
    budget.add_argument("--output", default=None, help="Also write the table to this CSV file")
    budget.set_defaults(handler=cmd_budget)

    gen = sub.add_parser("gen", help="Generate a synthetic scenario")
    gen.add_argument("--n-configs", type=int, required=True)
    gen.add_argument("--n-instances", type=int, required=True)
    gen.add_argument("--alpha", type=float, default=0.2, help="Target share of epsilon-best configurations")
    gen.add_argument("--epsilon", type=float, default=0.1)
    gen.add_argument("--timeout", type=float, default=900.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--distribution", choices=["exponential", "lognormal"], default="exponential")
    gen.add_argument("--sigma", type=float, default=1.5, help="Instance hardness spread (lognormal only)")
    gen.add_argument("--format", choices=["csv", "binary"], default="csv")
    gen.add_argument("--stem", default="scenario")
    gen.add_argument("--output", required=True, help="Directory receiving the files")
    gen.set_defaults(handler=cmd_gen)

    ev = sub.add_parser("eval", help="Evaluate a returned configuration against a matrix")
    ev.add_argument("--matrix", required=True)
    ev.add_argument("--format", choices=["csv", "binary"], default="csv")
    ev.add_argument("--winner", type=int, required=True)
    ev.add_argument("--subset", default=None, help="JSON id list or result file with 'sampled'")
    ev.add_argument("--delta-m", type=float, default=0.1)
    ev.add_argument("--cpu-time", type=float, default=0.0)
    ev.set_defaults(handler=cmd_eval)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except Exception as e:
        failure = handle_run_error(e, context=f"running '{args.command}'")
        logger.debug("Command failed", exc_info=True)
        sys.stderr.write(f"acband: {failure['message']}\n")
        return failure["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
