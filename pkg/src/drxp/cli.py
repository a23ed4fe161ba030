"""Command-line front end.

Exit codes: 0 success, 1 no explanation of the requested kind exists,
2 usage or input error, 3 oracle failure.
"""

from __future__ import annotations

import json
import os
import pathlib
import random
import sys
import time

import click

from . import __version__
from .enumeration import enumerate_explanations
from .errors import (
    DomainViolation,
    DrxpError,
    NoExplanation,
    OracleFailure,
    OracleInconsistency,
    PredictionMismatch,
    SchemaViolation,
)
from .extraction import (
    AXP,
    CXP,
    MonotonePredicate,
    RunConfig,
    deletion_extract,
    dichotomic_extract,
    swift_xplain,
    verify_minimal,
)
from .external import ExternalOracle
from .models import parse_instance, parse_model
from .oracle import CountingOracle, GridOracle, SyntheticOracle, SyntheticSpec
from .problem import Instance, validate_explanation_problem
from .report import build_report, norm_from_name, report_to_json

ORACLE_CMD_ENV = "DRXP_ORACLE_CMD"


class _Usage(click.ClickException):
    exit_code = 2


class _OracleExit(click.ClickException):
    exit_code = 3


class _NoExplanationExit(click.ClickException):
    exit_code = 1


@click.group()
@click.version_option(version=__version__, prog_name="drxp")
def main():
    """Distance-restricted abductive and contrastive explanations."""


def _load_problem(model_path: str, instance_text: str):
    try:
        problem = parse_model(pathlib.Path(model_path).read_text())
    except OSError as exc:
        raise _Usage(f"cannot read model: {exc}") from exc
    except SchemaViolation as exc:
        raise _Usage(f"bad model file: {exc}") from exc
    if instance_text.startswith("@"):
        try:
            instance_text = pathlib.Path(instance_text[1:]).read_text().strip()
        except OSError as exc:
            raise _Usage(f"cannot read instance file: {exc}") from exc
    try:
        instance = parse_instance(instance_text, problem)
        return validate_explanation_problem(problem, instance)
    except (SchemaViolation, DomainViolation) as exc:
        raise _Usage(f"bad instance: {exc}") from exc
    except PredictionMismatch as exc:
        raise _Usage(f"instance label disagrees with the model (predicted {exc.predicted!r})") from exc


def _make_oracle(explanation_problem, norm, oracle_cmd, timeout):
    cmd = oracle_cmd or os.environ.get(ORACLE_CMD_ENV)
    if cmd:
        oracle = ExternalOracle(cmd, explanation_problem, norm, timeout=timeout)
        return oracle, f"external({cmd})"
    return GridOracle(explanation_problem), "grid"


def _parse_ordering(text, m):
    if text is None or text == "":
        return None
    if text == "random":
        return "random"
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise _Usage(f'bad ordering {text!r}; expected "random" or comma-separated indices') from exc


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--instance", "instance_text", required=True, help='inline "v1,...,vm:c" or @file')
@click.option("--epsilon", type=float, required=True)
@click.option("--norm", "norm_flag", type=click.Choice(["l0", "l1", "l2", "linf"]), required=True)
@click.option("--kind", type=click.Choice([AXP, CXP]), default=AXP, show_default=True)
@click.option("--algo", type=click.Choice(["deletion", "dichotomic", "swift"]), default="swift", show_default=True)
@click.option("-q", "--processors", "q", type=int, default=None, help="concurrent probes [default: CPU count]")
@click.option("--delta", type=float, default=0.75, show_default=True)
@click.option("--fd/--no-fd", "fd_enabled", default=True, show_default=True, help="tail disjunction check")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--ordering", "ordering_text", default=None, help='"random" or e.g. "2,1,3"')
@click.option("--enumerate", "enumerate_all", is_flag=True, help="enumerate all explanations of both kinds")
@click.option("--limit", type=int, default=None, help="stop enumeration after this many explanations")
@click.option("--no-verify", "no_verify", is_flag=True, help="skip minimality verification of results")
@click.option("--oracle-cmd", default=None, help=f"external oracle command [env: {ORACLE_CMD_ENV}]")
@click.option("--timeout", type=float, default=300.0, show_default=True, help="external oracle timeout (s)")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="report path [default: next to the model]")
def explain(
    model_path, instance_text, epsilon, norm_flag, kind, algo, q, delta, fd_enabled,
    seed, ordering_text, enumerate_all, limit, no_verify, oracle_cmd, timeout, out_path,
):
    """Compute one explanation, or enumerate all of them."""
    if epsilon <= 0:
        raise _Usage("epsilon must be positive")
    norm = norm_from_name(norm_flag)
    explanation_problem = _load_problem(model_path, instance_text)
    m = explanation_problem.m
    if q is None:
        q = os.cpu_count() or 1
    if q < 1:
        raise _Usage("q must be >= 1")
    ordering = _parse_ordering(ordering_text, m)
    try:
        oracle, oracle_name = _make_oracle(explanation_problem, norm, oracle_cmd, timeout)
    except OracleFailure as exc:
        raise _OracleExit(str(exc)) from exc

    config = RunConfig(
        kind=kind, epsilon=epsilon, norm=norm, ordering=ordering,
        q=q, delta=delta, fd_enabled=fd_enabled, seed=seed,
    )
    resolved_ordering = config.resolve_ordering(m)
    counting = CountingOracle(oracle, problem=explanation_problem)
    pred = MonotonePredicate(kind=kind, features=explanation_problem.features, epsilon=epsilon, norm=norm)

    try:
        start = time.perf_counter()
        if enumerate_all:
            results = []
            kinds = []
            for found_kind, found in enumerate_explanations(
                explanation_problem, counting, epsilon, norm,
                limit=limit, ordering=resolved_ordering, seed=seed,
            ):
                results.append(found)
                kinds.append(found_kind)
            stats = {
                "oracle_calls": counting.calls,
                "parallel_rounds": counting.calls,
                "cancelled_calls": counting.cancelled,
                "wall_time": time.perf_counter() - start,
                "kinds": kinds,
                "complete": limit is None or len(results) < limit,
            }
            algorithm = "enumerate"
        else:
            if algo == "swift":
                result, run_stats = swift_xplain(explanation_problem, counting, config)
                stats = run_stats.to_dict()
            elif algo == "deletion":
                result = deletion_extract(counting, pred, resolved_ordering)
                stats = {
                    "oracle_calls": counting.calls,
                    "parallel_rounds": counting.calls,
                    "cancelled_calls": counting.cancelled,
                    "result_size": len(result),
                    "wall_time": time.perf_counter() - start,
                }
            else:
                result = dichotomic_extract(counting, pred, resolved_ordering)
                stats = {
                    "oracle_calls": counting.calls,
                    "parallel_rounds": counting.calls,
                    "cancelled_calls": counting.cancelled,
                    "result_size": len(result),
                    "wall_time": time.perf_counter() - start,
                }
            results = [result]
            kinds = [kind]
    except NoExplanation as exc:
        raise _NoExplanationExit(str(exc)) from exc
    except (OracleFailure, OracleInconsistency) as exc:
        raise _OracleExit(str(exc)) from exc
    finally:
        if hasattr(oracle, "shutdown"):
            oracle.shutdown()

    if no_verify:
        verified = [None] * len(results)
    else:
        verify_oracle = GridOracle(explanation_problem) if oracle_name != "grid" else oracle
        if not verify_oracle.witnesses_are_geometric:
            verified = [None] * len(results)
        else:
            verified = []
            for found_kind, found in zip(kinds, results):
                vp = MonotonePredicate(kind=found_kind, features=explanation_problem.features, epsilon=epsilon, norm=norm)
                verified.append(verify_minimal(verify_oracle, vp, found))

    report = build_report(
        kind=kind if not enumerate_all else "both",
        algorithm=algorithm if enumerate_all else algo,
        epsilon=epsilon,
        norm=norm,
        ordering=resolved_ordering,
        seed=seed,
        delta=delta,
        fd_enabled=fd_enabled,
        instance_point=explanation_problem.v,
        instance_label=explanation_problem.label,
        oracle_name=oracle_name,
        witnesses_are_geometric=counting.witnesses_are_geometric,
        results=results,
        verified=verified,
        q=q,
        stats=stats,
    )
    text = report_to_json(report)
    destination = pathlib.Path(out_path) if out_path else pathlib.Path(model_path).with_suffix(".report.json")
    destination.write_text(text)

    for found_kind, found, ok in zip(kinds, results, verified):
        status = "" if ok is None else ("  [verified]" if ok else "  [VERIFICATION FAILED]")
        click.echo(f"{found_kind}: {{{', '.join(str(i) for i in sorted(found))}}}{status}")
    click.echo(
        f"calls={stats.get('oracle_calls')} rounds={stats.get('parallel_rounds')} "
        f"cancelled={stats.get('cancelled_calls')} wall={stats.get('wall_time', 0.0):.3f}s "
        f"report={destination}"
    )
    if any(ok is False for ok in verified):
        raise _OracleExit("a result failed minimality verification")


@main.command()
@click.option("--synthetic-m", "synthetic_m", type=int, default=None, help="synthetic feature count")
@click.option("--breakers", type=int, default=10, show_default=True, help="number of singleton breaker sets")
@click.option("--breaker-span", type=int, default=None, help="breakers placed within the first SPAN positions")
@click.option("--latency", type=float, default=0.05, show_default=True, help="simulated per-call delay (s)")
@click.option("--suite", type=click.Path(exists=True, file_okay=False), default=None, help="directory of .model/.instance fixture pairs")
@click.option("--epsilon", type=float, default=1.0, show_default=True)
@click.option("--norm", "norm_flag", type=click.Choice(["l0", "l1", "l2", "linf"]), default="l1", show_default=True)
@click.option("--kind", type=click.Choice([AXP, CXP]), default=AXP, show_default=True)
@click.option("--algos", default="deletion,swift", show_default=True, help="comma list of deletion|dichotomic|swift")
@click.option("-q", "--processors", "q", type=int, default=8, show_default=True)
@click.option("--delta", type=float, default=0.75, show_default=True)
@click.option("--fd/--no-fd", "fd_enabled", default=True, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="machine-readable results")
def bench(synthetic_m, breakers, breaker_span, latency, suite, epsilon, norm_flag, kind,
          algos, q, delta, fd_enabled, seed, out_path):
    """Compare extraction algorithms on a synthetic spec or a fixture suite."""
    norm = norm_from_name(norm_flag)
    algo_list = [a.strip() for a in algos.split(",") if a.strip()]
    for a in algo_list:
        if a not in ("deletion", "dichotomic", "swift"):
            raise _Usage(f"unknown algorithm {a!r}")
    if not algo_list:
        raise _Usage("no algorithms selected")

    tasks = []  # (label, oracle factory, m, explanation problem or None)
    if synthetic_m is not None:
        rng = random.Random(seed)
        span = breaker_span if breaker_span is not None else synthetic_m
        if not breakers <= span <= synthetic_m:
            raise _Usage("need breakers <= breaker-span <= synthetic-m")
        chosen = rng.sample(range(1, span + 1), breakers)
        spec = SyntheticSpec(
            m=synthetic_m,
            hidden_breakers=tuple(frozenset({f}) for f in chosen),
            latency=latency,
            seed=seed,
        )
        tasks.append((f"synthetic(m={synthetic_m})", spec, synthetic_m, None))
    elif suite is not None:
        model_files = sorted(pathlib.Path(suite).glob("*.model"))
        if not model_files:
            raise _Usage(f"no .model files under {suite}")
        for path in model_files:
            instance_path = path.with_suffix(".instance")
            if not instance_path.exists():
                raise _Usage(f"missing instance file {instance_path}")
            ep = _load_problem(str(path), "@" + str(instance_path))
            tasks.append((path.stem, None, ep.m, ep))
    else:
        raise _Usage("provide --synthetic-m or --suite")

    rows = []
    for label, spec, m, ep in tasks:
        for algo in algo_list:
            if spec is not None:
                oracle = CountingOracle(SyntheticOracle(spec))
                features = frozenset(range(1, m + 1))
                run_epsilon, run_norm = epsilon, norm
            else:
                oracle = CountingOracle(GridOracle(ep), problem=ep)
                features = ep.features
                run_epsilon, run_norm = epsilon, norm
            pred = MonotonePredicate(kind=kind, features=features, epsilon=run_epsilon, norm=run_norm)
            algo_q = q if algo == "swift" else 1
            config = RunConfig(
                kind=kind, epsilon=run_epsilon, norm=run_norm, q=algo_q,
                delta=delta, fd_enabled=fd_enabled and algo == "swift", seed=seed,
            )
            start = time.perf_counter()
            try:
                if algo == "swift":
                    if ep is not None:
                        result, run_stats = swift_xplain(ep, oracle, config)
                    else:
                        result, run_stats = _swift_on_features(oracle, pred, config)
                    rounds = run_stats.parallel_rounds
                    cancelled = run_stats.cancelled_calls
                elif algo == "deletion":
                    result = deletion_extract(oracle, pred)
                    rounds, cancelled = oracle.calls, oracle.cancelled
                else:
                    result = dichotomic_extract(oracle, pred)
                    rounds, cancelled = oracle.calls, oracle.cancelled
            except NoExplanation as exc:
                raise _NoExplanationExit(str(exc)) from exc
            except (OracleFailure, OracleInconsistency) as exc:
                raise _OracleExit(str(exc)) from exc
            wall = time.perf_counter() - start
            rows.append(
                {
                    "fixture": label,
                    "algorithm": algo if algo != "swift" else f"swift(q={algo_q})",
                    "size": len(result),
                    "calls": oracle.calls,
                    "rounds": rounds,
                    "cancelled": cancelled,
                    "wall": round(wall, 4),
                }
            )

    header = f"{'fixture':<22} {'algorithm':<14} {'size':>4} {'calls':>6} {'rounds':>6} {'cancelled':>9} {'wall(s)':>8}"
    click.echo(header)
    click.echo("-" * len(header))
    for r in rows:
        click.echo(
            f"{r['fixture']:<22} {r['algorithm']:<14} {r['size']:>4} {r['calls']:>6} "
            f"{r['rounds']:>6} {r['cancelled']:>9} {r['wall']:>8.3f}"
        )
    if out_path:
        pathlib.Path(out_path).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")


def _swift_on_features(oracle, pred, config):
    from .extraction import _run

    return _run(oracle, pred, config)


def run(argv=None) -> int:
    """Programmatic entry point returning the exit code."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return exc.exit_code
    except click.exceptions.Abort:
        return 2
    except DrxpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(run())
