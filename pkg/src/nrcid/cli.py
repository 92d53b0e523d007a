"""
CLI entry point for nrcid.

Provides:
- synth: write a seeded synthetic dataset
- enroll: build one model file per participant
- identify: rank enrolled participants for one segment file
- evaluate: session-holdout evaluation with report files
- sweep: (k, d) grid evaluation with resumable cells
- inspect: summarize a model file

Exit codes: 0 success, 2 configuration, 3 dataset/input, 4 model store,
5 internal error.
"""

import argparse
import functools
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import pandas as pd

from . import __version__
from .core.config import RunConfig, set_run_config
from .core.errors import (
    EXIT_DATASET,
    EXIT_INTERNAL,
    EXIT_OK,
    ConfigError,
    InvalidDatasetError,
    NrcIdError,
)
from .eval import (
    EvalProtocol,
    default_synthetic_spec,
    evaluate,
    generate_synthetic,
    load_synthetic_spec,
    save_synthetic_spec,
    sweep,
    write_report,
    write_sweep,
)
from .eval.protocol import index_sessions
from .identity import DirectoryModelStore, Registry, enroll, get_model_store, identify, read_model_file, set_model_store
from .quantizer import format_real
from .signal import (
    design_butterworth_lowpass,
    discover_dataset,
    frequency_response,
    load_dataset,
    read_segment,
    write_dataset,
)
from .xafcm import format_alpha

logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., int])

SYNTHETIC_SPEC_NAME = "synthetic.yaml"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def handle_errors(func: F) -> F:
    """
    Decorator mapping failures to exit codes.

    Known nrcid errors print one line to stderr and return their exit code.
    File-system errors map to the dataset/input code. Anything else is logged
    with its traceback and maps to the internal-error code.
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except NrcIdError as e:
            print(f"error: {e}", file=sys.stderr)
            return e.exit_code
        except OSError as e:
            print(f"I/O error: {e}", file=sys.stderr)
            return EXIT_DATASET
        except Exception:
            logger.exception(f"Unexpected error in {func.__name__}")
            return EXIT_INTERNAL

    return wrapper  # type: ignore


# =============================================================================
# Argument parsing
# =============================================================================


def _int_list(text: str) -> List[int]:
    """Parse "38", "1,2,5" or "1-10" (inclusive) into a list of integers."""
    values: List[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        low, sep, high = part.partition("-")
        try:
            if sep and low:
                values.extend(range(int(low), int(high) + 1))
            else:
                values.append(int(part))
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"expected integers or ranges like 1-10, got {text!r}") from e
    if not values:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return values


def _str_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # Every default is None so unset flags fall through to the config file.
    common.add_argument("--config", help="YAML config file (default: $NRCID_CONFIG)")
    common.add_argument("--verbose", action="store_true", default=None, help="debug logging")
    common.add_argument("--dataset", help="dataset root directory")
    common.add_argument("--store", help="model store directory (default: $NRCID_STORE)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--train-sessions", type=_str_list, help="comma-separated training session ids")
    common.add_argument("--test-session", help="held-out session id")
    common.add_argument("--k", type=_int_list, help="context order (sweep: list or range, e.g. 1-10)")
    common.add_argument("--d", type=_int_list, help="depth (sweep: list or range)")
    common.add_argument("--alphabet", dest="alphabet_size", type=int, help="quantizer alphabet size L")
    common.add_argument("--alpha", help="smoothing: 'auto' or a positive real")
    common.add_argument("--segment-seconds", type=float, help="test segment length in seconds")
    common.add_argument("--cutoff-hz", type=float, help="low-pass cutoff frequency")
    common.add_argument("--filter-order", type=int, help="Butterworth order")
    common.add_argument("--seed", type=int, help="seed for synthetic data")
    common.add_argument("--threads", type=int, help="worker threads (default: CPU count)")
    common.add_argument("--format", choices=["text", "csv"], help="identify output format")
    common.add_argument("--resume", action="store_true", default=None, help="sweep: skip completed cells")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="nrcid",
        description="ECG biometric identification by normalized relative compression.",
    )
    parser.add_argument("--version", action="store_true", help="show version and exit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    synth = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    synth.add_argument("spec", nargs="?", help="SyntheticSpec YAML file (default: standard cohort)")
    sub.add_parser("enroll", parents=[common], help="enroll every participant of a dataset")
    ident = sub.add_parser("identify", parents=[common], help="identify one segment file")
    ident.add_argument("segment", help="segment CSV file")
    sub.add_parser("evaluate", parents=[common], help="session-holdout evaluation")
    sub.add_parser("sweep", parents=[common], help="evaluate a (k, d) grid")
    inspect = sub.add_parser("inspect", parents=[common], help="summarize a model file")
    inspect.add_argument("model", help="participant model file")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Resolve the run configuration for parsed arguments.

    `--k`/`--d` feed the sweep grid for `sweep` and must be single values
    for every other command.
    """
    skip = {"command", "config", "spec", "segment", "model", "version"}
    overrides: Dict[str, Any] = {
        key: value for key, value in vars(args).items() if key not in skip and value is not None
    }
    problems = []
    for name in ("k", "d"):
        if name not in overrides:
            continue
        values = overrides.pop(name)
        if args.command == "sweep":
            overrides[f"sweep_{name}"] = values
        elif len(values) != 1:
            problems.append(f"--{name} takes a single value for {args.command}")
        else:
            overrides[name] = values[0]
    if problems:
        raise ConfigError(problems)
    return RunConfig.from_sources(overrides, config_path=args.config).validate()


# =============================================================================
# Commands
# =============================================================================


@handle_errors
def cmd_synth(config: RunConfig, spec_path: Optional[str] = None) -> int:
    """Write `<out>/<participant>/<session>.csv`, manifest.txt and synthetic.yaml."""
    out = config.out or config.dataset
    if not out:
        raise ConfigError(["--out (or --dataset) is required"])
    spec = load_synthetic_spec(spec_path) if spec_path else default_synthetic_spec(seed=config.seed)
    recordings = generate_synthetic(spec)
    manifest = write_dataset(out, recordings)
    save_synthetic_spec(Path(out) / SYNTHETIC_SPEC_NAME, spec)
    print(f"wrote {len(recordings)} recordings for {len(manifest.participants)} participants to {out}")
    return EXIT_OK


@handle_errors
def cmd_enroll(config: RunConfig, executor=None) -> int:
    """Enroll every participant; report per-participant failures."""
    config.require("dataset", "train_sessions")
    manifest = discover_dataset(config.dataset)
    by_participant = index_sessions(load_dataset(manifest))
    fspec = config.filter_spec(manifest.rate_hz)
    params = config.model_params()
    qspec = config.quantizer_spec()
    set_model_store(DirectoryModelStore(config.store))
    store = get_model_store()

    def enroll_one(pid: str):
        sessions = by_participant[pid]
        missing = [s for s in config.train_sessions if s not in sessions]
        try:
            if missing:
                raise InvalidDatasetError(f"missing training sessions {', '.join(missing)}")
            return enroll(pid, [sessions[s] for s in config.train_sessions], params, fspec, qspec)
        except NrcIdError as e:
            return e

    participants = sorted(by_participant)
    outcomes = list(executor.map(enroll_one, participants)) if executor else [enroll_one(p) for p in participants]

    failures = 0
    for pid, outcome in zip(participants, outcomes):
        if isinstance(outcome, NrcIdError):
            failures += 1
            print(f"FAILED {pid}: {outcome}", file=sys.stderr)
            continue
        store.store_model(outcome)
        print(f"enrolled {pid} ({', '.join(config.train_sessions)})")
    if failures:
        print(f"error: {failures} of {len(participants)} participants failed to enroll", file=sys.stderr)
        return EXIT_DATASET
    return EXIT_OK


@handle_errors
def cmd_identify(config: RunConfig, segment_path: str, executor=None) -> int:
    """Print the predicted participant and the ascending NRC ranking."""
    set_model_store(DirectoryModelStore(config.store))
    registry = Registry.from_store(get_model_store())
    samples, rate = read_segment(segment_path)

    fspec = registry.filter_spec
    if fspec is None:
        if rate is None:
            raise ConfigError(["segment file has no rate_hz header and the models record no sample rate"])
        fspec = config.filter_spec(rate)
    elif rate is not None and rate != fspec.sample_rate_hz:
        raise InvalidDatasetError(
            f"Segment is sampled at {rate:g} Hz but the models were enrolled at {fspec.sample_rate_hz:g} Hz"
        )

    result = identify(registry, samples, fspec, executor=executor)
    if config.format == "csv":
        frame = pd.DataFrame(
            [(pid, format_real(score)) for pid, score in result.scores], columns=["participant", "nrc"]
        )
        sys.stdout.write(frame.to_csv(index=False, lineterminator="\n"))
    else:
        print(f"predicted: {result.predicted}")
        for rank, (pid, score) in enumerate(result.scores, start=1):
            print(f"{rank:>3}  {pid}  {score:.6f}")
    return EXIT_OK


def _protocol(config: RunConfig, rate_hz: float) -> EvalProtocol:
    return EvalProtocol(
        train_sessions=tuple(config.train_sessions),
        test_session=config.test_session,
        params=config.model_params(),
        filter=config.filter_spec(rate_hz),
        qspec=config.quantizer_spec(),
        segment_seconds=config.segment_seconds,
    )


@handle_errors
def cmd_evaluate(config: RunConfig, executor=None) -> int:
    config.require("dataset", "train_sessions", "test_session", "out")
    manifest = discover_dataset(config.dataset)
    report = evaluate(load_dataset(manifest), _protocol(config, manifest.rate_hz), executor=executor)
    write_report(report, config.out)
    if report.failed_enrollments:
        print(f"failed enrollments: {', '.join(sorted(report.failed_enrollments))}", file=sys.stderr)
    print(f"accuracy={report.accuracy:.4f} macro_f1={report.macro_f1:.4f}")
    return EXIT_OK


@handle_errors
def cmd_sweep(config: RunConfig, executor=None) -> int:
    config.require("dataset", "train_sessions", "test_session", "out")
    manifest = discover_dataset(config.dataset)
    grid = config.sweep_grid()
    rows = sweep(
        load_dataset(manifest),
        _protocol(config, manifest.rate_hz),
        grid["k"],
        grid["d"],
        executor=executor,
        checkpoint_dir=config.out,
        resume=config.resume,
    )
    write_sweep(rows, config.out)
    ok = [row for row in rows if row.ok]
    if not ok:
        print("error: every sweep cell failed", file=sys.stderr)
        return EXIT_DATASET
    best = max(ok, key=lambda row: (row.accuracy, -row.k, -row.d))
    print(
        f"cells={len(rows)} failed={len(rows) - len(ok)} "
        f"best: k={best.k} d={best.d} accuracy={best.accuracy:.4f} macro_f1={best.macro_f1:.4f}"
    )
    return EXIT_OK


@handle_errors
def cmd_inspect(config: RunConfig, model_path: str) -> int:
    pm = read_model_file(model_path)
    p = pm.params
    counts = pm.model.counts
    levels = pm.codebook.levels
    print(f"participant:   {pm.participant_id}")
    print(f"k:             {p.k}")
    print(f"d:             {p.d}")
    print(f"L:             {p.alphabet_size}")
    print(f"alpha:         {format_alpha(p.alpha)} (resolved {p.resolved_alpha:.6g})")
    print(f"contexts:      {counts.context_count}")
    print(f"total events:  {counts.total_events}")
    print(f"codebook:      levels [{levels[0]:.6g}, {levels[-1]:.6g}]")
    if pm.filter_spec is not None:
        fs = pm.filter_spec
        gain = frequency_response(design_butterworth_lowpass(fs), [fs.cutoff_hz])[0]
        print(f"filter:        order {fs.order}, {fs.cutoff_hz:g} Hz at {fs.sample_rate_hz:g} Hz (gain at cutoff {gain:.4f})")
    if pm.provenance:
        print("sessions:      " + ", ".join(f"{s} ({n} symbols)" for s, n in pm.provenance))
    return EXIT_OK


# =============================================================================
# Entry point
# =============================================================================


def _print_version():
    """Print version."""
    try:
        from importlib.metadata import version

        v = version("nrcid")
    except Exception:
        v = __version__
    print(f"nrcid {v}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, configure logging and dispatch; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.version:
        _print_version()
        return EXIT_OK
    if not args.command:
        parser.print_help()
        return EXIT_OK

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )

    try:
        config = config_from_args(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    if config.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    set_run_config(config)
    logger.debug(f"Resolved configuration: {config.get_summary()}")

    if args.command == "synth":
        return cmd_synth(config, args.spec)
    if args.command == "inspect":
        return cmd_inspect(config, args.model)

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        if args.command == "enroll":
            return cmd_enroll(config, executor=pool)
        if args.command == "identify":
            return cmd_identify(config, args.segment, executor=pool)
        if args.command == "evaluate":
            return cmd_evaluate(config, executor=pool)
        return cmd_sweep(config, executor=pool)


def main():
    """Main CLI entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
