"""
Command implementations for the oamlab CLI.

Each cmd_* function takes parsed arguments, does the work and returns a
RunReport plus the text to print. Exceptions propagate to the entry point,
which maps them onto exit codes.
"""

from argparse import Namespace
from pathlib import Path
from typing import Any, Optional
import csv
import io
import json
import logging
import time

from pydantic import ValidationError

from src.builders.registry import create_default_registry
from src.core.config import NETLIST_EXTENSION, TRANSCRIPT_DIR
from src.core.errors import BuilderError, ConfigError, InsufficientCountsError
from src.core.utils import resolve_seed
from src.measurement.statistics import probabilities, sample
from src.models.protocol import ProtocolConfig, WalkConfig, load_config
from src.models.report import RunReport
from src.netlist.emitter import emit, save_netlist
from src.netlist.parser import load_netlist
from src.observability.transcript import TranscriptCollector
from src.optics.circuit import Circuit, detector_projectors
from src.optics.sequences import SequenceKind, SequenceSpec, parse_state_spec
from src.qkd.protocol import detect_eavesdropper, run_protocol
from src.walk.walk import QuantumWalk, pair_start, run_two_photon_walk, run_walk, variance_slope

logger = logging.getLogger(__name__)

KEY_PREVIEW = 32


def parse_seq(text: Optional[str]) -> SequenceSpec:
    """
    A sequence kind ("lucas") or a JSON SequenceSpec document.

    Raises:
        ConfigError: If the text is neither
    """
    if text is None:
        return SequenceSpec()
    text = text.strip()
    try:
        if text.startswith("{"):
            return SequenceSpec.model_validate(json.loads(text))
        return SequenceSpec(kind=SequenceKind(text.lower()))
    except (ValueError, ValidationError) as e:
        raise ConfigError(f"invalid sequence spec {text!r}: {e}") from e


def parse_param(text: str) -> tuple[str, Any]:
    """KEY=VALUE with VALUE read as JSON when possible, else kept as text."""
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key.strip().replace("-", "_"), json.loads(value)
    except json.JSONDecodeError:
        return key.strip().replace("-", "_"), value


def _input_port(circuit: Circuit, requested: Optional[str]) -> str:
    if requested is not None:
        return requested
    if len(circuit.sources) == 1:
        return circuit.sources[0]
    if "in" in circuit.sources:
        return "in"
    raise ConfigError(f"circuit has sources {list(circuit.sources)}; pick one with --source")


def _csv(header: list[str], rows: list[tuple]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


# =============================================================================
# simulate
# =============================================================================

def cmd_simulate(args: Namespace, argv: list[str]) -> tuple[RunReport, str]:
    """Detector distribution of a netlist for one input state, checked against the dense oracle."""
    started = time.perf_counter()
    circuit = load_netlist(args.netlist)
    seq = parse_seq(args.seq)
    port = _input_port(circuit, args.source)
    state = parse_state_spec(args.input, seq, path=port)

    dist = probabilities(circuit, state)
    basis = sorted({mode for mode, _ in state.items()}, key=lambda m: m.sort_key())
    projectors = detector_projectors(circuit, basis)
    deviation = max(
        (abs(projectors[name].probability(state) - dist.probability(name)) for name in circuit.detectors),
        default=0.0,
    )

    report = RunReport(
        command="simulate",
        argv=argv,
        config={"netlist": str(args.netlist), "input": args.input, "source": port, "seq": seq.model_dump(mode="json")},
        distribution=dist,
        results={"oracle_max_deviation": deviation},
    )
    if args.samples:
        seed = resolve_seed(args.seed)
        counts = sample(dist, seed, args.samples)
        report.counts = {"samples": counts}
        report.results["seed"] = seed
    report.wall_time = time.perf_counter() - started
    logger.info(f"Simulated {circuit.name or 'circuit'}: {len(dist.probabilities)} detectors, oracle deviation {deviation:.3g}")

    if args.format == "json":
        return report, report.to_json()
    rows = [(name, repr(p)) for name, p in sorted(dist.probabilities.items())] + [("loss", repr(dist.loss))]
    if args.format == "csv":
        return report, _csv(["detector", "probability"], rows)
    lines = [f"{name:>12}  {p}" for name, p in rows]
    lines.append(f"oracle max deviation: {deviation:.3g}")
    return report, "\n".join(lines) + "\n"


# =============================================================================
# build
# =============================================================================

def build_params(args: Namespace) -> dict[str, Any]:
    params: dict[str, Any] = dict(parse_param(p) for p in args.param or [])
    for key in ("values", "coeffs", "cells", "order", "parity", "stride", "anchor", "indices"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if args.seq is not None:
        params["seq"] = parse_seq(args.seq)
    return params


def cmd_build(args: Namespace, argv: list[str]) -> tuple[RunReport, str]:
    """
    Build an apparatus, verify it against the oracle and write its netlist.

    Raises:
        BuilderError: For unknown apparatus, bad parameters or a failed self-test
    """
    started = time.perf_counter()
    registry = create_default_registry()
    if args.apparatus == "list":
        described = registry.describe()
        report = RunReport(command="build", argv=argv, results={"apparatus": described})
        text = "\n".join(f"{name:>18}  {text}" for name, text in described.items()) + "\n"
        return report, report.to_json() if args.format == "json" else text

    params = build_params(args)
    result, verification = registry.build_and_verify(args.apparatus, **params)

    written: dict[str, str] = {}
    if args.out is not None:
        out = Path(args.out)
        for key, circuit in result.circuits().items():
            path = out if key == "main" else out.with_name(f"{out.stem}.{key}{NETLIST_EXTENSION}")
            written[key] = str(save_netlist(circuit, path))

    report = RunReport(
        command="build",
        argv=argv,
        config={"apparatus": args.apparatus, "params": {k: _jsonable(v) for k, v in params.items()}},
        verification=verification.to_dict(),
        results={"netlists": written, "elements": {k: len(c) for k, c in result.circuits().items()}},
    )
    report.wall_time = time.perf_counter() - started

    if not verification.passed:
        raise BuilderError(f"self-test failed: {verification.summary()}")

    if args.format == "json":
        return report, report.to_json()
    lines = [verification.summary()]
    lines.extend(
        f"  {'ok ' if c.passed else 'BAD'} {c.name}: deviation {c.deviation:.3g} (tol {c.tolerance:g})"
        for c in verification.checks
    )
    if written:
        lines.extend(f"wrote {path}" for path in written.values())
    else:
        lines.append(emit(result.circuit).rstrip("\n"))
    return report, "\n".join(lines) + "\n"


def _jsonable(value: Any) -> Any:
    if isinstance(value, SequenceSpec):
        return value.model_dump(mode="json")
    if isinstance(value, complex):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


# =============================================================================
# qkd
# =============================================================================

def load_protocol_config(args: Namespace) -> ProtocolConfig:
    overrides: dict[str, Any] = {
        "trials": args.trials,
        "m0": args.m0,
        "N": args.window,
        "alpha": args.alpha,
        "workers": args.workers,
        "symbol_error_rate": args.symbol_error_rate,
        "sifting": args.sifting,
        "basis_probability": args.basis_probability,
    }
    if args.seq is not None:
        overrides["seq"] = parse_seq(args.seq).model_dump()
    if args.eve is not None:
        overrides["eve"] = {"kind": args.eve, "probability": args.eve_probability}
    return load_config(ProtocolConfig, args.config, **overrides)


def cmd_qkd(args: Namespace, argv: list[str]) -> tuple[RunReport, str]:
    """Run the protocol, write the transcript and test for tampering."""
    config = load_protocol_config(args)
    seed = args.seed if args.seed is not None else (config.seed if config.seed is not None else resolve_seed(None))
    result = run_protocol(config, seed)

    collector = TranscriptCollector(seed=seed, config=config.model_dump(mode="json", by_alias=True))
    collector.extend(result.transcript)
    transcript_path = Path(args.transcript) if args.transcript else Path(TRANSCRIPT_DIR) / f"qkd-seed{seed}.jsonl"
    collector.save(transcript_path)

    verdict: Optional[dict[str, Any]] = None
    note = ""
    if config.trials == 0:
        note = "no trials"
    else:
        try:
            tamper = detect_eavesdropper(result.counts, result.expected, config.alpha, config.family_correction)
            verdict = tamper.model_dump(mode="json")
        except InsufficientCountsError as e:
            note = str(e)

    summary = result.summary()
    report = RunReport(
        command="qkd",
        argv=argv,
        config={**config.model_dump(mode="json", by_alias=True), "seed": seed},
        counts=result.counts,
        results={
            **summary,
            "transcript": str(transcript_path),
            "verdict": verdict["verdict"] if verdict else None,
            "tamper_test": verdict,
            "note": note,
            "alice_key_preview": result.alice_key[:KEY_PREVIEW],
            "bob_key_preview": result.bob_key[:KEY_PREVIEW],
            "alice_bits": result.key_bits("alice"),
            "bob_bits": result.key_bits("bob"),
        },
        wall_time=result.wall_time,
    )
    if args.format == "json":
        return report, report.to_json()

    agreement = summary["key_agreement"]
    lines = [
        f"trials: {summary['trials']}  sifted: {summary['sifted']}  sift rate: {summary['sift_rate']:.4f}",
        f"key agreement: {'n/a' if agreement is None else f'{agreement:.2%}'}",
        f"filter retention: {summary['filter_retention_fraction']} ({summary['filter_retention']:.4f})",
        f"verdict: {verdict['verdict'] if verdict else 'none'}" + (f" ({note})" if note else ""),
        f"transcript: {transcript_path}",
    ]
    if verdict:
        lines.extend(
            f"  {t['table']}: chi2 {t['statistic']:.2f} dof {t['dof']} p {t['p_value']:.3g}" for t in verdict["tests"]
        )
    return report, "\n".join(lines) + "\n"


# =============================================================================
# walk
# =============================================================================

def load_walk_config(args: Namespace) -> WalkConfig:
    return load_config(
        WalkConfig,
        args.config,
        steps=args.steps,
        sites=args.sites,
        parity=args.parity,
        start_site=args.start_site,
        start_coin=args.start_coin,
        coherent=args.coherent,
        two_photon=args.two_photon or None,
        trajectories=args.trajectories,
    )


def cmd_walk(args: Namespace, argv: list[str]) -> tuple[RunReport, str]:
    """Per-step position distributions of the walk."""
    started = time.perf_counter()
    config = load_walk_config(args)
    seed = args.seed if args.seed is not None else (config.seed if config.seed is not None else resolve_seed(None))

    results: dict[str, Any]
    if config.two_photon:
        walk = QuantumWalk.for_both_chains(config.site_count)
        start_index = walk.chains[0][config.start].index
        joint = run_two_photon_walk(walk, pair_start(walk, start_index, config.start_coin), config.steps)
        header = ["step", "index_a", "index_b", "probability"]
        rows: list[tuple] = joint.csv_rows()
        results = {"two_photon": True, "start_index": start_index, "rows": len(rows)}
    else:
        walk = QuantumWalk.for_chain(config.site_count, config.parity)
        start = walk.start_state(config.start, config.start_coin)
        result = run_walk(walk, start, config.steps, not config.coherent, config.trajectories, seed)
        classical = walk.markov(start, config.steps)
        classical_variance = classical @ walk.positions**2 - (classical @ walk.positions) ** 2
        variance = result.variance()
        header = ["step", "position", "probability"]
        rows = result.csv_rows()
        results = {
            "coherent": config.coherent,
            "variance": variance.tolist(),
            "classical_variance": classical_variance.tolist(),
            "variance_slope": variance_slope(variance) if config.steps else 0.0,
            "classical_slope": variance_slope(classical_variance) if config.steps else 0.0,
        }
        if not config.coherent:
            results["seed"] = seed

    report = RunReport(command="walk", argv=argv, config=config.model_dump(mode="json"), results=results)
    report.wall_time = time.perf_counter() - started
    if args.format == "json":
        return report, report.to_json()
    return report, _csv(header, rows)
