"""
Command-line interface.

    balobs <command> (--registry NAME | --model PATH) [options]

Exit codes: 0 on success, "holds" or "no-first-order-obstruction"; 2 on
"obstructed" or "fails"; 1 on usage or input errors.
"""

import argparse
import asyncio
import logging
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, PrivateAttr, ValidationError, model_validator

from engine.metrics import CONVENTIONS, HermMetric, identity_assignment
from engine.obstruction import OBSTRUCTED, T_VAR
from models.dsl import ModelFile, parse_file
from models.registry import registry
from orchestrator import FAILS, PipelineOrchestrator, PipelineResult
from reports.serialize import serialize
from utils.errors import AssignmentError, BalobsError
from utils.logger import setup_logging

logger = logging.getLogger(__name__)

VERSION = "1.0.0"

COMMANDS = (
    "check-algebra",
    "check-balanced",
    "mc-residual",
    "obstruction",
    "conditions",
    "verdict",
    "verify-theorem",
    "cohomology",
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

_BARE_IMAG = re.compile(r"(?<![\d.])j")


def parse_value(text: str) -> complex:
    """
    Parse a number such as ``2``, ``-0.5``, ``1+2i``, ``3j`` or ``-i``.

    Raises:
        AssignmentError: not a number
    """
    raw = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(_BARE_IMAG.sub("1j", raw))
    except ValueError:
        raise AssignmentError(f"cannot read {text!r} as a number")


def parse_assignments(text: Optional[str]) -> Dict[str, complex]:
    """``k=v,k=v`` to a dict; later keys win."""
    out: Dict[str, complex] = {}
    if not text:
        return out
    for part in text.split(","):
        if not part.strip():
            continue
        name, sep, value = part.partition("=")
        if not sep or not name.strip():
            raise AssignmentError(f"expected name=value, got {part.strip()!r}")
        out[name.strip()] = parse_value(value)
    return out


def parse_steps(text: Optional[str]) -> Optional[List[float]]:
    if not text:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise AssignmentError(f"cannot read finite-difference steps {text!r}")


def parse_bidegree(text: str) -> Tuple[int, int]:
    parts = text.split(",")
    try:
        p, q = (int(x) for x in parts)
    except ValueError:
        raise AssignmentError(f"expected a bidegree p,q, got {text!r}")
    return p, q


def _coerce(value: Any) -> complex:
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, str):
        return parse_value(value)
    raise AssignmentError(f"cannot read {value!r} as a number")


def load_samples(path: str) -> List[Dict[str, complex]]:
    """
    Metric samples from a YAML file: one mapping, a list of mappings, or a
    mapping with a ``samples`` list.

    Raises:
        BalobsError: unreadable file or unexpected shape
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise BalobsError(f"cannot read metric samples from {path}: {e.strerror}")
    except yaml.YAMLError as e:
        raise BalobsError(f"{path}: invalid YAML: {e}")
    if isinstance(data, dict) and "samples" in data:
        data = data["samples"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not data or not all(isinstance(s, dict) for s in data):
        raise BalobsError(f"{path}: expected a mapping or a list of mappings of variable values")
    return [{str(k): _coerce(v) for k, v in sample.items()} for sample in data]


class RunConfig(BaseModel):
    """One validated CLI invocation."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    registry: Optional[str] = None
    model_path: Optional[str] = None
    convention: Optional[str] = None
    assign: Dict[str, Any] = {}
    metric_sample: Optional[str] = None
    fd_steps: Optional[List[float]] = None
    format: str = "text"
    curve: Optional[str] = None
    metric: Optional[str] = None
    metric_curve: Optional[str] = None
    bidegree: Tuple[int, int] = (0, 1)

    _model: Optional[ModelFile] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if (self.registry is None) == (self.model_path is None):
            raise ValueError("give exactly one of --registry and --model")
        if self.convention is not None and self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}; expected one of {', '.join(CONVENTIONS)}")
        if self.format not in ("text", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.fd_steps is not None and (not self.fd_steps or any(h <= 0 for h in self.fd_steps)):
            raise ValueError("finite-difference steps must be positive")
        self._model = registry(self.registry) if self.registry else parse_file(Path(self.model_path))
        # unknown names, complex values for real variables, inconsistent pairs
        self._model.var_table.complete_assignment(self.assign)
        return self

    @property
    def model(self) -> ModelFile:
        return self._model

    def samples(self, metric: HermMetric, fixed: Optional[Dict[str, complex]] = None) -> List[Dict[str, complex]]:
        """Metric samples named by --metric-sample; empty when none was given."""
        if self.metric_sample is None:
            return []
        if self.metric_sample == "identity":
            return [identity_assignment(metric, fixed)]
        samples = load_samples(self.metric_sample)
        for sample in samples:
            self.model.var_table.complete_assignment(sample)
        return samples


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--registry", metavar="NAME", help="built-in model (iwasawa, nakamura-i, nakamura-ii)")
    source.add_argument("--model", metavar="PATH", help="model file in the .balg language")
    common.add_argument("--convention", choices=CONVENTIONS, help="fundamental-form convention")
    common.add_argument("--assign", metavar="K=V,...", help="numeric values, e.g. a1=0,a2=1,alpha12=1+2i")
    common.add_argument("--metric-sample", metavar="identity|PATH", help="identity metric or a YAML file of samples")
    common.add_argument("--fd-steps", metavar="H1,H2,...", help="finite-difference steps")
    common.add_argument("--format", choices=("text", "json"), default="text", help="report format")
    common.add_argument("--curve", metavar="NAME", help="deformation curve (default: first declared)")
    common.add_argument("--metric", metavar="NAME", help="metric (default: first declared)")
    common.add_argument("--metric-curve", metavar="NAME", help="metric curve (default: constant curve)")
    common.add_argument("--bidegree", metavar="P,Q", default="0,1", help="bidegree for cohomology")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="balobs",
        description="First-order obstruction to balanced metrics along deformations of complex structure",
    )
    parser.add_argument("--version", action="version", version=f"balobs {VERSION}")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)
    helps = {
        "check-algebra": "check d^2 = 0 on the declared structure equations",
        "check-balanced": "test whether a metric is balanced",
        "mc-residual": "Maurer-Cartan residual of a deformation curve",
        "obstruction": "obstruction form, theorem residual and class reduction",
        "conditions": "polynomial conditions for a first-order obstruction",
        "verdict": "evaluate the conditions at a direction and metric samples",
        "verify-theorem": "finite-difference check of the theorem residual",
        "cohomology": "invariant Dolbeault cohomology dimensions",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        registry=args.registry,
        model_path=args.model,
        convention=args.convention,
        assign=parse_assignments(args.assign),
        metric_sample=args.metric_sample,
        fd_steps=parse_steps(args.fd_steps),
        format=args.format,
        curve=args.curve,
        metric=args.metric,
        metric_curve=args.metric_curve,
        bidegree=parse_bidegree(args.bidegree),
    )


async def run_command(run: RunConfig, progress_callback=None) -> PipelineResult:
    """Dispatch one validated invocation to the orchestrator."""
    orchestrator = PipelineOrchestrator(run.model, run.convention)
    cmd = run.command
    if cmd == "check-algebra":
        return await orchestrator.check_algebra(progress_callback)
    if cmd == "check-balanced":
        return await orchestrator.check_balanced(run.metric, progress_callback)
    if cmd == "mc-residual":
        return await orchestrator.mc_residual(run.curve, progress_callback)
    if cmd == "obstruction":
        sample = None
        samples = run.samples(orchestrator.metric_curve(run.metric_curve, run.metric).at_zero(), run.assign)
        if samples:
            sample = {**samples[0], **run.assign}
        return await orchestrator.obstruction(run.curve, run.metric_curve, run.metric, sample, progress_callback)
    if cmd == "conditions":
        return await orchestrator.conditions(run.curve, run.metric, progress_callback)
    if cmd == "verdict":
        samples = run.samples(orchestrator.metric_curve(None, run.metric).at_zero(), run.assign) or [{}]
        return await orchestrator.verdict(run.assign, samples, run.curve, run.metric, progress_callback)
    if cmd == "verify-theorem":
        mcurve = orchestrator.metric_curve(run.metric_curve, run.metric)
        samples = run.samples(mcurve.metric, {T_VAR: 0})
        if len(samples) > 1:
            logger.warning(f"verify-theorem uses the first of {len(samples)} metric samples")
        assign = {**(samples[0] if samples else {}), **run.assign}
        assign.pop(T_VAR, None)
        return await orchestrator.verify_theorem(
            assign, run.fd_steps, run.curve, run.metric_curve, run.metric, progress_callback
        )
    return await orchestrator.cohomology(run.bidegree, progress_callback=progress_callback)


def exit_code(result: PipelineResult) -> int:
    return EXIT_NEGATIVE if result.status in (OBSTRUCTED, FAILS) else EXIT_OK


async def _stderr_progress(message: str):
    print(message, file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse, run and report; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help and --version exit 0; argparse usage errors map to 1
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR

    if args.verbose:
        setup_logging("INFO")

    try:
        run = run_config_from_args(args)
        result = asyncio.run(run_command(run, _stderr_progress if args.verbose else None))
    except ValidationError as e:
        for err in e.errors():
            print(f"balobs: error: {err['msg'].removeprefix('Value error, ')}", file=sys.stderr)
        return EXIT_ERROR
    except BalobsError as e:
        print(f"balobs: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}", exc_info=True)
        print(f"balobs: internal error: {e}", file=sys.stderr)
        return EXIT_ERROR

    sys.stdout.write(serialize(result, run.format).decode("utf-8"))
    sys.stdout.flush()
    return exit_code(result)
