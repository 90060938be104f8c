"""
Pipeline Orchestrator
Main coordination logic that ties the engine modules together, one pipeline
per CLI subcommand.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from config import config
from engine.calculus import AlgebraReport, VForm, d_squared_check
from engine.cohomology import SectorComplex, build_sector, certify_exact
from engine.forms import NumWForm, Weight, WForm
from engine.metrics import (
    PAPER_LITERAL,
    BalancedReport,
    HarmonicReport,
    HermMetric,
    balanced_check,
    harmonic_check,
    omega_from_metric,
)
from engine.numeric import FDReport, build_fd_report, inner_form_at
from engine.obstruction import (
    NOT_OBSTRUCTED,
    OBSTRUCTED,
    DeformationCurve,
    MetricCurve,
    ObstructionReport,
    Verdict,
    convention_difference,
    obstruction_report,
    symbolic_verdict,
    theorem_residual,
    verdict_sweep,
)
from models.dsl import ModelFile
from utils.errors import StructuralError

logger = logging.getLogger(__name__)

HOLDS = "holds"
FAILS = "fails"
OK = "ok"


@dataclass
class Certificate:
    """∂̄(potential) = exact part in one weight sector."""
    sector: str
    exact_part: WForm
    potential: WForm
    verified: bool


@dataclass
class Representative:
    """Harmonicity of a surviving weight-0 monomial at a metric sample."""
    label: str
    report: HarmonicReport


@dataclass
class PipelineResult:
    """What one subcommand produced; ``data`` depends on the command."""
    command: str
    model: str
    status: str
    data: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)


class PipelineOrchestrator:
    """Runs the engine pipelines over one parsed model."""

    def __init__(self, model: ModelFile, convention: Optional[str] = None):
        self.model = model
        self.algebra = model.algebra
        self.convention = convention
        logger.info(f"Pipeline orchestrator initialized for model {model.name}")

    # selection ----------------------------------------------------------

    def metric(self, name: Optional[str] = None) -> HermMetric:
        metric = self.model.metric(name)
        return metric.with_convention(self.convention) if self.convention else metric

    def metric_curve(self, name: Optional[str] = None, metric_name: Optional[str] = None) -> MetricCurve:
        if name is None and not self.model.metric_curves:
            mc = MetricCurve.constant(self.model.metric(metric_name))
        else:
            mc = self.model.metric_curve(name)
        if self.convention:
            mc = MetricCurve(mc.name, mc.metric.with_convention(self.convention), mc.t_var)
        return mc

    def curve(self, name: Optional[str] = None) -> DeformationCurve:
        return self.model.curve(name)

    # pipelines ----------------------------------------------------------

    async def check_algebra(self, progress_callback: Optional[Callable] = None) -> PipelineResult:
        await self._progress(progress_callback, "🔍 Checking d^2 = 0 on every generator...")
        report: AlgebraReport = await asyncio.to_thread(d_squared_check, self.algebra)
        return PipelineResult(
            command="check-algebra",
            model=self.model.name,
            status=HOLDS if report.passed else FAILS,
            data={
                "report": report,
                "structure": [(k, self.algebra.d_eta(k)) for k in range(1, self.algebra.n + 1)],
                "characters": [ch.name for ch in self.algebra.characters],
                "sectors": [self.algebra.weight_text(w) for w in self.model.sectors],
                "assumptions": [(a.kind, a.text) for a in self.model.assumptions],
            },
        )

    async def check_balanced(self, metric_name: Optional[str] = None, progress_callback: Optional[Callable] = None) -> PipelineResult:
        metric = self.metric(metric_name)
        await self._progress(progress_callback, f"⚖️ Testing whether {metric.name} is balanced ({metric.convention})...")
        omega = omega_from_metric(self.algebra, metric)
        report: BalancedReport = await asyncio.to_thread(balanced_check, self.algebra, omega)
        notes = []
        if report.realness_defect:
            notes.append("the fundamental form is not real under this convention")
        return PipelineResult(
            command="check-balanced",
            model=self.model.name,
            status=HOLDS if report.balanced else FAILS,
            data={"metric": metric.name, "convention": metric.convention, "omega": omega, "report": report},
            notes=notes,
        )

    async def mc_residual(self, curve_name: Optional[str] = None, progress_callback: Optional[Callable] = None) -> PipelineResult:
        curve = self.curve(curve_name)
        await self._progress(progress_callback, f"🧮 Maurer-Cartan residual of {curve.name}...")
        residual: VForm = curve.mc_residual
        return PipelineResult(
            command="mc-residual",
            model=self.model.name,
            status=HOLDS if residual.is_zero() else FAILS,
            data={"curve": curve.name, "phi": curve.phi, "residual": residual},
        )

    async def obstruction(
        self,
        curve_name: Optional[str] = None,
        metric_curve_name: Optional[str] = None,
        metric_name: Optional[str] = None,
        sample: Optional[Mapping[str, complex]] = None,
        progress_callback: Optional[Callable] = None,
    ) -> PipelineResult:
        """
        Θ, the theorem residual, the class reduction with exactness
        certificates, and harmonicity of the surviving weight-0 monomials at
        the metric sample when one is given.
        """
        logger.info("=" * 60)
        logger.info(f"Obstruction run on {self.model.name}")
        logger.info("=" * 60)
        curve = self.curve(curve_name)
        mcurve = self.metric_curve(metric_curve_name, metric_name)

        await self._progress(progress_callback, "🔬 Computing the obstruction form and class reduction...")
        report: ObstructionReport = await asyncio.to_thread(obstruction_report, self.algebra, mcurve, curve)
        residual = report.class_residual
        await self._progress(progress_callback, f"✅ {len(residual.conditions)} condition(s) survive")

        certificates = []
        for red in residual.sectors:
            if red.exact_part:
                certificates.append(Certificate(
                    sector=self.algebra.weight_text(red.weight),
                    exact_part=red.exact_part,
                    potential=red.potential,
                    verified=certify_exact(red.exact_part, red.potential),
                ))

        representatives = []
        if sample is not None:
            await self._progress(progress_callback, "📐 Checking harmonic representatives at the metric sample...")
            matrix = mcurve.at_zero().numeric(sample)
            zero = self.algebra.zero_weight
            for red in residual.sectors:
                if red.weight != zero:
                    continue
                for h, a in red.complement:
                    mono = self.algebra.mono(h, a)
                    representatives.append(Representative(label=str(mono), report=harmonic_check(mono, matrix)))

        data: Dict[str, Any] = {
            "report": report,
            "certificates": certificates,
            "representatives": representatives,
            "symbolic_verdict": symbolic_verdict(residual),
        }
        notes = list(report.caveats)
        if report.convention == PAPER_LITERAL:
            data["convention_difference"] = convention_difference(self.algebra, mcurve.at_zero(), curve.derivative)
            notes.append("paper-literal fundamental form; the difference to hermitian-standard is listed")
        if curve.mc_ok is False:
            notes.append(f"curve {curve.name} does not satisfy the Maurer-Cartan equation")
        return PipelineResult(command="obstruction", model=self.model.name, status=OK, data=data, notes=notes)

    async def conditions(
        self,
        curve_name: Optional[str] = None,
        metric_name: Optional[str] = None,
        progress_callback: Optional[Callable] = None,
    ) -> PipelineResult:
        curve = self.curve(curve_name)
        mcurve = self.metric_curve(None, metric_name)
        await self._progress(progress_callback, "🔬 Extracting obstruction conditions...")
        report = await asyncio.to_thread(obstruction_report, self.algebra, mcurve, curve)
        label = symbolic_verdict(report.class_residual)
        return PipelineResult(
            command="conditions",
            model=self.model.name,
            status=label,
            data={"class_residual": report.class_residual, "verdict": label},
        )

    async def verdict(
        self,
        direction: Mapping[str, complex],
        samples: Sequence[Mapping[str, complex]],
        curve_name: Optional[str] = None,
        metric_name: Optional[str] = None,
        progress_callback: Optional[Callable] = None,
    ) -> PipelineResult:
        curve = self.curve(curve_name)
        mcurve = self.metric_curve(None, metric_name)
        await self._progress(progress_callback, "🔬 Extracting obstruction conditions...")
        report = await asyncio.to_thread(obstruction_report, self.algebra, mcurve, curve)
        await self._progress(progress_callback, f"⚖️ Evaluating at {len(samples)} metric sample(s)...")
        verdicts: List[Verdict] = verdict_sweep(report.class_residual, [direction], list(samples), mcurve.at_zero())
        label = OBSTRUCTED if any(v.obstructed for v in verdicts) else NOT_OBSTRUCTED
        return PipelineResult(
            command="verdict",
            model=self.model.name,
            status=label,
            data={"class_residual": report.class_residual, "verdicts": verdicts, "verdict": label},
            notes=[report.caveats[0]],
        )

    async def verify_theorem(
        self,
        assign: Mapping[str, complex],
        steps: Optional[Sequence[float]] = None,
        curve_name: Optional[str] = None,
        metric_curve_name: Optional[str] = None,
        metric_name: Optional[str] = None,
        progress_callback: Optional[Callable] = None,
    ) -> PipelineResult:
        """Finite-difference check of R with the ±h samples evaluated concurrently."""
        curve = self.curve(curve_name)
        mcurve = self.metric_curve(metric_curve_name, metric_name)
        steps = list(steps or config.numeric.fd_steps)
        if any(h <= 0 for h in steps):
            raise StructuralError("finite-difference steps must be positive")

        await self._progress(progress_callback, "🧮 Evaluating the theorem residual...")
        prediction = NumWForm.from_exact(theorem_residual(self.algebra, mcurve, curve), assign)

        await self._progress(progress_callback, f"📈 Sampling delbar_t at {2 * len(steps)} parameter values...")
        points = [s for h in steps for s in (h, -h)]
        forms = await asyncio.gather(*[
            asyncio.to_thread(inner_form_at, self.algebra, mcurve, curve, assign, s) for s in points
        ])
        report: FDReport = build_fd_report(steps, dict(zip(points, forms)), prediction)
        await self._progress(progress_callback, f"{'✅' if report.passed else '❌'} FD order {report.order}")
        return PipelineResult(
            command="verify-theorem",
            model=self.model.name,
            status=HOLDS if report.passed else FAILS,
            data={"curve": curve.name, "metric_curve": mcurve.name, "report": report},
            notes=list(report.notes),
        )

    async def cohomology(
        self,
        bidegree: Tuple[int, int] = (0, 1),
        weights: Optional[Sequence[Weight]] = None,
        progress_callback: Optional[Callable] = None,
    ) -> PipelineResult:
        """Sector dimensions of H^{p,q} of the invariant complex, summed over the declared sectors."""
        p, q = bidegree
        n = self.algebra.n
        if not (0 <= p <= n and 0 <= q <= n):
            raise StructuralError(f"bidegree ({p},{q}) out of range for dimension {n}")
        weights = list(weights or self.model.sectors)
        await self._progress(progress_callback, f"🧮 Building {len(weights)} sector complex(es) at ({p},{q})...")
        if config.engine.parallel_sectors:
            sectors: List[SectorComplex] = list(await asyncio.gather(*[
                asyncio.to_thread(build_sector, self.algebra, w, p, q) for w in weights
            ]))
        else:
            sectors = [build_sector(self.algebra, w, p, q) for w in weights]
        total = sum(s.cohomology_dimension for s in sectors)
        logger.info(f"H^({p},{q}) of the invariant complex: {total}")
        return PipelineResult(
            command="cohomology",
            model=self.model.name,
            status=OK,
            data={"bidegree": (p, q), "sectors": sectors, "total": total},
        )

    async def _progress(self, callback: Optional[Callable], message: str):
        """Send progress update via callback."""
        logger.info(f"Progress: {message}")
        if callback:
            try:
                await callback(message)
            except Exception as e:
                logger.warning(f"Progress callback failed: {str(e)}")
