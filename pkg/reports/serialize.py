"""
Report rendering for the CLI: a human-readable text layout and a JSON
document. Both are deterministic for identical inputs.

JSON conventions:
  * forms, vector forms and polynomials appear as their canonical text;
  * real numbers are strings with 15 significant digits;
  * complex numbers are objects {"re": ..., "im": ...} of such strings;
  * keys are sorted.
"""

import json
from typing import Any, Callable, Dict, List, Optional

from engine.cohomology import ClassResidual
from engine.forms import form_text
from orchestrator import PipelineResult

BANNER = "=" * 60


def number(x: float) -> str:
    return f"{x:.15g}"


def optional_number(x: Optional[float]) -> Optional[str]:
    return None if x is None else number(x)


def complex_value(z: complex) -> Dict[str, str]:
    z = complex(z)
    return {"re": number(z.real), "im": number(z.imag)}


def complex_text(z: complex) -> str:
    z = complex(z)
    return f"{number(z.real)}{z.imag:+.15g}i"


def _conditions(residual: ClassResidual) -> Dict[str, List[str]]:
    return {
        "conditions": [str(c) for c in residual.conditions],
        "normalized": [str(c) for c in residual.normalized],
        "labels": list(residual.labels),
    }


# JSON -----------------------------------------------------------------------

def _json_check_algebra(data: Dict[str, Any]) -> Dict[str, Any]:
    report = data["report"]
    return {
        "passed": report.passed,
        "checked": list(report.checked),
        "violations": list(report.violations),
        "structure": {f"e{k}": form_text(f) for k, f in data["structure"]},
        "characters": data["characters"],
        "sectors": data["sectors"],
        "assumptions": [{"kind": k, "text": t} for k, t in data["assumptions"]],
    }


def _json_check_balanced(data: Dict[str, Any]) -> Dict[str, Any]:
    report = data["report"]
    return {
        "metric": data["metric"],
        "convention": data["convention"],
        "omega": form_text(data["omega"]),
        "balanced": report.balanced,
        "residual": form_text(report.residual),
        "del_residual": form_text(report.del_residual),
        "equivalent": report.equivalent,
        "realness_defect": form_text(report.realness_defect),
    }


def _json_mc_residual(data: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "curve": data["curve"],
        "phi": str(data["phi"]),
        "residual": str(data["residual"]),
        "holds": data["residual"].is_zero(),
    }


def _json_obstruction(data: Dict[str, Any]) -> Dict[str, Any]:
    report = data["report"]
    residual = report.class_residual
    out = {
        "curve": report.curve,
        "metric": report.metric,
        "convention": report.convention,
        "theta": form_text(report.theta),
        "theorem_residual": form_text(report.theorem_residual),
        "exact_part": form_text(residual.exact_part),
        "potential": form_text(residual.potential),
        "residual": form_text(residual.residual),
        "mc_ok": report.mc_ok,
        "verdict": data["symbolic_verdict"],
        "certificates": [
            {
                "sector": c.sector,
                "exact_part": form_text(c.exact_part),
                "potential": form_text(c.potential),
                "verified": c.verified,
            }
            for c in data["certificates"]
        ],
        "representatives": [
            {
                "label": r.label,
                "harmonic": r.report.harmonic,
                "delbar_max": number(r.report.delbar_max),
                "adjoint_max": number(r.report.adjoint_max),
            }
            for r in data["representatives"]
        ],
        "caveats": list(report.caveats),
    }
    out.update(_conditions(residual))
    if "convention_difference" in data:
        out["convention_difference"] = form_text(data["convention_difference"])
    return out


def _json_conditions(data: Dict[str, Any]) -> Dict[str, Any]:
    return {"conditions": [str(c) for c in data["class_residual"].normalized], "verdict": data["verdict"]}


def _json_verdict(data: Dict[str, Any]) -> Dict[str, Any]:
    out = {
        "verdict": data["verdict"],
        "samples": [
            {
                "verdict": v.verdict,
                "values": [complex_value(x) for x in v.values],
                "fired": list(v.fired),
                "tolerance": number(v.tolerance),
                "assignment": {k: complex_value(x) for k, x in sorted(v.assignment.items())},
            }
            for v in data["verdicts"]
        ],
    }
    out.update(_conditions(data["class_residual"]))
    return out


def _json_verify_theorem(data: Dict[str, Any]) -> Dict[str, Any]:
    report = data["report"]
    return {
        "curve": data["curve"],
        "metric_curve": data["metric_curve"],
        "steps": [number(h) for h in report.steps],
        "errors": [number(e) for e in report.errors],
        "orders": [optional_number(o) for o in report.orders],
        "order": optional_number(report.order),
        "order_window": [number(x) for x in report.order_window],
        "agrees": report.agrees,
        "passed": report.passed,
        "prediction": form_text(report.prediction),
        "derivatives": [form_text(f) for f in report.derivatives],
    }


def _json_cohomology(data: Dict[str, Any]) -> Dict[str, Any]:
    p, q = data["bidegree"]
    return {
        "bidegree": [p, q],
        "total": data["total"],
        "sectors": [
            {
                "weight": s.algebra.weight_text(s.weight),
                "dimension": len(s.basis),
                "kernel": s.kernel_dimension,
                "image": s.image_dimension,
                "cohomology": s.cohomology_dimension,
                "composes_to_zero": s.composes_to_zero(),
            }
            for s in data["sectors"]
        ],
    }


_JSON: Dict[str, Callable[[Dict[str, Any]], Dict[str, Any]]] = {
    "check-algebra": _json_check_algebra,
    "check-balanced": _json_check_balanced,
    "mc-residual": _json_mc_residual,
    "obstruction": _json_obstruction,
    "conditions": _json_conditions,
    "verdict": _json_verdict,
    "verify-theorem": _json_verify_theorem,
    "cohomology": _json_cohomology,
}


def to_json(result: PipelineResult) -> Dict[str, Any]:
    """
    JSON document for a result. The conditions command emits exactly
    {"conditions", "verdict"}; every other command adds command, model,
    status and notes around its own fields.
    """
    body = _JSON[result.command](result.data)
    if result.command == "conditions":
        return body
    body.update({
        "command": result.command,
        "model": result.model,
        "status": result.status,
        "notes": list(result.notes),
    })
    return body


# text -----------------------------------------------------------------------

def _text_conditions(residual: ClassResidual, lines: List[str]):
    if residual.vanishes:
        lines.append("Conditions: none")
        return
    lines.append("Conditions (each must vanish):")
    for k, (label, cond, norm) in enumerate(zip(residual.labels, residual.conditions, residual.normalized), 1):
        lines.append(f"  {k}. [{label}] {cond}")
        lines.append(f"     normalized: {norm}")


def _text_body(result: PipelineResult) -> List[str]:
    data = result.data
    lines: List[str] = []
    cmd = result.command
    if cmd == "check-algebra":
        report = data["report"]
        for k, f in data["structure"]:
            lines.append(f"d e{k} = {form_text(f)}")
        lines.append(f"Characters: {', '.join(data['characters']) or 'none'}")
        lines.append(f"Sectors: {', '.join(data['sectors'])}")
        for kind, text in data["assumptions"]:
            lines.append(f"Assumption ({kind}): {text}")
        lines.append(f"Checked: {', '.join(report.checked)}")
        if report.passed:
            lines.append("d^2 = 0 on every generator")
        for v in report.violations:
            lines.append(f"violation: {v}")
    elif cmd == "check-balanced":
        report = data["report"]
        lines.append(f"Metric: {data['metric']} ({data['convention']})")
        lines.append(f"omega = {form_text(data['omega'])}")
        lines.append(f"delbar(omega^(n-1)) = {form_text(report.residual)}")
        lines.append(f"del(omega^(n-1)) = {form_text(report.del_residual)}")
        lines.append(f"Realness defect: {form_text(report.realness_defect)}")
        lines.append("balanced" if report.balanced else "not balanced")
    elif cmd == "mc-residual":
        lines.append(f"Curve {data['curve']}: phi = {data['phi']}")
        residual = data["residual"]
        lines.append("residual 0 (identically in t)" if residual.is_zero() else f"residual {residual}")
    elif cmd == "obstruction":
        report = data["report"]
        residual = report.class_residual
        lines.append(f"Curve {report.curve}, metric {report.metric} ({report.convention})")
        lines.append(f"Theta = {form_text(report.theta)}")
        lines.append(f"R = {form_text(report.theorem_residual)}")
        lines.append(f"Exact part = {form_text(residual.exact_part)}")
        lines.append(f"Potential = {form_text(residual.potential)}")
        for c in data["certificates"]:
            lines.append(f"  certificate [{c.sector}]: delbar({form_text(c.potential)}) {'==' if c.verified else '!='} exact part")
        _text_conditions(residual, lines)
        for r in data["representatives"]:
            state = "harmonic" if r.report.harmonic else "not harmonic"
            lines.append(f"  {r.label}: {state} (delbar {number(r.report.delbar_max)}, adjoint {number(r.report.adjoint_max)})")
        if "convention_difference" in data:
            lines.append(f"paper-literal minus hermitian-standard: {form_text(data['convention_difference'])}")
        if report.mc_ok is not None:
            lines.append(f"Maurer-Cartan: {'satisfied' if report.mc_ok else 'NOT satisfied'}")
        lines.append(f"Verdict: {data['symbolic_verdict']}")
    elif cmd == "conditions":
        _text_conditions(data["class_residual"], lines)
        lines.append(f"Verdict: {data['verdict']}")
    elif cmd == "verdict":
        _text_conditions(data["class_residual"], lines)
        for k, v in enumerate(data["verdicts"], 1):
            values = ", ".join(complex_text(x) for x in v.values) or "none"
            fired = ", ".join(str(i + 1) for i in v.fired) or "none"
            lines.append(f"Sample {k}: {v.verdict} (values: {values}; nonzero: {fired})")
        lines.append(data["verdict"])
    elif cmd == "verify-theorem":
        report = data["report"]
        lines.append(f"Curve {data['curve']}, metric curve {data['metric_curve']}")
        lines.append(f"R = {form_text(report.prediction)}")
        for h, e in zip(report.steps, report.errors):
            lines.append(f"  h = {number(h)}: max error {number(e)}")
        lines.append(f"Order estimate: {optional_number(report.order) or 'n/a'} (window {number(report.order_window[0])}..{number(report.order_window[1])})")
        lines.append("holds" if report.passed else "fails")
    elif cmd == "cohomology":
        p, q = data["bidegree"]
        for s in data["sectors"]:
            lines.append(
                f"  [{s.algebra.weight_text(s.weight)}] dim {len(s.basis)}, kernel {s.kernel_dimension}, "
                f"image {s.image_dimension}, H = {s.cohomology_dimension}"
            )
        lines.append(f"dim H^({p},{q}) = {data['total']}")
    return lines


def to_text(result: PipelineResult) -> str:
    lines = [BANNER, f"{result.command}: {result.model}", BANNER]
    lines.extend(_text_body(result))
    for note in result.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def serialize(result: PipelineResult, fmt: str = "text") -> bytes:
    """Render a result as UTF-8 bytes in the requested format."""
    if fmt == "json":
        return (json.dumps(to_json(result), sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "text":
        return to_text(result).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")
