"""Run configurations and the deterministic report document."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Optional

from .analysis import (
    CATALOGS,
    T_DEFORMED,
    ConditionReport,
    PrintedCatalog,
    classical_form_conditions,
    compare_catalog,
    t_deformation_report,
    verify_qlc_family,
)
from .classical import COORDS, ClassicalData, GeometryError, d
from .expr import Expr, free_symbols, render, substitute
from .oracle import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL, DomainExhausted, OracleConfig, ZeroVerdict, is_zero
from .parser import ParseError, parse
from .quantum import QuantumData
from .tensors import BASIS_NAMES, Graded, Tensor

SCHEMA = "semiquant-report/1"
STAGES = ("classical", "quantum", "conditions", "qlc-family", "t-deform")
DEFAULT_STAGES = ("classical", "quantum")
FORMATS = ("text", "json")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_DISCREPANCY = 2


class InputError(ValueError):
    """Bad metric text, parameters or stage selection."""


@dataclass(frozen=True)
class RunConfig:
    E: Optional[str] = None
    G: Optional[str] = None
    params: tuple[tuple[str, Optional[Fraction]], ...] = ()
    stages: tuple[str, ...] = DEFAULT_STAGES
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    tol: float = DEFAULT_TOL
    omega_scale: str = "1"
    intervals: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        unknown = [s for s in self.stages if s not in STAGES]
        if unknown:
            raise InputError(f"unknown stage(s) {', '.join(unknown)}; choose from {', '.join(STAGES)}")
        if not self.stages:
            raise InputError("at least one stage is required")
        if self.samples < 1:
            raise InputError("samples must be positive")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise InputError("seed must fit in an unsigned 64-bit integer")

    @property
    def oracle(self) -> OracleConfig:
        return OracleConfig(
            samples=self.samples,
            seed=self.seed,
            tol=self.tol,
            intervals={k: tuple(v) for k, v in self.intervals.items()},
        )

    def echo(self) -> dict:
        return {
            "metric_E": self.E,
            "metric_G": self.G,
            "params": [{"name": n, "value": None if v is None else str(v)} for n, v in self.params],
            "stages": list(self.stages),
            "seed": self.seed,
            "samples": self.samples,
            "tol": self.tol,
            "omega_scale": self.omega_scale,
        }


def parse_param(text: str) -> tuple[str, Optional[Fraction]]:
    """``name`` or ``name=value`` with a rational or decimal value."""
    name, sep, value = text.partition("=")
    name = name.strip()
    if not name.isidentifier():
        raise InputError(f"bad parameter name {name!r}")
    if name in COORDS:
        raise InputError(f"{name!r} is a coordinate, not a parameter")
    if not sep:
        return name, None
    try:
        return name, Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad value for parameter {name!r}: {value!r}") from exc


@dataclass(frozen=True)
class Report:
    data: dict
    exit_code: int

    def to_json(self) -> str:
        return dumps(self.data)


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False)


# -- rendering helpers -------------------------------------------------------

def _key(idx: tuple[int, ...], names=BASIS_NAMES, sep="*") -> str:
    return sep.join(names[i] for i in idx)


def _tensor(t: Tensor, names=BASIS_NAMES, sep="*") -> dict[str, str]:
    return {_key(idx, names, sep): render(v) for idx, v in t.items()}


def _graded(g: Graded) -> dict:
    return {"order0": _tensor(g.order0), "order1": _tensor(g.order1)}


def _verdict(v: ZeroVerdict) -> dict:
    return v.as_dict()


# -- stages ------------------------------------------------------------------

def _classical_block(cd: ClassicalData) -> dict:
    return {
        "christoffel": _tensor(cd.gamma, COORDS, ","),
        "riemann": _tensor(cd.riemann, COORDS, ","),
        "scalar_curvature": render(cd.scalar),
        "omega12": render(cd.omega.omega12),
    }


def _quantum_block(qd: QuantumData) -> dict:
    cls = qd.classification
    return {
        "g_Q": _graded(qd.gQ),
        "g1": _graded(qd.g1),
        "nabla_Q_dx": _graded(qd.nabla_dx),
        "nabla_Q_dy": _graded(qd.nabla_dy),
        "wedge_table": {
            f"{BASIS_NAMES[i]}^{BASIS_NAMES[j]}": {
                "order0": render(w.order0.coeff),
                "order1": render(w.order1.coeff),
            }
            for (i, j), w in sorted(qd.wedges.items())
        },
        "ricci_form": render(qd.ricci.coeff),
        "nabla_ricci": {
            "components": _tensor(qd.nabla_ricci),
            "verdicts": {BASIS_NAMES[h]: _verdict(v) for h, v in enumerate(cls.nabla_ricci)},
        },
        "torsion": {
            BASIS_NAMES[i]: {
                "order0": render(t.order0.coeff),
                "order1": render(t.order1.coeff),
                "verdicts": [_verdict(v) for v in cls.torsion[2 * i: 2 * i + 2]],
            }
            for i, t in enumerate(qd.torsion)
        },
        "cotorsion": {"value": render(qd.cotorsion.order1), "verdict": _verdict(cls.cotorsion)},
        "classification": cls.kind.value,
    }


def _conditions_block(rep: ConditionReport) -> dict:
    cases = {}
    for c in rep.cases:
        entry = {"coefficient": render(c.coefficient), "verdict": _verdict(c.verdict)}
        if c.printed_factor is not None:
            entry["printed_factor"] = render(c.printed_factor)
            entry["prefactor"] = render(c.prefactor)
            entry["proportionality"] = _verdict(c.proportionality)
        cases[c.name] = entry
    return {"family": rep.family, "cases": cases}


def _qlc_family_block(E: Expr, G: Expr, cfg: OracleConfig) -> dict:
    ratio = G / E
    if not is_zero(d(ratio, 1), cfg).is_zero:
        return {"applicable": False, "reason": "G is not a constant multiple of E"}
    v = verify_qlc_family(E, None, cfg, A=ratio)
    return {
        "applicable": True,
        "A": render(ratio),
        "residual": render(v.residual),
        "verdict": _verdict(v.verdict),
        "classification": v.classification.value,
        "intervals": v.intervals,
    }


def _matching_catalog(E: Expr, G: Expr) -> Optional[PrintedCatalog]:
    if (free_symbols(E) | free_symbols(G)) - {"y", "c", "t"}:
        return None
    for catalog in CATALOGS:
        if catalog.matches(E, G):
            return catalog
    return None


def _parse_metric(text: Optional[str], label: str, declared: tuple[str, ...], pins: dict) -> Expr:
    if text is None or not text.strip():
        raise InputError(f"missing metric component {label}")
    try:
        e = parse(text, strict=True, declared=declared)
    except ParseError as exc:
        raise InputError(f"metric {label}: {exc}") from exc
    return substitute(e, pins) if pins else e


def run(config: RunConfig) -> Report:
    """Run the requested stages; raises :class:`InputError` on bad input."""
    cfg = config.oracle
    declared = tuple(n for n, _ in config.params)
    pins = {n: v for n, v in config.params if v is not None}
    stages = set(config.stages)

    E_text, G_text = config.E, config.G
    if stages == {"t-deform"} and E_text is None and G_text is None:
        E_text, G_text = T_DEFORMED.E, T_DEFORMED.G
    E = _parse_metric(E_text, "E", declared, pins)
    G = _parse_metric(G_text, "G", declared, pins)
    try:
        scale = substitute(parse(config.omega_scale, strict=True, declared=declared), pins)
    except ParseError as exc:
        raise InputError(f"omega scale: {exc}") from exc
    if free_symbols(scale) & set(COORDS):
        raise InputError("omega scale must be constant")

    try:
        cd = ClassicalData.compute(E, G, scale, cfg)
        if not cd.metric.check_positive(cfg):
            raise InputError("metric components must be positive on the sampling box")
    except (GeometryError, DomainExhausted) as exc:
        raise InputError(str(exc)) from exc

    catalog = _matching_catalog(E, G)
    data: dict = {
        "schema": SCHEMA,
        "input": {**config.echo(), "catalog": catalog.name if catalog else None},
        "classical": None,
        "quantum": None,
        "conditions": None,
        "discrepancies": [],
    }
    if "classical" in stages:
        data["classical"] = _classical_block(cd)
    if stages & {"quantum", "t-deform"} or catalog is not None:
        qd = QuantumData.compute(cd, cfg)
    if "quantum" in stages:
        data["quantum"] = _quantum_block(qd)

    conditions: dict = {}
    if "conditions" in stages:
        conditions["classical_form"] = _conditions_block(classical_form_conditions(E, G, cfg))
    if "qlc-family" in stages:
        conditions["qlc_family"] = _qlc_family_block(E, G, cfg)
    found = []
    if "t-deform" in stages:
        if catalog is not T_DEFORMED:
            raise InputError(f"the t-deform stage needs E={T_DEFORMED.E}, G={T_DEFORMED.G}")
        tr = t_deformation_report(cfg)
        conditions["t_deformation"] = {
            "checks": list(tr.checks),
            "classification": tr.classification.value,
            "limits": list(tr.limits),
        }
        found.extend(tr.discrepancies)
    if conditions:
        data["conditions"] = conditions

    if catalog is not None and not (catalog is T_DEFORMED and "t-deform" in stages):
        prefixes = tuple(p + "." for p in ("classical", "quantum") if p in stages)
        if prefixes:
            ccd = ClassicalData.compute(E, G, parse(catalog.omega_scale), cfg)
            _, mismatches = compare_catalog(catalog, ccd, QuantumData.compute(ccd, cfg), cfg)
            found.extend(m for m in mismatches if m.quantity.startswith(prefixes))
    data["discrepancies"] = [m.as_dict() for m in found]
    return Report(data, EXIT_DISCREPANCY if found else EXIT_OK)


def config_from_mapping(raw: dict, base: Optional[RunConfig] = None) -> RunConfig:
    """Build a RunConfig from a batch entry; keys mirror the long flag names."""
    if not isinstance(raw, dict):
        raise InputError("batch entries must be JSON objects")
    allowed = {"metric_E", "metric_G", "params", "stages", "seed", "samples", "tol", "omega_scale"}
    extra = set(raw) - allowed
    if extra:
        raise InputError(f"unknown batch key(s): {', '.join(sorted(extra))}")
    base = base or RunConfig()
    stages = raw.get("stages", list(base.stages))
    if isinstance(stages, str):
        stages = [s.strip() for s in stages.split(",") if s.strip()]
    try:
        return replace(
            base,
            E=raw.get("metric_E", base.E),
            G=raw.get("metric_G", base.G),
            params=tuple(parse_param(p) for p in raw.get("params", [])) or base.params,
            stages=tuple(stages),
            seed=int(raw.get("seed", base.seed)),
            samples=int(raw.get("samples", base.samples)),
            tol=float(raw.get("tol", base.tol)),
            omega_scale=str(raw.get("omega_scale", base.omega_scale)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad batch entry: {exc}") from exc


def render_text(data: Any, prefix: str = "") -> list[str]:
    """Flatten a report into sorted ``path = value`` lines."""
    if isinstance(data, dict):
        lines = []
        for k in sorted(data):
            lines.extend(render_text(data[k], f"{prefix}.{k}" if prefix else str(k)))
        return lines or [f"{prefix} = {{}}"]
    if isinstance(data, list):
        if not data:
            return [f"{prefix} = []"]
        lines = []
        for i, v in enumerate(data):
            lines.extend(render_text(v, f"{prefix}[{i}]"))
        return lines
    if data is None:
        return [f"{prefix} = -"]
    return [f"{prefix} = {data}"]


__all__ = [
    "DEFAULT_STAGES",
    "EXIT_DISCREPANCY",
    "EXIT_INPUT_ERROR",
    "EXIT_OK",
    "FORMATS",
    "InputError",
    "Report",
    "RunConfig",
    "SCHEMA",
    "STAGES",
    "config_from_mapping",
    "dumps",
    "parse_param",
    "render_text",
    "run",
]
