"""Metric-family analyses built on the classical and quantum engines.

* :func:`classical_form_conditions` decides which λ¹ coefficients of g_Q and
  ∇_Q dx^i vanish and names the metric family.
* :func:`verify_qlc_family` checks the curvature ODE that makes ∇_Q a quantum
  Levi-Civita connection when G = A·E.
* :func:`t_deformation_report` runs the t-deformed Poincaré metric end to end
  and compares the engine with the reference closed forms.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .classical import ClassicalData, d
from .expr import COORDINATES, Expr, Sym, as_expr, free_symbols, log, power, render, substitute
from .oracle import DomainExhausted, EvaluationError, OracleConfig, ZeroVerdict, eval_numeric, is_zero, sample_points
from .parser import parse
from .quantum import ConnectionClass, QuantumData, quantize_connection, quantize_metric_gQ
from .tensors import Graded, Tensor

Y = Sym("y")


def _e(text: str) -> Expr:
    return parse(text)


# -- classical-form conditions ----------------------------------------------

def printed_condition_factors(E: Expr, G: Expr) -> dict[str, Expr]:
    """The closed-form brackets listed for each nonvanishing case."""
    E1, G1 = d(E, 1), d(G, 1)
    E2, G2 = d(E1, 1), d(G1, 1)
    core = -G * E1 + E * G1
    return {
        "g_Q(1,2)": E1 * core / (4 * E**2 * G),
        "g_Q(2,1)": E1 * core / (4 * E * G**2),
        "nabla_Q_dx(1,1)": E1**2 * core / (8 * E**2 * G**2),
        "nabla_Q_dx(2,2)": E1**2 * core / (8 * E**3 * G),
        "nabla_Q_dy(1,2)": E1 * G1 * core / (8 * E * G**3),
        "nabla_Q_dy(2,1)": (
            G**2 * E1**3 - 2 * E**2 * E1 * G1**2 + E * G * (E1**2 * G1 - 2 * E * G1 * E2 + 2 * E * E1 * G2)
        ) / (8 * E**2 * G**3),
    }


def _case_names() -> list[tuple[str, int, int]]:
    out = []
    for label in ("g_Q", "nabla_Q_dx", "nabla_Q_dy"):
        for m in range(2):
            for n in range(2):
                out.append((label, m, n))
    return out


@dataclass(frozen=True)
class ConditionCase:
    name: str
    coefficient: Expr
    verdict: ZeroVerdict
    printed_factor: Optional[Expr] = None
    prefactor: Optional[Expr] = None
    proportionality: Optional[ZeroVerdict] = None


@dataclass(frozen=True)
class ConditionReport:
    cases: tuple[ConditionCase, ...]
    family: str

    def case(self, name: str) -> ConditionCase:
        for c in self.cases:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def all_zero(self) -> bool:
        return all(c.verdict.is_zero for c in self.cases)


FAMILIES = ("E_constant", "G_proportional_E", "G_exp_family_partial", "none")


def _require_positive(cd: ClassicalData, cfg: OracleConfig) -> None:
    if not cd.metric.check_positive(cfg):
        raise ValueError("metric components must be positive on the sampling box")


def classical_form_conditions(
    E: Expr, G: Expr, cfg: Optional[OracleConfig] = None
) -> ConditionReport:
    cfg = cfg or OracleConfig()
    cd = ClassicalData.compute(E, G, 1, cfg)
    _require_positive(cd, cfg)
    gQ = quantize_metric_gQ(cd)
    ndx, ndy = quantize_connection(cd)
    layers = {"g_Q": gQ.order1, "nabla_Q_dx": ndx.order1, "nabla_Q_dy": ndy.order1}
    factors = printed_condition_factors(cd.metric.g11, cd.metric.g22)
    w = cd.omega.omega12
    g = cd.metric.tensor

    cases = []
    for label, m, n in _case_names():
        name = f"{label}({m + 1},{n + 1})"
        coef = layers[label][m, n]
        verdict = is_zero(coef, cfg)
        factor = factors.get(name)
        if factor is None:
            cases.append(ConditionCase(name, coef, verdict))
            continue
        pre = w * g[m, m] / 2 if label == "g_Q" else -w / 2
        cases.append(ConditionCase(name, coef, verdict, factor, pre, is_zero(coef - pre * factor, cfg)))

    report = ConditionReport(tuple(cases), "none")
    return replace(report, family=_detect_family(report, cd, cfg))


def _detect_family(report: ConditionReport, cd: ClassicalData, cfg: OracleConfig) -> str:
    E, G = cd.metric.g11, cd.metric.g22
    if report.all_zero:
        if is_zero(d(E, 1), cfg).is_zero:
            return "E_constant"
        if is_zero(d(G / E, 1), cfg).is_zero:
            return "G_proportional_E"
        return "none"
    partial = report.case("nabla_Q_dy(2,1)").verdict.is_zero and all(
        not report.case(n).verdict.is_zero
        for n in ("nabla_Q_dx(1,1)", "nabla_Q_dx(2,2)", "nabla_Q_dy(1,2)")
    )
    return "G_exp_family_partial" if partial else "none"


# -- QLC families ------------------------------------------------------------

ALPHA_INTERVALS = {"pos": (0.3, 1.7), "zero": None, "neg": (-1.7, -0.3)}


def curvature_invariant(E: Expr) -> Expr:
    """∂²_y log E − ½(∂_y log E)²."""
    L1 = d(log(E), 1)
    return d(L1, 1) - L1 * L1 / 2


def printed_family(alpha_case: str) -> Expr:
    """E(y) for the three catalogued solution families (α-case)."""
    return {
        "pos": _e("c2*sec(alpha*(y+2*c1)*2^-1/2)^2"),
        "zero": _e("c2*(y+2*c1)^-2"),
        "neg": _e("c2*sech(-alpha*(y+2*c1)*2^-1/2)^2"),
    }[alpha_case]


def corrected_family(alpha_case: str) -> Expr:
    """Solution families of the ODE with the argument scaled by √|α|."""
    return {
        "pos": _e("c2*sec(alpha^1/2*(y+2*c1))^2"),
        "zero": _e("c2*(y+2*c1)^-2"),
        "neg": _e("c2*sech((-alpha)^1/2*(y+2*c1))^2"),
    }[alpha_case]


def _narrow(interval: tuple[float, float]) -> tuple[float, float]:
    lo, hi = interval
    if abs(lo) <= abs(hi):
        return lo, lo + (hi - lo) / 2
    return hi - (hi - lo) / 2, hi


def narrowed_configs(cfg: OracleConfig, names, attempts: int = 4):
    """``cfg`` followed by versions with every parameter interval halved."""
    yield cfg
    current = cfg
    params = [n for n in sorted(names) if n not in COORDINATES]
    for _ in range(attempts):
        current = current.with_intervals(**{n: _narrow(current.interval(n)) for n in params})
        yield current


@dataclass(frozen=True)
class QLCFamilyVerdict:
    E: Expr
    residual: Expr
    verdict: ZeroVerdict
    classification: ConnectionClass
    intervals: dict


def verify_qlc_family(
    E: Expr,
    alpha_case: Optional[str] = None,
    cfg: Optional[OracleConfig] = None,
    A: Expr = Sym("A"),
) -> QLCFamilyVerdict:
    """Check E against the QLC condition for the metric E dx⊗dx + A·E dy⊗dy.

    With ``alpha_case`` the residual is the ODE with constant α sampled from
    the matching sign range.  Without it, α is eliminated and the residual is
    the y-derivative of the curvature invariant.
    """
    cfg = cfg or OracleConfig()
    if alpha_case is not None and alpha_case not in ALPHA_INTERVALS:
        raise ValueError(f"alpha_case must be one of {sorted(ALPHA_INTERVALS)}")
    inv = curvature_invariant(E)
    if alpha_case is None:
        residual = d(inv, 1)
    elif alpha_case == "zero":
        residual = substitute(inv, {"alpha": 0})
    else:
        residual = inv - 2 * Sym("alpha")
        cfg = cfg.with_intervals(alpha=ALPHA_INTERVALS[alpha_case])
    if alpha_case == "zero":
        E = substitute(E, {"alpha": 0})

    names = free_symbols(residual) | free_symbols(E) | free_symbols(as_expr(A))
    last_error: Optional[Exception] = None
    for trial in narrowed_configs(cfg, names):
        try:
            verdict = is_zero(residual, trial)
            cd = ClassicalData.compute(E, as_expr(A) * E, 1, trial)
            qd = QuantumData.compute(cd, trial)
        except DomainExhausted as exc:
            last_error = exc
            continue
        intervals = {n: list(trial.interval(n)) for n in sorted(names)}
        return QLCFamilyVerdict(E, residual, verdict, qd.classification.kind, intervals)
    raise DomainExhausted(f"sampling failed even after narrowing: {last_error}")


# -- numeric oracle for the defining equations -----------------------------

class DefiningEquations:
    """Finite-difference evaluation of Γ, R, g_Q, 𝓡 and g₁ at a point.

    Works from numeric E(y), G(y) only, independent of the symbolic engine.
    """

    def __init__(self, E: Expr, G: Expr, omega_scale: Expr = as_expr(1), step: float = 1e-4) -> None:
        self.E, self.G, self.k, self.h = E, G, as_expr(omega_scale), step

    def _at(self, e: Expr, point: dict, y: float) -> float:
        return eval_numeric(e, {**point, "y": y})

    def _metric(self, point: dict, y: float) -> tuple[float, float]:
        return self._at(self.E, point, y), self._at(self.G, point, y)

    def _deriv(self, f: Callable[[float], float], y: float) -> float:
        h = self.h
        return (f(y - 2 * h) - 8 * f(y - h) + 8 * f(y + h) - f(y + 2 * h)) / (12 * h)

    def gamma(self, point: dict, y: float) -> dict:
        E, G = self._metric(point, y)
        dE = self._deriv(lambda s: self._metric(point, s)[0], y)
        dG = self._deriv(lambda s: self._metric(point, s)[1], y)
        return {
            (0, 0, 1): dE / (2 * E), (0, 1, 0): dE / (2 * E),
            (1, 0, 0): -dE / (2 * G), (1, 1, 1): dG / (2 * G),
        }

    def values(self, point: dict) -> dict[str, float]:
        y = point["y"]
        E, G = self._metric(point, y)
        gam = self.gamma(point, y)

        def g(i, j, k):
            return gam.get((i, j, k), 0.0)

        def dg(i, j, k):
            return self._deriv(lambda s: self.gamma(point, s).get((i, j, k), 0.0), y)

        # only the y-derivative survives
        r1_221 = dg(0, 0, 1) + g(0, 0, 1) * g(0, 1, 0) - g(1, 1, 1) * g(0, 0, 1)
        r2_112 = -dg(1, 0, 0) + g(0, 0, 1) * g(1, 0, 0) - g(1, 0, 0) * g(1, 1, 1)
        w = eval_numeric(self.k, point) / math.sqrt(E * G)
        h11 = 0.5 * w * r1_221
        h22 = 0.5 * w * r2_112
        rho = E * h11 + G * h22
        gq12 = 0.5 * w * E * (g(0, 0, 1) * g(1, 1, 1) - g(0, 1, 0) * g(0, 0, 1))
        gq21 = 0.5 * w * G * (g(1, 0, 0) * g(0, 1, 0) - g(1, 1, 1) * g(1, 0, 0))
        return {
            "omega12": w,
            "ricci": rho,
            "g_Q.order1.dx*dy": gq12,
            "g_Q.order1.dy*dx": gq21,
            "g1.order1.dx*dy": gq12 - rho / 2,
            "g1.order1.dy*dx": gq21 + rho / 2,
            "g1.order0.dx*dx": E,
            "g1.order0.dy*dy": G,
        }


def adjudicate(
    oracle: DefiningEquations,
    key: str,
    engine: Expr,
    printed: Expr,
    cfg: OracleConfig,
    rel_tol: float = 1e-6,
) -> dict:
    """Compare engine and printed values with the finite-difference oracle."""
    names = sorted(
        (free_symbols(engine) | free_symbols(printed) | free_symbols(oracle.E) | free_symbols(oracle.G) | free_symbols(oracle.k))
        - {"x"}
    )
    agree_engine = agree_printed = True
    checked = 0
    for point, _ in sample_points(names, cfg, engine):
        try:
            ref = oracle.values(point)[key]
            ev = eval_numeric(engine, point)
            pv = eval_numeric(printed, point)
        except EvaluationError:
            continue
        scale = 1.0 + abs(ref)
        agree_engine &= abs(ev - ref) <= rel_tol * scale
        agree_printed &= abs(pv - ref) <= rel_tol * scale
        checked += 1
    if agree_engine and not agree_printed:
        winner = "engine"
    elif agree_printed and not agree_engine:
        winner = "printed"
    elif agree_engine:
        winner = "both"
    else:
        winner = "neither"
    return {"defining_equation_agrees_with": winner, "points": checked}


# -- reference closed forms ------------------------------------------------

@dataclass(frozen=True)
class PrintedValue:
    quantity: str
    value: str
    ref: str
    oracle_key: Optional[str] = None


@dataclass(frozen=True)
class PrintedCatalog:
    """Published values for one metric, under the stated ω normalization."""

    name: str
    E: str
    G: str
    omega_scale: str
    values: tuple[PrintedValue, ...]

    def matches(self, E: Expr, G: Expr) -> bool:
        return is_zero(E - _e(self.E)).is_zero and is_zero(G - _e(self.G)).is_zero


UPPER_HALF_PLANE = PrintedCatalog(
    "upper-half-plane",
    "y^-2",
    "c^2*y^-2",
    "c",
    (
        PrintedValue("classical.scalar_curvature", "-2*c^-2", "upper half-plane: scalar curvature"),
        PrintedValue("classical.omega12", "y^2", "upper half-plane: symplectic inverse"),
        PrintedValue("quantum.H.dx*dx", "1/2", "upper half-plane: H^11"),
        PrintedValue("quantum.H.dy*dy", "1/2*c^-2", "upper half-plane: H^22"),
        PrintedValue("quantum.ricci_form", "y^-2", "upper half-plane: generalised Ricci form"),
        PrintedValue("quantum.g1.order1.dx*dy", "-y^-2", "upper half-plane: quantum metric g_1", "g1.order1.dx*dy"),
        PrintedValue("quantum.g1.order1.dy*dx", "y^-2", "upper half-plane: quantum metric g_1", "g1.order1.dy*dx"),
        PrintedValue("quantum.wedge.dx^dx", "-1/2", "upper half-plane: dx wedge_1 dx"),
    ),
)

T_DEFORMED = PrintedCatalog(
    "t-deformed",
    "y^-2",
    "y^-2*exp(2*t/y)",
    "1",
    (
        PrintedValue("classical.omega12", "exp(-t/y)*y^2", "t-deformed: symplectic inverse"),
        PrintedValue("classical.scalar_curvature", "2*exp(-2*t/y)*(t-y)*y^-1", "t-deformed: scalar curvature"),
        PrintedValue("quantum.H.dx*dx", "-1/2*exp(-t/y)*(t-y)*y^-1", "t-deformed: H^11"),
        PrintedValue("quantum.H.dy*dy", "1/2*exp(-3*t/y)*(-t+y)*y^-1", "t-deformed: H^22"),
        PrintedValue("quantum.ricci_form", "exp(-t/y)*(-t+y)*y^-3", "t-deformed: generalised Ricci form"),
        PrintedValue("quantum.nabla_ricci.dy", "-y^-5*t*exp(-t/y)*(2*t-3*y)", "t-deformed: covariant derivative of the Ricci form"),
        PrintedValue("quantum.wedge.dx^dx", "-1/2*exp(-t/y)*(t*y^-1+1)", "t-deformed: dx wedge_1 dx"),
        PrintedValue("quantum.wedge.dy^dy", "-1/2*exp(-3*t/y)*(3*t*y^-1+1)", "t-deformed: dy wedge_1 dy"),
        PrintedValue("quantum.g_Q.order1.dx*dy", "1/2*t*y^-3", "t-deformed: g_Q (1,2) case", "g_Q.order1.dx*dy"),
        PrintedValue("quantum.g_Q.order1.dy*dx", "1/2*exp(-2*t/y)*t*y^-3", "t-deformed: g_Q (2,1) case", "g_Q.order1.dy*dx"),
        PrintedValue("quantum.g1.order0.dy*dy", "y^-2*exp(-2*t/y)", "t-deformed summary box: g_1 classical part", "g1.order0.dy*dy"),
        PrintedValue(
            "quantum.g1.order1.dx*dy",
            "1/2*y^-3*((1+2*exp(-t/y))*t-2*exp(-t/y)*y)",
            "t-deformed summary box: g_1 lambda term",
            "g1.order1.dx*dy",
        ),
        PrintedValue(
            "quantum.g1.order1.dy*dx",
            "1/2*y^-3*exp(-t/y)*((exp(-t/y)-2)*t+2*y)",
            "t-deformed summary box: g_1 lambda term",
            "g1.order1.dy*dx",
        ),
        PrintedValue("quantum.nabla_Q_dx.order1.dx*dx", "1/2*exp(-t/y)*y^-2*t*exp(-2*t/y)", "t-deformed summary box: nabla_Q dx"),
        PrintedValue("quantum.nabla_Q_dx.order1.dy*dy", "1/2*exp(-t/y)*y^-2*t", "t-deformed summary box: nabla_Q dx"),
        PrintedValue("quantum.nabla_Q_dy.order1.dx*dy", "1/2*exp(-3*t/y)*t*(t+y)*y^-3", "t-deformed summary box: nabla_Q dy"),
    ),
)

CATALOGS = (UPPER_HALF_PLANE, T_DEFORMED)

_BASIS = {"dx": 0, "dy": 1}


def _component(t: Tensor, key: str) -> Expr:
    return t[tuple(_BASIS[p] for p in key.split("*"))]


def engine_value(cd: ClassicalData, qd: QuantumData, quantity: str) -> Expr:
    """Look up a dotted quantity path such as ``quantum.g1.order1.dx*dy``."""
    parts = quantity.split(".")
    if parts[0] == "classical":
        return {"scalar_curvature": cd.scalar, "omega12": cd.omega.omega12}[parts[1]]
    kind = parts[1]
    if kind == "ricci_form":
        return qd.ricci.coeff
    if kind == "H":
        return _component(qd.H.h, parts[2])
    if kind == "nabla_ricci":
        return qd.nabla_ricci[_BASIS[parts[2]]]
    if kind == "wedge":
        i, j = (_BASIS[p] for p in parts[2].split("^"))
        return qd.wedges[i, j].order1.coeff
    graded: Graded = {"g_Q": qd.gQ, "g1": qd.g1, "nabla_Q_dx": qd.nabla_dx, "nabla_Q_dy": qd.nabla_dy}[kind]
    layer = graded.order0 if parts[2] == "order0" else graded.order1
    return _component(layer, parts[3])


@dataclass(frozen=True)
class Discrepancy:
    quantity: str
    engine_value: str
    paper_value: str
    paper_ref: str
    oracle_verdict: dict

    def as_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "engine_value": self.engine_value,
            "paper_value": self.paper_value,
            "paper_ref": self.paper_ref,
            "oracle_verdict": self.oracle_verdict,
        }


def compare_catalog(
    catalog: PrintedCatalog,
    cd: ClassicalData,
    qd: QuantumData,
    cfg: OracleConfig,
) -> tuple[list[dict], list[Discrepancy]]:
    """Check every catalogued value; mismatches become discrepancies."""
    checks, found = [], []
    oracle = DefiningEquations(_e(catalog.E), _e(catalog.G), _e(catalog.omega_scale))
    for pv in catalog.values:
        engine = engine_value(cd, qd, pv.quantity)
        printed = _e(pv.value)
        verdict = is_zero(engine - printed, cfg)
        checks.append({"quantity": pv.quantity, "verdict": verdict.status.value})
        if verdict.is_zero:
            continue
        detail = verdict.as_dict()
        if pv.oracle_key is not None:
            detail.update(adjudicate(oracle, pv.oracle_key, engine, printed, cfg))
        found.append(Discrepancy(pv.quantity, render(engine), render(printed), pv.ref, detail))
    return checks, found


# -- t-deformation -----------------------------------------------------------

@dataclass(frozen=True)
class TDeformationReport:
    checks: tuple[dict, ...]
    classification: ConnectionClass
    discrepancies: tuple[Discrepancy, ...]
    limits: tuple[dict, ...] = field(default_factory=tuple)


def _limit_pairs(cd_t, qd_t, cd_0, qd_0) -> list[tuple[str, Expr, Expr]]:
    """Quantities of the t-deformed run paired with the base run (c=1)."""
    pairs = [
        ("omega12", cd_t.omega.omega12, cd_0.omega.omega12),
        ("scalar_curvature", cd_t.scalar, cd_0.scalar),
        ("ricci_form", qd_t.ricci.coeff, qd_0.ricci.coeff),
    ]
    for idx, v in cd_t.gamma.items():
        pairs.append((f"christoffel{idx}", v, cd_0.gamma[idx]))
    for idx, v in cd_t.riemann.items():
        pairs.append((f"riemann{idx}", v, cd_0.riemann[idx]))
    for name in ("gQ", "g1", "nabla_dx", "nabla_dy"):
        a, b = getattr(qd_t, name), getattr(qd_0, name)
        for layer in ("order0", "order1"):
            for idx, v in getattr(a, layer).items():
                pairs.append((f"{name}.{layer}{idx}", v, getattr(b, layer)[idx]))
    for h, v in enumerate(qd_t.nabla_ricci.comps):
        pairs.append((f"nabla_ricci[{h}]", v, qd_0.nabla_ricci[h]))
    return pairs


def t_deformation_report(cfg: Optional[OracleConfig] = None) -> TDeformationReport:
    cfg = cfg or OracleConfig()
    E, G = _e(T_DEFORMED.E), _e(T_DEFORMED.G)
    cd = ClassicalData.compute(E, G, 1, cfg)
    qd = QuantumData.compute(cd, cfg)
    checks, found = compare_catalog(T_DEFORMED, cd, qd, cfg)
    checks.append({"quantity": "quantum.cotorsion", "verdict": is_zero(qd.cotorsion.order1, cfg).status.value})
    checks.append({"quantity": "quantum.classification", "value": qd.classification.kind.value})

    cd0 = ClassicalData.compute(_e("y^-2"), _e("y^-2"), 1, cfg)
    qd0 = QuantumData.compute(cd0, cfg)
    limits = []
    for name, deformed, base in _limit_pairs(cd, qd, cd0, qd0):
        verdict = is_zero(substitute(deformed, {"t": 0}) - base, cfg)
        limits.append({"quantity": name, "verdict": verdict.status.value})
        if not verdict.is_zero:
            found.append(Discrepancy(f"t->0:{name}", render(substitute(deformed, {"t": 0})), render(base), "t-deformed: t->0 limit", verdict.as_dict()))
    limited = ClassicalData.compute(substitute(E, {"t": 0}), substitute(G, {"t": 0}), 1, cfg)
    limits.append({"quantity": "classification(t->0)", "value": QuantumData.compute(limited, cfg).classification.kind.value})
    return TDeformationReport(tuple(checks), qd.classification.kind, tuple(found), tuple(limits))


def random_non_family_metrics(count: int = 20, seed: int = 0x5EED) -> list[tuple[Expr, Expr]]:
    """Distinct seeded (E, G) pairs with E′ ≠ 0 and G/E non-constant."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        a, b = rng.randint(1, 3), rng.randint(1, 4)
        p, q = rng.choice([-2, -1, 1, 2]), rng.choice([-3, -1, 1, 3])
        if p == q:
            continue
        E = as_expr(a) * power(Y, p) + 1
        G = as_expr(b) * power(Y, q) + power(Y, 2)
        if (E, G) not in out:
            out.append((E, G))
    return out


__all__ = [
    "CATALOGS",
    "ConditionCase",
    "ConditionReport",
    "DefiningEquations",
    "Discrepancy",
    "FAMILIES",
    "PrintedCatalog",
    "QLCFamilyVerdict",
    "TDeformationReport",
    "T_DEFORMED",
    "UPPER_HALF_PLANE",
    "adjudicate",
    "classical_form_conditions",
    "compare_catalog",
    "corrected_family",
    "curvature_invariant",
    "engine_value",
    "printed_condition_factors",
    "printed_family",
    "random_non_family_metrics",
    "t_deformation_report",
    "verify_qlc_family",
]
