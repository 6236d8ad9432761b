"""Numeric evaluation and the symbolic-then-numeric zero test."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Optional

from .expr import COORDINATES, Expr, Func, Pow, Product, Rat, Sum, Sym, free_symbols, normalize, terms

DEFAULT_SEED = 0x5EED
DEFAULT_SAMPLES = 16
DEFAULT_TOL = 1e-9
COORDINATE_INTERVAL = (0.6, 2.4)
PARAMETER_INTERVAL = (0.3, 1.7)
SEC_ARGUMENT_BOUND = 1.2
POLE_GUARD = 1e-6


class EvaluationError(ValueError):
    """Unbound symbol or a point outside the domain of some subexpression."""


class DomainExhausted(RuntimeError):
    """No admissible sample point was found within the retry budget."""


def eval_numeric(e: Expr, point: Mapping[str, float]) -> float:
    """Evaluate ``e`` in IEEE double precision at ``point``."""
    try:
        return _eval(e, point)
    except (OverflowError, ZeroDivisionError) as exc:
        raise EvaluationError(str(exc)) from exc


def _eval(e: Expr, point: Mapping[str, float]) -> float:
    if isinstance(e, Rat):
        return e.value.numerator / e.value.denominator
    if isinstance(e, Sym):
        try:
            return float(point[e.name])
        except KeyError:
            raise EvaluationError(f"unbound symbol {e.name!r}") from None
    if isinstance(e, Sum):
        return math.fsum(_eval(t, point) for t in e.terms)
    if isinstance(e, Product):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, point)
        return out
    if isinstance(e, Pow):
        b = _eval(e.base, point)
        r = e.exponent
        if r.denominator == 1:
            if b == 0 and r < 0:
                raise EvaluationError("division by zero")
            return b ** int(r)
        if b < 0:
            raise EvaluationError("fractional power of a negative number")
        if b == 0 and r < 0:
            raise EvaluationError("division by zero")
        return b ** (r.numerator / r.denominator)
    if isinstance(e, Func):
        u = _eval(e.arg, point)
        tag = e.tag
        if tag == "exp":
            return math.exp(u)
        if tag == "log":
            if u <= 0:
                raise EvaluationError("log of a non-positive number")
            return math.log(u)
        if tag == "sqrt":
            if u < 0:
                raise EvaluationError("sqrt of a negative number")
            return math.sqrt(u)
        if tag in ("sec", "tan"):
            cos = math.cos(u)
            if abs(cos) < POLE_GUARD:
                raise EvaluationError(f"{tag} pole")
            return 1.0 / cos if tag == "sec" else math.sin(u) / cos
        if tag == "sech":
            return 1.0 / math.cosh(u)
        if tag == "tanh":
            return math.tanh(u)
    raise EvaluationError(f"cannot evaluate {e!r}")


def _periodic_arguments(e: Expr) -> list[Expr]:
    if isinstance(e, Func):
        inner = _periodic_arguments(e.arg)
        return inner + [e.arg] if e.tag in ("sec", "tan") else inner
    if isinstance(e, Pow):
        return _periodic_arguments(e.base)
    if isinstance(e, (Sum, Product)):
        children = e.terms if isinstance(e, Sum) else e.factors
        return [a for c in children for a in _periodic_arguments(c)]
    return []


@dataclass(frozen=True)
class OracleConfig:
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    tol: float = DEFAULT_TOL
    intervals: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    sec_bound: float = SEC_ARGUMENT_BOUND
    max_attempts_per_sample: int = 60

    def interval(self, name: str) -> tuple[float, float]:
        if name in self.intervals:
            return self.intervals[name]
        return COORDINATE_INTERVAL if name in COORDINATES else PARAMETER_INTERVAL

    def with_intervals(self, **intervals: tuple[float, float]) -> "OracleConfig":
        merged = dict(self.intervals)
        merged.update(intervals)
        return replace(self, intervals=merged)


class ZeroStatus(str, Enum):
    ZERO_SYMBOLIC = "ZeroSymbolic"
    ZERO_NUMERIC = "ZeroNumeric"
    NONZERO = "NonZero"


@dataclass(frozen=True)
class ZeroVerdict:
    status: ZeroStatus
    witness: Optional[dict[str, float]] = None
    magnitude: Optional[float] = None
    samples_used: Optional[int] = None

    @property
    def is_zero(self) -> bool:
        return self.status is not ZeroStatus.NONZERO

    def __bool__(self) -> bool:
        return self.is_zero

    def as_dict(self) -> dict:
        out: dict = {"status": self.status.value}
        if self.witness is not None:
            out["witness"] = {k: self.witness[k] for k in sorted(self.witness)}
            out["magnitude"] = self.magnitude
        if self.samples_used is not None:
            out["samples_used"] = self.samples_used
        return out


def sample_points(names: list[str], cfg: OracleConfig, check: Expr):
    """Yield admissible pseudo-random points for the symbols in ``names``.

    A point is admissible when ``check`` evaluates there and every sec/tan
    argument stays inside the configured bound.
    """
    rng = random.Random(cfg.seed)
    periodic = _periodic_arguments(check)
    budget = cfg.samples * cfg.max_attempts_per_sample
    produced = 0
    while produced < cfg.samples:
        if budget <= 0:
            raise DomainExhausted(
                f"only {produced} of {cfg.samples} admissible sample points found"
            )
        budget -= 1
        point = {n: rng.uniform(*cfg.interval(n)) for n in names}
        try:
            if any(abs(_eval(a, point)) >= cfg.sec_bound for a in periodic):
                continue
            value = _eval(check, point)
        except (EvaluationError, OverflowError, ZeroDivisionError, ValueError):
            continue
        if not math.isfinite(value):
            continue
        produced += 1
        yield point, value


def is_zero(e: Expr, cfg: Optional[OracleConfig] = None) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically on the sampling box."""
    cfg = cfg or OracleConfig()
    n = normalize(e)
    if n.is_zero_literal:
        return ZeroVerdict(ZeroStatus.ZERO_SYMBOLIC)
    summands = terms(n)
    names = sorted(free_symbols(n))
    used = 0
    for point, value in sample_points(names, cfg, n):
        scale = math.fsum(abs(_eval(t, point)) for t in summands)
        used += 1
        if abs(value) > cfg.tol * (1.0 + scale):
            return ZeroVerdict(ZeroStatus.NONZERO, witness=point, magnitude=abs(value))
    return ZeroVerdict(ZeroStatus.ZERO_NUMERIC, samples_used=used)


def all_zero(exprs, cfg: Optional[OracleConfig] = None) -> bool:
    return all(is_zero(e, cfg).is_zero for e in exprs)
