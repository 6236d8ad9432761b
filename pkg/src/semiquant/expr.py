"""Immutable symbolic expressions with exact rational constants.

Every arithmetic operator returns a *normalized* expression: a fully expanded
sum of monomials with rational coefficients.  A monomial is a product of atoms
raised to rational powers, where an atom is a symbol, a function application,
a constant prime (for surds such as ``2^1/2``) or a multi-term sum that cannot
be expanded because its exponent is negative or fractional.  All ``exp``
factors of a monomial are merged into a single ``exp`` whose argument is the
sum of theirs.

Symbols are assumed positive, which licenses ``(a*b)^r = a^r * b^r`` and
``(a^p)^q = a^(p*q)``.  Coordinates and parameters in this domain are positive
on the sampling box, so the assumption never changes a value there.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

COORDINATES = ("x", "y")
FUNCTIONS = frozenset({"exp", "log", "sqrt", "sec", "sech"})
# tan and tanh only arise from differentiating sec and sech.
INTERNAL_FUNCTIONS = frozenset({"tan", "tanh"})

Number = Union[int, Fraction]
Operand = Union["Expr", int, Fraction]


class Expr:
    """Base class of all expression nodes.

    Nodes compare and hash structurally.  ``key`` is a total order used to
    sort terms and factors deterministically.
    """

    __slots__ = ("_hash", "_key")

    def _fields(self) -> tuple:
        raise NotImplementedError

    def _make_key(self) -> tuple:
        raise NotImplementedError

    @property
    def key(self) -> tuple:
        try:
            return self._key
        except AttributeError:
            self._key = self._make_key()
            return self._key

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            self._hash = hash((type(self).__name__,) + self._fields())
            return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Expr) else False
        return hash(self) == hash(other) and self._fields() == other._fields()

    def __ne__(self, other: object) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __repr__(self) -> str:
        return f"{type(self).__name__}({render(self)!r})"

    def __str__(self) -> str:
        return render(self)

    # arithmetic always normalizes
    def __add__(self, other: Operand) -> Expr:
        return add(self, other)

    def __radd__(self, other: Operand) -> Expr:
        return add(other, self)

    def __sub__(self, other: Operand) -> Expr:
        return add(self, mul(-1, other))

    def __rsub__(self, other: Operand) -> Expr:
        return add(other, mul(-1, self))

    def __mul__(self, other: Operand) -> Expr:
        return mul(self, other)

    def __rmul__(self, other: Operand) -> Expr:
        return mul(other, self)

    def __truediv__(self, other: Operand) -> Expr:
        return mul(self, power(other, -1))

    def __rtruediv__(self, other: Operand) -> Expr:
        return mul(other, power(self, -1))

    def __neg__(self) -> Expr:
        return mul(-1, self)

    def __pow__(self, exponent: Number) -> Expr:
        return power(self, exponent)

    @property
    def is_zero_literal(self) -> bool:
        return isinstance(self, Rat) and self.value == 0


class Rat(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number) -> None:
        self.value = Fraction(value)

    def _fields(self) -> tuple:
        return (self.value,)

    def _make_key(self) -> tuple:
        return (0, self.value)


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        self.name = name

    def _fields(self) -> tuple:
        return (self.name,)

    def _make_key(self) -> tuple:
        return (1, self.name)

    @property
    def kind(self) -> str:
        return "coordinate" if self.name in COORDINATES else "parameter"


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: Number) -> None:
        self.base = base
        self.exponent = Fraction(exponent)

    def _fields(self) -> tuple:
        return (self.base, self.exponent)

    def _make_key(self) -> tuple:
        return (2, self.base.key, self.exponent)


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[Expr]) -> None:
        self.factors = tuple(factors)

    def _fields(self) -> tuple:
        return self.factors

    def _make_key(self) -> tuple:
        return (3, tuple(f.key for f in self.factors))


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Expr]) -> None:
        self.terms = tuple(terms)

    def _fields(self) -> tuple:
        return self.terms

    def _make_key(self) -> tuple:
        return (4, tuple(t.key for t in self.terms))


class Func(Expr):
    __slots__ = ("tag", "arg")

    def __init__(self, tag: str, arg: Expr) -> None:
        if tag not in FUNCTIONS and tag not in INTERNAL_FUNCTIONS:
            raise ValueError(f"unknown function {tag!r}")
        self.tag = tag
        self.arg = arg

    def _fields(self) -> tuple:
        return (self.tag, self.arg)

    def _make_key(self) -> tuple:
        return (5, self.tag, self.arg.key)


ZERO = Rat(0)
ONE = Rat(1)
_F0 = Fraction(0)
_F1 = Fraction(1)


def sym(name: str) -> Sym:
    return Sym(name)


def const(value: Number) -> Rat:
    return Rat(value)


def as_expr(value: Operand) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Rat(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


# ---------------------------------------------------------------------------
# Polynomial form: {monomial: coefficient}, monomial = sorted ((atom, exp), ...)
# ---------------------------------------------------------------------------

Mono = tuple
Poly = dict


def _mono_key(mono: Mono) -> tuple:
    return tuple((atom.key, e) for atom, e in mono)


def _is_exp(atom: Expr) -> bool:
    return isinstance(atom, Func) and atom.tag == "exp"


def _is_nonneg_int(e: Fraction) -> bool:
    return e.denominator == 1 and e >= 0


def _factor_int(n: int) -> dict[int, int]:
    """Trial-division factorization; any leftover cofactor is kept whole."""
    out: dict[int, int] = {}
    p = 2
    while p * p <= n and p < 10_000:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _const_power(c: Fraction, r: Fraction) -> Poly:
    """c^r as a polynomial (a coefficient times surd atoms)."""
    if c == 0:
        if r <= 0:
            raise ZeroDivisionError("0 raised to a non-positive power")
        return {}
    if r.denominator == 1:
        return {(): c ** int(r)}
    acc: dict[Expr, Fraction] = {}
    if c < 0:
        acc[Rat(-1)] = r
        c = -c
    for prime, k in _factor_int(c.numerator).items():
        acc[Rat(prime)] = acc.get(Rat(prime), _F0) + k * r
    for prime, k in _factor_int(c.denominator).items():
        acc[Rat(prime)] = acc.get(Rat(prime), _F0) - k * r
    return _finish(acc, _F1)


def _finish(acc: Mapping[Expr, Fraction], coeff: Fraction) -> Poly:
    """Turn an atom->exponent map into a canonical polynomial."""
    exp_args: list[Poly] = []
    factors: list[tuple[Expr, Fraction]] = []
    expand: list[tuple[Expr, int]] = []
    for atom, e in acc.items():
        if e == 0:
            continue
        if _is_exp(atom):
            exp_args.append(_scale(to_poly(atom.arg), e))
        elif isinstance(atom, Rat):
            if atom.value == -1:
                # (-1)^e: keep the fractional part modulo 2
                whole = e.numerator // e.denominator
                frac = e - whole
                if frac and frac.denominator % 2:
                    # odd root of -1 is real
                    whole += frac.numerator
                    frac = _F0
                if whole % 2:
                    coeff = -coeff
                if frac:
                    factors.append((atom, frac))
            else:
                whole = e.numerator // e.denominator
                frac = e - whole
                coeff *= atom.value ** whole
                if frac:
                    factors.append((atom, frac))
        elif isinstance(atom, Sum) and (_is_nonneg_int(e) or (len(atom.terms) == 1 and e.denominator == 1)):
            expand.append((atom, int(e)))
        else:
            factors.append((atom, e))
    if exp_args:
        total = _add_many(exp_args)
        if total:
            factors.append((Func("exp", from_poly(total)), _F1))
    factors.sort(key=lambda ae: ae[0].key)
    result: Poly = {tuple(factors): coeff} if coeff else {}
    for atom, n in expand:
        result = poly_mul(result, _power_poly(to_poly(atom), Fraction(n)))
    return result


def _scale(p: Poly, c: Fraction) -> Poly:
    if c == 0:
        return {}
    return {m: v * c for m, v in p.items()}


def _add_many(polys: Iterable[Poly]) -> Poly:
    out: dict = {}
    for p in polys:
        for m, v in p.items():
            s = out.get(m, _F0) + v
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def poly_add(a: Poly, b: Poly) -> Poly:
    return _add_many((a, b))


def _mono_mul(a: Mono, b: Mono) -> Poly:
    if not a:
        return {b: _F1}
    if not b:
        return {a: _F1}
    acc: dict[Expr, Fraction] = dict(a)
    clean = True
    for atom, e in b:
        if atom in acc or _is_exp(atom):
            clean = False
        acc[atom] = acc.get(atom, _F0) + e
    if clean and not any(_is_exp(atom) for atom, _ in a):
        merged = tuple(sorted(acc.items(), key=lambda ae: ae[0].key))
        return {merged: _F1}
    return _finish(acc, _F1)


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return {}
    out: dict = {}
    for ma, va in a.items():
        for mb, vb in b.items():
            for m, v in _mono_mul(ma, mb).items():
                s = out.get(m, _F0) + va * vb * v
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
    return out


def poly_pow(p: Poly, n: int) -> Poly:
    result: Poly = {(): _F1}
    base = p
    while n:
        if n & 1:
            result = poly_mul(result, base)
        n >>= 1
        if n:
            base = poly_mul(base, base)
    return result


def _mono_power(mono: Mono, r: Fraction) -> Poly:
    return _finish({atom: e * r for atom, e in mono}, _F1)


def _canonical_base(p: Poly, keep_sign: bool = False) -> tuple[Poly, Expr]:
    """Split a multi-term polynomial into (monomial prefactor, canonical sum).

    The canonical sum has leading coefficient 1 and no atom common to every
    term, so equal bases compare equal regardless of how they were scaled.
    With ``keep_sign`` the leading coefficient is ±1 instead: a fractional
    power must not pull a negative factor out of a base that is positive.
    """
    atoms: set[Expr] = set()
    for mono in p:
        atoms.update(atom for atom, _ in mono if not _is_exp(atom))
    content: dict[Expr, Fraction] = {}
    for atom in atoms:
        low = min(dict(mono).get(atom, _F0) for mono in p)
        if low:
            content[atom] = low
    exps = {next((a for a, _ in mono if _is_exp(a)), None) for mono in p}
    common_exp = exps.pop() if len(exps) == 1 else None
    if common_exp is not None:
        content[common_exp] = _F1
    if content:
        inverse = _finish({a: -e for a, e in content.items()}, _F1)
        p = poly_mul(p, inverse)
    lead = min(p, key=_mono_key)
    k = p[lead]
    if keep_sign:
        k = abs(k)
    base = from_poly(_scale(p, 1 / k))
    prefactor = _finish(content, k) if content else {(): k}
    return prefactor, base


def _power_poly(p: Poly, r: Fraction) -> Poly:
    if not p:
        if r <= 0:
            raise ZeroDivisionError("0 raised to a non-positive power")
        return {}
    if _is_nonneg_int(r):
        return poly_pow(p, int(r))
    if len(p) == 1:
        (mono, c), = p.items()
        if c < 0 and mono and r.denominator != 1:
            # (-a)^r stays whole; splitting off (-1)^r leaves the reals
            opaque = Sum((_term(mono, -_F1),))
            return poly_mul(_const_power(-c, r), {((opaque, r),): _F1})
        return poly_mul(_const_power(c, r), _mono_power(mono, r))
    prefactor, base = _canonical_base(p, keep_sign=r.denominator != 1)
    out = _power_poly(prefactor, r)
    return poly_mul(out, {((base, r),): _F1})


def _product_poly(factors: Iterable[Expr]) -> Poly:
    """Multiply factors, merging repeated multi-term bases before expanding."""
    rest: Poly = {(): _F1}
    groups: dict[Expr, Fraction] = {}
    plain: list[Poly] = []
    for f in factors:
        if isinstance(f, Pow):
            bp = to_poly(f.base)
            if len(bp) > 1 and not _is_nonneg_int(f.exponent):
                prefactor, base = _canonical_base(bp, keep_sign=f.exponent.denominator != 1)
                rest = poly_mul(rest, _power_poly(prefactor, f.exponent))
                groups[base] = groups.get(base, _F0) + f.exponent
                continue
            plain.append(_power_poly(bp, f.exponent))
        else:
            plain.append(to_poly(f))
    for fp in plain:
        if len(fp) > 1 and groups:
            prefactor, base = _canonical_base(fp)
            if base in groups:
                rest = poly_mul(rest, prefactor)
                groups[base] += 1
                continue
        rest = poly_mul(rest, fp)
        if not rest:
            return {}
    for base, n in groups.items():
        if n == 0:
            continue
        if _is_nonneg_int(n):
            rest = poly_mul(rest, poly_pow(to_poly(base), int(n)))
        else:
            rest = poly_mul(rest, {((base, n),): _F1})
    return rest


def _func_poly(tag: str, arg: Expr) -> Poly:
    a = normalize(arg)
    if tag == "sqrt":
        return _power_poly(to_poly(a), Fraction(1, 2))
    if tag == "exp":
        if a.is_zero_literal:
            return {(): _F1}
        if isinstance(a, Func) and a.tag == "log":
            return to_poly(a.arg)
        return {((Func("exp", a), _F1),): _F1}
    if tag == "log":
        if a == ONE:
            return {}
        if isinstance(a, Func) and a.tag == "exp":
            return to_poly(a.arg)
        return {((Func("log", a), _F1),): _F1}
    if a.is_zero_literal:
        return {(): _F1} if tag in ("sec", "sech") else {}
    return {((Func(tag, a), _F1),): _F1}


_POLY_CACHE: dict[Expr, Poly] = {}


def to_poly(e: Expr) -> Poly:
    """Polynomial form of ``e``; the returned dict must not be mutated."""
    cached = _POLY_CACHE.get(e)
    if cached is not None:
        return cached
    if isinstance(e, Rat):
        p: Poly = {(): e.value} if e.value else {}
    elif isinstance(e, Sym):
        p = {((e, _F1),): _F1}
    elif isinstance(e, Sum):
        p = _add_many(to_poly(t) for t in e.terms)
    elif isinstance(e, Product):
        p = _product_poly(e.factors)
    elif isinstance(e, Pow):
        p = _product_poly((e,))
    elif isinstance(e, Func):
        p = _func_poly(e.tag, e.arg)
    else:
        raise TypeError(f"not an expression: {e!r}")
    if len(_POLY_CACHE) > 400_000:
        _POLY_CACHE.clear()
    _POLY_CACHE[e] = p
    return p


def _term(mono: Mono, coeff: Fraction) -> Expr:
    factors: list[Expr] = [atom if e == 1 else Pow(atom, e) for atom, e in mono]
    if coeff != 1 or not factors:
        factors.insert(0, Rat(coeff))
    return factors[0] if len(factors) == 1 else Product(factors)


def from_poly(p: Poly) -> Expr:
    if not p:
        return ZERO
    terms = [_term(m, p[m]) for m in sorted(p, key=_mono_key)]
    e = terms[0] if len(terms) == 1 else Sum(terms)
    _POLY_CACHE.setdefault(e, p)
    return e


def normalize(e: Expr) -> Expr:
    """Canonical fully expanded form; idempotent."""
    return from_poly(to_poly(e))


def add(*operands: Operand) -> Expr:
    return from_poly(_add_many(to_poly(as_expr(o)) for o in operands))


def mul(*operands: Operand) -> Expr:
    return from_poly(_product_poly([as_expr(o) for o in operands]))


def power(base: Operand, exponent: Number) -> Expr:
    return from_poly(_product_poly([Pow(as_expr(base), Fraction(exponent))]))


def func(tag: str, arg: Operand) -> Expr:
    return from_poly(_func_poly(tag, as_expr(arg)))


def exp(arg: Operand) -> Expr:
    return func("exp", arg)


def log(arg: Operand) -> Expr:
    return func("log", arg)


def sqrt(arg: Operand) -> Expr:
    return func("sqrt", arg)


def sec(arg: Operand) -> Expr:
    return func("sec", arg)


def sech(arg: Operand) -> Expr:
    return func("sech", arg)


def terms(e: Expr) -> tuple[Expr, ...]:
    """Top-level summands of the normalized form of ``e``."""
    n = normalize(e)
    if n.is_zero_literal:
        return ()
    return n.terms if isinstance(n, Sum) else (n,)


def free_symbols(e: Expr) -> frozenset[str]:
    return _free(e)


@lru_cache(maxsize=200_000)
def _free(e: Expr) -> frozenset[str]:
    if isinstance(e, Sym):
        return frozenset((e.name,))
    if isinstance(e, Rat):
        return frozenset()
    if isinstance(e, Pow):
        return _free(e.base)
    if isinstance(e, Func):
        return _free(e.arg)
    children = e.terms if isinstance(e, Sum) else e.factors
    out: frozenset[str] = frozenset()
    for c in children:
        out |= _free(c)
    return out


# ---------------------------------------------------------------------------
# Calculus
# ---------------------------------------------------------------------------

def differentiate(e: Expr, s: Union[Sym, str]) -> Expr:
    name = s.name if isinstance(s, Sym) else s
    return _diff(normalize(e), name)


@lru_cache(maxsize=200_000)
def _diff(e: Expr, name: str) -> Expr:
    if name not in free_symbols(e):
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Sum):
        return add(*(_diff(t, name) for t in e.terms))
    if isinstance(e, Product):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            d = _diff(f, name)
            if not d.is_zero_literal:
                parts.append(mul(*fs[:i], d, *fs[i + 1:]))
        return add(*parts)
    if isinstance(e, Pow):
        return mul(e.exponent, power(e.base, e.exponent - 1), _diff(normalize(e.base), name))
    if isinstance(e, Func):
        u = e.arg
        du = _diff(u, name)
        outer = _outer_derivative(e.tag, u)
        return mul(outer, du)
    raise TypeError(f"not an expression: {e!r}")


def _outer_derivative(tag: str, u: Expr) -> Expr:
    if tag == "exp":
        return func("exp", u)
    if tag == "log":
        return power(u, -1)
    if tag == "sec":
        return mul(func("sec", u), func("tan", u))
    if tag == "sech":
        return mul(-1, func("sech", u), func("tanh", u))
    if tag == "tan":
        return power(func("sec", u), 2)
    if tag == "tanh":
        return power(func("sech", u), 2)
    raise ValueError(f"no derivative rule for {tag!r}")


def substitute(e: Expr, bindings: Mapping[Union[str, Sym], Operand]) -> Expr:
    """Simultaneous substitution followed by normalization."""
    table = {(k.name if isinstance(k, Sym) else k): as_expr(v) for k, v in bindings.items()}
    return normalize(_subst(e, table))


def _subst(e: Expr, table: Mapping[str, Expr]) -> Expr:
    if not (free_symbols(e) & table.keys()):
        return e
    if isinstance(e, Sym):
        return table[e.name]
    if isinstance(e, Sum):
        return Sum(_subst(t, table) for t in e.terms)
    if isinstance(e, Product):
        return Product(_subst(f, table) for f in e.factors)
    if isinstance(e, Pow):
        return Pow(_subst(e.base, table), e.exponent)
    if isinstance(e, Func):
        return Func(e.tag, _subst(e.arg, table))
    return e


# ---------------------------------------------------------------------------
# Rendering in the input grammar
# ---------------------------------------------------------------------------

def _render_rational(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _render_pow(base: Expr, exponent: Fraction) -> str:
    if isinstance(base, (Sym, Func)) or (isinstance(base, Rat) and base.value.denominator == 1 and base.value >= 0):
        b = render(base)
    else:
        b = f"({render(base)})"
    return f"{b}^{_render_rational(exponent)}"


def _render_product(factors: tuple[Expr, ...]) -> str:
    parts: list[str] = []
    sign = ""
    for i, f in enumerate(factors):
        if i == 0 and isinstance(f, Rat):
            if f.value == -1 and len(factors) > 1:
                sign = "-"
                continue
            if f.value.denominator != 1 and len(factors) > 1:
                # coefficient n/d must not be read as part of an exponent
                parts.append(_render_rational(f.value))
                continue
        if isinstance(f, (Sum, Product)) or (isinstance(f, Rat) and f.value < 0 and i > 0):
            parts.append(f"({render(f)})")
        else:
            parts.append(render(f))
    return sign + "*".join(parts)


def render(e: Expr) -> str:
    """Canonical text form that ``parse`` reads back to the same normal form."""
    if isinstance(e, Rat):
        return _render_rational(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Func):
        return f"{e.tag}({render(e.arg)})"
    if isinstance(e, Pow):
        return _render_pow(e.base, e.exponent)
    if isinstance(e, Product):
        return _render_product(e.factors)
    if isinstance(e, Sum):
        out = ""
        for i, t in enumerate(e.terms):
            text = render(t)
            if i == 0:
                out = text
            elif text.startswith("-"):
                out += " - " + text[1:]
            else:
                out += " + " + text
        return out
    raise TypeError(f"not an expression: {e!r}")
