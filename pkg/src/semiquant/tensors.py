"""Component containers for 2D tensors and their λ-graded counterparts.

Indices are 0-based internally (0 = x, 1 = y).  A rank-r tensor stores its
2**r components in lexicographic index order, so ``T[(m, n)]`` is the
coefficient of dx^m ⊗ dx^n.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Generic, Iterator, TypeVar, Union

from .expr import ZERO, Expr, as_expr, render

DIM = 2
BASIS_NAMES = ("dx", "dy")

Index = tuple[int, ...]


def indices(rank: int) -> Iterator[Index]:
    return product(range(DIM), repeat=rank)


@dataclass(frozen=True)
class Tensor:
    rank: int
    comps: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if len(self.comps) != DIM ** self.rank:
            raise ValueError(f"rank {self.rank} tensor needs {DIM ** self.rank} components")

    @classmethod
    def build(cls, rank: int, fn: Callable[..., object]) -> "Tensor":
        return cls(rank, tuple(as_expr(fn(*idx)) for idx in indices(rank)))

    @classmethod
    def zeros(cls, rank: int) -> "Tensor":
        return cls(rank, (ZERO,) * DIM ** rank)

    @classmethod
    def from_nested(cls, rank: int, nested) -> "Tensor":
        def pick(*idx):
            v = nested
            for i in idx:
                v = v[i]
            return v
        return cls.build(rank, pick)

    @staticmethod
    def _flat(idx: Index) -> int:
        out = 0
        for i in idx:
            out = out * DIM + i
        return out

    def __getitem__(self, idx: Union[int, Index]) -> Expr:
        if isinstance(idx, int):
            idx = (idx,)
        if len(idx) != self.rank:
            raise IndexError(f"rank {self.rank} tensor indexed with {idx}")
        return self.comps[self._flat(idx)]

    def items(self) -> Iterator[tuple[Index, Expr]]:
        return zip(indices(self.rank), self.comps)

    def map(self, fn: Callable[[Expr], Expr]) -> "Tensor":
        return Tensor(self.rank, tuple(fn(c) for c in self.comps))

    def _check(self, other: "Tensor") -> None:
        if not isinstance(other, Tensor) or other.rank != self.rank:
            raise TypeError("tensor rank mismatch")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.rank, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.rank, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self) -> "Tensor":
        return self.map(lambda c: -c)

    def scale(self, f: Union[Expr, int]) -> "Tensor":
        return self.map(lambda c: c * f)

    def is_structurally_zero(self) -> bool:
        return all(c.is_zero_literal for c in self.comps)

    def render_components(self) -> dict[str, str]:
        """Nonzero components keyed like ``dx*dy`` (tensor product order)."""
        return {
            "*".join(BASIS_NAMES[i] for i in idx): render(c)
            for idx, c in self.items()
            if not c.is_zero_literal
        }


def one_form(a: object, b: object) -> Tensor:
    return Tensor(1, (as_expr(a), as_expr(b)))


def basis_form(i: int) -> Tensor:
    return Tensor.build(1, lambda k: 1 if k == i else 0)


def tensor2(rows) -> Tensor:
    return Tensor.from_nested(2, rows)


def outer(a: Tensor, b: Tensor) -> Tensor:
    return Tensor.build(a.rank + b.rank, lambda *idx: a[idx[: a.rank]] * b[idx[a.rank:]])


@dataclass(frozen=True)
class TwoForm:
    """Coefficient of dx∧dy."""

    coeff: Expr

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.coeff + other.coeff)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.coeff - other.coeff)

    def __neg__(self) -> "TwoForm":
        return TwoForm(-self.coeff)

    def scale(self, f: Union[Expr, int]) -> "TwoForm":
        return TwoForm(self.coeff * f)

    def map(self, fn: Callable[[Expr], Expr]) -> "TwoForm":
        return TwoForm(fn(self.coeff))

    @property
    def comps(self) -> tuple[Expr, ...]:
        return (self.coeff,)


def wedge(a: Tensor, b: Tensor) -> TwoForm:
    return TwoForm(a[0] * b[1] - a[1] * b[0])


T = TypeVar("T", Expr, Tensor, TwoForm)


@dataclass(frozen=True)
class Graded(Generic[T]):
    """Value ``order0 + λ·order1`` in the truncation ring where λ² = 0."""

    order0: T
    order1: T

    def __add__(self, other: "Graded[T]") -> "Graded[T]":
        return Graded(self.order0 + other.order0, self.order1 + other.order1)

    def __sub__(self, other: "Graded[T]") -> "Graded[T]":
        return Graded(self.order0 - other.order0, self.order1 - other.order1)

    def __neg__(self) -> "Graded[T]":
        return Graded(-self.order0, -self.order1)

    def map(self, fn: Callable[[Expr], Expr]) -> "Graded[T]":
        if isinstance(self.order0, Expr):
            return Graded(fn(self.order0), fn(self.order1))
        return Graded(self.order0.map(fn), self.order1.map(fn))

    def components(self) -> Iterator[Expr]:
        for layer in (self.order0, self.order1):
            if isinstance(layer, Expr):
                yield layer
            else:
                yield from layer.comps


QScalar = Graded[Expr]
QOneForm = Graded[Tensor]
QTensor11 = Graded[Tensor]
QTensor111 = Graded[Tensor]
QTwoForm = Graded[TwoForm]


def classical(value: T) -> Graded[T]:
    """Embed a classical object with vanishing λ¹ layer."""
    if isinstance(value, Expr):
        return Graded(value, ZERO)
    if isinstance(value, TwoForm):
        return Graded(value, TwoForm(ZERO))
    return Graded(value, Tensor.zeros(value.rank))


def qscalar_mul(a: QScalar, b: QScalar, bracket: Expr) -> QScalar:
    """Product of graded scalars; ``bracket`` is the order-λ term of a0*b0."""
    return Graded(a.order0 * b.order0, a.order0 * b.order1 + a.order1 * b.order0 + bracket)
