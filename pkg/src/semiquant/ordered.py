"""Ordered-coefficient calculus for quantized tensors.

Here a rank-2 value X stands for Σ (X_{mn} dx^m) ⊗₁ dx^n, where ⊗₁ is the
quantized tensor product.  Moving a function across ⊗₁ costs an order-λ
correction, and that correction is tracked explicitly (see :func:`pair`).
This makes left and right star actions, the braiding and the connection
Leibniz rules exact to order λ, so they can be tested as identities.

For those identities to close, both curvature terms (in the braiding and in
∇_Q dx^i) must enter with the sign opposite to :mod:`semiquant.quantum`.
That is the default ``curvature_sign=-1`` here.
"""

from __future__ import annotations

from dataclasses import dataclass
from .classical import ClassicalData, d, d_function, d_oneform, nabla_direction, nabla_oneform, nabla_tensor2
from .expr import ZERO, Expr, as_expr
from .quantum import HALF, HTensor, alternate, h_tensor, quantize_connection, star_fn_form
from .tensors import DIM, Graded, QOneForm, QTensor11, QTensor111, QTwoForm, Tensor, basis_form, classical, indices


def _zero3() -> dict:
    return {idx: ZERO for idx in indices(3)}


def _tensor(rank: int, table: dict) -> Tensor:
    return Tensor(rank, tuple(table[i] for i in indices(rank)))


@dataclass
class OrderedCalculus:
    cd: ClassicalData
    curvature_sign: int = -1

    def __post_init__(self) -> None:
        self.connection = quantize_connection(self.cd, self.curvature_sign)
        self.H: HTensor = h_tensor(self.cd)

    # -- ⊗₁ and actions ---------------------------------------------------

    def pair(self, xi: QOneForm, eta: QOneForm) -> QTensor11:
        """ξ ⊗₁ η in ordered coefficients.

        Writing η = η_k dx^k, the function η_k must cross to the left of ⊗₁;
        that costs −½ω^{ab}η_{k,a}(∇_bξ ⊗ dx^k + ξ ⊗ ∇_b dx^k).
        """
        x0, e0 = xi.order0, eta.order0
        o1 = {(j, k): xi.order1[j] * e0[k] + x0[j] * eta.order1[k] for j, k in indices(2)}
        for k in range(DIM):
            for a, b, w in self.cd.omega.pairs():
                coef = w * d(e0[k], a)
                if coef.is_zero_literal:
                    continue
                nb_x = nabla_direction(self.cd.gamma, x0, b)
                nb_k = nabla_direction(self.cd.gamma, basis_form(k), b)
                for j in range(DIM):
                    o1[j, k] = o1[j, k] - HALF * coef * nb_x[j]
                    for m in range(DIM):
                        o1[j, m] = o1[j, m] - HALF * coef * x0[j] * nb_k[m]
        o0 = Tensor.build(2, lambda j, k: x0[j] * e0[k])
        return Graded(o0, _tensor(2, o1))

    def left(self, a: Expr, T: QTensor11) -> QTensor11:
        """a * T."""
        a = as_expr(a)
        o1 = T.order1.scale(a)
        for n in range(DIM):
            column = Tensor.build(1, lambda m: T.order0[m, n])
            corr = star_fn_form(self.cd, a, column).order1
            o1 = o1 + Tensor.build(2, lambda m, k: corr[m] if k == n else 0)
        return Graded(T.order0.scale(a), o1)

    def right(self, T: QTensor11, a: Expr) -> QTensor11:
        """T * a."""
        a = as_expr(a)
        total = Graded(Tensor.zeros(2), Tensor.zeros(2))
        for n in range(DIM):
            moved = star_fn_form(self.cd, a, basis_form(n), side="right")
            for m in range(DIM):
                for layer, coef in ((0, T.order0[m, n]), (1, T.order1[m, n])):
                    if coef.is_zero_literal:
                        continue
                    p = self.pair(classical(basis_form(m).scale(coef)), moved)
                    total = total + (p if layer == 0 else Graded(Tensor.zeros(2), p.order0))
        return total

    # -- braiding and connection ------------------------------------------

    def sigma(self, eta: QOneForm, xi: QOneForm) -> QTensor11:
        """σ_Q(η ⊗₁ ξ)."""
        flipped = self.pair(xi, eta)
        x0, e0, R = xi.order0, eta.order0, self.cd.riemann
        nx, ne = nabla_oneform(self.cd.gamma, x0), nabla_oneform(self.cd.gamma, e0)

        def extra(a: int, b: int) -> Expr:
            out = ZERO
            for i, j, w in self.cd.omega.pairs():
                out = out + w * nx[j, a] * ne[i, b]
                for s in range(DIM):
                    out = out + self.curvature_sign * w * x0[j] * e0[s] * R[s, b, a, i]
            return out

        return Graded(flipped.order0, flipped.order1 + Tensor.build(2, extra))

    def nabla_oneform(self, xi: QOneForm) -> QTensor11:
        """∇_Q ξ, using ∇_Q(f dx^m) = df ⊗₁ dx^m + f * ∇_Q dx^m."""
        gamma = self.cd.gamma
        o0, o1 = Tensor.zeros(2), Tensor.zeros(2)
        for m in range(DIM):
            f = xi.order0[m]
            if f.is_zero_literal:
                continue
            df = d_function(f)
            o0 = o0 + Tensor.build(2, lambda h, k: df[h] if k == m else 0)
            C = self.connection[m]
            scaled = self.left(f, Graded(C.order0, Tensor.zeros(2)))
            o0 = o0 + scaled.order0
            o1 = o1 + scaled.order1 + C.order1.scale(f)
            # df ⊗₁ dx^m carries the ordering correction of f moving left
            shift = Tensor.zeros(1)
            for a, b, w in self.cd.omega.pairs():
                coef = w * d(f, a)
                if not coef.is_zero_literal:
                    shift = shift - nabla_direction(gamma, basis_form(m), b).scale(HALF * coef)
            o1 = o1 + nabla_oneform(gamma, shift)
        o1 = o1 + nabla_oneform(gamma, xi.order1)
        return Graded(o0, o1)

    def nabla_tensor(self, T: QTensor11) -> QTensor111:
        """∇_Q(e ⊗₁ f) = ∇_Q e ⊗₁ f + (σ_Q ⊗ id)(e ⊗₁ ∇_Q f), index order (p, q, n)."""
        o0, o1 = _zero3(), _zero3()
        for n in range(DIM):
            e = Tensor.build(1, lambda m: T.order0[m, n])
            if e.is_structurally_zero():
                continue
            ne = self.nabla_oneform(classical(e))
            for (p, q), v in ne.order0.items():
                o0[p, q, n] = o0[p, q, n] + v
            for (p, q), v in ne.order1.items():
                o1[p, q, n] = o1[p, q, n] + v
            C = self.connection[n]
            for layer, coeffs in ((0, C.order0), (1, C.order1)):
                for (a, b), coef in coeffs.items():
                    if coef.is_zero_literal:
                        continue
                    s = self.sigma(classical(e), classical(basis_form(a).scale(coef)))
                    for (p, q), v in s.order0.items():
                        target = o0 if layer == 0 else o1
                        target[p, q, b] = target[p, q, b] + v
                    if layer == 0:
                        for (p, q), v in s.order1.items():
                            o1[p, q, b] = o1[p, q, b] + v
        for idx, v in nabla_tensor2(self.cd.gamma, T.order1).items():
            o1[idx] = o1[idx] + v
        return Graded(_tensor(3, o0), _tensor(3, o1))

    # -- wedge and torsion ------------------------------------------------

    def alternate(self, T: QTensor11) -> QTwoForm:
        return alternate(self.cd, self.H, T)

    def torsion(self, xi: QOneForm) -> QTwoForm:
        """∧₁∇_Q ξ − dξ evaluated directly."""
        w = self.alternate(self.nabla_oneform(xi))
        return Graded(w.order0 - d_oneform(xi.order0), w.order1 - d_oneform(xi.order1))


def ordered_nabla_g(
    cd: ClassicalData, T: QTensor11, curvature_sign: int = -1
) -> QTensor111:
    return OrderedCalculus(cd, curvature_sign).nabla_tensor(T)


__all__ = ["OrderedCalculus", "ordered_nabla_g"]
