"""First-order (semiclassical) quantization of a diagonal 2D metric.

Every quantized object is a :class:`Graded` pair ``(order0, order1)``.  λ is
never a symbol: it is the grading itself, and λ² terms are never formed.

Rank-2 results are written on the basis dx^m ⊗₁ dx^n with the classical
coefficient attached to the first factor.  Products of coefficient functions
inside the connection and braiding formulas are taken pointwise, which is the
coordinate notation in which the closed forms below are stated.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .classical import (
    ClassicalData,
    SymplecticInverse,
    d,
    d_oneform,
    nabla_oneform,
    nabla_tensor2,
    nabla_twoform,
)
from .expr import ZERO, Expr, as_expr
from .oracle import OracleConfig, ZeroVerdict, is_zero
from .tensors import (
    DIM,
    Graded,
    QOneForm,
    QScalar,
    QTensor11,
    QTensor111,
    QTwoForm,
    Tensor,
    TwoForm,
    basis_form,
    classical,
    indices,
    wedge,
)

HALF = as_expr(1) / 2


# -- functions and 1-forms -------------------------------------------------

def poisson_bracket(a: Expr, b: Expr, omega: SymplecticInverse) -> Expr:
    """{a, b} = ω^{ij} ∂_i a ∂_j b."""
    return omega.omega12 * (d(a, 0) * d(b, 1) - d(a, 1) * d(b, 0))


def star_fn(a: Union[Expr, int], b: Union[Expr, int], omega: SymplecticInverse) -> QScalar:
    a, b = as_expr(a), as_expr(b)
    return Graded(a * b, HALF * poisson_bracket(a, b, omega))


def star_commutator(a: Expr, b: Expr, omega: SymplecticInverse) -> QScalar:
    return Graded(ZERO, poisson_bracket(as_expr(a), as_expr(b), omega))


def star_q(a: QScalar, b: QScalar, omega: SymplecticInverse) -> QScalar:
    """Star product of graded scalars, truncated at λ²."""
    return Graded(
        a.order0 * b.order0,
        a.order0 * b.order1 + a.order1 * b.order0 + HALF * poisson_bracket(a.order0, b.order0, omega),
    )


def hamiltonian_derivative(cd: ClassicalData, a: Expr, xi: Tensor) -> Tensor:
    """∇_â ξ = ω^{ij} a_{,i} ∇_j ξ."""
    nx = nabla_oneform(cd.gamma, xi)
    return Tensor.build(
        1,
        lambda k: sum((w * d(a, i) * nx[j, k] for i, j, w in cd.omega.pairs()), ZERO),
    )


def star_fn_form(cd: ClassicalData, a: Union[Expr, int], xi: Tensor, side: str = "left") -> QOneForm:
    """a * ξ (``side="left"``) or ξ * a (``side="right"``)."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    a = as_expr(a)
    corr = hamiltonian_derivative(cd, a, xi).scale(HALF)
    return Graded(xi.scale(a), corr if side == "left" else -corr)


def star_fn_twoform(cd: ClassicalData, a: Union[Expr, int], theta: TwoForm, side: str = "left") -> QTwoForm:
    """a * θ or θ * a for a 2-form θ."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    a = as_expr(a)
    nt = nabla_twoform(cd.gamma, theta)
    corr = sum((HALF * w * d(a, i) * nt[j] for i, j, w in cd.omega.pairs()), ZERO)
    return Graded(theta.scale(a), TwoForm(corr if side == "left" else -corr))


# -- H^{ij}, wedge and Ricci form ------------------------------------------

@dataclass(frozen=True)
class HTensor:
    """H^{ij} as dx∧dy coefficients, h[i, j]."""

    h: Tensor

    def __getitem__(self, ij: tuple[int, int]) -> Expr:
        return self.h[ij]


def h_tensor(cd: ClassicalData) -> HTensor:
    """H^{ij} = −½ ω^{is} R^j_{nms} dx^m∧dx^n (torsion-free background)."""
    R, w = cd.riemann, cd.omega

    def comp(i: int, j: int) -> Expr:
        return sum((-HALF * w(i, s) * (R[j, 1, 0, s] - R[j, 0, 1, s]) for s in range(DIM)), ZERO)

    return HTensor(Tensor.build(2, comp))


def _wedge_correction(cd: ClassicalData, H: HTensor, xi: Tensor, eta: Tensor) -> Expr:
    nx, ne = nabla_oneform(cd.gamma, xi), nabla_oneform(cd.gamma, eta)
    out = ZERO
    for i, j, w in cd.omega.pairs():
        row_x = Tensor.build(1, lambda k: nx[i, k])
        row_e = Tensor.build(1, lambda k: ne[j, k])
        out = out + HALF * w * wedge(row_x, row_e).coeff
    for i, j in indices(2):
        out = out + H[i, j] * xi[i] * eta[j]
    return out


def quantum_wedge(cd: ClassicalData, H: HTensor, xi: QOneForm, eta: QOneForm) -> QTwoForm:
    """ξ ∧₁ η = ξ∧η + (λ/2)ω^{ij}∇_iξ∧∇_jη + λH^{ij}ξ_iη_j."""
    x0, e0 = xi.order0, eta.order0
    order1 = wedge(x0, eta.order1) + wedge(xi.order1, e0) + TwoForm(_wedge_correction(cd, H, x0, e0))
    return Graded(wedge(x0, e0), order1)


def wedge_table(cd: ClassicalData, H: HTensor) -> dict[tuple[int, int], QTwoForm]:
    return {
        (i, j): quantum_wedge(cd, H, classical(basis_form(i)), classical(basis_form(j)))
        for i, j in indices(2)
    }


def alternate(cd: ClassicalData, H: HTensor, T: QTensor11) -> QTwoForm:
    """∧₁ applied to Σ (T_{mn} dx^m) ⊗₁ dx^n."""
    order0, order1 = ZERO, ZERO
    for (m, n), f in T.order0.items():
        if f.is_zero_literal:
            continue
        w = quantum_wedge(cd, H, classical(basis_form(m).scale(f)), classical(basis_form(n)))
        order0 = order0 + w.order0.coeff
        order1 = order1 + w.order1.coeff
    order1 = order1 + T.order1[0, 1] - T.order1[1, 0]
    return Graded(TwoForm(order0), TwoForm(order1))


def generalized_ricci(H: HTensor, cd: ClassicalData) -> TwoForm:
    """𝓡 = H^{ij} g_{ij}."""
    g = cd.metric.tensor
    return TwoForm(sum((H[i, j] * g[i, j] for i, j in indices(2)), ZERO))


# -- quantized metric ------------------------------------------------------

def quantize_metric_gQ(cd: ClassicalData) -> QTensor11:
    """g_Q with λ¹ coefficients ½ ω^{ij} g_{pm} Γ^p_{iq} Γ^q_{jn}."""
    g, G = cd.metric.tensor, cd.gamma

    def comp(m: int, n: int) -> Expr:
        out = ZERO
        for i, j, w in cd.omega.pairs():
            for p, q in indices(2):
                out = out + HALF * w * g[p, m] * G[p, i, q] * G[q, j, n]
        return out

    return Graded(g, Tensor.build(2, comp))


def antisymmetric_lift(s: TwoForm) -> Tensor:
    """q⁻¹ of σ dx∧dy: ½σ(dx⊗dy − dy⊗dx)."""
    half = HALF * s.coeff
    return Tensor.build(2, lambda m, n: half if (m, n) == (0, 1) else -half if (m, n) == (1, 0) else 0)


def quantize_metric_g1(gQ: QTensor11, ricci: TwoForm) -> QTensor11:
    """g₁ = g_Q − λ q⁻¹𝓡."""
    return Graded(gQ.order0, gQ.order1 - antisymmetric_lift(ricci))


# -- quantized connection and braiding -------------------------------------

def quantize_connection(cd: ClassicalData, curvature_sign: int = 1) -> tuple[QTensor11, QTensor11]:
    """(∇_Q dx, ∇_Q dy).

    ∇_Q dx^i = −Γ^i_{mn} − (λ/2)ω^{sj}(∂_sΓ^i_{mk}Γ^k_{jn} − Γ^i_{kt}Γ^k_{sm}Γ^t_{jn}
    − Γ^i_{sk}R^k_{nmj}) dx^m ⊗₁ dx^n.  ``curvature_sign`` multiplies the last
    term; −1 gives the variant used by :mod:`semiquant.ordered`.
    """
    G, R = cd.gamma, cd.riemann

    def layer1(i: int) -> Tensor:
        def comp(m: int, n: int) -> Expr:
            out = ZERO
            for s, j, w in cd.omega.pairs():
                bracket = ZERO
                for k in range(DIM):
                    bracket = bracket + d(G[i, m, k], s) * G[k, j, n] - curvature_sign * G[i, s, k] * R[k, n, m, j]
                    for t in range(DIM):
                        bracket = bracket - G[i, k, t] * G[k, s, m] * G[t, j, n]
                out = out - HALF * w * bracket
            return out

        return Tensor.build(2, comp)

    return tuple(
        Graded(Tensor.build(2, lambda m, n, i=i: -G[i, m, n]), layer1(i)) for i in range(DIM)
    )


def _braid_correction(cd: ClassicalData, eta: Tensor, xi: Tensor, curvature_sign: int) -> Tensor:
    """λ¹ part of σ_Q(η ⊗ ξ) beyond the flip."""
    nx, ne, R = nabla_oneform(cd.gamma, xi), nabla_oneform(cd.gamma, eta), cd.riemann

    def comp(a: int, b: int) -> Expr:
        out = ZERO
        for i, j, w in cd.omega.pairs():
            out = out + w * nx[j, a] * ne[i, b]
            for s in range(DIM):
                out = out + curvature_sign * w * xi[j] * eta[s] * R[s, b, a, i]
        return out

    return Tensor.build(2, comp)


def _flip(a: Tensor, b: Tensor) -> Tensor:
    """b ⊗ a as a rank-2 tensor."""
    return Tensor.build(2, lambda m, n: b[m] * a[n])


def sigma_Q(cd: ClassicalData, eta: QOneForm, xi: QOneForm, curvature_sign: int = 1) -> QTensor11:
    """σ_Q(η ⊗₁ ξ) = ξ ⊗₁ η + λω^{ij}∇_jξ ⊗ ∇_iη + λω^{ij}ξ_jη_sR^s_{nki} dx^k ⊗ dx^n."""
    e0, x0 = eta.order0, xi.order0
    order1 = (
        _flip(e0, xi.order1)
        + _flip(eta.order1, x0)
        + _braid_correction(cd, e0, x0, curvature_sign)
    )
    return Graded(_flip(e0, x0), order1)


def nabla_Q_tensor(
    cd: ClassicalData,
    T: QTensor11,
    curvature_sign: int = 1,
) -> QTensor111:
    """∇_Q(e ⊗ f) = ∇_Q e ⊗ f + (σ_Q ⊗ id)(e ⊗ ∇_Q f) in coefficient notation.

    Result index order is (direction, m, n).  The λ¹ layer of ``T`` is
    differentiated classically.  ``curvature_sign`` applies to both the
    connection and the braiding.
    """
    C = quantize_connection(cd, curvature_sign)
    o0: dict[tuple[int, int, int], Expr] = {idx: ZERO for idx in indices(3)}
    o1: dict[tuple[int, int, int], Expr] = {idx: ZERO for idx in indices(3)}

    def bump(layer, p, q, b, v):
        layer[p, q, b] = layer[p, q, b] + v

    for (m, n), f in T.order0.items():
        if f.is_zero_literal:
            continue
        for h in range(DIM):
            bump(o0, h, m, n, d(f, h))
        for (a, b), c0 in C[m].order0.items():
            bump(o0, a, b, n, f * c0)
        for (a, b), c1 in C[m].order1.items():
            bump(o1, a, b, n, f * c1)
        eta = basis_form(m).scale(f)
        for layer_index, layer in enumerate((C[n].order0, C[n].order1)):
            for (a, b), coef in layer.items():
                if coef.is_zero_literal:
                    continue
                s = sigma_Q(cd, classical(eta), classical(basis_form(a).scale(coef)), curvature_sign)
                for (p, q), v in s.order0.items():
                    bump(o0 if layer_index == 0 else o1, p, q, b, v)
                if layer_index == 0:
                    for (p, q), v in s.order1.items():
                        bump(o1, p, q, b, v)
    extra = nabla_tensor2(cd.gamma, T.order1)
    for idx, v in extra.items():
        o1[idx] = o1[idx] + v
    return Graded(Tensor(3, tuple(o0[i] for i in indices(3))), Tensor(3, tuple(o1[i] for i in indices(3))))


# -- Ricci derivative, torsion, cotorsion ----------------------------------

def nabla_ricci_form(cd: ClassicalData, ricci: TwoForm) -> Tensor:
    """Coefficients of dx^h ⊗ dx∧dy in ∇𝓡."""
    return nabla_twoform(cd.gamma, ricci)


def torsion_tensor(cd: ClassicalData) -> Tensor:
    """T^j_{nm} = Γ^j_{nm} − Γ^j_{mn}, indexed (j, n, m)."""
    G = cd.gamma
    return Tensor.build(3, lambda j, n, m: G[j, n, m] - G[j, m, n])


def _nabla_torsion(cd: ClassicalData, T: Tensor) -> Tensor:
    """∇_s T^j_{nm}, indexed (s, j, n, m)."""
    G = cd.gamma

    def comp(s: int, j: int, n: int, m: int) -> Expr:
        out = d(T[j, n, m], s)
        for p in range(DIM):
            out = out + G[j, s, p] * T[p, n, m] - G[p, s, n] * T[j, p, m] - G[p, s, m] * T[j, n, p]
        return out

    return Tensor.build(4, comp)


def quantum_torsion(cd: ClassicalData, xi: Tensor) -> QTwoForm:
    """T_{∇_Q}(ξ) = T(ξ) − (λ/4)(∂_j⌟∇_iξ) ω^{is} (∇_s T^j_{nm}) dx^m∧dx^n."""
    nx = nabla_oneform(cd.gamma, xi)
    classical_torsion = TwoForm(nx[0, 1] - nx[1, 0]) - d_oneform(xi)
    dT = _nabla_torsion(cd, torsion_tensor(cd))
    order1 = ZERO
    for i, s, w in cd.omega.pairs():
        for j in range(DIM):
            if nx[i, j].is_zero_literal:
                continue
            # dx^m∧dx^n summed: (m, n) = (0, 1) minus (1, 0)
            form = dT[s, j, 1, 0] - dT[s, j, 0, 1]
            order1 = order1 - as_expr(1) / 4 * nx[i, j] * w * form
    return Graded(classical_torsion, TwoForm(order1))


def cotorsion(nabla_ricci: Tensor) -> Graded[Expr]:
    """−λ(∧ ⊗ id)∇𝓡 as the coefficient of a 3-form.

    Each term is r_h dx^h∧dx∧dy, and every 3-form vanishes in two dimensions,
    so the coefficient is zero whatever ``nabla_ricci`` is.
    """
    del nabla_ricci
    return Graded(ZERO, ZERO)


class ConnectionClass(str, Enum):
    QUANTUM_LEVI_CIVITA = "quantum-levi-civita"
    WEAK_QUANTUM_LEVI_CIVITA = "weak-quantum-levi-civita"
    NEITHER = "neither"


@dataclass(frozen=True)
class Classification:
    kind: ConnectionClass
    nabla_ricci: tuple[ZeroVerdict, ...]
    torsion: tuple[ZeroVerdict, ...]
    cotorsion: ZeroVerdict


def classify(
    nabla_ricci: Tensor,
    cotorsion_value: Graded[Expr],
    torsion_values: list[QTwoForm],
    cfg: Optional[OracleConfig] = None,
) -> Classification:
    nr = tuple(is_zero(c, cfg) for c in nabla_ricci.comps)
    tv = tuple(is_zero(c, cfg) for t in torsion_values for c in (t.order0.coeff, t.order1.coeff))
    ct = is_zero(cotorsion_value.order1, cfg)
    if all(v.is_zero for v in nr):
        kind = ConnectionClass.QUANTUM_LEVI_CIVITA
    elif ct.is_zero and all(v.is_zero for v in tv):
        kind = ConnectionClass.WEAK_QUANTUM_LEVI_CIVITA
    else:
        kind = ConnectionClass.NEITHER
    return Classification(kind, nr, tv, ct)


# -- whole pipeline --------------------------------------------------------

@dataclass(frozen=True)
class QuantumData:
    H: HTensor
    gQ: QTensor11
    ricci: TwoForm
    g1: QTensor11
    nabla_dx: QTensor11
    nabla_dy: QTensor11
    wedges: dict
    nabla_ricci: Tensor
    torsion: tuple[QTwoForm, QTwoForm]
    cotorsion: Graded[Expr]
    classification: Classification

    @classmethod
    def compute(cls, cd: ClassicalData, cfg: Optional[OracleConfig] = None) -> "QuantumData":
        H = h_tensor(cd)
        gQ = quantize_metric_gQ(cd)
        ricci = generalized_ricci(H, cd)
        check = alternate(cd, H, gQ).order1 - ricci
        verdict = is_zero(check.coeff, cfg)
        if not verdict.is_zero:
            raise ArithmeticError(f"alternation of g_Q differs from the Ricci form: {verdict.as_dict()}")
        g1 = quantize_metric_g1(gQ, ricci)
        ndx, ndy = quantize_connection(cd)
        nr = nabla_ricci_form(cd, ricci)
        tors = tuple(quantum_torsion(cd, basis_form(i)) for i in range(DIM))
        cot = cotorsion(nr)
        return cls(
            H, gQ, ricci, g1, ndx, ndy, wedge_table(cd, H), nr, tors, cot,
            classify(nr, cot, list(tors), cfg),
        )
