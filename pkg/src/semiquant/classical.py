"""Classical Riemannian geometry of a diagonal metric E(y)dx⊗dx + G(y)dy⊗dy."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

from .expr import ZERO, Expr, as_expr, differentiate, free_symbols, power, sqrt
from .oracle import OracleConfig, ZeroVerdict, is_zero, sample_points
from .tensors import DIM, Tensor, TwoForm, indices

COORDS = ("x", "y")


def d(f: Expr, i: int) -> Expr:
    """Partial derivative along coordinate ``i``."""
    return differentiate(f, COORDS[i])


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Metric2D:
    g11: Expr
    g22: Expr

    def __post_init__(self) -> None:
        for comp in (self.g11, self.g22):
            if comp.is_zero_literal:
                raise GeometryError("metric component is structurally zero")
            if not differentiate(comp, "x").is_zero_literal:
                raise GeometryError("metric components must depend on y only")

    @classmethod
    def of(cls, E: Union[Expr, int], G: Union[Expr, int]) -> "Metric2D":
        return cls(as_expr(E), as_expr(G))

    @cached_property
    def tensor(self) -> Tensor:
        return Tensor.build(2, lambda i, j: (self.g11 if i == 0 else self.g22) if i == j else 0)

    @cached_property
    def inverse(self) -> Tensor:
        return Tensor.build(2, lambda i, j: (power(self.g11, -1) if i == 0 else power(self.g22, -1)) if i == j else 0)

    def check_positive(self, cfg: Optional[OracleConfig] = None) -> bool:
        cfg = cfg or OracleConfig()
        for comp in (self.g11, self.g22):
            names = sorted(free_symbols(comp))
            for _, value in sample_points(names, cfg, comp):
                if value <= 0:
                    return False
        return True


def christoffel(g: Metric2D) -> Tensor:
    """Γ^i_{jk} as a rank-3 tensor indexed (i, j, k)."""
    gt, gi = g.tensor, g.inverse

    def gamma(i: int, j: int, k: int) -> Expr:
        total = ZERO
        for l in range(DIM):
            if gi[i, l].is_zero_literal:
                continue
            total = total + gi[i, l] * (d(gt[k, l], j) + d(gt[j, l], k) - d(gt[j, k], l))
        return total / 2

    return Tensor.build(3, gamma)


def riemann(gamma: Tensor) -> Tensor:
    """R^i_{jkl} = ∂_kΓ^i_{lj} − ∂_lΓ^i_{kj} + Γ^m_{lj}Γ^i_{km} − Γ^m_{kj}Γ^i_{lm}."""

    def comp(i: int, j: int, k: int, l: int) -> Expr:
        out = d(gamma[i, l, j], k) - d(gamma[i, k, j], l)
        for m in range(DIM):
            out = out + gamma[m, l, j] * gamma[i, k, m] - gamma[m, k, j] * gamma[i, l, m]
        return out

    return Tensor.build(4, comp)


def scalar_curvature(g: Metric2D, R: Tensor) -> Expr:
    """R = g^{ij} R^k_{ikj}."""
    gi = g.inverse
    out = ZERO
    for i, j, k in indices(3):
        if not gi[i, j].is_zero_literal:
            out = out + gi[i, j] * R[k, i, k, j]
    return out


@dataclass(frozen=True)
class SymplecticInverse:
    """ω^{12} with ω^{21} = −ω^{12}; ``scale`` is the integration constant."""

    omega12: Expr
    scale: Expr

    def __call__(self, i: int, j: int) -> Expr:
        if i == j:
            return ZERO
        return self.omega12 if (i, j) == (0, 1) else -self.omega12

    def pairs(self):
        """Nonzero (i, j, ω^{ij}) triples."""
        return ((0, 1, self.omega12), (1, 0, -self.omega12))


def poisson_residuals(omega: SymplecticInverse, gamma: Tensor) -> list[Expr]:
    """∂_n ω^{ij} + ω^{iq}Γ^j_{qn} + ω^{qj}Γ^i_{qn} for all (i, j, n)."""
    out = []
    for i, j, n in indices(3):
        r = d(omega(i, j), n)
        for q in range(DIM):
            r = r + omega(i, q) * gamma[j, q, n] + omega(q, j) * gamma[i, q, n]
        out.append(r)
    return out


def poisson_omega(
    gamma: Tensor,
    g: Metric2D,
    scale: Union[Expr, int] = 1,
    cfg: Optional[OracleConfig] = None,
) -> SymplecticInverse:
    """Poisson-compatible ω^{12} = k/√(E·G) for the diagonal y-only class."""
    k = as_expr(scale)
    omega = SymplecticInverse(k * power(sqrt(g.g11 * g.g22), -1), k)
    for r in poisson_residuals(omega, gamma):
        verdict = is_zero(r, cfg)
        if not verdict.is_zero:
            raise GeometryError(f"Poisson compatibility fails: residual {r} ({verdict.status.value})")
    return omega


def nabla_oneform(gamma: Tensor, xi: Tensor) -> Tensor:
    """(∇ξ)_{hk} = ∂_h ξ_k − ξ_i Γ^i_{hk}; first index is the direction."""

    def comp(h: int, k: int) -> Expr:
        out = d(xi[k], h)
        for i in range(DIM):
            out = out - xi[i] * gamma[i, h, k]
        return out

    return Tensor.build(2, comp)


def nabla_direction(gamma: Tensor, xi: Tensor, b: int) -> Tensor:
    """∇_b ξ as a 1-form."""
    full = nabla_oneform(gamma, xi)
    return Tensor.build(1, lambda k: full[b, k])


def nabla_tensor2(gamma: Tensor, T: Tensor) -> Tensor:
    """(∇T)_{ijk} = ∂_i T_{jk} − T_{lk}Γ^l_{ij} − T_{jl}Γ^l_{ik}."""

    def comp(i: int, j: int, k: int) -> Expr:
        out = d(T[j, k], i)
        for l in range(DIM):
            out = out - T[l, k] * gamma[l, i, j] - T[j, l] * gamma[l, i, k]
        return out

    return Tensor.build(3, comp)


def nabla_twoform(gamma: Tensor, s: TwoForm) -> Tensor:
    """∇(σ dx∧dy) as the coefficients of dx^j ⊗ dx∧dy."""
    return Tensor.build(1, lambda j: d(s.coeff, j) - s.coeff * (gamma[0, j, 0] + gamma[1, j, 1]))


def d_function(f: Expr) -> Tensor:
    return Tensor.build(1, lambda i: d(f, i))


def d_oneform(xi: Tensor) -> TwoForm:
    return TwoForm(d(xi[1], 0) - d(xi[0], 1))


def torsion_residuals(gamma: Tensor) -> list[Expr]:
    return [gamma[i, j, k] - gamma[i, k, j] for i, j, k in indices(3) if j < k]


def compatibility_residuals(g: Metric2D, gamma: Tensor) -> list[Expr]:
    return nabla_tensor2(gamma, g.tensor).comps


@dataclass(frozen=True)
class ClassicalData:
    metric: Metric2D
    gamma: Tensor
    riemann: Tensor
    scalar: Expr
    omega: SymplecticInverse

    @classmethod
    def compute(
        cls,
        E: Union[Expr, int],
        G: Union[Expr, int],
        omega_scale: Union[Expr, int] = 1,
        cfg: Optional[OracleConfig] = None,
    ) -> "ClassicalData":
        g = Metric2D.of(E, G)
        gamma = christoffel(g)
        R = riemann(gamma)
        return cls(g, gamma, R, scalar_curvature(g, R), poisson_omega(gamma, g, omega_scale, cfg))


def verdicts(exprs, cfg: Optional[OracleConfig] = None) -> list[ZeroVerdict]:
    return [is_zero(e, cfg) for e in exprs]


__all__ = [
    "ClassicalData",
    "GeometryError",
    "Metric2D",
    "SymplecticInverse",
    "christoffel",
    "compatibility_residuals",
    "d",
    "d_function",
    "d_oneform",
    "nabla_direction",
    "nabla_oneform",
    "nabla_tensor2",
    "nabla_twoform",
    "poisson_omega",
    "poisson_residuals",
    "riemann",
    "scalar_curvature",
    "torsion_residuals",
    "verdicts",
]
