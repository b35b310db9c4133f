"""Operator classes, their closed-form powers and both sides of a relation.

Every operator here is a weighted composition x(t) -> a(t) * x(u(t)) with
an affine map u, so a composition of operators, a power or a formal sum
sum_j delta_j A^j reduces to a finite list of (map, weight) groups. That
list is the normal form the symbolic deciders compare.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Tuple, Union

import numpy as np

from core.funcalg import (
    IntervalSet,
    Interval,
    PiecewiseExpr,
    Piece,
    AtomicExpr,
    Polynomial,
    compose_affine,
    expr_add,
    expr_mul,
    expr_product,
    expr_scale,
)

__all__ = [
    'AffineMap', 'iterate', 'Polynomial',
    'PiecewiseMult', 'Mult', 'WeightedComposition', 'PointEval', 'TranslateDilate',
    'Identity', 'Product', 'LinearCombination', 'MapGroup', 'RelationSides',
    'AB_BFA', 'BA_FAB', 'apply', 'power', 'relation_sides', 'normal_form',
    'as_weighted_composition', 'integer_cells', 'coefficient_expr',
]

AB_BFA = 'AB=BF(A)'
BA_FAB = 'BA=F(A)B'

MAP_TOL = 1e-12


@dataclass(frozen=True)
class AffineMap:
    """u(t) = slope * t + intercept."""

    slope: float = 1.0
    intercept: float = 0.0

    @classmethod
    def identity(cls) -> 'AffineMap':
        return cls(1.0, 0.0)

    @classmethod
    def constant(cls, value: float) -> 'AffineMap':
        return cls(0.0, float(value))

    def __call__(self, t):
        return self.slope * np.asarray(t, dtype=float) + self.intercept

    def compose(self, inner: 'AffineMap') -> 'AffineMap':
        """self(inner(t))."""
        return AffineMap(self.slope * inner.slope,
                         self.slope * inner.intercept + self.intercept)

    def is_close(self, other: 'AffineMap', tol: float = MAP_TOL) -> bool:
        return (abs(self.slope - other.slope) <= tol * max(1.0, abs(self.slope))
                and abs(self.intercept - other.intercept) <= tol * max(1.0, abs(self.intercept)))

    def is_identity(self) -> bool:
        return self.is_close(AffineMap.identity())

    def __str__(self) -> str:
        if self.slope == 0:
            return f"{self.intercept:g}"
        slope = '' if self.slope == 1 else ('-' if self.slope == -1 else f"{self.slope:g}*")
        if self.intercept == 0:
            return f"{slope}t"
        sign = '+' if self.intercept > 0 else '-'
        return f"{slope}t {sign} {abs(self.intercept):g}"


def iterate(map: AffineMap, m: int) -> AffineMap:
    """m-fold self composition of an affine map, in closed form."""
    if m < 0:
        raise ValueError("Iteration count must be nonnegative")
    if m == 0:
        return AffineMap.identity()
    s, c = map.slope, map.intercept
    if s == 1:
        return AffineMap(1.0, m * c)
    return AffineMap(s ** m, c * (s ** m - 1) / (s - 1))


Coefficient = Union[float, str]


def coefficient_expr(alphas, parts) -> PiecewiseExpr:
    """sum_i alphas[i] * I_{parts[i]}(t) as a piecewise constant."""
    return PiecewiseExpr(tuple(
        Piece(part, AtomicExpr.constant(alpha)) for alpha, part in zip(alphas, parts)
    )).pruned()


def _free(alphas) -> Tuple[str, ...]:
    return tuple(a for a in alphas if isinstance(a, str))


@dataclass(frozen=True)
class PiecewiseMult:
    """(Ax)(t) = sum_i alphas[i] * a(t) * I_{parts[i]}(t) * x(t).

    Coefficients may be parameter names when the operator is a search
    template; substitute() makes it concrete.
    """

    alphas: Tuple[Coefficient, ...]
    parts: Tuple[IntervalSet, ...]
    weight: PiecewiseExpr = field(default_factory=lambda: PiecewiseExpr.constant(1.0))

    def free_parameters(self) -> Tuple[str, ...]:
        return _free(self.alphas)

    def substitute(self, values: dict) -> 'PiecewiseMult':
        alphas = tuple(values[a] if isinstance(a, str) else a for a in self.alphas)
        return PiecewiseMult(alphas, self.parts, self.weight)

    def coefficient_expr(self) -> PiecewiseExpr:
        return coefficient_expr(self.alphas, self.parts)

    def total_weight(self) -> PiecewiseExpr:
        return expr_mul(self.weight, self.coefficient_expr())


@dataclass(frozen=True)
class Mult:
    """(Ax)(t) = a(t) * x(t)."""

    weight: PiecewiseExpr


@dataclass(frozen=True)
class WeightedComposition:
    """(Ax)(t) = a(t) * x(map(t))."""

    weight: PiecewiseExpr
    map: AffineMap


@dataclass(frozen=True)
class PointEval:
    """(Ax)(t) = a(t) * x(gamma)."""

    weight: PiecewiseExpr
    gamma: float


@dataclass(frozen=True)
class TranslateDilate:
    """(Ax)(t) = sum_i alphas[i] * I_{parts[i]}(t) * x(scale*t - shift).

    Covers the translation x(t-1) (scale 1, shift 1) and the dilation
    beta*x(gamma*t) (a single part equal to the real line).
    """

    alphas: Tuple[float, ...]
    parts: Tuple[IntervalSet, ...]
    shift: float = 0.0
    scale: float = 1.0

    @classmethod
    def translation(cls, alpha: float = 1.0, shift: float = 1.0) -> 'TranslateDilate':
        return cls((alpha,), (IntervalSet.real_line(),), shift, 1.0)

    @classmethod
    def dilation(cls, beta: float, gamma: float) -> 'TranslateDilate':
        return cls((beta,), (IntervalSet.real_line(),), 0.0, gamma)

    @property
    def map(self) -> AffineMap:
        return AffineMap(self.scale, -self.shift)

    def coefficient_expr(self) -> PiecewiseExpr:
        return coefficient_expr(self.alphas, self.parts)

    def uniform_coefficient(self):
        """The single coefficient applying on the whole line, else None."""
        if not self.alphas or any(a != self.alphas[0] for a in self.alphas):
            return None
        covered = IntervalSet.empty()
        for part in self.parts:
            covered = covered.union(part)
        if covered.complement().is_null():
            return float(self.alphas[0])
        return None


OperatorSpec = Union[PiecewiseMult, Mult, WeightedComposition, PointEval, TranslateDilate]


@dataclass(frozen=True)
class Identity:
    """x -> x."""


@dataclass(frozen=True)
class Product:
    """left(right(x)); right is applied first."""

    left: object
    right: object


@dataclass(frozen=True)
class LinearCombination:
    terms: Tuple[Tuple[float, object], ...] = ()


@dataclass(frozen=True)
class MapGroup:
    """One term a(t) * x(map(t)) of a normal form."""

    map: AffineMap
    weight: PiecewiseExpr


def apply(A, x: Callable, t):
    """Apply an operator (or composition of operators) to x at t.

    Args:
        A: Operator class instance or abstract composition
        x: Vectorized callable real -> real
        t: Point or array of points

    Returns:
        (Ax)(t), same shape as t
    """
    t = np.asarray(t, dtype=float)
    if isinstance(A, Identity):
        return np.asarray(x(t), dtype=float) + np.zeros(t.shape)
    if isinstance(A, Product):
        inner = lambda s: apply(A.right, x, s)
        return apply(A.left, inner, t)
    if isinstance(A, LinearCombination):
        total = np.zeros(t.shape)
        for coef, op in A.terms:
            total = total + coef * apply(op, x, t)
        return total
    if isinstance(A, PiecewiseMult):
        return A.total_weight()(t) * x(t)
    if isinstance(A, Mult):
        return A.weight(t) * x(t)
    if isinstance(A, WeightedComposition):
        return A.weight(t) * x(A.map(t))
    if isinstance(A, PointEval):
        return A.weight(t) * np.asarray(x(np.asarray(A.gamma, dtype=float)), dtype=float).item()
    if isinstance(A, TranslateDilate):
        return A.coefficient_expr()(t) * x(A.map(t))
    raise TypeError(f"Not an operator: {type(A).__name__}")


def as_weighted_composition(A: OperatorSpec) -> WeightedComposition:
    """Rewrite any operator class as a(t) * x(u(t))."""
    if isinstance(A, WeightedComposition):
        return A
    if isinstance(A, Mult):
        return WeightedComposition(A.weight, AffineMap.identity())
    if isinstance(A, PiecewiseMult):
        return WeightedComposition(A.total_weight(), AffineMap.identity())
    if isinstance(A, PointEval):
        return WeightedComposition(A.weight, AffineMap.constant(A.gamma))
    if isinstance(A, TranslateDilate):
        return WeightedComposition(A.coefficient_expr(), A.map)
    raise TypeError(f"Not an operator: {type(A).__name__}")


def _composition_power(A: WeightedComposition, m: int) -> WeightedComposition:
    factors = [compose_affine(A.weight, *_coeffs(iterate(A.map, k))) for k in range(m)]
    return WeightedComposition(expr_product(factors), iterate(A.map, m))


def _coeffs(map: AffineMap) -> Tuple[float, float]:
    return map.slope, map.intercept


def power(A: OperatorSpec, m: int) -> OperatorSpec:
    """A^m in closed form.

    Raises:
        ExprClassOverflow: if the weight product leaves the expression class
    """
    if m < 1:
        raise ValueError("Power must be at least 1")
    if m == 1:
        return A
    if isinstance(A, Mult):
        return Mult(expr_product([A.weight] * m))
    if isinstance(A, PiecewiseMult):
        # Parts are pairwise null-intersecting, so cross terms vanish a.e.
        return PiecewiseMult(tuple(a ** m for a in A.alphas), A.parts,
                             expr_product([A.weight] * m))
    if isinstance(A, PointEval):
        return PointEval(expr_scale(A.weight, float(A.weight(A.gamma)) ** (m - 1)), A.gamma)
    if isinstance(A, WeightedComposition):
        return _composition_power(A, m)
    if isinstance(A, TranslateDilate):
        alpha = A.uniform_coefficient()
        if alpha is not None:
            mapped = iterate(A.map, m)
            return TranslateDilate((alpha ** m,), (IntervalSet.real_line(),),
                                   -mapped.intercept, mapped.slope)
        return _composition_power(as_weighted_composition(A), m)
    raise TypeError(f"Not an operator: {type(A).__name__}")


def relation_sides(A: OperatorSpec, B: OperatorSpec, F: Polynomial,
                   form: str = AB_BFA) -> 'RelationSides':
    """Both sides of AB = BF(A) or BA = F(A)B as abstract compositions.

    F(A) is the formal sum sum_j delta_j A^j with A^0 the identity.
    """
    if form not in (AB_BFA, BA_FAB):
        raise ValueError(f"Unknown relation form: {form}")
    terms = []
    for j, delta in enumerate(F.coeffs):
        if delta == 0:
            continue
        Aj = Identity() if j == 0 else power(A, j)
        terms.append((delta, Product(B, Aj) if form == AB_BFA else Product(Aj, B)))
    lhs = Product(A, B) if form == AB_BFA else Product(B, A)
    return RelationSides(lhs, LinearCombination(tuple(terms)), form)


def _merge(groups) -> Tuple[MapGroup, ...]:
    merged = []
    for group in groups:
        for i, existing in enumerate(merged):
            if existing.map.is_close(group.map):
                merged[i] = MapGroup(existing.map, expr_add(existing.weight, group.weight))
                break
        else:
            merged.append(group)
    return tuple(merged)


def normal_form(A) -> Tuple[MapGroup, ...]:
    """Reduce an operator expression to sum_k w_k(t) * x(u_k(t)), one group per map."""
    if isinstance(A, Identity):
        return (MapGroup(AffineMap.identity(), PiecewiseExpr.constant(1.0)),)
    if isinstance(A, LinearCombination):
        groups = []
        for coef, op in A.terms:
            groups.extend(MapGroup(g.map, expr_scale(g.weight, coef)) for g in normal_form(op))
        return _merge(groups)
    if isinstance(A, Product):
        # a(t) * (right x)(u(t)) = a(t) * b(u(t)) * x(v(u(t)))
        groups = []
        for outer in normal_form(A.left):
            for inner in normal_form(A.right):
                weight = expr_mul(outer.weight, compose_affine(inner.weight, *_coeffs(outer.map)))
                groups.append(MapGroup(inner.map.compose(outer.map), weight))
        return _merge(groups)
    wc = as_weighted_composition(A)
    return (MapGroup(wc.map, wc.weight),)


@dataclass(frozen=True)
class RelationSides:
    lhs: object
    rhs: object
    form: str = AB_BFA

    def closed_form(self) -> Tuple[Tuple[MapGroup, ...], Tuple[MapGroup, ...]]:
        """Both sides in (map, weight) normal form."""
        return normal_form(self.lhs), normal_form(self.rhs)

    def apply_lhs(self, x: Callable, t):
        return apply(self.lhs, x, t)

    def apply_rhs(self, x: Callable, t):
        return apply(self.rhs, x, t)


def integer_cells(coefficient: Callable[[int], float], window: IntervalSet):
    """Unit cells [i, i+1) of an i-indexed family that meet the window.

    Args:
        coefficient: i -> alpha_i
        window: Bounded evaluation window

    Returns:
        (alphas, parts) for the finitely many cells that matter
    """
    lo, hi = window.hull()
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("Window must be bounded")
    alphas, parts = [], []
    for i in range(math.floor(lo), math.ceil(hi) + 1):
        cell = IntervalSet((Interval(i, i + 1, True, False),))
        if not cell.intersect(window).is_empty():
            alphas.append(float(coefficient(i)))
            parts.append(cell)
    return tuple(alphas), tuple(parts)
