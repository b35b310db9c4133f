"""Symbolic deciders for AB = BF(A) and BA = F(A)B.

Each checker returns a Verdict quantified over all x in the operators'
space. L_p checkers test nullity of support intersections; checkers for
continuous-function spaces test emptiness, using the fact that a
continuous function vanishing a.e. on an interval vanishes everywhere
there.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Optional, Tuple

import sympy
from numpy.polynomial import polynomial as P

from core.errors import DegenerateAllFixed, ExprClassOverflow, NotContinuous
from core.funcalg import (
    IntervalSet,
    PiecewiseExpr,
    Polynomial,
    continuity_defects,
    constant_on_open_subinterval,
    expr_mul,
    expr_scale,
    expr_sub,
    nonzero_point,
    poly_compose,
    support,
)
from core.logger import log_debug, log_info, log_warning
from core.operators import (
    AB_BFA,
    BA_FAB,
    Mult,
    PiecewiseMult,
    PointEval,
    TranslateDilate,
    WeightedComposition,
    MapGroup,
    _merge,
    relation_sides,
)

# |a(gamma)|, |b(gamma)|, |delta_0| at or below this count as zero
ZERO_TOL = 1e-10


class Status(str, Enum):
    HOLDS = 'Holds'
    FAILS = 'Fails'
    CONDITIONAL = 'ConditionalOn'
    UNKNOWN = 'Unknown'


@dataclass(frozen=True)
class Witness:
    """Where a relation breaks: a point, the offending set and a test function."""

    point: Optional[float] = None
    interval: Optional[str] = None
    function: Optional[str] = None

    def __str__(self) -> str:
        parts = []
        if self.interval:
            parts.append(f"on {self.interval}")
        if self.point is not None:
            parts.append(f"t = {self.point:g}")
        if self.function:
            parts.append(f"with {self.function}")
        return ', '.join(parts)


@dataclass(frozen=True)
class Verdict:
    status: Status
    rule: str = ''
    witness: Optional[Witness] = None
    constraints: Tuple[str, ...] = ()
    certificate: Tuple[str, ...] = ()
    reason: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'status', Status(self.status))
        if self.status is Status.FAILS and self.witness is None:
            raise ValueError("A failing verdict needs a witness")
        if self.status is Status.HOLDS and not self.certificate:
            raise ValueError("A holding verdict needs a certificate")

    def to_dict(self) -> dict:
        data = asdict(self)
        data['status'] = self.status.value
        data['constraints'] = list(self.constraints)
        data['certificate'] = list(self.certificate)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'Verdict':
        witness = data.get('witness')
        return cls(
            status=Status(data['status']),
            rule=data.get('rule', ''),
            witness=Witness(**witness) if witness else None,
            constraints=tuple(data.get('constraints', ())),
            certificate=tuple(data.get('certificate', ())),
            reason=data.get('reason', ''),
        )


def _unknown_on_overflow(rule: str):
    """Turn ExprClassOverflow inside a checker into an Unknown verdict."""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except ExprClassOverflow as e:
                log_info(f"{rule}: expression class exceeded ({e}); verdict Unknown")
                return Verdict(Status.UNKNOWN, rule=rule, reason=str(e))
        return wrapper
    return decorator


def _window(window: Optional[IntervalSet]) -> IntervalSet:
    return IntervalSet.real_line() if window is None else window


@dataclass(frozen=True)
class FixedPointSet:
    """Real solutions of F(z) = z, sorted ascending."""

    points: Tuple[float, ...] = ()
    residuals: Tuple[float, ...] = ()
    tol: float = 1e-10
    scan_range: Tuple[float, float] = (0.0, 0.0)
    unresolved: Tuple[float, ...] = ()

    def is_empty(self) -> bool:
        return not self.points

    def contains(self, z: float, tol: float = 1e-9) -> bool:
        return any(abs(z - p) <= tol * max(1.0, abs(p)) for p in self.points)

    def __str__(self) -> str:
        if not self.points:
            return '{}'
        return '{' + ', '.join(f"{p:g}" for p in self.points) + '}'


def _sympy_poly(coeffs):
    z = sympy.Symbol('z')
    return sympy.Poly([sympy.Rational(c) for c in reversed(coeffs)], z)


def squarefree_part(coeffs) -> Tuple[float, ...]:
    """Square-free part of sum_k coeffs[k] z^k, constant term first."""
    sqf = _sympy_poly(coeffs).sqf_part()
    return tuple(float(c) for c in reversed(sqf.all_coeffs()))


def _polish(coeffs, z: float, steps: int = 3) -> float:
    """Newton steps on F(z) - z, kept only while they reduce the residual."""
    deriv = P.polyder(coeffs)
    best, best_res = z, abs(P.polyval(z, coeffs))
    for _ in range(steps):
        slope = P.polyval(best, deriv)
        if slope == 0:
            break
        candidate = best - P.polyval(best, coeffs) / slope
        res = abs(P.polyval(candidate, coeffs))
        if res >= best_res:
            break
        best, best_res = candidate, res
    return float(best)


def _isolated_root(sqf, g, lo, hi, digits: int, steps: int = 3) -> float:
    if lo != hi:
        lo, hi = sqf.refine_root(lo, hi, eps=sympy.Rational(1, 10 ** digits))
    return _polish(g, float((lo + hi) / 2), steps)


def fixed_points(F: Polynomial, tol: float = 1e-10) -> FixedPointSet:
    """All real z with F(z) = z.

    The square-free part of F(z) - z is isolated exactly (sympy's interval
    root isolation on rational coefficients), each isolating interval is
    bisected down, and the midpoint is polished with Newton steps. A root
    still off by more than tol after a tighter second pass goes to
    `unresolved` instead of `points`.

    Raises:
        DegenerateAllFixed: if F(z) = z identically
    """
    g = F.minus_identity()
    if not g:
        raise DegenerateAllFixed(f"F(z) = {F} is the identity")
    bound = 1.0 + max(abs(c) for c in g[:-1]) / abs(g[-1]) if len(g) > 1 else 1.0
    if len(g) == 1:
        return FixedPointSet((), (), tol, (-bound, bound))

    sqf = _sympy_poly(g).sqf_part()
    points, unresolved = [], []
    for (lo, hi), _ in sqf.intervals():
        z = _isolated_root(sqf, g, lo, hi, 16)
        if abs(F(z) - z) > tol:
            z = _isolated_root(sqf, g, lo, hi, 40, steps=8)
        if abs(F(z) - z) > tol:
            log_warning(f"Fixed point near {z!r} of {F} misses tolerance {tol:g}: "
                        f"residual {abs(F(z) - z):.3e}")
            unresolved.append(z)
        else:
            points.append(z)
    points.sort()
    residuals = tuple(float(abs(F(z) - z)) for z in points)
    log_debug(f"Fixed points of {F}: {points}")
    return FixedPointSet(tuple(points), residuals, tol, (-bound, bound), tuple(sorted(unresolved)))


def _null_verdict(omega: IntervalSet, rule: str, what: str, witness_exprs=(),
                  function: str = 'x(t)=1') -> Verdict:
    """Holds iff omega is null (L_p reading)."""
    if omega.is_null():
        return Verdict(Status.HOLDS, rule=rule,
                       certificate=(f"{what} = {omega} has measure zero",))
    return _positive_measure_fail(omega, rule, what, witness_exprs, function)


def _empty_verdict(omega: IntervalSet, rule: str, what: str, witness_exprs=(),
                   function: str = 'x(t)=1') -> Verdict:
    """Holds iff omega is empty (continuous-function reading)."""
    if omega.is_empty():
        return Verdict(Status.HOLDS, rule=rule, certificate=(f"{what} is empty",))
    if omega.is_null():
        return Verdict(Status.HOLDS, rule=rule, certificate=(
            f"{what} = {omega} is null, hence empty by continuity",))
    return _positive_measure_fail(omega, rule, what, witness_exprs, function)


def _positive_measure_fail(omega, rule, what, witness_exprs, function) -> Verdict:
    component = omega.positive_components()[0]
    t = nonzero_point(IntervalSet.of(component), *witness_exprs)
    return Verdict(Status.FAILS, rule=rule,
                   witness=Witness(point=t, interval=str(component), function=function),
                   certificate=(f"{what} = {omega} has positive measure",))


def _vanishes(value: float, f: PiecewiseExpr) -> bool:
    """value, read off f, is rounding noise relative to f's coefficients."""
    return abs(value) <= ZERO_TOL * f.magnitude()


def _require_continuous(f: PiecewiseExpr, window: IntervalSet, name: str):
    defects = continuity_defects(f, window)
    if defects:
        raise NotContinuous(f"{name} is not continuous at t = {defects[0]:g}", defects[0])


def _monomial_name(d: int) -> str:
    return 'x(t)=1' if d == 0 else ('x(t)=t' if d == 1 else f"x(t)=t^{d}")


def _group_witness(diff: Tuple[MapGroup, ...], bad: MapGroup, omega: IntervalSet) -> Witness:
    """Point and monomial test function exposing a nonvanishing difference.

    At a point where the maps take K distinct values, some monomial of
    degree below K separates them (Vandermonde).
    """
    component = omega.positive_components()[0]
    fallback = None
    for fraction in (0.5, 0.3819660112501051, 0.6180339887498949, 0.25, 0.75, 0.1, 0.9):
        t = component.interior_point(fraction)
        if _vanishes(float(bad.weight(t)), bad.weight):
            continue
        fallback = fallback if fallback is not None else t
        for d in range(len(diff) + 1):
            value = sum(float(g.weight(t)) * float(g.map(t)) ** d for g in diff)
            if abs(value) > 1e-9:
                return Witness(point=t, interval=str(component), function=_monomial_name(d))
    return Witness(point=fallback if fallback is not None else component.interior_point(),
                   interval=str(component))


def _normal_form_verdict(sides, window: IntervalSet, rule: str) -> Verdict:
    """Holds for all x iff every map group's weight difference vanishes a.e."""
    lhs, rhs = sides.closed_form()
    diff = _merge(tuple(lhs) + tuple(MapGroup(g.map, expr_scale(g.weight, -1.0)) for g in rhs))
    certificate = []
    for group in diff:
        omega = support(group.weight, window)
        if not omega.is_null():
            lhs_maps = {str(g.map) for g in lhs}
            rhs_maps = {str(g.map) for g in rhs}
            constraints = ()
            if lhs_maps != rhs_maps:
                constraints = (f"maps differ: {sorted(lhs_maps)} vs {sorted(rhs_maps)}",)
            return Verdict(Status.FAILS, rule=rule,
                           witness=_group_witness(diff, group, omega),
                           constraints=constraints,
                           certificate=(f"weight of x({group.map}) is nonzero on {omega}",))
        certificate.append(f"terms in x({group.map}) cancel a.e. on {window}")
    if not certificate:
        certificate.append("both sides are the zero operator")
    return Verdict(Status.HOLDS, rule=rule, certificate=tuple(certificate))


def _same_parts(A: PiecewiseMult, B: PiecewiseMult) -> bool:
    return (len(A.parts) == len(B.parts)
            and all(g.approx_equal(h) for g, h in zip(A.parts, B.parts)))


@_unknown_on_overflow('piecewise multiplication pair')
def check_piecewise_pair(A: PiecewiseMult, B: PiecewiseMult, F1: Polynomial,
                         window: IntervalSet = None) -> Verdict:
    """AB = BF1(A) for two piecewise multiplication operators on L_p.

    Both sides are multiplications, so the relation holds iff
    a_A(t) b_B(t) = b_B(t) F1(a_A(t)) for almost every t, where a_A and b_B
    are the total weights sum_i alpha_i a I_{G_i}. The refined partition
    comes for free from the piecewise product.
    """
    window = _window(window)
    if _same_parts(A, B):
        rule = 'piecewise multiplication, shared partition'
    elif F1.degree <= 0:
        rule = 'piecewise multiplication, constant F'
    elif len(B.alphas) == 1:
        rule = 'piecewise multiplication, single-indicator B'
    else:
        rule = 'piecewise multiplication'

    a_total = A.total_weight()
    b_total = B.total_weight()
    lhs = expr_mul(a_total, b_total)
    rhs = expr_mul(b_total, poly_compose(F1, a_total))
    diff = expr_sub(lhs, rhs)
    verdict = _null_verdict(support(diff, window), rule,
                            'supp(AB - BF(A) weight)', (diff,))
    log_debug(f"{rule}: {verdict.status.value}")
    return verdict


@_unknown_on_overflow('multiplication pair')
def check_mult_mult(a: PiecewiseExpr, b: PiecewiseExpr, F: Polynomial,
                    window: IntervalSet = None) -> Verdict:
    """Holds iff supp b ∩ supp(a - F(a)) is null."""
    window = _window(window)
    gap = expr_sub(a, poly_compose(F, a))
    omega = support(b, window).intersect(support(gap, window))
    return _null_verdict(omega, 'multiplication pair', 'supp b ∩ supp(a - F(a))', (b, gap))


@_unknown_on_overflow('translation and dilation')
def check_translate_dilate(A: TranslateDilate, B: TranslateDilate, F: Polynomial,
                           window: IntervalSet = None, form: str = BA_FAB) -> Verdict:
    """BA = F(A)B for inner superposition operators.

    Decided by affine conjugacy and coefficient matching when both
    operators carry a single coefficient on the whole line. A nontrivial
    partition is left Unknown: the relation then mixes I_G(scale*t) with
    I_G(t) and needs self-similarity of the partition.
    """
    rule = 'translation and dilation'
    window = _window(window)
    alpha, beta = A.uniform_coefficient(), B.uniform_coefficient()
    if alpha is None or beta is None:
        return Verdict(Status.UNKNOWN, rule=rule,
                       reason='partitioned coefficients are decided only for a single part')
    wc_a = WeightedComposition(PiecewiseExpr.constant(alpha), A.map)
    wc_b = WeightedComposition(PiecewiseExpr.constant(beta), B.map)
    verdict = _normal_form_verdict(relation_sides(wc_a, wc_b, F, form), window, rule)
    monomial = F.as_monomial()
    if monomial is not None:
        delta, m = monomial
        note = (f"maps: u(s(t)) vs s(u^{m}(t)) with u(t) = {A.map}, s(t) = {B.map}; "
                f"coefficients: alpha*beta = {alpha * beta:g}, "
                f"delta*alpha^{m}*beta = {delta * alpha ** m * beta:g}")
        verdict = Verdict(verdict.status, verdict.rule, verdict.witness,
                          verdict.constraints + (note,), verdict.certificate, verdict.reason)
    return verdict


@_unknown_on_overflow('weighted composition pair')
def check_composition_pair(A: WeightedComposition, B: WeightedComposition, F: Polynomial,
                           window: IntervalSet = None, form: str = AB_BFA) -> Verdict:
    """Map conjugacy plus the weight identity, in normal form."""
    return _normal_form_verdict(relation_sides(A, B, F, form), _window(window),
                                'weighted composition pair')


def _delta0_fail(b: PiecewiseExpr, gamma: float, window: IntervalSet, rule: str,
                 constraint: str) -> Verdict:
    """delta_0 != 0 and b not identically zero: x vanishing at gamma exposes it."""
    omega = support(b, window)
    component = omega.positive_components()[0]
    t = nonzero_point(IntervalSet.of(component), b, PiecewiseExpr.polynomial((-gamma, 1.0)))
    return Verdict(Status.FAILS, rule=rule,
                   witness=Witness(point=t, interval=str(component),
                                   function=f"x(t)=(t - {gamma:g})^2"),
                   constraints=(constraint,),
                   certificate=(f"delta_0 * b(t) * x(t) survives where x(gamma) = 0, b != 0 on {omega}",))


@_unknown_on_overflow('point evaluation and multiplication')
def check_pointeval_mult(a: PiecewiseExpr, gamma: float, b: PiecewiseExpr, F: Polynomial,
                         window: IntervalSet) -> Verdict:
    """AB = BF(A) on C[lo, hi] for (Ax)(t) = a(t)x(gamma), (Bx)(t) = b(t)x(t).

    The identity reads a(t)b(gamma)x(gamma) = delta_0 b(t)x(t)
    + k1 a(t)b(t)x(gamma) with k1 = sum_{j>=1} delta_j a(gamma)^(j-1).
    Exactly one of five cases fires, by the zero pattern of a(gamma),
    b(gamma) and delta_0.

    Raises:
        NotContinuous: if a or b jumps inside the window
    """
    _require_continuous(a, window, 'a')
    _require_continuous(b, window, 'b')

    a_g, b_g = float(a(gamma)), float(b(gamma))
    a_zero, b_zero = _vanishes(a_g, a), _vanishes(b_g, b)
    delta0 = F.constant
    d0_zero = delta0 == 0
    a_root = 0.0 if a_zero else a_g
    k1 = float(sum(F.coefficient(j) * a_root ** (j - 1) for j in range(1, len(F.coeffs))))

    if a_zero and not b_zero:
        case = 'ii'
    elif a_zero and b_zero:
        case = 'iv'
    elif not d0_zero:
        case = 'v'
    elif not b_zero:
        case = 'i'
    else:
        case = 'iii'
    rule = f"point evaluation and multiplication, case ({case})"
    log_debug(f"{rule}: a(gamma)={a_g:g}, b(gamma)={b_g:g}, delta_0={delta0:g}, k1={k1:g}")

    b_support = support(b, window)
    if not d0_zero:
        if b_support.is_null():
            return Verdict(Status.HOLDS, rule=rule, constraints=(f"delta_0 = {delta0:g}",),
                           certificate=('b vanishes on the window',))
        return _delta0_fail(b, gamma, window, rule, f"delta_0 = {delta0:g} must be 0")

    gap = expr_sub(PiecewiseExpr.constant(b_g), expr_scale(b, k1))
    if case == 'i' and constant_on_open_subinterval(b, window) is None:
        t = nonzero_point(support(a, window), a, gap)
        return Verdict(Status.FAILS, rule=rule + ', b nowhere locally constant',
                       witness=Witness(point=t, function='x(t)=1'),
                       constraints=(f"k1 = {k1:g}",),
                       certificate=('b is constant on no open subinterval, '
                                    'while a != 0 near gamma forces k1*b(t) = b(gamma) there',))

    omega = support(a, window).intersect(support(gap, window))
    verdict = _empty_verdict(omega, rule, 'supp a ∩ supp(b(gamma) - k1*b)', (a, gap))
    return Verdict(verdict.status, verdict.rule, verdict.witness,
                   (f"k1 = {k1:g}",), verdict.certificate, verdict.reason)


@_unknown_on_overflow('multiplication and point evaluation')
def check_mult_pointeval(a: PiecewiseExpr, b: PiecewiseExpr, gamma: float, F: Polynomial,
                         window: IntervalSet) -> Verdict:
    """AB = BF(A) on C[lo, hi] for (Ax)(t) = a(t)x(t), (Bx)(t) = b(t)x(gamma).

    Holds iff supp(a - F(a(gamma))) ∩ supp b is empty.
    """
    _require_continuous(a, window, 'a')
    _require_continuous(b, window, 'b')
    level = float(F(float(a(gamma))))
    gap = expr_sub(a, PiecewiseExpr.constant(level))
    omega = support(gap, window).intersect(support(b, window))
    verdict = _empty_verdict(omega, 'multiplication and point evaluation',
                             'supp(a - F(a(gamma))) ∩ supp b', (gap, b))
    return Verdict(verdict.status, verdict.rule, verdict.witness,
                   (f"F(a(gamma)) = {level:g}",), verdict.certificate, verdict.reason)


def _as_mult_weight(op) -> Optional[PiecewiseExpr]:
    if isinstance(op, Mult):
        return op.weight
    if isinstance(op, PiecewiseMult):
        return op.total_weight()
    return None


@_unknown_on_overflow('weighted composition normal form')
def check_normal_form(A, B, F: Polynomial, form: str, window: IntervalSet = None) -> Verdict:
    """Generic decider: every operator class is a weighted composition."""
    return _normal_form_verdict(relation_sides(A, B, F, form), _window(window),
                                'weighted composition normal form')


def decide(A, B, F: Polynomial, form: str = AB_BFA, window: IntervalSet = None) -> Verdict:
    """Pick the criterion for the operator classes at hand.

    Pairs without a dedicated criterion fall back to the normal form.
    """
    a_mult, b_mult = _as_mult_weight(A), _as_mult_weight(B)
    if isinstance(A, PiecewiseMult) and isinstance(B, PiecewiseMult):
        verdict = check_piecewise_pair(A, B, F, window)
    elif a_mult is not None and b_mult is not None:
        verdict = check_mult_mult(a_mult, b_mult, F, window)
    elif isinstance(A, TranslateDilate) and isinstance(B, TranslateDilate):
        verdict = check_translate_dilate(A, B, F, window, form)
    elif isinstance(A, PointEval) and b_mult is not None and form == AB_BFA:
        verdict = check_pointeval_mult(A.weight, A.gamma, b_mult, F, _window(window))
    elif a_mult is not None and isinstance(B, PointEval) and form == AB_BFA:
        verdict = check_mult_pointeval(a_mult, B.weight, B.gamma, F, _window(window))
    elif isinstance(A, WeightedComposition) and isinstance(B, WeightedComposition):
        verdict = check_composition_pair(A, B, F, window, form)
    else:
        verdict = check_normal_form(A, B, F, form, window)
    log_info(f"Decision [{verdict.rule}] for {form}: {verdict.status.value}")
    return verdict
