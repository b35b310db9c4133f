"""Solution families for piecewise multiplication pairs with free coefficients.

Over each nonnull cell G_i ∩ H_j (and H_j minus every G_i, where A is
zero) the relation AB = BF1(A) collapses to a scalar equation

    beta_j * (F1(c * alpha_i) - c * alpha_i) = 0

with c the constant value of the weight a on the part of the cell where b
is nonzero. Each equation says beta_j = 0 or c * alpha_i lies in Fix(F1).
The disjunctions are expanded over Zero/NonZero patterns of the free
betas, patterns that induce the same alpha constraints are grouped, and
each group is compressed into prime implicants, giving maximal cases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from core.criteria import FixedPointSet, Status, Verdict, check_piecewise_pair, fixed_points
from core.errors import DegenerateAllFixed, UnsupportedFamily
from core.funcalg import IntervalSet, Polynomial, support
from core.logger import log_debug, log_info, log_warning
from core.operators import AB_BFA, PiecewiseMult

ZERO_TOL = 1e-10
MAX_FREE_BETAS = 16

ZERO = 'Zero'
NONZERO = 'NonZero'
ANY_REAL = 'AnyReal'
IN_SET = 'InSet'


@dataclass(frozen=True)
class FamilySpec:
    """A pair of piecewise multiplication templates with named free coefficients."""

    A: PiecewiseMult
    B: PiecewiseMult
    F: Polynomial
    form: str = AB_BFA
    window: Optional[IntervalSet] = None

    def free_alphas(self) -> Tuple[str, ...]:
        return self.A.free_parameters()

    def free_betas(self) -> Tuple[str, ...]:
        return self.B.free_parameters()


@dataclass(frozen=True)
class Constraint:
    """Condition on one parameter. InSet means scale * value in Fix(F) for every scale."""

    kind: str
    scales: Tuple[float, ...] = ()

    def describe(self, name: str) -> str:
        if self.kind == ZERO:
            return f"{name} = 0"
        if self.kind == NONZERO:
            return f"{name} != 0"
        if self.kind == ANY_REAL:
            return f"{name} in R"
        terms = [name if c == 1 else f"{c:g}*{name}" for c in self.scales]
        return ' and '.join(f"{term} in Fix(F)" for term in terms)

    def allows(self, value: float, fix: Optional[FixedPointSet]) -> bool:
        if self.kind == ZERO:
            return value == 0
        if self.kind == NONZERO:
            return value != 0
        if self.kind == ANY_REAL or fix is None:
            return True
        return all(fix.contains(c * value) for c in self.scales)


@dataclass(frozen=True)
class SolutionCase:
    """Alpha constraints together with the beta patterns they apply to.

    beta_patterns is a union: the case holds for any one of the patterns.
    """

    alphas: Tuple[Tuple[str, Constraint], ...]
    beta_patterns: Tuple[Tuple[Tuple[str, Constraint], ...], ...]

    def describe(self) -> str:
        betas = ' or '.join(
            '(' + ', '.join(c.describe(n) for n, c in pattern) + ')' if pattern else '(no free betas)'
            for pattern in self.beta_patterns
        )
        alphas = ', '.join(c.describe(n) for n, c in self.alphas) or 'no free alphas'
        return f"{betas}; {alphas}"

    def allows(self, values: Dict[str, float], fix: Optional[FixedPointSet]) -> bool:
        """values meet every alpha constraint and at least one beta pattern."""
        if not all(c.allows(values[n], fix) for n, c in self.alphas):
            return False
        return any(all(c.allows(values[n], fix) for n, c in pattern)
                   for pattern in self.beta_patterns)

    def to_dict(self) -> dict:
        return {
            'alphas': {n: {'kind': c.kind, 'scales': list(c.scales)} for n, c in self.alphas},
            'beta_patterns': [{n: c.kind for n, c in pattern} for pattern in self.beta_patterns],
        }


@dataclass(frozen=True)
class SolutionSet:
    cases: Tuple[SolutionCase, ...] = ()
    fixed: Optional[FixedPointSet] = None
    all_fixed: bool = False
    truncated: bool = False
    note: str = ''

    def is_empty(self) -> bool:
        return not self.cases

    def covers(self, values: Dict[str, float]) -> bool:
        return any(case.allows(values, self.fixed) for case in self.cases)

    @property
    def description(self) -> Tuple[str, ...]:
        return tuple(f"{k}. {case.describe()}" for k, case in enumerate(self.cases, start=1))

    def to_dict(self) -> dict:
        return {
            'cases': [case.to_dict() for case in self.cases],
            'fix': None if self.all_fixed or self.fixed is None else list(self.fixed.points),
            'all_fixed': self.all_fixed,
            'truncated': self.truncated,
            'note': self.note,
        }


@dataclass(frozen=True)
class _Equation:
    beta: object
    alpha: object
    scale: float


def _weight_levels(fam: FamilySpec, region: IntervalSet) -> List[float]:
    """Constant values of a on the positive-measure parts of region."""
    levels = []
    weight = fam.A.weight
    for piece in weight.pieces:
        sub = piece.domain.intersect(region)
        if sub.is_null():
            continue
        c = piece.expr.constant_value()
        if c is None:
            raise UnsupportedFamily(
                f"weight a = {piece.expr} is not constant on {sub}, where b is nonzero")
        levels.append(c)
    if not region.difference(weight.covered()).is_null():
        levels.append(0.0)
    return levels


def reduce_equations(fam: FamilySpec) -> Tuple[_Equation, ...]:
    """Scalar equations, one per nonnull cell and weight level."""
    window = IntervalSet.real_line() if fam.window is None else fam.window
    b_support = support(fam.B.weight, window)
    union_g = IntervalSet.empty()
    for part in fam.A.parts:
        union_g = union_g.union(part)

    equations = []
    for beta, h in zip(fam.B.alphas, fam.B.parts):
        region_h = h.intersect(b_support)
        for alpha, g in zip(fam.A.alphas, fam.A.parts):
            for c in _weight_levels(fam, region_h.intersect(g)):
                equations.append(_Equation(beta, alpha, c))
        if not region_h.difference(union_g).is_null():
            equations.append(_Equation(beta, 0.0, 1.0))
    unique = tuple(dict.fromkeys(equations))
    log_debug(f"Family reduced to {len(unique)} scalar equations")
    return unique


def _check_names(fam: FamilySpec):
    names = list(fam.free_alphas()) + list(fam.free_betas())
    duplicates = {n for n in names if names.count(n) > 1}
    if duplicates:
        raise UnsupportedFamily(
            f"parameters {sorted(duplicates)} appear more than once; "
            "they would enter the equations non-multiplicatively")


def _prime_implicants(minterms: Sequence[Tuple[int, ...]]) -> List[Tuple[Optional[int], ...]]:
    """Quine-McCluskey merge; None marks a don't-care position."""
    current = {tuple(m) for m in minterms}
    primes = set()
    while current:
        merged, used = set(), set()
        items = sorted(current, key=lambda t: tuple(-1 if v is None else v for v in t))
        for x, y in itertools.combinations(items, 2):
            diff = [k for k, (u, v) in enumerate(zip(x, y)) if u != v]
            if len(diff) == 1 and x[diff[0]] is not None and y[diff[0]] is not None:
                combined = list(x)
                combined[diff[0]] = None
                merged.add(tuple(combined))
                used.update((x, y))
        primes |= current - used
        current = merged
    # Drop implicants covered by a more general one
    def covers(general, specific):
        return all(g is None or g == s for g, s in zip(general, specific))
    result = [p for p in primes if not any(q != p and covers(q, p) for q in primes)]
    return sorted(result, key=lambda t: tuple(-1 if v is None else v for v in t))


def _allowed_points(fix: FixedPointSet, scales: FrozenSet[float]) -> List[float]:
    scales = sorted(scales)
    first = scales[0]
    candidates = [p / first for p in fix.points]
    return [v for v in candidates if all(fix.contains(c * v) for c in scales[1:])]


def enumerate_solutions(fam: FamilySpec, max_cases: int = 64) -> SolutionSet:
    """All (alpha, beta) values for which the family satisfies the relation.

    Raises:
        UnsupportedFamily: if a free parameter does not enter as a plain
            scalar coefficient
    """
    if not isinstance(fam.A, PiecewiseMult) or not isinstance(fam.B, PiecewiseMult):
        raise UnsupportedFamily("search works on piecewise multiplication templates")
    _check_names(fam)
    free_alphas, free_betas = fam.free_alphas(), fam.free_betas()

    if not free_alphas and not free_betas:
        verdict = check_piecewise_pair(fam.A, fam.B, fam.F, fam.window)
        cases = (SolutionCase((), ((),)),) if verdict.status is Status.HOLDS else ()
        return SolutionSet(cases, note=f"no free parameters: {verdict.status.value}")

    try:
        fix = fixed_points(fam.F)
        all_fixed = False
    except DegenerateAllFixed:
        fix, all_fixed = None, True

    equations = reduce_equations(fam)
    active_betas = tuple(b for b in free_betas if any(e.beta == b for e in equations))
    if len(active_betas) > MAX_FREE_BETAS:
        raise UnsupportedFamily(f"{len(active_betas)} free B coefficients exceed {MAX_FREE_BETAS}")

    groups: Dict[Tuple[FrozenSet[float], ...], List[Tuple[int, ...]]] = {}
    for bits in itertools.product((0, 1), repeat=len(active_betas)):
        nonzero = dict(zip(active_betas, bits))
        alpha_scales = _alpha_constraints(equations, nonzero, free_alphas, fam.F, all_fixed)
        if alpha_scales is None:
            continue
        if not all_fixed and any(s and not _allowed_points(fix, s) for s in alpha_scales):
            continue
        groups.setdefault(alpha_scales, []).append(bits)

    cases = []
    for alpha_scales, minterms in groups.items():
        alphas = tuple(
            (name, Constraint(IN_SET, tuple(sorted(s))) if s else Constraint(ANY_REAL))
            for name, s in zip(free_alphas, alpha_scales)
        )
        patterns = []
        for implicant in _prime_implicants(minterms):
            pattern = tuple(
                (name, Constraint(ANY_REAL if v is None else (NONZERO if v else ZERO)))
                for name, v in zip(active_betas, implicant)
            )
            patterns.append(pattern)
        cases.append(SolutionCase(alphas, tuple(patterns)))

    # Most constrained betas first, like the hand-written case lists
    cases.sort(key=lambda c: (sum(k.kind == IN_SET for _, k in c.alphas), c.describe()))
    truncated = len(cases) > max_cases
    if truncated:
        log_warning(f"Search produced {len(cases)} cases; keeping the first {max_cases}")
        cases = cases[:max_cases]

    idle = [b for b in free_betas if b not in active_betas]
    note = f"{', '.join(idle)} unconstrained" if idle else ''
    log_info(f"Search: {len(cases)} case(s) over {len(free_alphas)} alpha(s) "
             f"and {len(active_betas)} beta(s)")
    return SolutionSet(tuple(cases), fix, all_fixed, truncated, note)


def _alpha_constraints(equations, nonzero: dict, free_alphas, F: Polynomial, all_fixed: bool):
    """Scales each free alpha must satisfy, or None if the pattern is infeasible."""
    scales = {name: set() for name in free_alphas}
    for eq in equations:
        if isinstance(eq.beta, str):
            if not nonzero[eq.beta]:
                continue
        elif eq.beta == 0:
            continue
        if isinstance(eq.alpha, str) and eq.scale != 0:
            if not all_fixed:
                scales[eq.alpha].add(eq.scale)
            continue
        value = 0.0 if isinstance(eq.alpha, str) else eq.scale * eq.alpha
        if abs(F(value) - value) > ZERO_TOL * max(1.0, abs(value)):
            return None
    return tuple(frozenset(scales[name]) for name in free_alphas)


def sample_case(case: SolutionCase, solutions: SolutionSet, rng,
                free_names: Sequence[str] = ()) -> Dict[str, float]:
    """Random parameter values satisfying one case.

    One of the case's beta patterns is picked at random; names the case
    does not mention get an arbitrary value.
    """
    values = {name: float(rng.uniform(-2.0, 2.0)) for name in free_names}
    for name, constraint in case.alphas:
        if constraint.kind == IN_SET and solutions.fixed is not None:
            values[name] = float(rng.choice(_allowed_points(solutions.fixed, frozenset(constraint.scales))))
        else:
            values[name] = float(rng.uniform(-2.0, 2.0))
    pattern = case.beta_patterns[int(rng.integers(len(case.beta_patterns)))]
    for name, constraint in pattern:
        if constraint.kind == ZERO:
            values[name] = 0.0
        elif constraint.kind == NONZERO:
            values[name] = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.25, 2.0))
        else:
            values[name] = float(rng.uniform(-2.0, 2.0))
    return values


def conditional_verdict(solutions: SolutionSet) -> Verdict:
    """Summarize a solution set as a ConditionalOn verdict."""
    constraints = solutions.description or ('no parameter values satisfy the relation',)
    if solutions.truncated:
        constraints = constraints + ('case list truncated',)
    return Verdict(Status.CONDITIONAL, rule='parameter search', constraints=constraints,
                   reason=solutions.note)
