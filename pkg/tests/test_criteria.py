import math

import numpy as np
import pytest

from core.criteria import (
    Status,
    Verdict,
    Witness,
    check_mult_mult,
    check_mult_pointeval,
    check_piecewise_pair,
    check_pointeval_mult,
    decide,
    fixed_points,
    squarefree_part,
)
from core.errors import DegenerateAllFixed, NotContinuous
from core.funcalg import AtomicExpr, IntervalSet, PiecewiseExpr, Polynomial
from core.operators import (
    AB_BFA,
    BA_FAB,
    AffineMap,
    Mult,
    PiecewiseMult,
    PointEval,
    TranslateDilate,
    WeightedComposition,
)
from core.oracle import Consistency, OracleConfig, crosscheck, residual
from core.problem import load_problem


def test_fixed_points_of_cube():
    fix = fixed_points(Polynomial((0, 0, 0, 1)))
    np.testing.assert_allclose(fix.points, [-1.0, 0.0, 1.0], atol=1e-12)
    assert str(fix) == "{-1, 0, 1}"
    assert all(r <= 1e-10 for r in fix.residuals)


def test_fixed_points_without_real_solutions():
    # z^2 - z + 1 has negative discriminant
    assert fixed_points(Polynomial((1, 0, 1))).is_empty()
    # F(z) - z is a nonzero constant
    assert fixed_points(Polynomial((2, 1))).is_empty()


def test_identity_has_every_point_fixed():
    with pytest.raises(DegenerateAllFixed):
        fixed_points(Polynomial((0, 1)))


@pytest.mark.parametrize('coeffs', [(1e-11, 1.0), (0.0, 1.0, 1e-13), (0.0, 1.0 + 1e-15)])
def test_near_identity_is_not_the_identity(coeffs):
    F = Polynomial(coeffs)
    assert not F.is_identity()
    fix = fixed_points(F)
    assert all(abs(F(z) - z) <= 1e-10 for z in fix.points)


def test_near_identity_shift_has_no_fixed_points():
    assert fixed_points(Polynomial((1e-11, 1.0))).is_empty()


def test_roots_missing_the_tolerance_are_unresolved():
    # F(z) - z = 1e12 (z^2 - 2): double rounding near sqrt(2) stays far above 1e-10
    F = Polynomial((-2e12, 1.0, 1e12))
    fix = fixed_points(F)
    assert fix.points == ()
    assert fix.residuals == ()
    np.testing.assert_allclose(fix.unresolved, [-math.sqrt(2), math.sqrt(2)], rtol=1e-12)


def test_double_root_is_reported_once():
    # z^2 - 2z + 1 = (z - 1)^2, so F(z) = z^2 - z + 1
    fix = fixed_points(Polynomial((1, -1, 1)))
    assert len(fix.points) == 1
    assert fix.points[0] == pytest.approx(1.0, abs=1e-9)


def test_squarefree_part():
    # (z - 1)^2 (z + 2)
    sqf = np.array(squarefree_part((2, -3, 0, 1)))
    np.testing.assert_allclose(sqf / sqf[-1], [-2.0, 1.0, 1.0])


def test_random_polynomials_lose_no_sign_change():
    rng = np.random.default_rng(3)
    for _ in range(100):
        degree = int(rng.integers(2, 7))
        coeffs = tuple(rng.uniform(-1, 1, size=degree)) + (1.0,)
        F = Polynomial(coeffs)
        fix = fixed_points(F)
        assert list(fix.points) == sorted(fix.points)
        assert all(r <= 1e-10 for r in fix.residuals)

        g = np.array(F.minus_identity())
        lo, hi = fix.scan_range
        z = np.linspace(lo, hi, 100_001)
        values = np.polynomial.polynomial.polyval(z, g)
        for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
            assert any(z[i] - 1e-9 <= p <= z[i + 1] + 1e-9 for p in fix.points)


THIRDS = (IntervalSet.parse("[0,1/3]"), IntervalSet.parse("(1/3,1/2)"), IntervalSet.parse("[1/2,1]"))


@pytest.mark.parametrize('n', [2, 3, 4])
@pytest.mark.parametrize('beta', [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
def test_piecewise_pair_holds_iff_beta_is_fixed(beta, n):
    A = PiecewiseMult((1.0, beta, 2.0), THIRDS)
    B = PiecewiseMult((1.0,), (THIRDS[1],))
    verdict = check_piecewise_pair(A, B, Polynomial.monomial(1.0, n), IntervalSet.closed(0, 1))
    expected = Status.HOLDS if math.isclose(beta ** n, beta) else Status.FAILS
    assert verdict.status is expected
    cfg = OracleConfig(window=(0.0, 1.0), grid_n=1024)
    report = crosscheck(verdict, residual(A, B, Polynomial.monomial(1.0, n), AB_BFA, cfg), cfg)
    assert report.status is Consistency.CONSISTENT
    if expected is Status.FAILS:
        assert 1 / 3 < verdict.witness.point < 1 / 2


def test_piecewise_pair_with_zero_b_holds():
    A = PiecewiseMult((1.0, 5.0, 2.0), THIRDS)
    B = PiecewiseMult((0.0,), (THIRDS[1],))
    verdict = check_piecewise_pair(A, B, Polynomial((0, 0, 1)), IntervalSet.closed(0, 1))
    assert verdict.status is Status.HOLDS
    assert verdict.certificate


def test_tiny_piecewise_coefficient_is_not_zero():
    # alpha a - 0 = 1e-11 on [0,1]
    A = PiecewiseMult((1e-11,), (IntervalSet.closed(0, 1),))
    B = PiecewiseMult((1.0,), (IntervalSet.closed(0, 1),))
    verdict = check_piecewise_pair(A, B, Polynomial((0.0,)), IntervalSet.closed(0, 1))
    assert verdict.status is Status.FAILS
    assert 0 <= verdict.witness.point <= 1


@pytest.mark.parametrize('c', [1.0, 1e-6, 1e-10, 1e-11, -1e-13])
def test_multiplication_pair_ignores_weight_scale(c):
    a = PiecewiseExpr.polynomial((0.0, 1.0), IntervalSet.closed(0, 1))
    b = PiecewiseExpr.constant(c, IntervalSet.closed(0, 1))
    verdict = check_mult_mult(a, b, Polynomial((0, 0, 1)), IntervalSet.closed(0, 1))
    assert verdict.status is Status.FAILS
    assert 0 <= verdict.witness.point <= 1


def test_multiplication_pair_by_support_overlap():
    # a(t) = t on [0,1/2]: a - a^2 lives on [0,1/2]
    a = PiecewiseExpr.polynomial((0.0, 1.0), IntervalSet.parse("[0,1/2]"))
    square = Polynomial((0, 0, 1))
    window = IntervalSet.closed(0, 1)

    touching = PiecewiseExpr.indicator(IntervalSet.parse("[1/2,1]"))
    assert check_mult_mult(a, touching, square, window).status is Status.HOLDS

    overlapping = PiecewiseExpr.indicator(IntervalSet.parse("[1/4,1]"))
    verdict = check_mult_mult(a, overlapping, square, window)
    assert verdict.status is Status.FAILS
    assert 0.25 <= verdict.witness.point <= 0.5


@pytest.mark.parametrize('name, status', [
    ('point_eval_locally_constant', Status.HOLDS),
    ('point_eval_locally_constant_scaled', Status.FAILS),
    ('point_eval_disjoint_supports', Status.HOLDS),
    ('point_eval_disjoint_supports_constant_term', Status.FAILS),
    ('point_eval_k1_zero', Status.HOLDS),
    ('point_eval_k1_zero_moved_gamma', Status.FAILS),
    ('point_eval_vanishing_at_gamma', Status.HOLDS),
    ('point_eval_vanishing_at_gamma_linear_term', Status.FAILS),
])
def test_point_evaluation_cases(fixtures_dir, name, status):
    problem = load_problem(fixtures_dir / f"{name}.json")
    verdict = decide(problem.A, problem.B, problem.F, problem.form, problem.window)
    assert verdict.status is status
    assert verdict.rule.startswith('point evaluation and multiplication')
    if status is Status.FAILS:
        assert verdict.witness is not None


def test_nonzero_constant_term_fails_with_vanishing_test_function():
    a = PiecewiseExpr.polynomial((1.0,))
    b = PiecewiseExpr.polynomial((0.0, 1.0))
    verdict = check_pointeval_mult(a, 0.0, b, Polynomial((0.5, 1.0)), IntervalSet.closed(-1, 1))
    assert verdict.status is Status.FAILS
    assert verdict.rule.endswith("case (v)")
    assert verdict.witness.function == "x(t)=(t - 0)^2"


def test_discontinuous_weight_is_rejected():
    jump = PiecewiseExpr.indicator(IntervalSet.closed(0, 1))
    with pytest.raises(NotContinuous):
        check_pointeval_mult(jump, 0.5, PiecewiseExpr.constant(1.0), Polynomial((0, 0, 1)),
                             IntervalSet.closed(0, 2))


def _shifted_weight(level):
    return PiecewiseExpr.of(
        (IntervalSet.parse("(-inf,0)"), AtomicExpr.constant(level)),
        (IntervalSet.closed(0, 1), AtomicExpr.sinusoid(math.pi, offset=(level,))),
        (IntervalSet.parse("(1,inf)"), AtomicExpr.constant(level)),
    )


@pytest.mark.parametrize('level', [-1.0, 0.0, 0.5, 1.0, 3.0])
def test_multiplication_and_point_evaluation_level(level):
    b = PiecewiseExpr.of((IntervalSet.closed(1, 2), AtomicExpr.sinusoid(math.pi)))
    window = IntervalSet.closed(0, 2)
    # F(a(1/2)) = (level + 1) - 1 = level, and a - level lives on [0,1]
    holds = check_mult_pointeval(_shifted_weight(level), b, 0.5, Polynomial((-1, 1)), window)
    assert holds.status is Status.HOLDS
    shifted = check_mult_pointeval(_shifted_weight(level), b, 0.5, Polynomial((-0.5, 1)), window)
    assert shifted.status is Status.FAILS
    assert 1 < shifted.witness.point < 2
    A, B = Mult(_shifted_weight(level)), PointEval(b, 0.5)
    cfg = OracleConfig(window=(0.0, 2.0))
    assert residual(A, B, Polynomial((-1, 1)), AB_BFA, cfg) <= 1e-10
    assert residual(A, B, Polynomial((-0.5, 1)), AB_BFA, cfg) >= 1e-3


def test_wavelet_pair_holds():
    A = TranslateDilate.translation(1.0, 1.0)
    B = TranslateDilate.dilation(2 ** -0.5, 0.5)
    verdict = decide(A, B, Polynomial((0, 0, 1)), BA_FAB, IntervalSet.closed(-8, 8))
    assert verdict.status is Status.HOLDS
    assert verdict.rule == 'translation and dilation'


@pytest.mark.parametrize('m', [1, 2, 3, 4, 5])
def test_dilation_by_reciprocal_power(m):
    A = TranslateDilate.translation(1.0, 1.0)
    F = Polynomial.monomial(1.0, m)
    window = IntervalSet.closed(-8, 8)
    assert decide(A, TranslateDilate.dilation(1.5, 1 / m), F, BA_FAB, window).status is Status.HOLDS
    off = decide(A, TranslateDilate.dilation(1.5, 1 / m + 0.1), F, BA_FAB, window)
    assert off.status is Status.FAILS
    assert off.witness is not None
    cfg = OracleConfig(window=(-8.0, 8.0))
    assert residual(A, TranslateDilate.dilation(1.5, 1 / m), F, BA_FAB, cfg) <= 1e-10
    assert residual(A, TranslateDilate.dilation(1.5, 1 / m + 0.1), F, BA_FAB, cfg) >= 1e-3


def test_wrong_coefficient_scale_fails():
    A = TranslateDilate.translation(2.0, 1.0)
    B = TranslateDilate.dilation(1.0, 0.5)
    # alpha * beta = 2 but delta * alpha^2 * beta = 4
    verdict = decide(A, B, Polynomial((0, 0, 1)), BA_FAB, IntervalSet.closed(-8, 8))
    assert verdict.status is Status.FAILS


def test_partitioned_translation_is_unknown():
    A = TranslateDilate((1.0, 2.0), (IntervalSet.parse("(-inf,0)"), IntervalSet.parse("[0,inf)")), 1.0, 1.0)
    B = TranslateDilate.dilation(1.0, 0.5)
    verdict = decide(A, B, Polynomial((0, 0, 1)), BA_FAB, IntervalSet.closed(-8, 8))
    assert verdict.status is Status.UNKNOWN
    assert verdict.reason


def test_commuting_compositions_in_both_forms(fixtures_dir):
    problem = load_problem(fixtures_dir / 'composition_commuting.json')
    for form in ('AB=BF(A)', BA_FAB):
        assert decide(problem.A, problem.B, problem.F, form, problem.window).status is Status.HOLDS


def test_composition_weight_mismatch_fails(fixtures_dir):
    problem = load_problem(fixtures_dir / 'composition_weight_mismatch.json')
    verdict = decide(problem.A, problem.B, problem.F, problem.form, problem.window)
    assert verdict.status is Status.FAILS
    assert verdict.witness.point is not None


def test_leaving_the_expression_class_gives_unknown():
    sine = PiecewiseExpr.of((IntervalSet.real_line(), AtomicExpr.sinusoid(math.pi)))
    A = WeightedComposition(sine, AffineMap(0.5, 0.0))
    B = WeightedComposition(sine, AffineMap(0.5, 0.0))
    verdict = decide(A, B, Polynomial((0, 1)), window=IntervalSet.closed(0, 1))
    assert verdict.status is Status.UNKNOWN
    assert verdict.reason


def test_verdict_serialization():
    v = Verdict(Status.FAILS, rule='multiplication pair',
                witness=Witness(point=0.25, interval='[0,1]', function='x(t)=1'),
                constraints=('k1 = 0',), certificate=('positive measure',))
    data = v.to_dict()
    assert data['status'] == 'Fails'
    assert data['witness']['point'] == 0.25
    assert Verdict.from_dict(data) == v


def test_verdict_invariants():
    with pytest.raises(ValueError):
        Verdict(Status.FAILS, rule='r')
    with pytest.raises(ValueError):
        Verdict(Status.HOLDS, rule='r')
    assert Verdict('Unknown').status is Status.UNKNOWN
