import math

import numpy as np
import pytest

from core.funcalg import AtomicExpr, IntervalSet, PiecewiseExpr, Polynomial
from core.operators import (
    AB_BFA,
    BA_FAB,
    AffineMap,
    Identity,
    Mult,
    PiecewiseMult,
    PointEval,
    Product,
    TranslateDilate,
    WeightedComposition,
    apply,
    as_weighted_composition,
    integer_cells,
    iterate,
    normal_form,
    power,
    relation_sides,
)


# Off the breakpoints of every operator below and of their iterates
T = np.linspace(-2.95, 2.95, 60)
TEST_FUNCTIONS = [
    lambda t: np.ones_like(t),
    lambda t: t,
    lambda t: t ** 3 - t,
    lambda t: np.sin(np.pi * t),
    lambda t: np.exp(-t * t),
]


def _nested(A, m):
    op = A
    for _ in range(m - 1):
        op = Product(A, op)
    return op


def _operators():
    sin_weight = PiecewiseExpr.of((IntervalSet.closed(-1, 2), AtomicExpr.sinusoid(math.pi, offset=(1.0,))))
    return [
        Mult(PiecewiseExpr.polynomial((1.0, 0.5))),
        PiecewiseMult((0.5, -2.0, 3.0),
                      (IntervalSet.parse("[-3,-1)"), IntervalSet.parse("[-1,1]"), IntervalSet.parse("(1,3]"))),
        # a shift by an integer keeps the carrier sin(pi t)
        WeightedComposition(sin_weight, AffineMap(1.0, -1.0)),
        WeightedComposition(PiecewiseExpr.polynomial((0.0, 1.0)), AffineMap(-1.0, 0.25)),
        PointEval(PiecewiseExpr.polynomial((2.0, 0.0, -1.0)), 0.5),
        TranslateDilate.translation(1.5, 1.0),
        TranslateDilate.dilation(2 ** -0.5, 0.5),
        TranslateDilate((1.0, 2.0), (IntervalSet.parse("(-inf,0)"), IntervalSet.parse("[0,inf)")), 0.5, 1.0),
    ]


def test_iterate_composition_law():
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = AffineMap(rng.uniform(-1.5, 1.5), rng.uniform(-2, 2))
        j, k = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        assert iterate(u, j + k).is_close(iterate(u, j).compose(iterate(u, k)), tol=1e-9)
    assert iterate(AffineMap(1.0, -1.0), 3) == AffineMap(1.0, -3.0)
    assert iterate(AffineMap(0.5, 0.0), 0).is_identity()


def test_iterate_rejects_negative_count():
    with pytest.raises(ValueError):
        iterate(AffineMap(2.0, 1.0), -1)


@pytest.mark.parametrize('index', range(8))
def test_power_matches_nested_application(index):
    A = _operators()[index]
    for m in (1, 2, 3, 4):
        closed = power(A, m)
        nested = _nested(A, m)
        for x in TEST_FUNCTIONS:
            np.testing.assert_allclose(apply(closed, x, T), apply(nested, x, T),
                                       rtol=1e-9, atol=1e-9)


def test_power_of_uniform_translation_stays_in_class():
    A = TranslateDilate.translation(2.0, 1.0)
    A3 = power(A, 3)
    assert isinstance(A3, TranslateDilate)
    assert A3.alphas == (8.0,)
    assert A3.map == AffineMap(1.0, -3.0)


def test_power_of_point_evaluation():
    A = PointEval(PiecewiseExpr.polynomial((0.0, 1.0)), 2.0)
    A3 = power(A, 3)
    assert isinstance(A3, PointEval)
    # a(t) * a(gamma)^2
    assert A3.weight(1.0) == pytest.approx(4.0)


@pytest.mark.parametrize('index', range(8))
def test_normal_form_agrees_with_application(index):
    A = _operators()[index]
    wc = as_weighted_composition(A)
    for x in TEST_FUNCTIONS:
        np.testing.assert_allclose(apply(wc, x, T), apply(A, x, T), atol=1e-12)
        groups = normal_form(Product(A, A))
        total = sum(g.weight(T) * x(g.map(T)) for g in groups)
        np.testing.assert_allclose(total, apply(Product(A, A), x, T), rtol=1e-9, atol=1e-9)


def test_identity_and_product_order():
    A = WeightedComposition(PiecewiseExpr.constant(2.0), AffineMap(1.0, -1.0))
    B = Mult(PiecewiseExpr.polynomial((0.0, 1.0)))
    x = lambda t: t * t
    t = np.array([0.0, 1.0, 2.0])
    # (AB x)(t) = 2 * (t-1) * (t-1)^2
    np.testing.assert_allclose(apply(Product(A, B), x, t), 2 * (t - 1) ** 3)
    np.testing.assert_allclose(apply(Identity(), x, t), x(t))


@pytest.mark.parametrize('form', [AB_BFA, BA_FAB])
def test_relation_sides_closed_form_matches_application(form):
    A = WeightedComposition(PiecewiseExpr.polynomial((1.0, 1.0)), AffineMap(0.5, 0.0))
    B = Mult(PiecewiseExpr.of((IntervalSet.closed(0, 1), AtomicExpr.sinusoid(math.pi))))
    F = Polynomial((0.5, 0.0, 2.0))
    sides = relation_sides(A, B, F, form)
    lhs, rhs = sides.closed_form()
    for x in TEST_FUNCTIONS:
        np.testing.assert_allclose(sum(g.weight(T) * x(g.map(T)) for g in lhs),
                                   sides.apply_lhs(x, T), atol=1e-12)
        np.testing.assert_allclose(sum(g.weight(T) * x(g.map(T)) for g in rhs),
                                   sides.apply_rhs(x, T), rtol=1e-9, atol=1e-12)


def test_relation_sides_rejects_unknown_form():
    A = Mult(PiecewiseExpr.constant(1.0))
    with pytest.raises(ValueError):
        relation_sides(A, A, Polynomial((0, 1)), 'AB=BA')


def test_wavelet_pair_normal_forms_coincide():
    A = TranslateDilate.translation(1.0, 1.0)
    B = TranslateDilate.dilation(2 ** -0.5, 0.5)
    lhs, rhs = relation_sides(A, B, Polynomial.monomial(1.0, 2), BA_FAB).closed_form()
    assert len(lhs) == len(rhs) == 1
    assert lhs[0].map.is_close(rhs[0].map)
    assert lhs[0].map.is_close(AffineMap(0.5, -1.0))


def test_piecewise_mult_substitute_and_free_parameters():
    A = PiecewiseMult(('alpha', 2.0), (IntervalSet.parse("[0,1)"), IntervalSet.parse("[1,2]")))
    assert A.free_parameters() == ('alpha',)
    concrete = A.substitute({'alpha': -1.0})
    assert concrete.free_parameters() == ()
    assert concrete.total_weight()(0.5) == -1.0
    assert concrete.total_weight()(1.5) == 2.0


def test_uniform_coefficient_needs_the_whole_line():
    assert TranslateDilate.translation(3.0).uniform_coefficient() == 3.0
    covers_window_only = TranslateDilate((1.0,), (IntervalSet.closed(-8, 8),), 1.0, 1.0)
    assert covers_window_only.uniform_coefficient() is None


def test_integer_cells():
    alphas, parts = integer_cells(lambda i: float(i * i), IntervalSet.closed(-1.5, 1.5))
    assert alphas == (4.0, 1.0, 0.0, 1.0)
    assert [str(p) for p in parts] == ["[-2,-1)", "[-1,0)", "[0,1)", "[1,2)"]
    with pytest.raises(ValueError):
        integer_cells(lambda i: 1.0, IntervalSet.real_line())
