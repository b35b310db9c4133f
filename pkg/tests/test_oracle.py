import numpy as np
import pytest

from core.criteria import Status, Verdict, Witness, decide
from core.errors import WindowTooSmall
from core.funcalg import AtomicExpr, IntervalSet, PiecewiseExpr, Polynomial
from core.operators import AB_BFA, AffineMap, Mult, PiecewiseMult, PointEval, WeightedComposition
from core.oracle import (
    Consistency,
    OracleConfig,
    build_battery,
    build_grid,
    check_window,
    crosscheck,
    relation_breakpoints,
    residual,
    residual_table,
)
from core.problem import load_problem


def _oracle(problem, **kwargs):
    cfg = OracleConfig(window=problem.bounds(), **kwargs)
    return residual_table(problem.A, problem.B, problem.F, problem.form, cfg), cfg


def test_wavelet_pair_residual_is_roundoff(fixtures_dir):
    rows, _ = _oracle(load_problem(fixtures_dir / 'wavelet_pair.json'))
    assert max(row.residual for row in rows) <= 1e-12


def test_zero_b_gives_zero_residual(fixtures_dir):
    rows, _ = _oracle(load_problem(fixtures_dir / 'piecewise_zero_b.json'))
    assert all(row.residual == 0.0 for row in rows)


def test_failing_piecewise_pair_has_large_residual(fixtures_dir):
    rows, _ = _oracle(load_problem(fixtures_dir / 'piecewise_scalar_fails.json'))
    by_name = {row.function: row for row in rows}
    # on (1/3,1/2): |2 - 4| / (1 + 4)
    assert by_name['1'].residual == pytest.approx(0.4)


def test_shifted_commutator_residual(fixtures_dir):
    rows, _ = _oracle(load_problem(fixtures_dir / 'shifted_commutator.json'))
    assert max(row.residual for row in rows) <= 1e-10


@pytest.mark.parametrize('p', [1, 2, 'inf'])
def test_every_norm_separates_holds_from_fails(fixtures_dir, p):
    holds, _ = _oracle(load_problem(fixtures_dir / 'piecewise_scalar_holds.json'), p=p)
    fails, _ = _oracle(load_problem(fixtures_dir / 'piecewise_scalar_fails.json'), p=p)
    assert max(r.residual for r in holds) <= 1e-9
    assert max(r.residual for r in fails) >= 1e-6


def test_grid_excludes_breakpoint_neighbourhoods():
    cfg = OracleConfig(window=(0.0, 1.0), grid_n=1000)
    full = build_grid(cfg, ())
    assert full.size == 1000
    assert full.min() > 0.0 and full.max() < 1.0

    grid = build_grid(cfg, (0.5, 1 / 3))
    assert grid.size < 1000
    assert np.min(np.abs(grid - 0.5)) > cfg.exclusion * cfg.step
    assert np.min(np.abs(grid - 1 / 3)) > cfg.exclusion * cfg.step
    np.testing.assert_array_equal(grid, build_grid(cfg, (1 / 3, 0.5)))


def test_breakpoints_are_pulled_back_through_maps():
    A = WeightedComposition(PiecewiseExpr.indicator(IntervalSet.closed(0, 1)), AffineMap(0.5, 0.0))
    B = WeightedComposition(PiecewiseExpr.constant(1.0), AffineMap(0.5, 0.0))
    cfg = OracleConfig(window=(0.0, 4.0))
    points = relation_breakpoints(A, B, Polynomial((0, 0, 1)), cfg)
    # 1 pulled back through t -> t/2 once and twice
    assert 1.0 in points and 2.0 in points and 4.0 in points


def test_battery_is_reproducible_from_the_seed():
    cfg = OracleConfig(window=(-1.0, 1.0), seed=11)
    t = np.linspace(-1, 1, 33)
    first = build_battery(cfg, (0.0,))
    second = build_battery(cfg, (0.0,))
    assert [f.name for f in first] == [f.name for f in second]
    for f, g in zip(first, second):
        np.testing.assert_array_equal(f(t), g(t))
    other = build_battery(OracleConfig(window=(-1.0, 1.0), seed=12), (0.0,))
    assert not np.allclose(first[-1](t), other[-1](t))
    # one bump per partition cell
    assert sum(f.name.startswith('bump') for f in first) == 2


def test_bump_is_supported_on_its_cell():
    cfg = OracleConfig(window=(0.0, 2.0))
    bump = next(f for f in build_battery(cfg, (1.0,)) if f.name.startswith('bump[1'))
    np.testing.assert_array_equal(bump(np.array([0.5, 0.99, 2.5])), [0.0, 0.0, 0.0])
    assert float(bump(1.5)) == pytest.approx(1.0)


def test_window_too_small():
    cfg = OracleConfig(window=(0.0, 2.0))
    shift = WeightedComposition(PiecewiseExpr.constant(1.0), AffineMap(1.0, -1.0))
    mult = PiecewiseMult((1.0,), (IntervalSet.closed(0, 2),))
    with pytest.raises(WindowTooSmall):
        check_window(shift, mult, cfg)
    far = PointEval(PiecewiseExpr.constant(1.0), 5.0)
    with pytest.raises(WindowTooSmall):
        residual(far, mult, Polynomial((0, 1)), AB_BFA, cfg)
    check_window(WeightedComposition(PiecewiseExpr.constant(1.0), AffineMap(0.5, 0.0)), mult, cfg)


def test_crosscheck_classification():
    cfg = OracleConfig(window=(0.0, 1.0))
    holds = Verdict(Status.HOLDS, certificate=('empty',))
    fails = Verdict(Status.FAILS, witness=Witness(point=0.5))
    assert crosscheck(holds, 0.0, cfg).status is Consistency.CONSISTENT
    assert crosscheck(holds, 1e-3, cfg).status is Consistency.INCONSISTENT
    assert crosscheck(fails, 1e-3, cfg).status is Consistency.CONSISTENT
    assert crosscheck(fails, 0.0, cfg).status is Consistency.INCONSISTENT
    assert crosscheck(fails, 1e-8, cfg).status is Consistency.AMBIGUOUS
    assert crosscheck(Verdict(Status.UNKNOWN), 5.0, cfg).status is Consistency.CONSISTENT


def test_oracle_config_validation():
    assert OracleConfig(window=(0, 1), p='INF').p == 'inf'
    assert OracleConfig(window=(0, 1), p='2').p == 2
    with pytest.raises(ValueError):
        OracleConfig(window=(1, 1))
    with pytest.raises(ValueError):
        OracleConfig(window=(0, float('inf')))
    with pytest.raises(ValueError):
        OracleConfig(window=(0, 1), p=3)
    with pytest.raises(ValueError):
        OracleConfig(window=(0, 1), tau_pass=1e-3, tau_fail=1e-6)


def test_from_settings_uses_settings_keys():
    cfg = OracleConfig.from_settings({'grid_n': 512, 'norm': '1', 'seed': 4}, (0.0, 2.0))
    assert (cfg.grid_n, cfg.p, cfg.seed, cfg.window) == (512, 1, 4, (0.0, 2.0))


def test_symbolic_and_numeric_agree_on_random_multiplication_pairs():
    rng = np.random.default_rng(2024)
    thirds = (IntervalSet.parse("[0,1/3]"), IntervalSet.parse("(1/3,1/2)"), IntervalSet.parse("[1/2,1]"))
    window = IntervalSet.closed(0, 1)
    cfg = OracleConfig(window=(0.0, 1.0), grid_n=1024)
    seen = set()
    for _ in range(40):
        A = PiecewiseMult(tuple(float(a) for a in rng.choice([-1.0, 0.0, 1.0, 2.0], size=3)), thirds)
        B = PiecewiseMult(tuple(float(b) for b in rng.choice([0.0, 1.0], size=3)), thirds)
        F = Polynomial.monomial(1.0, int(rng.integers(2, 4)))
        verdict = decide(A, B, F, AB_BFA, window)
        report = crosscheck(verdict, residual(A, B, F, AB_BFA, cfg), cfg)
        assert report.status is Consistency.CONSISTENT, report.message
        seen.add(verdict.status)
    assert seen == {Status.HOLDS, Status.FAILS}


HALVES = (IntervalSet.parse("[0,1/2)"), IntervalSet.parse("[1/2,1]"))
FIXED = {(0, 0, 1): (0.0, 1.0), (0, 0, 0, 1): (-1.0, 0.0, 1.0), (-2, 0, 1): (-1.0, 2.0)}


def _random_weight(rng, base, spread):
    offset = (float(rng.uniform(*base)), float(rng.uniform(-spread, spread)))
    if rng.random() < 0.5:
        return AtomicExpr.polynomial(offset + (float(rng.uniform(-spread, spread)),))
    omega = float(rng.integers(1, 4)) * np.pi
    return AtomicExpr.sinusoid(omega, poly=(float(rng.uniform(-spread, spread)),), offset=offset)


def test_symbolic_and_numeric_agree_on_random_expression_weights():
    rng = np.random.default_rng(7)
    window = IntervalSet.closed(0, 1)
    cfg = OracleConfig(window=(0.0, 1.0), grid_n=512)
    counts = {status: 0 for status in Consistency}
    seen = set()
    for _ in range(200):
        coeffs = list(FIXED)[int(rng.integers(len(FIXED)))]
        F = Polynomial(coeffs)
        a_pieces = [(HALVES[0], _random_weight(rng, (2.0, 3.0), 0.5))]
        a_fixed = rng.random() < 0.5
        if a_fixed:
            z = float(rng.choice(FIXED[coeffs]))
            a_pieces.append((HALVES[1], AtomicExpr.constant(z)))
        else:
            a_pieces.append((HALVES[1], _random_weight(rng, (2.5, 3.5), 0.2)))
        cells = [(0,), (1,), (0, 1)][int(rng.integers(3))]
        b = PiecewiseExpr.of(*((HALVES[k], _random_weight(rng, (1.0, 2.0), 0.5)) for k in cells))
        A, B = Mult(PiecewiseExpr.of(*a_pieces)), Mult(b)

        verdict = decide(A, B, F, AB_BFA, window)
        expected = Status.HOLDS if cells == (1,) and a_fixed else Status.FAILS
        assert verdict.status is expected
        report = crosscheck(verdict, residual(A, B, F, AB_BFA, cfg), cfg)
        counts[report.status] += 1
        seen.add(verdict.status)
    assert counts[Consistency.INCONSISTENT] == 0
    assert counts[Consistency.AMBIGUOUS] <= 4
    assert seen == {Status.HOLDS, Status.FAILS}
